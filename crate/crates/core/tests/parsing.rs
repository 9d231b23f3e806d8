mod common;

use common::*;
use mettagraph::atomspace::Atomspace;
use mettagraph::engine::{evaluate, pointed_atom};
use mettagraph::lang::encode::encode_stlc;
use mettagraph::metagraph::parse_sexpr;
use mettagraph::sexpr::read_all;
use mettagraph::syntax::{parse_atoms, parse_program, parse_surface, print_atoms};
use proptest::prelude::*;

const ALPHABET: &str = "()[]\\.:;,->|&$#@!=  \n\tabvxyz01λ→";

fn soup() -> impl Strategy<Value = String> {
    let chars: Vec<char> = ALPHABET.chars().collect();
    prop::collection::vec(prop::sample::select(chars), 0..60).prop_map(|v| v.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_text_never_panics(text in ".{0,80}") {
        let _ = read_all(&text);
        let _ = parse_atoms(&text);
        let _ = parse_program(&text);
        let _ = parse_sexpr::<String, String>(&text);
    }

    #[test]
    fn token_soup_never_panics(text in soup()) {
        let _ = parse_atoms(&text);
        if let Ok(p) = parse_program(&text) {
            let _ = p.term.to_term();
            let _ = p.term.to_pdts();
            let _ = p.stlc_context();
        }
    }

    #[test]
    fn errors_point_inside_the_input(text in soup()) {
        if let Err(e) = parse_program(&text) {
            prop_assert!(e.span.start <= text.len() && e.span.end <= text.len() + 1, "{:?}", e.span);
        }
    }
}

#[test]
fn printed_terms_parse_back() {
    for (t, _) in stlc_corpus(7, 250, 20) {
        let back = parse_surface(&t.to_string()).unwrap().to_term().unwrap();
        assert!(back.alpha_eq(&t), "{t} came back as {back}");
    }
    for e in pdts_corpus(3, 120) {
        let back = parse_surface(&e.to_string()).unwrap().to_pdts().unwrap();
        assert!(back.alpha_eq(&e), "{e} came back as {back}");
    }
}

#[test]
fn printed_spaces_parse_back() {
    let ctx = stlc_context();
    for (t, _) in stlc_corpus(5, 40, 20) {
        let enc = encode_stlc(&ctx, &t).unwrap();
        let text = print_atoms(&enc.space.root_atoms());
        let back = parse_atoms(&text).unwrap();
        assert_eq!(print_atoms(&back), text);
        // the untagged space computes the same normal form
        let reparsed = Atomspace::new().add_atoms(back).unwrap();
        let nf = |s: &Atomspace| {
            let ev = evaluate(s, STLC_BUDGET);
            let forms = ev.outcome.normal_forms();
            assert_eq!(forms.len(), 1);
            pointed_atom(&forms[0]).map(|a| a.unmarked().to_string())
        };
        assert_eq!(nf(&reparsed), nf(&enc.space), "{t}");
    }
}
