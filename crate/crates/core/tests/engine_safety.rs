mod common;

use common::*;
use mettagraph::atomspace::{check_mconstraints, Atom, Atomspace, TypeExpr};
use mettagraph::engine::{apply_rule, instantiate_funapp, match_at, update};
use mettagraph::lang::encode::{encode_pdts, encode_stlc, encode_untyped};
use mettagraph::lang::lambda::Term;
use mettagraph::minisys;

#[test]
fn stlc_runs_keep_the_invariants() {
    let ctx = stlc_context();
    let mut steps = 0;
    for (t, _) in stlc_corpus(7, 250, 20) {
        let enc = encode_stlc(&ctx, &t).unwrap();
        steps += check_engine_run(&enc.space, 10_000).unwrap();
    }
    assert!(steps > 1000, "{steps}");
}

#[test]
fn pdts_runs_keep_the_invariants() {
    let mut steps = 0;
    for e in pdts_corpus(3, 120) {
        let enc = encode_pdts(&pdts_context(), &e).unwrap();
        steps += check_engine_run(&enc.encoding.space, 10_000).unwrap();
    }
    assert!(steps > 500, "{steps}");
}

#[test]
fn small_system_runs_keep_the_invariants() {
    for mutated in [false, true] {
        for e in minisys::enumerate() {
            check_engine_run(&minisys::encode(&e, mutated), 1000).unwrap();
        }
    }
}

#[test]
fn diverging_runs_keep_the_invariants_while_they_last() {
    let w = Term::ulam("x", Term::app(Term::var("x"), Term::var("x")));
    let enc = encode_untyped(&Term::app(w.clone(), w)).unwrap();
    assert!(check_engine_run(&enc.space, 200).unwrap() > 0);
}

fn rejecting_space() -> Atomspace {
    let a = |n: &str| TypeExpr::base(n);
    // k a rewrites to c, which the declared domain of h rejects
    Atomspace::new()
        .add_atoms([
            Atom::typing(Atom::sym("h"), Atom::ty(TypeExpr::arrow(a("A"), a("A")))),
            Atom::typing(Atom::sym("a"), Atom::ty(a("A"))),
            Atom::typing(Atom::sym("c"), Atom::ty(a("C"))),
            Atom::equation(Atom::app(Atom::sym("k"), Atom::var("x")), Atom::sym("c")),
            Atom::app(Atom::sym("h"), Atom::app(Atom::sym("k"), Atom::sym("a")).activated().pointed()).with_ty(a("A")),
        ])
        .unwrap()
}

#[test]
fn invalid_results_fall_back_to_identity() {
    let s = rejecting_space();
    assert!(check_mconstraints(&s).is_empty());
    let p = s.pointer().unwrap();
    let rules = instantiate_funapp(p, &s).unwrap();
    assert_eq!(rules.len(), 1);
    let m = match_at(&s, &rules[0].lhs, p).unwrap();
    assert_eq!(apply_rule(&rules[0], &s, &m), s);
    assert!(update(&s).is_empty());
}

#[test]
fn valid_alternative_survives_next_to_an_invalid_one() {
    let a = |n: &str| TypeExpr::base(n);
    let mut s = rejecting_space();
    s = s
        .add_atom(Atom::equation(Atom::app(Atom::sym("k"), Atom::var("x")), Atom::sym("a")))
        .unwrap();
    let steps = update(&s);
    assert_eq!(steps.len(), 1);
    let next = &steps[0].successor;
    assert!(check_mconstraints(next).is_empty());
    assert_eq!(pointer_count(next), 1);
    let p = next.pointer().unwrap();
    assert_eq!(next.atom(p).unmarked(), Atom::sym("a").with_ty(next.atom(p).ty.clone()));
    assert!(next.typing_query(&Atom::sym("a"), &a("A")));
}
