//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mettagraph::atomspace::{check_mconstraints, Atomspace};
use mettagraph::engine::update;
use mettagraph::lang::lambda::{stlc_typecheck, Context, SType, Term};
use mettagraph::lang::pdts::{pdts_typecheck, PdtsContext, PdtsExpr, PdtsType};
use mettagraph::lts::ExplicitLts;
use mettagraph::metagraph::{mk_edge, Metagraph, NamedLabel, Wiring};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- metagraphs

pub type G = Metagraph<String, NamedLabel>;

pub const TOP: &str = "top";
pub const TYPES: [&str; 4] = ["A", "B", "C", "D"];

/// Identity plus everything below `top`.
pub fn top_order(a: &String, b: &String) -> bool {
    a == b || b == TOP
}

fn any_type(r: &mut ChaCha8Rng) -> String {
    if r.gen_bool(0.15) {
        TOP.to_string()
    } else {
        TYPES.choose(r).unwrap().to_string()
    }
}

pub fn random_edge(r: &mut ChaCha8Rng, ids: &mut u64) -> G {
    let arity = r.gen_range(0..=3);
    let targets = (0..arity).map(|_| any_type(r)).collect();
    *ids += 1;
    mk_edge(arity, any_type(r), NamedLabel::with_id("e", *ids), targets).unwrap()
}

/// A finite graph whose wires all respect [`top_order`] and feed distinct
/// sinks, built with the raw constructors.
pub fn random_graph(r: &mut ChaCha8Rng, depth: usize, ids: &mut u64) -> G {
    if depth == 0 || r.gen_bool(0.35) {
        return if r.gen_bool(0.05) { G::Empty } else { random_edge(r, ids) };
    }
    let left = random_graph(r, depth - 1, ids);
    let right = random_graph(r, depth - 1, ids);
    let wiring = random_wiring(r, &left, &right, true);
    *ids += 1;
    Metagraph::Connect {
        left: left.into(),
        right: right.into(),
        whole_type: any_type(r),
        label: NamedLabel::with_id("c", *ids),
        wiring,
    }
}

/// Up to three wires from `left` into `right`. With `lawful` set every
/// wire respects the order and no sink is fed twice; otherwise anything
/// goes.
pub fn random_wiring(r: &mut ChaCha8Rng, left: &G, right: &G, lawful: bool) -> Wiring {
    let li = left.indices().unwrap_or_default();
    let ri = right.indices().unwrap_or_default();
    let mut w = Wiring::new();
    if li.is_empty() || ri.is_empty() {
        return w;
    }
    let mut fed: BTreeSet<_> = right.wires().into_iter().map(|(_, b)| b).collect();
    for _ in 0..r.gen_range(0..=3) {
        let i = *li.choose(r).unwrap();
        let j = *ri.choose(r).unwrap();
        if w.get(i).is_some() {
            continue;
        }
        if lawful {
            let sink = right.endpoint(j).unwrap();
            let ok = top_order(&left.type_at(i).unwrap(), &right.type_at(j).unwrap());
            if !ok || fed.contains(&sink) {
                continue;
            }
            fed.insert(sink);
        }
        w.insert(i, j);
    }
    w
}

/// `Fix(b, connect(edge, Ref b))` or the mirror image, with wires from the
/// edge into the recursive occurrence's root when the types allow.
pub fn random_rational(r: &mut ChaCha8Rng, ids: &mut u64) -> G {
    let edge = random_edge(r, ids);
    let whole = any_type(r);
    let binder = r.gen_range(0..4);
    let mut wiring = Wiring::new();
    let edge_left = r.gen_bool(0.5);
    if edge_left {
        if let Some(i) = edge.indices().unwrap().into_iter().find(|&i| top_order(&edge.type_at(i).unwrap(), &whole)) {
            if r.gen_bool(0.7) {
                wiring.insert(i, 0);
            }
        }
    }
    let (left, right) = if edge_left {
        (edge, G::fix_ref(binder))
    } else {
        (G::fix_ref(binder), edge)
    };
    *ids += 1;
    let body = Metagraph::Connect {
        left: left.into(),
        right: right.into(),
        whole_type: whole,
        label: NamedLabel::with_id("c", *ids),
        wiring,
    };
    G::fix(binder, body).unwrap()
}

/// Adds `delta` to every edge id.
pub fn shift_ids(g: &G, delta: u64) -> G {
    match g {
        Metagraph::Empty | Metagraph::Ref(_) => g.clone(),
        Metagraph::Edge {
            edge_type,
            label,
            targets,
        } => Metagraph::Edge {
            edge_type: edge_type.clone(),
            label: NamedLabel::with_id(label.name.clone(), label.id + delta),
            targets: targets.clone(),
        },
        Metagraph::Connect {
            left,
            right,
            whole_type,
            label,
            wiring,
        } => Metagraph::Connect {
            left: shift_ids(left, delta).into(),
            right: shift_ids(right, delta).into(),
            whole_type: whole_type.clone(),
            label: NamedLabel::with_id(label.name.clone(), label.id + delta),
            wiring: wiring.clone(),
        },
        Metagraph::Fix { binder, body } => Metagraph::Fix {
            binder: *binder,
            body: shift_ids(body, delta).into(),
        },
    }
}

// ---------------------------------------------------------------- STLC

pub fn a() -> SType {
    SType::base("A")
}

pub fn b() -> SType {
    SType::base("B")
}

pub fn stlc_context() -> Context {
    Context::from([
        ("a".to_string(), a()),
        ("b".to_string(), b()),
        ("f".to_string(), SType::arrow(a(), b())),
        ("g".to_string(), SType::arrow(b(), a())),
        ("h".to_string(), SType::arrow(SType::arrow(a(), a()), b())),
    ])
}

fn small_type(r: &mut ChaCha8Rng) -> SType {
    match r.gen_range(0..6) {
        0 | 1 => a(),
        2 => b(),
        3 => SType::arrow(a(), a()),
        4 => SType::arrow(a(), b()),
        _ => SType::arrow(SType::arrow(a(), a()), a()),
    }
}

struct StlcGen<'a> {
    r: &'a mut ChaCha8Rng,
    scope: Vec<(String, SType)>,
}

impl StlcGen<'_> {
    fn var_of(&mut self, ty: &SType) -> Option<Term> {
        let mut visible = BTreeSet::new();
        let hits: Vec<&String> = self
            .scope
            .iter()
            .rev()
            .filter(|(x, _)| visible.insert(x.clone()))
            .filter(|(_, t)| t == ty)
            .map(|(x, _)| x)
            .collect();
        hits.choose(self.r).map(|x| Term::var((*x).clone()))
    }

    fn binder(&mut self) -> String {
        ["x", "y", "z"].choose(self.r).unwrap().to_string()
    }

    fn lam(&mut self, dom: &SType, cod: &SType, fuel: usize) -> Term {
        let x = self.binder();
        self.scope.push((x.clone(), dom.clone()));
        let body = self.term(cod, fuel.saturating_sub(1));
        self.scope.pop();
        Term::lam(x, dom.clone(), body)
    }

    fn term(&mut self, ty: &SType, fuel: usize) -> Term {
        if fuel <= 1 {
            if let Some(v) = self.var_of(ty) {
                return v;
            }
        }
        let choice = self.r.gen_range(0..10);
        match (choice, ty) {
            (0..=2, SType::Arrow(d, c)) => self.lam(&d.clone(), &c.clone(), fuel),
            (3..=5, _) if fuel >= 4 => {
                // a redex (\x:S. t) s
                let s = small_type(self.r);
                let f = self.lam(&s, ty, fuel / 2);
                let arg = self.term(&s, fuel / 2);
                Term::app(f, arg)
            }
            (6..=7, _) if fuel >= 3 => {
                let s = small_type(self.r);
                let f = self.term(&SType::arrow(s.clone(), ty.clone()), fuel / 2);
                let arg = self.term(&s, fuel / 2);
                Term::app(f, arg)
            }
            _ => match self.var_of(ty) {
                Some(v) => v,
                None => match ty {
                    SType::Arrow(d, c) => self.lam(&d.clone(), &c.clone(), fuel),
                    SType::Base(_) => unreachable!("every base type has a constant"),
                },
            },
        }
    }
}

/// Well-typed terms in [`stlc_context`] of size at most `max_size`, most
/// of them containing redexes.
pub fn stlc_corpus(seed: u64, count: usize, max_size: usize) -> Vec<(Term, SType)> {
    let ctx = stlc_context();
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    while out.len() < count {
        let ty = small_type(&mut r);
        let fuel = r.gen_range(2..=24);
        let scope = ctx.iter().map(|(x, t)| (x.clone(), t.clone())).collect();
        let t = StlcGen { r: &mut r, scope }.term(&ty, fuel);
        if t.size() > max_size || !seen.insert(t.clone()) {
            continue;
        }
        let found = stlc_typecheck(&ctx, &t).expect("generator yields well-typed terms");
        assert_eq!(found, ty);
        out.push((t, ty));
    }
    out
}

/// Ill-typed variants of corpus terms: an argument swapped for a constant
/// of another type.
pub fn stlc_broken(corpus: &[(Term, SType)]) -> Vec<Term> {
    fn break_first(t: &Term) -> Option<Term> {
        match t {
            Term::App(f, x) => match **x {
                Term::Var(ref v) if v == "a" => Some(Term::app((**f).clone(), Term::var("b"))),
                Term::Var(ref v) if v == "b" => Some(Term::app((**f).clone(), Term::var("a"))),
                _ => break_first(f)
                    .map(|f2| Term::app(f2, (**x).clone()))
                    .or_else(|| break_first(x).map(|x2| Term::app((**f).clone(), x2))),
            },
            Term::Lam(v, ty, body) => break_first(body).map(|b| Term::Lam(v.clone(), ty.clone(), Box::new(b))),
            Term::Var(_) => None,
        }
    }
    corpus.iter().filter_map(|(t, _)| break_first(t)).collect()
}

// ---------------------------------------------------------------- PDTS

pub fn pdts_context() -> PdtsContext {
    let a = PdtsType::base("A");
    PdtsContext::from([
        ("v1".to_string(), a.clone()),
        ("v2".to_string(), a.clone()),
        ("v3".to_string(), a.clone()),
        ("k".to_string(), PdtsType::arrow(a.clone(), a)),
    ])
}

fn weight(r: &mut ChaCha8Rng) -> f64 {
    r.gen_range(1..20) as f64 / 20.0
}

struct PdtsGen<'a> {
    r: &'a mut ChaCha8Rng,
    bound: Vec<String>,
    randoms: usize,
}

impl PdtsGen<'_> {
    fn value(&mut self) -> PdtsExpr {
        let mut pool = vec!["v1".to_string(), "v2".to_string(), "v3".to_string()];
        pool.extend(self.bound.iter().cloned());
        PdtsExpr::var(pool.choose(self.r).unwrap().clone())
    }

    /// A term whose type is below `A` or a union of `A`s.
    fn base(&mut self, fuel: usize) -> PdtsExpr {
        if fuel <= 1 {
            return self.value();
        }
        match self.r.gen_range(0..6) {
            0 if self.randoms < 3 => {
                self.randoms += 1;
                let p = weight(self.r);
                PdtsExpr::random(p, self.base(fuel / 2), self.base(fuel / 2))
            }
            1 => PdtsExpr::sample(self.dist(fuel - 1)),
            2 => PdtsExpr::app(PdtsExpr::var("k"), self.base(fuel - 1)),
            3 => {
                let x = ["x", "y"].choose(self.r).unwrap().to_string();
                self.bound.push(x.clone());
                let body = self.base(fuel / 2);
                self.bound.pop();
                let arg = self.base(fuel / 2);
                PdtsExpr::app(PdtsExpr::lam(x, PdtsType::base("A"), body), arg)
            }
            _ => self.value(),
        }
    }

    fn dist(&mut self, fuel: usize) -> PdtsExpr {
        if fuel >= 3 && self.randoms < 3 && self.r.gen_bool(0.4) {
            self.randoms += 1;
            let p = weight(self.r);
            PdtsExpr::random(p, self.dist(fuel / 2), self.dist(fuel / 2))
        } else {
            PdtsExpr::thunk(self.base(fuel.saturating_sub(1)))
        }
    }
}

/// Well-typed, terminating probabilistic terms with at least one `random`
/// and every weight strictly between 0 and 1.
pub fn pdts_corpus(seed: u64, count: usize) -> Vec<PdtsExpr> {
    let ctx = pdts_context();
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    while out.len() < count {
        let fuel = r.gen_range(3..=10);
        let mut g = PdtsGen {
            r: &mut r,
            bound: Vec::new(),
            randoms: 0,
        };
        let e = g.base(fuel);
        if g.randoms == 0 || !seen.insert(e.clone()) {
            continue;
        }
        if pdts_typecheck(&ctx, &e).is_ok() {
            out.push(e);
        }
    }
    out
}

// ---------------------------------------------------------------- LTS

/// A random system over states `{prefix}0..{prefix}{n-1}` and actions
/// from `actions`.
pub fn random_lts(r: &mut ChaCha8Rng, prefix: &str, max_states: usize, actions: &[&str]) -> ExplicitLts {
    let n = r.gen_range(1..=max_states);
    let mut l = ExplicitLts::new();
    for i in 0..n {
        l = l.with_state(&format!("{prefix}{i}"));
    }
    let edges = r.gen_range(0..=2 * n);
    for _ in 0..edges {
        let from = format!("{prefix}{}", r.gen_range(0..n));
        let to = format!("{prefix}{}", r.gen_range(0..n));
        let act = actions.choose(r).unwrap();
        l.add(&from, act, &to, None);
    }
    l
}

// ---------------------------------------------------------------- engine

/// Pointer markers over every root atom.
pub fn pointer_count(space: &Atomspace) -> usize {
    fn go(a: &mettagraph::atomspace::Atom) -> usize {
        usize::from(a.pointed) + a.args.iter().map(go).sum::<usize>()
    }
    space.root_atoms().iter().map(go).sum()
}

/// Explores every state reachable by `update`, checking each successor.
/// Returns the number of steps checked.
pub fn check_engine_run(start: &Atomspace, limit: usize) -> Result<usize, String> {
    let mut seen = BTreeSet::new();
    let mut todo = vec![start.clone()];
    let mut checked = 0;
    while let Some(s) = todo.pop() {
        if !seen.insert(s.canonical()) || seen.len() > limit {
            continue;
        }
        for st in update(&s) {
            checked += 1;
            let next = &st.successor;
            let bad = check_mconstraints(next);
            if !bad.is_empty() {
                return Err(format!("constraint violations after {}: {bad:?}", st.rule));
            }
            if pointer_count(next) != 1 || next.pointer().and_then(|p| next.node(p)).is_none() {
                return Err(format!("pointer not unique after {}", st.rule));
            }
            // a rewrite consumes the node it fired at; the fallback keeps it
            let rewrite = st.rule != mettagraph::engine::RuleKind::MovePointer;
            if rewrite && next.node(st.position).is_some() {
                return Err(format!("unchanged host emitted as a successor by {}", st.rule));
            }
            if !rewrite && next == &s {
                return Err("pointer move without effect".into());
            }
            todo.push(next.clone());
        }
    }
    Ok(checked)
}

// ---------------------------------------------------------------- metagraph laws

use mettagraph::metagraph::{graph_iso, mk_connect, parse_sexpr, union, Side};

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Printing and parsing are inverse; edges report their declared types.
pub fn law_round_trip(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut ids = 0;
    let g = random_graph(&mut r, 4, &mut ids);
    let text = g.to_sexpr();
    let back: G = parse_sexpr(&text).map_err(|e| e.to_string())?;
    ensure(back == g, || format!("{text} reparsed differently"))?;
    let e = random_edge(&mut r, &mut ids);
    if let Metagraph::Edge { edge_type, targets, .. } = &e {
        ensure(e.type_at(0).as_ref() == Ok(edge_type), || "edge type".into())?;
        for (k, t) in targets.iter().enumerate() {
            ensure(e.type_at(k + 1).as_ref() == Ok(t), || format!("target {k}"))?;
        }
        ensure(e.indices() == Ok((0..=targets.len()).collect()), || "edge indices".into())?;
        let short = mk_edge::<String, NamedLabel>(targets.len() + 1, edge_type.clone(), NamedLabel::new("e"), targets.clone());
        ensure(short.is_err(), || "arity mismatch accepted".into())?;
    }
    let rat = random_rational(&mut r, &mut ids);
    let back: G = parse_sexpr(&rat.to_sexpr()).map_err(|e| e.to_string())?;
    ensure(back == rat, || format!("{} reparsed differently", rat.to_sexpr()))
}

/// A union is a connection without wires, whatever the order.
pub fn law_union_is_unwired_connect(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut ids = 0;
    let l = random_graph(&mut r, 3, &mut ids);
    let rt = random_graph(&mut r, 3, &mut ids);
    let lab = NamedLabel::with_id("u", 999);
    let u = union(l.clone(), rt.clone(), TOP.to_string(), lab.clone()).map_err(|e| e.to_string())?;
    let c1 = mk_connect(l.clone(), rt.clone(), TOP.to_string(), lab.clone(), Wiring::new(), top_order)
        .map_err(|e| e.to_string())?;
    ensure(u == c1, || "union differs from an unwired connection".into())?;
    // without wires inside, no order can reject the result
    let (e1, e2) = (random_edge(&mut r, &mut ids), random_edge(&mut r, &mut ids));
    let never = |_: &String, _: &String| false;
    let c2 = mk_connect(e1.clone(), e2.clone(), TOP.to_string(), lab.clone(), Wiring::new(), never)
        .map_err(|e| e.to_string())?;
    ensure(c2 == union(e1, e2, TOP.to_string(), lab).map_err(|e| e.to_string())?, || "edge union".into())?;
    ensure(u.check_constraints(top_order).is_empty(), || "union of lawful graphs violates".into())
}

/// Odd positions address the left operand, even ones the right.
pub fn law_interleaved_indexing(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut ids = 0;
    let l = random_graph(&mut r, 3, &mut ids);
    let rt = random_graph(&mut r, 3, &mut ids);
    let g = union(l.clone(), rt.clone(), "C".to_string(), NamedLabel::new("c")).map_err(|e| e.to_string())?;
    ensure(g.type_at(0) == Ok("C".to_string()), || "position 0".into())?;
    let li = l.indices().map_err(|e| e.to_string())?;
    let ri = rt.indices().map_err(|e| e.to_string())?;
    let mut expect = vec![0];
    for &k in li.iter().filter(|&&k| k > 0) {
        ensure(g.type_at(2 * k - 1) == l.type_at(k), || format!("left {k}"))?;
        expect.push(2 * k - 1);
    }
    for &k in ri.iter().filter(|&&k| k > 0) {
        ensure(g.type_at(2 * k) == rt.type_at(k), || format!("right {k}"))?;
        expect.push(2 * k);
    }
    expect.sort_unstable();
    let got = g.indices().map_err(|e| e.to_string())?;
    ensure(got == expect, || format!("indices {got:?} != {expect:?}"))?;
    let past = expect.last().copied().unwrap_or(0) + 1;
    ensure(!g.has_index(past + 2 * r.gen_range(0..3)), || "position past the end exists".into())?;
    for n in got {
        let ep = g.endpoint(n).map_err(|e| e.to_string())?;
        ensure(ep.position() == Some(n), || format!("endpoint of {n} is {ep:?}"))?;
        let side_ok = match mettagraph::metagraph::split_index(n) {
            None => ep.path.is_empty() || ep.local == 0,
            Some((Side::Left, _)) => ep.path.first() == Some(&Side::Left),
            Some((Side::Right, _)) => ep.path.first() == Some(&Side::Right),
        };
        ensure(side_ok, || format!("endpoint of {n} on the wrong side: {ep:?}"))?;
    }
    Ok(())
}

/// Enlarging the order never adds violations, and dropping wires never
/// adds violations either.
pub fn law_constraint_monotone(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut ids = 0;
    let l = random_graph(&mut r, 3, &mut ids);
    let rt = random_graph(&mut r, 3, &mut ids);
    let wiring = random_wiring(&mut r, &l, &rt, false);
    let g: G = Metagraph::Connect {
        left: l.clone().into(),
        right: rt.clone().into(),
        whole_type: TOP.to_string(),
        label: NamedLabel::new("c"),
        wiring: wiring.clone(),
    };
    let extra: Vec<(String, String)> = (0..r.gen_range(0..4)).map(|_| (any_type(&mut r), any_type(&mut r))).collect();
    let bigger = |a: &String, b: &String| top_order(a, b) || extra.iter().any(|(x, y)| x == a && y == b);
    let small = g.check_constraints(top_order).violations;
    let large = g.check_constraints(bigger).violations;
    ensure(large.iter().all(|v| small.contains(v)), || format!("new violations {large:?} vs {small:?}"))?;
    ensure(large.len() <= small.len(), || "violation count grew".into())?;
    let everything = g.check_constraints(|_: &String, _: &String| true).violations;
    ensure(
        everything.iter().all(|v| matches!(v, mettagraph::metagraph::Violation::MultipleInputs { .. })),
        || "order violation under the full relation".into(),
    )?;
    let built = mk_connect(l.clone(), rt.clone(), TOP.to_string(), NamedLabel::new("c"), wiring.clone(), top_order);
    ensure(built.is_ok() == small.is_empty(), || "smart constructor disagrees with the checker".into())?;
    let mut fewer = wiring.clone();
    if let Some((i, _)) = wiring.iter().next() {
        fewer.remove(i);
    }
    let h: G = Metagraph::Connect {
        left: l.into(),
        right: rt.into(),
        whole_type: TOP.to_string(),
        label: NamedLabel::new("c"),
        wiring: fewer,
    };
    let after = h.check_constraints(top_order).violations;
    ensure(after.len() <= small.len(), || "removing a wire added violations".into())
}

/// Unfolding preserves every position's type, and finite approximations
/// agree with the rational graph where they are defined.
pub fn law_unfold_coherent(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut ids = 0;
    let g = random_rational(&mut r, &mut ids);
    let once = g.unfold().map_err(|e| e.to_string())?;
    let depth = r.gen_range(1..5);
    let approx = g.approximate(depth).map_err(|e| e.to_string())?;
    for n in approx.indices().map_err(|e| e.to_string())? {
        let t = g.type_at(n).map_err(|e| format!("{n}: {e}"))?;
        ensure(once.type_at(n).as_ref() == Ok(&t), || format!("unfold changes position {n}"))?;
        ensure(approx.type_at(n).as_ref() == Ok(&t), || format!("approximation changes position {n}"))?;
    }
    ensure(graph_iso(&g, &once, 64) == Ok(true), || "a fixpoint is not isomorphic to its unfolding".into())?;
    ensure(g.check_constraints(top_order).is_empty() == once.check_constraints(top_order).is_empty(), || {
        "unfolding changes validity".into()
    })
}

/// Isomorphism is reflexive, symmetric and blind to edge ids.
pub fn law_iso_equivalence(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let mut ids = 0;
    let g = random_graph(&mut r, 4, &mut ids);
    let h = random_graph(&mut r, 4, &mut ids);
    let shifted = shift_ids(&g, 1000);
    ensure(graph_iso(&g, &g, 64) == Ok(true), || "not reflexive".into())?;
    ensure(graph_iso(&g, &shifted, 64) == Ok(true), || "sensitive to edge ids".into())?;
    ensure(graph_iso(&g, &h, 64) == graph_iso(&h, &g, 64), || "not symmetric".into())?;
    if graph_iso(&g, &h, 64) == Ok(true) {
        ensure(graph_iso(&shifted, &h, 64) == Ok(true), || "not transitive".into())?;
    }
    let rat = random_rational(&mut r, &mut ids);
    ensure(graph_iso(&rat, &shift_ids(&rat, 7), 64) == Ok(true), || "rational graph not self-isomorphic".into())
}

pub const METAGRAPH_LAWS: [(&str, fn(u64) -> Result<(), String>); 6] = [
    ("constructor round-trips", law_round_trip),
    ("union is an unwired connection", law_union_is_unwired_connect),
    ("interleaved indexing", law_interleaved_indexing),
    ("constraint monotonicity", law_constraint_monotone),
    ("unfold/type_at coherence", law_unfold_coherent),
    ("isomorphism is an equivalence", law_iso_equivalence),
];

/// The worked construction X, Y, Z', Z'', Z''', Z over `top_order`.
pub fn figure_construction() -> Result<Vec<(&'static str, G)>, String> {
    let t = |s: &str| s.to_string();
    let nul = || NamedLabel::new("nul");
    let err = |e: mettagraph::metagraph::MetagraphError<String>| e.to_string();
    let x = mk_edge(3, t("A"), nul(), vec![t("D"), t("B"), t("C")]).map_err(err)?;
    let y = mk_edge(2, t("B"), nul(), vec![t("D"), t("A")]).map_err(err)?;
    let w = || Wiring::from_pairs([(1, 1), (2, 0)]);
    let z1 = mk_connect(x.clone(), y.clone(), t(TOP), nul(), w(), top_order).map_err(err)?;
    let z2 = mk_connect(y.clone(), x.clone(), t(TOP), nul(), w(), top_order).map_err(err)?;
    let z3 = mk_connect(z1.clone(), z2.clone(), t(TOP), nul(), Wiring::new(), top_order).map_err(err)?;
    let z = mk_connect(x.clone(), z3.clone(), t("C"), nul(), Wiring::from_pairs([(3, 0)]), top_order).map_err(err)?;
    Ok(vec![("X", x), ("Y", y), ("Z'", z1), ("Z''", z2), ("Z'''", z3), ("Z", z)])
}

// ---------------------------------------------------------------- bisimulation oracle

use mettagraph::lts::{bisim_check, verify_bisimulation, BisimVerdict, Lts};
use std::collections::BTreeMap;

/// Depth at which two states of the disjoint union first differ, by
/// iterating the k-step approximants of bisimilarity until they are
/// stable. `None` when bisimilar.
pub fn brute_force_depth(l1: &ExplicitLts, l2: &ExplicitLts) -> BTreeMap<(String, String), Option<usize>> {
    let states: Vec<String> = l1.states.iter().chain(&l2.states).cloned().collect();
    let succ = |s: &String| -> Vec<(String, String)> {
        let sys = if l1.states.contains(s) { l1 } else { l2 };
        sys.step(s).into_iter().map(|t| (t.action, t.target)).collect()
    };
    let mut rel: BTreeSet<(String, String)> = states
        .iter()
        .flat_map(|p| states.iter().map(move |q| (p.clone(), q.clone())))
        .collect();
    let mut split_at: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut k = 0;
    loop {
        k += 1;
        let next: BTreeSet<(String, String)> = rel
            .iter()
            .filter(|(p, q)| {
                let (sp, sq) = (succ(p), succ(q));
                sp.iter().all(|(a, p2)| sq.iter().any(|(b, q2)| a == b && rel.contains(&(p2.clone(), q2.clone()))))
                    && sq.iter().all(|(b, q2)| sp.iter().any(|(a, p2)| a == b && rel.contains(&(p2.clone(), q2.clone()))))
            })
            .cloned()
            .collect();
        for pair in rel.difference(&next) {
            split_at.insert(pair.clone(), k);
        }
        if next == rel {
            break;
        }
        rel = next;
    }
    let mut out = BTreeMap::new();
    for p in &l1.states {
        for q in &l2.states {
            out.insert((p.clone(), q.clone()), split_at.get(&(p.clone(), q.clone())).copied());
        }
    }
    out
}

/// Compares the checker with the oracle on every pair of one random
/// instance. Returns the number of pairs compared.
pub fn law_bisim_matches_oracle(seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let acts = ["a", "b", "c"];
    let n_acts = r.gen_range(1..=3);
    let l1 = random_lts(&mut r, "p", 6, &acts[..n_acts]);
    let l2 = random_lts(&mut r, "q", 6, &acts[..n_acts]);
    let oracle = brute_force_depth(&l1, &l2);
    for ((p, q), depth) in &oracle {
        match bisim_check(&l1, p, &l2, q, 100) {
            BisimVerdict::Bisimilar { relation } => {
                ensure(depth.is_none(), || format!("seed {seed}: {p}~{q} claimed, oracle splits at {depth:?}"))?;
                ensure(relation.contains(&(p.clone(), q.clone())), || "queried pair missing".into())?;
                verify_bisimulation(&l1, &l2, &relation).map_err(|e| format!("seed {seed}: {e}"))?;
            }
            BisimVerdict::Distinguished { witness } => {
                let Some(d) = depth else {
                    return Err(format!("seed {seed}: {p},{q} distinguished but bisimilar"));
                };
                ensure(witness.holds(&l1, p, 1e-9) && !witness.holds(&l2, q, 1e-9), || {
                    format!("seed {seed}: witness {witness} does not separate {p},{q}")
                })?;
                ensure(witness.depth() == *d, || {
                    format!("seed {seed}: witness {witness} has depth {} but {p},{q} split at {d}", witness.depth())
                })?;
            }
            BisimVerdict::Inconclusive { reason } => return Err(reason),
        }
    }
    Ok(oracle.len())
}

// ---------------------------------------------------------------- encodings

use mettagraph::lang::encode::{encode_stlc, eval_decode_term};
use mettagraph::lang::pts::{context_from_stlc, pts_typecheck, PtsExpr, PtsSpec};

pub const STLC_BUDGET: usize = 10_000;

/// Encodes, evaluates and reads back a corpus term, comparing with the
/// normal form reached by iterating β-steps.
pub fn law_stlc_round_trip(t: &Term) -> Result<(), String> {
    let ctx = stlc_context();
    let oracle = t.normalize(STLC_BUDGET).map_err(|e| format!("{t}: {e}"))?;
    ensure(oracle.is_normal(), || format!("{oracle} is not normal"))?;
    let enc = encode_stlc(&ctx, t).map_err(|e| format!("{t}: {e}"))?;
    let back = eval_decode_term(&enc, STLC_BUDGET, true).map_err(|e| format!("{t}: {e}"))?;
    ensure(back.alpha_eq(&oracle), || format!("{t}: engine gives {back}, oracle {oracle}"))
}

/// Both typecheckers accept or reject together and agree on the type.
pub fn law_pts_agrees_with_stlc(t: &Term) -> Result<(), String> {
    let ctx = stlc_context();
    let pctx = context_from_stlc(&ctx, &["A", "B"]);
    let spec = PtsSpec::lambda_arrow();
    match (stlc_typecheck(&ctx, t), pts_typecheck(&spec, &pctx, &PtsExpr::from_stlc(t))) {
        (Ok(ty), Ok(pty)) => ensure(pty.alpha_eq(&PtsExpr::from_stype(&ty)), || format!("{t}: {ty} vs {pty}")),
        (Err(_), Err(_)) => Ok(()),
        (a, b) => Err(format!("{t}: stlc {a:?}, pts {b:?}")),
    }
}

use mettagraph::engine::evaluate;
use mettagraph::lang::encode::encode_pdts;
use mettagraph::lang::pdts::{pdts_full_eval, pdts_sample, Distribution};

pub const PDTS_BUDGET: usize = 10_000;

/// Exact distribution of a corpus term; its mass must be one.
pub fn law_pdts_mass(e: &PdtsExpr) -> Result<Distribution, String> {
    let dist = pdts_full_eval(e, PDTS_BUDGET).map_err(|x| format!("{e}: {x}"))?;
    let mass: f64 = dist.values().sum();
    ensure((mass - 1.0).abs() <= 1e-9, || format!("{e}: mass {mass}"))?;
    ensure(dist.values().all(|&w| w > 0.0), || format!("{e}: zero-weight outcome"))?;
    Ok(dist)
}

/// The engine's normal forms, read back, are exactly the support.
pub fn law_pdts_support(e: &PdtsExpr, dist: &Distribution) -> Result<(), String> {
    let enc = encode_pdts(&pdts_context(), e).map_err(|x| format!("{e}: {x}"))?;
    let ev = evaluate(&enc.encoding.space, PDTS_BUDGET);
    ensure(!ev.outcome.is_exhausted(), || format!("{e}: engine budget exhausted"))?;
    let mut engine: Vec<PdtsExpr> = Vec::new();
    for nf in ev.outcome.normal_forms() {
        let d = enc.decode(nf).map_err(|x| format!("{e}: {x}"))?;
        if !engine.iter().any(|x| x.alpha_eq(&d)) {
            engine.push(d);
        }
    }
    let exact: Vec<&PdtsExpr> = dist.keys().collect();
    ensure(
        engine.len() == exact.len() && exact.iter().all(|x| engine.iter().any(|y| y.alpha_eq(x))),
        || format!("{e}: engine support {engine:?}, exact {exact:?}"),
    )
}

/// Outcome counts over `runs` seeded samples sit within three standard
/// deviations of the exact probabilities.
pub fn law_pdts_sampling(e: &PdtsExpr, dist: &Distribution, runs: u64) -> Result<(), String> {
    let mut counts: BTreeMap<PdtsExpr, u64> = BTreeMap::new();
    for seed in 0..runs {
        let nf = pdts_sample(e, seed, PDTS_BUDGET).map_err(|x| format!("{e}: {x}"))?;
        *counts.entry(nf).or_insert(0) += 1;
    }
    ensure(counts.keys().all(|k| dist.contains_key(k)), || format!("{e}: sampled outside the support"))?;
    let n = runs as f64;
    for (k, &p) in dist {
        let seen = counts.get(k).copied().unwrap_or(0) as f64;
        let sigma = (n * p * (1.0 - p)).sqrt();
        ensure((seen - n * p).abs() <= 3.0 * sigma + 1e-9, || {
            format!("{e}: {k} seen {seen} times, expected {} ± {}", n * p, 3.0 * sigma)
        })?;
    }
    Ok(())
}
