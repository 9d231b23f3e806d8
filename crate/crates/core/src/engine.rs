//! Single-pushout rewriting of atomspaces and †-pointer evaluation.
//!
//! A rule deletes its matched left side, adds a fresh copy of its right
//! side and reconnects the context along the glue (the variables shared by
//! both sides). Rules are never user supplied; they are grounded from
//! activated `funapp` and `trans` nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::atomspace::{check_mconstraints, Atom, Atomspace, Keyword, Label, NodeId, TypeExpr, TUPLE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleSide {
    L,
    R,
    LR,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleMarker {
    None,
    Input,
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Funapp,
    Trans,
    MovePointer,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Funapp => "funapp",
            RuleKind::Trans => "trans",
            RuleKind::MovePointer => "move-pointer",
        })
    }
}

/// A grounded rewrite rule. The left side is the activated input node (`*`)
/// with its context; the right side is the output (`**`). Variables of the
/// schema that were bound to host sub-atoms form the glue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleGraph {
    pub kind: RuleKind,
    /// Host node the rule was grounded at.
    pub target: NodeId,
    /// Nodes targeting the input, with the slot they use.
    pub context: Option<(NodeId, usize)>,
    /// The input, marked `*`; activated.
    pub lhs: Atom,
    /// The output, marked `**`.
    pub rhs: Atom,
    /// Function type premise for `funapp` rules.
    pub premise: Option<TypeExpr>,
    /// Schema variable -> host sub-atom it was bound to (the glue).
    pub glue: BTreeMap<String, Atom>,
}

impl RuleGraph {
    /// Side and marker of every label in the rule, left side first.
    pub fn labelled(&self) -> Vec<(Label, RuleSide, RuleMarker)> {
        let glued: BTreeSet<Atom> = self.glue.values().map(Atom::unmarked).collect();
        let mut out = Vec::new();
        fn walk(
            a: &Atom,
            side: RuleSide,
            root: RuleMarker,
            glued: &BTreeSet<Atom>,
            out: &mut Vec<(Label, RuleSide, RuleMarker)>,
        ) {
            if glued.contains(&a.unmarked()) {
                out.push((a.label.clone(), RuleSide::LR, root));
                return;
            }
            out.push((a.label.clone(), side, root));
            for c in &a.args {
                walk(c, side, RuleMarker::None, glued, out);
            }
        }
        walk(&self.lhs, RuleSide::L, RuleMarker::Input, &glued, &mut out);
        walk(&self.rhs, RuleSide::R, RuleMarker::Output, &glued, &mut out);
        out
    }
}

/// A nonempty sequence of rules applied left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action(Vec<RuleGraph>);

impl Action {
    pub fn new(rules: Vec<RuleGraph>) -> Option<Self> {
        (!rules.is_empty()).then_some(Action(rules))
    }

    pub fn rules(&self) -> &[RuleGraph] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub root: NodeId,
    /// Pattern node (pre-order index) -> host node.
    pub positions: BTreeMap<usize, NodeId>,
    pub bindings: BTreeMap<String, NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("node {0} is not activated")]
    NotActivated(NodeId),
    #[error("node {0} is not a {1} node")]
    WrongShape(NodeId, Keyword),
    #[error("node {0} does not exist")]
    Missing(NodeId),
}

fn labels_match(p: &Atom, h: &Atom) -> bool {
    if p.label == h.label {
        return true;
    }
    match (&p.label, &h.label) {
        (Label::Sym(a), Label::Ty(TypeExpr::Base(b))) | (Label::Ty(TypeExpr::Base(a)), Label::Sym(b)) => {
            a == b && p.args.is_empty() && h.args.is_empty()
        }
        (Label::Ty(a), Label::Ty(b)) if a.has_vars() => type_fits(a, b),
        _ => false,
    }
}

/// Structural match of a type with schematic variables.
fn type_fits(p: &TypeExpr, t: &TypeExpr) -> bool {
    use TypeExpr::*;
    match (p, t) {
        (Var(_), _) => true,
        (Arrow(a, b), Arrow(c, d)) | (Union(a, b), Union(c, d)) | (Inter(a, b), Inter(c, d)) => {
            type_fits(a, c) && type_fits(b, d)
        }
        (Dist(a), Dist(b)) => type_fits(a, b),
        _ => p == t,
    }
}

fn match_node(
    space: &Atomspace,
    pattern: &Atom,
    host: NodeId,
    m: &mut Match,
    counter: &mut usize,
) -> bool {
    let idx = *counter;
    *counter += 1;
    let Some(node) = space.node(host) else {
        return false;
    };
    if pattern.active && !space.is_active(host) {
        return false;
    }
    if let (Label::Var(v), true) = (&pattern.label, pattern.args.is_empty()) {
        if !var_accepts(space, pattern, host) {
            return false;
        }
        if let Some(&prev) = m.bindings.get(v) {
            if space.atom(prev).unmarked() != space.atom(host).unmarked() {
                return false;
            }
        } else {
            m.bindings.insert(v.clone(), host);
        }
        m.positions.insert(idx, host);
        return true;
    }
    let host_atom = Atom::leaf(node.label.clone(), node.ty.clone());
    let shallow = Atom {
        args: Vec::new(),
        ..pattern.clone()
    };
    if !labels_match(&shallow, &host_atom) || pattern.args.len() != node.args.len() {
        return false;
    }
    m.positions.insert(idx, host);
    let args = node.args.clone();
    pattern
        .args
        .iter()
        .zip(args)
        .all(|(p, h)| match_node(space, p, h, m, counter))
}

/// A pattern variable binds a host node when the node's tag or a declared
/// type sits below the variable's tag.
fn var_accepts(space: &Atomspace, pattern: &Atom, host: NodeId) -> bool {
    let want = &pattern.ty;
    if matches!(want, TypeExpr::Top | TypeExpr::Var(_)) {
        return true;
    }
    let node = space.node(host).expect("host node");
    if space.is_subtype(&node.ty, want) {
        return true;
    }
    *want != TypeExpr::TopType && space.typing_query(&space.atom(host), want)
}

/// Matches `pattern` at one host node.
pub fn match_at(space: &Atomspace, pattern: &Atom, host: NodeId) -> Option<Match> {
    let mut m = Match {
        root: host,
        positions: BTreeMap::new(),
        bindings: BTreeMap::new(),
    };
    match_node(space, pattern, host, &mut m, &mut 0).then_some(m)
}

/// Every match of `pattern`, in ascending host order.
pub fn match_pattern(pattern: &Atom, host: &Atomspace) -> Vec<Match> {
    host.nodes()
        .map(|(id, _)| id)
        .collect::<Vec<_>>()
        .into_iter()
        .filter_map(|id| match_at(host, pattern, id))
        .collect()
}

/// Instantiates `template` under `m`, copying bound host sub-atoms.
pub fn instantiate(template: &Atom, host: &Atomspace, m: &Match) -> Atom {
    let mut out = template.clone();
    for (v, &id) in &m.bindings {
        out = out.subst_var(v, &host.atom(id).unmarked_pointer());
    }
    out
}

trait UnmarkPointer {
    fn unmarked_pointer(self) -> Atom;
}

impl UnmarkPointer for Atom {
    fn unmarked_pointer(mut self) -> Atom {
        fn clear(a: &mut Atom) {
            a.pointed = false;
            a.args.iter_mut().for_each(clear);
        }
        clear(&mut self);
        self
    }
}

/// Renames every variable of `a` with `suffix` so rule variables never
/// capture host variables.
fn freshen(a: &Atom, suffix: &str) -> Atom {
    let mut out = a.clone();
    for v in a.vars() {
        out = out.subst_var(&v, &Atom {
            label: Label::Var(format!("{v}{suffix}")),
            ty: TypeExpr::TopType,
            args: Vec::new(),
            active: false,
            pointed: false,
        });
    }
    retag_vars(a, &mut out);
    out
}

/// Keeps the original tags of renamed variable leaves.
fn retag_vars(orig: &Atom, renamed: &mut Atom) {
    if let (Label::Var(_), Label::Var(_)) = (&orig.label, &renamed.label) {
        renamed.ty = orig.ty.clone();
    }
    for (o, r) in orig.args.iter().zip(renamed.args.iter_mut()) {
        retag_vars(o, r);
    }
}

/// Grounds the application rule at an activated `funapp` node: one rule per
/// equation whose left side matches, in root order.
pub fn instantiate_funapp(f: NodeId, host: &Atomspace) -> Result<Vec<RuleGraph>, EngineError> {
    let node = host.node(f).ok_or(EngineError::Missing(f))?;
    if node.label != Label::Key(Keyword::Funapp) {
        return Err(EngineError::WrongShape(f, Keyword::Funapp));
    }
    if !host.is_active(f) {
        return Err(EngineError::NotActivated(f));
    }
    let lhs_atom = host.atom(f).unmarked_pointer();
    let premise = host.declared_types(lhs_atom.spine().0).into_iter().next();
    let mut rules = Vec::new();
    for (i, (l, r)) in host.equations().into_iter().enumerate() {
        let suffix = format!("'{i}");
        let eq = Atom::equation(host.atom(l), host.atom(r));
        let eq = freshen(&eq.unmarked_pointer(), &suffix);
        let (pl, pr) = (&eq.args[0], &eq.args[1]);
        let Some(m) = match_at(host, &Atom { active: false, ..pl.clone() }, f) else {
            continue;
        };
        let glue = m
            .bindings
            .iter()
            .map(|(v, &id)| (v.clone(), host.atom(id).unmarked_pointer()))
            .collect();
        rules.push(RuleGraph {
            kind: RuleKind::Funapp,
            target: f,
            context: host.parent(f),
            lhs: lhs_atom.clone(),
            rhs: instantiate(pr, host, &m),
            premise: premise.clone(),
            glue,
        });
    }
    Ok(rules)
}

/// Grounds the transform rule at an activated `trans` node. The output is
/// a tuple with one instantiated template per match of the pattern outside
/// the node itself, padded with `nul` to the host's node count.
pub fn instantiate_trans(f: NodeId, host: &Atomspace) -> Result<RuleGraph, EngineError> {
    let node = host.node(f).ok_or(EngineError::Missing(f))?;
    if node.label != Label::Key(Keyword::Trans) {
        return Err(EngineError::WrongShape(f, Keyword::Trans));
    }
    if !host.is_active(f) {
        return Err(EngineError::NotActivated(f));
    }
    let own: BTreeSet<NodeId> = host.subtree(f).into_iter().collect();
    let suffix = format!("'t{f}");
    let pattern = freshen(&host.atom(node.args[0]).unmarked_pointer(), &suffix);
    let template = freshen(&host.atom(node.args[1]).unmarked_pointer(), &suffix);
    let mut results = Vec::new();
    let mut glue = BTreeMap::new();
    for m in match_pattern(&pattern, host) {
        if own.contains(&m.root) {
            continue;
        }
        for (v, &id) in &m.bindings {
            glue.entry(v.clone()).or_insert_with(|| host.atom(id).unmarked_pointer());
        }
        results.push(instantiate(&template, host, &m));
    }
    let width = host.node_count().max(results.len());
    results.resize(width, Atom::nul());
    Ok(RuleGraph {
        kind: RuleKind::Trans,
        target: f,
        context: host.parent(f),
        lhs: host.atom(f).unmarked_pointer(),
        rhs: Atom::apps(Atom::sym(TUPLE), results),
        premise: None,
        glue,
    })
}

/// Applies a grounded rule at `m.root`. The input (with its `@`) is
/// deleted, a fresh copy of the output takes its slot and receives `†`.
/// A result that breaks the atomspace constraints yields the host
/// unchanged.
pub fn apply_rule(rule: &RuleGraph, host: &Atomspace, m: &Match) -> Atomspace {
    let mut out = host.clone();
    if out.node(m.root).is_none() {
        return host.clone();
    }
    let new = out.replace(m.root, &rule.rhs);
    out.set_pointer(Some(new));
    if check_mconstraints(&out).is_empty() {
        out
    } else {
        host.clone()
    }
}

/// Applies each rule of an action in turn at its grounding node.
pub fn apply_action(action: &Action, host: &Atomspace) -> Atomspace {
    let mut cur = host.clone();
    for rule in action.rules() {
        let m = Match {
            root: rule.target,
            positions: BTreeMap::new(),
            bindings: BTreeMap::new(),
        };
        cur = apply_rule(rule, &cur, &m);
    }
    cur
}

#[derive(Clone, Debug)]
pub struct Step {
    pub rule: RuleKind,
    /// Node the pointer was at.
    pub position: NodeId,
    pub successor: Atomspace,
}

/// First activated node strictly below `id`, by target order.
fn first_active_below(space: &Atomspace, id: NodeId) -> Option<NodeId> {
    let node = space.node(id)?;
    node.args.iter().find_map(|&c| {
        if space.is_active(c) {
            Some(c)
        } else {
            first_active_below(space, c)
        }
    })
}

fn nearest_active_ancestor(space: &Atomspace, id: NodeId) -> Option<NodeId> {
    let mut cur = id;
    while let Some((p, _)) = space.parent(cur) {
        if space.is_active(p) {
            return Some(p);
        }
        cur = p;
    }
    None
}

fn move_pointer(space: &Atomspace, from: NodeId, to: NodeId) -> Step {
    let mut s = space.clone();
    s.set_pointer(Some(to));
    Step {
        rule: RuleKind::MovePointer,
        position: from,
        successor: s,
    }
}

/// One update of the pointed space. Empty when evaluation halts.
///
/// * `†` on a node that is not activated moves to the nearest activated
///   ancestor, or halts when there is none.
/// * `†` on an activated node with activated targets moves to the first.
/// * Otherwise the node's rule fires: one successor per applicable
///   equation for `funapp`, one tuple for `trans`. Invalid results are
///   dropped. A node with no applicable rule loses its `@`.
pub fn update(space: &Atomspace) -> Vec<Step> {
    let Some(p) = space.pointer() else {
        return Vec::new();
    };
    if space.node(p).is_none() {
        return Vec::new();
    }
    if !space.is_active(p) {
        return nearest_active_ancestor(space, p)
            .map(|a| vec![move_pointer(space, p, a)])
            .unwrap_or_default();
    }
    if let Some(c) = first_active_below(space, p) {
        return vec![move_pointer(space, p, c)];
    }
    let node = space.node(p).expect("pointer target");
    let rules = match node.label {
        Label::Key(Keyword::Funapp) => instantiate_funapp(p, space).unwrap_or_default(),
        Label::Key(Keyword::Trans) => instantiate_trans(p, space).into_iter().collect(),
        _ => Vec::new(),
    };
    if rules.is_empty() {
        let mut s = space.clone();
        s.deactivate(p);
        return vec![Step {
            rule: RuleKind::MovePointer,
            position: p,
            successor: s,
        }];
    }
    let m = Match {
        root: p,
        positions: BTreeMap::new(),
        bindings: BTreeMap::new(),
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rule in &rules {
        let next = apply_rule(rule, space, &m);
        if next.node(p).is_some() {
            // invalid result: identity, never a successor
            continue;
        }
        if seen.insert(next.canonical()) {
            out.push(Step {
                rule: rule.kind,
                position: p,
                successor: next,
            });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub rule: RuleKind,
    pub position: NodeId,
    pub successors: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum EvalOutcome {
    NormalForms(Vec<Atomspace>),
    BudgetExhausted {
        frontier: Vec<Atomspace>,
        normal_forms: Vec<Atomspace>,
    },
}

impl EvalOutcome {
    pub fn normal_forms(&self) -> &[Atomspace] {
        match self {
            EvalOutcome::NormalForms(n) => n,
            EvalOutcome::BudgetExhausted { normal_forms, .. } => normal_forms,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, EvalOutcome::BudgetExhausted { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub outcome: EvalOutcome,
    /// Number of update expansions performed.
    pub steps: usize,
}

/// Breadth-first closure of `update` with at most `budget` expansions.
pub fn evaluate(space: &Atomspace, budget: usize) -> Evaluation {
    evaluate_traced(space, budget, |_| {})
}

pub fn evaluate_traced(
    space: &Atomspace,
    budget: usize,
    mut trace: impl FnMut(&TraceRecord),
) -> Evaluation {
    let mut frontier = vec![space.clone()];
    let mut normal = Vec::new();
    let mut normal_keys = BTreeSet::new();
    let mut steps = 0;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        let mut next_keys = BTreeSet::new();
        for (i, s) in frontier.iter().enumerate() {
            if steps >= budget {
                let mut rest: Vec<Atomspace> = frontier[i..].to_vec();
                rest.extend(next);
                return Evaluation {
                    outcome: EvalOutcome::BudgetExhausted {
                        frontier: rest,
                        normal_forms: normal,
                    },
                    steps,
                };
            }
            let succ = update(s);
            if succ.is_empty() {
                if normal_keys.insert(s.canonical()) {
                    normal.push(s.clone());
                }
                continue;
            }
            steps += 1;
            trace(&TraceRecord {
                step: steps,
                rule: succ[0].rule,
                position: succ[0].position,
                successors: succ.iter().map(|x| x.successor.hash_hex()).collect(),
            });
            for st in succ {
                if next_keys.insert(st.successor.canonical()) {
                    next.push(st.successor);
                }
            }
        }
        frontier = next;
    }
    Evaluation {
        outcome: EvalOutcome::NormalForms(normal),
        steps,
    }
}

/// The atom the pointer designates, if any.
pub fn pointed_atom(space: &Atomspace) -> Option<Atom> {
    space.pointer().map(|p| space.atom(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> TypeExpr {
        TypeExpr::base(n)
    }

    /// f1 : A -> A, f1 v1 = v2, f1 v2 = v1.
    fn minisys(term: Atom) -> Atomspace {
        let f1 = || Atom::sym("f1");
        Atomspace::new()
            .add_atoms([
                Atom::typing(Atom::sym("v1"), Atom::ty(a("A"))),
                Atom::typing(Atom::sym("v2"), Atom::ty(a("A"))),
                Atom::typing(f1(), Atom::ty(TypeExpr::arrow(a("A"), a("A")))),
                Atom::equation(Atom::app(f1(), Atom::sym("v1")), Atom::sym("v2")),
                Atom::equation(Atom::app(f1(), Atom::sym("v2")), Atom::sym("v1")),
                term.pointed(),
            ])
            .unwrap()
    }

    fn f1_of(x: Atom) -> Atom {
        Atom::app(Atom::sym("f1"), x).with_ty(a("A")).activated()
    }

    #[test]
    fn match_enumerates_bindings() {
        let s = Atomspace::new()
            .add_atoms([
                Atom::app(Atom::sym("f"), Atom::sym("a")),
                Atom::app(Atom::sym("f"), Atom::sym("b")),
            ])
            .unwrap();
        let ms = match_pattern(&Atom::app(Atom::sym("f"), Atom::var("x")), &s);
        let bound: Vec<String> = ms
            .iter()
            .map(|m| s.atom(m.bindings["x"]).to_string())
            .collect();
        assert_eq!(bound, vec!["a", "b"]);
    }

    #[test]
    fn ground_pattern_matches_once() {
        let s = Atomspace::new().add_atom(Atom::app(Atom::sym("f"), Atom::sym("a"))).unwrap();
        assert_eq!(match_pattern(&Atom::app(Atom::sym("f"), Atom::sym("a")), &s).len(), 1);
    }

    #[test]
    fn typed_variable_rejects_other_types() {
        let s = Atomspace::new()
            .add_atoms([
                Atom::typing(Atom::sym("a"), Atom::ty(a("A"))),
                Atom::app(Atom::sym("f"), Atom::sym("a")),
            ])
            .unwrap();
        let p = Atom::app(Atom::sym("f"), Atom::var("x").with_ty(a("Z")));
        assert!(match_pattern(&p, &s).is_empty());
        let p = Atom::app(Atom::sym("f"), Atom::var("x").with_ty(a("A")));
        assert_eq!(match_pattern(&p, &s).len(), 1);
    }

    #[test]
    fn nested_application_evaluates_to_identity() {
        let s = minisys(f1_of(f1_of(Atom::sym("v1"))));
        let steps = update(&s);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rule, RuleKind::MovePointer);
        let inner = steps[0].successor.pointer().unwrap();
        assert_eq!(steps[0].successor.atom(inner).to_string(), "(! (@ (f1 v1)))");
        let ev = evaluate(&s, 100);
        let nfs = ev.outcome.normal_forms();
        assert_eq!(nfs.len(), 1);
        assert_eq!(pointed_atom(&nfs[0]).unwrap().to_string(), "(! v1)");
        assert!(check_mconstraints(&nfs[0]).is_empty());
    }

    #[test]
    fn normal_space_takes_no_steps() {
        let s = minisys(Atom::sym("v1"));
        let ev = evaluate(&s, 10);
        assert_eq!(ev.steps, 0);
        assert_eq!(ev.outcome.normal_forms(), &[s]);
    }

    #[test]
    fn unactivated_pointer_halts() {
        let s = minisys(Atom::app(Atom::sym("f1"), Atom::sym("v1")).with_ty(a("A")));
        assert!(update(&s).is_empty());
    }

    #[test]
    fn looping_equation_exhausts_budget() {
        let g = |x: Atom| Atom::app(Atom::sym("g"), x);
        let s = Atomspace::new()
            .add_atoms([
                Atom::equation(g(Atom::var("x")), g(Atom::var("x")).activated()),
                g(Atom::sym("a")).activated().pointed(),
            ])
            .unwrap();
        assert!(evaluate(&s, 50).outcome.is_exhausted());
    }

    #[test]
    fn two_equations_give_two_successors() {
        let r = |x: Atom, y: Atom| Atom::apps(Atom::sym("random"), [x, y]);
        let s = Atomspace::new()
            .add_atoms([
                Atom::equation(r(Atom::var("a"), Atom::var("b")), Atom::var("a")),
                Atom::equation(r(Atom::var("a"), Atom::var("b")), Atom::var("b")),
                r(Atom::sym("v1"), Atom::sym("v2")).activated().pointed(),
            ])
            .unwrap();
        let steps = update(&s);
        assert_eq!(steps.len(), 2);
        let outs: Vec<String> = steps
            .iter()
            .map(|st| pointed_atom(&st.successor).unwrap().to_string())
            .collect();
        assert_eq!(outs, vec!["(! v1)", "(! v2)"]);
    }

    #[test]
    fn invalid_result_is_not_a_successor() {
        // the equation produces an argument the declared domain rejects
        let s = Atomspace::new()
            .add_atoms([
                Atom::typing(Atom::sym("h"), Atom::ty(TypeExpr::arrow(a("A"), a("A")))),
                Atom::typing(Atom::sym("a"), Atom::ty(a("A"))),
                Atom::typing(Atom::sym("c"), Atom::ty(a("C"))),
                Atom::equation(Atom::app(Atom::sym("k"), Atom::var("x")), Atom::sym("c")),
                Atom::app(
                    Atom::sym("h"),
                    Atom::app(Atom::sym("k"), Atom::sym("a")).activated().pointed(),
                )
                .with_ty(a("A")),
            ])
            .unwrap();
        let p = s.pointer().unwrap();
        let rules = instantiate_funapp(p, &s).unwrap();
        assert_eq!(rules.len(), 1);
        let m = match_at(&s, &rules[0].lhs, p).unwrap();
        assert_eq!(apply_rule(&rules[0], &s, &m), s);
        assert!(update(&s).is_empty());
    }

    #[test]
    fn trans_collects_matches_into_a_tuple() {
        let s = Atomspace::new()
            .add_atoms([
                Atom::typing(Atom::sym("a"), Atom::ty(a("A"))),
                Atom::typing(Atom::sym("b"), Atom::ty(a("A"))),
                Atom::trans(Atom::typing(Atom::var("x"), Atom::ty(a("A"))), Atom::var("x"))
                    .activated()
                    .pointed(),
            ])
            .unwrap();
        let rule = instantiate_trans(s.pointer().unwrap(), &s).unwrap();
        let (_, items) = rule.rhs.spine();
        assert_eq!(items.len(), s.node_count());
        assert_eq!(items[0].to_string(), "a");
        assert_eq!(items[1].to_string(), "b");
        assert!(items[2..].iter().all(|x| x.label == Label::Nul));
        let steps = update(&s);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rule, RuleKind::Trans);
    }

    #[test]
    fn trans_without_matches_is_all_nul() {
        let s = Atomspace::new()
            .add_atom(
                Atom::trans(Atom::typing(Atom::var("x"), Atom::ty(a("Q"))), Atom::var("x"))
                    .activated()
                    .pointed(),
            )
            .unwrap();
        let rule = instantiate_trans(s.pointer().unwrap(), &s).unwrap();
        assert!(rule.rhs.spine().1.iter().all(|x| x.label == Label::Nul));
    }

    #[test]
    fn projections_reduce() {
        let t = Atom::apps(
            Atom::sym(TUPLE),
            [Atom::ty(a("A")), Atom::ty(a("B")), Atom::sym("a"), Atom::sym("b")],
        );
        for (proj, want) in [(crate::atomspace::PROJ1, "a"), (crate::atomspace::PROJ2, "b")] {
            let s = Atomspace::new()
                .prelude_tuples()
                .add_atom(Atom::app(Atom::sym(proj), t.clone()).activated().pointed())
                .unwrap();
            let ev = evaluate(&s, 20);
            let nf = &ev.outcome.normal_forms()[0];
            assert_eq!(pointed_atom(nf).unwrap().unmarked().to_string(), want);
        }
    }

    #[test]
    fn rule_labels_mark_sides() {
        let s = minisys(f1_of(Atom::sym("v1")));
        let rules = instantiate_funapp(s.pointer().unwrap(), &s).unwrap();
        assert_eq!(rules.len(), 1);
        let labels = rules[0].labelled();
        assert_eq!(labels[0].2, RuleMarker::Input);
        assert!(labels.iter().any(|l| l.2 == RuleMarker::Output && l.1 == RuleSide::R));
        assert_eq!(rules[0].premise, Some(TypeExpr::arrow(a("A"), a("A"))));
    }
}
