//! Object languages and pointed atomspaces as transition systems.
//!
//! Reduction is the `update` action. Judgments are observed through probe
//! actions: self-loops labelled `is-of-type(T)` when the judgment holds
//! and `not-is-of-type(T)` when it does not, and likewise for the other
//! probes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::encode::{stype_to_type, Combinator};
use super::lambda::{stlc_beta_step, stlc_typecheck, Context, Term};
use super::pdts::{pdts_step, pdts_subtype, pdts_typecheck, PdtsContext, PdtsExpr, PdtsType};
use super::pts::{pts_beta_step, pts_typecheck, PtsContext, PtsExpr, PtsSpec};
use crate::atomspace::{Atom, Atomspace, Label, TypeExpr};
use crate::engine::{update, RuleKind};
use crate::lts::{Lts, Transition};

pub const UPDATE: &str = "update";

/// Moves a settled space may take before it is declared stuck.
const SETTLE_LIMIT: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Probe {
    /// The term has a type below the given one.
    IsOfType(TypeExpr),
    /// The term is the global symbol.
    IsSymbol(String),
    /// The term is a lambda abstraction.
    IsLambda,
}

impl Probe {
    fn name(&self) -> String {
        match self {
            Probe::IsOfType(t) => format!("is-of-type({t})"),
            Probe::IsSymbol(s) => format!("is-symbol({s})"),
            Probe::IsLambda => "is-lambda".to_string(),
        }
    }

    /// The self-loop this probe contributes.
    pub fn observe<S: Clone>(&self, s: &S, holds: bool) -> Transition<S> {
        let name = self.name();
        Transition::new(if holds { name } else { format!("not-{name}") }, s.clone())
    }
}

fn with_probes<S: Clone>(
    s: &S,
    probes: &[Probe],
    holds: impl Fn(&Probe) -> bool,
    mut steps: Vec<Transition<S>>,
) -> Vec<Transition<S>> {
    steps.extend(probes.iter().map(|p| p.observe(s, holds(p))));
    steps
}

/// Simply typed or untyped lambda terms under all-redex β-reduction.
pub struct StlcLts {
    pub ctx: Context,
    pub probes: Vec<Probe>,
}

impl Lts for StlcLts {
    type State = Term;

    fn step(&self, e: &Term) -> Vec<Transition<Term>> {
        let ups = stlc_beta_step(e).into_iter().map(|t| Transition::new(UPDATE, t)).collect();
        let ty = stlc_typecheck(&self.ctx, e).ok().map(|t| stype_to_type(&t));
        with_probes(
            e,
            &self.probes,
            |p| match p {
                Probe::IsOfType(t) => ty.as_ref() == Some(t),
                Probe::IsSymbol(s) => *e == Term::var(s.clone()),
                Probe::IsLambda => matches!(e, Term::Lam(..)),
            },
            ups,
        )
    }
}

pub struct PtsLts {
    pub spec: PtsSpec,
    pub ctx: PtsContext,
    pub probes: Vec<Probe>,
}

impl Lts for PtsLts {
    type State = PtsExpr;

    fn step(&self, e: &PtsExpr) -> Vec<Transition<PtsExpr>> {
        let ups = pts_beta_step(e).into_iter().map(|t| Transition::new(UPDATE, t)).collect();
        let ty = pts_typecheck(&self.spec, &self.ctx, e).ok();
        with_probes(
            e,
            &self.probes,
            |p| match p {
                Probe::IsOfType(t) => ty.as_ref().map(|ty| super::encode::pts_to_type(ty, &[])).as_ref() == Some(t),
                Probe::IsSymbol(s) => *e == PtsExpr::var(s.clone()),
                Probe::IsLambda => matches!(e, PtsExpr::Lam(..)),
            },
            ups,
        )
    }
}

/// Probabilistic terms under weighted reduction. With `weighted` unset
/// the weights are erased.
pub struct PdtsLts {
    pub ctx: PdtsContext,
    pub probes: Vec<Probe>,
    pub weighted: bool,
}

impl Lts for PdtsLts {
    type State = PdtsExpr;

    fn step(&self, e: &PdtsExpr) -> Vec<Transition<PdtsExpr>> {
        let ups = pdts_step(e)
            .into_iter()
            .map(|w| {
                if self.weighted {
                    Transition::weighted(UPDATE, w.expr, w.weight)
                } else {
                    Transition::new(UPDATE, w.expr)
                }
            })
            .collect();
        let ty = pdts_typecheck(&self.ctx, e).ok();
        with_probes(
            e,
            &self.probes,
            |p| match p {
                Probe::IsOfType(t) => match (&ty, PdtsType::from_type_expr(t)) {
                    (Some(ty), Some(t)) => pdts_subtype(ty, &t),
                    _ => false,
                },
                Probe::IsSymbol(s) => *e == PdtsExpr::var(s.clone()),
                Probe::IsLambda => matches!(e, PdtsExpr::Lam(..)),
            },
            ups,
        )
    }
}

/// A pointed space compared by its canonical form.
#[derive(Clone)]
pub struct SpaceState {
    key: Vec<Atom>,
    pub space: Atomspace,
}

impl SpaceState {
    pub fn new(space: Atomspace) -> Self {
        SpaceState {
            key: space.canonical(),
            space,
        }
    }

    /// The whole term the pointer is in.
    pub fn pointed_term(&self) -> Option<Atom> {
        self.space.pointer().map(|p| self.space.atom(self.space.root_of(p)))
    }
}

impl PartialEq for SpaceState {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for SpaceState {}

impl PartialOrd for SpaceState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SpaceState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Debug for SpaceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.space.pointer() {
            Some(p) => write!(f, "{} @ {}", self.space.atom(self.space.root_of(p)), self.space.atom(p)),
            None => f.write_str("<no pointer>"),
        }
    }
}

/// Follows pointer moves until a rewrite is due or evaluation halts.
pub fn settle(space: &Atomspace) -> Atomspace {
    let mut cur = space.clone();
    for _ in 0..SETTLE_LIMIT {
        let mut steps = update(&cur);
        if steps.len() != 1 || steps[0].rule != RuleKind::MovePointer {
            break;
        }
        cur = steps.pop().expect("one step").successor;
    }
    cur
}

/// Pointed spaces under engine updates. With `compress` set, pointer
/// moves are internal: states are settled and each rewrite is one
/// `update`. Otherwise every step is visible, labelled by its rule kind.
pub struct SpaceLts {
    pub probes: Vec<Probe>,
    pub combinators: BTreeMap<String, Combinator>,
    pub compress: bool,
}

impl SpaceLts {
    /// The start state for `space`.
    pub fn state(&self, space: &Atomspace) -> SpaceState {
        SpaceState::new(if self.compress { settle(space) } else { space.clone() })
    }

    fn holds(&self, s: &SpaceState, p: &Probe) -> bool {
        let Some(term) = s.pointed_term() else { return false };
        match p {
            Probe::IsOfType(t) => s.space.typing_query(&term, t),
            Probe::IsSymbol(x) => term.label == Label::Sym(x.clone()),
            Probe::IsLambda => {
                let (head, args) = term.spine();
                matches!(&head.label, Label::Sym(f) if self.combinators.get(f).is_some_and(|c| args.len() < c.arity()))
            }
        }
    }
}

impl Lts for SpaceLts {
    type State = SpaceState;

    fn step(&self, s: &SpaceState) -> Vec<Transition<SpaceState>> {
        let ups = update(&s.space)
            .into_iter()
            .map(|st| {
                if self.compress {
                    Transition::new(UPDATE, self.state(&st.successor))
                } else {
                    let label = match st.rule {
                        RuleKind::MovePointer => RuleKind::MovePointer.to_string(),
                        _ => UPDATE.to_string(),
                    };
                    Transition::new(label, SpaceState::new(st.successor))
                }
            })
            .collect();
        with_probes(s, &self.probes, |p| self.holds(s, p), ups)
    }
}

/// The compressed system of an encoded space, with its start state.
pub fn lts_of_atomspace(
    space: &Atomspace,
    combinators: BTreeMap<String, Combinator>,
    probes: Vec<Probe>,
) -> (SpaceLts, SpaceState) {
    let lts = SpaceLts {
        probes,
        combinators,
        compress: true,
    };
    let start = lts.state(space);
    (lts, start)
}
