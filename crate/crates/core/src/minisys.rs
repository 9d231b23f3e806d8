//! A small system with one type `A`, constants `v1, v2 : A`, a function
//! `f1 : A -> A` swapping them, and `sample`/`thunk`. Terms have at most
//! three subexpressions. It is evaluated two ways, by the rewrite engine
//! over an atomspace and by case analysis, and the two transition systems
//! are compared.

use std::collections::BTreeMap;
use std::fmt;

use crate::atomspace::{Atom, Atomspace, TypeExpr};
use crate::lang::encode::{pdts_prelude, RANDOM};
use crate::lang::systems::{lts_of_atomspace, Probe, SpaceLts, SpaceState, UPDATE};
use crate::lts::{
    bisim_check, reachable, verify_bisimulation, BisimVerdict, ExplicitLts, Lts, Rooted, RootedLts,
    Transition,
};

/// Largest term size enumerated.
pub const MAX_SIZE: usize = 3;

/// Number of well-typed terms of size at most [`MAX_SIZE`]: 2 of size
/// one, 4 of size two, 8 of size three.
pub const STATE_COUNT: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MiniExpr {
    V1,
    V2,
    F1(Box<MiniExpr>),
    Thunk(Box<MiniExpr>),
    Sample(Box<MiniExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MiniType {
    A,
    D(Box<MiniType>),
}

impl MiniType {
    pub fn to_type_expr(&self) -> TypeExpr {
        match self {
            MiniType::A => TypeExpr::base("A"),
            MiniType::D(t) => TypeExpr::dist(t.to_type_expr()),
        }
    }
}

impl MiniExpr {
    pub fn f1(e: MiniExpr) -> Self {
        MiniExpr::F1(Box::new(e))
    }

    pub fn thunk(e: MiniExpr) -> Self {
        MiniExpr::Thunk(Box::new(e))
    }

    pub fn sample(e: MiniExpr) -> Self {
        MiniExpr::Sample(Box::new(e))
    }

    /// Number of subexpressions, counting the term itself.
    pub fn size(&self) -> usize {
        match self {
            MiniExpr::V1 | MiniExpr::V2 => 1,
            MiniExpr::F1(e) | MiniExpr::Thunk(e) | MiniExpr::Sample(e) => 1 + e.size(),
        }
    }

    pub fn ty(&self) -> Option<MiniType> {
        match self {
            MiniExpr::V1 | MiniExpr::V2 => Some(MiniType::A),
            MiniExpr::F1(e) => (e.ty()? == MiniType::A).then_some(MiniType::A),
            MiniExpr::Thunk(e) => Some(MiniType::D(Box::new(e.ty()?))),
            MiniExpr::Sample(e) => match e.ty()? {
                MiniType::D(t) => Some(*t),
                MiniType::A => None,
            },
        }
    }

    /// The term as an activated atom tagged with its types.
    pub fn to_atom(&self) -> Atom {
        let (head, arg) = match self {
            MiniExpr::V1 => return Atom::sym("v1"),
            MiniExpr::V2 => return Atom::sym("v2"),
            MiniExpr::F1(e) => ("f1", e),
            MiniExpr::Thunk(e) => ("thunk", e),
            MiniExpr::Sample(e) => ("sample", e),
        };
        let ty = self.ty().map_or(TypeExpr::TopType, |t| t.to_type_expr());
        Atom::app(Atom::sym(head), arg.to_atom()).with_ty(ty).activated()
    }
}

impl fmt::Display for MiniExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MiniExpr::V1 => f.write_str("v1"),
            MiniExpr::V2 => f.write_str("v2"),
            MiniExpr::F1(e) => write!(f, "(f1 {e})"),
            MiniExpr::Thunk(e) => write!(f, "(thunk {e})"),
            MiniExpr::Sample(e) => write!(f, "(sample {e})"),
        }
    }
}

/// All well-typed terms of size at most [`MAX_SIZE`], smallest first.
pub fn enumerate() -> Vec<MiniExpr> {
    let mut by_size: Vec<Vec<MiniExpr>> = vec![Vec::new(), vec![MiniExpr::V1, MiniExpr::V2]];
    for n in 2..=MAX_SIZE {
        let level = by_size[n - 1]
            .iter()
            .flat_map(|e| {
                [
                    MiniExpr::f1(e.clone()),
                    MiniExpr::thunk(e.clone()),
                    MiniExpr::sample(e.clone()),
                ]
            })
            .filter(|e| e.ty().is_some())
            .collect();
        by_size.push(level);
    }
    by_size.concat()
}

/// One leftmost-innermost step, or `None` at a normal form.
pub fn beta3(e: &MiniExpr) -> Option<MiniExpr> {
    match e {
        MiniExpr::V1 | MiniExpr::V2 => None,
        MiniExpr::F1(a) => match beta3(a) {
            Some(a) => Some(MiniExpr::f1(a)),
            None => match **a {
                MiniExpr::V1 => Some(MiniExpr::V2),
                MiniExpr::V2 => Some(MiniExpr::V1),
                _ => None,
            },
        },
        MiniExpr::Thunk(a) => beta3(a).map(MiniExpr::thunk),
        MiniExpr::Sample(a) => match beta3(a) {
            Some(a) => Some(MiniExpr::sample(a)),
            None => match &**a {
                MiniExpr::Thunk(x) => Some((**x).clone()),
                _ => None,
            },
        },
    }
}

/// The judgments both systems expose.
pub fn probes() -> Vec<Probe> {
    let a = TypeExpr::base("A");
    vec![
        Probe::IsOfType(a.clone()),
        Probe::IsOfType(TypeExpr::dist(a.clone())),
        Probe::IsOfType(TypeExpr::dist(TypeExpr::dist(a))),
        Probe::IsSymbol("v1".into()),
        Probe::IsSymbol("v2".into()),
    ]
}

/// Terms under [`beta3`].
pub struct Beta3Lts {
    pub probes: Vec<Probe>,
}

impl Lts for Beta3Lts {
    type State = MiniExpr;

    fn step(&self, e: &MiniExpr) -> Vec<Transition<MiniExpr>> {
        let ty = e.ty().map(|t| t.to_type_expr());
        let mut out: Vec<_> = beta3(e).into_iter().map(|t| Transition::new(UPDATE, t)).collect();
        out.extend(self.probes.iter().map(|p| {
            let holds = match p {
                Probe::IsOfType(t) => ty.as_ref() == Some(t),
                Probe::IsSymbol(s) => e.to_string() == *s,
                Probe::IsLambda => false,
            };
            p.observe(e, holds)
        }));
        out
    }
}

/// The fixed atoms: the type, constants, `f1` with its two equations,
/// and the `sample`/`thunk` atoms. With `mutated` set, `f1` is the
/// identity instead.
pub fn prelude(mutated: bool) -> Vec<Atom> {
    let a = || Atom::ty(TypeExpr::base("A"));
    let (r1, r2) = if mutated { ("v1", "v2") } else { ("v2", "v1") };
    let mut atoms = vec![
        Atom::typing(Atom::sym("A"), Atom::ty(TypeExpr::Type)),
        Atom::typing(Atom::sym("v1"), a()),
        Atom::typing(Atom::sym("v2"), a()),
        Atom::typing(Atom::sym("f1"), Atom::arrow(a(), a())),
        Atom::equation(Atom::app(Atom::sym("f1"), Atom::sym("v1")), Atom::sym(r1)),
        Atom::equation(Atom::app(Atom::sym("f1"), Atom::sym("v2")), Atom::sym(r2)),
    ];
    atoms.extend(pdts_prelude().into_iter().filter(|at| !mentions(at, RANDOM)));
    atoms
}

fn mentions(a: &Atom, name: &str) -> bool {
    a.name() == Some(name) || a.args.iter().any(|c| mentions(c, name))
}

/// The prelude with `e` pointed.
pub fn encode(e: &MiniExpr, mutated: bool) -> Atomspace {
    Atomspace::new()
        .add_atoms(prelude(mutated).into_iter().chain([e.to_atom().pointed()]))
        .expect("minisys atoms satisfy the atomspace constraints")
}

/// Both systems with their start states, one per enumerated term.
pub struct Systems {
    pub terms: Vec<MiniExpr>,
    /// Engine updates over encoded spaces, pointer moves compressed.
    pub str1: SpaceLts,
    pub starts1: Vec<SpaceState>,
    /// Case-analysis reduction over terms.
    pub str2: Beta3Lts,
}

pub type Verdict = BisimVerdict<Rooted<MiniExpr>, Rooted<SpaceState>>;

fn init_action(e: &MiniExpr) -> String {
    format!("init:{e}")
}

impl Systems {
    pub fn new(mutated: bool) -> Self {
        let terms = enumerate();
        let (str1, _) = lts_of_atomspace(&Atomspace::new(), BTreeMap::new(), probes());
        let starts1 = terms.iter().map(|e| str1.state(&encode(e, mutated))).collect();
        Systems {
            terms,
            str1,
            starts1,
            str2: Beta3Lts { probes: probes() },
        }
    }

    pub fn rooted1(&self) -> RootedLts<'_, SpaceLts> {
        RootedLts {
            inner: &self.str1,
            starts: self.terms.iter().map(init_action).zip(self.starts1.iter().cloned()).collect(),
        }
    }

    pub fn rooted2(&self) -> RootedLts<'_, Beta3Lts> {
        RootedLts {
            inner: &self.str2,
            starts: self.terms.iter().map(|e| (init_action(e), e.clone())).collect(),
        }
    }

    /// The verdict for the two rooted systems. The state spaces are
    /// finite, so the budget only guards against a broken encoding.
    pub fn check(&self) -> Verdict {
        bisim_check(&self.rooted2(), &Rooted::Start, &self.rooted1(), &Rooted::Start, 10_000)
    }

    /// Re-checks both transfer conditions for every pair of `relation`.
    pub fn verify(&self, relation: &[(Rooted<MiniExpr>, Rooted<SpaceState>)]) -> Result<(), String> {
        verify_bisimulation(&self.rooted2(), &self.rooted1(), relation)
    }

    /// Both systems in DOT form: the term system first.
    pub fn to_dot(&self) -> (String, String) {
        let name2 = |s: &Rooted<MiniExpr>| match s {
            Rooted::Start => "start".to_string(),
            Rooted::At(e) => e.to_string(),
        };
        let name1 = |s: &Rooted<SpaceState>| match s {
            Rooted::Start => "start".to_string(),
            Rooted::At(sp) => format!("{sp:?}"),
        };
        let f2 = reachable(&self.rooted2(), &Rooted::Start, 10_000);
        let f1 = reachable(&self.rooted1(), &Rooted::Start, 10_000);
        (
            ExplicitLts::from_fragment(&f2, name2).to_dot(),
            ExplicitLts::from_fragment(&f1, name1).to_dot(),
        )
    }
}

pub fn build_systems() -> Systems {
    Systems::new(false)
}

/// The exhaustive check over all enumerated terms.
pub fn prove_bisim() -> Verdict {
    build_systems().check()
}
