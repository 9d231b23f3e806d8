//! The probabilistic dependent type system: lambda terms with weighted
//! choice, thunks and sampling, typed with unions, intersections and
//! distribution types.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::lambda::fresh_name;
use crate::atomspace::{Atom, SubtypeRelation, TypeExpr};

/// A probability, ordered and hashed by its bits so terms can be map keys.
#[derive(Clone, Copy, Debug)]
pub struct Prob(pub f64);

impl PartialEq for Prob {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Prob {}

impl PartialOrd for Prob {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Prob {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for Prob {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PdtsType {
    Base(String),
    Type,
    Pi(String, Box<PdtsType>, Box<PdtsType>),
    Dist(Box<PdtsType>),
    Union(Box<PdtsType>, Box<PdtsType>),
    Inter(Box<PdtsType>, Box<PdtsType>),
}

impl PdtsType {
    pub fn base(n: impl Into<String>) -> Self {
        PdtsType::Base(n.into())
    }

    pub fn arrow(a: PdtsType, b: PdtsType) -> Self {
        PdtsType::Pi("_".into(), Box::new(a), Box::new(b))
    }

    pub fn pi(x: impl Into<String>, a: PdtsType, b: PdtsType) -> Self {
        PdtsType::Pi(x.into(), Box::new(a), Box::new(b))
    }

    pub fn dist(a: PdtsType) -> Self {
        PdtsType::Dist(Box::new(a))
    }

    pub fn union(a: PdtsType, b: PdtsType) -> Self {
        PdtsType::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: PdtsType, b: PdtsType) -> Self {
        PdtsType::Inter(Box::new(a), Box::new(b))
    }

    fn mentions(&self, x: &str) -> bool {
        match self {
            PdtsType::Base(n) => n == x,
            PdtsType::Type => false,
            PdtsType::Pi(y, a, b) => a.mentions(x) || (y != x && b.mentions(x)),
            PdtsType::Dist(a) => a.mentions(x),
            PdtsType::Union(a, b) | PdtsType::Inter(a, b) => a.mentions(x) || b.mentions(x),
        }
    }

    /// The atomspace type for this type. Products whose body does not
    /// mention the bound name are arrows.
    pub fn to_type_expr(&self) -> TypeExpr {
        match self {
            PdtsType::Base(n) => TypeExpr::base(n.clone()),
            PdtsType::Type => TypeExpr::Type,
            PdtsType::Pi(x, a, b) if !b.mentions(x) => TypeExpr::arrow(a.to_type_expr(), b.to_type_expr()),
            PdtsType::Pi(x, a, b) => TypeExpr::pi(x.clone(), a.to_type_expr(), Atom::ty(b.to_type_expr())),
            PdtsType::Dist(a) => TypeExpr::dist(a.to_type_expr()),
            PdtsType::Union(a, b) => TypeExpr::union(a.to_type_expr(), b.to_type_expr()),
            PdtsType::Inter(a, b) => TypeExpr::inter(a.to_type_expr(), b.to_type_expr()),
        }
    }

    pub fn from_type_expr(t: &TypeExpr) -> Option<PdtsType> {
        Some(match t {
            TypeExpr::Base(n) => PdtsType::base(n.clone()),
            TypeExpr::Type => PdtsType::Type,
            TypeExpr::Arrow(a, b) => PdtsType::arrow(Self::from_type_expr(a)?, Self::from_type_expr(b)?),
            TypeExpr::Pi(x, a, b) => PdtsType::pi(x.clone(), Self::from_type_expr(a)?, Self::from_type_expr(&b.as_type()?)?),
            TypeExpr::Dist(a) => PdtsType::dist(Self::from_type_expr(a)?),
            TypeExpr::Union(a, b) => PdtsType::union(Self::from_type_expr(a)?, Self::from_type_expr(b)?),
            TypeExpr::Inter(a, b) => PdtsType::inter(Self::from_type_expr(a)?, Self::from_type_expr(b)?),
            _ => return None,
        })
    }
}

impl fmt::Display for PdtsType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atomic = |t: &PdtsType| matches!(t, PdtsType::Base(_) | PdtsType::Type | PdtsType::Dist(_));
        match self {
            PdtsType::Base(n) => f.write_str(n),
            PdtsType::Type => f.write_str("Type"),
            PdtsType::Dist(a) => write!(f, "D({a})"),
            PdtsType::Pi(x, a, b) if !b.mentions(x) => {
                if atomic(a) {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
            PdtsType::Pi(x, a, b) => write!(f, "Pi {x}:{a}. {b}"),
            PdtsType::Union(a, b) | PdtsType::Inter(a, b) => {
                let op = if matches!(self, PdtsType::Union(..)) { "|" } else { "&" };
                let side = |t: &PdtsType| if atomic(t) { t.to_string() } else { format!("({t})") };
                write!(f, "{} {op} {}", side(a), side(b))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PdtsExpr {
    Var(String),
    App(Box<PdtsExpr>, Box<PdtsExpr>),
    Lam(String, PdtsType, Box<PdtsExpr>),
    Random(Prob, Box<PdtsExpr>, Box<PdtsExpr>),
    Sample(Box<PdtsExpr>),
    Thunk(Box<PdtsExpr>),
}

pub type PdtsContext = BTreeMap<String, PdtsType>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PdtsError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("{term} has type {ty}, which is not a function type")]
    NotAFunction { term: String, ty: PdtsType },
    #[error("argument {term} has type {found}, not below {expected}")]
    Mismatch {
        term: String,
        expected: PdtsType,
        found: PdtsType,
    },
    #[error("sample of {term}, whose type {ty} is not a distribution")]
    NotADistribution { term: String, ty: PdtsType },
    #[error("weight {0} is outside [0, 1]")]
    Weight(String),
    #[error("no normal form within {budget} steps")]
    Budget { budget: usize },
}

/// One weighted alternative of a reduction step.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedStep {
    pub expr: PdtsExpr,
    pub weight: f64,
}

impl PdtsExpr {
    pub fn var(x: impl Into<String>) -> Self {
        PdtsExpr::Var(x.into())
    }

    pub fn app(f: PdtsExpr, a: PdtsExpr) -> Self {
        PdtsExpr::App(Box::new(f), Box::new(a))
    }

    pub fn lam(x: impl Into<String>, t: PdtsType, b: PdtsExpr) -> Self {
        PdtsExpr::Lam(x.into(), t, Box::new(b))
    }

    pub fn random(p: f64, a: PdtsExpr, b: PdtsExpr) -> Self {
        PdtsExpr::Random(Prob(p), Box::new(a), Box::new(b))
    }

    pub fn sample(a: PdtsExpr) -> Self {
        PdtsExpr::Sample(Box::new(a))
    }

    pub fn thunk(a: PdtsExpr) -> Self {
        PdtsExpr::Thunk(Box::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            PdtsExpr::Var(_) => 1,
            PdtsExpr::App(a, b) | PdtsExpr::Random(_, a, b) => 1 + a.size() + b.size(),
            PdtsExpr::Lam(_, _, a) | PdtsExpr::Sample(a) | PdtsExpr::Thunk(a) => 1 + a.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            PdtsExpr::Var(x) => BTreeSet::from([x.clone()]),
            PdtsExpr::App(a, b) | PdtsExpr::Random(_, a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            PdtsExpr::Lam(x, _, b) => {
                let mut s = b.free_vars();
                s.remove(x);
                s
            }
            PdtsExpr::Sample(a) | PdtsExpr::Thunk(a) => a.free_vars(),
        }
    }

    fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            PdtsExpr::Var(x) => {
                out.insert(x.clone());
            }
            PdtsExpr::App(a, b) | PdtsExpr::Random(_, a, b) => {
                a.names(out);
                b.names(out);
            }
            PdtsExpr::Lam(x, _, b) => {
                out.insert(x.clone());
                b.names(out);
            }
            PdtsExpr::Sample(a) | PdtsExpr::Thunk(a) => a.names(out),
        }
    }

    /// Capture-avoiding `self[x := s]`.
    pub fn subst(&self, x: &str, s: &PdtsExpr) -> PdtsExpr {
        match self {
            PdtsExpr::Var(y) if y == x => s.clone(),
            PdtsExpr::Var(_) => self.clone(),
            PdtsExpr::App(a, b) => PdtsExpr::app(a.subst(x, s), b.subst(x, s)),
            PdtsExpr::Random(p, a, b) => PdtsExpr::Random(*p, Box::new(a.subst(x, s)), Box::new(b.subst(x, s))),
            PdtsExpr::Sample(a) => PdtsExpr::sample(a.subst(x, s)),
            PdtsExpr::Thunk(a) => PdtsExpr::thunk(a.subst(x, s)),
            PdtsExpr::Lam(y, _, _) if y == x => self.clone(),
            PdtsExpr::Lam(y, t, b) => {
                if s.free_vars().contains(y) && b.free_vars().contains(x) {
                    let mut avoid = BTreeSet::from([x.to_string()]);
                    s.names(&mut avoid);
                    b.names(&mut avoid);
                    let y2 = fresh_name(y, &avoid);
                    let b2 = b.subst(y, &PdtsExpr::Var(y2.clone()));
                    PdtsExpr::lam(y2, t.clone(), b2.subst(x, s))
                } else {
                    PdtsExpr::lam(y.clone(), t.clone(), b.subst(x, s))
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &PdtsExpr) -> bool {
        fn go(a: &PdtsExpr, b: &PdtsExpr, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (PdtsExpr::Var(x), PdtsExpr::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if l == x || r == y {
                            return l == x && r == y;
                        }
                    }
                    x == y
                }
                (PdtsExpr::App(f, s), PdtsExpr::App(g, t)) => go(f, g, env) && go(s, t, env),
                (PdtsExpr::Random(p, f, s), PdtsExpr::Random(q, g, t)) => {
                    p == q && go(f, g, env) && go(s, t, env)
                }
                (PdtsExpr::Sample(s), PdtsExpr::Sample(t)) | (PdtsExpr::Thunk(s), PdtsExpr::Thunk(t)) => {
                    go(s, t, env)
                }
                (PdtsExpr::Lam(x, tx, s), PdtsExpr::Lam(y, ty, t)) => {
                    if tx != ty {
                        return false;
                    }
                    env.push((x.clone(), y.clone()));
                    let r = go(s, t, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

impl fmt::Display for PdtsExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdtsExpr::Var(x) => f.write_str(x),
            PdtsExpr::Lam(x, t, b) => write!(f, "\\{x}:{t}. {b}"),
            PdtsExpr::Random(p, a, b) => write!(f, "random[{}]({a}, {b})", p.0),
            PdtsExpr::Sample(a) => write!(f, "sample({a})"),
            PdtsExpr::Thunk(a) => write!(f, "thunk({a})"),
            PdtsExpr::App(g, a) => {
                match **g {
                    PdtsExpr::Lam(..) => write!(f, "({g})")?,
                    _ => write!(f, "{g}")?,
                }
                match **a {
                    PdtsExpr::App(..) | PdtsExpr::Lam(..) => write!(f, " ({a})"),
                    _ => write!(f, " {a}"),
                }
            }
        }
    }
}

/// The subtype lattice shared with atomspaces.
pub fn pdts_subtype(a: &PdtsType, b: &PdtsType) -> bool {
    SubtypeRelation::new().is_subtype(&a.to_type_expr(), &b.to_type_expr())
}

/// The element type of a distribution type, looking through unions and
/// intersections of distributions.
fn dist_content(t: &PdtsType) -> Option<PdtsType> {
    match t {
        PdtsType::Dist(a) => Some((**a).clone()),
        PdtsType::Union(a, b) => Some(PdtsType::union(dist_content(a)?, dist_content(b)?)),
        PdtsType::Inter(a, b) => dist_content(a).or_else(|| dist_content(b)),
        _ => None,
    }
}

/// Syntax-directed typing with subsumption at applications.
pub fn pdts_typecheck(ctx: &PdtsContext, e: &PdtsExpr) -> Result<PdtsType, PdtsError> {
    match e {
        PdtsExpr::Var(x) => ctx.get(x).cloned().ok_or_else(|| PdtsError::Unbound(x.clone())),
        PdtsExpr::App(f, a) => {
            let tf = pdts_typecheck(ctx, f)?;
            let ta = pdts_typecheck(ctx, a)?;
            match tf {
                PdtsType::Pi(_, dom, cod) => {
                    if pdts_subtype(&ta, &dom) {
                        Ok(*cod)
                    } else {
                        Err(PdtsError::Mismatch {
                            term: a.to_string(),
                            expected: *dom,
                            found: ta,
                        })
                    }
                }
                ty => Err(PdtsError::NotAFunction {
                    term: f.to_string(),
                    ty,
                }),
            }
        }
        PdtsExpr::Lam(x, t, b) => {
            let mut inner = ctx.clone();
            inner.insert(x.clone(), t.clone());
            Ok(PdtsType::pi(x.clone(), t.clone(), pdts_typecheck(&inner, b)?))
        }
        PdtsExpr::Random(p, a, b) => {
            if !(0.0..=1.0).contains(&p.0) {
                return Err(PdtsError::Weight(p.0.to_string()));
            }
            Ok(PdtsType::union(pdts_typecheck(ctx, a)?, pdts_typecheck(ctx, b)?))
        }
        PdtsExpr::Thunk(a) => Ok(PdtsType::dist(pdts_typecheck(ctx, a)?)),
        PdtsExpr::Sample(a) => {
            let t = pdts_typecheck(ctx, a)?;
            dist_content(&t).ok_or_else(|| PdtsError::NotADistribution {
                term: a.to_string(),
                ty: t,
            })
        }
    }
}

fn merge(alts: Vec<WeightedStep>) -> Vec<WeightedStep> {
    let mut out: Vec<WeightedStep> = Vec::new();
    for s in alts {
        if s.weight <= 0.0 {
            continue;
        }
        match out.iter_mut().find(|o| o.expr == s.expr) {
            Some(o) => o.weight += s.weight,
            None => out.push(s),
        }
    }
    out
}

/// Reduces the leftmost-innermost redex outside lambda bodies. Each
/// alternative carries its weight; zero-weight alternatives are dropped
/// and equal results are merged.
pub fn pdts_step(e: &PdtsExpr) -> Vec<WeightedStep> {
    fn wrap(alts: Vec<WeightedStep>, f: impl Fn(PdtsExpr) -> PdtsExpr) -> Vec<WeightedStep> {
        alts.into_iter()
            .map(|s| WeightedStep {
                expr: f(s.expr),
                weight: s.weight,
            })
            .collect()
    }
    let inner = match e {
        PdtsExpr::Var(_) | PdtsExpr::Lam(..) => return Vec::new(),
        PdtsExpr::App(f, a) => {
            let s = pdts_step(f);
            if !s.is_empty() {
                return wrap(s, |f2| PdtsExpr::App(Box::new(f2), a.clone()));
            }
            let s = pdts_step(a);
            if !s.is_empty() {
                return wrap(s, |a2| PdtsExpr::App(f.clone(), Box::new(a2)));
            }
            match &**f {
                PdtsExpr::Lam(x, _, b) => vec![WeightedStep {
                    expr: b.subst(x, a),
                    weight: 1.0,
                }],
                _ => Vec::new(),
            }
        }
        PdtsExpr::Random(p, a, b) => {
            let s = pdts_step(a);
            if !s.is_empty() {
                return wrap(s, |a2| PdtsExpr::Random(*p, Box::new(a2), b.clone()));
            }
            let s = pdts_step(b);
            if !s.is_empty() {
                return wrap(s, |b2| PdtsExpr::Random(*p, a.clone(), Box::new(b2)));
            }
            vec![
                WeightedStep {
                    expr: (**a).clone(),
                    weight: p.0,
                },
                WeightedStep {
                    expr: (**b).clone(),
                    weight: 1.0 - p.0,
                },
            ]
        }
        PdtsExpr::Thunk(a) => return wrap(pdts_step(a), PdtsExpr::thunk),
        PdtsExpr::Sample(a) => {
            let s = pdts_step(a);
            if !s.is_empty() {
                return wrap(s, PdtsExpr::sample);
            }
            match &**a {
                PdtsExpr::Thunk(p) => vec![WeightedStep {
                    expr: (**p).clone(),
                    weight: 1.0,
                }],
                _ => Vec::new(),
            }
        }
    };
    merge(inner)
}

/// A distribution over normal forms.
pub type Distribution = BTreeMap<PdtsExpr, f64>;

#[derive(Clone, Debug, PartialEq, Error)]
#[error("full evaluation stopped after {budget} steps with mass {residual} unresolved")]
pub struct FullEvalExhausted {
    pub budget: usize,
    pub partial: Distribution,
    pub residual: f64,
}

/// Sums path weights over every maximal reduction path. Equal
/// intermediate terms are merged; `budget` bounds the number of expanded
/// terms.
pub fn pdts_full_eval(e: &PdtsExpr, budget: usize) -> Result<Distribution, FullEvalExhausted> {
    let mut frontier: BTreeMap<PdtsExpr, f64> = BTreeMap::from([(e.clone(), 1.0)]);
    let mut out = Distribution::new();
    let mut steps = 0;
    while let Some((cur, w)) = frontier.pop_first() {
        let alts = pdts_step(&cur);
        if alts.is_empty() {
            *out.entry(cur).or_insert(0.0) += w;
            continue;
        }
        if steps >= budget {
            frontier.insert(cur, w);
            return Err(FullEvalExhausted {
                budget,
                partial: out,
                residual: frontier.values().sum(),
            });
        }
        steps += 1;
        for s in alts {
            *frontier.entry(s.expr).or_insert(0.0) += w * s.weight;
        }
    }
    Ok(out)
}

/// Follows one path, choosing alternatives by weight with a seeded
/// generator.
pub fn pdts_sample(e: &PdtsExpr, seed: u64, budget: usize) -> Result<PdtsExpr, PdtsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = e.clone();
    for _ in 0..=budget {
        let alts = pdts_step(&cur);
        if alts.is_empty() {
            return Ok(cur);
        }
        let total: f64 = alts.iter().map(|s| s.weight).sum();
        let mut x = rng.gen::<f64>() * total;
        let mut pick = alts.len() - 1;
        for (i, s) in alts.iter().enumerate() {
            if x < s.weight {
                pick = i;
                break;
            }
            x -= s.weight;
        }
        cur = alts.into_iter().nth(pick).expect("index in range").expr;
    }
    Err(PdtsError::Budget { budget })
}
