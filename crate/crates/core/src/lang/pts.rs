//! Pure type systems: sorts, axioms and product rules over one syntax for
//! terms and types. Conversion normalizes under a step budget, since an
//! arbitrary specification need not be normalizing.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::lambda::{fresh_name, SType, Term};

pub const DEFAULT_CONVERSION_BUDGET: usize = 10_000;

/// Sorts are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtsSpec {
    pub sorts: usize,
    pub axioms: Vec<(usize, usize)>,
    pub rules: Vec<(usize, usize, usize)>,
}

impl PtsSpec {
    /// The simply typed calculus: `s1 : s2`, rule `(s1, s1, s1)`.
    pub fn lambda_arrow() -> Self {
        PtsSpec {
            sorts: 2,
            axioms: vec![(1, 2)],
            rules: vec![(1, 1, 1)],
        }
    }

    /// One sort typing itself.
    pub fn quine() -> Self {
        PtsSpec {
            sorts: 1,
            axioms: vec![(1, 1)],
            rules: vec![(1, 1, 1)],
        }
    }

    /// Parses the specification file format: lines `sorts N`, axioms
    /// `(s1 : s2)` and rules `(s1, s2, s3)`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, PtsError> {
        let mut spec = PtsSpec {
            sorts: 0,
            axioms: Vec::new(),
            rules: Vec::new(),
        };
        let sort = |t: &str, line: usize| -> Result<usize, PtsError> {
            let t = t.trim();
            t.strip_prefix('s')
                .unwrap_or(t)
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| PtsError::Spec(format!("line {line}: bad sort {t:?}")))
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let n = i + 1;
            if let Some(rest) = line.strip_prefix("sorts") {
                spec.sorts = rest
                    .trim()
                    .parse()
                    .map_err(|_| PtsError::Spec(format!("line {n}: bad sort count")))?;
            } else if let Some(inner) = line.strip_prefix('(').and_then(|l| l.strip_suffix(')')) {
                if let Some((a, b)) = inner.split_once(':') {
                    spec.axioms.push((sort(a, n)?, sort(b, n)?));
                } else {
                    let parts: Vec<&str> = inner.split(',').collect();
                    let [a, b, c] = parts.as_slice() else {
                        return Err(PtsError::Spec(format!("line {n}: a rule has three sorts")));
                    };
                    spec.rules.push((sort(a, n)?, sort(b, n)?, sort(c, n)?));
                }
            } else {
                return Err(PtsError::Spec(format!("line {n}: unrecognised {line:?}")));
            }
        }
        let max = spec
            .axioms
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(spec.rules.iter().flat_map(|&(a, b, c)| [a, b, c]))
            .max()
            .unwrap_or(0);
        spec.sorts = spec.sorts.max(max);
        Ok(spec)
    }

    fn axiom(&self, s: usize) -> Option<usize> {
        self.axioms.iter().find(|a| a.0 == s).map(|a| a.1)
    }

    fn rule(&self, l: usize, m: usize) -> Option<usize> {
        self.rules.iter().find(|r| r.0 == l && r.1 == m).map(|r| r.2)
    }
}

impl fmt::Display for PtsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sorts {}", self.sorts)?;
        for (a, b) in &self.axioms {
            writeln!(f, "(s{a} : s{b})")?;
        }
        for (a, b, c) in &self.rules {
            writeln!(f, "(s{a}, s{b}, s{c})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PtsExpr {
    Var(String),
    Sort(usize),
    App(Box<PtsExpr>, Box<PtsExpr>),
    Lam(String, Box<PtsExpr>, Box<PtsExpr>),
    Pi(String, Box<PtsExpr>, Box<PtsExpr>),
}

/// Typing context, in declaration order; later entries shadow earlier.
pub type PtsContext = Vec<(String, PtsExpr)>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PtsError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("no axiom types sort s{0}")]
    NoAxiom(usize),
    #[error("no rule for (s{0}, s{1}, _)")]
    NoRule(usize, usize),
    #[error("{0} is not a sort")]
    NotASort(String),
    #[error("{term} has type {ty}, which is not a product")]
    NotAFunction { term: String, ty: String },
    #[error("argument {term} has type {found}, expected {expected}")]
    Mismatch {
        term: String,
        expected: String,
        found: String,
    },
    #[error("conversion did not reach a normal form within {0} steps")]
    ConversionBudget(usize),
    #[error("invalid specification: {0}")]
    Spec(String),
}

impl PtsExpr {
    pub fn var(x: impl Into<String>) -> Self {
        PtsExpr::Var(x.into())
    }

    pub fn app(f: PtsExpr, a: PtsExpr) -> Self {
        PtsExpr::App(Box::new(f), Box::new(a))
    }

    pub fn lam(x: impl Into<String>, ty: PtsExpr, body: PtsExpr) -> Self {
        PtsExpr::Lam(x.into(), Box::new(ty), Box::new(body))
    }

    pub fn pi(x: impl Into<String>, ty: PtsExpr, body: PtsExpr) -> Self {
        PtsExpr::Pi(x.into(), Box::new(ty), Box::new(body))
    }

    /// `A -> B` as a product over an unused name.
    pub fn arrow(a: PtsExpr, b: PtsExpr) -> Self {
        let mut avoid = a.free_vars();
        avoid.extend(b.free_vars());
        let x = fresh_name("_", &avoid);
        PtsExpr::pi(x, a, b)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            PtsExpr::Var(x) => BTreeSet::from([x.clone()]),
            PtsExpr::Sort(_) => BTreeSet::new(),
            PtsExpr::App(f, a) => {
                let mut s = f.free_vars();
                s.extend(a.free_vars());
                s
            }
            PtsExpr::Lam(x, t, b) | PtsExpr::Pi(x, t, b) => {
                let mut s = b.free_vars();
                s.remove(x);
                s.extend(t.free_vars());
                s
            }
        }
    }

    fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            PtsExpr::Var(x) => {
                out.insert(x.clone());
            }
            PtsExpr::Sort(_) => {}
            PtsExpr::App(f, a) => {
                f.names(out);
                a.names(out);
            }
            PtsExpr::Lam(x, t, b) | PtsExpr::Pi(x, t, b) => {
                out.insert(x.clone());
                t.names(out);
                b.names(out);
            }
        }
    }

    fn rebuild(&self, x: String, t: PtsExpr, b: PtsExpr) -> PtsExpr {
        match self {
            PtsExpr::Lam(..) => PtsExpr::lam(x, t, b),
            _ => PtsExpr::pi(x, t, b),
        }
    }

    /// Capture-avoiding `self[x := s]`.
    pub fn subst(&self, x: &str, s: &PtsExpr) -> PtsExpr {
        match self {
            PtsExpr::Var(y) if y == x => s.clone(),
            PtsExpr::Var(_) | PtsExpr::Sort(_) => self.clone(),
            PtsExpr::App(f, a) => PtsExpr::app(f.subst(x, s), a.subst(x, s)),
            PtsExpr::Lam(y, t, b) | PtsExpr::Pi(y, t, b) => {
                let t2 = t.subst(x, s);
                if y == x {
                    return self.rebuild(y.clone(), t2, (**b).clone());
                }
                if s.free_vars().contains(y) && b.free_vars().contains(x) {
                    let mut avoid = BTreeSet::from([x.to_string()]);
                    s.names(&mut avoid);
                    b.names(&mut avoid);
                    let y2 = fresh_name(y, &avoid);
                    let b2 = b.subst(y, &PtsExpr::Var(y2.clone()));
                    self.rebuild(y2, t2, b2.subst(x, s))
                } else {
                    self.rebuild(y.clone(), t2, b.subst(x, s))
                }
            }
        }
    }

    /// Every one-step β-reduct, outermost-leftmost first, including
    /// redexes inside annotations and product bodies.
    pub fn beta_step(&self) -> Vec<PtsExpr> {
        let mut out = Vec::new();
        match self {
            PtsExpr::Var(_) | PtsExpr::Sort(_) => {}
            PtsExpr::App(f, a) => {
                if let PtsExpr::Lam(x, _, b) = &**f {
                    out.push(b.subst(x, a));
                }
                out.extend(f.beta_step().into_iter().map(|f2| PtsExpr::app(f2, (**a).clone())));
                out.extend(a.beta_step().into_iter().map(|a2| PtsExpr::app((**f).clone(), a2)));
            }
            PtsExpr::Lam(x, t, b) | PtsExpr::Pi(x, t, b) => {
                out.extend(
                    t.beta_step()
                        .into_iter()
                        .map(|t2| self.rebuild(x.clone(), t2, (**b).clone())),
                );
                out.extend(
                    b.beta_step()
                        .into_iter()
                        .map(|b2| self.rebuild(x.clone(), (**t).clone(), b2)),
                );
            }
        }
        out
    }

    pub fn normal_order_step(&self) -> Option<PtsExpr> {
        match self {
            PtsExpr::Var(_) | PtsExpr::Sort(_) => None,
            PtsExpr::App(f, a) => {
                if let PtsExpr::Lam(x, _, b) = &**f {
                    return Some(b.subst(x, a));
                }
                if let Some(f2) = f.normal_order_step() {
                    return Some(PtsExpr::app(f2, (**a).clone()));
                }
                a.normal_order_step().map(|a2| PtsExpr::app((**f).clone(), a2))
            }
            PtsExpr::Lam(x, t, b) | PtsExpr::Pi(x, t, b) => {
                if let Some(t2) = t.normal_order_step() {
                    return Some(self.rebuild(x.clone(), t2, (**b).clone()));
                }
                b.normal_order_step()
                    .map(|b2| self.rebuild(x.clone(), (**t).clone(), b2))
            }
        }
    }

    /// Normal form within `budget` steps.
    pub fn normalize(&self, budget: usize) -> Result<PtsExpr, PtsError> {
        let mut fuel = budget;
        normalize_fuel(self, &mut fuel, budget)
    }

    pub fn alpha_eq(&self, other: &PtsExpr) -> bool {
        fn go(a: &PtsExpr, b: &PtsExpr, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (PtsExpr::Var(x), PtsExpr::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if l == x || r == y {
                            return l == x && r == y;
                        }
                    }
                    x == y
                }
                (PtsExpr::Sort(m), PtsExpr::Sort(n)) => m == n,
                (PtsExpr::App(f, s), PtsExpr::App(g, t)) => go(f, g, env) && go(s, t, env),
                (PtsExpr::Lam(x, s1, b1), PtsExpr::Lam(y, s2, b2))
                | (PtsExpr::Pi(x, s1, b1), PtsExpr::Pi(y, s2, b2)) => {
                    if !go(s1, s2, env) {
                        return false;
                    }
                    env.push((x.clone(), y.clone()));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Translation of a simply typed term: base types become variables of
    /// sort `s1`, arrows become non-dependent products.
    pub fn from_stlc(t: &Term) -> PtsExpr {
        match t {
            Term::Var(x) => PtsExpr::var(x.clone()),
            Term::App(f, a) => PtsExpr::app(Self::from_stlc(f), Self::from_stlc(a)),
            Term::Lam(x, ty, b) => PtsExpr::lam(
                x.clone(),
                ty.as_ref().map(Self::from_stype).unwrap_or(PtsExpr::Sort(1)),
                Self::from_stlc(b),
            ),
        }
    }

    pub fn from_stype(t: &SType) -> PtsExpr {
        match t {
            SType::Base(n) => PtsExpr::var(n.clone()),
            SType::Arrow(a, b) => PtsExpr::arrow(Self::from_stype(a), Self::from_stype(b)),
        }
    }
}

fn normalize_fuel(e: &PtsExpr, fuel: &mut usize, budget: usize) -> Result<PtsExpr, PtsError> {
    let mut cur = e.clone();
    while let Some(next) = cur.normal_order_step() {
        if *fuel == 0 {
            return Err(PtsError::ConversionBudget(budget));
        }
        *fuel -= 1;
        cur = next;
    }
    Ok(cur)
}

struct Checker<'a> {
    spec: &'a PtsSpec,
    budget: usize,
    fuel: usize,
}

impl Checker<'_> {
    fn nf(&mut self, e: &PtsExpr) -> Result<PtsExpr, PtsError> {
        normalize_fuel(e, &mut self.fuel, self.budget)
    }

    fn sort_of(&mut self, ctx: &mut PtsContext, e: &PtsExpr) -> Result<usize, PtsError> {
        let t = self.infer(ctx, e)?;
        match self.nf(&t)? {
            PtsExpr::Sort(s) => Ok(s),
            other => Err(PtsError::NotASort(other.to_string())),
        }
    }

    fn infer(&mut self, ctx: &mut PtsContext, e: &PtsExpr) -> Result<PtsExpr, PtsError> {
        match e {
            PtsExpr::Var(x) => ctx
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| PtsError::Unbound(x.clone())),
            PtsExpr::Sort(s) => self.spec.axiom(*s).map(PtsExpr::Sort).ok_or(PtsError::NoAxiom(*s)),
            PtsExpr::Pi(x, a, b) => {
                let l = self.sort_of(ctx, a)?;
                ctx.push((x.clone(), (**a).clone()));
                let m = self.sort_of(ctx, b);
                ctx.pop();
                let m = m?;
                self.spec.rule(l, m).map(PtsExpr::Sort).ok_or(PtsError::NoRule(l, m))
            }
            PtsExpr::Lam(x, a, b) => {
                ctx.push((x.clone(), (**a).clone()));
                let tb = self.infer(ctx, b);
                ctx.pop();
                let pi = PtsExpr::pi(x.clone(), (**a).clone(), tb?);
                self.sort_of(ctx, &pi)?;
                Ok(pi)
            }
            PtsExpr::App(f, a) => {
                let tf = self.infer(ctx, f)?;
                let ta = self.infer(ctx, a)?;
                match self.nf(&tf)? {
                    PtsExpr::Pi(x, dom, cod) => {
                        let (d, t) = (self.nf(&dom)?, self.nf(&ta)?);
                        if !d.alpha_eq(&t) {
                            return Err(PtsError::Mismatch {
                                term: a.to_string(),
                                expected: d.to_string(),
                                found: t.to_string(),
                            });
                        }
                        Ok(cod.subst(&x, a))
                    }
                    ty => Err(PtsError::NotAFunction {
                        term: f.to_string(),
                        ty: ty.to_string(),
                    }),
                }
            }
        }
    }
}

/// Infers a type of `e`. Context entries are trusted; conversion uses β
/// with at most `budget` reduction steps in total.
pub fn pts_typecheck_with(
    spec: &PtsSpec,
    ctx: &PtsContext,
    e: &PtsExpr,
    budget: usize,
) -> Result<PtsExpr, PtsError> {
    let mut c = Checker {
        spec,
        budget,
        fuel: budget,
    };
    let t = c.infer(&mut ctx.clone(), e)?;
    c.nf(&t)
}

pub fn pts_typecheck(spec: &PtsSpec, ctx: &PtsContext, e: &PtsExpr) -> Result<PtsExpr, PtsError> {
    pts_typecheck_with(spec, ctx, e, DEFAULT_CONVERSION_BUDGET)
}

pub fn pts_beta_step(e: &PtsExpr) -> Vec<PtsExpr> {
    e.beta_step()
}

/// The context for a simply typed context: every base type mentioned
/// becomes a variable of sort `s1`.
pub fn context_from_stlc(ctx: &super::lambda::Context, extra_types: &[&str]) -> PtsContext {
    fn bases(t: &SType, out: &mut BTreeSet<String>) {
        match t {
            SType::Base(n) => {
                out.insert(n.clone());
            }
            SType::Arrow(a, b) => {
                bases(a, out);
                bases(b, out);
            }
        }
    }
    let mut names: BTreeSet<String> = extra_types.iter().map(|s| s.to_string()).collect();
    for t in ctx.values() {
        bases(t, &mut names);
    }
    let mut out: PtsContext = names.into_iter().map(|n| (n, PtsExpr::Sort(1))).collect();
    out.extend(ctx.iter().map(|(x, t)| (x.clone(), PtsExpr::from_stype(t))));
    out
}

impl fmt::Display for PtsExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PtsExpr::Var(x) => f.write_str(x),
            PtsExpr::Sort(s) => write!(f, "s{s}"),
            PtsExpr::Lam(x, t, b) => write!(f, "\\{x}:{t}. {b}"),
            PtsExpr::Pi(x, t, b) => {
                if b.free_vars().contains(x) {
                    write!(f, "Pi {x}:{t}. {b}")
                } else {
                    match **t {
                        PtsExpr::Var(_) | PtsExpr::Sort(_) => write!(f, "{t} -> {b}"),
                        _ => write!(f, "({t}) -> {b}"),
                    }
                }
            }
            PtsExpr::App(g, a) => {
                match **g {
                    PtsExpr::Var(_) | PtsExpr::Sort(_) | PtsExpr::App(..) => write!(f, "{g}")?,
                    _ => write!(f, "({g})")?,
                }
                match **a {
                    PtsExpr::Var(_) | PtsExpr::Sort(_) => write!(f, " {a}"),
                    _ => write!(f, " ({a})"),
                }
            }
        }
    }
}
