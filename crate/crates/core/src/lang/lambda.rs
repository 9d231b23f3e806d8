//! Simply typed and untyped lambda calculus: typing, capture-avoiding
//! substitution and β-reduction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SType {
    Base(String),
    Arrow(Box<SType>, Box<SType>),
}

impl SType {
    pub fn base(n: impl Into<String>) -> Self {
        SType::Base(n.into())
    }

    pub fn arrow(a: SType, b: SType) -> Self {
        SType::Arrow(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SType::Base(n) => f.write_str(n),
            SType::Arrow(a, b) => match **a {
                SType::Arrow(..) => write!(f, "({a}) -> {b}"),
                SType::Base(_) => write!(f, "{a} -> {b}"),
            },
        }
    }
}

/// Lambda terms. Binders carry a type in the typed calculus and none in
/// the untyped one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(Box<Term>, Box<Term>),
    Lam(String, Option<SType>, Box<Term>),
}

pub type Context = BTreeMap<String, SType>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StlcError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("{term} has type {ty}, which is not a function type")]
    NotAFunction { term: String, ty: SType },
    #[error("argument {term} has type {found}, expected {expected}")]
    Mismatch {
        term: String,
        expected: SType,
        found: SType,
    },
    #[error("binder {0} has no type annotation")]
    Unannotated(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no normal form within {0} steps")]
pub struct NormalizeBudget(pub usize);

impl Term {
    pub fn var(n: impl Into<String>) -> Self {
        Term::Var(n.into())
    }

    pub fn app(f: Term, a: Term) -> Self {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Self {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(x: impl Into<String>, ty: SType, body: Term) -> Self {
        Term::Lam(x.into(), Some(ty), Box::new(body))
    }

    pub fn ulam(x: impl Into<String>, body: Term) -> Self {
        Term::Lam(x.into(), None, Box::new(body))
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lam(_, _, b) => 1 + b.size(),
        }
    }

    pub fn lambda_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(f, a) => f.lambda_count() + a.lambda_count(),
            Term::Lam(_, _, b) => 1 + b.lambda_count(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars_ordered(&self) -> Vec<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::Lam(x, _, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Lam(x, _, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn all_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(f, a) => {
                f.all_names(out);
                a.all_names(out);
            }
            Term::Lam(x, _, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
        }
    }

    /// `self[x := s]`, renaming binders that would capture free variables
    /// of `s`.
    pub fn subst(&self, x: &str, s: &Term) -> Term {
        let fv = s.free_vars();
        self.subst_with(x, s, &fv)
    }

    fn subst_with(&self, x: &str, s: &Term, fv: &BTreeSet<String>) -> Term {
        match self {
            Term::Var(y) if y == x => s.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst_with(x, s, fv), a.subst_with(x, s, fv)),
            Term::Lam(y, _, _) if y == x => self.clone(),
            Term::Lam(y, ty, b) => {
                if fv.contains(y) && b.free_vars().contains(x) {
                    let mut avoid = fv.clone();
                    b.all_names(&mut avoid);
                    avoid.insert(x.to_string());
                    let y2 = fresh_name(y, &avoid);
                    let b2 = b.subst(y, &Term::Var(y2.clone()));
                    Term::Lam(y2, ty.clone(), Box::new(b2.subst_with(x, s, fv)))
                } else {
                    Term::Lam(y.clone(), ty.clone(), Box::new(b.subst_with(x, s, fv)))
                }
            }
        }
    }

    /// Every one-step reduct, one per redex, outermost-leftmost first.
    pub fn beta_step(&self) -> Vec<Term> {
        let mut out = Vec::new();
        match self {
            Term::Var(_) => {}
            Term::App(f, a) => {
                if let Term::Lam(x, _, b) = &**f {
                    out.push(b.subst(x, a));
                }
                out.extend(f.beta_step().into_iter().map(|f2| Term::App(Box::new(f2), a.clone())));
                out.extend(a.beta_step().into_iter().map(|a2| Term::App(f.clone(), Box::new(a2))));
            }
            Term::Lam(x, ty, b) => {
                out.extend(
                    b.beta_step()
                        .into_iter()
                        .map(|b2| Term::Lam(x.clone(), ty.clone(), Box::new(b2))),
                );
            }
        }
        out
    }

    /// The leftmost-outermost reduct, if any.
    pub fn normal_order_step(&self) -> Option<Term> {
        match self {
            Term::Var(_) => None,
            Term::App(f, a) => {
                if let Term::Lam(x, _, b) = &**f {
                    return Some(b.subst(x, a));
                }
                if let Some(f2) = f.normal_order_step() {
                    return Some(Term::App(Box::new(f2), a.clone()));
                }
                a.normal_order_step().map(|a2| Term::App(f.clone(), Box::new(a2)))
            }
            Term::Lam(x, ty, b) => b
                .normal_order_step()
                .map(|b2| Term::Lam(x.clone(), ty.clone(), Box::new(b2))),
        }
    }

    /// β-normal form by normal-order reduction.
    pub fn normalize(&self, budget: usize) -> Result<Term, NormalizeBudget> {
        let mut cur = self.clone();
        for _ in 0..budget {
            match cur.normal_order_step() {
                Some(next) => cur = next,
                None => return Ok(cur),
            }
        }
        if cur.normal_order_step().is_none() {
            Ok(cur)
        } else {
            Err(NormalizeBudget(budget))
        }
    }

    pub fn is_normal(&self) -> bool {
        self.normal_order_step().is_none()
    }

    /// Equality up to renaming of bound variables. Binder annotations must
    /// agree.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go(a: &Term, b: &Term, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if l == x || r == y {
                            return l == x && r == y;
                        }
                    }
                    x == y
                }
                (Term::App(f, s), Term::App(g, t)) => go(f, g, env) && go(s, t, env),
                (Term::Lam(x, tx, s), Term::Lam(y, ty, t)) => {
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

    /// The same term with every annotation removed.
    pub fn erase(&self) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(f, a) => Term::app(f.erase(), a.erase()),
            Term::Lam(x, _, b) => Term::ulam(x.clone(), b.erase()),
        }
    }
}

/// `base` with primes appended until it avoids `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut n = format!("{base}'");
    while avoid.contains(&n) {
        n.push('\'');
    }
    n
}

/// Standard syntax-directed typing: variable, application, abstraction.
pub fn stlc_typecheck(ctx: &Context, e: &Term) -> Result<SType, StlcError> {
    match e {
        Term::Var(x) => ctx.get(x).cloned().ok_or_else(|| StlcError::Unbound(x.clone())),
        Term::App(f, a) => {
            let tf = stlc_typecheck(ctx, f)?;
            let ta = stlc_typecheck(ctx, a)?;
            match tf {
                SType::Arrow(dom, cod) if *dom == ta => Ok(*cod),
                SType::Arrow(dom, _) => Err(StlcError::Mismatch {
                    term: a.to_string(),
                    expected: *dom,
                    found: ta,
                }),
                ty => Err(StlcError::NotAFunction {
                    term: f.to_string(),
                    ty,
                }),
            }
        }
        Term::Lam(x, ty, b) => {
            let ty = ty.clone().ok_or_else(|| StlcError::Unannotated(x.clone()))?;
            let mut inner = ctx.clone();
            inner.insert(x.clone(), ty.clone());
            Ok(SType::arrow(ty, stlc_typecheck(&inner, b)?))
        }
    }
}

/// Every one-step β-reduct of `e`.
pub fn stlc_beta_step(e: &Term) -> Vec<Term> {
    e.beta_step()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Lam(x, ty, b) => match ty {
                Some(t) => write!(f, "\\{x}:{t}. {b}"),
                None => write!(f, "\\{x}. {b}"),
            },
            Term::App(g, a) => {
                match **g {
                    Term::Lam(..) => write!(f, "({g})")?,
                    _ => write!(f, "{g}")?,
                }
                f.write_str(" ")?;
                match **a {
                    Term::Var(_) => write!(f, "{a}"),
                    _ => write!(f, "({a})"),
                }
            }
        }
    }
}
