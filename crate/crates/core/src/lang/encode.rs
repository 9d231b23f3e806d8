//! Encoding object-language terms as pointed atomspaces, and reading
//! normal forms back.
//!
//! Every lambda becomes a combinator symbol with a `:` declaration and an
//! equation `(= (f $z.. $x) body)`; variables free in the lambda and bound
//! further out become leading parameters. Every application is activated
//! and `†` points at the encoded term.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::lambda::{stlc_typecheck, Context, SType, StlcError, Term};
use super::pdts::{pdts_typecheck, PdtsContext, PdtsError, PdtsExpr, PdtsType};
use super::pts::{pts_typecheck, PtsContext, PtsError, PtsExpr, PtsSpec};
use crate::atomspace::{Atom, Atomspace, AtomspaceError, Keyword, Label, NodeId, TypeExpr};
use crate::engine::evaluate;

pub const DISTRIBUTION: &str = "Distribution";
pub const RANDOM: &str = "random";
pub const SAMPLE: &str = "sample";
pub const THUNK: &str = "thunk";
pub const AND: &str = "and";

/// Language-neutral term with type tags, the input of the encoder.
#[derive(Clone, Debug, PartialEq)]
pub enum Core {
    /// A global constant.
    Sym(String),
    /// A variable bound by an enclosing lambda.
    Var(String),
    /// A type in term position.
    Ty(TypeExpr),
    App(Box<Core>, Box<Core>, TypeExpr),
    Lam {
        binder: String,
        dom: TypeExpr,
        cod: TypeExpr,
        body: Box<Core>,
        /// Index of the source lambda in the caller's table.
        source: usize,
    },
}

impl Core {
    pub fn app(f: Core, a: Core, tag: TypeExpr) -> Self {
        Core::App(Box::new(f), Box::new(a), tag)
    }

    fn vars_in_order(&self, out: &mut Vec<String>) {
        let push = |v: &str, out: &mut Vec<String>| {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        };
        match self {
            Core::Sym(_) => {}
            Core::Var(v) => push(v, out),
            Core::Ty(t) => type_vars(t, out),
            Core::App(f, a, _) => {
                f.vars_in_order(out);
                a.vars_in_order(out);
            }
            Core::Lam { binder, dom, body, .. } => {
                type_vars(dom, out);
                let mut inner = Vec::new();
                body.vars_in_order(&mut inner);
                for v in inner.iter().filter(|v| *v != binder) {
                    push(v, out);
                }
            }
        }
    }
}

fn type_vars(t: &TypeExpr, out: &mut Vec<String>) {
    match t {
        TypeExpr::Var(v) => {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        TypeExpr::Arrow(a, b) | TypeExpr::Union(a, b) | TypeExpr::Inter(a, b) => {
            type_vars(a, out);
            type_vars(b, out);
        }
        TypeExpr::Dist(a) => type_vars(a, out),
        TypeExpr::Pi(x, a, body) => {
            type_vars(a, out);
            for v in body.vars() {
                if &v != x && !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        _ => {}
    }
}

/// A lifted lambda.
#[derive(Clone, Debug, PartialEq)]
pub struct Combinator {
    pub name: String,
    pub params: Vec<String>,
    pub param_types: Vec<TypeExpr>,
    pub binder: String,
    pub dom: TypeExpr,
    pub cod: TypeExpr,
    pub source: usize,
}

impl Combinator {
    pub fn arity(&self) -> usize {
        self.params.len() + 1
    }

    /// Type after `n` arguments.
    pub fn type_after(&self, n: usize) -> TypeExpr {
        let mut args = self.param_types.clone();
        args.push(self.dom.clone());
        TypeExpr::arrows(args[n.min(args.len())..].to_vec(), self.cod.clone())
    }
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub space: Atomspace,
    pub combinators: BTreeMap<String, Combinator>,
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Stlc(#[from] StlcError),
    #[error(transparent)]
    Pts(#[from] PtsError),
    #[error(transparent)]
    Pdts(#[from] PdtsError),
    #[error(transparent)]
    Space(#[from] AtomspaceError),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("read-back needed more than {0} evaluation steps")]
    Budget(usize),
    #[error("the space has no pointer")]
    NoPointer,
    #[error("read-back of a lambda reached {0} normal forms")]
    Nondeterministic(usize),
    #[error("cannot read back {0}")]
    Unexpected(String),
}

/// Builds the atoms of an encoding.
pub struct Encoder {
    atoms: Vec<Atom>,
    combinators: BTreeMap<String, Combinator>,
    reserved: BTreeSet<String>,
    next: usize,
}

impl Encoder {
    /// `reserved` names are never used for combinators.
    pub fn new(reserved: impl IntoIterator<Item = String>) -> Self {
        Encoder {
            atoms: Vec::new(),
            combinators: BTreeMap::new(),
            reserved: reserved.into_iter().collect(),
            next: 1,
        }
    }

    pub fn push(&mut self, atom: Atom) {
        self.atoms.push(atom);
    }

    fn fresh_name(&mut self) -> String {
        loop {
            let n = format!("lam{}", self.next);
            self.next += 1;
            if !self.reserved.contains(&n) {
                return n;
            }
        }
    }

    /// Lowers a core term, lifting its lambdas innermost first. `env`
    /// lists the variables bound further out with their types.
    pub fn lower(&mut self, core: &Core, env: &[(String, TypeExpr)]) -> Atom {
        match core {
            Core::Sym(s) => Atom::sym(s.clone()),
            Core::Var(v) => Atom::var(v.clone()),
            Core::Ty(t) => Atom::ty(t.clone()),
            Core::App(f, a, tag) => {
                Atom::app(self.lower(f, env), self.lower(a, env)).with_ty(tag.clone()).activated()
            }
            Core::Lam {
                binder,
                dom,
                cod,
                body,
                source,
            } => {
                let mut inner_env = env.to_vec();
                inner_env.push((binder.clone(), dom.clone()));
                let rhs = self.lower(body, &inner_env);
                let mut used = Vec::new();
                core.vars_in_order(&mut used);
                let params: Vec<(String, TypeExpr)> = used
                    .iter()
                    .filter_map(|v| env.iter().rev().find(|(n, _)| n == v).cloned())
                    .collect();
                let name = self.fresh_name();
                let comb = Combinator {
                    name: name.clone(),
                    params: params.iter().map(|p| p.0.clone()).collect(),
                    param_types: params.iter().map(|p| p.1.clone()).collect(),
                    binder: binder.clone(),
                    dom: dom.clone(),
                    cod: cod.clone(),
                    source: *source,
                };
                let mut lhs = Atom::sym(name.clone());
                for (i, p) in comb.params.iter().chain([binder]).enumerate() {
                    lhs = Atom::app(lhs, Atom::var(p.clone())).with_ty(comb.type_after(i + 1));
                }
                self.atoms.push(Atom::typing(Atom::sym(name.clone()), Atom::ty(comb.type_after(0))));
                self.atoms.push(Atom::equation(lhs, rhs));
                let mut value = Atom::sym(name.clone());
                for (i, p) in comb.params.iter().enumerate() {
                    value = Atom::app(value, Atom::var(p.clone()))
                        .with_ty(comb.type_after(i + 1))
                        .activated();
                }
                self.combinators.insert(name, comb);
                value
            }
        }
    }

    /// The checked space with `term` pointed.
    pub fn finish(self, term: Atom) -> Result<Encoding, AtomspaceError> {
        let space = Atomspace::new().add_atoms(self.atoms.into_iter().chain([term.pointed()]))?;
        Ok(Encoding {
            space,
            combinators: self.combinators,
        })
    }
}

/// A normal form read back from a space.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoded {
    Sym(String),
    Ty(TypeExpr),
    App(Box<Decoded>, Box<Decoded>),
    /// A lambda recovered by applying its combinator to a fresh symbol.
    Lam(String, TypeExpr, Box<Decoded>),
    /// A combinator with its captured arguments, left unevaluated.
    Closure(String, Vec<Decoded>),
}

impl Decoded {
    pub fn app(f: Decoded, a: Decoded) -> Self {
        Decoded::App(Box::new(f), Box::new(a))
    }

    /// Head and arguments of an application chain.
    pub fn spine(&self) -> (&Decoded, Vec<&Decoded>) {
        let mut head = self;
        let mut args = Vec::new();
        while let Decoded::App(f, a) = head {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        (head, args)
    }
}

fn spine_ids(space: &Atomspace, id: NodeId) -> (NodeId, Vec<NodeId>) {
    let mut head = id;
    let mut args = Vec::new();
    while let Some(n) = space.node(head) {
        if n.label != Label::Key(Keyword::Funapp) || n.args.len() != 2 {
            break;
        }
        args.push(n.args[1]);
        head = n.args[0];
    }
    args.reverse();
    (head, args)
}

/// The root of the term the pointer is in.
pub fn pointed_root(space: &Atomspace) -> Result<NodeId, DecodeError> {
    space.pointer().map(|p| space.root_of(p)).ok_or(DecodeError::NoPointer)
}

/// Reads the pointed term back. Closures are left as they are.
pub fn decode_weak(space: &Atomspace, combs: &BTreeMap<String, Combinator>) -> Result<Decoded, DecodeError> {
    read_weak(space, pointed_root(space)?, combs)
}

fn read_weak(space: &Atomspace, id: NodeId, combs: &BTreeMap<String, Combinator>) -> Result<Decoded, DecodeError> {
    let (head, args) = spine_ids(space, id);
    let node = space.node(head).ok_or(DecodeError::NoPointer)?;
    let dargs = args
        .iter()
        .map(|&a| read_weak(space, a, combs))
        .collect::<Result<Vec<_>, _>>()?;
    if let Label::Sym(s) = &node.label {
        if let Some(c) = combs.get(s) {
            if dargs.len() < c.arity() {
                return Ok(Decoded::Closure(s.clone(), dargs));
            }
        }
    }
    let h = leaf(space, head)?;
    Ok(dargs.into_iter().fold(h, Decoded::app))
}

fn leaf(space: &Atomspace, id: NodeId) -> Result<Decoded, DecodeError> {
    let node = space.node(id).ok_or(DecodeError::NoPointer)?;
    match &node.label {
        Label::Sym(s) => Ok(Decoded::Sym(s.clone())),
        Label::Ty(t) => Ok(Decoded::Ty(t.clone())),
        _ => match space.atom(id).as_type() {
            Some(t) if node.label == Label::Key(Keyword::Arrow) => Ok(Decoded::Ty(t)),
            _ => Err(DecodeError::Unexpected(space.atom(id).to_string())),
        },
    }
}

/// Reads the pointed term back, turning each closure into a lambda by
/// evaluating its body on a fresh symbol. `budget` bounds the evaluation
/// steps spent and is decremented.
pub fn decode_full(
    space: &Atomspace,
    combs: &BTreeMap<String, Combinator>,
    budget: &mut usize,
) -> Result<Decoded, DecodeError> {
    read_full(space, pointed_root(space)?, combs, budget)
}

fn read_full(
    space: &Atomspace,
    id: NodeId,
    combs: &BTreeMap<String, Combinator>,
    budget: &mut usize,
) -> Result<Decoded, DecodeError> {
    let (head, args) = spine_ids(space, id);
    let node = space.node(head).ok_or(DecodeError::NoPointer)?;
    if let Label::Sym(s) = &node.label {
        if let Some(c) = combs.get(s) {
            if args.len() < c.arity() {
                return read_closure(space, c, &args, combs, budget);
            }
        }
    }
    let mut out = leaf(space, head)?;
    for a in args {
        out = Decoded::app(out, read_full(space, a, combs, budget)?);
    }
    Ok(out)
}

fn read_closure(
    space: &Atomspace,
    c: &Combinator,
    args: &[NodeId],
    combs: &BTreeMap<String, Combinator>,
    budget: &mut usize,
) -> Result<Decoded, DecodeError> {
    let mut s = space.clone();
    s.set_pointer(None);
    let x = s.fresh_symbol();
    let arg_atoms: Vec<Atom> = args.iter().map(|&a| space.atom(a).unmarked()).collect();
    // the slot types once the captured arguments are known
    let names: Vec<&String> = c.params.iter().chain([&c.binder]).collect();
    let inst = |t: &TypeExpr| {
        names
            .iter()
            .zip(arg_atoms.iter())
            .fold(t.clone(), |acc, (n, a)| acc.subst(n, a))
    };
    let n = args.len();
    let dom = inst(&if n < c.params.len() {
        c.param_types[n].clone()
    } else {
        c.dom.clone()
    });
    s.push_atom(Atom::typing(Atom::sym(x.clone()), Atom::ty(dom.clone())))
        .map_err(|e| DecodeError::Unexpected(e.to_string()))?;
    let mut term = Atom::sym(c.name.clone());
    for (i, a) in arg_atoms.iter().cloned().enumerate() {
        term = Atom::app(term, a).with_ty(inst(&c.type_after(i + 1)));
    }
    let term = Atom::app(term, Atom::sym(x.clone()))
        .with_ty(inst(&c.type_after(n + 1)))
        .activated()
        .pointed();
    s.push_atom(term).map_err(|e| DecodeError::Unexpected(e.to_string()))?;
    let ev = evaluate(&s, *budget);
    *budget = budget.saturating_sub(ev.steps);
    if ev.outcome.is_exhausted() {
        return Err(DecodeError::Budget(ev.steps));
    }
    let nfs = ev.outcome.normal_forms();
    if nfs.len() != 1 {
        return Err(DecodeError::Nondeterministic(nfs.len()));
    }
    let body = decode_full(&nfs[0], combs, budget)?;
    Ok(Decoded::Lam(x, dom, Box::new(body)))
}

// ---- simply typed and untyped lambda calculus ----

pub fn stype_to_type(t: &SType) -> TypeExpr {
    match t {
        SType::Base(n) => TypeExpr::base(n.clone()),
        SType::Arrow(a, b) => TypeExpr::arrow(stype_to_type(a), stype_to_type(b)),
    }
}

pub fn type_to_stype(t: &TypeExpr) -> Option<SType> {
    match t {
        TypeExpr::Base(n) => Some(SType::base(n.clone())),
        TypeExpr::Arrow(a, b) => Some(SType::arrow(type_to_stype(a)?, type_to_stype(b)?)),
        _ => None,
    }
}

fn lower_stlc(
    ctx: &Context,
    bound: &mut Vec<(String, Option<SType>)>,
    e: &Term,
    sources: &mut Vec<Term>,
) -> Result<(Core, Option<SType>), StlcError> {
    let tag = |t: &Option<SType>| t.as_ref().map(stype_to_type).unwrap_or(TypeExpr::TopType);
    match e {
        Term::Var(x) => {
            if let Some((_, t)) = bound.iter().rev().find(|(n, _)| n == x) {
                return Ok((Core::Var(x.clone()), t.clone()));
            }
            Ok((Core::Sym(x.clone()), ctx.get(x).cloned()))
        }
        Term::App(f, a) => {
            let (cf, tf) = lower_stlc(ctx, bound, f, sources)?;
            let (ca, _) = lower_stlc(ctx, bound, a, sources)?;
            let t = match tf {
                Some(SType::Arrow(_, cod)) => Some(*cod),
                _ => None,
            };
            let g = tag(&t);
            Ok((Core::app(cf, ca, g), t))
        }
        Term::Lam(x, ty, b) => {
            bound.push((x.clone(), ty.clone()));
            let r = lower_stlc(ctx, bound, b, sources);
            bound.pop();
            let (cb, tb) = r?;
            let t = match (ty, &tb) {
                (Some(d), Some(c)) => Some(SType::arrow(d.clone(), c.clone())),
                _ => None,
            };
            sources.push(e.clone());
            Ok((
                Core::Lam {
                    binder: x.clone(),
                    dom: tag(ty),
                    cod: tag(&tb),
                    body: Box::new(cb),
                    source: sources.len() - 1,
                },
                t,
            ))
        }
    }
}

fn reserved_names(ctx_names: impl IntoIterator<Item = String>, e: &Term) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = ctx_names.into_iter().collect();
    out.extend(e.free_vars());
    out
}

/// Encodes a well-typed term: context typings, one combinator per lambda
/// and the activated term.
pub fn encode_stlc(ctx: &Context, e: &Term) -> Result<Encoding, EncodeError> {
    stlc_typecheck(ctx, e)?;
    let mut enc = Encoder::new(reserved_names(ctx.keys().cloned(), e));
    for (x, t) in ctx {
        enc.push(Atom::typing(Atom::sym(x.clone()), Atom::ty(stype_to_type(t))));
    }
    let (core, _) = lower_stlc(ctx, &mut Vec::new(), e, &mut Vec::new())?;
    let term = enc.lower(&core, &[]);
    Ok(enc.finish(term)?)
}

/// Encodes any term with every type replaced by `⊤_Type`.
pub fn encode_untyped(e: &Term) -> Result<Encoding, EncodeError> {
    let erased = e.erase();
    let mut enc = Encoder::new(reserved_names([], &erased));
    let (core, _) = lower_stlc(&Context::new(), &mut Vec::new(), &erased, &mut Vec::new())?;
    let term = enc.lower(&core, &[]);
    Ok(enc.finish(term)?)
}

/// Converts a read-back normal form to a lambda term; untyped binders
/// when `typed` is false.
pub fn decoded_to_term(d: &Decoded, typed: bool) -> Result<Term, DecodeError> {
    match d {
        Decoded::Sym(s) => Ok(Term::var(s.clone())),
        Decoded::App(f, a) => Ok(Term::app(decoded_to_term(f, typed)?, decoded_to_term(a, typed)?)),
        Decoded::Lam(x, t, b) => {
            let ty = if typed {
                Some(type_to_stype(t).ok_or_else(|| DecodeError::Unexpected(t.to_string()))?)
            } else {
                None
            };
            Ok(Term::Lam(x.clone(), ty, Box::new(decoded_to_term(b, typed)?)))
        }
        other => Err(DecodeError::Unexpected(format!("{other:?}"))),
    }
}

/// Evaluates an encoding and reads back the full normal form.
pub fn eval_decode_term(enc: &Encoding, budget: usize, typed: bool) -> Result<Term, DecodeError> {
    let ev = evaluate(&enc.space, budget);
    if ev.outcome.is_exhausted() {
        return Err(DecodeError::Budget(ev.steps));
    }
    let nfs = ev.outcome.normal_forms();
    if nfs.len() != 1 {
        return Err(DecodeError::Nondeterministic(nfs.len()));
    }
    let mut rest = budget.saturating_sub(ev.steps);
    let d = decode_full(&nfs[0], &enc.combinators, &mut rest)?;
    decoded_to_term(&d, typed)
}

// ---- pure type systems ----

pub fn sort_symbol(n: usize) -> String {
    format!("t{n}")
}

/// The atomspace type of a PTS expression in type position. Variables in
/// `bound` are schematic.
pub fn pts_to_type(e: &PtsExpr, bound: &[String]) -> TypeExpr {
    match e {
        PtsExpr::Sort(n) => TypeExpr::base(sort_symbol(*n)),
        PtsExpr::Var(x) if bound.contains(x) => TypeExpr::var(x.clone()),
        PtsExpr::Var(x) => TypeExpr::base(x.clone()),
        PtsExpr::Pi(x, a, b) => {
            let mut inner = bound.to_vec();
            inner.push(x.clone());
            let body = pts_to_type(b, &inner);
            if b.free_vars().contains(x) {
                TypeExpr::pi(x.clone(), pts_to_type(a, bound), Atom::ty(body))
            } else {
                TypeExpr::arrow(pts_to_type(a, bound), body)
            }
        }
        _ => TypeExpr::TopType,
    }
}

pub fn type_to_pts(t: &TypeExpr, spec: &PtsSpec) -> Option<PtsExpr> {
    Some(match t {
        TypeExpr::Base(n) => match n.strip_prefix('t').and_then(|d| d.parse::<usize>().ok()) {
            Some(k) if k >= 1 && k <= spec.sorts => PtsExpr::Sort(k),
            _ => PtsExpr::var(n.clone()),
        },
        TypeExpr::Var(x) => PtsExpr::var(x.clone()),
        TypeExpr::Arrow(a, b) => PtsExpr::arrow(type_to_pts(a, spec)?, type_to_pts(b, spec)?),
        TypeExpr::Pi(x, a, b) => PtsExpr::pi(x.clone(), type_to_pts(a, spec)?, type_to_pts(&b.as_type()?, spec)?),
        _ => return None,
    })
}

fn lower_pts(
    spec: &PtsSpec,
    ctx: &mut PtsContext,
    bound: &mut Vec<String>,
    e: &PtsExpr,
) -> Result<Core, PtsError> {
    let ty_of = |ctx: &PtsContext, bound: &[String], e: &PtsExpr| -> Result<TypeExpr, PtsError> {
        Ok(pts_to_type(&pts_typecheck(spec, ctx, e)?, bound))
    };
    match e {
        PtsExpr::Var(x) if bound.contains(x) => Ok(Core::Var(x.clone())),
        PtsExpr::Var(x) => Ok(Core::Sym(x.clone())),
        PtsExpr::Sort(_) | PtsExpr::Pi(..) => Ok(Core::Ty(pts_to_type(e, bound))),
        PtsExpr::App(f, a) => {
            let tag = ty_of(ctx, bound, e)?;
            let cf = lower_pts(spec, ctx, bound, f)?;
            let ca = lower_pts(spec, ctx, bound, a)?;
            Ok(Core::app(cf, ca, tag))
        }
        PtsExpr::Lam(x, a, b) => {
            let dom = pts_to_type(a, bound);
            ctx.push((x.clone(), (**a).clone()));
            bound.push(x.clone());
            let r = (|| {
                let cod = ty_of(ctx, bound, b)?;
                let body = lower_pts(spec, ctx, bound, b)?;
                Ok((cod, body))
            })();
            bound.pop();
            ctx.pop();
            let (cod, body) = r?;
            Ok(Core::Lam {
                binder: x.clone(),
                dom,
                cod,
                body: Box::new(body),
                source: 0,
            })
        }
    }
}

/// The typing and rule atoms for a specification: `(: t_m t_n)` per
/// axiom, and per rule `(l, m, n)` a transform-guarded typing for arrows
/// and products.
pub fn pts_spec_atoms(spec: &PtsSpec) -> Vec<Atom> {
    let t = |n: usize| Atom::ty(TypeExpr::base(sort_symbol(n)));
    let tv = |v: &str| Atom::ty(TypeExpr::var(v));
    let and = |a: Atom, b: Atom| Atom::apps(Atom::sym(AND), [a, b]);
    let mut out: Vec<Atom> = spec.axioms.iter().map(|&(m, n)| Atom::typing(t(m), t(n))).collect();
    for &(l, m, n) in &spec.rules {
        let arrow = Atom::arrow(tv("ta"), tv("tb"));
        let guard = and(Atom::typing(Atom::var("ta"), t(l)), Atom::typing(Atom::var("tb"), t(m)));
        out.push(Atom::typing(arrow, Atom::trans(guard, t(n))));
        let pi = Atom::ty(TypeExpr::pi("x", TypeExpr::var("ta"), Atom::var("m")));
        let guard = and(Atom::typing(Atom::var("ta"), t(l)), Atom::typing(Atom::var("m"), t(m)));
        out.push(Atom::typing(pi, Atom::trans(guard, t(n))));
    }
    out
}

/// Encodes a PTS term together with the specification atoms and the
/// context typings.
pub fn encode_pts(spec: &PtsSpec, ctx: &PtsContext, e: &PtsExpr) -> Result<Encoding, EncodeError> {
    pts_typecheck(spec, ctx, e)?;
    let mut reserved: BTreeSet<String> = ctx.iter().map(|(x, _)| x.clone()).collect();
    reserved.extend(e.free_vars());
    let mut enc = Encoder::new(reserved);
    for a in pts_spec_atoms(spec) {
        enc.push(a);
    }
    for (x, t) in ctx {
        enc.push(Atom::typing(Atom::sym(x.clone()), Atom::ty(pts_to_type(t, &[]))));
    }
    let core = lower_pts(spec, &mut ctx.clone(), &mut Vec::new(), e)?;
    let term = enc.lower(&core, &[]);
    Ok(enc.finish(term)?)
}

/// Whether the type `t` lives in `sort`, using plain typings and the
/// transform-guarded rule atoms: a rule fires when its pattern matches
/// `t` and every conjunct of its guard holds. Product bodies are checked
/// with the bound variable replaced by a fresh declared symbol.
pub fn pts_type_query(space: &Atomspace, t: &TypeExpr, sort: &TypeExpr) -> bool {
    guarded_query(space, t, sort, 64)
}

fn guarded_query(space: &Atomspace, t: &TypeExpr, sort: &TypeExpr, depth: usize) -> bool {
    if space.typing_query(&Atom::ty(t.clone()), sort) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    for root in space.root_atoms() {
        let [pat, ty] = match (root.keyword(), root.args.as_slice()) {
            (Some(Keyword::Colon), [p, ty]) if ty.keyword() == Some(Keyword::Trans) => [p, ty],
            _ => continue,
        };
        let (guard, result) = (&ty.args[0], &ty.args[1]);
        if result.as_type().as_ref() != Some(sort) {
            continue;
        }
        let Some(pat) = pat.as_type() else { continue };
        let mut local = space.clone();
        let mut binds = BTreeMap::new();
        if !bind_type(&pat, t, &mut binds, &mut local) {
            continue;
        }
        let (head, conjuncts) = guard.spine();
        let conjuncts = if head.name() == Some(AND) { conjuncts } else { vec![guard] };
        let holds = conjuncts.iter().all(|c| match (c.keyword(), c.args.as_slice()) {
            (Some(Keyword::Colon), [v, s]) => match (v.name().and_then(|n| binds.get(n)), s.as_type()) {
                (Some(bound), Some(s)) => guarded_query(&local, bound, &s, depth - 1),
                _ => false,
            },
            _ => false,
        });
        if holds {
            return true;
        }
    }
    false
}

fn bind_type(
    pat: &TypeExpr,
    t: &TypeExpr,
    binds: &mut BTreeMap<String, TypeExpr>,
    space: &mut Atomspace,
) -> bool {
    match (pat, t) {
        (TypeExpr::Var(v), _) => match binds.get(v) {
            Some(old) => old == t,
            None => {
                binds.insert(v.clone(), t.clone());
                true
            }
        },
        (TypeExpr::Arrow(pa, pb), TypeExpr::Arrow(a, b)) => {
            bind_type(pa, a, binds, space) && bind_type(pb, b, binds, space)
        }
        (TypeExpr::Pi(_, pa, pbody), TypeExpr::Pi(x, a, body)) => {
            let (Some(pbody), Some(body)) = (pbody.as_type(), body.as_type()) else {
                return false;
            };
            if !bind_type(pa, a, binds, space) {
                return false;
            }
            let fresh = space.fresh_symbol();
            if space.push_atom(Atom::typing(Atom::sym(fresh.clone()), Atom::ty((**a).clone()))).is_err() {
                return false;
            }
            bind_type(&pbody, &body.subst(x, &Atom::sym(fresh)), binds, space)
        }
        _ => pat == t,
    }
}

pub fn decoded_to_pts(d: &Decoded, spec: &PtsSpec) -> Result<PtsExpr, DecodeError> {
    let bad = |t: &TypeExpr| DecodeError::Unexpected(t.to_string());
    match d {
        Decoded::Sym(s) => Ok(type_to_pts(&TypeExpr::base(s.clone()), spec).expect("base types convert")),
        Decoded::Ty(t) => type_to_pts(t, spec).ok_or_else(|| bad(t)),
        Decoded::App(f, a) => Ok(PtsExpr::app(decoded_to_pts(f, spec)?, decoded_to_pts(a, spec)?)),
        Decoded::Lam(x, t, b) => Ok(PtsExpr::lam(
            x.clone(),
            type_to_pts(t, spec).ok_or_else(|| bad(t))?,
            decoded_to_pts(b, spec)?,
        )),
        Decoded::Closure(..) => Err(DecodeError::Unexpected(format!("{d:?}"))),
    }
}

pub fn eval_decode_pts(enc: &Encoding, spec: &PtsSpec, budget: usize) -> Result<PtsExpr, DecodeError> {
    let ev = evaluate(&enc.space, budget);
    if ev.outcome.is_exhausted() {
        return Err(DecodeError::Budget(ev.steps));
    }
    let nfs = ev.outcome.normal_forms();
    if nfs.len() != 1 {
        return Err(DecodeError::Nondeterministic(nfs.len()));
    }
    let mut rest = budget.saturating_sub(ev.steps);
    decoded_to_pts(&decode_full(&nfs[0], &enc.combinators, &mut rest)?, spec)
}

// ---- probabilistic dependent types ----

/// The fixed atoms for distributions, choice, sampling and thunks.
pub fn pdts_prelude() -> Vec<Atom> {
    let t1 = || TypeExpr::var("t1");
    let t2 = || TypeExpr::var("t2");
    let random = |a: Atom, b: Atom| Atom::apps(Atom::sym(RANDOM), [a, b]);
    vec![
        Atom::typing(Atom::sym(DISTRIBUTION), Atom::ty(TypeExpr::arrow(TypeExpr::Type, TypeExpr::Type))),
        Atom::typing(
            Atom::sym(RANDOM),
            Atom::ty(TypeExpr::arrows(vec![t1(), t2()], TypeExpr::union(t1(), t2()))),
        ),
        Atom::equation(random(Atom::var("a"), Atom::var("b")), Atom::var("a")),
        Atom::equation(random(Atom::var("a"), Atom::var("b")), Atom::var("b")),
        Atom::typing(Atom::sym(SAMPLE), Atom::ty(TypeExpr::arrow(TypeExpr::dist(t1()), t1()))),
        Atom::typing(Atom::sym(THUNK), Atom::ty(TypeExpr::arrow(t1(), TypeExpr::dist(t1())))),
        Atom::equation(
            Atom::app(Atom::sym(SAMPLE), Atom::app(Atom::sym(THUNK), Atom::var("a"))),
            Atom::var("a"),
        ),
    ]
}

/// Lowers a typed PDTS term. `sources` collects every lambda so that
/// closures can be read back with their weights intact.
pub fn lower_pdts(
    ctx: &PdtsContext,
    bound: &mut Vec<(String, PdtsType)>,
    e: &PdtsExpr,
    sources: &mut Vec<PdtsExpr>,
) -> Result<Core, PdtsError> {
    let mut full = ctx.clone();
    for (x, t) in bound.iter() {
        full.insert(x.clone(), t.clone());
    }
    let tag = pdts_typecheck(&full, e)?.to_type_expr();
    let sym = |s: &str| Core::Sym(s.to_string());
    Ok(match e {
        PdtsExpr::Var(x) if bound.iter().any(|(n, _)| n == x) => Core::Var(x.clone()),
        PdtsExpr::Var(x) => Core::Sym(x.clone()),
        PdtsExpr::App(f, a) => Core::app(
            lower_pdts(ctx, bound, f, sources)?,
            lower_pdts(ctx, bound, a, sources)?,
            tag,
        ),
        PdtsExpr::Random(_, a, b) => {
            let ta = pdts_typecheck(&full, a)?.to_type_expr();
            let partial = Core::app(
                sym(RANDOM),
                lower_pdts(ctx, bound, a, sources)?,
                TypeExpr::arrow(TypeExpr::var("t2"), TypeExpr::union(ta, TypeExpr::var("t2"))),
            );
            Core::app(partial, lower_pdts(ctx, bound, b, sources)?, tag)
        }
        PdtsExpr::Sample(a) => Core::app(sym(SAMPLE), lower_pdts(ctx, bound, a, sources)?, tag),
        PdtsExpr::Thunk(a) => Core::app(sym(THUNK), lower_pdts(ctx, bound, a, sources)?, tag),
        PdtsExpr::Lam(x, t, b) => {
            bound.push((x.clone(), t.clone()));
            let r = (|| {
                full.insert(x.clone(), t.clone());
                let cod = pdts_typecheck(&full, b)?.to_type_expr();
                Ok((cod, lower_pdts(ctx, bound, b, sources)?))
            })();
            bound.pop();
            let (cod, body) = r?;
            sources.push(e.clone());
            Core::Lam {
                binder: x.clone(),
                dom: t.to_type_expr(),
                cod,
                body: Box::new(body),
                source: sources.len() - 1,
            }
        }
    })
}

/// A PDTS encoding with its source lambdas.
#[derive(Clone, Debug)]
pub struct PdtsEncoding {
    pub encoding: Encoding,
    pub sources: Vec<PdtsExpr>,
}

/// Encodes a well-typed PDTS term with the fixed prelude atoms and
/// `extra` atoms (for example equations for context functions).
pub fn encode_pdts_with(ctx: &PdtsContext, e: &PdtsExpr, extra: Vec<Atom>) -> Result<PdtsEncoding, EncodeError> {
    pdts_typecheck(ctx, e)?;
    let mut reserved: BTreeSet<String> = ctx.keys().cloned().collect();
    reserved.extend(e.free_vars());
    reserved.extend([DISTRIBUTION, RANDOM, SAMPLE, THUNK].map(String::from));
    let mut enc = Encoder::new(reserved);
    for a in pdts_prelude().into_iter().chain(extra) {
        enc.push(a);
    }
    for (x, t) in ctx {
        enc.push(Atom::typing(Atom::sym(x.clone()), Atom::ty(t.to_type_expr())));
    }
    let mut sources = Vec::new();
    let core = lower_pdts(ctx, &mut Vec::new(), e, &mut sources)?;
    let term = enc.lower(&core, &[]);
    Ok(PdtsEncoding {
        encoding: enc.finish(term)?,
        sources,
    })
}

pub fn encode_pdts(ctx: &PdtsContext, e: &PdtsExpr) -> Result<PdtsEncoding, EncodeError> {
    encode_pdts_with(ctx, e, Vec::new())
}

impl PdtsEncoding {
    /// Reads a normal form back to a PDTS term, restoring closures from
    /// their source lambdas.
    pub fn decode(&self, space: &Atomspace) -> Result<PdtsExpr, DecodeError> {
        let d = decode_weak(space, &self.encoding.combinators)?;
        self.lift(&d)
    }

    fn lift(&self, d: &Decoded) -> Result<PdtsExpr, DecodeError> {
        let bad = || DecodeError::Unexpected(format!("{d:?}"));
        match d {
            Decoded::Sym(s) => Ok(PdtsExpr::var(s.clone())),
            Decoded::Closure(name, args) => {
                let c = &self.encoding.combinators[name];
                let mut lam = self.sources.get(c.source).cloned().ok_or_else(bad)?;
                for (p, a) in c.params.iter().zip(args) {
                    let v = self.lift(a)?;
                    lam = match lam {
                        PdtsExpr::Lam(x, t, b) => PdtsExpr::Lam(x, t, Box::new(b.subst(p, &v))),
                        other => other,
                    };
                }
                Ok(lam)
            }
            Decoded::App(..) => {
                let (head, args) = d.spine();
                match (head, args.as_slice()) {
                    (Decoded::Sym(s), [a]) if s == THUNK => Ok(PdtsExpr::thunk(self.lift(a)?)),
                    (Decoded::Sym(s), [a]) if s == SAMPLE => Ok(PdtsExpr::sample(self.lift(a)?)),
                    (Decoded::Sym(s), _) if s == RANDOM => Err(bad()),
                    _ => {
                        let Decoded::App(f, a) = d else { unreachable!() };
                        Ok(PdtsExpr::app(self.lift(f)?, self.lift(a)?))
                    }
                }
            }
            Decoded::Ty(_) | Decoded::Lam(..) => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomspace::check_mconstraints;
    use crate::engine::pointed_atom;

    fn a() -> SType {
        SType::base("A")
    }

    #[test]
    fn identity_encodes_as_one_combinator() {
        let ctx = Context::from([("a".to_string(), a())]);
        let e = Term::app(Term::lam("x", a(), Term::var("x")), Term::var("a"));
        let enc = encode_stlc(&ctx, &e).unwrap();
        assert_eq!(enc.combinators.len(), 1);
        let text: Vec<String> = enc.space.root_atoms().iter().map(|x| x.unmarked().to_string()).collect();
        assert!(text.contains(&"(: lam1 (-> A A))".to_string()));
        assert!(text.contains(&"(= (lam1 $x) $x)".to_string()));
        assert!(check_mconstraints(&enc.space).is_empty());
        assert_eq!(eval_decode_term(&enc, 100, true), Ok(Term::var("a")));
    }

    #[test]
    fn normal_term_has_no_activation() {
        let ctx = Context::from([("a".to_string(), a())]);
        let enc = encode_stlc(&ctx, &Term::var("a")).unwrap();
        assert_eq!(enc.space.activated().count(), 0);
        let ev = evaluate(&enc.space, 10);
        assert_eq!(ev.steps, 0);
        assert_eq!(pointed_atom(&ev.outcome.normal_forms()[0]).unwrap().to_string(), "(! a)");
    }

    #[test]
    fn nested_lambdas_lift_separately() {
        let k = Term::lam("x", a(), Term::lam("y", a(), Term::var("x")));
        let enc = encode_stlc(&Context::new(), &k).unwrap();
        assert_eq!(enc.combinators.len(), k.lambda_count());
        let back = eval_decode_term(&enc, 100, true).unwrap();
        assert!(back.alpha_eq(&k), "{back}");
    }

    #[test]
    fn untyped_k_combinator() {
        let k = Term::ulam("x", Term::ulam("y", Term::var("x")));
        let e = Term::apps(k, [Term::var("a"), Term::var("b")]);
        let enc = encode_untyped(&e).unwrap();
        assert_eq!(eval_decode_term(&enc, 100, false), Ok(Term::var("a")));
    }

    #[test]
    fn untyped_omega_diverges() {
        let w = Term::ulam("x", Term::app(Term::var("x"), Term::var("x")));
        let enc = encode_untyped(&Term::app(w.clone(), w)).unwrap();
        assert!(evaluate(&enc.space, 200).outcome.is_exhausted());
    }

    #[test]
    fn pdts_sample_of_thunk() {
        let ctx = PdtsContext::from([("v1".to_string(), PdtsType::base("A"))]);
        let e = PdtsExpr::sample(PdtsExpr::thunk(PdtsExpr::var("v1")));
        let enc = encode_pdts(&ctx, &e).unwrap();
        let ev = evaluate(&enc.encoding.space, 100);
        let nfs = ev.outcome.normal_forms();
        assert_eq!(nfs.len(), 1);
        assert_eq!(enc.decode(&nfs[0]), Ok(PdtsExpr::var("v1")));
    }

    #[test]
    fn pdts_random_branches() {
        let ctx = PdtsContext::from([
            ("v1".to_string(), PdtsType::base("t1")),
            ("v2".to_string(), PdtsType::base("t2")),
        ]);
        let e = PdtsExpr::random(0.3, PdtsExpr::var("v1"), PdtsExpr::var("v2"));
        let enc = encode_pdts(&ctx, &e).unwrap();
        let ev = evaluate(&enc.encoding.space, 100);
        let mut got: Vec<String> = ev
            .outcome
            .normal_forms()
            .iter()
            .map(|s| enc.decode(s).unwrap().to_string())
            .collect();
        got.sort();
        assert_eq!(got, vec!["v1", "v2"]);
    }

    #[test]
    fn quine_spec_types_its_sort() {
        let spec = PtsSpec::quine();
        let enc = encode_pts(&spec, &vec![], &PtsExpr::Sort(1)).unwrap();
        let t1 = Atom::ty(TypeExpr::base("t1"));
        assert!(enc.space.typing_query(&t1, &TypeExpr::base("t1")));
    }

    #[test]
    fn products_type_through_rule_atoms() {
        let spec = PtsSpec::quine();
        let ctx = vec![("A".to_string(), PtsExpr::Sort(1))];
        let enc = encode_pts(&spec, &ctx, &PtsExpr::var("A")).unwrap();
        let t1 = TypeExpr::base("t1");
        let arrow = TypeExpr::arrow(TypeExpr::base("A"), TypeExpr::base("A"));
        assert!(pts_type_query(&enc.space, &arrow, &t1));
        let dep = PtsExpr::pi("x", PtsExpr::var("A"), PtsExpr::var("A"));
        assert_eq!(pts_typecheck(&spec, &ctx, &dep), Ok(PtsExpr::Sort(1)));
        let poly = PtsExpr::pi("B", PtsExpr::Sort(1), PtsExpr::arrow(PtsExpr::var("B"), PtsExpr::var("B")));
        assert!(pts_type_query(&enc.space, &pts_to_type(&poly, &[]), &t1));
        assert!(!pts_type_query(&enc.space, &arrow, &TypeExpr::base("t2")));
        let root_texts: Vec<String> = enc.space.root_atoms().iter().map(|a| a.to_string()).collect();
        assert!(root_texts.iter().any(|a| a.starts_with("(: (Pi $x $ta $m) (trans")), "{root_texts:?}");
    }

    #[test]
    fn pts_identity_reduces() {
        let spec = PtsSpec::lambda_arrow();
        let ctx = vec![("A".to_string(), PtsExpr::Sort(1)), ("y".to_string(), PtsExpr::var("A"))];
        let e = PtsExpr::app(PtsExpr::lam("x", PtsExpr::var("A"), PtsExpr::var("x")), PtsExpr::var("y"));
        let enc = encode_pts(&spec, &ctx, &e).unwrap();
        assert!(check_mconstraints(&enc.space).is_empty());
        assert_eq!(eval_decode_pts(&enc, &spec, 100), Ok(PtsExpr::var("y")));
    }
}
