//! Typed metagraphs.
//!
//! A metagraph is either empty, a single edge with typed targets, or a
//! connection of two metagraphs whose wiring feeds positions of the left
//! operand into positions of the right operand. Rational (cyclic) graphs
//! are written with `Fix`/`Ref` binders.
//!
//! # Positions
//!
//! Every metagraph exposes natural-number positions:
//!
//! * an edge has position `0` (the edge itself) and `1..=n` (its targets);
//! * a connection has position `0` (the whole graph); odd positions `2k-1`
//!   address position `k` of the left operand and even positions `2k`
//!   address position `k` of the right operand.
//!
//! Position `0` of a nested operand is therefore not addressable from the
//! outside. The wiring of `connect(a1, a2, ..)` maps a position of `a1` (in
//! `a1`'s own numbering, `0` meaning `a1` as a whole) to a position of `a2`
//! (in `a2`'s numbering). A wire `i -> j` is well typed when
//! `type_at(a1, i) ⪯ type_at(a2, j)`. Wire ends are reported as
//! [`Endpoint`]s, which can name any sub-metagraph.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::sexpr::{self, ParseError, Sexp};

/// Labels may carry a deduplicating edge id which isomorphism ignores.
pub trait EdgeLabel: Clone + Eq + Hash + Debug {
    fn same_ignoring_id(&self, other: &Self) -> bool {
        self == other
    }
}

impl EdgeLabel for String {}

/// A plain name with an optional edge id, printed as `name#id`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NamedLabel {
    pub name: String,
    pub id: u64,
}

impl NamedLabel {
    pub fn new(name: impl Into<String>) -> Self {
        NamedLabel {
            name: name.into(),
            id: 0,
        }
    }

    pub fn with_id(name: impl Into<String>, id: u64) -> Self {
        NamedLabel {
            name: name.into(),
            id,
        }
    }
}

impl EdgeLabel for NamedLabel {
    fn same_ignoring_id(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Display for NamedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == 0 {
            f.write_str(&self.name)
        } else {
            write!(f, "{}#{}", self.name, self.id)
        }
    }
}

impl FromStr for NamedLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.split_once('#') {
            Some((name, id)) => Ok(NamedLabel::with_id(
                name,
                id.parse().map_err(|_| format!("bad edge id in label {s:?}"))?,
            )),
            None => Ok(NamedLabel::new(s)),
        }
    }
}

/// Monotone edge-id allocator. Confine one to a single builder.
#[derive(Debug, Default)]
pub struct IdCounter(u64);

impl IdCounter {
    pub fn starting_at(first: u64) -> Self {
        IdCounter(first.saturating_sub(1))
    }

    pub fn next_id(&mut self) -> u64 {
        self.0 += 1;
        self.0
    }
}

/// Finite map from left positions to right positions; absent keys are
/// unconnected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Wiring(BTreeMap<usize, usize>);

impl Wiring {
    pub fn new() -> Self {
        Wiring(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Wiring(pairs.into_iter().collect())
    }

    pub fn get(&self, from: usize) -> Option<usize> {
        self.0.get(&from).copied()
    }

    pub fn insert(&mut self, from: usize, to: usize) {
        self.0.insert(from, to);
    }

    pub fn remove(&mut self, from: usize) -> Option<usize> {
        self.0.remove(&from)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&a, &b)| (a, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Metagraph<T, L> {
    Empty,
    Edge {
        edge_type: T,
        label: L,
        targets: Vec<T>,
    },
    Connect {
        left: Arc<Metagraph<T, L>>,
        right: Arc<Metagraph<T, L>>,
        whole_type: T,
        label: L,
        wiring: Wiring,
    },
    Fix {
        binder: usize,
        body: Arc<Metagraph<T, L>>,
    },
    Ref(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation<T> {
    /// A wire whose source type is not below its sink type.
    Order {
        source: Endpoint,
        sink: Endpoint,
        source_type: T,
        sink_type: T,
    },
    /// An endpoint fed by more than one wire.
    MultipleInputs { sink: Endpoint, sources: Vec<Endpoint> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> ConstraintReport<T> {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MetagraphError<T: Debug> {
    #[error("edge declares arity {expected} but has {found} target types")]
    ArityMismatch { expected: usize, found: usize },
    #[error("wiring {from} -> {to} addresses a position that does not exist ({side:?} side)")]
    DanglingWiring { from: usize, to: usize, side: Side },
    #[error("constraint violations: {0:?}")]
    Constraint(Vec<Violation<T>>),
    #[error("position {0} is out of range")]
    IndexOutOfRange(usize),
    #[error("reference to unbound fixpoint binder {0}")]
    FreeRef(usize),
    #[error("not a fixpoint term")]
    NotFix,
    #[error("fixpoint binder {0} is unguarded")]
    Unguarded(usize),
    #[error("the graph is rational; the operation needs a finite graph")]
    Rational,
    #[error("unfolding budget exceeded")]
    BudgetExceeded,
}

type Result<V, T> = std::result::Result<V, MetagraphError<T>>;

const MAX_UNGUARDED_HOPS: usize = 64;

/// A fixpoint environment: binder -> the `Fix` node that binds it.
type Env<'a, T, L> = Vec<(usize, &'a Metagraph<T, L>)>;

fn lookup<'a, T, L>(env: &Env<'a, T, L>, binder: usize) -> Option<&'a Metagraph<T, L>> {
    env.iter().rev().find(|(b, _)| *b == binder).map(|(_, g)| *g)
}

/// Splits a connection position into the operand it addresses.
pub fn split_index(n: usize) -> Option<(Side, usize)> {
    if n == 0 {
        None
    } else if n % 2 == 1 {
        Some((Side::Left, (n + 1) / 2))
    } else {
        Some((Side::Right, n / 2))
    }
}

/// Inverse of [`split_index`]; `None` for an operand's own position `0`.
pub fn join_index(side: Side, local: usize) -> Option<usize> {
    match (side, local) {
        (_, 0) => None,
        (Side::Left, k) => Some(2 * k - 1),
        (Side::Right, k) => Some(2 * k),
    }
}

/// A position inside a nested operand: follow `path` through connections,
/// then take position `local` of the sub-metagraph reached. Canonical
/// endpoints stop at an edge or at position `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endpoint {
    pub path: Vec<Side>,
    pub local: usize,
}

impl Endpoint {
    pub fn root(local: usize) -> Self {
        Endpoint {
            path: Vec::new(),
            local,
        }
    }

    /// The position in the whole graph, if it has one.
    pub fn position(&self) -> Option<usize> {
        let mut p = self.local;
        for side in self.path.iter().rev() {
            p = join_index(*side, p)?;
        }
        Some(p)
    }
}

impl PartialOrd for Side {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Side {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

impl<T, L> Metagraph<T, L>
where
    T: Clone + Eq + Hash + Debug,
    L: EdgeLabel,
{
    pub fn empty() -> Self {
        Metagraph::Empty
    }

    pub fn fix_ref(binder: usize) -> Self {
        Metagraph::Ref(binder)
    }

    /// Wraps `body` in a fixpoint. The body must be guarded and the result
    /// closed.
    pub fn fix(binder: usize, body: Self) -> Result<Self, T> {
        if body == Metagraph::Ref(binder) {
            return Err(MetagraphError::Unguarded(binder));
        }
        let g = Metagraph::Fix {
            binder,
            body: Arc::new(body),
        };
        if let Some(b) = g.first_free_ref() {
            return Err(MetagraphError::FreeRef(b));
        }
        Ok(g)
    }

    pub fn is_closed(&self) -> bool {
        self.first_free_ref().is_none()
    }

    fn first_free_ref(&self) -> Option<usize> {
        fn go<T, L>(g: &Metagraph<T, L>, bound: &mut Vec<usize>) -> Option<usize> {
            match g {
                Metagraph::Empty | Metagraph::Edge { .. } => None,
                Metagraph::Ref(b) => (!bound.contains(b)).then_some(*b),
                Metagraph::Connect { left, right, .. } => {
                    go(left, bound).or_else(|| go(right, bound))
                }
                Metagraph::Fix { binder, body } => {
                    bound.push(*binder);
                    let r = go(body, bound);
                    bound.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn is_rational(&self) -> bool {
        match self {
            Metagraph::Empty | Metagraph::Edge { .. } => false,
            Metagraph::Fix { .. } | Metagraph::Ref(_) => true,
            Metagraph::Connect { left, right, .. } => left.is_rational() || right.is_rational(),
        }
    }

    /// Resolves fixpoints at the head: returns the first `Empty`, `Edge` or
    /// `Connect` node reached, with `env` extended accordingly.
    fn head<'a>(&'a self, env: &mut Env<'a, T, L>) -> Result<&'a Self, T> {
        let mut g = self;
        for _ in 0..MAX_UNGUARDED_HOPS {
            match g {
                Metagraph::Fix { binder, body } => {
                    env.push((*binder, g));
                    g = body;
                }
                Metagraph::Ref(b) => {
                    g = lookup(env, *b).ok_or(MetagraphError::FreeRef(*b))?;
                }
                _ => return Ok(g),
            }
        }
        Err(MetagraphError::Unguarded(0))
    }

    /// Follows position `n` down to a canonical endpoint, returning the
    /// sub-metagraph it lives in.
    fn locate<'a>(
        &'a self,
        n: usize,
        env: &mut Env<'a, T, L>,
        path: &mut Vec<Side>,
    ) -> Result<(&'a Self, usize), T> {
        let mut g = self;
        let mut n = n;
        // Each step either descends a connection or resolves a fixpoint;
        // a position that never reaches an edge is an unproductive cycle.
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > 4096 {
                return Err(MetagraphError::BudgetExceeded);
            }
            let h = g.head(env)?;
            match h {
                Metagraph::Empty => return Err(MetagraphError::IndexOutOfRange(n)),
                Metagraph::Edge { targets, .. } => {
                    return if n <= targets.len() {
                        Ok((h, n))
                    } else {
                        Err(MetagraphError::IndexOutOfRange(n))
                    };
                }
                Metagraph::Connect { left, right, .. } => match split_index(n) {
                    None => return Ok((h, 0)),
                    Some((Side::Left, k)) => {
                        path.push(Side::Left);
                        g = left;
                        n = k;
                    }
                    Some((Side::Right, k)) => {
                        path.push(Side::Right);
                        g = right;
                        n = k;
                    }
                },
                Metagraph::Fix { .. } | Metagraph::Ref(_) => unreachable!(),
            }
        }
    }

    /// The type at position `n`.
    pub fn type_at(&self, n: usize) -> Result<T, T> {
        self.type_in(n, &mut Vec::new())
            .map_err(|e| reindex(e, n))
    }

    fn type_in<'a>(&'a self, n: usize, env: &mut Env<'a, T, L>) -> Result<T, T> {
        let (g, local) = self.locate(n, env, &mut Vec::new())?;
        match g {
            Metagraph::Edge {
                edge_type, targets, ..
            } => Ok(if local == 0 {
                edge_type.clone()
            } else {
                targets[local - 1].clone()
            }),
            Metagraph::Connect { whole_type, .. } => Ok(whole_type.clone()),
            _ => unreachable!(),
        }
    }

    /// Whether position `n` exists.
    pub fn has_index(&self, n: usize) -> bool {
        self.type_at(n).is_ok()
    }

    /// The canonical endpoint of position `n`.
    pub fn endpoint(&self, n: usize) -> Result<Endpoint, T> {
        let mut path = Vec::new();
        let (_, local) = self
            .locate(n, &mut Vec::new(), &mut path)
            .map_err(|e| reindex(e, n))?;
        Ok(Endpoint { path, local })
    }

    /// The type at an endpoint.
    pub fn type_at_endpoint(&self, ep: &Endpoint) -> Result<T, T> {
        let mut env = Vec::new();
        let mut g = self;
        for side in &ep.path {
            match g.head(&mut env)? {
                Metagraph::Connect { left, right, .. } => {
                    g = match side {
                        Side::Left => left,
                        Side::Right => right,
                    }
                }
                _ => return Err(MetagraphError::IndexOutOfRange(ep.local)),
            }
        }
        g.type_in(ep.local, &mut env)
    }

    /// All positions of a finite graph, ascending.
    pub fn indices(&self) -> Result<Vec<usize>, T> {
        if self.is_rational() {
            return Err(MetagraphError::Rational);
        }
        fn go<T, L>(g: &Metagraph<T, L>) -> Vec<usize> {
            match g {
                Metagraph::Empty => Vec::new(),
                Metagraph::Edge { targets, .. } => (0..=targets.len()).collect(),
                Metagraph::Connect { left, right, .. } => {
                    let mut out = vec![0];
                    out.extend(go(left).into_iter().filter_map(|k| join_index(Side::Left, k)));
                    out.extend(go(right).into_iter().filter_map(|k| join_index(Side::Right, k)));
                    out.sort_unstable();
                    out
                }
                Metagraph::Fix { .. } | Metagraph::Ref(_) => unreachable!(),
            }
        }
        Ok(go(self))
    }

    /// Every wire of the syntactic term as canonical (source, sink)
    /// endpoints. Layers under a fixpoint are visited once.
    pub fn wires(&self) -> Vec<(Endpoint, Endpoint)> {
        let mut out = Vec::new();
        self.collect_wires(&mut Vec::new(), &mut Vec::new(), &mut out);
        out
    }

    fn collect_wires<'a>(
        &'a self,
        path: &mut Vec<Side>,
        env: &mut Env<'a, T, L>,
        out: &mut Vec<(Endpoint, Endpoint)>,
    ) {
        match self {
            Metagraph::Empty | Metagraph::Edge { .. } | Metagraph::Ref(_) => {}
            Metagraph::Fix { binder, body } => {
                env.push((*binder, self));
                body.collect_wires(path, env, out);
                env.pop();
            }
            Metagraph::Connect {
                left,
                right,
                wiring,
                ..
            } => {
                for (i, j) in wiring.iter() {
                    let ends = [(Side::Left, &**left, i), (Side::Right, &**right, j)].map(
                        |(side, operand, local)| {
                            let mut p = path.clone();
                            p.push(side);
                            let mut env2 = env.clone();
                            operand
                                .locate(local, &mut env2, &mut p)
                                .ok()
                                .map(|(_, l)| Endpoint { path: p, local: l })
                        },
                    );
                    if let [Some(a), Some(b)] = ends {
                        out.push((a, b));
                    }
                }
                path.push(Side::Left);
                left.collect_wires(path, env, out);
                path.pop();
                path.push(Side::Right);
                right.collect_wires(path, env, out);
                path.pop();
            }
        }
    }

    /// The endpoint that position `n` feeds, or `None` when unconnected.
    pub fn connection(&self, n: usize) -> Result<Option<Endpoint>, T> {
        let source = self.endpoint(n)?;
        Ok(self
            .wires()
            .into_iter()
            .find(|(a, _)| *a == source)
            .map(|(_, b)| b))
    }

    /// Checks that every wire respects `order` and that no endpoint has two
    /// inputs.
    pub fn check_constraints<O>(&self, order: O) -> ConstraintReport<T>
    where
        O: Fn(&T, &T) -> bool,
    {
        let mut violations = Vec::new();
        let mut by_sink: BTreeMap<Endpoint, Vec<Endpoint>> = BTreeMap::new();
        for (src, sink) in self.wires() {
            let (Ok(a), Ok(b)) = (self.type_at_endpoint(&src), self.type_at_endpoint(&sink)) else {
                continue;
            };
            if !order(&a, &b) {
                violations.push(Violation::Order {
                    source: src.clone(),
                    sink: sink.clone(),
                    source_type: a,
                    sink_type: b,
                });
            }
            by_sink.entry(sink).or_default().push(src);
        }
        for (sink, sources) in by_sink {
            if sources.len() > 1 {
                violations.push(Violation::MultipleInputs { sink, sources });
            }
        }
        ConstraintReport { violations }
    }

    /// Replaces every free `Ref(binder)` in `self` with `replacement`.
    fn substitute(&self, binder: usize, replacement: &Arc<Self>) -> Self {
        match self {
            Metagraph::Ref(b) if *b == binder => (**replacement).clone(),
            Metagraph::Empty | Metagraph::Edge { .. } | Metagraph::Ref(_) => self.clone(),
            Metagraph::Fix { binder: b, .. } if *b == binder => self.clone(),
            Metagraph::Fix { binder: b, body } => Metagraph::Fix {
                binder: *b,
                body: Arc::new(body.substitute(binder, replacement)),
            },
            Metagraph::Connect {
                left,
                right,
                whole_type,
                label,
                wiring,
            } => Metagraph::Connect {
                left: Arc::new(left.substitute(binder, replacement)),
                right: Arc::new(right.substitute(binder, replacement)),
                whole_type: whole_type.clone(),
                label: label.clone(),
                wiring: wiring.clone(),
            },
        }
    }

    /// One-step unfolding of a fixpoint.
    pub fn unfold(&self) -> Result<Self, T> {
        let Metagraph::Fix { binder, body } = self else {
            return Err(MetagraphError::NotFix);
        };
        if **body == Metagraph::Ref(*binder) {
            return Err(MetagraphError::Unguarded(*binder));
        }
        let unfolded = body.substitute(*binder, &Arc::new(self.clone()));
        match unfolded {
            Metagraph::Fix { .. } => unfolded.unfold(),
            other => Ok(other),
        }
    }

    /// Finite approximation: fixpoints are unfolded `depth` times and any
    /// remaining fixpoint is replaced by the empty graph.
    pub fn approximate(&self, depth: usize) -> Result<Self, T> {
        match self {
            Metagraph::Empty | Metagraph::Edge { .. } => Ok(self.clone()),
            Metagraph::Ref(b) => Err(MetagraphError::FreeRef(*b)),
            Metagraph::Fix { .. } => {
                if depth == 0 {
                    Ok(Metagraph::Empty)
                } else {
                    self.unfold()?.approximate(depth - 1)
                }
            }
            Metagraph::Connect {
                left,
                right,
                whole_type,
                label,
                wiring,
            } => Ok(Metagraph::Connect {
                left: Arc::new(left.approximate(depth)?),
                right: Arc::new(right.approximate(depth)?),
                whole_type: whole_type.clone(),
                label: label.clone(),
                wiring: wiring.clone(),
            }),
        }
    }

    /// Number of edges of a finite graph.
    pub fn edge_count(&self) -> Result<usize, T> {
        match self {
            Metagraph::Empty => Ok(0),
            Metagraph::Edge { .. } => Ok(1),
            Metagraph::Connect { left, right, .. } => Ok(left.edge_count()? + right.edge_count()?),
            Metagraph::Fix { .. } | Metagraph::Ref(_) => Err(MetagraphError::Rational),
        }
    }
}

fn reindex<T: Debug>(e: MetagraphError<T>, n: usize) -> MetagraphError<T> {
    match e {
        MetagraphError::IndexOutOfRange(_) => MetagraphError::IndexOutOfRange(n),
        other => other,
    }
}

/// Builds an edge, checking that `targets` has `arity` entries.
pub fn mk_edge<T, L>(arity: usize, edge_type: T, label: L, targets: Vec<T>) -> Result<Metagraph<T, L>, T>
where
    T: Clone + Eq + Hash + Debug,
    L: EdgeLabel,
{
    if targets.len() != arity {
        return Err(MetagraphError::ArityMismatch {
            expected: arity,
            found: targets.len(),
        });
    }
    Ok(Metagraph::Edge {
        edge_type,
        label,
        targets,
    })
}

/// Connects two closed graphs and validates the result against `order`.
pub fn mk_connect<T, L, O>(
    left: Metagraph<T, L>,
    right: Metagraph<T, L>,
    whole_type: T,
    label: L,
    wiring: Wiring,
    order: O,
) -> Result<Metagraph<T, L>, T>
where
    T: Clone + Eq + Hash + Debug,
    L: EdgeLabel,
    O: Fn(&T, &T) -> bool,
{
    for g in [&left, &right] {
        if let Some(b) = g.first_free_ref() {
            return Err(MetagraphError::FreeRef(b));
        }
    }
    for (i, j) in wiring.iter() {
        if !left.has_index(i) {
            return Err(MetagraphError::DanglingWiring {
                from: i,
                to: j,
                side: Side::Left,
            });
        }
        if !right.has_index(j) {
            return Err(MetagraphError::DanglingWiring {
                from: i,
                to: j,
                side: Side::Right,
            });
        }
    }
    let g = Metagraph::Connect {
        left: Arc::new(left),
        right: Arc::new(right),
        whole_type,
        label,
        wiring,
    };
    let report = g.check_constraints(order);
    if !report.is_empty() {
        return Err(MetagraphError::Constraint(report.violations));
    }
    Ok(g)
}

/// Disjoint union: a connection with no wires.
pub fn union<T, L>(
    left: Metagraph<T, L>,
    right: Metagraph<T, L>,
    whole_type: T,
    label: L,
) -> Result<Metagraph<T, L>, T>
where
    T: Clone + Eq + Hash + Debug,
    L: EdgeLabel,
{
    for g in [&left, &right] {
        if let Some(b) = g.first_free_ref() {
            return Err(MetagraphError::FreeRef(b));
        }
    }
    Ok(Metagraph::Connect {
        left: Arc::new(left),
        right: Arc::new(right),
        whole_type,
        label,
        wiring: Wiring::new(),
    })
}

/// Structural isomorphism ignoring edge ids, with at most `budget`
/// fixpoint unfoldings.
pub fn graph_iso<T, L>(a: &Metagraph<T, L>, b: &Metagraph<T, L>, budget: usize) -> Result<bool, T>
where
    T: Clone + Eq + Hash + Debug,
    L: EdgeLabel,
{
    let mut budget = budget;
    iso(a, b, &mut HashMap::new(), &mut budget)
}

fn iso<T, L>(
    a: &Metagraph<T, L>,
    b: &Metagraph<T, L>,
    binders: &mut HashMap<usize, usize>,
    budget: &mut usize,
) -> Result<bool, T>
where
    T: Clone + Eq + Hash + Debug,
    L: EdgeLabel,
{
    use Metagraph::*;
    match (a, b) {
        (Empty, Empty) => Ok(true),
        (
            Edge {
                edge_type: t1,
                label: l1,
                targets: ts1,
            },
            Edge {
                edge_type: t2,
                label: l2,
                targets: ts2,
            },
        ) => Ok(t1 == t2 && l1.same_ignoring_id(l2) && ts1 == ts2),
        (
            Connect {
                left: a1,
                right: a2,
                whole_type: t1,
                label: l1,
                wiring: q1,
            },
            Connect {
                left: b1,
                right: b2,
                whole_type: t2,
                label: l2,
                wiring: q2,
            },
        ) => {
            if t1 != t2 || !l1.same_ignoring_id(l2) || q1 != q2 {
                return Ok(false);
            }
            Ok(iso(a1, b1, binders, budget)? && iso(a2, b2, binders, budget)?)
        }
        (Fix { binder: x, body: bx }, Fix { binder: y, body: by }) => {
            let saved = binders.insert(*x, *y);
            let r = iso(bx, by, binders, budget);
            match saved {
                Some(old) => binders.insert(*x, old),
                None => binders.remove(x),
            };
            r
        }
        (Ref(x), Ref(y)) => Ok(binders.get(x) == Some(y)),
        (Fix { .. }, _) | (_, Fix { .. }) => {
            if *budget == 0 {
                return Err(MetagraphError::BudgetExceeded);
            }
            *budget -= 1;
            let a = if matches!(a, Fix { .. }) { a.unfold()? } else { a.clone() };
            let b = if matches!(b, Fix { .. }) { b.unfold()? } else { b.clone() };
            iso(&a, &b, binders, budget)
        }
        _ => Ok(false),
    }
}

impl<T: Display, L: Display> Metagraph<T, L> {
    /// Canonical S-expression form.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        use std::fmt::Write;
        match self {
            Metagraph::Empty => out.push_str("eps"),
            Metagraph::Edge {
                edge_type,
                label,
                targets,
            } => {
                let _ = write!(out, "(edge {} {edge_type} {label} (", targets.len());
                for (i, t) in targets.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{t}");
                }
                out.push_str("))");
            }
            Metagraph::Connect {
                left,
                right,
                whole_type,
                label,
                wiring,
            } => {
                out.push_str("(connect ");
                left.write_sexpr(out);
                out.push(' ');
                right.write_sexpr(out);
                let _ = write!(out, " {whole_type} {label} (");
                for (k, (i, j)) in wiring.iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "({i} {j})");
                }
                out.push_str("))");
            }
            Metagraph::Fix { binder, body } => {
                let _ = write!(out, "(fix {binder} ");
                body.write_sexpr(out);
                out.push(')');
            }
            Metagraph::Ref(b) => {
                let _ = write!(out, "(ref {b})");
            }
        }
    }
}

impl<T: Display, L: Display> Display for Metagraph<T, L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

/// Parses the canonical S-expression form. Structure is not validated
/// beyond arity; use [`mk_connect`] or `check_constraints` for that.
pub fn parse_sexpr<T, L>(text: &str) -> std::result::Result<Metagraph<T, L>, ParseError>
where
    T: FromStr,
    L: FromStr,
{
    from_sexp(&sexpr::read_one(text)?)
}

fn from_sexp<T: FromStr, L: FromStr>(s: &Sexp) -> std::result::Result<Metagraph<T, L>, ParseError> {
    let nat = |s: &Sexp| -> std::result::Result<usize, ParseError> {
        s.symbol()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| s.error("expected a natural number"))
    };
    let tag = |s: &Sexp| -> std::result::Result<T, ParseError> {
        s.symbol()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| s.error("expected a type tag"))
    };
    let label = |s: &Sexp| -> std::result::Result<L, ParseError> {
        s.symbol()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| s.error("expected a label"))
    };
    if s.symbol() == Some("eps") {
        return Ok(Metagraph::Empty);
    }
    let items = s
        .list()
        .ok_or_else(|| s.error("expected a metagraph").expecting(&["eps", "("]))?;
    let head = items
        .first()
        .and_then(Sexp::symbol)
        .ok_or_else(|| s.error("expected a constructor").expecting(&["edge", "connect", "fix", "ref"]))?;
    match (head, items.len()) {
        ("edge", 5) => {
            let n = nat(&items[1])?;
            let targets = items[4]
                .list()
                .ok_or_else(|| items[4].error("expected a list of target types"))?
                .iter()
                .map(tag)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if targets.len() != n {
                return Err(items[4].error(format!(
                    "edge declares arity {n} but lists {} targets",
                    targets.len()
                )));
            }
            Ok(Metagraph::Edge {
                edge_type: tag(&items[2])?,
                label: label(&items[3])?,
                targets,
            })
        }
        ("connect", 6) => {
            let mut wiring = Wiring::new();
            for pair in items[5]
                .list()
                .ok_or_else(|| items[5].error("expected a wiring list"))?
            {
                match pair.list() {
                    Some([a, b]) => wiring.insert(nat(a)?, nat(b)?),
                    _ => return Err(pair.error("expected a wire (i j)")),
                }
            }
            Ok(Metagraph::Connect {
                left: Arc::new(from_sexp(&items[1])?),
                right: Arc::new(from_sexp(&items[2])?),
                whole_type: tag(&items[3])?,
                label: label(&items[4])?,
                wiring,
            })
        }
        ("fix", 3) => Ok(Metagraph::Fix {
            binder: nat(&items[1])?,
            body: Arc::new(from_sexp(&items[2])?),
        }),
        ("ref", 2) => Ok(Metagraph::Ref(nat(&items[1])?)),
        _ => Err(items[0]
            .error(format!("malformed {head} form"))
            .expecting(&["edge", "connect", "fix", "ref"])),
    }
}
