//! Bisimulation by partition refinement over the coproduct of two systems,
//! with distinguishing formulas when the check fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Debug};

use super::{reachable, Fragment, Lts, LtsError};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A modal formula separating two states. `Diamond` with a probability
/// holds when the action reaches states satisfying `then` with at least
/// that total weight.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    Diamond {
        action: String,
        prob: Option<f64>,
        then: Box<Formula>,
    },
    Not(Box<Formula>),
    And(Vec<Formula>),
}

impl Formula {
    pub fn depth(&self) -> usize {
        match self {
            Formula::True => 0,
            Formula::Diamond { then, .. } => 1 + then.depth(),
            Formula::Not(f) => f.depth(),
            Formula::And(fs) => fs.iter().map(Formula::depth).max().unwrap_or(0),
        }
    }

    /// The action path along the first diamond at every level.
    pub fn trace(&self) -> Vec<String> {
        match self {
            Formula::True => Vec::new(),
            Formula::Diamond { action, then, .. } => {
                let mut out = vec![action.clone()];
                out.extend(then.trace());
                out
            }
            Formula::Not(f) => f.trace(),
            Formula::And(fs) => fs.first().map(Formula::trace).unwrap_or_default(),
        }
    }

    /// Evaluates the formula at `s`. Missing weights count as 1.
    pub fn holds<L: Lts>(&self, lts: &L, s: &L::State, tol: f64) -> bool {
        match self {
            Formula::True => true,
            Formula::Not(f) => !f.holds(lts, s, tol),
            Formula::And(fs) => fs.iter().all(|f| f.holds(lts, s, tol)),
            Formula::Diamond { action, prob, then } => {
                let succ = lts.step(s);
                let good = succ
                    .iter()
                    .filter(|t| &t.action == action && then.holds(lts, &t.target, tol));
                match prob {
                    None => good.count() > 0,
                    Some(p) => {
                        let total: f64 = good.map(|t| t.weight.unwrap_or(1.0)).sum();
                        total > 0.0 && total >= p - tol * p.abs().max(1.0)
                    }
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("tt"),
            Formula::Diamond { action, prob, then } => match prob {
                None => write!(f, "<{action}>{then}"),
                Some(p) => write!(f, "<{action}>[>={p}]{then}"),
            },
            Formula::Not(x) => write!(f, "!{x}"),
            Formula::And(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BisimVerdict<S1, S2> {
    /// Every pair of related states; contains the queried pair.
    Bisimilar { relation: Vec<(S1, S2)> },
    /// A formula true at the first state and false at the second.
    Distinguished { witness: Formula },
    Inconclusive { reason: String },
}

impl<S1, S2> BisimVerdict<S1, S2> {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, BisimVerdict::Bisimilar { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            BisimVerdict::Bisimilar { .. } => "bisimilar",
            BisimVerdict::Distinguished { .. } => "distinguished",
            BisimVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Transition table over state indices, actions by index, weights
/// defaulting to 1.
struct Table {
    actions: Vec<String>,
    edges: Vec<Vec<(usize, usize, f64)>>,
}

impl Table {
    fn from_fragment<S: Clone + Ord + Debug>(frag: &Fragment<S>) -> Table {
        Table {
            actions: frag.actions.clone(),
            edges: frag
                .edges
                .iter()
                .map(|es| es.iter().map(|&(a, j, w)| (a, j, w.unwrap_or(1.0))).collect())
                .collect(),
        }
    }

    /// Disjoint union; right states are shifted by the left size.
    fn coproduct<S1, S2>(f1: &Fragment<S1>, f2: &Fragment<S2>) -> Table
    where
        S1: Clone + Ord + Debug,
        S2: Clone + Ord + Debug,
    {
        let mut actions: Vec<String> = f1.actions.clone();
        let mut remap = Vec::new();
        for a in &f2.actions {
            let i = match actions.iter().position(|x| x == a) {
                Some(i) => i,
                None => {
                    actions.push(a.clone());
                    actions.len() - 1
                }
            };
            remap.push(i);
        }
        let n1 = f1.len();
        let mut edges: Vec<Vec<(usize, usize, f64)>> = f1
            .edges
            .iter()
            .map(|es| es.iter().map(|&(a, j, w)| (a, j, w.unwrap_or(1.0))).collect())
            .collect();
        edges.extend(f2.edges.iter().map(|es| {
            es.iter()
                .map(|&(a, j, w)| (remap[a], j + n1, w.unwrap_or(1.0)))
                .collect::<Vec<_>>()
        }));
        Table { actions, edges }
    }

    fn len(&self) -> usize {
        self.edges.len()
    }

    /// Total weight from `s` by action `a` into each block of `blocks`.
    fn weights(&self, s: usize, blocks: &[usize]) -> BTreeMap<(String, usize), f64> {
        let mut out = BTreeMap::new();
        for &(a, j, w) in &self.edges[s] {
            *out.entry((self.actions[a].clone(), blocks[j])).or_insert(0.0) += w;
        }
        out
    }

    fn normalization(&self, tol: f64, name: impl Fn(usize) -> String) -> Result<(), LtsError> {
        for s in 0..self.len() {
            let mut sums: BTreeMap<usize, f64> = BTreeMap::new();
            for &(a, _, w) in &self.edges[s] {
                *sums.entry(a).or_insert(0.0) += w;
            }
            for (a, sum) in sums {
                if (sum - 1.0).abs() > tol.max(tol * sum.abs()) {
                    return Err(LtsError::NotNormalized {
                        state: name(s),
                        action: self.actions[a].clone(),
                        sum: sum.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Block assignment after each refinement round; round 0 is the single
/// block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub rounds: Vec<Vec<usize>>,
}

impl Refinement {
    pub fn final_blocks(&self) -> &[usize] {
        self.rounds.last().expect("at least one round")
    }

    pub fn block_counts(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| count_blocks(r)).collect()
    }

    /// First round separating `x` and `y`.
    fn split_round(&self, x: usize, y: usize) -> Option<usize> {
        self.rounds.iter().position(|r| r[x] != r[y])
    }
}

fn count_blocks(r: &[usize]) -> usize {
    r.iter().collect::<BTreeSet<_>>().len()
}

fn close(p: f64, q: f64, tol: f64) -> bool {
    (p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0)
}

/// Whether two weight signatures agree: same keys and, under `tol`, the
/// same weights.
fn same_signature(
    a: &BTreeMap<(String, usize), f64>,
    b: &BTreeMap<(String, usize), f64>,
    tol: Option<f64>,
) -> bool {
    match tol {
        None => a.keys().eq(b.keys()),
        Some(t) => {
            let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
            keys.into_iter()
                .all(|k| close(*a.get(k).unwrap_or(&0.0), *b.get(k).unwrap_or(&0.0), t))
        }
    }
}

fn refine_table(table: &Table, tol: Option<f64>) -> Refinement {
    let n = table.len();
    let mut rounds = vec![vec![0; n]];
    loop {
        let cur = rounds.last().expect("nonempty");
        let sigs: Vec<_> = (0..n).map(|s| table.weights(s, cur)).collect();
        // representatives of the new blocks, with the old block they refine
        let mut reps: Vec<(usize, usize)> = Vec::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let found = reps
                .iter()
                .position(|&(old, r)| old == cur[s] && same_signature(&sigs[r], &sigs[s], tol));
            next[s] = match found {
                Some(b) => b,
                None => {
                    reps.push((cur[s], s));
                    reps.len() - 1
                }
            };
        }
        if count_blocks(&next) == count_blocks(cur) {
            return Refinement { rounds };
        }
        rounds.push(next);
    }
}

/// Refines the states of an explored fragment. With `tol`, states must
/// also agree on the weight they send into each block.
pub fn refine<S: Clone + Ord + Debug>(frag: &Fragment<S>, tol: Option<f64>) -> Refinement {
    refine_table(&Table::from_fragment(frag), tol)
}

struct Witnesses<'a> {
    table: &'a Table,
    refinement: &'a Refinement,
    tol: Option<f64>,
}

impl Witnesses<'_> {
    /// A formula true at `x` and false at `y`; they must be split by the
    /// final partition.
    fn distinguish(&self, x: usize, y: usize) -> Formula {
        let k = self
            .refinement
            .split_round(x, y)
            .expect("states are in different blocks");
        let prev = &self.refinement.rounds[k - 1];
        let (wx, wy) = (self.table.weights(x, prev), self.table.weights(y, prev));
        let keys: BTreeSet<&(String, usize)> = wx.keys().chain(wy.keys()).collect();
        let (action, block) = keys
            .into_iter()
            .find(|k| {
                let (p, q) = (*wx.get(*k).unwrap_or(&0.0), *wy.get(*k).unwrap_or(&0.0));
                match self.tol {
                    None => (p > 0.0) != (q > 0.0),
                    Some(t) => !close(p, q, t),
                }
            })
            .cloned()
            .expect("states split in this round differ on some block");
        let (p, q) = (
            *wx.get(&(action.clone(), block)).unwrap_or(&0.0),
            *wy.get(&(action.clone(), block)).unwrap_or(&0.0),
        );
        if q > p || (self.tol.is_none() && p == 0.0) {
            return Formula::Not(Box::new(self.distinguish(y, x)));
        }
        // a successor of x inside the block, against every other block the
        // two states reach by the same action
        let succ = |s: usize| {
            self.table.edges[s]
                .iter()
                .filter(|e| self.table.actions[e.0] == action)
                .map(|e| e.1)
                .collect::<Vec<_>>()
        };
        let inside = succ(x)
            .into_iter()
            .find(|&j| prev[j] == block)
            .expect("x reaches the block");
        let mut others: BTreeMap<usize, usize> = BTreeMap::new();
        let candidates = match self.tol {
            None => succ(y),
            Some(_) => succ(x).into_iter().chain(succ(y)).collect(),
        };
        for j in candidates {
            if prev[j] != block {
                others.entry(prev[j]).or_insert(j);
            }
        }
        let mut parts: Vec<Formula> = Vec::new();
        for j in others.into_values() {
            let f = self.distinguish(inside, j);
            if !parts.contains(&f) {
                parts.push(f);
            }
        }
        let then = match parts.len() {
            0 => Formula::True,
            1 => parts.pop().expect("one part"),
            _ => Formula::And(parts),
        };
        Formula::Diamond {
            action,
            prob: self.tol.map(|_| p),
            then: Box::new(then),
        }
    }
}

fn verdict<S1, S2>(
    f1: &Fragment<S1>,
    f2: &Fragment<S2>,
    table: &Table,
    tol: Option<f64>,
) -> BisimVerdict<S1, S2>
where
    S1: Clone + Ord + Debug,
    S2: Clone + Ord + Debug,
{
    let refinement = refine_table(table, tol);
    let blocks = refinement.final_blocks();
    let n1 = f1.len();
    if blocks[0] == blocks[n1] {
        let mut relation = Vec::new();
        for (i, x) in f1.states.iter().enumerate() {
            for (j, y) in f2.states.iter().enumerate() {
                if blocks[i] == blocks[n1 + j] {
                    relation.push((x.clone(), y.clone()));
                }
            }
        }
        return BisimVerdict::Bisimilar { relation };
    }
    let w = Witnesses {
        table,
        refinement: &refinement,
        tol,
    };
    BisimVerdict::Distinguished {
        witness: w.distinguish(0, n1),
    }
}

fn explore<L1: Lts, L2: Lts>(
    l1: &L1,
    s1: &L1::State,
    l2: &L2,
    s2: &L2::State,
    budget: usize,
) -> Result<(Fragment<L1::State>, Fragment<L2::State>), String> {
    let f1 = reachable(l1, s1, budget);
    let f2 = reachable(l2, s2, budget);
    for (f, side) in [(f1.truncated, "first"), (f2.truncated, "second")] {
        if f {
            return Err(format!("{side} system has more than {budget} reachable states"));
        }
    }
    Ok((f1, f2))
}

/// Checks whether `s1` and `s2` are bisimilar by refining the coproduct of
/// their reachable fragments.
pub fn bisim_check<L1: Lts, L2: Lts>(
    l1: &L1,
    s1: &L1::State,
    l2: &L2,
    s2: &L2::State,
    budget: usize,
) -> BisimVerdict<L1::State, L2::State> {
    match explore(l1, s1, l2, s2, budget) {
        Ok((f1, f2)) => verdict(&f1, &f2, &Table::coproduct(&f1, &f2), None),
        Err(reason) => BisimVerdict::Inconclusive { reason },
    }
}

/// Probabilistic bisimulation: related states send equal weight, within
/// `tol`, into every block by every action.
pub fn prob_bisim_check<L1: Lts, L2: Lts>(
    l1: &L1,
    s1: &L1::State,
    l2: &L2,
    s2: &L2::State,
    budget: usize,
    tol: f64,
) -> Result<BisimVerdict<L1::State, L2::State>, LtsError> {
    let (f1, f2) = match explore(l1, s1, l2, s2, budget) {
        Ok(f) => f,
        Err(reason) => return Ok(BisimVerdict::Inconclusive { reason }),
    };
    let table = Table::coproduct(&f1, &f2);
    let n1 = f1.len();
    table.normalization(tol, |i| {
        if i < n1 {
            format!("{:?}", f1.states[i])
        } else {
            format!("{:?}", f2.states[i - n1])
        }
    })?;
    Ok(verdict(&f1, &f2, &table, Some(tol)))
}

type Maps<S1, S2> = (BTreeMap<S1, S2>, BTreeMap<S2, S1>);

/// Functions each way out of a relation that is total on both sides,
/// choosing the first partner listed when there are several.
pub fn extract_maps<S1, S2>(
    relation: &[(S1, S2)],
    states1: &[S1],
    states2: &[S2],
) -> Result<Maps<S1, S2>, LtsError>
where
    S1: Clone + Ord + Debug,
    S2: Clone + Ord + Debug,
{
    let mut g1 = BTreeMap::new();
    let mut g2 = BTreeMap::new();
    for (x, y) in relation {
        g1.entry(x.clone()).or_insert_with(|| y.clone());
        g2.entry(y.clone()).or_insert_with(|| x.clone());
    }
    if let Some(x) = states1.iter().find(|x| !g1.contains_key(*x)) {
        return Err(LtsError::NotTotal(format!("{x:?}")));
    }
    if let Some(y) = states2.iter().find(|y| !g2.contains_key(*y)) {
        return Err(LtsError::NotTotal(format!("{y:?}")));
    }
    Ok((g1, g2))
}
