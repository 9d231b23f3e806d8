//! Labelled transition systems, plain and weighted, with reachability and
//! bisimulation checking.

mod bisim;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Debug, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bisim::{
    bisim_check, extract_maps, prob_bisim_check, refine, BisimVerdict, Formula, Refinement,
    DEFAULT_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq)]
pub struct Transition<S> {
    pub action: String,
    pub target: S,
    /// Probability of this successor; `None` reads as 1.
    pub weight: Option<f64>,
}

impl<S> Transition<S> {
    pub fn new(action: impl Into<String>, target: S) -> Self {
        Transition {
            action: action.into(),
            target,
            weight: None,
        }
    }

    pub fn weighted(action: impl Into<String>, target: S, weight: f64) -> Self {
        Transition {
            action: action.into(),
            target,
            weight: Some(weight),
        }
    }
}

/// A system given by its successor function. `step` must be a function:
/// the same state always yields the same successors.
pub trait Lts {
    type State: Clone + Ord + Debug;

    fn step(&self, s: &Self::State) -> Vec<Transition<Self::State>>;
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("state {state} has {action}-weights summing to {sum}, not 1")]
    NotNormalized {
        state: String,
        action: String,
        sum: String,
    },
    #[error("relation is not total: {0} has no partner")]
    NotTotal(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("invalid system description: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: String,
    pub action: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// A finite system listed state by state. States and actions are names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplicitLts {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
}

impl ExplicitLts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a transition, registering unseen states and actions.
    pub fn add(&mut self, from: &str, action: &str, to: &str, weight: Option<f64>) -> &mut Self {
        for s in [from, to] {
            if !self.states.iter().any(|x| x == s) {
                self.states.push(s.to_string());
            }
        }
        if !self.actions.iter().any(|x| x == action) {
            self.actions.push(action.to_string());
        }
        self.transitions.push(TransitionRecord {
            from: from.into(),
            action: action.into(),
            to: to.into(),
            weight,
        });
        self
    }

    pub fn with_state(mut self, s: &str) -> Self {
        if !self.states.iter().any(|x| x == s) {
            self.states.push(s.to_string());
        }
        self
    }

    pub fn from_json(text: &str) -> Result<Self, LtsError> {
        let lts: ExplicitLts = serde_json::from_str(text).map_err(|e| LtsError::Format(e.to_string()))?;
        lts.validate()?;
        Ok(lts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    fn validate(&self) -> Result<(), LtsError> {
        let states: BTreeSet<&str> = self.states.iter().map(String::as_str).collect();
        for t in &self.transitions {
            for s in [&t.from, &t.to] {
                if !states.contains(s.as_str()) {
                    return Err(LtsError::UnknownState(s.clone()));
                }
            }
            if !self.actions.is_empty() && !self.actions.contains(&t.action) {
                return Err(LtsError::Format(format!("undeclared action {}", t.action)));
            }
        }
        Ok(())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n");
        for s in &self.states {
            let _ = writeln!(out, "  {s:?};");
        }
        for t in &self.transitions {
            let label = match t.weight {
                Some(w) => format!("{} [{w}]", t.action),
                None => t.action.clone(),
            };
            let _ = writeln!(out, "  {:?} -> {:?} [label={label:?}];", t.from, t.to);
        }
        out.push_str("}\n");
        out
    }

    /// The reachable fragment of any system, listed explicitly. States are
    /// named by `name`.
    pub fn from_fragment<S: Clone + Ord + Debug>(
        frag: &Fragment<S>,
        name: impl Fn(&S) -> String,
    ) -> Self {
        let mut out = ExplicitLts {
            states: frag.states.iter().map(&name).collect(),
            ..Default::default()
        };
        for (i, edges) in frag.edges.iter().enumerate() {
            for (a, j, w) in edges {
                out.add(&name(&frag.states[i]), &frag.actions[*a], &name(&frag.states[*j]), *w);
            }
        }
        out
    }
}

impl Lts for ExplicitLts {
    type State = String;

    fn step(&self, s: &String) -> Vec<Transition<String>> {
        self.transitions
            .iter()
            .filter(|t| &t.from == s)
            .map(|t| Transition {
                action: t.action.clone(),
                target: t.to.clone(),
                weight: t.weight,
            })
            .collect()
    }
}

impl fmt::Display for ExplicitLts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.transitions {
            writeln!(f, "{} --{}--> {}", t.from, t.action, t.to)?;
        }
        Ok(())
    }
}

/// An explored part of a system. Edges index into `states` and `actions`;
/// a truncated fragment has edges only from expanded states.
#[derive(Clone, Debug)]
pub struct Fragment<S> {
    pub states: Vec<S>,
    pub index: BTreeMap<S, usize>,
    pub actions: Vec<String>,
    pub edges: Vec<Vec<(usize, usize, Option<f64>)>>,
    pub truncated: bool,
}

impl<S: Clone + Ord + Debug> Fragment<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains(&self, s: &S) -> bool {
        self.index.contains_key(s)
    }
}

/// Breadth-first exploration from `s0`, keeping at most `budget` states.
pub fn reachable<L: Lts>(lts: &L, s0: &L::State, budget: usize) -> Fragment<L::State> {
    let mut frag = Fragment {
        states: vec![s0.clone()],
        index: BTreeMap::from([(s0.clone(), 0)]),
        actions: Vec::new(),
        edges: Vec::new(),
        truncated: false,
    };
    let mut action_ix: BTreeMap<String, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut out = Vec::new();
        for t in lts.step(&frag.states[i]) {
            let a = *action_ix.entry(t.action.clone()).or_insert_with(|| {
                frag.actions.push(t.action.clone());
                frag.actions.len() - 1
            });
            let j = match frag.index.get(&t.target) {
                Some(&j) => j,
                None if frag.states.len() < budget => {
                    let j = frag.states.len();
                    frag.states.push(t.target.clone());
                    frag.index.insert(t.target, j);
                    queue.push_back(j);
                    j
                }
                None => {
                    frag.truncated = true;
                    continue;
                }
            };
            out.push((a, j, t.weight));
        }
        if frag.edges.len() <= i {
            frag.edges.resize(i + 1, Vec::new());
        }
        frag.edges[i] = out;
    }
    frag.edges.resize(frag.states.len(), Vec::new());
    frag
}

/// A state of a [`RootedLts`]: the added start, or a state of the inner
/// system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rooted<S> {
    Start,
    At(S),
}

/// A system with a fresh start state that reaches each listed state by
/// its own action, so a family of initial states is checked at once.
pub struct RootedLts<'a, L: Lts> {
    pub inner: &'a L,
    pub starts: Vec<(String, L::State)>,
}

impl<L: Lts> Lts for RootedLts<'_, L> {
    type State = Rooted<L::State>;

    fn step(&self, s: &Self::State) -> Vec<Transition<Self::State>> {
        match s {
            Rooted::Start => self
                .starts
                .iter()
                .map(|(a, t)| Transition::new(a.clone(), Rooted::At(t.clone())))
                .collect(),
            Rooted::At(x) => self
                .inner
                .step(x)
                .into_iter()
                .map(|t| Transition {
                    action: t.action,
                    target: Rooted::At(t.target),
                    weight: t.weight,
                })
                .collect(),
        }
    }
}

/// Checks the two transfer conditions for every related pair: each move
/// of one side is answered by an equally labelled move of the other into
/// a related pair. Returns the first failure.
pub fn verify_bisimulation<L1: Lts, L2: Lts>(
    l1: &L1,
    l2: &L2,
    relation: &[(L1::State, L2::State)],
) -> Result<(), String> {
    let rel: BTreeSet<(&L1::State, &L2::State)> = relation.iter().map(|(a, b)| (a, b)).collect();
    for (p, q) in relation {
        let (tp, tq) = (l1.step(p), l2.step(q));
        for t in &tp {
            if !tq.iter().any(|u| u.action == t.action && rel.contains(&(&t.target, &u.target))) {
                return Err(format!("{p:?} --{}--> {:?} is not answered by {q:?}", t.action, t.target));
            }
        }
        for u in &tq {
            if !tp.iter().any(|t| t.action == u.action && rel.contains(&(&t.target, &u.target))) {
                return Err(format!("{q:?} --{}--> {:?} is not answered by {p:?}", u.action, u.target));
            }
        }
    }
    Ok(())
}
