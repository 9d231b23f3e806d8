//! The growable subtype relation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::types::{Atom, TypeExpr};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SubtypeError {
    #[error("subtype closure exceeded its budget of {0} pairs")]
    ClosureBudget(usize),
    #[error("subtype query exceeded depth {0}")]
    DepthBudget(usize),
}

pub const DEFAULT_CLOSURE_BUDGET: usize = 100_000;
const MAX_QUERY_DEPTH: usize = 96;

/// Declared pairs plus their transitive closure. Structural rules (the
/// lattice of unions, intersections and the top types, arrow and product
/// variance) are applied at query time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtypeRelation {
    declared: BTreeSet<(TypeExpr, TypeExpr)>,
    above: BTreeMap<TypeExpr, BTreeSet<TypeExpr>>,
    below: BTreeMap<TypeExpr, BTreeSet<TypeExpr>>,
    size: usize,
    budget: usize,
}

impl Default for SubtypeRelation {
    fn default() -> Self {
        SubtypeRelation::with_budget(DEFAULT_CLOSURE_BUDGET)
    }
}

impl SubtypeRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_budget(budget: usize) -> Self {
        SubtypeRelation {
            declared: BTreeSet::new(),
            above: BTreeMap::new(),
            below: BTreeMap::new(),
            size: 0,
            budget,
        }
    }

    pub fn declared(&self) -> impl Iterator<Item = &(TypeExpr, TypeExpr)> {
        self.declared.iter()
    }

    /// Every pair of the transitive closure of the declarations.
    pub fn closure_pairs(&self) -> BTreeSet<(TypeExpr, TypeExpr)> {
        self.above
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    }

    /// Adds `a ⪯ b` and re-closes. Returns whether the closure grew.
    pub fn declare(&mut self, a: TypeExpr, b: TypeExpr) -> Result<bool, SubtypeError> {
        self.declared.insert((a.clone(), b.clone()));
        if a == b {
            return Ok(false);
        }
        let mut lows: Vec<TypeExpr> = self.below.get(&a).into_iter().flatten().cloned().collect();
        lows.push(a.clone());
        let mut highs: Vec<TypeExpr> = self.above.get(&b).into_iter().flatten().cloned().collect();
        highs.push(b.clone());
        let mut grew = false;
        for x in &lows {
            for y in &highs {
                if x == y {
                    continue;
                }
                if self.above.entry(x.clone()).or_default().insert(y.clone()) {
                    self.below.entry(y.clone()).or_default().insert(x.clone());
                    self.size += 1;
                    grew = true;
                    if self.size > self.budget {
                        return Err(SubtypeError::ClosureBudget(self.budget));
                    }
                }
            }
        }
        Ok(grew)
    }

    /// Rebuilds the closure from the declarations alone.
    pub fn reclosed(&self) -> Result<SubtypeRelation, SubtypeError> {
        let mut out = SubtypeRelation::with_budget(self.budget);
        for (a, b) in &self.declared {
            out.declare(a.clone(), b.clone())?;
        }
        Ok(out)
    }

    pub fn is_subtype(&self, a: &TypeExpr, b: &TypeExpr) -> bool {
        self.query(a, b).unwrap_or(false)
    }

    pub fn query(&self, a: &TypeExpr, b: &TypeExpr) -> Result<bool, SubtypeError> {
        self.sub(a, b, 0)
    }

    fn sub(&self, a: &TypeExpr, b: &TypeExpr, depth: usize) -> Result<bool, SubtypeError> {
        use TypeExpr::*;
        if depth > MAX_QUERY_DEPTH {
            return Err(SubtypeError::DepthBudget(MAX_QUERY_DEPTH));
        }
        let d = depth + 1;
        if a == b || matches!(a, Var(_)) || matches!(b, Var(_)) || *b == Top {
            return Ok(true);
        }
        if let Union(x, y) = a {
            return Ok(self.sub(x, b, d)? && self.sub(y, b, d)?);
        }
        if let Inter(x, y) = b {
            return Ok(self.sub(a, x, d)? && self.sub(a, y, d)?);
        }
        if *b == TopType && !matches!(a, Top | Judg | Exec | Inter(..)) {
            return Ok(true);
        }
        if let Inter(x, y) = a {
            if self.sub(x, b, d)? || self.sub(y, b, d)? {
                return Ok(true);
            }
        }
        if let Union(x, y) = b {
            if self.sub(a, x, d)? || self.sub(a, y, d)? {
                return Ok(true);
            }
        }
        let structural = match (a, b) {
            (Arrow(a1, a2), Arrow(b1, b2)) => self.sub(b1, a1, d)? && self.sub(a2, b2, d)?,
            (Dist(x), Dist(y)) => self.sub(x, y, d)?,
            (Pi(v, da, ba), Pi(w, db, bb)) => {
                self.sub(db, da, d)? && {
                    let bb = bb.subst_var(w, &Atom::var(v.clone()));
                    match (ba.as_type(), bb.as_type()) {
                        (Some(ta), Some(tb)) => self.sub(&ta, &tb, d)?,
                        _ => ba.unmarked() == bb.unmarked(),
                    }
                }
            }
            _ => false,
        };
        if structural {
            return Ok(true);
        }
        if let Some(ups) = self.above.get(a) {
            for c in ups {
                if c == b || self.sub(c, b, d)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}
