//! Atomspaces: typed metagraphs over keyword, symbol, variable and type
//! labels, with a growable subtype relation and the `@`/`†` execution
//! markers.
//!
//! Atoms are stored as trees of nodes keyed by edge id. A node's children
//! are its targets; markers are separate edges pointing at a node.

mod check;
mod subtype;
mod types;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metagraph::{Metagraph, Wiring};

pub use check::{check_mconstraints, MViolation};
pub use subtype::{SubtypeError, SubtypeRelation, DEFAULT_CLOSURE_BUDGET};
pub use types::{Atom, Keyword, Label, LabelTag, TypeExpr};

pub type NodeId = u64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub label: Label,
    pub ty: TypeExpr,
    pub args: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AtomspaceError {
    #[error("a second † marker was added")]
    SecondPointer,
    #[error("atom breaks the atomspace constraints: {}", join(.0))]
    Violations(Vec<MViolation>),
    #[error(transparent)]
    Subtype(#[from] SubtypeError),
}

fn join(v: &[MViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Whole-space metagraph export.
pub type SpaceGraph = Metagraph<TypeExpr, LabelTag>;

#[derive(Clone, Debug, Default)]
pub struct Atomspace {
    nodes: BTreeMap<NodeId, Node>,
    roots: Vec<NodeId>,
    /// Activated node -> edge id of its `@` marker.
    active: BTreeMap<NodeId, u64>,
    pointer: Option<NodeId>,
    subtypes: SubtypeRelation,
    next_id: u64,
    next_sym: u64,
}

impl Atomspace {
    pub fn new() -> Self {
        Atomspace {
            next_id: 1,
            next_sym: 1,
            ..Default::default()
        }
    }

    pub fn with_closure_budget(budget: usize) -> Self {
        Atomspace {
            subtypes: SubtypeRelation::with_budget(budget),
            ..Atomspace::new()
        }
    }

    /// Returns a new space containing `atom` as a disjoint sub-atom, checked
    /// against the atomspace constraints.
    pub fn add_atom(&self, atom: Atom) -> Result<Atomspace, AtomspaceError> {
        let mut out = self.clone();
        out.push_atom(atom)?;
        let violations = check_mconstraints(&out);
        if !violations.is_empty() {
            return Err(AtomspaceError::Violations(violations));
        }
        Ok(out)
    }

    /// Adds several atoms, checking once at the end.
    pub fn add_atoms(&self, atoms: impl IntoIterator<Item = Atom>) -> Result<Atomspace, AtomspaceError> {
        let mut out = self.clone();
        for a in atoms {
            out.push_atom(a)?;
        }
        let violations = check_mconstraints(&out);
        if !violations.is_empty() {
            return Err(AtomspaceError::Violations(violations));
        }
        Ok(out)
    }

    /// In-place insertion without the constraint check. Subtype judgments
    /// still extend the relation.
    pub fn push_atom(&mut self, atom: Atom) -> Result<NodeId, AtomspaceError> {
        if self.pointer.is_some() && count_pointers(&atom) > 0 || count_pointers(&atom) > 1 {
            return Err(AtomspaceError::SecondPointer);
        }
        self.declare_subtypes(&atom)?;
        let id = self.insert_tree(&atom);
        self.roots.push(id);
        Ok(id)
    }

    fn declare_subtypes(&mut self, atom: &Atom) -> Result<(), SubtypeError> {
        if atom.keyword() == Some(Keyword::Sub) && atom.args.len() == 2 {
            if let (Some(a), Some(b)) = (atom.args[0].as_type(), atom.args[1].as_type()) {
                if !a.has_vars() && !b.has_vars() {
                    self.subtypes.declare(a, b)?;
                }
            }
        }
        for c in &atom.args {
            self.declare_subtypes(c)?;
        }
        Ok(())
    }

    /// Inserts the nodes of `atom` (fresh ids, markers included) without
    /// linking them anywhere.
    pub fn insert_tree(&mut self, atom: &Atom) -> NodeId {
        let args = atom.args.iter().map(|a| self.insert_tree(a)).collect();
        let id = self.fresh_edge_id();
        if let Label::Sym(s) = &atom.label {
            self.bump_symbol_counter(s);
        }
        self.nodes.insert(
            id,
            Node {
                label: atom.label.clone(),
                ty: atom.ty.clone(),
                args,
            },
        );
        if atom.active {
            let mid = self.fresh_edge_id();
            self.active.insert(id, mid);
        }
        if atom.pointed {
            self.pointer = Some(id);
        }
        id
    }

    fn bump_symbol_counter(&mut self, s: &str) {
        if let Some(n) = s.strip_prefix('s').and_then(|d| d.parse::<u64>().ok()) {
            self.next_sym = self.next_sym.max(n + 1);
        }
    }

    pub fn fresh_edge_id(&mut self) -> u64 {
        let id = self.next_id.max(1);
        self.next_id = id + 1;
        id
    }

    /// An unused symbol name `s<n>`; successive calls are strictly increasing.
    pub fn fresh_symbol(&mut self) -> String {
        let n = self.next_sym.max(1);
        self.next_sym = n + 1;
        format!("s{n}")
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().map(|(&k, v)| (k, v))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edge count of the exported metagraph: nodes plus markers.
    pub fn edge_count(&self) -> usize {
        self.nodes.len() + self.active.len() + usize::from(self.pointer.is_some())
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn pointer(&self) -> Option<NodeId> {
        self.pointer
    }

    pub fn set_pointer(&mut self, target: Option<NodeId>) {
        self.pointer = target;
    }

    pub fn is_active(&self, id: NodeId) -> bool {
        self.active.contains_key(&id)
    }

    pub fn activated(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.active.keys().copied()
    }

    pub fn activate(&mut self, id: NodeId) {
        if !self.active.contains_key(&id) {
            let mid = self.fresh_edge_id();
            self.active.insert(id, mid);
        }
    }

    pub fn deactivate(&mut self, id: NodeId) {
        self.active.remove(&id);
    }

    pub fn subtypes(&self) -> &SubtypeRelation {
        &self.subtypes
    }

    /// The parent of `id` and the slot it occupies, or `None` for roots.
    pub fn parent(&self, id: NodeId) -> Option<(NodeId, usize)> {
        self.nodes.iter().find_map(|(&p, n)| {
            n.args.iter().position(|&c| c == id).map(|slot| (p, slot))
        })
    }

    /// The root whose tree contains `id`.
    pub fn root_of(&self, id: NodeId) -> NodeId {
        let mut cur = id;
        while let Some((p, _)) = self.parent(cur) {
            cur = p;
        }
        cur
    }

    /// Ids of the subtree under `id`, pre-order.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            if let Some(node) = self.nodes.get(&n) {
                stack.extend(node.args.iter().rev());
            }
        }
        out
    }

    /// Rebuilds the tree rooted at `id`.
    pub fn atom(&self, id: NodeId) -> Atom {
        let node = &self.nodes[&id];
        Atom {
            label: node.label.clone(),
            ty: node.ty.clone(),
            args: node.args.iter().map(|&c| self.atom(c)).collect(),
            active: self.active.contains_key(&id),
            pointed: self.pointer == Some(id),
        }
    }

    pub fn root_atoms(&self) -> Vec<Atom> {
        self.roots.iter().map(|&r| self.atom(r)).collect()
    }

    /// Deletes the subtree at `id` together with its markers. A root is
    /// removed from the root list; an inner node is detached from its
    /// parent's slot by `replace`.
    fn delete_subtree(&mut self, id: NodeId) {
        for n in self.subtree(id) {
            self.nodes.remove(&n);
            self.active.remove(&n);
            if self.pointer == Some(n) {
                self.pointer = None;
            }
        }
    }

    pub fn remove_root(&mut self, id: NodeId) {
        self.roots.retain(|&r| r != id);
        self.delete_subtree(id);
    }

    /// Replaces the subtree at `old` by a fresh copy of `with`, returning
    /// the id of the new subtree.
    pub fn replace(&mut self, old: NodeId, with: &Atom) -> NodeId {
        let parent = self.parent(old);
        let new = self.insert_tree(with);
        match parent {
            Some((p, slot)) => self.nodes.get_mut(&p).expect("parent exists").args[slot] = new,
            None => {
                if let Some(r) = self.roots.iter_mut().find(|r| **r == old) {
                    *r = new;
                }
            }
        }
        self.delete_subtree(old);
        new
    }

    pub fn subtype_query(&self, a: &TypeExpr, b: &TypeExpr) -> Result<bool, SubtypeError> {
        self.subtypes.query(a, b)
    }

    pub fn is_subtype(&self, a: &TypeExpr, b: &TypeExpr) -> bool {
        self.subtypes.is_subtype(a, b)
    }

    /// Types declared for `subject` by top-level `:` atoms.
    pub fn declared_types(&self, subject: &Atom) -> Vec<TypeExpr> {
        self.roots
            .iter()
            .filter_map(|&r| {
                let n = &self.nodes[&r];
                (n.label == Label::Key(Keyword::Colon) && n.args.len() == 2).then_some(n)
            })
            .filter(|n| self.atom(n.args[0]).same_subject(subject))
            .filter_map(|n| self.atom(n.args[1]).as_type())
            .collect()
    }

    /// Whether `subject` has type `t`: through a `:` atom whose type is
    /// below `t`, or through its own type tag.
    pub fn typing_query(&self, subject: &Atom, t: &TypeExpr) -> bool {
        if subject.ty != TypeExpr::TopType && self.is_subtype(&subject.ty, t) {
            return true;
        }
        if *t == TypeExpr::Top || *t == TypeExpr::TopType && self.is_subtype(&subject.ty, t) {
            return true;
        }
        self.declared_types(subject)
            .iter()
            .any(|d| !d.has_vars() && self.is_subtype(d, t))
    }

    /// Top-level equations as (lhs, rhs) node ids, in root order.
    pub fn equations(&self) -> Vec<(NodeId, NodeId)> {
        self.roots
            .iter()
            .filter_map(|&r| {
                let n = &self.nodes[&r];
                (n.label == Label::Key(Keyword::Equals) && n.args.len() == 2)
                    .then(|| (n.args[0], n.args[1]))
            })
            .collect()
    }

    /// Adds tuple and projection atoms.
    pub fn prelude_tuples(&self) -> Atomspace {
        self.add_atoms(prelude_atoms())
            .expect("the tuple prelude satisfies the atomspace constraints")
    }

    /// Root atoms in sorted order; equal for spaces that differ only in
    /// edge ids and root order.
    pub fn canonical(&self) -> Vec<Atom> {
        let mut atoms = self.root_atoms();
        atoms.sort();
        atoms
    }

    /// Hex SHA-256 of the canonical form.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for a in self.canonical() {
            h.update(format!("{a:?}\n").as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Exports the space as a typed metagraph. Each node becomes an edge
    /// whose targets are fed by its children; markers wrap their target.
    pub fn to_metagraph(&self) -> SpaceGraph {
        self.roots
            .iter()
            .map(|&r| self.node_graph(r))
            .reduce(|acc, g| Metagraph::Connect {
                left: Arc::new(acc),
                right: Arc::new(g),
                whole_type: TypeExpr::Top,
                label: tag(Label::Nul, 0),
                wiring: Wiring::new(),
            })
            .unwrap_or(Metagraph::Empty)
    }

    fn node_graph(&self, id: NodeId) -> SpaceGraph {
        let node = &self.nodes[&id];
        let slots = check::slot_types(self, node);
        let k = node.args.len();
        let mut g = Metagraph::Edge {
            edge_type: node.ty.clone(),
            label: tag(node.label.clone(), id),
            targets: slots,
        };
        for (i, &c) in node.args.iter().enumerate().rev() {
            let slot = i + 1;
            // the edge sits under k - slot right branches of this layer
            let position = slot << (k - slot);
            g = Metagraph::Connect {
                left: Arc::new(self.node_graph(c)),
                right: Arc::new(g),
                whole_type: node.ty.clone(),
                label: tag(Label::Nul, 0),
                wiring: Wiring::from_pairs([(0, position)]),
            };
        }
        if let Some(&mid) = self.active.get(&id) {
            g = wrap_marker(g, node.ty.clone(), Keyword::At, mid);
        }
        if self.pointer == Some(id) {
            g = wrap_marker(g, node.ty.clone(), Keyword::Dagger, 0);
        }
        g
    }
}

fn tag(label: Label, id: u64) -> LabelTag {
    LabelTag { label, id }
}

fn wrap_marker(g: SpaceGraph, ty: TypeExpr, key: Keyword, id: u64) -> SpaceGraph {
    Metagraph::Connect {
        left: Arc::new(g),
        right: Arc::new(Metagraph::Edge {
            edge_type: TypeExpr::Exec,
            label: tag(Label::Key(key), id),
            targets: vec![TypeExpr::Top],
        }),
        whole_type: ty,
        label: tag(Label::Nul, 0),
        wiring: Wiring::from_pairs([(0, 1)]),
    }
}

fn count_pointers(a: &Atom) -> usize {
    usize::from(a.pointed) + a.args.iter().map(count_pointers).sum::<usize>()
}

impl PartialEq for Atomspace {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for Atomspace {}

impl fmt::Display for Atomspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.root_atoms() {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Names used by the tuple prelude.
pub const TUPLE: &str = "tuple";
pub const TUPLE_DEP: &str = "tuple'";
pub const PROJ1: &str = "pi1";
pub const PROJ2: &str = "pi2";

fn prelude_atoms() -> Vec<Atom> {
    use TypeExpr as T;
    let var = T::var;
    // tuple : Pi A:Type. Pi B:Type. A -> B -> Type
    let tuple_ty = T::pi(
        "A",
        T::Type,
        Atom::ty(T::pi(
            "B",
            T::Type,
            Atom::ty(T::arrows(vec![var("A"), var("B")], T::Type)),
        )),
    );
    // tuple' : Pi A:Type. Pi B:(A -> Type). Pi a:A. B(a) -> Type
    let dep_ty = T::pi(
        "A",
        T::Type,
        Atom::ty(T::pi(
            "B",
            T::arrow(var("A"), T::Type),
            Atom::ty(T::pi(
                "a",
                var("A"),
                Atom::arrow(
                    Atom::app(Atom::var("B"), Atom::var("a")).with_ty(T::Type),
                    Atom::ty(T::Type),
                ),
            )),
        )),
    );
    let proj_ty = T::arrow(T::TopType, T::TopType);
    let tup = |args: [&str; 4]| {
        Atom::apps(Atom::sym(TUPLE), args.into_iter().map(Atom::var))
    };
    vec![
        Atom::typing(Atom::sym(TUPLE), Atom::ty(tuple_ty)),
        Atom::typing(Atom::sym(TUPLE_DEP), Atom::ty(dep_ty)),
        Atom::typing(Atom::sym(PROJ1), Atom::ty(proj_ty.clone())),
        Atom::typing(Atom::sym(PROJ2), Atom::ty(proj_ty)),
        Atom::equation(
            Atom::app(Atom::sym(PROJ1), tup(["A", "B", "a", "b"])),
            Atom::var("a"),
        ),
        Atom::equation(
            Atom::app(Atom::sym(PROJ2), tup(["A", "B", "a", "b"])),
            Atom::var("b"),
        ),
    ]
}
