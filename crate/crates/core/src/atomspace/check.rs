//! The atomspace constraint checker.

use std::fmt;

use super::types::{Atom, Keyword, Label, TypeExpr};
use super::{Atomspace, Node, NodeId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MViolation {
    Arity {
        node: NodeId,
        label: Label,
        expected: usize,
        found: usize,
    },
    Tag {
        node: NodeId,
        expected: TypeExpr,
        found: TypeExpr,
    },
    Slot {
        node: NodeId,
        slot: usize,
        expected: TypeExpr,
        found: TypeExpr,
    },
    /// A `⪯` judgment between types missing from the relation.
    Undeclared { node: NodeId, lower: TypeExpr, upper: TypeExpr },
    /// An application whose function type does not fit its arguments or
    /// its result tag.
    Funapp {
        node: NodeId,
        function: Vec<TypeExpr>,
        result: TypeExpr,
    },
    /// A typed subject whose tag is not below its declared type.
    Typing {
        node: NodeId,
        tag: TypeExpr,
        declared: TypeExpr,
    },
    /// A marker on a node that does not exist.
    DanglingMarker { node: NodeId },
}

impl fmt::Display for MViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MViolation::Arity {
                node,
                label,
                expected,
                found,
            } => write!(f, "edge {node} ({label}) has {found} targets, expected {expected}"),
            MViolation::Tag {
                node,
                expected,
                found,
            } => write!(f, "edge {node} is typed {found}, expected {expected}"),
            MViolation::Slot {
                node,
                slot,
                expected,
                found,
            } => write!(f, "target {slot} of edge {node} has type {found}, not below {expected}"),
            MViolation::Undeclared { node, lower, upper } => {
                write!(f, "edge {node} asserts {lower} <= {upper} outside the relation")
            }
            MViolation::Funapp {
                node,
                function,
                result,
            } => {
                let fs: Vec<String> = function.iter().map(|t| t.to_string()).collect();
                write!(f, "application {node} typed {result} does not fit function type {}", fs.join(" | "))
            }
            MViolation::Typing { node, tag, declared } => {
                write!(f, "subject of {node} is tagged {tag}, not below declared {declared}")
            }
            MViolation::DanglingMarker { node } => write!(f, "marker on missing edge {node}"),
        }
    }
}

/// Target types of the edge for `node`.
pub(super) fn slot_types(space: &Atomspace, node: &Node) -> Vec<TypeExpr> {
    use TypeExpr::*;
    let child_tags = || node.args.iter().map(|c| space.nodes[c].ty.clone()).collect();
    match node.label {
        Label::Key(k) if node.args.len() == k.arity() => match k {
            Keyword::Colon => vec![TopType, Top],
            Keyword::Sub => vec![Type, Type],
            Keyword::Equals => vec![TopType, TopType],
            Keyword::Arrow => vec![Type, Type],
            Keyword::Eq => vec![Type, Top, Top],
            Keyword::Trans => vec![Top, Top],
            Keyword::At | Keyword::Dagger => vec![Top],
            Keyword::Funapp => child_tags(),
        },
        _ => child_tags(),
    }
}

fn expected_tag(k: Keyword) -> Option<TypeExpr> {
    match k {
        Keyword::Colon | Keyword::Sub | Keyword::Equals => Some(TypeExpr::Judg),
        Keyword::Arrow | Keyword::Eq => Some(TypeExpr::Type),
        Keyword::Trans => Some(TypeExpr::Top),
        Keyword::At | Keyword::Dagger => Some(TypeExpr::Exec),
        Keyword::Funapp => None,
    }
}

/// Types known for a node: declared through `:` atoms plus its tag when
/// the tag is informative. Variables are unconstrained.
pub(super) fn known_types(space: &Atomspace, id: NodeId) -> Vec<TypeExpr> {
    let node = &space.nodes[&id];
    if matches!(node.label, Label::Var(_)) {
        return Vec::new();
    }
    let atom = space.atom(id);
    let mut out = space.declared_types(&atom);
    if !matches!(node.ty, TypeExpr::TopType | TypeExpr::Top) && !out.contains(&node.ty) {
        out.push(node.ty.clone());
    }
    out
}

/// Checks every edge of the space against the legal shapes and typing side
/// conditions. An empty result means the space is valid.
pub fn check_mconstraints(space: &Atomspace) -> Vec<MViolation> {
    let mut out = Vec::new();
    for (&id, node) in &space.nodes {
        check_node(space, id, node, &mut out);
    }
    for id in space.active.keys().chain(space.pointer.iter()) {
        if !space.nodes.contains_key(id) {
            out.push(MViolation::DanglingMarker { node: *id });
        }
    }
    out
}

fn check_node(space: &Atomspace, id: NodeId, node: &Node, out: &mut Vec<MViolation>) {
    let expected_arity = match &node.label {
        Label::Key(k) => k.arity(),
        _ => 0,
    };
    if node.args.len() != expected_arity {
        out.push(MViolation::Arity {
            node: id,
            label: node.label.clone(),
            expected: expected_arity,
            found: node.args.len(),
        });
        return;
    }
    match &node.label {
        Label::Key(Keyword::At | Keyword::Dagger) => {
            // markers are separate edges, never tree nodes
            out.push(MViolation::Arity {
                node: id,
                label: node.label.clone(),
                expected: 0,
                found: node.args.len(),
            });
            return;
        }
        Label::Key(k) => {
            if let Some(t) = expected_tag(*k) {
                if node.ty != t {
                    out.push(MViolation::Tag {
                        node: id,
                        expected: t,
                        found: node.ty.clone(),
                    });
                }
            }
        }
        Label::Ty(_) => {
            if node.ty != TypeExpr::Type {
                out.push(MViolation::Tag {
                    node: id,
                    expected: TypeExpr::Type,
                    found: node.ty.clone(),
                });
            }
        }
        _ => {}
    }
    for (i, (slot, &c)) in slot_types(space, node).into_iter().zip(&node.args).enumerate() {
        let found = &space.nodes[&c].ty;
        if !space.is_subtype(found, &slot) {
            out.push(MViolation::Slot {
                node: id,
                slot: i + 1,
                expected: slot,
                found: found.clone(),
            });
        }
    }
    match node.label {
        Label::Key(Keyword::Sub) => {
            let a = space.atom(node.args[0]).as_type();
            let b = space.atom(node.args[1]).as_type();
            if let (Some(a), Some(b)) = (a, b) {
                if !a.has_vars() && !b.has_vars() && !space.is_subtype(&a, &b) {
                    out.push(MViolation::Undeclared {
                        node: id,
                        lower: a,
                        upper: b,
                    });
                }
            }
        }
        Label::Key(Keyword::Colon) => {
            let subject = &space.nodes[&node.args[0]];
            let informative = !matches!(
                subject.ty,
                TypeExpr::TopType | TypeExpr::Top | TypeExpr::Type | TypeExpr::Judg
            );
            if informative {
                if let Some(declared) = space.atom(node.args[1]).as_type() {
                    if !space.is_subtype(&subject.ty, &declared) {
                        out.push(MViolation::Typing {
                            node: id,
                            tag: subject.ty.clone(),
                            declared,
                        });
                    }
                }
            }
        }
        Label::Key(Keyword::Eq) => {
            if space.atom(node.args[0]).as_type().is_none() {
                out.push(MViolation::Slot {
                    node: id,
                    slot: 1,
                    expected: TypeExpr::Type,
                    found: space.nodes[&node.args[0]].ty.clone(),
                });
            }
        }
        Label::Key(Keyword::Funapp) => {
            if !funapp_fits(space, node) {
                out.push(MViolation::Funapp {
                    node: id,
                    function: known_types(space, node.args[0]),
                    result: node.ty.clone(),
                });
            }
        }
        _ => {}
    }
}

fn funapp_fits(space: &Atomspace, node: &Node) -> bool {
    let (f, a) = (node.args[0], node.args[1]);
    let ftypes = known_types(space, f);
    if ftypes.is_empty() || ftypes.iter().any(TypeExpr::is_universal) {
        return true;
    }
    let atypes = known_types(space, a);
    let arg_fits = |dom: &TypeExpr| {
        atypes.is_empty()
            || dom.has_vars()
            || atypes.iter().any(|t| space.is_subtype(t, dom))
    };
    ftypes.iter().any(|ft| match ft {
        TypeExpr::Arrow(dom, cod) => space.is_subtype(cod, &node.ty) && arg_fits(dom),
        TypeExpr::Pi(v, _, body) => {
            let arg: Atom = space.atom(a).unmarked();
            match body.subst_var(v, &arg).as_type() {
                Some(r) => space.is_subtype(&r, &node.ty),
                None => true,
            }
        }
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: &str) -> TypeExpr {
        TypeExpr::base(n)
    }

    fn fn_space(result_below: bool) -> Atomspace {
        let mut atoms = vec![
            Atom::typing(Atom::sym("f"), Atom::ty(TypeExpr::arrow(b("A"), b("Bp")))),
            Atom::typing(Atom::sym("a"), Atom::ty(b("A"))),
        ];
        if result_below {
            atoms.push(Atom::subtype(Atom::ty(b("Bp")), Atom::ty(b("B"))));
        }
        let mut s = Atomspace::new();
        for a in atoms {
            s.push_atom(a).unwrap();
        }
        s.push_atom(Atom::app(Atom::sym("f"), Atom::sym("a")).with_ty(b("B")))
            .unwrap();
        s
    }

    #[test]
    fn funapp_result_must_be_below_tag() {
        assert!(check_mconstraints(&fn_space(true)).is_empty());
        let v = check_mconstraints(&fn_space(false));
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], MViolation::Funapp { .. }));
    }

    #[test]
    fn empty_space_is_valid() {
        assert!(check_mconstraints(&Atomspace::new()).is_empty());
    }

    #[test]
    fn argument_must_fit_domain() {
        let mut s = Atomspace::new();
        s.push_atom(Atom::typing(Atom::sym("f"), Atom::ty(TypeExpr::arrow(b("A"), b("A")))))
            .unwrap();
        s.push_atom(Atom::typing(Atom::sym("c"), Atom::ty(b("C")))).unwrap();
        s.push_atom(Atom::app(Atom::sym("f"), Atom::sym("c"))).unwrap();
        assert!(matches!(
            check_mconstraints(&s).as_slice(),
            [MViolation::Funapp { .. }]
        ));
    }

    #[test]
    fn wrong_keyword_tag() {
        let mut s = Atomspace::new();
        s.push_atom(Atom::typing(Atom::sym("x"), Atom::ty(b("A"))).with_ty(TypeExpr::Type))
            .unwrap();
        assert!(matches!(check_mconstraints(&s).as_slice(), [MViolation::Tag { .. }]));
    }

    #[test]
    fn judgment_cannot_sit_in_a_type_slot() {
        let mut s = Atomspace::new();
        let judg = Atom::typing(Atom::sym("x"), Atom::ty(b("A")));
        s.push_atom(Atom::node(Keyword::Arrow, TypeExpr::Type, vec![judg, Atom::ty(b("A"))]))
            .unwrap();
        assert!(matches!(
            check_mconstraints(&s).as_slice(),
            [MViolation::Slot { slot: 1, .. }]
        ));
    }

    #[test]
    fn polymorphic_declarations_are_lenient() {
        let mut s = Atomspace::new();
        let t1 = TypeExpr::var("t1");
        s.push_atom(Atom::typing(Atom::sym("id"), Atom::ty(TypeExpr::arrow(t1.clone(), t1))))
            .unwrap();
        s.push_atom(Atom::typing(Atom::sym("a"), Atom::ty(b("A")))).unwrap();
        s.push_atom(Atom::app(Atom::sym("id"), Atom::sym("a")).with_ty(b("A")))
            .unwrap();
        assert!(check_mconstraints(&s).is_empty());
    }
}
