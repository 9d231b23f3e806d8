//! Type expressions, labels and atom trees.

use std::fmt::{self, Display};

use crate::metagraph::EdgeLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Keyword {
    Colon,
    Sub,
    Equals,
    Arrow,
    Eq,
    Funapp,
    Trans,
    At,
    Dagger,
}

impl Keyword {
    pub const ALL: [Keyword; 9] = [
        Keyword::Colon,
        Keyword::Sub,
        Keyword::Equals,
        Keyword::Arrow,
        Keyword::Eq,
        Keyword::Funapp,
        Keyword::Trans,
        Keyword::At,
        Keyword::Dagger,
    ];

    pub fn arity(self) -> usize {
        match self {
            Keyword::Eq => 3,
            Keyword::At | Keyword::Dagger => 1,
            _ => 2,
        }
    }

    /// ASCII surface token.
    pub fn token(self) -> &'static str {
        match self {
            Keyword::Colon => ":",
            Keyword::Sub => "<=",
            Keyword::Equals => "=",
            Keyword::Arrow => "->",
            Keyword::Eq => "Eq",
            Keyword::Funapp => "funapp",
            Keyword::Trans => "trans",
            Keyword::At => "@",
            Keyword::Dagger => "!",
        }
    }

    pub fn from_token(s: &str) -> Option<Keyword> {
        Some(match s {
            ":" => Keyword::Colon,
            "<=" | "⪯" => Keyword::Sub,
            "=" => Keyword::Equals,
            "->" | "→" => Keyword::Arrow,
            "Eq" => Keyword::Eq,
            "funapp" => Keyword::Funapp,
            "trans" => Keyword::Trans,
            "@" => Keyword::At,
            "!" | "†" => Keyword::Dagger,
            _ => return None,
        })
    }
}

impl Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Base(String),
    /// Schematic variable; matches any type in subtype checks.
    Var(String),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Pi(String, Box<TypeExpr>, Box<Atom>),
    EqT(Box<TypeExpr>, Box<Atom>, Box<Atom>),
    Union(Box<TypeExpr>, Box<TypeExpr>),
    Inter(Box<TypeExpr>, Box<TypeExpr>),
    Dist(Box<TypeExpr>),
    Type,
    TopType,
    Top,
    Judg,
    Exec,
}

impl TypeExpr {
    pub fn base(name: impl Into<String>) -> Self {
        TypeExpr::Base(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        TypeExpr::Var(name.into())
    }

    pub fn arrow(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Arrow(Box::new(a), Box::new(b))
    }

    /// Right-nested arrow `a1 -> a2 -> ... -> r`.
    pub fn arrows(args: Vec<TypeExpr>, result: TypeExpr) -> Self {
        args.into_iter()
            .rev()
            .fold(result, |acc, a| TypeExpr::arrow(a, acc))
    }

    pub fn union(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: TypeExpr, b: TypeExpr) -> Self {
        TypeExpr::Inter(Box::new(a), Box::new(b))
    }

    pub fn dist(a: TypeExpr) -> Self {
        TypeExpr::Dist(Box::new(a))
    }

    pub fn pi(var: impl Into<String>, dom: TypeExpr, body: Atom) -> Self {
        TypeExpr::Pi(var.into(), Box::new(dom), Box::new(body))
    }

    /// Top-level types that only a universe bound can sit above.
    pub fn is_universal(&self) -> bool {
        matches!(self, TypeExpr::Top | TypeExpr::TopType | TypeExpr::Var(_))
    }

    pub fn has_vars(&self) -> bool {
        match self {
            TypeExpr::Var(_) => true,
            TypeExpr::Arrow(a, b) | TypeExpr::Union(a, b) | TypeExpr::Inter(a, b) => {
                a.has_vars() || b.has_vars()
            }
            TypeExpr::Dist(a) => a.has_vars(),
            TypeExpr::Pi(_, a, body) => a.has_vars() || body.has_vars(),
            TypeExpr::EqT(t, a, b) => t.has_vars() || a.has_vars() || b.has_vars(),
            _ => false,
        }
    }

    /// Replaces the variable `name` by `with`.
    pub fn subst(&self, name: &str, with: &Atom) -> TypeExpr {
        let go = |t: &TypeExpr| Box::new(t.subst(name, with));
        match self {
            TypeExpr::Var(v) if v == name => with.as_type().unwrap_or_else(|| self.clone()),
            TypeExpr::Arrow(a, b) => TypeExpr::Arrow(go(a), go(b)),
            TypeExpr::Union(a, b) => TypeExpr::Union(go(a), go(b)),
            TypeExpr::Inter(a, b) => TypeExpr::Inter(go(a), go(b)),
            TypeExpr::Dist(a) => TypeExpr::Dist(go(a)),
            TypeExpr::Pi(v, a, body) if v == name => TypeExpr::Pi(v.clone(), go(a), body.clone()),
            TypeExpr::Pi(v, a, body) => {
                TypeExpr::Pi(v.clone(), go(a), Box::new(body.subst_var(name, with)))
            }
            TypeExpr::EqT(t, a, b) => TypeExpr::EqT(
                go(t),
                Box::new(a.subst_var(name, with)),
                Box::new(b.subst_var(name, with)),
            ),
            _ => self.clone(),
        }
    }
}

impl Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Base(n) => f.write_str(n),
            TypeExpr::Var(v) => write!(f, "${v}"),
            TypeExpr::Arrow(a, b) => write!(f, "(-> {a} {b})"),
            TypeExpr::Pi(v, a, body) => write!(f, "(Pi ${v} {a} {body})"),
            TypeExpr::EqT(t, a, b) => write!(f, "(Eq {t} {a} {b})"),
            TypeExpr::Union(a, b) => write!(f, "(| {a} {b})"),
            TypeExpr::Inter(a, b) => write!(f, "(& {a} {b})"),
            TypeExpr::Dist(a) => write!(f, "(Distribution {a})"),
            TypeExpr::Type => f.write_str("Type"),
            TypeExpr::TopType => f.write_str("TopType"),
            TypeExpr::Top => f.write_str("Top"),
            TypeExpr::Judg => f.write_str("Judg"),
            TypeExpr::Exec => f.write_str("Exec"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Sym(String),
    Var(String),
    Key(Keyword),
    Ty(TypeExpr),
    Nul,
}

impl Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Sym(s) => f.write_str(s),
            Label::Var(v) => write!(f, "${v}"),
            Label::Key(k) => write!(f, "{k}"),
            Label::Ty(t) => write!(f, "{t}"),
            Label::Nul => f.write_str("nul"),
        }
    }
}

/// A label paired with its deduplicating edge id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelTag {
    pub label: Label,
    pub id: u64,
}

impl EdgeLabel for LabelTag {
    fn same_ignoring_id(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

impl Display for LabelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.label, self.id)
    }
}

/// An atom as a tree: a labelled, typed edge over its sub-atoms, with the
/// `@` and `†` markers recorded as flags.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub label: Label,
    pub ty: TypeExpr,
    pub args: Vec<Atom>,
    pub active: bool,
    pub pointed: bool,
}

impl Atom {
    pub fn leaf(label: Label, ty: TypeExpr) -> Self {
        Atom {
            label,
            ty,
            args: Vec::new(),
            active: false,
            pointed: false,
        }
    }

    pub fn node(key: Keyword, ty: TypeExpr, args: Vec<Atom>) -> Self {
        Atom {
            label: Label::Key(key),
            ty,
            args,
            active: false,
            pointed: false,
        }
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Atom::leaf(Label::Sym(name.into()), TypeExpr::TopType)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Atom::leaf(Label::Var(name.into()), TypeExpr::TopType)
    }

    pub fn nul() -> Self {
        Atom::leaf(Label::Nul, TypeExpr::TopType)
    }

    /// A type as an atom. Arrows become `->` edges, variables become
    /// variable leaves, everything else a type-labelled leaf.
    pub fn ty(t: TypeExpr) -> Self {
        match t {
            TypeExpr::Arrow(a, b) => Atom::arrow(Atom::ty(*a), Atom::ty(*b)),
            TypeExpr::Var(v) => Atom::leaf(Label::Var(v), TypeExpr::Type),
            other => Atom::leaf(Label::Ty(other), TypeExpr::Type),
        }
    }

    pub fn arrow(a: Atom, b: Atom) -> Self {
        Atom::node(Keyword::Arrow, TypeExpr::Type, vec![a.in_type_position(), b.in_type_position()])
    }

    pub fn typing(subject: Atom, t: Atom) -> Self {
        Atom::node(Keyword::Colon, TypeExpr::Judg, vec![subject, t.in_type_position()])
    }

    pub fn subtype(a: Atom, b: Atom) -> Self {
        Atom::node(Keyword::Sub, TypeExpr::Judg, vec![a.in_type_position(), b.in_type_position()])
    }

    pub fn equation(lhs: Atom, rhs: Atom) -> Self {
        Atom::node(Keyword::Equals, TypeExpr::Judg, vec![lhs, rhs])
    }

    pub fn eq_type(t: Atom, a: Atom, b: Atom) -> Self {
        Atom::node(Keyword::Eq, TypeExpr::Type, vec![t.in_type_position(), a, b])
    }

    pub fn trans(pattern: Atom, template: Atom) -> Self {
        Atom::node(Keyword::Trans, TypeExpr::Top, vec![pattern, template])
    }

    /// Function application tagged with the lenient result type `⊤_Type`.
    pub fn app(f: Atom, a: Atom) -> Self {
        Atom::node(Keyword::Funapp, TypeExpr::TopType, vec![f, a])
    }

    /// Curried application `f a1 .. an`.
    pub fn apps(f: Atom, args: impl IntoIterator<Item = Atom>) -> Self {
        args.into_iter().fold(f, Atom::app)
    }

    pub fn with_ty(mut self, ty: TypeExpr) -> Self {
        self.ty = ty;
        self
    }

    pub fn activated(mut self) -> Self {
        self.active = true;
        self
    }

    pub fn pointed(mut self) -> Self {
        self.pointed = true;
        self
    }

    fn in_type_position(mut self) -> Self {
        if matches!(self.label, Label::Var(_)) && self.ty == TypeExpr::TopType {
            self.ty = TypeExpr::Type;
        }
        self
    }

    pub fn keyword(&self) -> Option<Keyword> {
        match self.label {
            Label::Key(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_funapp(&self) -> bool {
        self.keyword() == Some(Keyword::Funapp)
    }

    /// Leaf name of a symbol, base type or variable.
    pub fn name(&self) -> Option<&str> {
        match &self.label {
            Label::Sym(s) | Label::Var(s) | Label::Ty(TypeExpr::Base(s)) => Some(s),
            _ => None,
        }
    }

    /// Reads the atom back as a type, if it denotes one.
    pub fn as_type(&self) -> Option<TypeExpr> {
        match (&self.label, self.args.as_slice()) {
            (Label::Ty(t), []) => Some(t.clone()),
            (Label::Var(v), []) => Some(TypeExpr::Var(v.clone())),
            (Label::Sym(s), []) => Some(TypeExpr::Base(s.clone())),
            (Label::Key(Keyword::Arrow), [a, b]) => Some(TypeExpr::arrow(a.as_type()?, b.as_type()?)),
            (Label::Key(Keyword::Funapp), [f, a]) if f.label == Label::Sym("Distribution".into()) => {
                Some(TypeExpr::dist(a.as_type()?))
            }
            _ => None,
        }
    }

    /// Head and arguments of a curried application chain.
    pub fn spine(&self) -> (&Atom, Vec<&Atom>) {
        let mut head = self;
        let mut args = Vec::new();
        while head.is_funapp() {
            args.push(&head.args[1]);
            head = &head.args[0];
        }
        args.reverse();
        (head, args)
    }

    pub fn has_vars(&self) -> bool {
        matches!(self.label, Label::Var(_))
            || matches!(&self.label, Label::Ty(t) if t.has_vars())
            || self.args.iter().any(Atom::has_vars)
    }

    /// Variable names in first-occurrence order.
    pub fn vars(&self) -> Vec<String> {
        fn go(a: &Atom, out: &mut Vec<String>) {
            if let Label::Var(v) = &a.label {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            for c in &a.args {
                go(c, out);
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Substitutes `with` for every leaf variable `name`, keeping the
    /// activation of the replacement.
    pub fn subst_var(&self, name: &str, with: &Atom) -> Atom {
        match &self.label {
            Label::Var(v) if v == name && self.args.is_empty() => {
                let mut out = with.clone();
                out.active |= self.active;
                out
            }
            Label::Ty(t) if t.has_vars() => Atom {
                label: Label::Ty(t.subst(name, with)),
                ..self.clone()
            },
            _ => Atom {
                args: self.args.iter().map(|a| a.subst_var(name, with)).collect(),
                ..self.clone()
            },
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Atom::size).sum::<usize>()
    }

    /// The same atom with markers removed.
    pub fn unmarked(&self) -> Atom {
        Atom {
            label: self.label.clone(),
            ty: self.ty.clone(),
            args: self.args.iter().map(Atom::unmarked).collect(),
            active: false,
            pointed: false,
        }
    }

    /// Structural equality ignoring markers, type tags, and the difference
    /// between a symbol leaf and the base type of the same name.
    pub fn same_subject(&self, other: &Atom) -> bool {
        if self.args.is_empty() && other.args.is_empty() {
            if let (Some(a), Some(b)) = (self.leaf_name(), other.leaf_name()) {
                return a == b;
            }
        }
        self.label == other.label
            && self.args.len() == other.args.len()
            && self.args.iter().zip(&other.args).all(|(a, b)| a.same_subject(b))
    }

    fn leaf_name(&self) -> Option<&str> {
        match &self.label {
            Label::Sym(s) | Label::Ty(TypeExpr::Base(s)) => Some(s),
            _ => None,
        }
    }

    fn fmt_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.label, self.args.as_slice()) {
            (Label::Key(Keyword::Funapp), [_, _]) => {
                // flatten only through unmarked heads so markers survive
                let mut head = self;
                let mut args = Vec::new();
                while head.is_funapp() && (head == self || !(head.active || head.pointed)) {
                    args.push(&head.args[1]);
                    head = &head.args[0];
                }
                args.reverse();
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            (label, []) => write!(f, "{label}"),
            (label, args) => {
                write!(f, "({label}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.pointed, self.active) {
            (true, true) => {
                f.write_str("(! (@ ")?;
                self.fmt_inner(f)?;
                f.write_str("))")
            }
            (true, false) => {
                f.write_str("(! ")?;
                self.fmt_inner(f)?;
                f.write_str(")")
            }
            (false, true) => {
                f.write_str("(@ ")?;
                self.fmt_inner(f)?;
                f.write_str(")")
            }
            (false, false) => self.fmt_inner(f),
        }
    }
}
