//! Concrete syntax: atoms as S-expressions, and one shared surface
//! grammar for the object languages.
//!
//! ```text
//! program := (ident ':' expr ';')* expr
//! expr    := '\' ident [':' expr] '.' expr | 'Pi' ident ':' expr '.' expr | arrow
//! arrow   := union ['->' arrow]
//! union   := inter ('|' inter)*
//! inter   := app ('&' app)*
//! app     := atom atom*
//! atom    := ident | '(' expr ')' | 'Type' | 'D(' expr ')'
//!          | 'random[' number '](' expr ',' expr ')' | 'sample(' expr ')' | 'thunk(' expr ')'
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::atomspace::{Atom, Keyword, TypeExpr};
use crate::lang::lambda::{Context, SType, Term};
use crate::lang::pdts::{PdtsContext, PdtsExpr, PdtsType};
use crate::lang::pts::{PtsContext, PtsExpr, PtsSpec};
pub use crate::sexpr::{ParseError, SourceSpan};
use crate::sexpr::{read_all, Sexp, SexpKind};

// ---- atoms ----

const TYPE_NAMES: [&str; 5] = ["Type", "TopType", "Top", "Judg", "Exec"];

/// Parses a sequence of atoms. `(! x)` and `(@ x)` set the markers, lists
/// headed by a keyword build that edge, and other lists are curried
/// applications. Arguments in type position are read as types.
pub fn parse_atoms(text: &str) -> Result<Vec<Atom>, ParseError> {
    read_all(text)?.iter().map(sexp_atom).collect()
}

pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    sexp_atom(&crate::sexpr::read_one(text)?)
}

fn sexp_atom(s: &Sexp) -> Result<Atom, ParseError> {
    let items = match &s.kind {
        SexpKind::Symbol(name) => return Ok(leaf(name)),
        SexpKind::List(items) => items,
    };
    let Some(head) = items.first() else {
        return Err(s.error("empty list").expecting(&["atom"]));
    };
    let args = &items[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(s.error(format!("{head} takes {n} argument(s), found {}", args.len())))
        }
    };
    let key = head.symbol().and_then(Keyword::from_token);
    Ok(match key {
        Some(Keyword::At) => {
            arity(1)?;
            sexp_atom(&args[0])?.activated()
        }
        Some(Keyword::Dagger) => {
            arity(1)?;
            sexp_atom(&args[0])?.pointed()
        }
        Some(Keyword::Colon) => {
            arity(2)?;
            Atom::typing(sexp_atom(&args[0])?, type_atom(&args[1])?)
        }
        Some(Keyword::Sub) => {
            arity(2)?;
            Atom::subtype(type_atom(&args[0])?, type_atom(&args[1])?)
        }
        Some(Keyword::Arrow) => {
            arity(2)?;
            Atom::arrow(type_atom(&args[0])?, type_atom(&args[1])?)
        }
        Some(Keyword::Equals) => {
            arity(2)?;
            Atom::equation(sexp_atom(&args[0])?, sexp_atom(&args[1])?)
        }
        Some(Keyword::Eq) => {
            arity(3)?;
            Atom::eq_type(type_atom(&args[0])?, sexp_atom(&args[1])?, sexp_atom(&args[2])?)
        }
        Some(Keyword::Trans) => {
            arity(2)?;
            Atom::trans(sexp_atom(&args[0])?, sexp_atom(&args[1])?)
        }
        Some(Keyword::Funapp) => {
            arity(2)?;
            Atom::app(sexp_atom(&args[0])?, sexp_atom(&args[1])?)
        }
        None => match (head.symbol(), args) {
            (_, []) => return Err(s.error("an application needs an argument").expecting(&["atom"])),
            (Some("Pi" | "|" | "&" | "Distribution"), _) => Atom::ty(sexp_type(s)?),
            _ => {
                let f = sexp_atom(head)?;
                let args = args.iter().map(sexp_atom).collect::<Result<Vec<_>, _>>()?;
                Atom::apps(f, args)
            }
        },
    })
}

fn leaf(name: &str) -> Atom {
    if let Some(v) = name.strip_prefix('$') {
        return Atom::var(v);
    }
    if name == "nul" {
        return Atom::nul();
    }
    if TYPE_NAMES.contains(&name) {
        return Atom::ty(named_type(name));
    }
    Atom::sym(name)
}

fn named_type(name: &str) -> TypeExpr {
    match name {
        "Type" => TypeExpr::Type,
        "TopType" => TypeExpr::TopType,
        "Top" => TypeExpr::Top,
        "Judg" => TypeExpr::Judg,
        "Exec" => TypeExpr::Exec,
        _ => TypeExpr::base(name),
    }
}

/// An argument in type position: a type if it reads as one, otherwise
/// an ordinary atom.
fn type_atom(s: &Sexp) -> Result<Atom, ParseError> {
    let is_marker = s
        .list()
        .and_then(|l| l.first())
        .and_then(Sexp::symbol)
        .is_some_and(|h| matches!(Keyword::from_token(h), Some(Keyword::At | Keyword::Dagger | Keyword::Trans)));
    match sexp_type(s) {
        Ok(t) if !is_marker => Ok(Atom::ty(t)),
        _ => sexp_atom(s),
    }
}

fn sexp_type(s: &Sexp) -> Result<TypeExpr, ParseError> {
    let items = match &s.kind {
        SexpKind::Symbol(name) => {
            return Ok(match name.strip_prefix('$') {
                Some(v) => TypeExpr::var(v),
                None => named_type(name),
            })
        }
        SexpKind::List(items) => items,
    };
    let head = items.first().and_then(Sexp::symbol);
    let bin = |f: fn(TypeExpr, TypeExpr) -> TypeExpr| -> Result<TypeExpr, ParseError> {
        match &items[1..] {
            [a, b] => Ok(f(sexp_type(a)?, sexp_type(b)?)),
            _ => Err(s.error("a binary type takes two arguments")),
        }
    };
    match head {
        Some("->" | "→") => bin(TypeExpr::arrow),
        Some("|") => bin(TypeExpr::union),
        Some("&") => bin(TypeExpr::inter),
        Some("Distribution") => match &items[1..] {
            [a] => Ok(TypeExpr::dist(sexp_type(a)?)),
            _ => Err(s.error("Distribution takes one argument")),
        },
        Some("Pi") => match &items[1..] {
            [v, a, body] => {
                let name = v
                    .symbol()
                    .and_then(|n| n.strip_prefix('$'))
                    .ok_or_else(|| v.error("a product binds a variable").expecting(&["$variable"]))?;
                Ok(TypeExpr::pi(name, sexp_type(a)?, type_atom(body)?))
            }
            _ => Err(s.error("Pi takes a variable, a domain and a body")),
        },
        _ => Err(s.error("not a type")),
    }
}

/// Prints atoms one per line. Application type tags are not printed, so
/// [`parse_atoms`] gives them back with the lenient tag.
pub fn print_atoms(atoms: &[Atom]) -> String {
    atoms.iter().map(|a| format!("{a}\n")).collect()
}

// ---- object languages ----

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Lambda,
    Dot,
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Arrow,
    Bar,
    Amp,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s:?}"),
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Lambda => f.write_str("'\\'"),
            Tok::Dot => f.write_str("'.'"),
            Tok::Colon => f.write_str("':'"),
            Tok::Semi => f.write_str("';'"),
            Tok::Comma => f.write_str("','"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrack => f.write_str("'['"),
            Tok::RBrack => f.write_str("']'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Bar => f.write_str("'|'"),
            Tok::Amp => f.write_str("'&'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut col) = (1, 1);
    let span = |start: usize, end: usize, line: usize, column: usize| SourceSpan {
        start,
        end,
        line,
        column,
    };
    while let Some(&(i, c)) = chars.peek() {
        let (l0, c0) = (line, col);
        let mut advance = |chars: &mut std::iter::Peekable<std::str::CharIndices>| {
            let (_, c) = chars.next().expect("peeked");
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                advance(&mut chars);
            }
            continue;
        }
        let single = match c {
            '\\' | 'λ' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            ':' => Some(Tok::Colon),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '|' | '∪' => Some(Tok::Bar),
            '&' | '∩' => Some(Tok::Amp),
            '→' => Some(Tok::Arrow),
            _ => None,
        };
        if let Some(t) = single {
            advance(&mut chars);
            out.push((t, span(i, i + c.len_utf8(), l0, c0)));
            continue;
        }
        if c == '-' {
            advance(&mut chars);
            if chars.peek().is_some_and(|&(_, c)| c == '>') {
                advance(&mut chars);
                out.push((Tok::Arrow, span(i, i + 2, l0, c0)));
                continue;
            }
            return Err(ParseError::new(span(i, i + 1, l0, c0), "stray '-'").expecting(&["->"]));
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if !(d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E') {
                    break;
                }
                end = j + d.len_utf8();
                advance(&mut chars);
            }
            let lit = &text[i..end];
            let n = lit
                .parse::<f64>()
                .map_err(|_| ParseError::new(span(i, end, l0, c0), format!("bad number {lit:?}")))?;
            out.push((Tok::Num(n), span(i, end, l0, c0)));
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == 'Π' {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if !(d.is_alphanumeric() || d == '_' || d == '\'') {
                    break;
                }
                end = j + d.len_utf8();
                advance(&mut chars);
            }
            let word = &text[i..end];
            let word = if word == "Π" { "Pi" } else { word };
            out.push((Tok::Ident(word.to_string()), span(i, end, l0, c0)));
            continue;
        }
        return Err(ParseError::new(span(i, i + c.len_utf8(), l0, c0), format!("unexpected character {c:?}")));
    }
    out.push((Tok::Eof, span(text.len(), text.len(), line, col)));
    Ok(out)
}

/// Object-language syntax before it is committed to one language.
#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Name(String),
    App(Box<Surface>, Box<Surface>),
    Lam(String, Option<Box<Surface>>, Box<Surface>),
    Pi(String, Box<Surface>, Box<Surface>),
    Arrow(Box<Surface>, Box<Surface>),
    Union(Box<Surface>, Box<Surface>),
    Inter(Box<Surface>, Box<Surface>),
    Dist(Box<Surface>),
    Type,
    Random(f64, Box<Surface>, Box<Surface>),
    Sample(Box<Surface>),
    Thunk(Box<Surface>),
}

/// Declarations followed by a term.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub decls: Vec<(String, Surface)>,
    pub term: Surface,
}

const KEYWORDS: [&str; 6] = ["Pi", "random", "sample", "thunk", "Type", "D"];

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        ParseError::new(self.span(), format!("unexpected {}", self.peek())).expecting(expected)
    }

    fn expect(&mut self, t: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(&[name]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.fail(&["identifier"])),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut decls = Vec::new();
        while matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && *self.peek_at(1) == Tok::Colon
        {
            let x = self.ident()?;
            self.bump();
            let t = self.expr()?;
            self.expect(Tok::Semi, "';'")?;
            decls.push((x, t));
        }
        let term = self.expr()?;
        if *self.peek() != Tok::Eof {
            return Err(self.fail(&["end of input"]));
        }
        Ok(Program { decls, term })
    }

    fn expr(&mut self) -> Result<Surface, ParseError> {
        match self.peek() {
            Tok::Lambda => {
                self.bump();
                let x = self.ident()?;
                let ty = if *self.peek() == Tok::Colon {
                    self.bump();
                    Some(Box::new(self.expr_no_binder()?))
                } else {
                    None
                };
                self.expect(Tok::Dot, "'.'")?;
                Ok(Surface::Lam(x, ty, Box::new(self.expr()?)))
            }
            Tok::Ident(s) if s == "Pi" => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Colon, "':'")?;
                let a = self.expr_no_binder()?;
                self.expect(Tok::Dot, "'.'")?;
                Ok(Surface::Pi(x, Box::new(a), Box::new(self.expr()?)))
            }
            _ => self.arrow(),
        }
    }

    /// A binder's annotation ends at the `.`, so it may not itself end
    /// in a binder body.
    fn expr_no_binder(&mut self) -> Result<Surface, ParseError> {
        match self.peek() {
            Tok::Lambda => Err(self.fail(&["type"])),
            _ => self.expr(),
        }
    }

    fn arrow(&mut self) -> Result<Surface, ParseError> {
        let a = self.union()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let b = match self.peek() {
                Tok::Ident(s) if s == "Pi" => self.expr()?,
                _ => self.arrow()?,
            };
            return Ok(Surface::Arrow(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn union(&mut self) -> Result<Surface, ParseError> {
        let mut a = self.inter()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            a = Surface::Union(Box::new(a), Box::new(self.inter()?));
        }
        Ok(a)
    }

    fn inter(&mut self) -> Result<Surface, ParseError> {
        let mut a = self.app()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            a = Surface::Inter(Box::new(a), Box::new(self.app()?));
        }
        Ok(a)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::LParen => true,
            Tok::Ident(s) => s != "Pi",
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Surface, ParseError> {
        let mut f = self.atom()?;
        while self.starts_atom() || *self.peek() == Tok::Lambda {
            let arg = if *self.peek() == Tok::Lambda { self.expr()? } else { self.atom()? };
            f = Surface::App(Box::new(f), Box::new(arg));
        }
        Ok(f)
    }

    fn paren(&mut self) -> Result<Surface, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        Ok(e)
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        let word = match self.peek() {
            Tok::LParen => return self.paren(),
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.fail(&["identifier", "'('", "'\\'"])),
        };
        match word.as_str() {
            "Type" => {
                self.bump();
                Ok(Surface::Type)
            }
            "D" if *self.peek_at(1) == Tok::LParen => {
                self.bump();
                Ok(Surface::Dist(Box::new(self.paren()?)))
            }
            "sample" => {
                self.bump();
                Ok(Surface::Sample(Box::new(self.paren()?)))
            }
            "thunk" => {
                self.bump();
                Ok(Surface::Thunk(Box::new(self.paren()?)))
            }
            "random" => {
                self.bump();
                self.expect(Tok::LBrack, "'['")?;
                let at = self.span();
                let Tok::Num(p) = self.bump() else {
                    return Err(ParseError::new(at, "expected a probability").expecting(&["number"]));
                };
                if !(0.0..=1.0).contains(&p) {
                    return Err(ParseError::new(at, format!("probability {p} is outside [0, 1]")));
                }
                self.expect(Tok::RBrack, "']'")?;
                self.expect(Tok::LParen, "'('")?;
                let a = self.expr()?;
                self.expect(Tok::Comma, "','")?;
                let b = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Surface::Random(p, Box::new(a), Box::new(b)))
            }
            "D" => {
                self.bump();
                Ok(Surface::Name(word))
            }
            _ => Ok(Surface::Name(self.ident()?)),
        }
    }
}

/// Parses declarations `x : T;` followed by one term.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser { toks: lex(text)?, pos: 0 }.program()
}

/// Parses a single term with no declarations.
pub fn parse_surface(text: &str) -> Result<Surface, ParseError> {
    let p = parse_program(text)?;
    if let Some((x, _)) = p.decls.first() {
        return Err(ParseError::new(SourceSpan::default(), format!("unexpected declaration of {x}")));
    }
    Ok(p.term)
}

/// The construct `s` uses that the target language lacks.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{construct} is not part of {language}")]
pub struct LanguageError {
    pub construct: String,
    pub language: &'static str,
}

fn unsupported<T>(s: &Surface, language: &'static str) -> Result<T, LanguageError> {
    let construct = match s {
        Surface::Pi(..) => "a product",
        Surface::Union(..) => "a union type",
        Surface::Inter(..) => "an intersection type",
        Surface::Dist(_) => "a distribution type",
        Surface::Type => "Type",
        Surface::Random(..) => "random",
        Surface::Sample(_) => "sample",
        Surface::Thunk(_) => "thunk",
        Surface::Arrow(..) => "an arrow in term position",
        Surface::Lam(..) => "a lambda in type position",
        Surface::App(..) => "an application in type position",
        Surface::Name(_) => "a name",
    };
    Err(LanguageError {
        construct: construct.to_string(),
        language,
    })
}

impl Surface {
    pub fn to_stype(&self) -> Result<SType, LanguageError> {
        match self {
            Surface::Name(n) => Ok(SType::base(n.clone())),
            Surface::Arrow(a, b) => Ok(SType::arrow(a.to_stype()?, b.to_stype()?)),
            other => unsupported(other, "simple types"),
        }
    }

    /// A lambda term; binders without annotations give untyped lambdas.
    pub fn to_term(&self) -> Result<Term, LanguageError> {
        match self {
            Surface::Name(x) => Ok(Term::var(x.clone())),
            Surface::App(f, a) => Ok(Term::app(f.to_term()?, a.to_term()?)),
            Surface::Lam(x, t, b) => Ok(Term::Lam(
                x.clone(),
                t.as_deref().map(Surface::to_stype).transpose()?,
                Box::new(b.to_term()?),
            )),
            other => unsupported(other, "the lambda calculus"),
        }
    }

    /// A PTS expression; names `s1 .. sN` are the sorts of `spec`.
    pub fn to_pts(&self, spec: &PtsSpec) -> Result<PtsExpr, LanguageError> {
        let lam = "pure type systems";
        Ok(match self {
            Surface::Name(x) => match x.strip_prefix('s').and_then(|d| d.parse::<usize>().ok()) {
                Some(k) if k >= 1 && k <= spec.sorts => PtsExpr::Sort(k),
                _ => PtsExpr::var(x.clone()),
            },
            Surface::App(f, a) => PtsExpr::app(f.to_pts(spec)?, a.to_pts(spec)?),
            Surface::Lam(x, Some(t), b) => PtsExpr::lam(x.clone(), t.to_pts(spec)?, b.to_pts(spec)?),
            Surface::Lam(_, None, _) => {
                return Err(LanguageError {
                    construct: "an unannotated lambda".into(),
                    language: lam,
                })
            }
            Surface::Pi(x, a, b) => PtsExpr::pi(x.clone(), a.to_pts(spec)?, b.to_pts(spec)?),
            Surface::Arrow(a, b) => PtsExpr::arrow(a.to_pts(spec)?, b.to_pts(spec)?),
            other => return unsupported(other, lam),
        })
    }

    pub fn to_pdts_type(&self) -> Result<PdtsType, LanguageError> {
        let lang = "probabilistic types";
        Ok(match self {
            Surface::Name(n) => PdtsType::base(n.clone()),
            Surface::Type => PdtsType::Type,
            Surface::Arrow(a, b) => PdtsType::arrow(a.to_pdts_type()?, b.to_pdts_type()?),
            Surface::Pi(x, a, b) => PdtsType::pi(x.clone(), a.to_pdts_type()?, b.to_pdts_type()?),
            Surface::Dist(a) => PdtsType::dist(a.to_pdts_type()?),
            Surface::Union(a, b) => PdtsType::union(a.to_pdts_type()?, b.to_pdts_type()?),
            Surface::Inter(a, b) => PdtsType::inter(a.to_pdts_type()?, b.to_pdts_type()?),
            other => return unsupported(other, lang),
        })
    }

    pub fn to_pdts(&self) -> Result<PdtsExpr, LanguageError> {
        let lang = "probabilistic terms";
        Ok(match self {
            Surface::Name(x) => PdtsExpr::var(x.clone()),
            Surface::App(f, a) => PdtsExpr::app(f.to_pdts()?, a.to_pdts()?),
            Surface::Lam(x, Some(t), b) => PdtsExpr::lam(x.clone(), t.to_pdts_type()?, b.to_pdts()?),
            Surface::Random(p, a, b) => PdtsExpr::random(*p, a.to_pdts()?, b.to_pdts()?),
            Surface::Sample(a) => PdtsExpr::sample(a.to_pdts()?),
            Surface::Thunk(a) => PdtsExpr::thunk(a.to_pdts()?),
            other => return unsupported(other, lang),
        })
    }
}

impl Program {
    pub fn stlc_context(&self) -> Result<Context, LanguageError> {
        self.decls.iter().map(|(x, t)| Ok((x.clone(), t.to_stype()?))).collect()
    }

    pub fn pts_context(&self, spec: &PtsSpec) -> Result<PtsContext, LanguageError> {
        self.decls.iter().map(|(x, t)| Ok((x.clone(), t.to_pts(spec)?))).collect()
    }

    pub fn pdts_context(&self) -> Result<PdtsContext, LanguageError> {
        self.decls
            .iter()
            .map(|(x, t)| Ok((x.clone(), t.to_pdts_type()?)))
            .collect::<Result<BTreeMap<_, _>, _>>()
    }
}
