use std::fmt;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::relcore::{GroundSet, RelError, Relation};

/// A lattice term over named relations and atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Symbol(String),
    Meet(Box<Term>, Box<Term>),
    Join(Box<Term>, Box<Term>),
    AtomQ(String, String),
    AtomE(String, String),
}

impl Term {
    pub fn sym(name: impl Into<String>) -> Term {
        Term::Symbol(name.into())
    }

    pub fn q(x: impl Into<String>, y: impl Into<String>) -> Term {
        Term::AtomQ(x.into(), y.into())
    }

    pub fn e(x: impl Into<String>, y: impl Into<String>) -> Term {
        Term::AtomE(x.into(), y.into())
    }

    pub fn meet(self, other: Term) -> Term {
        Term::Meet(Box::new(self), Box::new(other))
    }

    pub fn join(self, other: Term) -> Term {
        Term::Join(Box::new(self), Box::new(other))
    }

    /// Left-associated join of a nonempty list.
    pub fn join_all(terms: impl IntoIterator<Item = Term>) -> Option<Term> {
        terms.into_iter().reduce(Term::join)
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Meet(a, b) | Term::Join(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                leaf => out.push(leaf),
            }
        }
        out
    }

    fn is_binary(&self) -> bool {
        matches!(self, Term::Meet(..) | Term::Join(..))
    }
}

impl fmt::Display for Term {
    /// Operands that are themselves operations are parenthesized unless they
    /// are the left operand of the same operation, so printing never relies on
    /// precedence and parsing the output gives back the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) => f.write_str(s),
            Term::AtomQ(x, y) => write!(f, "q({x},{y})"),
            Term::AtomE(x, y) => write!(f, "e({x},{y})"),
            Term::Meet(a, b) | Term::Join(a, b) => {
                let op = if matches!(self, Term::Meet(..)) { "&" } else { "|" };
                let same = |t: &Term| std::mem::discriminant(t) == std::mem::discriminant(self);
                if a.is_binary() && !same(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {op} ")?;
                if b.is_binary() {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tok<'a> {
    Ident(&'a str),
    Amp,
    Bar,
    LParen,
    RParen,
    Comma,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    EqEq,
    Assign,
    Le,
    Lt,
    Eof,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '\'')
}

/// Recursive-descent parser over one line of text.
///
/// `join := meet ('|' meet)*`, `meet := primary ('&' primary)*`,
/// `primary := q(l,l) | e(l,l) | name | '(' join ')'`.
pub(crate) struct TermParser<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col_offset: usize,
}

impl<'a> TermParser<'a> {
    pub(crate) fn new(text: &'a str, line: usize, col_offset: usize) -> Self {
        TermParser { text, pos: 0, line, col_offset }
    }

    pub(crate) fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let col = self.text[..pos.min(self.text.len())].chars().count() + 1 + self.col_offset;
        ParseError { line: self.line, col, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Returns the next token and its byte offset without consuming it.
    pub(crate) fn peek(&mut self) -> Result<(Tok<'a>, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::Eof, start));
        };
        let tok = match c {
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '=' if rest.starts_with("==") => Tok::EqEq,
            '=' => Tok::Assign,
            '<' if rest.starts_with("<=") => Tok::Le,
            '<' => Tok::Lt,
            c if is_ident_char(c) => {
                let len = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
                Tok::Ident(&rest[..len])
            }
            other => return Err(self.error_at(start, format!("unexpected character `{other}`"))),
        };
        Ok((tok, start))
    }

    pub(crate) fn bump(&mut self) -> Result<(Tok<'a>, usize), ParseError> {
        let (tok, at) = self.peek()?;
        self.pos = at
            + match tok {
                Tok::Ident(s) => s.len(),
                Tok::EqEq | Tok::Le => 2,
                Tok::Eof => 0,
                _ => 1,
            };
        Ok((tok, at))
    }

    pub(crate) fn expect(&mut self, want: Tok<'_>) -> Result<usize, ParseError> {
        let (tok, at) = self.bump()?;
        if tok == want {
            Ok(at)
        } else {
            Err(self.error_at(at, format!("expected {want}, found {tok}")))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.bump()? {
            (Tok::Ident(s), _) => Ok(s),
            (tok, at) => Err(self.error_at(at, format!("expected {what}, found {tok}"))),
        }
    }

    pub(crate) fn offset(&self) -> usize {
        self.pos
    }

    pub(crate) fn set_offset(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub(crate) fn at_end(&mut self) -> Result<bool, ParseError> {
        Ok(self.peek()?.0 == Tok::Eof)
    }

    pub(crate) fn join(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.meet()?;
        while self.peek()?.0 == Tok::Bar {
            self.bump()?;
            acc = acc.join(self.meet()?);
        }
        Ok(acc)
    }

    fn meet(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.primary()?;
        while self.peek()?.0 == Tok::Amp {
            self.bump()?;
            acc = acc.meet(self.primary()?);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.bump()? {
            (Tok::LParen, _) => {
                let t = self.join()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            (Tok::Ident(name), _) => {
                if (name == "q" || name == "e") && self.peek()?.0 == Tok::LParen {
                    self.bump()?;
                    let x = self.ident("a ground label")?.to_string();
                    self.expect(Tok::Comma)?;
                    let y = self.ident("a ground label")?.to_string();
                    self.expect(Tok::RParen)?;
                    Ok(if name == "q" { Term::AtomQ(x, y) } else { Term::AtomE(x, y) })
                } else {
                    Ok(Term::Symbol(name.to_string()))
                }
            }
            (tok, at) => Err(self.error_at(at, format!("expected a term, found {tok}"))),
        }
    }
}

/// Parses a complete term.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = TermParser::new(text, 1, 0);
    let t = p.join()?;
    match p.peek()? {
        (Tok::Eof, _) => Ok(t),
        (tok, at) => Err(p.error_at(at, format!("unexpected {tok} after the term"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error(transparent)]
    Rel(#[from] RelError),
}

/// Named relations over one ground set.
#[derive(Debug, Clone)]
pub struct Env {
    ground: Arc<GroundSet>,
    bindings: FxHashMap<String, Relation>,
}

impl Env {
    pub fn new(ground: &Arc<GroundSet>) -> Self {
        Env { ground: ground.clone(), bindings: FxHashMap::default() }
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    /// Binds `name`, replacing any earlier value.
    pub fn bind(&mut self, name: impl Into<String>, r: Relation) -> Result<(), RelError> {
        if r.ground() != &self.ground {
            return Err(RelError::GroundMismatch);
        }
        self.bindings.insert(name.into(), r);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }
}

/// Bottom-up evaluation; atoms are resolved against the environment's ground set.
pub fn eval_term(term: &Term, env: &Env) -> Result<Relation, EvalError> {
    let g = env.ground();
    Ok(match term {
        Term::Symbol(s) => env.get(s).cloned().ok_or_else(|| EvalError::Unbound(s.clone()))?,
        Term::AtomQ(x, y) => Relation::q_named(g, x, y)?,
        Term::AtomE(x, y) => Relation::e_named(g, x, y)?,
        Term::Meet(a, b) => eval_term(a, env)?.meet(&eval_term(b, env)?)?,
        Term::Join(a, b) => eval_term(a, env)?.join(&eval_term(b, env)?)?,
    })
}
