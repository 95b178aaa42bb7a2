use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::term::{ParseError, Term, TermParser, Tok};
use crate::genclose::StepKind;
use crate::relcore::GroundSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidationMode {
    Exhaustive,
    SmallKValidated,
    Trusted,
}

impl fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationMode::Exhaustive => "exhaustive",
            ValidationMode::SmallKValidated => "small-k-validated",
            ValidationMode::Trusted => "trusted",
        })
    }
}

impl FromStr for ValidationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exhaustive" => Ok(ValidationMode::Exhaustive),
            "small-k-validated" => Ok(ValidationMode::SmallKValidated),
            "trusted" => Ok(ValidationMode::Trusted),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// A cited lemma together with its instance parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lemma {
    /// The five Zádori relations, bound as `alpha beta gamma eps0 eta`, generate
    /// the equivalences supported on `a0..ak, b0..b{k-1}`.
    Zadori { k: usize },
    /// All equivalences plus a non-symmetric `rho` generate every quasiorder.
    Kulin { rho: String },
}

impl Lemma {
    pub fn id(&self) -> &'static str {
        match self {
            Lemma::Zadori { .. } => "zadori-3.2",
            Lemma::Kulin { .. } => "kulin-2.4",
        }
    }
}

/// One step of a path in a `dpp` statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLit {
    pub kind: StepKind,
    pub from: String,
    pub to: String,
}

impl fmt::Display for PathLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Define {
        name: String,
        term: Term,
    },
    AssertEq(Term, Term),
    AssertLeq(Term, Term),
    /// `derive q(x,y) = term`: the term evaluates to the atom.
    AssertAtom {
        kind: StepKind,
        x: String,
        y: String,
        term: Term,
    },
    AssertBlocks {
        term: Term,
        blocks: Vec<Vec<String>>,
        order: Option<Vec<(Vec<String>, Vec<String>)>>,
    },
    AssertDpp {
        x: String,
        y: String,
        path1: Vec<PathLit>,
        path2: Vec<PathLit>,
    },
    Cite {
        lemma: Lemma,
        mode: ValidationMode,
    },
}

impl Statement {
    pub fn kind(&self) -> &'static str {
        match self {
            Statement::Define { .. } => "let",
            Statement::AssertEq(..) => "assert-eq",
            Statement::AssertLeq(..) => "assert-leq",
            Statement::AssertAtom { .. } => "derive",
            Statement::AssertBlocks { .. } => "assert-blocks",
            Statement::AssertDpp { .. } => "dpp",
            Statement::Cite { .. } => "cite",
        }
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, block: &[String]) -> fmt::Result {
    write!(f, "{{{}}}", block.join(" "))
}

fn write_path(f: &mut fmt::Formatter<'_>, path: &[PathLit]) -> fmt::Result {
    let items: Vec<String> = path.iter().map(ToString::to_string).collect();
    write!(f, "[{}]", items.join(", "))
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Define { name, term } => write!(f, "let {name} = {term}"),
            Statement::AssertEq(a, b) => write!(f, "assert {a} == {b}"),
            Statement::AssertLeq(a, b) => write!(f, "assert {a} <= {b}"),
            Statement::AssertAtom { kind, x, y, term } => write!(f, "derive {kind}({x},{y}) = {term}"),
            Statement::AssertBlocks { term, blocks, order } => {
                write!(f, "assert blocks({term}) ==")?;
                for b in blocks {
                    f.write_str(" ")?;
                    write_block(f, b)?;
                }
                if let Some(order) = order {
                    f.write_str(" order")?;
                    for (i, (lo, hi)) in order.iter().enumerate() {
                        f.write_str(if i == 0 { " " } else { ", " })?;
                        write_block(f, lo)?;
                        f.write_str(" < ")?;
                        write_block(f, hi)?;
                    }
                }
                Ok(())
            }
            Statement::AssertDpp { x, y, path1, path2 } => {
                write!(f, "dpp q({x},{y}) via ")?;
                write_path(f, path1)?;
                f.write_str(" and ")?;
                write_path(f, path2)
            }
            Statement::Cite { lemma, mode } => match lemma {
                Lemma::Zadori { k } => write!(f, "cite zadori-3.2 k={k} mode={mode}"),
                Lemma::Kulin { rho } => write!(f, "cite kulin-2.4 rho={rho} mode={mode}"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    GeneratesQuo,
    GeneratesEqu,
    DerivesAtoms(Vec<(StepKind, String, String)>),
}

/// A statement with the source line it came from (0 when built in code).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located {
    pub line: usize,
    pub statement: Statement,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub ground: Arc<GroundSet>,
    pub generators: Vec<(String, Term)>,
    pub steps: Vec<Located>,
    pub conclusion: Conclusion,
    /// Budget of the closing closure, when the conclusion may use one.
    pub closure_budget: Option<usize>,
}

impl Certificate {
    pub fn new(ground: &Arc<GroundSet>, conclusion: Conclusion) -> Self {
        Certificate {
            ground: ground.clone(),
            generators: Vec::new(),
            steps: Vec::new(),
            conclusion,
            closure_budget: None,
        }
    }

    pub fn gen(&mut self, name: impl Into<String>, term: Term) -> &mut Self {
        self.generators.push((name.into(), term));
        self
    }

    pub fn push(&mut self, statement: Statement) -> &mut Self {
        self.steps.push(Located { line: 0, statement });
        self
    }

    pub fn define(&mut self, name: impl Into<String>, term: Term) -> &mut Self {
        self.push(Statement::Define { name: name.into(), term })
    }
}

impl PartialEq for Certificate {
    fn eq(&self, other: &Self) -> bool {
        let strip = |c: &Certificate| c.steps.iter().map(|l| l.statement.clone()).collect::<Vec<_>>();
        self.ground == other.ground
            && self.generators == other.generators
            && strip(self) == strip(other)
            && self.conclusion == other.conclusion
            && self.closure_budget == other.closure_budget
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ground {}", self.ground.labels().join(" "))?;
        for (name, term) in &self.generators {
            writeln!(f, "gen {name} = {term}")?;
        }
        for s in &self.steps {
            writeln!(f, "{}", s.statement)?;
        }
        match &self.conclusion {
            Conclusion::GeneratesQuo => f.write_str("conclude generates-quo")?,
            Conclusion::GeneratesEqu => f.write_str("conclude generates-equ")?,
            Conclusion::DerivesAtoms(atoms) => {
                f.write_str("conclude derives-atoms")?;
                for (kind, x, y) in atoms {
                    write!(f, " {kind}({x},{y})")?;
                }
            }
        }
        if let Some(n) = self.closure_budget {
            write!(f, " closure max-elements={n}")?;
        }
        writeln!(f)
    }
}

fn atom_lit(p: &mut TermParser<'_>) -> Result<(StepKind, String, String), ParseError> {
    let (tok, at) = p.bump()?;
    let kind = match tok {
        Tok::Ident("q") => StepKind::Q,
        Tok::Ident("e") => StepKind::E,
        other => return Err(p.error_at(at, format!("expected q(..) or e(..), found {other}"))),
    };
    p.expect(Tok::LParen)?;
    let x = p.ident("a ground label")?.to_string();
    p.expect(Tok::Comma)?;
    let y = p.ident("a ground label")?.to_string();
    p.expect(Tok::RParen)?;
    Ok((kind, x, y))
}

fn block_lit(p: &mut TermParser<'_>) -> Result<Vec<String>, ParseError> {
    p.expect(Tok::LBrace)?;
    let mut out = Vec::new();
    loop {
        match p.bump()? {
            (Tok::RBrace, _) => return Ok(out),
            (Tok::Ident(s), _) => out.push(s.to_string()),
            (Tok::Comma, _) => {}
            (tok, at) => return Err(p.error_at(at, format!("expected a label or `}}`, found {tok}"))),
        }
    }
}

fn path_lit(p: &mut TermParser<'_>) -> Result<Vec<PathLit>, ParseError> {
    p.expect(Tok::LBracket)?;
    let mut out = Vec::new();
    loop {
        let (kind, from, to) = atom_lit(p)?;
        out.push(PathLit { kind, from, to });
        match p.bump()? {
            (Tok::Comma, _) => {}
            (Tok::RBracket, _) => return Ok(out),
            (tok, at) => return Err(p.error_at(at, format!("expected `,` or `]`, found {tok}"))),
        }
    }
}

fn finish(p: &mut TermParser<'_>) -> Result<(), ParseError> {
    match p.peek()? {
        (Tok::Eof, _) => Ok(()),
        (tok, at) => Err(p.error_at(at, format!("unexpected {tok}"))),
    }
}

/// `key=value` pairs up to the end of the line.
fn params<'a>(p: &mut TermParser<'a>) -> Result<Vec<(&'a str, &'a str, usize)>, ParseError> {
    let mut out = Vec::new();
    while !p.at_end()? {
        let (_, at) = p.peek()?;
        let key = p.ident("a parameter name")?;
        p.expect(Tok::Assign)?;
        let value = p.ident("a parameter value")?;
        out.push((key, value, at));
    }
    Ok(out)
}

fn parse_cite(p: &mut TermParser<'_>) -> Result<Statement, ParseError> {
    let (_, id_at) = p.peek()?;
    let id = p.ident("a lemma id")?;
    let mut k = None;
    let mut rho = None;
    let mut mode = None;
    for (key, value, at) in params(p)? {
        match key {
            "k" if id == "zadori-3.2" => {
                k = Some(value.parse::<usize>().map_err(|_| p.error_at(at, "k must be a number"))?)
            }
            "rho" if id == "kulin-2.4" => rho = Some(value.to_string()),
            "mode" => mode = Some(value.parse::<ValidationMode>().map_err(|e| p.error_at(at, e))?),
            _ => return Err(p.error_at(at, format!("unknown parameter `{key}` for {id}"))),
        }
    }
    let mode = mode.unwrap_or(ValidationMode::Exhaustive);
    let lemma = match id {
        "zadori-3.2" => Lemma::Zadori { k: k.ok_or_else(|| p.error_at(id_at, "zadori-3.2 needs k=..."))? },
        "kulin-2.4" => {
            if mode == ValidationMode::SmallKValidated {
                return Err(p.error_at(id_at, "kulin-2.4 supports mode=exhaustive or mode=trusted"));
            }
            Lemma::Kulin { rho: rho.ok_or_else(|| p.error_at(id_at, "kulin-2.4 needs rho=..."))? }
        }
        other => {
            return Err(p.error_at(id_at, format!("unknown lemma `{other}` (known: zadori-3.2, kulin-2.4)")));
        }
    };
    Ok(Statement::Cite { lemma, mode })
}

fn parse_assert(p: &mut TermParser<'_>) -> Result<Statement, ParseError> {
    let save = p.offset();
    if let (Tok::Ident("blocks"), _) = p.bump()? {
        if p.peek()?.0 == Tok::LParen {
            p.bump()?;
            let term = p.join()?;
            p.expect(Tok::RParen)?;
            p.expect(Tok::EqEq)?;
            let mut blocks = Vec::new();
            while p.peek()?.0 == Tok::LBrace {
                blocks.push(block_lit(p)?);
            }
            let mut order = None;
            if let (Tok::Ident("order"), _) = p.peek()? {
                p.bump()?;
                let mut pairs = Vec::new();
                loop {
                    let lo = block_lit(p)?;
                    p.expect(Tok::Lt)?;
                    let hi = block_lit(p)?;
                    pairs.push((lo, hi));
                    if p.peek()?.0 != Tok::Comma {
                        break;
                    }
                    p.bump()?;
                }
                order = Some(pairs);
            }
            finish(p)?;
            return Ok(Statement::AssertBlocks { term, blocks, order });
        }
    }
    p.set_offset(save);
    let lhs = p.join()?;
    let (op, at) = p.bump()?;
    let rhs = p.join()?;
    finish(p)?;
    match op {
        Tok::EqEq => Ok(Statement::AssertEq(lhs, rhs)),
        Tok::Le => Ok(Statement::AssertLeq(lhs, rhs)),
        other => Err(p.error_at(at, format!("expected `==` or `<=`, found {other}"))),
    }
}

fn parse_conclusion(p: &mut TermParser<'_>) -> Result<(Conclusion, Option<usize>), ParseError> {
    let (_, at) = p.peek()?;
    let conclusion = match p.ident("a conclusion")? {
        "generates-quo" => Conclusion::GeneratesQuo,
        "generates-equ" => Conclusion::GeneratesEqu,
        "derives-atoms" => {
            let mut atoms = Vec::new();
            while let (Tok::Ident("q" | "e"), _) = p.peek()? {
                atoms.push(atom_lit(p)?);
            }
            Conclusion::DerivesAtoms(atoms)
        }
        other => {
            return Err(p.error_at(
                at,
                format!("unknown conclusion `{other}` (expected generates-quo, generates-equ or derives-atoms)"),
            ))
        }
    };
    let mut budget = None;
    if let (Tok::Ident("closure"), _) = p.peek()? {
        p.bump()?;
        for (key, value, at) in params(p)? {
            if key != "max-elements" {
                return Err(p.error_at(at, format!("unknown closure parameter `{key}`")));
            }
            budget = Some(value.parse::<usize>().map_err(|_| p.error_at(at, "max-elements must be a number"))?);
        }
        if budget.is_none() {
            return Err(p.error_at(p.offset(), "closure needs max-elements=N"));
        }
    }
    finish(p)?;
    Ok((conclusion, budget))
}

/// Parses the line-oriented certificate format; `#` starts a comment.
pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    let mut ground: Option<Arc<GroundSet>> = None;
    let mut generators = Vec::new();
    let mut steps = Vec::new();
    let mut conclusion = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut p = TermParser::new(content, line, 0);
        if p.at_end()? {
            continue;
        }
        let (_, kw_at) = p.peek()?;
        let keyword = p.ident("a keyword")?;
        if conclusion.is_some() {
            return Err(p.error_at(kw_at, "nothing may follow the conclusion"));
        }
        if keyword != "ground" && ground.is_none() {
            return Err(p.error_at(kw_at, "the certificate must start with `ground`"));
        }
        match keyword {
            "ground" => {
                if ground.is_some() {
                    return Err(p.error_at(kw_at, "duplicate `ground` line"));
                }
                let mut labels = Vec::new();
                while !p.at_end()? {
                    labels.push(p.ident("a label")?.to_string());
                }
                ground = Some(GroundSet::new(labels).map_err(|e| p.error_at(kw_at, e.to_string()))?);
            }
            "gen" | "let" => {
                let (_, name_at) = p.peek()?;
                let name = p.ident("a name")?.to_string();
                if name == "q" || name == "e" || name == "blocks" {
                    return Err(p.error_at(name_at, format!("`{name}` is reserved")));
                }
                p.expect(Tok::Assign)?;
                let term = p.join()?;
                finish(&mut p)?;
                if keyword == "gen" {
                    if !steps.is_empty() {
                        return Err(p.error_at(kw_at, "generators must precede all steps"));
                    }
                    generators.push((name, term));
                } else {
                    steps.push(Located { line, statement: Statement::Define { name, term } });
                }
            }
            "assert" => {
                let statement = parse_assert(&mut p)?;
                steps.push(Located { line, statement });
            }
            "derive" => {
                let (kind, x, y) = atom_lit(&mut p)?;
                p.expect(Tok::Assign)?;
                let term = p.join()?;
                finish(&mut p)?;
                steps.push(Located { line, statement: Statement::AssertAtom { kind, x, y, term } });
            }
            "dpp" => {
                let (kind, x, y) = atom_lit(&mut p)?;
                if kind != StepKind::Q {
                    return Err(p.error_at(kw_at, "dpp derives a q(..) atom"));
                }
                match p.bump()? {
                    (Tok::Ident("via"), _) => {}
                    (tok, at) => return Err(p.error_at(at, format!("expected `via`, found {tok}"))),
                }
                let path1 = path_lit(&mut p)?;
                match p.bump()? {
                    (Tok::Ident("and"), _) => {}
                    (tok, at) => return Err(p.error_at(at, format!("expected `and`, found {tok}"))),
                }
                let path2 = path_lit(&mut p)?;
                finish(&mut p)?;
                steps.push(Located { line, statement: Statement::AssertDpp { x, y, path1, path2 } });
            }
            "cite" => {
                let statement = parse_cite(&mut p)?;
                steps.push(Located { line, statement });
            }
            "conclude" => conclusion = Some(parse_conclusion(&mut p)?),
            other => return Err(p.error_at(kw_at, format!("unknown keyword `{other}`"))),
        }
    }
    let ground = ground.ok_or(ParseError { line: 1, col: 1, message: "missing `ground` line".into() })?;
    let (conclusion, closure_budget) =
        conclusion.ok_or(ParseError { line: last_line.max(1), col: 1, message: "missing `conclude` line".into() })?;
    Ok(Certificate { ground, generators, steps, conclusion, closure_budget })
}
