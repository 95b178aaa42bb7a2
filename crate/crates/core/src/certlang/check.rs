//! Sequential certificate replay.
//!
//! The checker tracks which relations are known to lie in the sublattice `S`
//! generated by the certificate's generators. A term is *grounded* when every
//! leaf is a name or atom already known to be in `S`; its value is then in `S`
//! as well. Equation steps, `dpp` steps and citations enlarge the known set.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::Serialize;

use super::cert::{Certificate, Conclusion, Lemma, PathLit, Statement, ValidationMode};
use super::kulin::{default_cycle, kulin_derivation};
use super::term::{eval_term, Env, Term};
use crate::constructions::{zadori, ZadoriConfig};
use crate::genclose::{
    anchored_closure, closure, dpp, generates_staged, ClosureBudget, ClosureReport, Generation, GenerationReport,
    PathStep, StepKind, StopReason, Target, DEFAULT_PROMOTE,
};
use crate::lattice::{atoms, LatticeKind};
use crate::relcore::{GroundSet, Partition, Relation};

/// Largest `k` checked when a citation is validated on its small siblings.
pub const SMALL_K_MAX: usize = 5;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AtomTally {
    pub e: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diff {
    pub left: String,
    pub right: String,
    pub only_left: String,
    pub only_right: String,
}

impl Diff {
    fn new(left: &Relation, right: &Relation) -> Self {
        let only = |a: &Relation, b: &Relation| {
            let pairs: Vec<(usize, usize)> = a.pairs().filter(|&(x, y)| !b.contains(x, y)).collect();
            Relation::from_pairs(a.ground(), pairs).map(|r| r.pairs_display()).unwrap_or_default()
        };
        Diff {
            left: left.pairs_display(),
            right: right.pairs_display(),
            only_left: only(left, right),
            only_right: only(right, left),
        }
    }
}

/// Outcome of one cited-lemma validation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub k: usize,
    pub outcome: Generation,
    pub closure: ClosureReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub line: usize,
    pub kind: &'static str,
    pub statement: String,
    pub passed: bool,
    /// Atoms this step added to the known part of `S`.
    pub new_atoms: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub validations: Vec<Validation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// 1-based step index; `steps + 1` denotes the conclusion.
    pub step: usize,
    pub line: usize,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<Diff>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConclusionReport {
    pub conclusion: String,
    pub required: usize,
    pub known_before_closure: usize,
    pub missing_before_closure: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<ClosureReport>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub ground: Vec<String>,
    pub generators: Vec<String>,
    pub steps: Vec<StepReport>,
    /// Atoms established by equation and `dpp` steps.
    pub derived: AtomTally,
    /// Atoms supplied by cited lemmas.
    pub cited: AtomTally,
    pub failure: Option<Failure>,
    pub conclusion: Option<ConclusionReport>,
    pub elapsed_ms: u128,
}

impl CheckReport {
    /// Clears wall-clock fields so that two runs can be compared.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = 0;
        for s in &mut self.steps {
            for v in &mut s.validations {
                v.closure.elapsed_ms = 0;
            }
        }
        if let Some(c) = self.conclusion.as_mut().and_then(|c| c.closure.as_mut()) {
            c.elapsed_ms = 0;
        }
        self
    }
}

struct StepFail {
    message: String,
    diff: Option<Diff>,
}

impl StepFail {
    fn msg(message: impl Into<String>) -> Self {
        StepFail { message: message.into(), diff: None }
    }
}

impl<E: std::error::Error> From<E> for StepFail {
    fn from(e: E) -> Self {
        StepFail::msg(e.to_string())
    }
}

#[derive(Default)]
struct StepEffect {
    new_atoms: Vec<String>,
    note: Option<String>,
    validations: Vec<Validation>,
    sub_steps: Option<usize>,
}

#[derive(Clone, Copy)]
enum Source {
    Derived,
    Cited,
}

struct Checker {
    ground: Arc<GroundSet>,
    env: Env,
    in_s: FxHashSet<String>,
    known: FxHashSet<Box<[u64]>>,
    /// Known members in the order they became known (closure seeds).
    members: Vec<Relation>,
    derived: AtomTally,
    cited: AtomTally,
}

fn atom_label(r: &Relation) -> Option<(StepKind, String)> {
    let g = r.ground();
    let pairs: Vec<(usize, usize)> = r.pairs().collect();
    match pairs.as_slice() {
        [(x, y)] => Some((StepKind::Q, format!("q({},{})", g.label(*x), g.label(*y)))),
        [(x, y), (u, v)] if (x, y) == (v, u) => Some((StepKind::E, format!("e({},{})", g.label(*x), g.label(*y)))),
        _ => None,
    }
}

impl Checker {
    fn new(ground: &Arc<GroundSet>) -> Self {
        Checker {
            ground: ground.clone(),
            env: Env::new(ground),
            in_s: FxHashSet::default(),
            known: FxHashSet::default(),
            members: Vec::new(),
            derived: AtomTally::default(),
            cited: AtomTally::default(),
        }
    }

    /// Records `r` as a member of `S`; returns the atom label if it is a newly known atom.
    fn learn(&mut self, r: &Relation, source: Option<Source>) -> Option<String> {
        if !self.known.insert(r.key().into()) {
            return None;
        }
        self.members.push(r.clone());
        let (kind, label) = atom_label(r)?;
        let tally = match source? {
            Source::Derived => &mut self.derived,
            Source::Cited => &mut self.cited,
        };
        match kind {
            StepKind::E => tally.e += 1,
            StepKind::Q => tally.q += 1,
        }
        Some(label)
    }

    fn grounded(&self, term: &Term) -> Result<(), StepFail> {
        for leaf in term.leaves() {
            let ok = match leaf {
                Term::Symbol(s) => self.in_s.contains(s),
                Term::AtomQ(x, y) => self.known.contains(Relation::q_named(&self.ground, x, y)?.key()),
                Term::AtomE(x, y) => self.known.contains(Relation::e_named(&self.ground, x, y)?.key()),
                _ => true,
            };
            if !ok {
                return Err(StepFail::msg(format!("`{leaf}` is not yet known to be in S")));
            }
        }
        Ok(())
    }

    fn is_grounded(&self, term: &Term) -> bool {
        self.grounded(term).is_ok()
    }

    fn eval(&self, term: &Term) -> Result<Relation, StepFail> {
        Ok(eval_term(term, &self.env)?)
    }

    fn atom(&self, kind: StepKind, x: &str, y: &str) -> Result<Relation, StepFail> {
        Ok(match kind {
            StepKind::Q => Relation::q_named(&self.ground, x, y)?,
            StepKind::E => Relation::e_named(&self.ground, x, y)?,
        })
    }

    fn path(&self, lits: &[PathLit]) -> Result<Vec<PathStep>, StepFail> {
        lits.iter()
            .map(|l| {
                let (from, to) = (self.ground.index_of(&l.from)?, self.ground.index_of(&l.to)?);
                let step = PathStep { from, to, kind: l.kind };
                if !self.known.contains(step.atom(&self.ground)?.key()) {
                    return Err(StepFail::msg(format!("path step `{l}` is not yet known to be in S")));
                }
                Ok(step)
            })
            .collect()
    }

    fn partition_literal(&self, blocks: &[Vec<String>]) -> Result<Partition, StepFail> {
        Ok(Partition::from_labeled_blocks(&self.ground, blocks)?)
    }

    fn exec(&mut self, statement: &Statement) -> Result<StepEffect, StepFail> {
        let mut effect = StepEffect::default();
        match statement {
            Statement::Define { name, term } => {
                if self.env.contains(name) {
                    return Err(StepFail::msg(format!("`{name}` is already defined")));
                }
                let value = self.eval(term)?;
                self.env.bind(name.clone(), value.clone())?;
                if self.is_grounded(term) {
                    self.in_s.insert(name.clone());
                    effect.new_atoms.extend(self.learn(&value, Some(Source::Derived)));
                } else {
                    effect.note = Some("auxiliary: not known to be in S".into());
                }
            }
            Statement::AssertEq(lhs, rhs) => {
                let (l, r) = (self.eval(lhs)?, self.eval(rhs)?);
                if l != r {
                    return Err(StepFail { message: "the two sides differ".into(), diff: Some(Diff::new(&l, &r)) });
                }
                if self.is_grounded(lhs) || self.is_grounded(rhs) {
                    for side in [lhs, rhs] {
                        if let Term::Symbol(s) = side {
                            self.in_s.insert(s.clone());
                        }
                    }
                    effect.new_atoms.extend(self.learn(&l, Some(Source::Derived)));
                }
            }
            Statement::AssertLeq(lhs, rhs) => {
                let (l, r) = (self.eval(lhs)?, self.eval(rhs)?);
                if !l.leq(&r) {
                    return Err(StepFail {
                        message: "the left side is not below the right side".into(),
                        diff: Some(Diff::new(&l, &r)),
                    });
                }
            }
            Statement::AssertAtom { kind, x, y, term } => {
                let atom = self.atom(*kind, x, y)?;
                let value = self.eval(term)?;
                if value != atom {
                    return Err(StepFail {
                        message: format!("the term does not evaluate to {kind}({x},{y})"),
                        diff: Some(Diff::new(&value, &atom)),
                    });
                }
                self.grounded(term)?;
                effect.new_atoms.extend(self.learn(&atom, Some(Source::Derived)));
            }
            Statement::AssertBlocks { term, blocks, order } => {
                let value = self.eval(term)?;
                let expected = self.partition_literal(blocks)?;
                let poset = value.induced_order()?;
                if poset.partition() != &expected {
                    return Err(StepFail::msg(format!(
                        "blocks are {}, expected {}",
                        poset.partition().display_nontrivial(),
                        expected.display_nontrivial()
                    )));
                }
                if let Some(order) = order {
                    self.check_order(&poset, order)?;
                }
            }
            Statement::AssertDpp { x, y, path1, path2 } => {
                let (p1, p2) = (self.path(path1)?, self.path(path2)?);
                let out = dpp(&self.ground, &p1, &p2)?;
                let target = Relation::q_named(&self.ground, x, y)?;
                if out.meet != target {
                    return Err(StepFail {
                        message: format!("the paths certify a different atom than q({x},{y})"),
                        diff: Some(Diff::new(&out.meet, &target)),
                    });
                }
                effect.new_atoms.extend(self.learn(&target, Some(Source::Derived)));
            }
            Statement::Cite { lemma: Lemma::Zadori { k }, mode } => self.cite_zadori(*k, *mode, &mut effect)?,
            Statement::Cite { lemma: Lemma::Kulin { rho }, mode } => self.cite_kulin(rho, *mode, &mut effect)?,
        }
        Ok(effect)
    }

    fn check_order(
        &self,
        poset: &crate::relcore::BlockPoset,
        order: &[(Vec<String>, Vec<String>)],
    ) -> Result<(), StepFail> {
        let blocks = poset.blocks();
        let find = |labels: &[String]| -> Result<usize, StepFail> {
            let mut idx: Vec<usize> = labels.iter().map(|l| self.ground.index_of(l)).collect::<Result<_, _>>()?;
            idx.sort_unstable();
            blocks
                .iter()
                .position(|b| *b == idx)
                .ok_or_else(|| StepFail::msg(format!("{{{}}} is not a block", labels.join(" "))))
        };
        let m = blocks.len();
        let mut want = vec![vec![false; m]; m];
        for (lo, hi) in order {
            let (i, j) = (find(lo)?, find(hi)?);
            want[i][j] = true;
        }
        for k in 0..m {
            let through = want[k].clone();
            for row in want.iter_mut().filter(|row| row[k]) {
                for (cell, &t) in row.iter_mut().zip(&through) {
                    *cell |= t;
                }
            }
        }
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if i != j && w != poset.less(i, j) {
                    let show = |b: usize| {
                        let labels: Vec<&str> = blocks[b].iter().map(|&x| self.ground.label(x)).collect();
                        format!("{{{}}}", labels.join(" "))
                    };
                    let verb = if w { "is not" } else { "is" };
                    return Err(StepFail::msg(format!(
                        "{} {verb} below {} in the induced order, contrary to the order literal",
                        show(i),
                        show(j)
                    )));
                }
            }
        }
        Ok(())
    }

    fn zadori_on_ground(&self, k: usize) -> Result<(ZadoriConfig, Vec<usize>), StepFail> {
        let config = zadori(k, &[])?;
        let embedding: Vec<usize> = config
            .ground
            .labels()
            .iter()
            .map(|l| self.ground.index_of(l))
            .collect::<Result<_, _>>()
            .map_err(|e| StepFail::msg(format!("the ground set lacks the configuration labels: {e}")))?;
        Ok((config, embedding))
    }

    fn cite_zadori(&mut self, k: usize, mode: ValidationMode, effect: &mut StepEffect) -> Result<(), StepFail> {
        let (config, embedding) = self.zadori_on_ground(k)?;
        let names = ["alpha", "beta", "gamma", "eps0", "eta"];
        for (name, rel) in names.iter().zip(config.five()) {
            let bound =
                self.env.get(name).ok_or_else(|| StepFail::msg(format!("zadori-3.2 needs `{name}` to be bound")))?;
            let expected = rel.embed(&self.ground, &embedding)?;
            if *bound != expected {
                return Err(StepFail {
                    message: format!("`{name}` is not the k={k} configuration relation"),
                    diff: Some(Diff::new(bound, &expected)),
                });
            }
            if !self.in_s.contains(*name) {
                return Err(StepFail::msg(format!("`{name}` is not yet known to be in S")));
            }
        }
        match mode {
            ValidationMode::Exhaustive => {
                let v = validate_zadori(k)?;
                if v.outcome != Generation::Generates {
                    effect.validations.push(v);
                    return Err(StepFail::msg(format!("closure did not reach every e-atom for k={k}")));
                }
                effect.note = Some(format!("k={k} confirmed by closure on the {}-element support", 2 * k + 1));
                effect.validations.push(v);
            }
            ValidationMode::SmallKValidated => {
                let siblings = small_k_validations();
                if let Some(bad) = siblings.iter().find(|v| v.outcome != Generation::Generates) {
                    effect.validations = siblings.to_vec();
                    return Err(StepFail::msg(format!("small sibling k={} failed", bad.k)));
                }
                effect.note = Some(format!("instance k={k} recorded; k=2..{SMALL_K_MAX} confirmed by closure"));
                effect.validations = siblings.to_vec();
            }
            ValidationMode::Trusted => effect.note = Some(format!("instance k={k} recorded without validation")),
        }
        let support: Vec<usize> = config.support().iter().map(|&i| embedding[i]).collect();
        for (i, &x) in support.iter().enumerate() {
            for &y in &support[i + 1..] {
                let atom = Relation::e(&self.ground, x, y)?;
                effect.new_atoms.extend(self.learn(&atom, Some(Source::Cited)));
            }
        }
        Ok(())
    }

    fn cite_kulin(&mut self, rho_name: &str, mode: ValidationMode, effect: &mut StepEffect) -> Result<(), StepFail> {
        let rho = self.env.get(rho_name).cloned().ok_or_else(|| StepFail::msg(format!("`{rho_name}` is not bound")))?;
        if !self.in_s.contains(rho_name) {
            return Err(StepFail::msg(format!("`{rho_name}` is not yet known to be in S")));
        }
        if rho.is_symmetric() {
            return Err(StepFail::msg(format!("`{rho_name}` is symmetric")));
        }
        match mode {
            ValidationMode::Exhaustive => {
                let cycle = default_cycle(&rho).expect("non-symmetric relation has a one-way pair");
                let statements = kulin_derivation(&self.ground, rho_name, &rho, &cycle)?;
                for (i, s) in statements.iter().enumerate() {
                    let sub = self.exec(s).map_err(|f| StepFail {
                        message: format!("derivation step {} `{s}`: {}", i + 1, f.message),
                        diff: f.diff,
                    })?;
                    effect.new_atoms.extend(sub.new_atoms);
                }
                effect.sub_steps = Some(statements.len());
                effect.note = Some(format!("{} derivation steps checked", statements.len()));
            }
            _ => {
                for atom in atoms(LatticeKind::Equ, &self.ground) {
                    if !self.known.contains(atom.key()) {
                        return Err(StepFail::msg(format!(
                            "kulin-2.4 needs every e-atom; {} is not yet known",
                            atom_label(&atom).map(|a| a.1).unwrap_or_default()
                        )));
                    }
                }
                for atom in atoms(LatticeKind::Quo, &self.ground) {
                    effect.new_atoms.extend(self.learn(&atom, Some(Source::Cited)));
                }
                effect.note = Some("recorded without derivation".into());
            }
        }
        Ok(())
    }

    fn conclude(&mut self, cert: &Certificate) -> Result<ConclusionReport, StepFail> {
        let (name, required): (String, Vec<Relation>) = match &cert.conclusion {
            Conclusion::GeneratesQuo => ("generates-quo".into(), atoms(LatticeKind::Quo, &self.ground)),
            Conclusion::GeneratesEqu => ("generates-equ".into(), atoms(LatticeKind::Equ, &self.ground)),
            Conclusion::DerivesAtoms(list) => {
                ("derives-atoms".into(), list.iter().map(|(k, x, y)| self.atom(*k, x, y)).collect::<Result<_, _>>()?)
            }
        };
        let missing: Vec<&Relation> = required.iter().filter(|r| !self.known.contains(r.key())).collect();
        let mut report = ConclusionReport {
            conclusion: name,
            required: required.len(),
            known_before_closure: required.len() - missing.len(),
            missing_before_closure: missing.iter().map(|r| atom_label(r).map(|a| a.1).unwrap_or_default()).collect(),
            closure: None,
            passed: missing.is_empty(),
        };
        if report.passed {
            return Ok(report);
        }
        let Some(max_elements) = cert.closure_budget else {
            return Ok(report);
        };
        let budget = ClosureBudget::new(max_elements.max(self.members.len()), Target::Relations(required.clone()));
        let mut c = anchored_closure(&self.members, &budget, DEFAULT_PROMOTE)?;
        if c.report.stop_reason != StopReason::TargetAtomsFound {
            c = closure(&self.members, &budget)?;
        }
        report.passed = c.report.stop_reason == StopReason::TargetAtomsFound;
        report.closure = Some(c.report);
        Ok(report)
    }
}

/// Bell number `B(n)`, saturating at `usize::MAX`.
pub fn bell(n: usize) -> usize {
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty"));
        for &v in &row {
            let last = *next.last().expect("nonempty");
            next.push(last.saturating_add(v));
        }
        row = next;
    }
    usize::try_from(row[0]).unwrap_or(usize::MAX)
}

/// Closure check that the five Zádori relations generate `Equ` of the
/// `2k+1`-element support. The budget is the size of that lattice.
pub fn validate_zadori(k: usize) -> Result<Validation, crate::genclose::ClosureError> {
    let config = zadori(k, &[]).map_err(|_| crate::genclose::ClosureError::NoGenerators)?;
    let five = config.restricted_five()?;
    let GenerationReport { outcome, closure } =
        generates_staged(&five, LatticeKind::Equ, bell(2 * k + 1), DEFAULT_PROMOTE)?;
    Ok(Validation { k, outcome, closure })
}

/// Exhaustive checks for `k = 2..=SMALL_K_MAX`, computed once per process.
pub fn small_k_validations() -> &'static [Validation] {
    static CACHE: OnceLock<Vec<Validation>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (2..=SMALL_K_MAX).map(|k| validate_zadori(k).expect("static configurations are valid")).collect()
    })
}

/// Replays `cert` step by step; the first failing step ends the run.
pub fn check_certificate(cert: &Certificate) -> CheckReport {
    let start = Instant::now();
    let mut checker = Checker::new(&cert.ground);
    let mut report = CheckReport {
        ok: false,
        ground: cert.ground.labels().to_vec(),
        generators: cert.generators.iter().map(|(n, _)| n.clone()).collect(),
        steps: Vec::new(),
        derived: AtomTally::default(),
        cited: AtomTally::default(),
        failure: None,
        conclusion: None,
        elapsed_ms: 0,
    };
    let finish = |mut report: CheckReport, checker: &Checker| {
        report.derived = checker.derived.clone();
        report.cited = checker.cited.clone();
        report.elapsed_ms = start.elapsed().as_millis();
        report
    };

    for (i, (name, term)) in cert.generators.iter().enumerate() {
        let value = match eval_term(term, &checker.env) {
            Ok(v) if !checker.env.contains(name) => v,
            Ok(_) => {
                report.failure = Some(Failure {
                    step: 0,
                    line: 0,
                    message: format!("generator {} `{name}` is defined twice", i + 1),
                    diff: None,
                });
                return finish(report, &checker);
            }
            Err(e) => {
                report.failure =
                    Some(Failure { step: 0, line: 0, message: format!("generator `{name}`: {e}"), diff: None });
                return finish(report, &checker);
            }
        };
        checker.env.bind(name.clone(), value.clone()).expect("same ground");
        checker.in_s.insert(name.clone());
        checker.learn(&value, None);
    }

    for (i, located) in cert.steps.iter().enumerate() {
        let statement = &located.statement;
        match checker.exec(statement) {
            Ok(effect) => report.steps.push(StepReport {
                index: i + 1,
                line: located.line,
                kind: statement.kind(),
                statement: statement.to_string(),
                passed: true,
                new_atoms: effect.new_atoms,
                note: effect.note,
                validations: effect.validations,
                sub_steps: effect.sub_steps,
            }),
            Err(fail) => {
                report.steps.push(StepReport {
                    index: i + 1,
                    line: located.line,
                    kind: statement.kind(),
                    statement: statement.to_string(),
                    passed: false,
                    new_atoms: Vec::new(),
                    note: Some(fail.message.clone()),
                    validations: Vec::new(),
                    sub_steps: None,
                });
                report.failure =
                    Some(Failure { step: i + 1, line: located.line, message: fail.message, diff: fail.diff });
                return finish(report, &checker);
            }
        }
    }

    match checker.conclude(cert) {
        Ok(c) => {
            if !c.passed {
                report.failure = Some(Failure {
                    step: cert.steps.len() + 1,
                    line: 0,
                    message: format!("conclusion {} not established", c.conclusion),
                    diff: None,
                });
            }
            report.ok = c.passed;
            report.conclusion = Some(c);
        }
        Err(fail) => {
            report.failure =
                Some(Failure { step: cert.steps.len() + 1, line: 0, message: fail.message, diff: fail.diff });
        }
    }
    finish(report, &checker)
}
