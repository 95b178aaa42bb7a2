//! Sublattice closure and generation tests.
//!
//! [`closure`] grows the sublattice generated by a set of relations breadth-first
//! by term depth and stops as soon as every target atom has appeared, when the
//! element budget runs out, or when nothing new can be produced.

mod anchored;
mod dpp;
mod table;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, LatticeKind};
use crate::relcore::{bits, same_ground, GroundSet, RelError, Relation};

pub use anchored::{anchored_closure, DEFAULT_PROMOTE};
pub use dpp::{dpp, DppError, DppOutcome, PathStep, StepKind};
pub use table::{refute_k_generation, RefuteReport, TableCloser};

/// Number of new-depth elements processed per parallel batch.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("closure needs at least one generator")]
    NoGenerators,
    #[error("budget of {max_elements} elements is below the {generators} generators")]
    InvalidBudget { max_elements: usize, generators: usize },
    #[error("generator {0} is not a quasiorder")]
    NotQuasiorder(usize),
    #[error("generator {0} is not an equivalence")]
    NotSymmetric(usize),
    #[error("lattice has no operation tables")]
    MissingTables,
    #[error(transparent)]
    Rel(#[from] RelError),
}

/// What the closure is looking for.
#[derive(Debug, Clone)]
pub enum Target {
    /// All `q(x,y)`, `x != y`, of the ground set.
    QAtoms,
    /// All `e(x,y)`, `x != y`, of the ground set.
    EAtoms,
    /// An explicit set of relations (e.g. the atoms of a restricted lattice).
    Relations(Vec<Relation>),
    /// Run until saturation.
    Saturate,
}

#[derive(Debug, Clone)]
pub struct ClosureBudget {
    pub max_elements: usize,
    pub max_depth: Option<usize>,
    pub target: Target,
}

impl ClosureBudget {
    pub fn new(max_elements: usize, target: Target) -> Self {
        ClosureBudget { max_elements, max_depth: None, target }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TargetAtomsFound,
    BudgetExceeded,
    Saturated,
    /// The anchored search ran out of work; nothing follows about saturation.
    AnchorsExhausted,
}

/// How the closure was explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    BreadthFirst,
    Anchored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub discovered: usize,
    pub stop_reason: StopReason,
    /// The required targets that were reached, as labeled pair sets.
    pub atoms_found: Vec<String>,
    pub atoms_required: usize,
    pub depth_reached: usize,
    pub strategy: Strategy,
    pub elapsed_ms: u128,
}

/// Outcome of a closure run; the discovered elements are kept for inspection.
#[derive(Debug, Clone)]
pub struct Closure {
    pub report: ClosureReport,
    ground: Arc<GroundSet>,
    stride: usize,
    arena: Vec<u64>,
}

impl Closure {
    pub fn len(&self) -> usize {
        self.arena.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.arena.is_empty()
    }

    pub fn element(&self, i: usize) -> Relation {
        let rows: Box<[u64]> = self.arena[i * self.stride..(i + 1) * self.stride].into();
        Relation::from_rows_unchecked(&self.ground, rows)
    }

    pub fn elements(&self) -> impl Iterator<Item = Relation> + '_ {
        (0..self.len()).map(|i| self.element(i))
    }

    pub fn contains(&self, r: &Relation) -> bool {
        self.arena.chunks_exact(self.stride).any(|c| c == r.key())
    }
}

fn target_relations(target: &Target, ground: &Arc<GroundSet>) -> Option<Vec<Relation>> {
    match target {
        Target::QAtoms => Some(lattice::atoms(LatticeKind::Quo, ground)),
        Target::EAtoms => Some(lattice::atoms(LatticeKind::Equ, ground)),
        Target::Relations(rs) => Some(rs.clone()),
        Target::Saturate => None,
    }
}

/// Grows the sublattice generated by `generators` under `budget`.
///
/// Depth 0 holds the generators; depth `d+1` holds every new meet or join of
/// two elements of depth at most `d` with at least one operand of depth `d`.
/// Newly found elements are deduplicated by key, and the run stops as soon as
/// all targets are present.
pub fn closure(generators: &[Relation], budget: &ClosureBudget) -> Result<Closure, ClosureError> {
    let start = Instant::now();
    let (ground, targets, mut found) = prepare(generators, &budget.target)?;
    let stride = found.stride;
    let gen_count = found.len();
    if budget.max_elements < gen_count {
        return Err(ClosureError::InvalidBudget { max_elements: budget.max_elements, generators: gen_count });
    }

    let mut depth = 0usize;
    let mut level_start = 0usize;
    let mut level_end = gen_count;
    let has_targets = targets.is_some();

    let stop_reason = 'outer: loop {
        if has_targets && found.all_found() {
            break StopReason::TargetAtomsFound;
        }
        if level_start == level_end {
            break StopReason::Saturated;
        }
        if budget.max_depth.is_some_and(|d| depth >= d) {
            break StopReason::BudgetExceeded;
        }
        let mut i = level_start;
        while i < level_end {
            let hi = (i + CHUNK).min(level_end);
            let snapshot = &found.arena;
            let seen_ref = &found.seen;
            let batch: Vec<Vec<u64>> = (i..hi)
                .into_par_iter()
                .map(|a| {
                    let mut out = Vec::new();
                    let mut local: FxHashSet<Box<[u64]>> = FxHashSet::default();
                    let mut scratch = vec![0u64; stride];
                    let ra = &snapshot[a * stride..(a + 1) * stride];
                    for b in 0..a {
                        let rb = &snapshot[b * stride..(b + 1) * stride];
                        bits::meet_into(ra, rb, &mut scratch);
                        if !seen_ref.contains(scratch.as_slice()) && local.insert(scratch.as_slice().into()) {
                            out.extend_from_slice(&scratch);
                        }
                        bits::join_into(ra, rb, &mut scratch);
                        if !seen_ref.contains(scratch.as_slice()) && local.insert(scratch.as_slice().into()) {
                            out.extend_from_slice(&scratch);
                        }
                    }
                    out
                })
                .collect();
            for candidates in batch {
                for key in candidates.chunks_exact(stride) {
                    if found.record(key) && found.len() > budget.max_elements {
                        found.pop();
                        break 'outer StopReason::BudgetExceeded;
                    }
                }
            }
            if has_targets && found.all_found() {
                // the new elements are one level deeper than the operands
                depth += 1;
                break 'outer StopReason::TargetAtomsFound;
            }
            i = hi;
        }
        depth += 1;
        level_start = level_end;
        level_end = found.len();
    };

    Ok(Closure {
        report: ClosureReport {
            discovered: found.len(),
            stop_reason,
            atoms_found: found.found_names(targets.as_deref()),
            atoms_required: found.required,
            depth_reached: depth,
            strategy: Strategy::BreadthFirst,
            elapsed_ms: start.elapsed().as_millis(),
        },
        ground,
        stride,
        arena: found.arena,
    })
}

/// Validates the generators and seeds the bookkeeping with them.
#[allow(clippy::type_complexity)]
fn prepare(
    generators: &[Relation],
    target: &Target,
) -> Result<(Arc<GroundSet>, Option<Vec<Relation>>, Discovered), ClosureError> {
    let first = generators.first().ok_or(ClosureError::NoGenerators)?;
    let ground = first.ground().clone();
    for (i, g) in generators.iter().enumerate() {
        if !same_ground(g.ground(), &ground) {
            return Err(RelError::GroundMismatch.into());
        }
        if !g.is_quasiorder() {
            return Err(ClosureError::NotQuasiorder(i));
        }
    }
    let targets = target_relations(target, &ground);
    let mut target_index: FxHashMap<Box<[u64]>, usize> = FxHashMap::default();
    for t in targets.iter().flatten() {
        if !same_ground(t.ground(), &ground) {
            return Err(RelError::GroundMismatch.into());
        }
        let next = target_index.len();
        target_index.entry(t.key().into()).or_insert(next);
    }
    let required = target_index.len();
    let mut found = Discovered {
        stride: ground.size(),
        seen: FxHashSet::default(),
        arena: Vec::new(),
        target_index,
        required,
        hit: vec![false; required],
        found_count: 0,
    };
    for g in generators {
        found.record(g.key());
    }
    Ok((ground, targets, found))
}

struct Discovered {
    stride: usize,
    seen: FxHashSet<Box<[u64]>>,
    arena: Vec<u64>,
    target_index: FxHashMap<Box<[u64]>, usize>,
    required: usize,
    hit: Vec<bool>,
    found_count: usize,
}

impl Discovered {
    fn len(&self) -> usize {
        self.arena.len() / self.stride
    }

    /// Inserts a key; returns false if it was already known.
    fn record(&mut self, key: &[u64]) -> bool {
        if !self.seen.insert(key.into()) {
            return false;
        }
        self.arena.extend_from_slice(key);
        if let Some(&t) = self.target_index.get(key) {
            if !std::mem::replace(&mut self.hit[t], true) {
                self.found_count += 1;
            }
        }
        true
    }

    /// Drops the most recent element again (used when it overflows the budget).
    fn pop(&mut self) {
        let start = self.arena.len() - self.stride;
        let key: Box<[u64]> = self.arena[start..].into();
        self.seen.remove(&key);
        if let Some(&t) = self.target_index.get(&key) {
            if std::mem::replace(&mut self.hit[t], false) {
                self.found_count -= 1;
            }
        }
        self.arena.truncate(start);
    }

    fn all_found(&self) -> bool {
        self.found_count == self.required
    }

    /// Labeled pair sets of the targets reached, in target order.
    fn found_names(&self, targets: Option<&[Relation]>) -> Vec<String> {
        let mut names = Vec::new();
        let mut reported = FxHashSet::default();
        for t in targets.unwrap_or_default() {
            if let Some(&idx) = self.target_index.get(t.key()) {
                if self.hit[idx] && reported.insert(idx) {
                    names.push(t.pairs_display());
                }
            }
        }
        names
    }
}

/// Three-valued answer of a budgeted generation test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generation {
    Generates,
    DoesNotGenerate,
    Indeterminate,
}

impl Generation {
    fn from_stop(reason: StopReason) -> Self {
        match reason {
            StopReason::TargetAtomsFound => Generation::Generates,
            StopReason::Saturated => Generation::DoesNotGenerate,
            StopReason::BudgetExceeded | StopReason::AnchorsExhausted => Generation::Indeterminate,
        }
    }

    /// `Some(bool)` for a decided outcome, `None` when the budget ran out.
    pub fn decided(self) -> Option<bool> {
        match self {
            Generation::Generates => Some(true),
            Generation::DoesNotGenerate => Some(false),
            Generation::Indeterminate => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub outcome: Generation,
    pub closure: ClosureReport,
}

/// Decides whether `generators` generate the whole quasiorder lattice of their
/// ground set: every lattice element is a join of `q`-atoms, so reaching all
/// atoms suffices.
pub fn generates_quo(generators: &[Relation], max_elements: usize) -> Result<GenerationReport, ClosureError> {
    let c = closure(generators, &ClosureBudget::new(max_elements, Target::QAtoms))?;
    Ok(GenerationReport { outcome: Generation::from_stop(c.report.stop_reason), closure: c.report })
}

/// Same as [`generates_quo`] for the equivalence lattice; all generators must be symmetric.
pub fn generates_equ(generators: &[Relation], max_elements: usize) -> Result<GenerationReport, ClosureError> {
    if let Some(i) = generators.iter().position(|g| !g.is_equivalence()) {
        return Err(ClosureError::NotSymmetric(i));
    }
    let c = closure(generators, &ClosureBudget::new(max_elements, Target::EAtoms))?;
    Ok(GenerationReport { outcome: Generation::from_stop(c.report.stop_reason), closure: c.report })
}

/// Generation test that first tries the anchored search and falls back to the
/// breadth-first closure when the anchors run dry. Both stages share
/// `max_elements`. The returned report is the one that decided the outcome.
pub fn generates_staged(
    generators: &[Relation],
    kind: LatticeKind,
    max_elements: usize,
    promote: usize,
) -> Result<GenerationReport, ClosureError> {
    if kind == LatticeKind::Equ {
        if let Some(i) = generators.iter().position(|g| !g.is_equivalence()) {
            return Err(ClosureError::NotSymmetric(i));
        }
    }
    let target = match kind {
        LatticeKind::Quo => Target::QAtoms,
        LatticeKind::Equ => Target::EAtoms,
    };
    let budget = ClosureBudget::new(max_elements, target);
    let fast = anchored_closure(generators, &budget, promote)?;
    if fast.report.stop_reason == StopReason::TargetAtomsFound {
        return Ok(GenerationReport { outcome: Generation::Generates, closure: fast.report });
    }
    let c = closure(generators, &budget)?;
    Ok(GenerationReport { outcome: Generation::from_stop(c.report.stop_reason), closure: c.report })
}
