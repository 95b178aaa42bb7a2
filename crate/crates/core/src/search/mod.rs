//! Sharded, resumable search for generating subsets of a tabled lattice.
//!
//! Candidates are the sorted `k`-subsets of element ids in colex order; a
//! shard is a contiguous range of colex ranks. Each candidate passes through
//! the shape filter, the orbit filter (keep only orbit representatives under
//! ground-set permutations), the top/bottom prune and finally a table-driven
//! closure. Findings are appended to a JSONL stream as soon as a block of
//! candidates completes; the checkpoint records the cursor together with the
//! byte length of that stream, so a resumed run first truncates any findings
//! written after the last checkpoint.

mod colex;
mod orbit;

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genclose::TableCloser;
use crate::lattice::{IndexedLattice, LatticeError, LatticeKind};
use crate::relcore::RelationJson;

pub use colex::{binomial, next as colex_next, rank as colex_rank, subset_count, unrank as colex_unrank};
pub use orbit::{orbit_representative, orbit_size};

/// Checkpoint format version.
pub const CHECKPOINT_VERSION: u32 = 1;
/// Default number of candidates between checkpoints.
pub const DEFAULT_CHECKPOINT_EVERY: u64 = 1_000_000;
/// Candidates handed to one worker at a time.
const CHUNK: u64 = 8192;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid lattice reference `{0}` (expected quo:N or equ:N)")]
    BadLatticeRef(String),
    #[error("unknown shape `{0}` (expected any, antichain or one-one-two)")]
    BadShape(String),
    #[error("shard index {index} is not below the shard count {of}")]
    BadShard { index: u64, of: u64 },
    #[error("subset size {size} is invalid for a lattice of {len} elements")]
    BadSize { size: usize, len: usize },
    #[error("shape one-one-two needs subset size 4, got {0}")]
    ShapeNeedsFour(usize),
    #[error("the candidate count C({len},{size}) does not fit in 64 bits")]
    TooManyCandidates { len: usize, size: usize },
    #[error("checkpoint belongs to a different task")]
    CheckpointMismatch,
    #[error("unsupported checkpoint version {0}")]
    CheckpointVersion(u32),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Closure(#[from] crate::genclose::ClosureError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SearchError + '_ {
    move |source| SearchError::Io { path: path.to_path_buf(), source }
}

/// A lattice named as `quo:N` or `equ:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeRef {
    pub kind: LatticeKind,
    pub n: usize,
}

impl LatticeRef {
    /// Enumerates the lattice and builds its operation tables.
    pub fn build(self) -> Result<IndexedLattice, SearchError> {
        Ok(IndexedLattice::enumerate(self.kind, self.n)?.build_op_tables()?)
    }
}

impl FromStr for LatticeRef {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SearchError::BadLatticeRef(s.to_string());
        let (kind, n) = s.split_once(':').ok_or_else(bad)?;
        Ok(LatticeRef { kind: kind.parse().map_err(|_| bad())?, n: n.parse().map_err(|_| bad())? })
    }
}

impl fmt::Display for LatticeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Any,
    /// No two members comparable.
    Antichain,
    /// Four members with exactly one comparable pair.
    OneOneTwo,
}

impl FromStr for Shape {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Shape::Any),
            "antichain" => Ok(Shape::Antichain),
            "one-one-two" | "112" => Ok(Shape::OneOneTwo),
            _ => Err(SearchError::BadShape(s.to_string())),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Any => "any",
            Shape::Antichain => "antichain",
            Shape::OneOneTwo => "one-one-two",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub index: u64,
    pub of: u64,
}

impl Shard {
    pub const WHOLE: Shard = Shard { index: 0, of: 1 };

    /// The half-open rank range `[start, end)` of this shard out of `total`.
    pub fn range(self, total: u64) -> (u64, u64) {
        let bound = |i: u64| (u128::from(total) * u128::from(i) / u128::from(self.of)) as u64;
        (bound(self.index), bound(self.index + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTask {
    pub lattice: LatticeRef,
    pub subset_size: usize,
    pub shape: Shape,
    pub orbit_reduction: bool,
    /// Skip candidates whose join is not the top or whose meet is not the bottom.
    pub prune: bool,
    pub shard: Shard,
}

impl SearchTask {
    pub fn new(lattice: LatticeRef, subset_size: usize, shape: Shape) -> Self {
        SearchTask { lattice, subset_size, shape, orbit_reduction: true, prune: true, shard: Shard::WHOLE }
    }

    pub fn with_shard(mut self, index: u64, of: u64) -> Self {
        self.shard = Shard { index, of };
        self
    }

    pub fn validate(&self, lattice_len: usize) -> Result<u64, SearchError> {
        let Shard { index, of } = self.shard;
        if of == 0 || index >= of {
            return Err(SearchError::BadShard { index, of });
        }
        if self.subset_size == 0 || self.subset_size > lattice_len {
            return Err(SearchError::BadSize { size: self.subset_size, len: lattice_len });
        }
        if self.shape == Shape::OneOneTwo && self.subset_size != 4 {
            return Err(SearchError::ShapeNeedsFour(self.subset_size));
        }
        subset_count(lattice_len, self.subset_size)
            .ok_or(SearchError::TooManyCandidates { len: lattice_len, size: self.subset_size })
    }
}

/// Where a run persists its state, and how much it may do.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub checkpoint: Option<PathBuf>,
    pub findings: Option<PathBuf>,
    /// Stop after examining this many candidates in this run.
    pub max_candidates: Option<u64>,
    pub checkpoint_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            checkpoint: None,
            findings: None,
            max_candidates: None,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub examined: u64,
    pub shape_rejected: u64,
    pub orbit_skipped: u64,
    pub pruned: u64,
    pub closures: u64,
}

impl Counters {
    fn add(&mut self, other: &Counters) {
        self.examined += other.examined;
        self.shape_rejected += other.shape_rejected;
        self.orbit_skipped += other.orbit_skipped;
        self.pruned += other.pruned;
        self.closures += other.closures;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub task: SearchTask,
    /// Next colex rank to examine.
    pub cursor: u64,
    pub examined: u64,
    pub counters: Counters,
    pub found: Vec<Vec<u32>>,
    /// Length of the findings stream when this checkpoint was written.
    pub findings_bytes: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Option<Checkpoint>, SearchError> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(path)(e)),
        };
        let cp: Checkpoint =
            serde_json::from_str(&text).map_err(|source| SearchError::Json { path: path.to_path_buf(), source })?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(SearchError::CheckpointVersion(cp.version));
        }
        Ok(Some(cp))
    }

    /// Writes through a temporary file and renames it into place.
    pub fn store(&self, path: &Path) -> Result<(), SearchError> {
        let tmp = path.with_extension("tmp");
        let text = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        fs::write(&tmp, text).map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub task: SearchTask,
    pub range: (u64, u64),
    pub cursor: u64,
    pub candidates_examined: u64,
    pub candidates_pruned: u64,
    pub counters: Counters,
    pub generating_sets_found: Vec<Vec<u32>>,
    /// True iff the cursor reached the end of the shard.
    pub exhausted: bool,
    pub resumed_from: Option<u64>,
    pub elapsed_ms: u128,
}

/// One line of the findings stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub ids: Vec<u32>,
    pub relations: Vec<RelationJson>,
}

/// Progress snapshot passed to the caller after every block.
#[derive(Debug, Clone, Copy)]
pub struct Progress {
    pub cursor: u64,
    pub end: u64,
    pub examined: u64,
    pub found: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ShapeRejected,
    OrbitSkipped,
    Pruned,
    NotGenerating,
    Generating,
}

/// Counters and findings of one scanned range.
type ChunkResult = (Counters, Vec<Vec<u32>>);

/// Precomputed data for classifying candidates of one lattice.
pub struct Searcher<'a> {
    lat: &'a IndexedLattice,
    /// `leq[a * len + b]` iff element `a` is below element `b`.
    leq: Vec<bool>,
    group: Vec<Vec<u32>>,
}

impl<'a> Searcher<'a> {
    pub fn new(lat: &'a IndexedLattice) -> Result<Self, SearchError> {
        let tables = lat.tables().ok_or(crate::genclose::ClosureError::MissingTables)?;
        let len = lat.len();
        let mut leq = vec![false; len * len];
        for a in 0..len as u32 {
            for b in 0..len as u32 {
                leq[a as usize * len + b as usize] = tables.meet(a, b) == a;
            }
        }
        // the identity map filters nothing
        let group = lat.permutation_tables().into_iter().skip(1).collect();
        Ok(Searcher { lat, leq, group })
    }

    pub fn lattice(&self) -> &IndexedLattice {
        self.lat
    }

    /// The non-identity id maps induced by ground-set permutations.
    pub fn group(&self) -> &[Vec<u32>] {
        &self.group
    }

    fn comparable_pairs(&self, ids: &[u32]) -> usize {
        let len = self.lat.len();
        let mut count = 0;
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if self.leq[a as usize * len + b as usize] || self.leq[b as usize * len + a as usize] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn shape_ok(&self, shape: Shape, ids: &[u32]) -> bool {
        match shape {
            Shape::Any => true,
            Shape::Antichain => self.comparable_pairs(ids) == 0,
            Shape::OneOneTwo => ids.len() == 4 && self.comparable_pairs(ids) == 1,
        }
    }

    /// Runs the filter pipeline on one sorted candidate.
    pub fn classify(
        &self,
        task: &SearchTask,
        ids: &[u32],
        closer: &mut TableCloser,
        scratch: &mut Vec<u32>,
    ) -> Verdict {
        if !self.shape_ok(task.shape, ids) {
            return Verdict::ShapeRejected;
        }
        if task.orbit_reduction && !orbit::is_canonical(ids, &self.group, scratch) {
            return Verdict::OrbitSkipped;
        }
        if task.prune && !closer.spans_top_and_bottom(ids) {
            return Verdict::Pruned;
        }
        if closer.generates(ids) {
            Verdict::Generating
        } else {
            Verdict::NotGenerating
        }
    }

    fn finding(&self, ids: &[u32]) -> Finding {
        Finding { ids: ids.to_vec(), relations: ids.iter().map(|&i| self.lat.element(i).to_json()).collect() }
    }

    /// Examines ranks `[start, end)` in parallel; findings come back in rank order.
    fn scan(&self, task: &SearchTask, start: u64, end: u64) -> Result<ChunkResult, SearchError> {
        let (k, n) = (task.subset_size, self.lat.len());
        let chunks: Vec<(u64, u64)> = (start..end).step_by(CHUNK as usize).map(|s| (s, (s + CHUNK).min(end))).collect();
        let results: Result<Vec<ChunkResult>, SearchError> = chunks
            .into_par_iter()
            .map_init(
                || TableCloser::new(self.lat).map(|c| (c, Vec::new())),
                |state, (lo, hi)| {
                    let (closer, scratch) = state.as_mut().map_err(|e| e.clone())?;
                    let mut counters = Counters::default();
                    let mut found = Vec::new();
                    let mut ids = colex::unrank(lo, k, n);
                    for r in lo..hi {
                        counters.examined += 1;
                        match self.classify(task, &ids, closer, scratch) {
                            Verdict::ShapeRejected => counters.shape_rejected += 1,
                            Verdict::OrbitSkipped => counters.orbit_skipped += 1,
                            Verdict::Pruned => counters.pruned += 1,
                            Verdict::NotGenerating => counters.closures += 1,
                            Verdict::Generating => {
                                counters.closures += 1;
                                found.push(ids.clone());
                            }
                        }
                        if r + 1 < hi {
                            colex::next(&mut ids, n);
                        }
                    }
                    Ok((counters, found))
                },
            )
            .collect();
        let mut counters = Counters::default();
        let mut found = Vec::new();
        for (c, f) in results? {
            counters.add(&c);
            found.extend(f);
        }
        Ok((counters, found))
    }
}

fn open_findings(path: &Path, keep_bytes: u64) -> Result<File, SearchError> {
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    let len = file.metadata().map_err(io_err(path))?.len();
    if len > keep_bytes {
        file.set_len(keep_bytes).map_err(io_err(path))?;
    }
    Ok(file)
}

/// Runs (or resumes) one shard of `task` on the tabled lattice `lat`.
///
/// With a checkpoint path, an existing checkpoint for the same task is resumed
/// and a new one is written after every `checkpoint_every` candidates and at
/// the end. `progress` is called after every block.
pub fn run_search_with(
    searcher: &Searcher,
    task: &SearchTask,
    opts: &RunOptions,
    mut progress: impl FnMut(&Progress),
) -> Result<SearchReport, SearchError> {
    let started = Instant::now();
    let total = task.validate(searcher.lat.len())?;
    let (start, end) = task.shard.range(total);

    let mut state = Checkpoint {
        version: CHECKPOINT_VERSION,
        task: task.clone(),
        cursor: start,
        examined: 0,
        counters: Counters::default(),
        found: Vec::new(),
        findings_bytes: 0,
    };
    let mut resumed_from = None;
    if let Some(path) = &opts.checkpoint {
        if let Some(cp) = Checkpoint::load(path)? {
            if cp.task != *task {
                return Err(SearchError::CheckpointMismatch);
            }
            resumed_from = Some(cp.cursor);
            state = cp;
        }
    }
    let mut findings = match &opts.findings {
        Some(path) => Some((open_findings(path, state.findings_bytes)?, path)),
        None => None,
    };

    let budget_end = match opts.max_candidates {
        Some(m) => state.cursor.saturating_add(m).min(end),
        None => end,
    };
    let step = opts.checkpoint_every.max(1);
    while state.cursor < budget_end {
        let block_end = (state.cursor + step).min(budget_end);
        let (counters, found) = searcher.scan(task, state.cursor, block_end)?;
        if let Some((file, path)) = findings.as_mut() {
            for ids in &found {
                let mut line = serde_json::to_string(&searcher.finding(ids)).expect("finding serializes");
                line.push('\n');
                file.write_all(line.as_bytes()).map_err(io_err(path))?;
                state.findings_bytes += line.len() as u64;
            }
            file.flush().map_err(io_err(path))?;
        }
        state.counters.add(&counters);
        state.examined = state.counters.examined;
        state.found.extend(found);
        state.cursor = block_end;
        if let Some(path) = &opts.checkpoint {
            state.store(path)?;
        }
        progress(&Progress { cursor: state.cursor, end, examined: state.examined, found: state.found.len() });
    }
    if let Some(path) = &opts.checkpoint {
        state.store(path)?;
    }

    Ok(SearchReport {
        task: task.clone(),
        range: (start, end),
        cursor: state.cursor,
        candidates_examined: state.counters.examined,
        candidates_pruned: state.counters.pruned,
        counters: state.counters,
        generating_sets_found: state.found,
        exhausted: state.cursor == end,
        resumed_from,
        elapsed_ms: started.elapsed().as_millis(),
    })
}

/// Builds the lattice named by the task and runs it without persistence.
pub fn run_search(task: &SearchTask) -> Result<SearchReport, SearchError> {
    let lat = task.lattice.build()?;
    let searcher = Searcher::new(&lat)?;
    run_search_with(&searcher, task, &RunOptions::default(), |_| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignOutcome {
    Found,
    ExhaustedEmpty,
    BudgetStopped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub lattice: LatticeRef,
    pub subset_size: usize,
    pub total_candidates: u64,
    pub examined: u64,
    pub found: Vec<Vec<u32>>,
    pub outcome: CampaignOutcome,
    pub shards: Vec<SearchReport>,
}

/// Runs every shard of `base` in turn, each with its own checkpoint and
/// findings file in `dir`, stopping each shard after `budget` candidates.
pub fn run_campaign(
    searcher: &Searcher,
    base: &SearchTask,
    shards: u64,
    budget: Option<u64>,
    dir: &Path,
    mut progress: impl FnMut(u64, &Progress),
) -> Result<CampaignReport, SearchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let total = base.validate(searcher.lat.len())?;
    let mut reports = Vec::new();
    for index in 0..shards {
        let task = base.clone().with_shard(index, shards);
        let opts = RunOptions {
            checkpoint: Some(dir.join(format!("shard-{index}.json"))),
            findings: Some(dir.join(format!("findings-{index}.jsonl"))),
            max_candidates: budget,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
        };
        reports.push(run_search_with(searcher, &task, &opts, |p| progress(index, p))?);
    }
    let found: Vec<Vec<u32>> = reports.iter().flat_map(|r| r.generating_sets_found.clone()).collect();
    let outcome = if !found.is_empty() {
        CampaignOutcome::Found
    } else if reports.iter().all(|r| r.exhausted) {
        CampaignOutcome::ExhaustedEmpty
    } else {
        CampaignOutcome::BudgetStopped
    };
    Ok(CampaignReport {
        lattice: base.lattice,
        subset_size: base.subset_size,
        total_candidates: total,
        examined: reports.iter().map(|r| r.candidates_examined).sum(),
        found,
        outcome,
        shards: reports,
    })
}

/// The four-generation question for `Quo 4`: all 4-subsets, any shape, with
/// orbit reduction and pruning. The outcome is reported, never presumed.
pub fn quo4_campaign(
    shards: u64,
    budget: Option<u64>,
    dir: &Path,
    progress: impl FnMut(u64, &Progress),
) -> Result<CampaignReport, SearchError> {
    let lattice = LatticeRef { kind: LatticeKind::Quo, n: 4 };
    let lat = lattice.build()?;
    let searcher = Searcher::new(&lat)?;
    run_campaign(&searcher, &SearchTask::new(lattice, 4, Shape::Any), shards, budget, dir, progress)
}
