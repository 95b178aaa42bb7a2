//! The disjoint paths principle.
//!
//! Two paths of `q`/`e` atoms from `x` to `y` whose interiors are disjoint and
//! duplicate free, with at least one directed (`q`) step overall, meet in
//! exactly `q(x,y)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relcore::{bits, GroundSet, RelError, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Q,
    E,
}

/// One atom `q(from,to)` or `e(from,to)` of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PathStep {
    pub from: usize,
    pub to: usize,
    pub kind: StepKind,
}

impl PathStep {
    pub fn q(from: usize, to: usize) -> Self {
        PathStep { from, to, kind: StepKind::Q }
    }

    pub fn e(from: usize, to: usize) -> Self {
        PathStep { from, to, kind: StepKind::E }
    }

    pub fn atom(&self, ground: &Arc<GroundSet>) -> Result<Relation, RelError> {
        match self.kind {
            StepKind::Q => Relation::q(ground, self.from, self.to),
            StepKind::E => Relation::e(ground, self.from, self.to),
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Q => "q",
            StepKind::E => "e",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DppError {
    #[error("path {0} is empty")]
    EmptyPath(usize),
    #[error("path {path} is not contiguous at step {step}")]
    NotContiguous { path: usize, step: usize },
    #[error("the two paths do not share both endpoints")]
    EndpointMismatch,
    #[error("the endpoints coincide")]
    LoopPath,
    #[error("path {path} visits `{vertex}` twice or passes through an endpoint")]
    RepeatedVertex { path: usize, vertex: String },
    #[error("the path interiors share `{0}`")]
    InteriorsIntersect(String),
    #[error("no step of either path is directed; the meet would be e(x,y)")]
    NoDirectedStep,
    #[error("meet of the path joins is {got}, not q({x},{y})")]
    ConclusionFailed { x: String, y: String, got: String },
    #[error(transparent)]
    Rel(#[from] RelError),
}

/// The two path joins, their meet, and the atom they certify.
#[derive(Debug, Clone)]
pub struct DppOutcome {
    pub x: usize,
    pub y: usize,
    pub join1: Relation,
    pub join2: Relation,
    pub meet: Relation,
}

impl DppOutcome {
    pub fn atom(&self) -> &Relation {
        &self.meet
    }
}

fn endpoints(path: &[PathStep], which: usize) -> Result<(usize, usize), DppError> {
    let first = path.first().ok_or(DppError::EmptyPath(which))?;
    for (step, w) in path.windows(2).enumerate() {
        if w[0].to != w[1].from {
            return Err(DppError::NotContiguous { path: which, step: step + 1 });
        }
    }
    Ok((first.from, path[path.len() - 1].to))
}

/// Interior vertex mask, rejecting repeats and returns to an endpoint.
fn interior(path: &[PathStep], which: usize, x: usize, y: usize, ground: &GroundSet) -> Result<u64, DppError> {
    let mut mask = bits::bit(x) | bits::bit(y);
    for step in &path[..path.len() - 1] {
        let v = step.to;
        if mask & bits::bit(v) != 0 {
            return Err(DppError::RepeatedVertex { path: which, vertex: ground.label(v).to_string() });
        }
        mask |= bits::bit(v);
    }
    Ok(mask & !(bits::bit(x) | bits::bit(y)))
}

fn path_join(ground: &Arc<GroundSet>, path: &[PathStep]) -> Result<Relation, RelError> {
    let mut acc = Relation::delta(ground);
    for step in path {
        acc = acc.join(&step.atom(ground)?)?;
    }
    Ok(acc)
}

/// Checks the hypotheses on two paths and returns the meet of their joins,
/// which is verified to equal `q(x,y)`.
pub fn dpp(ground: &Arc<GroundSet>, path1: &[PathStep], path2: &[PathStep]) -> Result<DppOutcome, DppError> {
    let n = ground.size();
    for step in path1.iter().chain(path2) {
        for v in [step.from, step.to] {
            if v >= n {
                return Err(RelError::IndexOutOfRange(v).into());
            }
        }
    }
    let (x, y) = endpoints(path1, 1)?;
    if endpoints(path2, 2)? != (x, y) {
        return Err(DppError::EndpointMismatch);
    }
    if x == y {
        return Err(DppError::LoopPath);
    }
    let inner1 = interior(path1, 1, x, y, ground)?;
    let inner2 = interior(path2, 2, x, y, ground)?;
    if let Some(v) = bits::ones(inner1 & inner2).next() {
        return Err(DppError::InteriorsIntersect(ground.label(v).to_string()));
    }
    if !path1.iter().chain(path2).any(|s| s.kind == StepKind::Q) {
        return Err(DppError::NoDirectedStep);
    }
    let join1 = path_join(ground, path1)?;
    let join2 = path_join(ground, path2)?;
    let meet = join1.meet(&join2)?;
    if meet != Relation::q(ground, x, y)? {
        return Err(DppError::ConclusionFailed {
            x: ground.label(x).to_string(),
            y: ground.label(y).to_string(),
            got: meet.pairs_display(),
        });
    }
    Ok(DppOutcome { x, y, join1, join2, meet })
}
