//! Constructive derivation of every `q`-atom on a cycle from all `e`-atoms of
//! the cycle and one non-symmetric quasiorder `rho`.
//!
//! Write the cycle as `a0 a1 .. a(m-1)` with `(a0,a1)` in `rho` and `(a1,a0)`
//! not in it. Edge `i` joins `a_i` and `a_(i+1)` (indices mod `m`). The
//! statements derive, in order:
//!
//! 1. `q(a0,a1) = e(a0,a1) & rho`;
//! 2. `q(a_(i+1),a_i)` for `i = 1..m-1`, against the long way round through `q(a0,a1)`;
//! 3. `q(a_i,a_(i+1))` for `i = 2..m-1`, against the long way round through `q(a2,a1)`;
//! 4. `q(a1,a2)` through `q(a3,a2)`, then `q(a1,a0)` through `q(a1,a2)`;
//! 5. `q(a_i,a_j)` for non-adjacent `i, j`, from the two directed arcs between them.

use std::sync::Arc;

use thiserror::Error;

use super::cert::{PathLit, Statement};
use super::term::Term;
use crate::genclose::StepKind;
use crate::relcore::{GroundSet, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KulinError {
    #[error("rho is symmetric; it must lie outside the equivalence lattice")]
    Symmetric,
    #[error("the cycle needs at least 3 elements, got {0}")]
    TooShort(usize),
    #[error("cycle entry {0} is out of range or repeated")]
    BadCycle(usize),
    #[error("the cycle must start with a pair (x,y) in rho whose reverse is not in rho")]
    BadStart,
}

/// The first pair `(x,y)` of `rho` in row-major order with `(y,x)` outside
/// `rho`, followed by the remaining ground elements in order.
pub fn default_cycle(rho: &Relation) -> Option<Vec<usize>> {
    let (x, y) = rho.pairs().find(|&(x, y)| !rho.contains(y, x))?;
    let mut cycle = vec![x, y];
    cycle.extend((0..rho.size()).filter(|&v| v != x && v != y));
    Some(cycle)
}

/// Emits `m(m-1)` statements deriving every `q(u,v)` with `u != v` on the cycle.
pub fn kulin_derivation(
    ground: &Arc<GroundSet>,
    rho_name: &str,
    rho: &Relation,
    cycle: &[usize],
) -> Result<Vec<Statement>, KulinError> {
    if rho.is_symmetric() {
        return Err(KulinError::Symmetric);
    }
    let m = cycle.len();
    if m < 3 {
        return Err(KulinError::TooShort(m));
    }
    let mut seen = vec![false; ground.size()];
    for (i, &v) in cycle.iter().enumerate() {
        if v >= ground.size() || std::mem::replace(&mut seen[v], true) {
            return Err(KulinError::BadCycle(i));
        }
    }
    if !rho.contains(cycle[0], cycle[1]) || rho.contains(cycle[1], cycle[0]) {
        return Err(KulinError::BadStart);
    }

    let label = |i: usize| ground.label(cycle[i % m]).to_string();
    let step = |kind: StepKind, from: usize, to: usize| PathLit { kind, from: label(from), to: label(to) };
    // walking forward from i to j visits i, i+1, .., j
    let forward = |i: usize, j: usize, q_edge: Option<usize>| -> Vec<PathLit> {
        let len = (j + m - i) % m;
        (0..len)
            .map(|s| {
                let a = (i + s) % m;
                let kind = if q_edge.is_none_or(|e| e == a) { StepKind::Q } else { StepKind::E };
                step(kind, a, a + 1)
            })
            .collect()
    };
    // walking backward from i to j visits i, i-1, .., j; edge e is {a_e, a_(e+1)}
    let backward = |i: usize, j: usize, q_edge: Option<usize>| -> Vec<PathLit> {
        let len = (i + m - j) % m;
        (0..len)
            .map(|s| {
                let a = (i + m - s) % m;
                let b = (a + m - 1) % m;
                let kind = if q_edge.is_none_or(|e| e == b) { StepKind::Q } else { StepKind::E };
                step(kind, a, b)
            })
            .collect()
    };
    let dpp = |x: usize, y: usize, path1: Vec<PathLit>, path2: Vec<PathLit>| Statement::AssertDpp {
        x: label(x),
        y: label(y),
        path1,
        path2,
    };
    let direct = |from: usize, to: usize| vec![step(StepKind::E, from, to)];

    let mut out = Vec::with_capacity(m * (m - 1));
    out.push(Statement::AssertAtom {
        kind: StepKind::Q,
        x: label(0),
        y: label(1),
        term: Term::e(label(0), label(1)).meet(Term::sym(rho_name)),
    });
    for i in 1..m {
        let (hi, lo) = ((i + 1) % m, i);
        out.push(dpp(hi, lo, direct(hi, lo), forward(hi, lo, Some(0))));
    }
    for i in 2..m {
        let (lo, hi) = (i, (i + 1) % m);
        out.push(dpp(lo, hi, direct(lo, hi), backward(lo, hi, Some(1))));
    }
    out.push(dpp(1, 2, direct(1, 2), backward(1, 2, Some(2))));
    out.push(dpp(1, 0, direct(1, 0), forward(1, 0, Some(1))));
    for i in 0..m {
        for j in 0..m {
            let gap = (j + m - i) % m;
            if gap < 2 || gap > m - 2 {
                continue;
            }
            out.push(dpp(i, j, forward(i, j, None), backward(i, j, None)));
        }
    }
    Ok(out)
}
