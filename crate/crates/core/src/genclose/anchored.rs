//! Anchored closure: a fast, incomplete search inside the generated sublattice.
//!
//! Every discovered element is combined with the anchors only. Generators,
//! target atoms and small elements (at most `promote` off-diagonal pairs)
//! become anchors. All discovered elements lie in the sublattice, so reaching
//! every target proves generation; running dry proves nothing.

use std::time::Instant;

use super::{prepare, Closure, ClosureBudget, ClosureError, ClosureReport, Discovered, StopReason, Strategy};
use crate::relcore::{bits, Relation};

/// Promotion threshold used when none is given.
pub const DEFAULT_PROMOTE: usize = 6;

enum Step {
    Continue,
    Stop(StopReason),
}

struct Anchored<'a> {
    found: Discovered,
    depth: Vec<u32>,
    anchors: Vec<usize>,
    pending: Vec<usize>,
    scratch: Vec<u64>,
    promote: usize,
    budget: &'a ClosureBudget,
}

impl Anchored<'_> {
    fn is_small(&self, rows: &[u64]) -> bool {
        let mut off = 0usize;
        for (i, r) in rows.iter().enumerate() {
            off += (r & !bits::bit(i)).count_ones() as usize;
            if off > self.promote {
                return false;
            }
        }
        true
    }

    fn combine(&mut self, a: usize, b: usize) -> Step {
        let stride = self.found.stride;
        for meet in [true, false] {
            let ra = &self.found.arena[a * stride..(a + 1) * stride];
            let rb = &self.found.arena[b * stride..(b + 1) * stride];
            if meet {
                bits::meet_into(ra, rb, &mut self.scratch);
            } else {
                bits::join_into(ra, rb, &mut self.scratch);
            }
            if !self.found.record(&self.scratch) {
                continue;
            }
            if self.found.len() > self.budget.max_elements {
                self.found.pop();
                return Step::Stop(StopReason::BudgetExceeded);
            }
            let id = self.found.len() - 1;
            self.depth.push(self.depth[a].max(self.depth[b]) + 1);
            if self.found.target_index.contains_key(self.scratch.as_slice()) || self.is_small(&self.scratch) {
                self.anchors.push(id);
                self.pending.push(id);
            }
            if self.found.required > 0 && self.found.all_found() {
                return Step::Stop(StopReason::TargetAtomsFound);
            }
        }
        Step::Continue
    }

    fn run(&mut self) -> StopReason {
        if self.found.required > 0 && self.found.all_found() {
            return StopReason::TargetAtomsFound;
        }
        let mut next = 0usize;
        loop {
            // a freshly promoted anchor catches up with everything processed so far
            while let Some(anchor) = self.pending.pop() {
                for other in 0..next {
                    if let Step::Stop(r) = self.combine(anchor, other) {
                        return r;
                    }
                }
            }
            if next == self.found.len() {
                return StopReason::AnchorsExhausted;
            }
            let x = next;
            next += 1;
            // anchors promoted during this pass meet x through the catch-up above
            for ai in 0..self.anchors.len() {
                let anchor = self.anchors[ai];
                if let Step::Stop(r) = self.combine(x, anchor) {
                    return r;
                }
            }
        }
    }
}

/// Runs the anchored search; `budget.max_depth` is ignored.
///
/// Stops with `target-atoms-found`, `budget-exceeded` or `anchors-exhausted`;
/// it never claims saturation.
pub fn anchored_closure(
    generators: &[Relation],
    budget: &ClosureBudget,
    promote: usize,
) -> Result<Closure, ClosureError> {
    let start = Instant::now();
    let (ground, targets, found) = prepare(generators, &budget.target)?;
    let stride = found.stride;
    let gen_count = found.len();
    if budget.max_elements < gen_count {
        return Err(ClosureError::InvalidBudget { max_elements: budget.max_elements, generators: gen_count });
    }
    let mut state = Anchored {
        depth: vec![0; gen_count],
        anchors: (0..gen_count).collect(),
        pending: Vec::new(),
        scratch: vec![0; stride],
        promote,
        budget,
        found,
    };
    let stop_reason = state.run();
    let depth_reached = state.depth.iter().copied().max().unwrap_or(0) as usize;
    let found = state.found;
    Ok(Closure {
        report: ClosureReport {
            discovered: found.len(),
            stop_reason,
            atoms_found: found.found_names(targets.as_deref()),
            atoms_required: found.required,
            depth_reached,
            strategy: Strategy::Anchored,
            elapsed_ms: start.elapsed().as_millis(),
        },
        ground,
        stride,
        arena: found.arena,
    })
}
