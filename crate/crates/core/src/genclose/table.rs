use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::ClosureError;
use crate::lattice::{IndexedLattice, OpTables};

/// Reusable table-driven closure over element ids of an enumerated lattice.
pub struct TableCloser<'a> {
    tables: &'a OpTables,
    is_atom: Vec<bool>,
    atom_count: usize,
    top: u32,
    bottom: u32,
    stamp: Vec<u32>,
    round: u32,
    list: Vec<u32>,
}

impl<'a> TableCloser<'a> {
    pub fn new(lat: &'a IndexedLattice) -> Result<Self, ClosureError> {
        let tables = lat.tables().ok_or(ClosureError::MissingTables)?;
        let mut is_atom = vec![false; lat.len()];
        let atoms = lat.atom_ids();
        for &a in &atoms {
            is_atom[a as usize] = true;
        }
        Ok(TableCloser {
            tables,
            is_atom,
            atom_count: atoms.len(),
            top: lat.top(),
            bottom: lat.bottom(),
            stamp: vec![0; lat.len()],
            round: 0,
            list: Vec::new(),
        })
    }

    /// Necessary condition for generation: the members join to the top and meet to the bottom.
    pub fn spans_top_and_bottom(&self, ids: &[u32]) -> bool {
        let Some((&first, rest)) = ids.split_first() else {
            return false;
        };
        let (mut j, mut m) = (first, first);
        for &x in rest {
            j = self.tables.join(j, x);
            m = self.tables.meet(m, x);
        }
        j == self.top && m == self.bottom
    }

    /// True iff `ids` generate the whole lattice, i.e. their closure reaches every atom.
    pub fn generates(&mut self, ids: &[u32]) -> bool {
        self.round = self.round.wrapping_add(1);
        if self.round == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.round = 1;
        }
        let round = self.round;
        self.list.clear();
        let mut atoms_seen = 0usize;
        let full = self.stamp.len();
        for &g in ids {
            if self.stamp[g as usize] != round {
                self.stamp[g as usize] = round;
                self.list.push(g);
                if self.is_atom[g as usize] {
                    atoms_seen += 1;
                }
            }
        }
        let done = |seen: usize, len: usize, atoms: usize| (atoms > 0 && seen == atoms) || len == full;
        if done(atoms_seen, self.list.len(), self.atom_count) {
            return true;
        }
        let mut i = 0;
        while i < self.list.len() {
            let a = self.list[i];
            for j in 0..i {
                let b = self.list[j];
                for c in [self.tables.meet(a, b), self.tables.join(a, b)] {
                    if self.stamp[c as usize] != round {
                        self.stamp[c as usize] = round;
                        self.list.push(c);
                        if self.is_atom[c as usize] {
                            atoms_seen += 1;
                        }
                        if done(atoms_seen, self.list.len(), self.atom_count) {
                            return true;
                        }
                    }
                }
            }
            i += 1;
        }
        false
    }

    /// Size of the most recent closure (complete only when `generates` returned false).
    pub fn last_closure_len(&self) -> usize {
        self.list.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefuteReport {
    pub k: usize,
    /// True iff no `k`-subset generates the lattice.
    pub refuted: bool,
    pub examined: u64,
    pub pruned: u64,
    /// The first generating subset, in lexicographic order, when one exists.
    pub witness: Option<Vec<u32>>,
}

/// Exhaustively checks every `k`-subset of a tabled lattice for generation.
pub fn refute_k_generation(lat: &IndexedLattice, k: usize) -> Result<RefuteReport, ClosureError> {
    let mut closer = TableCloser::new(lat)?;
    let mut examined = 0u64;
    let mut pruned = 0u64;
    for subset in (0..lat.len() as u32).combinations(k) {
        examined += 1;
        if !closer.spans_top_and_bottom(&subset) {
            pruned += 1;
            continue;
        }
        if closer.generates(&subset) {
            return Ok(RefuteReport { k, refuted: false, examined, pruned, witness: Some(subset) });
        }
    }
    Ok(RefuteReport { k, refuted: true, examined, pruned, witness: None })
}
