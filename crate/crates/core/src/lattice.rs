//! Exhaustive enumeration of `Quo n` and `Equ n` as indexed lattices.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relcore::{bits, GroundSet, Permutation, RelError, Relation};

/// Largest `n` for which `Quo n` is enumerated.
pub const QUO_MAX_N: usize = 6;
/// Largest `n` for which `Equ n` is enumerated.
pub const EQU_MAX_N: usize = 13;
/// Largest lattice for which dense meet/join tables are built.
pub const TABLE_MAX_ELEMENTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Quo,
    Equ,
}

impl LatticeKind {
    pub fn max_n(self) -> usize {
        match self {
            LatticeKind::Quo => QUO_MAX_N,
            LatticeKind::Equ => EQU_MAX_N,
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::Quo => "quo",
            LatticeKind::Equ => "equ",
        })
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quo" => Ok(LatticeKind::Quo),
            "equ" => Ok(LatticeKind::Equ),
            other => Err(LatticeError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("{kind} {n} is outside the supported range 1..={max}")]
    OutOfRange { kind: LatticeKind, n: usize, max: usize },
    #[error("unknown lattice kind `{0}` (expected quo or equ)")]
    UnknownKind(String),
    #[error("lattice has {0} elements; operation tables are capped at {TABLE_MAX_ELEMENTS}")]
    TooLargeForTables(usize),
    #[error("the four relations must be pairwise distinct")]
    DuplicateMembers,
    #[error(transparent)]
    Rel(#[from] RelError),
}

/// Dense `id x id` meet and join tables.
#[derive(Debug, Clone)]
pub struct OpTables {
    len: usize,
    meet: Vec<u32>,
    join: Vec<u32>,
}

impl OpTables {
    #[inline]
    pub fn meet(&self, a: u32, b: u32) -> u32 {
        self.meet[a as usize * self.len + b as usize]
    }

    #[inline]
    pub fn join(&self, a: u32, b: u32) -> u32 {
        self.join[a as usize * self.len + b as usize]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// All quasiorders (or all equivalences) of a finite set, numbered in a
/// deterministic breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct IndexedLattice {
    ground: Arc<GroundSet>,
    kind: LatticeKind,
    elements: Vec<Relation>,
    key_index: FxHashMap<Box<[u64]>, u32>,
    tables: Option<OpTables>,
}

/// Atom pairs in lexicographic order: all `(x, y)`, `x != y` for `Quo`; `x < y` for `Equ`.
pub fn atom_pairs(kind: LatticeKind, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let keep = match kind {
                LatticeKind::Quo => x != y,
                LatticeKind::Equ => x < y,
            };
            if keep {
                out.push((x, y));
            }
        }
    }
    out
}

/// The atoms of `Quo` (the `q(x,y)`) or `Equ` (the `e(x,y)`) on a ground set.
pub fn atoms(kind: LatticeKind, ground: &Arc<GroundSet>) -> Vec<Relation> {
    atom_pairs(kind, ground.size())
        .into_iter()
        .map(|(x, y)| match kind {
            LatticeKind::Quo => Relation::q(ground, x, y),
            LatticeKind::Equ => Relation::e(ground, x, y),
        })
        .collect::<Result<_, _>>()
        .expect("atom indices come from the ground set")
}

impl IndexedLattice {
    /// Enumerates `Quo n` by saturating `Δ` under joins with the `q`-atoms.
    pub fn enumerate_quo(n: usize) -> Result<Self, LatticeError> {
        Self::enumerate(LatticeKind::Quo, n)
    }

    /// Enumerates `Equ n` by saturating `Δ` under joins with the `e`-atoms.
    pub fn enumerate_equ(n: usize) -> Result<Self, LatticeError> {
        Self::enumerate(LatticeKind::Equ, n)
    }

    pub fn enumerate(kind: LatticeKind, n: usize) -> Result<Self, LatticeError> {
        if n == 0 || n > kind.max_n() {
            return Err(LatticeError::OutOfRange { kind, n, max: kind.max_n() });
        }
        let ground = GroundSet::indexed(n)?;
        Ok(Self::enumerate_on(kind, &ground, &atom_pairs(kind, n)))
    }

    /// Saturation with an explicit atom order; the element set does not depend on it,
    /// only the ids do.
    pub fn enumerate_on(kind: LatticeKind, ground: &Arc<GroundSet>, atom_order: &[(usize, usize)]) -> Self {
        let bottom = Relation::delta(ground);
        let mut elements = vec![bottom.clone()];
        let mut key_index = FxHashMap::default();
        key_index.insert(bottom.key().into(), 0u32);
        let mut scratch = vec![0u64; ground.size()];
        let mut next = 0;
        while next < elements.len() {
            for &(x, y) in atom_order {
                let current = elements[next].rows();
                if current[x] & bits::bit(y) != 0 {
                    continue;
                }
                scratch.copy_from_slice(current);
                bits::add_pair_transitive(&mut scratch, x, y);
                if kind == LatticeKind::Equ {
                    bits::add_pair_transitive(&mut scratch, y, x);
                }
                if !key_index.contains_key(scratch.as_slice()) {
                    let id = elements.len() as u32;
                    let key: Box<[u64]> = scratch.clone().into();
                    elements.push(Relation::from_rows_unchecked(ground, key.clone()));
                    key_index.insert(key, id);
                }
            }
            next += 1;
        }
        IndexedLattice { ground: ground.clone(), kind, elements, key_index, tables: None }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Relation] {
        &self.elements
    }

    pub fn element(&self, id: u32) -> &Relation {
        &self.elements[id as usize]
    }

    pub fn id_of(&self, r: &Relation) -> Option<u32> {
        self.id_of_key(r.key())
    }

    pub fn id_of_key(&self, key: &[u64]) -> Option<u32> {
        self.key_index.get(key).copied()
    }

    /// Id of `Δ`; always 0.
    pub fn bottom(&self) -> u32 {
        0
    }

    pub fn top(&self) -> u32 {
        self.id_of(&Relation::nabla(&self.ground)).expect("enumerated lattice contains its top")
    }

    /// Ids of the atoms in lexicographic pair order.
    pub fn atom_ids(&self) -> Vec<u32> {
        atoms(self.kind, &self.ground).iter().map(|a| self.id_of(a).expect("atoms are enumerated")).collect()
    }

    pub fn tables(&self) -> Option<&OpTables> {
        self.tables.as_ref()
    }

    /// Builds dense meet and join tables.
    pub fn build_op_tables(mut self) -> Result<Self, LatticeError> {
        let len = self.len();
        if len > TABLE_MAX_ELEMENTS {
            return Err(LatticeError::TooLargeForTables(len));
        }
        let rows: Vec<(Vec<u32>, Vec<u32>)> = (0..len)
            .into_par_iter()
            .map(|i| {
                let mut scratch = vec![0u64; self.ground.size()];
                let a = self.elements[i].rows();
                let mut meet_row = Vec::with_capacity(len);
                let mut join_row = Vec::with_capacity(len);
                for other in &self.elements {
                    bits::meet_into(a, other.rows(), &mut scratch);
                    meet_row.push(self.key_index[scratch.as_slice()]);
                    bits::join_into(a, other.rows(), &mut scratch);
                    join_row.push(self.key_index[scratch.as_slice()]);
                }
                (meet_row, join_row)
            })
            .collect();
        let mut meet = Vec::with_capacity(len * len);
        let mut join = Vec::with_capacity(len * len);
        for (m, j) in rows {
            meet.extend(m);
            join.extend(j);
        }
        self.tables = Some(OpTables { len, meet, join });
        Ok(self)
    }

    /// Meet by id, through the tables when present.
    pub fn meet_id(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.meet(a, b),
            None => self.id_of(&(self.element(a) & self.element(b))).expect("lattice is closed"),
        }
    }

    pub fn join_id(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.join(a, b),
            None => self.id_of(&(self.element(a) | self.element(b))).expect("lattice is closed"),
        }
    }

    /// For every ground-set permutation (lexicographic order, identity first),
    /// the induced map on element ids.
    pub fn permutation_tables(&self) -> Vec<Vec<u32>> {
        Permutation::all(self.ground.size())
            .map(|p| {
                self.elements
                    .iter()
                    .map(|r| {
                        let image = r.apply_permutation(&p).expect("permutation matches ground size");
                        self.id_of(&image).expect("permutations preserve the lattice")
                    })
                    .collect()
            })
            .collect()
    }

    /// One relation per line in the relation JSON format; line number = id.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.elements {
            serde_json::to_writer(&mut out, &r.to_json())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn comparable(r: &Relation, s: &Relation) -> bool {
    r.comparable(s)
}

/// Index pairs `(i, j)`, `i < j`, of comparable members.
pub fn comparable_pairs(members: &[Relation]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if members[i].comparable(&members[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// True iff exactly one of the six pairs among four distinct relations is comparable.
pub fn is_112_subset(members: &[Relation; 4]) -> Result<bool, LatticeError> {
    for i in 0..4 {
        for j in i + 1..4 {
            if members[i] == members[j] {
                return Err(LatticeError::DuplicateMembers);
            }
        }
    }
    Ok(comparable_pairs(members).len() == 1)
}
