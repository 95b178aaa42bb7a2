//! Ground sets, quasiorders as bit matrices, and the primitive relation algebra.
//!
//! A [`Relation`] is always reflexive. Meet is intersection; join is the
//! reflexive-transitive closure of the union. All algebra is index based;
//! labels only matter for parsing and printing.

pub mod bits;
mod partition;
mod perm;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{BitAnd, BitOr};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use partition::{BlockPoset, Partition};
pub use perm::Permutation;

/// Largest supported ground set; every row of a relation is one machine word.
pub const MAX_GROUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("ground set must have between 1 and {MAX_GROUND} elements, got {0}")]
    GroundSize(usize),
    #[error("duplicate label `{0}` in ground set")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("relations live on different ground sets")]
    GroundMismatch,
    #[error("expected {expected} rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("relation is not reflexive")]
    NotReflexive,
    #[error("relation is not transitive")]
    NotQuasiorder,
    #[error("not a bijection on the ground set")]
    NotBijection,
    #[error("pair ({0}, {1}) leaves the subset")]
    LeavesSubset(String, String),
    #[error("invalid relation json: {0}")]
    Json(String),
}

/// A finite labeled set `{x_0, ..., x_{n-1}}`.
#[derive(Debug, Clone)]
pub struct GroundSet {
    labels: Vec<String>,
    index: FxHashMap<String, usize>,
}

impl GroundSet {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>, RelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_GROUND {
            return Err(RelError::GroundSize(labels.len()));
        }
        let mut index = FxHashMap::default();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(RelError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Arc::new(GroundSet { labels, index }))
    }

    /// Ground set labeled `x0 .. x{n-1}`.
    pub fn indexed(n: usize) -> Result<Arc<Self>, RelError> {
        Self::new((0..n).map(|i| format!("x{i}")))
    }

    /// Ground set from whitespace separated labels, e.g. `"a b c d f g"`.
    pub fn parse(spec: &str) -> Result<Arc<Self>, RelError> {
        Self::new(spec.split_whitespace())
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, RelError> {
        self.index.get(label).copied().ok_or_else(|| RelError::UnknownLabel(label.to_string()))
    }

    pub fn indices_of<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Result<Vec<usize>, RelError> {
        labels.into_iter().map(|l| self.index_of(l)).collect()
    }

    fn check_index(&self, i: usize) -> Result<(), RelError> {
        if i < self.size() {
            Ok(())
        } else {
            Err(RelError::IndexOutOfRange(i))
        }
    }
}

impl PartialEq for GroundSet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for GroundSet {}

pub(crate) fn same_ground(a: &Arc<GroundSet>, b: &Arc<GroundSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A reflexive binary relation on a ground set.
#[derive(Clone)]
pub struct Relation {
    ground: Arc<GroundSet>,
    rows: Box<[u64]>,
}

impl Relation {
    /// Builds a relation from raw rows. Rows must be reflexive and fit the ground set.
    pub fn from_rows(ground: &Arc<GroundSet>, rows: impl Into<Box<[u64]>>) -> Result<Self, RelError> {
        let rows = rows.into();
        let n = ground.size();
        if rows.len() != n {
            return Err(RelError::RowCount { expected: n, got: rows.len() });
        }
        let mask = bits::full_row(n);
        if rows.iter().any(|r| r & !mask != 0) {
            return Err(RelError::IndexOutOfRange(n));
        }
        if !bits::is_reflexive(&rows) {
            return Err(RelError::NotReflexive);
        }
        Ok(Relation { ground: ground.clone(), rows })
    }

    pub(crate) fn from_rows_unchecked(ground: &Arc<GroundSet>, rows: Box<[u64]>) -> Self {
        debug_assert_eq!(rows.len(), ground.size());
        debug_assert!(bits::is_reflexive(&rows));
        Relation { ground: ground.clone(), rows }
    }

    /// The identity relation, bottom of both lattices.
    pub fn delta(ground: &Arc<GroundSet>) -> Self {
        let rows: Box<[u64]> = (0..ground.size()).map(bits::bit).collect();
        Relation { ground: ground.clone(), rows }
    }

    /// The full relation `A x A`.
    pub fn nabla(ground: &Arc<GroundSet>) -> Self {
        let n = ground.size();
        let rows = vec![bits::full_row(n); n].into_boxed_slice();
        Relation { ground: ground.clone(), rows }
    }

    /// `q(x, y)`: the identity plus the pair `(x, y)`. `q(x, x)` is the identity.
    pub fn q(ground: &Arc<GroundSet>, x: usize, y: usize) -> Result<Self, RelError> {
        ground.check_index(x)?;
        ground.check_index(y)?;
        let mut r = Self::delta(ground);
        r.rows[x] |= bits::bit(y);
        Ok(r)
    }

    /// `e(x, y) = e(y, x)`: the identity plus both `(x, y)` and `(y, x)`.
    pub fn e(ground: &Arc<GroundSet>, x: usize, y: usize) -> Result<Self, RelError> {
        let mut r = Self::q(ground, x, y)?;
        r.rows[y] |= bits::bit(x);
        Ok(r)
    }

    pub fn q_named(ground: &Arc<GroundSet>, x: &str, y: &str) -> Result<Self, RelError> {
        Self::q(ground, ground.index_of(x)?, ground.index_of(y)?)
    }

    pub fn e_named(ground: &Arc<GroundSet>, x: &str, y: &str) -> Result<Self, RelError> {
        Self::e(ground, ground.index_of(x)?, ground.index_of(y)?)
    }

    /// The identity plus the given pairs, without closing under transitivity.
    pub fn from_pairs(
        ground: &Arc<GroundSet>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, RelError> {
        let mut r = Self::delta(ground);
        for (x, y) in pairs {
            ground.check_index(x)?;
            ground.check_index(y)?;
            r.rows[x] |= bits::bit(y);
        }
        Ok(r)
    }

    /// The least quasiorder containing the given pairs.
    pub fn quasiorder_from_pairs(
        ground: &Arc<GroundSet>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, RelError> {
        let mut r = Self::from_pairs(ground, pairs)?;
        bits::transitive_close(&mut r.rows);
        Ok(r)
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Canonical key: the row-major bit matrix.
    pub fn key(&self) -> &[u64] {
        &self.rows
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows[x] & bits::bit(y) != 0
    }

    /// Off-diagonal pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, &row)| bits::ones(row & !bits::bit(i)).map(move |j| (i, j)))
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() - self.size()
    }

    pub fn is_transitive(&self) -> bool {
        bits::is_transitive(&self.rows)
    }

    pub fn is_symmetric(&self) -> bool {
        *bits::transpose(&self.rows) == *self.rows
    }

    pub fn is_quasiorder(&self) -> bool {
        self.is_transitive()
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_transitive() && self.is_symmetric()
    }

    pub fn is_delta(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r == bits::bit(i))
    }

    pub fn is_nabla(&self) -> bool {
        let full = bits::full_row(self.size());
        self.rows.iter().all(|&r| r == full)
    }

    /// Inclusion `self ⊆ other`. Relations on different ground sets are never comparable.
    pub fn leq(&self, other: &Relation) -> bool {
        same_ground(&self.ground, &other.ground) && bits::is_subset(&self.rows, &other.rows)
    }

    pub fn comparable(&self, other: &Relation) -> bool {
        self.leq(other) || other.leq(self)
    }

    fn check_same_ground(&self, other: &Relation) -> Result<(), RelError> {
        if same_ground(&self.ground, &other.ground) {
            Ok(())
        } else {
            Err(RelError::GroundMismatch)
        }
    }

    pub fn meet(&self, other: &Relation) -> Result<Relation, RelError> {
        self.check_same_ground(other)?;
        let mut rows = vec![0u64; self.size()].into_boxed_slice();
        bits::meet_into(&self.rows, &other.rows, &mut rows);
        Ok(Relation { ground: self.ground.clone(), rows })
    }

    pub fn join(&self, other: &Relation) -> Result<Relation, RelError> {
        self.check_same_ground(other)?;
        let mut rows = vec![0u64; self.size()].into_boxed_slice();
        bits::join_into(&self.rows, &other.rows, &mut rows);
        Ok(Relation { ground: self.ground.clone(), rows })
    }

    pub fn inverse(&self) -> Relation {
        Relation { ground: self.ground.clone(), rows: bits::transpose(&self.rows).into() }
    }

    fn require_quasiorder(&self) -> Result<(), RelError> {
        if self.is_quasiorder() {
            Ok(())
        } else {
            Err(RelError::NotQuasiorder)
        }
    }

    /// `Θ(ρ) = ρ ∩ ρ⁻¹` as a partition of the ground set.
    pub fn theta(&self) -> Result<Partition, RelError> {
        self.require_quasiorder()?;
        let sym = self.meet(&self.inverse())?;
        Ok(Partition::from_equivalence_rows(&self.ground, sym.rows()))
    }

    /// The partial order induced on the `Θ`-blocks.
    pub fn induced_order(&self) -> Result<BlockPoset, RelError> {
        let theta = self.theta()?;
        Ok(BlockPoset::from_quasiorder(self, theta))
    }

    /// The atoms `q(x, y)` below this quasiorder, in row-major order.
    pub fn atom_decomposition(&self) -> Result<Vec<Relation>, RelError> {
        self.require_quasiorder()?;
        Ok(self
            .pairs()
            .map(|(x, y)| {
                let mut r = Relation::delta(&self.ground);
                r.rows[x] |= bits::bit(y);
                r
            })
            .collect())
    }

    /// Relabels: `(p(x), p(y))` is in the image iff `(x, y)` is in `self`.
    pub fn apply_permutation(&self, perm: &Permutation) -> Result<Relation, RelError> {
        if perm.len() != self.size() {
            return Err(RelError::NotBijection);
        }
        let mut rows = vec![0u64; self.size()].into_boxed_slice();
        for (i, &row) in self.rows.iter().enumerate() {
            let mut image = 0u64;
            for j in bits::ones(row) {
                image |= bits::bit(perm.apply(j));
            }
            rows[perm.apply(i)] = image;
        }
        Ok(Relation { ground: self.ground.clone(), rows })
    }

    /// Restricts to `sub` (indices in the new ground order). Every off-diagonal
    /// pair must lie inside `sub`; the new ground set carries the subset's labels.
    pub fn restrict(&self, sub: &[usize]) -> Result<Relation, RelError> {
        let labels: Vec<&str> =
            sub.iter().map(|&i| self.ground.check_index(i).map(|_| self.ground.label(i))).collect::<Result<_, _>>()?;
        let target = GroundSet::new(labels)?;
        self.restrict_onto(&target, sub)
    }

    /// Like [`Relation::restrict`] but onto an existing ground set whose
    /// element `i` corresponds to `sub[i]`.
    pub fn restrict_onto(&self, target: &Arc<GroundSet>, sub: &[usize]) -> Result<Relation, RelError> {
        if target.size() != sub.len() {
            return Err(RelError::RowCount { expected: target.size(), got: sub.len() });
        }
        let mut position = vec![usize::MAX; self.size()];
        for (new, &old) in sub.iter().enumerate() {
            self.ground.check_index(old)?;
            position[old] = new;
        }
        let mut rows = vec![0u64; sub.len()];
        for (i, &row) in self.rows.iter().enumerate() {
            for j in bits::ones(row) {
                if i == j {
                    continue;
                }
                let (pi, pj) = (position[i], position[j]);
                if pi == usize::MAX || pj == usize::MAX {
                    return Err(RelError::LeavesSubset(
                        self.ground.label(i).to_string(),
                        self.ground.label(j).to_string(),
                    ));
                }
                rows[pi] |= bits::bit(pj);
            }
        }
        bits::set_diagonal(&mut rows);
        Ok(Relation { ground: target.clone(), rows: rows.into() })
    }

    /// Inverse of restriction: places a relation on `A` into a larger ground set
    /// `B`, where `A`'s element `i` becomes `B`'s element `embedding[i]`.
    pub fn embed(&self, target: &Arc<GroundSet>, embedding: &[usize]) -> Result<Relation, RelError> {
        if embedding.len() != self.size() {
            return Err(RelError::RowCount { expected: self.size(), got: embedding.len() });
        }
        let pairs = self.pairs().map(|(x, y)| (embedding[x], embedding[y]));
        Relation::from_pairs(target, pairs.collect::<Vec<_>>())
    }

    pub fn to_json(&self) -> RelationJson {
        RelationJson {
            n: self.size(),
            labels: self.ground.labels().to_vec(),
            pairs: self
                .pairs()
                .map(|(x, y)| (self.ground.label(x).to_string(), self.ground.label(y).to_string()))
                .collect(),
        }
    }

    /// Reads a relation, reusing `ground` when the labels match it.
    pub fn from_json(json: &RelationJson, ground: Option<&Arc<GroundSet>>) -> Result<Relation, RelError> {
        if json.n != json.labels.len() {
            return Err(RelError::Json(format!("n = {} but {} labels given", json.n, json.labels.len())));
        }
        let gs = match ground {
            Some(g) if g.labels() == json.labels.as_slice() => g.clone(),
            _ => GroundSet::new(json.labels.iter().cloned())?,
        };
        let pairs = json
            .pairs
            .iter()
            .map(|(x, y)| Ok((gs.index_of(x)?, gs.index_of(y)?)))
            .collect::<Result<Vec<_>, RelError>>()?;
        Relation::from_pairs(&gs, pairs)
    }

    pub fn from_json_str(text: &str) -> Result<Relation, RelError> {
        let json: RelationJson = serde_json::from_str(text).map_err(|e| RelError::Json(e.to_string()))?;
        Self::from_json(&json, None)
    }

    /// Labeled off-diagonal pairs, e.g. `{(b,c), (c,b)}`.
    pub fn pairs_display(&self) -> String {
        let parts: Vec<String> =
            self.pairs().map(|(x, y)| format!("({},{})", self.ground.label(x), self.ground.label(y))).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && same_ground(&self.ground, &other.ground)
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation{}", self.pairs_display())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pairs_display())
    }
}

/// Meet; panics on mismatched ground sets.
impl BitAnd for &Relation {
    type Output = Relation;

    fn bitand(self, rhs: &Relation) -> Relation {
        self.meet(rhs).expect("meet of relations on different ground sets")
    }
}

/// Join; panics on mismatched ground sets.
impl BitOr for &Relation {
    type Output = Relation;

    fn bitor(self, rhs: &Relation) -> Relation {
        self.join(rhs).expect("join of relations on different ground sets")
    }
}

/// `{ "n": 3, "labels": ["a","b","c"], "pairs": [["a","b"]] }`; reflexive pairs implied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationJson {
    pub n: usize,
    pub labels: Vec<String>,
    pub pairs: Vec<(String, String)>,
}

/// Folds join over an iterator, starting from the identity.
pub fn join_all<'a>(ground: &Arc<GroundSet>, items: impl IntoIterator<Item = &'a Relation>) -> Relation {
    let mut acc = Relation::delta(ground);
    for r in items {
        acc = &acc | r;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Arc<GroundSet> {
        GroundSet::parse("a b c").unwrap()
    }

    #[test]
    fn delta_and_nabla() {
        let g1 = GroundSet::indexed(1).unwrap();
        assert_eq!(Relation::delta(&g1).rows(), &[1]);
        assert_eq!(Relation::delta(&g1), Relation::nabla(&g1));
        let g = abc();
        assert_eq!(Relation::delta(&g).pair_count(), 0);
        assert!(Relation::delta(&g).is_equivalence());
        let g2 = GroundSet::indexed(2).unwrap();
        assert_eq!(Relation::nabla(&g2).pair_count() + 2, 4);
        assert!(Relation::nabla(&g2).is_equivalence());
    }

    #[test]
    fn atoms() {
        let g = abc();
        let qab = Relation::q_named(&g, "a", "b").unwrap();
        assert_eq!(qab.pair_count(), 1);
        assert!(qab.contains(0, 1));
        let qba = Relation::q_named(&g, "b", "a").unwrap();
        assert_eq!(Relation::e_named(&g, "a", "b").unwrap(), &qab | &qba);
        assert_eq!(Relation::q(&g, 1, 1).unwrap(), Relation::delta(&g));
        assert_eq!(Relation::e(&g, 2, 2).unwrap(), Relation::delta(&g));
        assert_eq!(Relation::q_named(&g, "a", "z").unwrap_err(), RelError::UnknownLabel("z".into()));
    }

    #[test]
    fn join_closes_transitively() {
        let g = abc();
        let ab = Relation::q(&g, 0, 1).unwrap();
        let bc = Relation::q(&g, 1, 2).unwrap();
        let j = &ab | &bc;
        assert!(j.contains(0, 2));
        assert!(!j.contains(2, 0));
        assert_eq!(&j | &Relation::delta(&g), j);
        assert_eq!(&j & &j, j);
    }

    #[test]
    fn ground_mismatch_is_an_error() {
        let r = Relation::delta(&abc());
        let s = Relation::delta(&GroundSet::parse("a b d").unwrap());
        assert_eq!(r.meet(&s).unwrap_err(), RelError::GroundMismatch);
        assert_eq!(r.join(&s).unwrap_err(), RelError::GroundMismatch);
        // equal labels in separately built ground sets are the same ground set
        let t = Relation::delta(&abc());
        assert!(r.join(&t).is_ok());
    }

    #[test]
    fn inverse_of_atoms() {
        let g = abc();
        let qab = Relation::q(&g, 0, 1).unwrap();
        assert_eq!(qab.inverse(), Relation::q(&g, 1, 0).unwrap());
        let eab = Relation::e(&g, 0, 1).unwrap();
        assert_eq!(eab.inverse(), eab);
    }

    #[test]
    fn decomposition_of_small_relations() {
        let g = abc();
        assert!(Relation::delta(&g).atom_decomposition().unwrap().is_empty());
        let eab = Relation::e(&g, 0, 1).unwrap();
        assert_eq!(
            eab.atom_decomposition().unwrap(),
            vec![Relation::q(&g, 0, 1).unwrap(), Relation::q(&g, 1, 0).unwrap()]
        );
        let not_transitive = Relation::from_pairs(&g, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(not_transitive.atom_decomposition().unwrap_err(), RelError::NotQuasiorder);
        assert_eq!(not_transitive.theta().unwrap_err(), RelError::NotQuasiorder);
    }

    #[test]
    fn permutation_swaps_atoms() {
        let g = abc();
        let swap = Permutation::new(vec![1, 0, 2]).unwrap();
        let qab = Relation::q(&g, 0, 1).unwrap();
        assert_eq!(qab.apply_permutation(&swap).unwrap(), Relation::q(&g, 1, 0).unwrap());
        let id = Permutation::identity(3);
        assert_eq!(qab.apply_permutation(&id).unwrap(), qab);
        assert_eq!(qab.apply_permutation(&Permutation::identity(4)).unwrap_err(), RelError::NotBijection);
    }

    #[test]
    fn restriction() {
        let b = GroundSet::parse("a b c d").unwrap();
        let r = Relation::quasiorder_from_pairs(&b, [(0, 1), (1, 2)]).unwrap();
        let sub = [0, 1, 2];
        let restricted = r.restrict(&sub).unwrap();
        assert_eq!(restricted.ground().labels(), &["a", "b", "c"]);
        assert_eq!(restricted.pair_count(), 3);
        assert_eq!(restricted.embed(&b, &sub).unwrap(), r);
        assert_eq!(Relation::delta(&b).restrict(&sub).unwrap(), Relation::delta(restricted.ground()));
        assert_eq!(r.restrict(&[0, 1]).unwrap_err(), RelError::LeavesSubset("a".into(), "c".into()));
    }

    #[test]
    fn json_round_trip() {
        let g = abc();
        let r = &Relation::q(&g, 0, 1).unwrap() | &Relation::e(&g, 1, 2).unwrap();
        let text = serde_json::to_string(&r.to_json()).unwrap();
        assert_eq!(Relation::from_json_str(&text).unwrap(), r);
        assert!(Relation::from_json_str(r#"{"n":2,"labels":["a"],"pairs":[]}"#).is_err());
        assert!(Relation::from_json_str(r#"{"n":1,"labels":["a"],"pairs":[["a","q"]]}"#).is_err());
    }

    #[test]
    fn ground_set_validation() {
        assert_eq!(GroundSet::parse("").unwrap_err(), RelError::GroundSize(0));
        assert_eq!(GroundSet::parse("a a").unwrap_err(), RelError::DuplicateLabel("a".into()));
        assert!(GroundSet::indexed(64).is_ok());
        assert_eq!(GroundSet::indexed(65).unwrap_err(), RelError::GroundSize(65));
        let g = GroundSet::indexed(64).unwrap();
        let r = &Relation::q(&g, 0, 63).unwrap() | &Relation::q(&g, 63, 5).unwrap();
        assert!(r.contains(0, 5));
    }

    #[test]
    fn from_rows_validates() {
        let g = abc();
        assert_eq!(Relation::from_rows(&g, vec![1, 2]).unwrap_err(), RelError::RowCount { expected: 3, got: 2 });
        assert_eq!(Relation::from_rows(&g, vec![0, 2, 4]).unwrap_err(), RelError::NotReflexive);
        assert!(Relation::from_rows(&g, vec![1, 2, 4]).unwrap().is_delta());
    }
}
