//! Quasiorder and equivalence lattices of finite sets.
//!
//! The crate is organised bottom-up:
//!
//! * [`relcore`]: ground sets, relations as bit matrices, meet/join, `Θ` and induced orders;
//! * [`lattice`]: enumeration of `Quo n` and `Equ n` with optional operation tables;
//! * [`genclose`]: budgeted sublattice closure, generation tests and the disjoint paths principle;
//! * [`constructions`]: the generator families and Zádori configurations;
//! * [`certlang`]: a small proof language whose certificates are replayed by a checker;
//! * [`search`]: sharded, resumable, symmetry-reduced search for small generating sets.

pub mod certlang;
pub mod constructions;
pub mod genclose;
pub mod lattice;
pub mod relcore;
pub mod search;

pub use relcore::{BlockPoset, GroundSet, Partition, Permutation, RelError, Relation, RelationJson};
