//! A small proof language for sublattice membership arguments.
//!
//! A certificate names a ground set and generators, then lists steps: local
//! definitions, equations between lattice terms, block claims, disjoint-path
//! statements and citations of two lemmas. [`check_certificate`] replays the
//! steps and reports which atoms each one puts into the generated sublattice.

mod builtin;
mod cert;
mod check;
mod kulin;
mod term;

pub use builtin::{
    builtin_even_certificate, builtin_odd_certificate, builtin_quo6_certificate, builtin_zadori_certificate,
    EXHAUSTIVE_K_MAX, QUO6_CLOSURE_BUDGET,
};
pub use cert::{parse_certificate, Certificate, Conclusion, Lemma, Located, PathLit, Statement, ValidationMode};
pub use check::{
    bell, check_certificate, small_k_validations, validate_zadori, AtomTally, CheckReport, ConclusionReport, Diff,
    Failure, StepReport, Validation, SMALL_K_MAX,
};
pub use kulin::{default_cycle, kulin_derivation, KulinError};
pub use term::{eval_term, parse_term, Env, EvalError, ParseError, Term};
