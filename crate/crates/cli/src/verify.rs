use std::str::FromStr;

use anyhow::Result;
use quolat::certlang::{
    builtin_quo6_certificate, builtin_zadori_certificate, check_certificate, kulin_derivation, Certificate, Conclusion,
    Statement, Term, ValidationMode,
};
use quolat::constructions::{zadori_family_invariants, FamilyId};
use quolat::genclose::{closure, generates_equ, generates_quo, refute_k_generation, ClosureBudget, Generation, Target};
use quolat::lattice::{is_112_subset, IndexedLattice, LatticeKind};
use quolat::{GroundSet, Relation};
use serde_json::{json, Value};

use crate::{heartbeat, UsageError};

pub const QUO_COUNTS: [usize; 6] = [1, 4, 29, 355, 6942, 209_527];
pub const EQU_COUNTS: [usize; 7] = [1, 2, 5, 15, 52, 203, 877];

/// What `verify` can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Family(FamilyId),
    Kulin(usize),
    Counts,
}

impl FromStr for Construction {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "table1" {
            return Ok(Construction::Counts);
        }
        if let Some(n) = s.strip_prefix("kulin:") {
            return n.parse().map(Construction::Kulin).map_err(|_| UsageError(format!("bad size in `{s}`")));
        }
        s.parse().map(Construction::Family).map_err(|e| UsageError(e.to_string()))
    }
}

pub struct Outcome {
    pub ok: bool,
    pub report: Value,
}

fn four(rels: Vec<Relation>) -> [Relation; 4] {
    rels.try_into().expect("families have four members")
}

pub fn run(target: Construction, zadori_mode: Option<ValidationMode>) -> Result<Outcome> {
    match target {
        Construction::Counts => counts(),
        Construction::Kulin(n) => kulin(n),
        Construction::Family(FamilyId::Quo3) => quo3(),
        Construction::Family(FamilyId::Equ6) => equ6(),
        Construction::Family(FamilyId::Quo6) => {
            let family = FamilyId::Quo6.build()?;
            let shaped = is_112_subset(&four(family.relations()))?;
            heartbeat("verify", "checking the Quo 6 certificate");
            certificate(&builtin_quo6_certificate(), json!({"name": "quo6", "one_one_two": shaped}), shaped)
        }
        Construction::Family(id @ (FamilyId::Odd(n) | FamilyId::Even(n))) => {
            let family = id.build().map_err(|e| UsageError(e.to_string()))?;
            let shaped = is_112_subset(&four(family.relations()))?;
            let invariants = zadori_family_invariants(&family)?;
            let inv_ok = invariants.iter().all(|c| c.holds);
            let mut cert = builtin_zadori_certificate(n)?;
            if let Some(mode) = zadori_mode {
                for s in &mut cert.steps {
                    if let Statement::Cite { lemma: quolat::certlang::Lemma::Zadori { .. }, mode: m } = &mut s.statement
                    {
                        *m = mode;
                    }
                }
            }
            heartbeat("verify", &format!("checking the certificate for {id}"));
            certificate(
                &cert,
                json!({"name": id.to_string(), "one_one_two": shaped, "invariants": invariants}),
                shaped && inv_ok,
            )
        }
    }
}

fn certificate(cert: &Certificate, mut head: Value, extra_ok: bool) -> Result<Outcome> {
    let report = check_certificate(cert);
    let ok = report.ok && extra_ok;
    head["ok"] = json!(ok);
    head["steps"] = json!(report.steps.len());
    head["certificate"] = serde_json::to_value(&report)?;
    Ok(Outcome { ok, report: head })
}

fn counts() -> Result<Outcome> {
    let mut quo = Vec::new();
    for n in 1..=QUO_COUNTS.len() {
        heartbeat("verify", &format!("enumerating Quo {n}"));
        quo.push(IndexedLattice::enumerate_quo(n)?.len());
    }
    let mut equ = Vec::new();
    for n in 1..=EQU_COUNTS.len() {
        equ.push(IndexedLattice::enumerate_equ(n)?.len());
    }
    let ok = quo == QUO_COUNTS && equ == EQU_COUNTS;
    Ok(Outcome {
        ok,
        report: json!({"name": "table1", "ok": ok, "quo": quo, "equ": equ,
            "expected_quo": QUO_COUNTS, "expected_equ": EQU_COUNTS}),
    })
}

fn quo3() -> Result<Outcome> {
    let family = FamilyId::Quo3.build()?;
    let rels = family.relations();
    let shaped = is_112_subset(&four(rels.clone()))?;
    let saturated = closure(&rels, &ClosureBudget::new(1000, Target::Saturate))?;
    let generation = generates_quo(&rels, 1000)?;
    let lat = IndexedLattice::enumerate_quo(3)?.build_op_tables()?;
    let refute = refute_k_generation(&lat, 3)?;
    let ok = shaped && saturated.len() == 29 && generation.outcome == Generation::Generates && refute.refuted;
    Ok(Outcome {
        ok,
        report: json!({"name": "quo3", "ok": ok, "one_one_two": shaped, "closure_size": saturated.len(),
            "generation": generation, "three_generation": refute}),
    })
}

fn equ6() -> Result<Outcome> {
    let family = FamilyId::Equ6.build()?;
    let rels = family.relations();
    let shaped = is_112_subset(&four(rels.clone()))?;
    let generation = generates_equ(&rels, 10_000)?;
    let ok = shaped && generation.outcome == Generation::Generates;
    Ok(Outcome { ok, report: json!({"name": "equ6", "ok": ok, "one_one_two": shaped, "generation": generation}) })
}

/// The constructive derivation on `x0..x(n-1)` from `q(x0,x1)` and every `e`-atom.
pub fn kulin_certificate(n: usize) -> Result<Certificate> {
    if n < 3 {
        return Err(UsageError(format!("kulin:{n} needs at least 3 elements")).into());
    }
    let g = GroundSet::indexed(n).map_err(|e| UsageError(e.to_string()))?;
    let rho = Relation::q(&g, 0, 1)?;
    let mut cert = Certificate::new(&g, Conclusion::GeneratesQuo);
    let l = |i: usize| g.label(i).to_string();
    cert.gen("rho", Term::q(l(0), l(1)));
    for i in 0..n {
        for j in i + 1..n {
            cert.gen(format!("e_{i}_{j}"), Term::e(l(i), l(j)));
        }
    }
    let cycle: Vec<usize> = (0..n).collect();
    for s in kulin_derivation(&g, "rho", &rho, &cycle)? {
        cert.push(s);
    }
    Ok(cert)
}

fn kulin(n: usize) -> Result<Outcome> {
    let cert = kulin_certificate(n)?;
    certificate(&cert, json!({"name": format!("kulin:{n}"), "kind": LatticeKind::Quo}), true)
}
