use quolat::certlang::*;
use quolat::constructions::{quo6_generators, zadori};
use quolat::genclose::{dpp, generates_equ, PathStep, StepKind};
use quolat::{GroundSet, Relation};

fn assert_passes(cert: &Certificate) -> CheckReport {
    let r = check_certificate(cert);
    assert!(r.ok, "failure: {:?}", r.failure);
    assert!(r.steps.iter().all(|s| s.passed));
    r
}

#[test]
fn quo6_certificate_mirrors_the_equations() {
    let cert = builtin_quo6_certificate();
    assert_eq!(cert.steps.len(), 25);
    let texts: Vec<String> = cert.steps.iter().map(|s| s.statement.to_string()).collect();
    assert_eq!(texts[0], "derive e(b,c) = beta & delta");
    assert_eq!(texts[9], "derive q(b,d) = (q(b,a) | e(a,d)) & (delta | q(g,d))");
    assert_eq!(texts[23], "derive q(f,g) = alpha & (gamma | q(c,g))");
    assert_eq!(texts[24], "derive q(a,b) = (q(a,f) | q(f,g) | q(g,b)) & gamma");
    let dpp_count = cert.steps.iter().filter(|s| s.statement.kind() == "dpp").count();
    assert_eq!(dpp_count, 8);

    let r = assert_passes(&cert);
    assert_eq!(r.derived, AtomTally { e: 4, q: 21 });
    assert_eq!(r.steps[0].new_atoms, vec!["e(b,c)"]);
    let c = r.conclusion.unwrap();
    assert_eq!(c.required, 30);
    assert_eq!(c.known_before_closure, 21);
    let closure = c.closure.unwrap();
    assert!(closure.discovered <= QUO6_CLOSURE_BUDGET);
    assert_eq!(closure.atoms_found.len(), 30);
}

#[test]
fn odd_eleven_certificate() {
    let cert = builtin_odd_certificate(11).unwrap();
    let r = assert_passes(&cert);
    assert_eq!(r.derived, AtomTally { e: 2, q: 110 });
    assert_eq!(r.cited, AtomTally { e: 53, q: 0 });
    let texts: Vec<&str> = r.steps.iter().map(|s| s.statement.as_str()).collect();
    assert!(texts.contains(&"assert blocks(delta_plus | gamma) == {a0 a1 a5 b0 b4} {a2 a4 b1 b3} {a3 b2}"));
    let eta = r.steps.iter().find(|s| s.statement == "let eta = gamma & (delta | beta)").unwrap();
    assert_eq!(eta.new_atoms, vec!["e(a5,b4)"]);
    let cite = r.steps.iter().find(|s| s.kind == "cite").unwrap();
    assert_eq!(cite.statement, "cite zadori-3.2 k=5 mode=exhaustive");
    let v = &cite.validations[0];
    assert_eq!(v.closure.atoms_found.len(), 55);
    assert!(v.closure.discovered <= bell(11));
}

#[test]
fn even_fourteen_certificate() {
    let cert = builtin_even_certificate(14).unwrap();
    let r = assert_passes(&cert);
    assert_eq!(r.derived.q, 182);
    assert_eq!(r.derived.e + r.cited.e, 91);
    let texts: Vec<&str> = r.steps.iter().map(|s| s.statement.as_str()).collect();
    let blocks = texts.iter().find(|t| t.starts_with("assert blocks")).unwrap();
    assert!(blocks.contains("{a4 b3 c}"), "{blocks}");
    assert!(texts.contains(&"derive e(a0,c) = (e(a0,b1) | e(b1,c)) & (e(a0,b3) | e(b3,c))"));
    assert!(texts.contains(&"let beta = (eps0 | alpha) & beta_sharp"));
    let cite = r.steps.iter().find(|s| s.statement.starts_with("cite zadori")).unwrap();
    assert_eq!(cite.statement, "cite zadori-3.2 k=6 mode=small-k-validated");
    let ks: Vec<usize> = cite.validations.iter().map(|v| v.k).collect();
    assert_eq!(ks, vec![2, 3, 4, 5]);
    let kulin = r.steps.last().unwrap();
    assert_eq!(kulin.sub_steps, Some(14 * 13));
}

#[test]
fn larger_sizes_check() {
    for n in [13, 15, 16] {
        let r = check_certificate(&builtin_zadori_certificate(n).unwrap());
        assert!(r.ok, "n={n}: {:?}", r.failure);
        assert_eq!(r.derived.q, n * (n - 1), "n={n}");
    }
}

#[test]
fn bad_sizes_are_rejected() {
    assert!(builtin_odd_certificate(9).is_err());
    assert!(builtin_odd_certificate(12).is_err());
    assert!(builtin_even_certificate(12).is_err());
    assert!(builtin_even_certificate(15).is_err());
}

#[test]
fn builtins_round_trip_through_text() {
    let certs =
        [builtin_quo6_certificate(), builtin_odd_certificate(11).unwrap(), builtin_even_certificate(14).unwrap()];
    for cert in certs {
        let text = cert.to_string();
        let back = parse_certificate(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.to_string(), text);
    }
}

#[test]
fn checking_is_deterministic() {
    let cert = builtin_quo6_certificate();
    let a = check_certificate(&cert).without_timing();
    let b = check_certificate(&cert).without_timing();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn builtin_dpp_statements_meet_the_hypotheses() {
    let certs =
        [builtin_quo6_certificate(), builtin_odd_certificate(11).unwrap(), builtin_even_certificate(14).unwrap()];
    for cert in certs {
        let g = &cert.ground;
        let steps = |lits: &[PathLit]| -> Vec<PathStep> {
            lits.iter()
                .map(|l| PathStep { from: g.index_of(&l.from).unwrap(), to: g.index_of(&l.to).unwrap(), kind: l.kind })
                .collect()
        };
        for s in &cert.steps {
            if let Statement::AssertDpp { x, y, path1, path2 } = &s.statement {
                let (p1, p2) = (steps(path1), steps(path2));
                assert!(p1.iter().chain(&p2).any(|s| s.kind == StepKind::Q), "{}", s.statement);
                let inner = |p: &[PathStep]| p[1..].iter().map(|s| s.from).collect::<Vec<_>>();
                assert!(inner(&p1).iter().all(|v| !inner(&p2).contains(v)), "{}", s.statement);
                let out = dpp(g, &p1, &p2).unwrap();
                assert_eq!(out.meet, Relation::q_named(g, x, y).unwrap());
            }
        }
    }
}

#[test]
fn zadori_validation_agrees_with_plain_closure() {
    for k in 2..=4 {
        let v = validate_zadori(k).unwrap();
        let z = zadori(k, &[]).unwrap();
        let plain = generates_equ(&z.restricted_five().unwrap(), bell(2 * k + 1)).unwrap();
        assert_eq!(v.outcome, plain.outcome, "k={k}");
        assert_eq!(plain.closure.atoms_found.len(), (2 * k + 1) * 2 * k / 2);
    }
}

#[test]
fn kulin_on_the_quo6_ground_with_beta() {
    let family = quo6_generators();
    let beta = family.get("beta").unwrap();
    let cycle = default_cycle(beta).unwrap();
    let statements = kulin_derivation(&family.ground, "beta", beta, &cycle).unwrap();
    assert_eq!(statements.len(), 30);
    let mut cert = Certificate::new(&family.ground, Conclusion::GeneratesQuo);
    cert.gen("beta", parse_term("e(d,f) | e(f,g) | e(b,c) | q(b,a)").unwrap());
    let labels = family.ground.labels();
    for (i, x) in labels.iter().enumerate() {
        for y in &labels[i + 1..] {
            cert.gen(format!("e_{x}{y}"), Term::e(x.clone(), y.clone()));
        }
    }
    for s in statements {
        cert.push(s);
    }
    let r = assert_passes(&cert);
    assert_eq!(r.derived.q, 30);
}

#[test]
fn kulin_rejects_symmetric_rho() {
    let g = GroundSet::parse("a b c").unwrap();
    let rho = Relation::e(&g, 0, 1).unwrap();
    assert_eq!(kulin_derivation(&g, "rho", &rho, &[0, 1, 2]).unwrap_err(), KulinError::Symmetric);
    assert!(default_cycle(&rho).is_none());
}

#[test]
fn trusted_zadori_cite_records_without_closure() {
    let mut cert = builtin_odd_certificate(11).unwrap();
    for s in &mut cert.steps {
        if let Statement::Cite { mode, .. } = &mut s.statement {
            *mode = ValidationMode::Trusted;
        }
    }
    let r = assert_passes(&cert);
    let cite = r.steps.iter().find(|s| s.kind == "cite").unwrap();
    assert!(cite.validations.is_empty());
}

#[test]
fn wrong_zadori_binding_is_caught() {
    let cert = builtin_odd_certificate(11).unwrap();
    let full = cert.to_string();
    let text: Vec<&str> = full
        .lines()
        .filter(|l| !(l.starts_with("assert") && (l.contains("| beta)") || l.contains("e(a5,b4)"))))
        .map(|l| if l == "let eta = gamma & (delta | beta)" { "let eta = beta & gamma" } else { l })
        .collect();
    let text = text.join("\n");
    let r = check_certificate(&parse_certificate(&text).unwrap());
    let f = r.failure.unwrap();
    assert!(f.message.contains("eta"), "{}", f.message);
}
