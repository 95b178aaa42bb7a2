//! Certificates shipped with the crate.

use super::cert::{Certificate, Conclusion, Lemma, PathLit, Statement, ValidationMode};
use super::kulin::{default_cycle, kulin_derivation};
use super::term::{parse_term, Term};
use crate::constructions::{
    claimed_blocks, even_generators, odd_generators, quo6_generators, ConstructionError, GeneratorFamily,
};
use crate::genclose::StepKind;

/// Budget of the closing closure in the `Quo 6` certificate.
pub const QUO6_CLOSURE_BUDGET: usize = 300_000;

/// Largest `k` for which the odd certificate validates its Zádori citation exhaustively.
pub const EXHAUSTIVE_K_MAX: usize = 5;

fn term(text: &str) -> Term {
    parse_term(text).unwrap_or_else(|e| panic!("builtin term `{text}`: {e}"))
}

fn derive(kind: StepKind, x: &str, y: &str, t: &str) -> Statement {
    Statement::AssertAtom { kind, x: x.into(), y: y.into(), term: term(t) }
}

fn path(text: &str) -> Vec<PathLit> {
    text.split_whitespace()
        .map(|s| {
            let (kind, rest) = s.split_at(1);
            let (from, to) = rest.trim_matches(|c| c == '(' || c == ')').split_once(',').expect("x,y");
            let kind = if kind == "q" { StepKind::Q } else { StepKind::E };
            PathLit { kind, from: from.into(), to: to.into() }
        })
        .collect()
}

fn dpp(x: &str, y: &str, p1: &str, p2: &str) -> Statement {
    Statement::AssertDpp { x: x.into(), y: y.into(), path1: path(p1), path2: path(p2) }
}

fn with_generators(family: &GeneratorFamily, conclusion: Conclusion) -> Certificate {
    let mut cert = Certificate::new(&family.ground, conclusion);
    for (name, rel) in &family.members {
        let atoms = rel.atom_decomposition().expect("family members are quasiorders").into_iter().map(|a| {
            let (x, y) = a.pairs().next().expect("atom has a pair");
            let (x, y) = (family.ground.label(x), family.ground.label(y));
            if a.is_symmetric() {
                Term::e(x, y)
            } else {
                Term::q(x, y)
            }
        });
        cert.gen(name.clone(), Term::join_all(atoms).expect("members are not the identity"));
    }
    cert
}

/// The 25 equations showing that `{alpha, beta, gamma, delta}` generates
/// `Quo 6`, followed by a closing closure for the remaining `q`-atoms.
pub fn builtin_quo6_certificate() -> Certificate {
    use StepKind::{E, Q};
    let mut cert = with_generators(&quo6_generators(), Conclusion::GeneratesQuo);
    let steps = [
        derive(E, "b", "c", "beta & delta"),
        derive(Q, "b", "a", "beta & gamma"),
        derive(E, "d", "f", "alpha & (gamma | e(b,c))"),
        derive(Q, "g", "f", "alpha & (delta | q(b,a))"),
        derive(E, "a", "d", "gamma & (e(d,f) | delta)"),
        derive(Q, "g", "c", "delta & (q(g,f) | gamma)"),
        derive(E, "a", "f", "delta & (e(a,d) | e(d,f))"),
        dpp("g", "a", "q(g,f) e(f,a)", "q(g,c) e(c,b) q(b,a)"),
        dpp("g", "d", "q(g,f) e(f,d)", "q(g,a) e(a,d)"),
        derive(Q, "b", "d", "(q(b,a) | e(a,d)) & (delta | q(g,d))"),
        derive(Q, "g", "b", "(q(g,c) | e(c,b)) & (q(g,d) | gamma)"),
        dpp("b", "f", "q(b,a) e(a,f)", "q(b,d) e(d,f)"),
        derive(Q, "c", "f", "(e(c,b) | q(b,f)) & gamma"),
        derive(Q, "b", "c", "e(b,c) & (q(b,f) | gamma)"),
        derive(Q, "d", "f", "e(d,f) & (q(b,f) | gamma)"),
        derive(Q, "a", "f", "e(a,f) & (q(b,f) | gamma)"),
        dpp("d", "a", "e(d,a)", "q(d,f) e(f,a)"),
        dpp("f", "a", "e(f,a)", "e(f,d) q(d,a)"),
        derive(Q, "b", "g", "(q(b,f) | alpha) & delta"),
        dpp("a", "d", "e(a,d)", "q(a,f) e(f,d)"),
        dpp("f", "d", "e(f,d)", "q(f,a) q(a,d)"),
        derive(Q, "c", "g", "(e(c,b) | q(b,g)) & (q(c,f) | alpha)"),
        dpp("c", "b", "q(c,g) q(g,b)", "e(c,b)"),
        derive(Q, "f", "g", "alpha & (gamma | q(c,g))"),
        derive(Q, "a", "b", "(q(a,f) | q(f,g) | q(g,b)) & gamma"),
    ];
    for s in steps {
        cert.push(s);
    }
    cert.closure_budget = Some(QUO6_CLOSURE_BUDGET);
    cert
}

/// Emits `assert x <= lo`, `lo <= mid`, `mid <= hi` and `hi == x` for a sandwich argument.
fn sandwich(cert: &mut Certificate, atom: &str, lo: &str, mid: &str, hi: &str) {
    cert.push(Statement::AssertLeq(term(atom), term(lo)));
    cert.push(Statement::AssertLeq(term(lo), term(mid)));
    cert.push(Statement::AssertLeq(term(mid), term(hi)));
    cert.push(Statement::AssertEq(term(hi), term(atom)));
}

fn blocks_statement(family: &GeneratorFamily, joined: &str) -> Statement {
    let partition = claimed_blocks(family).expect("zadori family");
    let blocks = partition
        .non_singleton_blocks()
        .map(|b| b.iter().map(|&x| family.ground.label(x).to_string()).collect())
        .collect();
    Statement::AssertBlocks { term: term(joined), blocks, order: None }
}

fn zadori_lets(cert: &mut Certificate, family: &GeneratorFamily) {
    for name in ["delta_star", "delta_plus"] {
        let rel = family.get(name).expect("auxiliary");
        let parts = rel.atom_decomposition().expect("equivalence").into_iter().filter_map(|a| {
            let (x, y) = a.pairs().next()?;
            (x < y).then(|| Term::e(family.ground.label(x), family.ground.label(y)))
        });
        cert.define(name, Term::join_all(parts).expect("nontrivial"));
    }
}

/// Labels `(a0, b0, ak, b_{k-1})` of the configuration behind `family`.
fn corners(family: &GeneratorFamily) -> [String; 4] {
    let z = family.zadori.as_ref().expect("zadori family");
    let l = |i: usize| family.ground.label(i).to_string();
    [l(z.a[0]), l(z.b[0]), l(z.a[z.k]), l(z.b[z.k - 1])]
}

fn push_kulin(cert: &mut Certificate, family: &GeneratorFamily) {
    let delta = family.get("delta").expect("delta");
    let cycle = default_cycle(delta).expect("delta is not symmetric");
    for s in kulin_derivation(&family.ground, "delta", delta, &cycle).expect("valid cycle") {
        cert.push(s);
    }
}

/// Certificate that `{alpha, beta, gamma, delta}` generates `Quo n` for odd `n >= 11`.
///
/// The `Equ` part is the cited Zádori lemma; the step from `Equ` to `Quo` is
/// written out as the explicit Kulin derivation around the `n`-gon.
pub fn builtin_odd_certificate(n: usize) -> Result<Certificate, ConstructionError> {
    let family = odd_generators(n)?;
    let k = family.zadori.as_ref().expect("zadori family").k;
    let [a0, b0, ak, bk1] = corners(&family);
    let mut cert = with_generators(&family, Conclusion::GeneratesQuo);
    zadori_lets(&mut cert, &family);
    cert.push(blocks_statement(&family, "delta_plus | gamma"));
    let eps = format!("e({a0},{b0})");
    cert.define("eps0", term("beta & (delta | gamma)"));
    sandwich(&mut cert, &eps, "beta & (delta_star | gamma)", "eps0", "beta & (delta_plus | gamma)");
    let eta = format!("e({ak},{bk1})");
    cert.define("eta", term("gamma & (delta | beta)"));
    sandwich(&mut cert, &eta, "gamma & (delta_star | beta)", "eta", "gamma & (delta_plus | beta)");
    let mode = if k <= EXHAUSTIVE_K_MAX { ValidationMode::Exhaustive } else { ValidationMode::SmallKValidated };
    cert.push(Statement::Cite { lemma: Lemma::Zadori { k }, mode });
    push_kulin(&mut cert, &family);
    Ok(cert)
}

/// Certificate that `{alpha, beta_sharp, gamma_sharp, delta}` generates `Quo n` for even `n >= 14`.
pub fn builtin_even_certificate(n: usize) -> Result<Certificate, ConstructionError> {
    let family = even_generators(n)?;
    let z = family.zadori.as_ref().expect("zadori family");
    let k = z.k;
    let l = |i: usize| family.ground.label(i).to_string();
    let (b1, bk3) = (l(z.b[1]), l(z.b[k - 3]));
    let support: Vec<String> = z.support().into_iter().map(l).collect();
    let [a0, b0, ak, bk1] = corners(&family);
    let mut cert = with_generators(&family, Conclusion::GeneratesQuo);
    zadori_lets(&mut cert, &family);
    cert.push(blocks_statement(&family, "delta_plus | gamma_sharp"));
    let eps = format!("e({a0},{b0})");
    cert.define("eps0", term("beta_sharp & (delta | gamma_sharp)"));
    sandwich(
        &mut cert,
        &eps,
        "beta_sharp & (delta_star | gamma_sharp)",
        "eps0",
        "beta_sharp & (delta_plus | gamma_sharp)",
    );
    cert.define("beta", term("(eps0 | alpha) & beta_sharp"));
    cert.define("gamma", term("(eps0 | alpha) & gamma_sharp"));
    let eta = format!("e({ak},{bk1})");
    cert.define("eta", term("gamma & (delta | beta)"));
    sandwich(&mut cert, &eta, "gamma & (delta_star | beta)", "eta", "gamma & (delta_plus | beta)");
    cert.push(Statement::Cite { lemma: Lemma::Zadori { k }, mode: ValidationMode::SmallKValidated });
    let bridge = format!("e({b1},{bk3})");
    cert.push(derive(StepKind::E, &b1, "c", &format!("beta_sharp & ({bridge} | gamma_sharp)")));
    cert.push(derive(StepKind::E, &bk3, "c", &format!("gamma_sharp & ({bridge} | beta_sharp)")));
    for x in support.iter().filter(|x| **x != b1 && **x != bk3) {
        let t = format!("(e({x},{b1}) | e({b1},c)) & (e({x},{bk3}) | e({bk3},c))");
        cert.push(derive(StepKind::E, x, "c", &t));
    }
    cert.push(Statement::Cite { lemma: Lemma::Kulin { rho: "delta".into() }, mode: ValidationMode::Exhaustive });
    Ok(cert)
}

/// Convenience used by `verify`: the odd or even certificate for `n`.
pub fn builtin_zadori_certificate(n: usize) -> Result<Certificate, ConstructionError> {
    if n % 2 == 1 {
        builtin_odd_certificate(n)
    } else {
        builtin_even_certificate(n)
    }
}
