//! Generator families and Zádori configurations.
//!
//! Each family is a named four-element set of quasiorders with exactly one
//! comparable pair. The families on `n >= 11` elements are built on a Zádori
//! configuration; their auxiliary relations (`delta_star`, `delta_plus`, and
//! for the even case the plain `beta`/`gamma`) are kept alongside.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::lattice::comparable_pairs;
use crate::relcore::{join_all, GroundSet, Partition, RelError, Relation, RelationJson, MAX_GROUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("Zádori configurations need k >= 2, got {0}")]
    KTooSmall(usize),
    #[error("{family} needs an {parity} n, got {n}")]
    Parity { family: &'static str, parity: &'static str, n: usize },
    #[error("{family} needs n >= {min}, got {n}")]
    TooSmall { family: &'static str, min: usize, n: usize },
    #[error("n = {0} exceeds the {MAX_GROUND}-element ground set limit")]
    TooLarge(usize),
    #[error("members have {0} comparable pairs, expected exactly one")]
    NotOneOneTwo(usize),
    #[error("unknown family `{0}` (expected quo3, quo6, equ6, odd:N or even:N)")]
    UnknownFamily(String),
    #[error(transparent)]
    Rel(#[from] RelError),
}

/// The five equivalences of a Zádori configuration of size `2k+1`.
///
/// Ground labels are `a0..ak`, `b0..b{k-1}` followed by any extra labels.
#[derive(Debug, Clone)]
pub struct ZadoriConfig {
    pub k: usize,
    pub ground: Arc<GroundSet>,
    /// Indices of `a_0 .. a_k`.
    pub a: Vec<usize>,
    /// Indices of `b_0 .. b_{k-1}`.
    pub b: Vec<usize>,
    pub alpha: Relation,
    pub beta: Relation,
    pub gamma: Relation,
    pub eps0: Relation,
    pub eta: Relation,
}

pub fn zadori(k: usize, extra: &[&str]) -> Result<ZadoriConfig, ConstructionError> {
    if k < 2 {
        return Err(ConstructionError::KTooSmall(k));
    }
    let n = 2 * k + 1 + extra.len();
    if n > MAX_GROUND {
        return Err(ConstructionError::TooLarge(n));
    }
    let mut labels: Vec<String> = (0..=k).map(|i| format!("a{i}")).collect();
    labels.extend((0..k).map(|i| format!("b{i}")));
    labels.extend(extra.iter().map(|s| s.to_string()));
    let ground = GroundSet::new(labels)?;
    let a: Vec<usize> = (0..=k).collect();
    let b: Vec<usize> = (k + 1..2 * k + 1).collect();
    let e = |x: usize, y: usize| Relation::e(&ground, x, y);

    let mut horizontal = Vec::new();
    for i in 1..=k {
        horizontal.push(e(a[i - 1], a[i])?);
    }
    for i in 1..k {
        horizontal.push(e(b[i - 1], b[i])?);
    }
    let slope_down = (0..k).map(|i| e(a[i], b[i])).collect::<Result<Vec<_>, _>>()?;
    let slope_up = (1..=k).map(|i| e(a[i], b[i - 1])).collect::<Result<Vec<_>, _>>()?;

    Ok(ZadoriConfig {
        k,
        alpha: join_all(&ground, &horizontal),
        beta: join_all(&ground, &slope_down),
        gamma: join_all(&ground, &slope_up),
        eps0: e(a[0], b[0])?,
        eta: e(a[k], b[k - 1])?,
        ground,
        a,
        b,
    })
}

impl ZadoriConfig {
    /// `[alpha, beta, gamma, eps0, eta]`.
    pub fn five(&self) -> [Relation; 5] {
        [self.alpha.clone(), self.beta.clone(), self.gamma.clone(), self.eps0.clone(), self.eta.clone()]
    }

    /// The support `a_0..a_k, b_0..b_{k-1}` in ground-set order.
    pub fn support(&self) -> Vec<usize> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    /// The five relations restricted to the support, i.e. as members of `Equ A`.
    pub fn restricted_five(&self) -> Result<[Relation; 5], RelError> {
        let support = self.support();
        let target = GroundSet::new(support.iter().map(|&i| self.ground.label(i).to_string()))?;
        let [a, b, c, d, e] = self.five();
        Ok([
            a.restrict_onto(&target, &support)?,
            b.restrict_onto(&target, &support)?,
            c.restrict_onto(&target, &support)?,
            d.restrict_onto(&target, &support)?,
            e.restrict_onto(&target, &support)?,
        ])
    }
}

/// A named four-element generating candidate with its designated comparable pair.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    pub name: String,
    pub ground: Arc<GroundSet>,
    pub members: Vec<(String, Relation)>,
    /// Named relations used by the proofs but not part of the generating set.
    pub auxiliaries: Vec<(String, Relation)>,
    /// `(lower, upper)` indices into `members`.
    pub comparable_pair: (usize, usize),
    pub zadori: Option<ZadoriConfig>,
}

impl GeneratorFamily {
    fn new(
        name: impl Into<String>,
        ground: &Arc<GroundSet>,
        members: Vec<(String, Relation)>,
        auxiliaries: Vec<(String, Relation)>,
        zadori: Option<ZadoriConfig>,
    ) -> Result<Self, ConstructionError> {
        let rels: Vec<Relation> = members.iter().map(|(_, r)| r.clone()).collect();
        let pairs = comparable_pairs(&rels);
        if pairs.len() != 1 {
            return Err(ConstructionError::NotOneOneTwo(pairs.len()));
        }
        let (i, j) = pairs[0];
        let comparable_pair = if rels[i].leq(&rels[j]) { (i, j) } else { (j, i) };
        Ok(GeneratorFamily { name: name.into(), ground: ground.clone(), members, auxiliaries, comparable_pair, zadori })
    }

    pub fn relations(&self) -> Vec<Relation> {
        self.members.iter().map(|(_, r)| r.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.members.iter().chain(&self.auxiliaries).find(|(n, _)| n == name).map(|(_, r)| r)
    }

    /// Every named relation, members first.
    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.members.iter().chain(&self.auxiliaries).map(|(n, r)| (n.as_str(), r))
    }

    pub fn comparable_names(&self) -> (&str, &str) {
        (&self.members[self.comparable_pair.0].0, &self.members[self.comparable_pair.1].0)
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            name: self.name.clone(),
            ground: self.ground.labels().to_vec(),
            members: self.members.iter().map(|(n, r)| (n.clone(), r.to_json())).collect(),
            auxiliaries: self.auxiliaries.iter().map(|(n, r)| (n.clone(), r.to_json())).collect(),
            comparable_pair: {
                let (lo, hi) = self.comparable_names();
                (lo.to_string(), hi.to_string())
            },
        }
    }

    /// Graphviz rendering: one cluster per member showing its induced block order.
    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph \"{}\" {{\n    node [shape=box];\n", self.name);
        for (idx, (name, r)) in self.members.iter().enumerate() {
            let poset = r.induced_order().expect("family members are quasiorders");
            out.push_str(&format!("    subgraph cluster_{idx} {{\n        label=\"{name}\";\n"));
            for i in poset.visible() {
                let labels: Vec<&str> = poset.blocks()[i].iter().map(|&x| self.ground.label(x)).collect();
                out.push_str(&format!("        m{idx}b{i} [label=\"{}\"];\n", labels.join(",")));
            }
            for (lo, hi) in poset.covers() {
                out.push_str(&format!("        m{idx}b{lo} -> m{idx}b{hi};\n"));
            }
            out.push_str("    }\n");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyJson {
    pub name: String,
    pub ground: Vec<String>,
    pub members: Vec<(String, RelationJson)>,
    pub auxiliaries: Vec<(String, RelationJson)>,
    pub comparable_pair: (String, String),
}

fn named(name: &str, r: Relation) -> (String, Relation) {
    (name.to_string(), r)
}

/// The four quasiorders on `{a,b,c,d,f,g}` generating `Quo 6`.
pub fn quo6_generators() -> GeneratorFamily {
    let g = GroundSet::parse("a b c d f g").expect("static labels");
    let e = |x: &str, y: &str| Relation::e_named(&g, x, y).expect("static labels");
    let q = |x: &str, y: &str| Relation::q_named(&g, x, y).expect("static labels");
    let alpha = &e("d", "f") | &e("f", "g");
    let beta = &(&alpha | &e("b", "c")) | &q("b", "a");
    let gamma = &(&e("a", "b") | &e("a", "d")) | &e("c", "f");
    let delta = &(&e("b", "c") | &e("c", "g")) | &e("a", "f");
    GeneratorFamily::new(
        "quo6",
        &g,
        vec![named("alpha", alpha), named("beta", beta), named("gamma", gamma), named("delta", delta)],
        Vec::new(),
        None,
    )
    .expect("quo6 family has one comparable pair")
}

/// `{q(a,b), e(a,b), e(b,c), e(c,a)}` on `{a,b,c}`.
pub fn quo3_generators() -> GeneratorFamily {
    let g = GroundSet::parse("a b c").expect("static labels");
    let e = |x: &str, y: &str| Relation::e_named(&g, x, y).expect("static labels");
    GeneratorFamily::new(
        "quo3",
        &g,
        vec![
            named("q_ab", Relation::q_named(&g, "a", "b").expect("static labels")),
            named("e_ab", e("a", "b")),
            named("e_bc", e("b", "c")),
            named("e_ca", e("c", "a")),
        ],
        Vec::new(),
        None,
    )
    .expect("quo3 family has one comparable pair")
}

/// The equivalences `{alpha, beta_star, gamma, delta}` generating `Equ 6`,
/// where `beta_star = beta | q(a,b)`.
pub fn equ6_generators() -> GeneratorFamily {
    let base = quo6_generators();
    let g = base.ground.clone();
    let beta_star = base.get("beta").expect("beta") | &Relation::q_named(&g, "a", "b").expect("static labels");
    GeneratorFamily::new(
        "equ6",
        &g,
        vec![
            named("alpha", base.get("alpha").expect("alpha").clone()),
            named("beta_star", beta_star),
            named("gamma", base.get("gamma").expect("gamma").clone()),
            named("delta", base.get("delta").expect("delta").clone()),
        ],
        Vec::new(),
        None,
    )
    .expect("equ6 family has one comparable pair")
}

struct Deltas {
    star: Relation,
    delta: Relation,
    plus: Relation,
}

fn deltas(z: &ZadoriConfig) -> Result<Deltas, RelError> {
    let (a, b, k, g) = (&z.a, &z.b, z.k, &z.ground);
    let star = &Relation::e(g, a[0], a[k])? | &Relation::e(g, b[0], b[k - 1])?;
    let delta = &star | &Relation::q(g, b[1], b[k - 2])?;
    let plus = &star | &Relation::e(g, b[1], b[k - 2])?;
    Ok(Deltas { star, delta, plus })
}

/// The odd family `{alpha, beta, gamma, delta}` on `n = 2k+1 >= 11` elements.
pub fn odd_generators(n: usize) -> Result<GeneratorFamily, ConstructionError> {
    if n.is_multiple_of(2) {
        return Err(ConstructionError::Parity { family: "odd", parity: "odd", n });
    }
    if n < 11 {
        return Err(ConstructionError::TooSmall { family: "odd", min: 11, n });
    }
    if n > MAX_GROUND {
        return Err(ConstructionError::TooLarge(n));
    }
    let z = zadori((n - 1) / 2, &[])?;
    let d = deltas(&z)?;
    GeneratorFamily::new(
        format!("odd:{n}"),
        &z.ground.clone(),
        vec![
            named("alpha", z.alpha.clone()),
            named("beta", z.beta.clone()),
            named("gamma", z.gamma.clone()),
            named("delta", d.delta),
        ],
        vec![named("delta_star", d.star), named("delta_plus", d.plus)],
        Some(z),
    )
}

/// The even family `{alpha, beta_sharp, gamma_sharp, delta}` on `n = 2k+2 >= 14`
/// elements: the odd construction on the support plus one extra element `c`.
pub fn even_generators(n: usize) -> Result<GeneratorFamily, ConstructionError> {
    if n % 2 == 1 {
        return Err(ConstructionError::Parity { family: "even", parity: "even", n });
    }
    if n < 14 {
        return Err(ConstructionError::TooSmall { family: "even", min: 14, n });
    }
    if n > MAX_GROUND {
        return Err(ConstructionError::TooLarge(n));
    }
    let k = (n - 2) / 2;
    let z = zadori(k, &["c"])?;
    let g = z.ground.clone();
    let c = g.index_of("c")?;
    let d = deltas(&z)?;
    let beta_sharp = &z.beta | &Relation::e(&g, z.b[1], c)?;
    let gamma_sharp = &z.gamma | &Relation::e(&g, z.b[k - 3], c)?;
    GeneratorFamily::new(
        format!("even:{n}"),
        &g,
        vec![
            named("alpha", z.alpha.clone()),
            named("beta_sharp", beta_sharp),
            named("gamma_sharp", gamma_sharp),
            named("delta", d.delta),
        ],
        vec![
            named("beta", z.beta.clone()),
            named("gamma", z.gamma.clone()),
            named("delta_star", d.star),
            named("delta_plus", d.plus),
        ],
        Some(z),
    )
}

/// Family selector as used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyId {
    Quo3,
    Quo6,
    Equ6,
    Odd(usize),
    Even(usize),
}

impl FamilyId {
    pub fn build(self) -> Result<GeneratorFamily, ConstructionError> {
        match self {
            FamilyId::Quo3 => Ok(quo3_generators()),
            FamilyId::Quo6 => Ok(quo6_generators()),
            FamilyId::Equ6 => Ok(equ6_generators()),
            FamilyId::Odd(n) => odd_generators(n),
            FamilyId::Even(n) => even_generators(n),
        }
    }
}

impl FromStr for FamilyId {
    type Err = ConstructionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ConstructionError::UnknownFamily(s.to_string());
        match s {
            "quo3" => Ok(FamilyId::Quo3),
            "quo6" => Ok(FamilyId::Quo6),
            "equ6" => Ok(FamilyId::Equ6),
            _ => {
                let (kind, n) = s.split_once(':').ok_or_else(unknown)?;
                let n: usize = n.parse().map_err(|_| unknown())?;
                match kind {
                    "odd" => Ok(FamilyId::Odd(n)),
                    "even" => Ok(FamilyId::Even(n)),
                    _ => Err(unknown()),
                }
            }
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::Quo3 => f.write_str("quo3"),
            FamilyId::Quo6 => f.write_str("quo6"),
            FamilyId::Equ6 => f.write_str("equ6"),
            FamilyId::Odd(n) => write!(f, "odd:{n}"),
            FamilyId::Even(n) => write!(f, "even:{n}"),
        }
    }
}

/// Claimed blocks of `delta_plus | gamma` (odd) or `delta_plus | gamma_sharp` (even).
pub fn claimed_blocks(family: &GeneratorFamily) -> Option<Partition> {
    let z = family.zadori.as_ref()?;
    let (a, b, k) = (&z.a, &z.b, z.k);
    let mut blocks = vec![vec![a[0], a[1], a[k], b[0], b[k - 1]], vec![a[2], a[k - 1], b[1], b[k - 2]]];
    let last_pair = match family.ground.index_of("c") {
        Ok(c) => {
            blocks.push(vec![a[k - 2], b[k - 3], c]);
            k - 3
        }
        Err(_) => k - 2,
    };
    for i in 3..=last_pair {
        blocks.push(vec![a[i], b[i - 1]]);
    }
    Partition::from_blocks(&family.ground, &blocks).ok()
}

/// A named equality or inequality the proofs rely on, with its evaluated truth value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub holds: bool,
}

fn check(name: impl Into<String>, holds: bool) -> InvariantCheck {
    InvariantCheck { name: name.into(), holds }
}

/// Evaluates the structural claims for an odd or even Zádori-based family.
pub fn zadori_family_invariants(family: &GeneratorFamily) -> Result<Vec<InvariantCheck>, ConstructionError> {
    let z = family.zadori.as_ref().ok_or_else(|| ConstructionError::UnknownFamily(family.name.clone()))?;
    let get = |n: &str| family.get(n).expect("named relation exists").clone();
    let g = &family.ground;
    let (alpha, delta, star, plus) = (get("alpha"), get("delta"), get("delta_star"), get("delta_plus"));
    let even = g.index_of("c").is_ok();
    let (beta, gamma) = if even { (get("beta_sharp"), get("gamma_sharp")) } else { (get("beta"), get("gamma")) };
    let (eps0, eta) = (z.eps0.clone(), z.eta.clone());
    let mut out = Vec::new();

    let rels = family.relations();
    out.push(check("one comparable pair", comparable_pairs(&rels).len() == 1));
    out.push(check("delta < alpha", delta.leq(&alpha) && delta != alpha));
    out.push(check("delta_star <= delta <= delta_plus", star.leq(&delta) && delta.leq(&plus)));
    out.push(check("delta_plus = delta | q(b_{k-2}, b_1)", plus == &delta | &Relation::q(g, z.b[z.k - 2], z.b[1])?));
    out.push(check("theta(delta) = delta_star", delta.theta()? == star.theta()?));
    let claimed = claimed_blocks(family).expect("zadori family");
    out.push(check("blocks of delta_plus | gamma", (&plus | &gamma).theta()? == claimed));

    let chain = |outer: &Relation, other: &Relation, atom: &Relation| {
        let lo = outer & &(&star | other);
        let mid = outer & &(&delta | other);
        let hi = outer & &(&plus | other);
        atom.leq(&lo) && lo.leq(&mid) && mid.leq(&hi) && hi == *atom && mid == *atom
    };
    out.push(check("eps0 chain: beta & (delta | gamma) = e(a0,b0)", chain(&beta, &gamma, &eps0)));
    if !even {
        out.push(check("eta chain: gamma & (delta | beta) = e(ak,b_{k-1})", chain(&gamma, &beta, &eta)));
        return Ok(out);
    }

    let c = g.index_of("c")?;
    let (b1, bk3) = (z.b[1], z.b[z.k - 3]);
    let eps_alpha = &eps0 | &alpha;
    out.push(check("beta = (eps0 | alpha) & beta_sharp", &eps_alpha & &beta == z.beta));
    out.push(check("gamma = (eps0 | alpha) & gamma_sharp", &eps_alpha & &gamma == z.gamma));
    out.push(check("eta chain on the recovered beta, gamma", chain(&z.gamma, &z.beta, &eta)));
    let bridge = Relation::e(g, b1, bk3)?;
    let e_b1_c = Relation::e(g, b1, c)?;
    let e_bk3_c = Relation::e(g, bk3, c)?;
    out.push(check("e(b1,c) = beta_sharp & (e(b1,b_{k-3}) | gamma_sharp)", &beta & &(&bridge | &gamma) == e_b1_c));
    out.push(check(
        "e(b_{k-3},c) = gamma_sharp & (e(b1,b_{k-3}) | beta_sharp)",
        &gamma & &(&bridge | &beta) == e_bk3_c,
    ));
    let mut all_x = true;
    for x in z.support() {
        if x == b1 || x == bk3 {
            continue;
        }
        let lhs = &(&Relation::e(g, x, b1)? | &e_b1_c) & &(&Relation::e(g, x, bk3)? | &e_bk3_c);
        all_x &= lhs == Relation::e(g, x, c)?;
    }
    out.push(check("e(x,c) from the two suspension points, all x", all_x));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::is_112_subset;

    fn four(f: &GeneratorFamily) -> [Relation; 4] {
        f.relations().try_into().unwrap()
    }

    #[test]
    fn quo6_blocks() {
        let f = quo6_generators();
        let g = &f.ground;
        let theta = |n: &str| f.get(n).unwrap().theta().unwrap();
        let p = |blocks: &[&[&str]]| {
            let v: Vec<Vec<&str>> = blocks.iter().map(|b| b.to_vec()).collect();
            Partition::from_labeled_blocks(g, &v).unwrap()
        };
        assert_eq!(theta("gamma"), p(&[&["a", "b", "d"], &["c", "f"]]));
        assert_eq!(theta("delta"), p(&[&["b", "c", "g"], &["a", "f"]]));
        assert_eq!(theta("beta"), p(&[&["b", "c"], &["d", "f", "g"]]));
        assert_eq!(theta("alpha"), p(&[&["d", "f", "g"]]));
        assert_eq!(f.comparable_names(), ("alpha", "beta"));
        assert!(is_112_subset(&four(&f)).unwrap());
    }

    #[test]
    fn quo3_family() {
        let f = quo3_generators();
        assert!(is_112_subset(&four(&f)).unwrap());
        assert_eq!(f.comparable_names(), ("q_ab", "e_ab"));
        let meet = f.get("q_ab").unwrap() & f.get("e_bc").unwrap();
        assert!(meet.is_delta());
    }

    #[test]
    fn equ6_family() {
        let f = equ6_generators();
        for (_, r) in &f.members {
            assert!(r.is_equivalence());
        }
        assert_eq!(f.comparable_names(), ("alpha", "beta_star"));
    }

    #[test]
    fn zadori_small_k() {
        let z = zadori(2, &[]).unwrap();
        let p = z.beta.theta().unwrap();
        let named: Vec<Vec<&str>> = vec![vec!["a0", "b0"], vec!["a1", "b1"]];
        assert_eq!(p, Partition::from_labeled_blocks(&z.ground, &named).unwrap());
        assert_eq!(p.block_of(z.a[2]).unwrap(), &[z.a[2]]);
        assert_eq!(zadori(1, &[]).unwrap_err(), ConstructionError::KTooSmall(1));
    }

    #[test]
    fn zadori_k5_alpha_rows() {
        let z = zadori(5, &[]).unwrap();
        let mut sizes: Vec<usize> = z.alpha.theta().unwrap().non_singleton_blocks().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![5, 6]);
    }

    #[test]
    fn corner_atoms_below_their_equivalences() {
        for k in 2..=8 {
            let z = zadori(k, &[]).unwrap();
            assert!(z.eps0.leq(&z.beta));
            assert!(z.eta.leq(&z.gamma));
        }
    }

    #[test]
    fn odd_11_delta_pairs() {
        let f = odd_generators(11).unwrap();
        let g = &f.ground;
        let mut pairs: Vec<(String, String)> =
            f.get("delta").unwrap().pairs().map(|(x, y)| (g.label(x).to_string(), g.label(y).to_string())).collect();
        pairs.sort();
        let mut expected: Vec<(String, String)> =
            [("a0", "a5"), ("a5", "a0"), ("b0", "b4"), ("b4", "b0"), ("b1", "b3")]
                .iter()
                .map(|(x, y)| (x.to_string(), y.to_string()))
                .collect();
        expected.sort();
        assert_eq!(pairs, expected);
        let claimed = claimed_blocks(&f).unwrap();
        assert_eq!(claimed.display_nontrivial(), "{a0 a1 a5 b0 b4} {a2 a4 b1 b3} {a3 b2}");
        // the comparable pair is delta < alpha
        assert_eq!(f.comparable_names(), ("delta", "alpha"));
    }

    #[test]
    fn even_14_shape() {
        let f = even_generators(14).unwrap();
        let g = &f.ground;
        let c = g.index_of("c").unwrap();
        let bs = f.get("beta_sharp").unwrap();
        let related: Vec<&str> = (0..g.size()).filter(|&x| x != c && bs.contains(c, x)).map(|x| g.label(x)).collect();
        assert_eq!(related, vec!["a1", "b1"]);
        assert!(is_112_subset(&four(&f)).unwrap());
        let claimed = claimed_blocks(&f).unwrap();
        assert!(claimed.display_nontrivial().contains("{a4 b3 c}"));
    }

    #[test]
    fn parity_and_size_errors() {
        assert!(matches!(odd_generators(12), Err(ConstructionError::Parity { .. })));
        assert!(matches!(odd_generators(9), Err(ConstructionError::TooSmall { .. })));
        assert!(matches!(even_generators(13), Err(ConstructionError::Parity { .. })));
        assert!(matches!(even_generators(12), Err(ConstructionError::TooSmall { .. })));
        assert!(matches!(odd_generators(65), Err(ConstructionError::TooLarge(65))));
        assert!(even_generators(64).is_ok());
        assert!(odd_generators(63).is_ok());
    }

    #[test]
    fn invariants_hold_for_the_smallest_cases() {
        for f in [odd_generators(11).unwrap(), even_generators(14).unwrap()] {
            for c in zadori_family_invariants(&f).unwrap() {
                assert!(c.holds, "{}: {}", f.name, c.name);
            }
        }
    }

    #[test]
    fn plain_beta_gamma_cannot_reach_c() {
        // with the unsharpened beta and gamma, c is a singleton block in both,
        // so the meet collapses to the identity
        let f = even_generators(14).unwrap();
        let z = f.zadori.as_ref().unwrap();
        let g = &f.ground;
        let bridge = Relation::e(g, z.b[1], z.b[3]).unwrap();
        assert!((&z.beta & &(&bridge | &z.gamma)).is_delta());
    }

    #[test]
    fn family_ids() {
        assert_eq!("odd:11".parse::<FamilyId>().unwrap(), FamilyId::Odd(11));
        assert_eq!("even:14".parse::<FamilyId>().unwrap().to_string(), "even:14");
        assert!("odd:x".parse::<FamilyId>().is_err());
        assert!("quo4".parse::<FamilyId>().is_err());
    }
}
