use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use quolat::genclose::{closure, dpp, generates_quo, ClosureBudget, DppError, PathStep, StepKind, Target};
use quolat::lattice::IndexedLattice;
use quolat::relcore::join_all;
use quolat::{GroundSet, Permutation, Relation};

type Pairs = BTreeSet<(usize, usize)>;

fn ground(n: usize) -> Arc<GroundSet> {
    GroundSet::indexed(n).unwrap()
}

fn pair_set(r: &Relation) -> Pairs {
    (0..r.size()).flat_map(|x| (0..r.size()).map(move |y| (x, y))).filter(|&(x, y)| r.contains(x, y)).collect()
}

/// Reflexive transitive closure by naive fixpoint over explicit pairs.
fn oracle_closure(n: usize, pairs: &Pairs) -> Pairs {
    let mut out: Pairs = pairs.clone();
    out.extend((0..n).map(|x| (x, x)));
    loop {
        let mut added = Vec::new();
        for &(a, b) in &out {
            for &(c, d) in &out {
                if b == c && !out.contains(&(a, d)) {
                    added.push((a, d));
                }
            }
        }
        if added.is_empty() {
            return out;
        }
        out.extend(added);
    }
}

prop_compose! {
    /// A random quasiorder on `n` points: the closure of a random pair set.
    fn quasiorder(n: usize)(pairs in prop::collection::vec((0..n, 0..n), 0..=n + 2)) -> Relation {
        Relation::quasiorder_from_pairs(&ground(n), pairs).unwrap()
    }
}

fn quasiorders(count: usize) -> impl Strategy<Value = Vec<Relation>> {
    (1usize..=6).prop_flat_map(move |n| prop::collection::vec(quasiorder(n), count))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn lattice_axioms(rs in quasiorders(3)) {
        let (r, s, t) = (&rs[0], &rs[1], &rs[2]);
        prop_assert_eq!(r.meet(s).unwrap(), s.meet(r).unwrap());
        prop_assert_eq!(r.join(s).unwrap(), s.join(r).unwrap());
        prop_assert_eq!(r.meet(&s.meet(t).unwrap()).unwrap(), r.meet(s).unwrap().meet(t).unwrap());
        prop_assert_eq!(r.join(&s.join(t).unwrap()).unwrap(), r.join(s).unwrap().join(t).unwrap());
        prop_assert_eq!(&r.meet(r).unwrap(), r);
        prop_assert_eq!(&r.join(r).unwrap(), r);
        prop_assert_eq!(&r.meet(&r.join(s).unwrap()).unwrap(), r);
        prop_assert_eq!(&r.join(&r.meet(s).unwrap()).unwrap(), r);
        prop_assert!(r.meet(s).unwrap().is_quasiorder());
        prop_assert!(r.join(s).unwrap().is_quasiorder());
    }

    #[test]
    fn join_matches_fixpoint_oracle(rs in (1usize..=5).prop_flat_map(|n| prop::collection::vec(quasiorder(n), 2))) {
        let (r, s) = (&rs[0], &rs[1]);
        let n = r.size();
        let union: Pairs = pair_set(r).union(&pair_set(s)).copied().collect();
        prop_assert_eq!(pair_set(&r.join(s).unwrap()), oracle_closure(n, &union));
    }

    #[test]
    fn theta_is_largest_equivalence_below(r in (1usize..=6).prop_flat_map(quasiorder)) {
        let theta = r.theta().unwrap().to_equivalence();
        prop_assert!(theta.is_equivalence() && theta.leq(&r));
        for x in 0..r.size() {
            for y in 0..r.size() {
                let e = Relation::e(r.ground(), x, y).unwrap();
                if e.leq(&r) {
                    prop_assert!(e.leq(&theta));
                }
            }
        }
    }

    #[test]
    fn permutations_are_automorphisms(
        (rs, perm) in (1usize..=6).prop_flat_map(|n| {
            (prop::collection::vec(quasiorder(n), 2), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let p = Permutation::new(perm).unwrap();
        let img = |x: &Relation| x.apply_permutation(&p).unwrap();
        let (r, s) = (&rs[0], &rs[1]);
        prop_assert_eq!(img(&r.meet(s).unwrap()), img(r).meet(&img(s)).unwrap());
        prop_assert_eq!(img(&r.join(s).unwrap()), img(r).join(&img(s)).unwrap());
        prop_assert_eq!(img(&r.inverse()), img(r).inverse());
        prop_assert_eq!(r.leq(s), img(r).leq(&img(s)));
        prop_assert_eq!(img(r).apply_permutation(&p.inverse()).unwrap(), r.clone());
    }
}

/// Every quasiorder on at most 5 points that contains `r | s` contains their join.
#[test]
fn join_is_least_against_enumeration() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for n in 1..=5 {
        let lat = IndexedLattice::enumerate_quo(n).unwrap();
        let strategy = prop::collection::vec(quasiorder(n), 2);
        for _ in 0..40 {
            let rs = strategy.new_tree(&mut runner).unwrap().current();
            let rs: Vec<Relation> =
                rs.iter().map(|r| Relation::from_rows(lat.ground(), r.rows().to_vec()).unwrap()).collect();
            let j = rs[0].join(&rs[1]).unwrap();
            assert!(lat.id_of(&j).is_some());
            for u in lat.elements() {
                if rs[0].leq(u) && rs[1].leq(u) {
                    assert!(j.leq(u), "n={n}");
                }
            }
        }
    }
}

#[test]
fn atom_decomposition_round_trips_quo_up_to_4() {
    for n in 1..=4 {
        let lat = IndexedLattice::enumerate_quo(n).unwrap();
        for r in lat.elements() {
            let atoms = r.atom_decomposition().unwrap();
            assert_eq!(atoms.len(), r.pair_count());
            assert!(atoms.iter().all(|a| a.leq(r) && a.pair_count() == 1));
            assert_eq!(&join_all(lat.ground(), &atoms), r);
        }
    }
}

#[test]
fn equ_is_a_sublattice_of_quo() {
    for n in 1..=5 {
        let quo = IndexedLattice::enumerate_quo(n).unwrap();
        let equ = IndexedLattice::enumerate_equ(n).unwrap();
        for e in equ.elements() {
            let moved = Relation::from_rows(quo.ground(), e.rows().to_vec()).unwrap();
            assert!(quo.id_of(&moved).is_some());
        }
        for a in equ.elements() {
            for b in equ.elements().iter().take(20) {
                assert!(equ.id_of(&a.join(b).unwrap()).is_some());
                assert!(equ.id_of(&a.meet(b).unwrap()).is_some());
            }
        }
    }
}

#[test]
fn quo2_has_no_three_element_antichain() {
    let lat = IndexedLattice::enumerate_quo(2).unwrap();
    assert_eq!(lat.len(), 4);
    let els = lat.elements();
    for i in 0..4 {
        for j in i + 1..4 {
            for k in j + 1..4 {
                let trio = [&els[i], &els[j], &els[k]];
                let antichain = (0..3).all(|a| (0..3).all(|b| a == b || !trio[a].comparable(trio[b])));
                assert!(!antichain);
            }
        }
    }
}

fn key_set(rels: &[Relation]) -> BTreeSet<Vec<u64>> {
    let c = closure(rels, &ClosureBudget::new(1000, Target::Saturate)).unwrap();
    c.elements().map(|r| r.key().to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn saturated_closure_is_closed_and_order_free(
        (gens, order) in (2usize..=4).prop_flat_map(|n| prop::collection::vec(quasiorder(n), 1..=4))
            .prop_flat_map(|g| { let len = g.len(); (Just(g), Just((0..len).collect::<Vec<_>>()).prop_shuffle()) })
    ) {
        let keys = key_set(&gens);
        let shuffled: Vec<Relation> = order.iter().map(|&i| gens[i].clone()).collect();
        prop_assert_eq!(&key_set(&shuffled), &keys);
        let g = gens[0].ground();
        let els: Vec<Relation> = keys.iter().map(|k| Relation::from_rows(g, k.clone()).unwrap()).collect();
        for r in &gens {
            prop_assert!(keys.contains(r.key()));
        }
        for a in &els {
            for b in &els {
                prop_assert!(keys.contains(a.meet(b).unwrap().key()));
                prop_assert!(keys.contains(a.join(b).unwrap().key()));
            }
        }
    }

    #[test]
    fn generation_is_relabeling_invariant(
        (gens, perm) in (2usize..=3).prop_flat_map(|n| {
            (prop::collection::vec(quasiorder(n), 1..=4), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let p = Permutation::new(perm).unwrap();
        let moved: Vec<Relation> = gens.iter().map(|r| r.apply_permutation(&p).unwrap()).collect();
        let a = generates_quo(&gens, 1000).unwrap().outcome;
        let b = generates_quo(&moved, 1000).unwrap().outcome;
        prop_assert_eq!(a, b);
    }
}

/// Two `x -> y` paths with disjoint interiors and arbitrary step kinds.
#[derive(Debug, Clone)]
struct PathPair {
    n: usize,
    vertices1: Vec<usize>,
    vertices2: Vec<usize>,
    kinds1: Vec<bool>,
    kinds2: Vec<bool>,
}

impl PathPair {
    fn steps(vertices: &[usize], kinds: &[bool]) -> Vec<PathStep> {
        vertices
            .windows(2)
            .zip(kinds)
            .map(|(w, &directed)| if directed { PathStep::q(w[0], w[1]) } else { PathStep::e(w[0], w[1]) })
            .collect()
    }

    fn paths(&self) -> (Vec<PathStep>, Vec<PathStep>) {
        (Self::steps(&self.vertices1, &self.kinds1), Self::steps(&self.vertices2, &self.kinds2))
    }
}

/// Ground sets of 3 to 10 points; each interior has at least `min_inner` vertices.
fn path_pairs(min_inner: usize) -> impl Strategy<Value = PathPair> {
    (3usize.max(2 * min_inner + 2)..=10)
        .prop_flat_map(move |n| (Just(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), 2 * min_inner..=n - 2))
        .prop_flat_map(move |(n, order, inner)| (Just(n), Just(order), Just(inner), min_inner..=inner - min_inner))
        .prop_flat_map(|(n, order, inner, split)| {
            let (x, y) = (order[0], order[1]);
            let mut v1 = vec![x];
            v1.extend(&order[2..2 + split]);
            v1.push(y);
            let mut v2 = vec![x];
            v2.extend(&order[2 + split..2 + inner]);
            v2.push(y);
            let (l1, l2) = (v1.len() - 1, v2.len() - 1);
            (
                Just(n),
                Just(v1),
                Just(v2),
                prop::collection::vec(any::<bool>(), l1),
                prop::collection::vec(any::<bool>(), l2),
            )
        })
        .prop_map(|(n, vertices1, vertices2, kinds1, kinds2)| PathPair { n, vertices1, vertices2, kinds1, kinds2 })
}

fn eval_join(g: &Arc<GroundSet>, path: &[PathStep]) -> Relation {
    let atoms: Vec<Relation> = path.iter().map(|s| s.atom(g).unwrap()).collect();
    join_all(g, &atoms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dpp_on_random_paths(pp in path_pairs(0)) {
        let g = ground(pp.n);
        let (p1, p2) = pp.paths();
        let (x, y) = (pp.vertices1[0], *pp.vertices1.last().unwrap());
        let directed = p1.iter().chain(&p2).any(|s| s.kind == StepKind::Q);
        match dpp(&g, &p1, &p2) {
            Ok(out) => {
                prop_assert!(directed);
                let meet = eval_join(&g, &p1).meet(&eval_join(&g, &p2)).unwrap();
                prop_assert_eq!(&out.meet, &meet);
                prop_assert!(Relation::q(&g, x, y).unwrap().leq(&meet));
                prop_assert!(meet.leq(&Relation::e(&g, x, y).unwrap()));
                prop_assert_eq!(meet, Relation::q(&g, x, y).unwrap());
            }
            Err(e) => {
                prop_assert!(!directed);
                prop_assert_eq!(e, DppError::NoDirectedStep);
                // with no directed step the meet is the symmetric atom
                let meet = eval_join(&g, &p1).meet(&eval_join(&g, &p2)).unwrap();
                prop_assert_eq!(meet, Relation::e(&g, x, y).unwrap());
            }
        }
    }

    #[test]
    fn dpp_rejects_shared_interiors(pp in path_pairs(1)) {
        let mut bad = pp.clone();
        bad.vertices2[1] = pp.vertices1[1];
        bad.kinds1[0] = true;
        let g = ground(bad.n);
        let (p1, p2) = bad.paths();
        prop_assert!(matches!(dpp(&g, &p1, &p2), Err(DppError::InteriorsIntersect(_))));
    }
}
