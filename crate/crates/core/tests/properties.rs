use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

use bratteli_core::absorption::{build_absorption_diagram, find_isomorphism, plant_replicas, plant_y, verify_star, StarOptions};
use bratteli_core::gen::Gen;
use bratteli_core::io::{emit_diagram, parse_diagram};
use bratteli_core::{
    af_classes_at, check_compiled, class_size_check, diagram_from_filtration, ensure_capacity, find_transversal, join,
    microscope, telescope, thinness_bound, transverse_diagrams, BratteliDiagram, CapacityRequest, FiniteEqRel,
    IncidenceMatrix, Strictness, Subdiagram,
};

const CAP: usize = 100_000;

fn host(seed: u64) -> BratteliDiagram {
    let mut g = Gen::new(seed);
    let depth = g.rng().gen_range(1..=4);
    g.simple_host(depth, 3, 2)
}

/// Union of a random selection of full-depth paths; always a subdiagram.
fn path_union(d: &BratteliDiagram, seed: u64) -> Subdiagram {
    let paths = d.enumerate_paths(d.depth(), CAP).unwrap();
    let mut g = Gen::new(seed);
    let mut sub = Subdiagram::empty(d.depth());
    let take = g.rng().gen_range(1..=paths.len());
    for _ in 0..take {
        let p = &paths[g.rng().gen_range(0..paths.len())];
        for (k, &e) in p.edges().iter().enumerate() {
            sub.insert(k + 1, e);
        }
    }
    sub
}

fn root_row(d: &BratteliDiagram, to: usize) -> Vec<BigUint> {
    d.interval_product(0, to).unwrap().row_vec(0).to_vec()
}

fn grouped_by_terminal(d: &BratteliDiagram, n: usize) -> Vec<BigUint> {
    let mut counts = vec![BigUint::zero(); d.vertex_count(n)];
    for p in d.enumerate_paths(n, CAP).unwrap() {
        counts[d.terminal(&p)] += 1u32;
    }
    counts
}

fn random_cuts(depth: usize, seed: u64) -> Vec<usize> {
    let mut g = Gen::new(seed);
    let mut cuts = vec![0];
    cuts.extend((1..depth).filter(|_| g.rng().gen_bool(0.5)));
    cuts.push(depth);
    cuts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_match_enumeration_and_products(seed in any::<u64>()) {
        let d = host(seed);
        prop_assert!(d.validate().is_ok());
        for n in 0..=d.depth() {
            let counts = d.count_paths(n).unwrap().counts;
            prop_assert_eq!(&counts, &grouped_by_terminal(&d, n));
            if n > 0 {
                prop_assert_eq!(&counts, &root_row(&d, n));
                let step = d.count_paths(n - 1).unwrap().counts;
                let mut rec = vec![BigUint::zero(); d.vertex_count(n)];
                for e in d.edges(n) {
                    rec[e.range] += &step[e.source];
                }
                prop_assert_eq!(&counts, &rec);
            }
        }
    }

    #[test]
    fn telescope_edges_are_interval_products(seed in any::<u64>(), cut_seed in any::<u64>()) {
        let d = host(seed);
        let cuts = random_cuts(d.depth(), cut_seed);
        let (t, map) = telescope(&d, &cuts).unwrap();
        prop_assert_eq!(t.depth(), cuts.len() - 1);
        for k in 1..cuts.len() {
            let expected: IncidenceMatrix = d.interval_product(cuts[k - 1], cuts[k]).unwrap();
            prop_assert_eq!(t.incidence_matrix(k).unwrap(), expected);
        }
        let paths = d.enumerate_paths(d.depth(), CAP).unwrap();
        let mut images = HashSet::new();
        for p in &paths {
            let q = map.forward(p).unwrap();
            let back = map.inverse(&q);
            prop_assert_eq!(back.as_ref(), Some(p));
            prop_assert_eq!(t.vertex_id(t.depth(), t.terminal(&q)), d.vertex_id(d.depth(), d.terminal(p)));
            images.insert(q);
        }
        prop_assert_eq!(BigUint::from(images.len()), t.count_paths(t.depth()).unwrap().total());
    }

    #[test]
    fn microscope_then_telescope_is_isomorphic(seed in any::<u64>(), level in 1usize..5) {
        let d = host(seed);
        let level = 1 + (level - 1) % d.depth();
        let (m, _) = microscope(&d, level).unwrap();
        prop_assert!(m.validate().is_ok());
        let cuts: Vec<usize> = (0..=m.depth()).filter(|&n| n != level).collect();
        let (back, _) = telescope(&m, &cuts).unwrap();
        prop_assert!(find_isomorphism(&back, &d).is_some());
    }

    #[test]
    fn thinness_is_the_best_vertex_ratio(seed in any::<u64>(), pick in any::<u64>()) {
        let d = host(seed);
        let sub = path_union(&d, pick);
        prop_assert!(sub.validate(&d).unwrap().is_ok());
        for n in 1..=d.depth() {
            let bound = thinness_bound(&d, &sub, n).unwrap();
            prop_assert!(bound >= BigRational::zero() && bound <= BigRational::one());
            let mut inside = vec![0usize; d.vertex_count(n)];
            let mut all = vec![0usize; d.vertex_count(n)];
            for p in d.enumerate_paths(n, CAP).unwrap() {
                all[d.terminal(&p)] += 1;
                if sub.contains_path(&p) {
                    inside[d.terminal(&p)] += 1;
                }
            }
            let oracle = sub
                .vertices(&d, n)
                .into_iter()
                .map(|w| BigRational::new(inside[w].into(), all[w].into()))
                .max()
                .unwrap_or_else(BigRational::zero);
            prop_assert_eq!(&bound, &oracle);
            let full = sub.vertices(&d, n).into_iter().any(|w| inside[w] == all[w]);
            prop_assert_eq!(bound == BigRational::one(), full);
        }
    }

    #[test]
    fn ensure_capacity_output_meets_the_request(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let d = g.simple_host(12, 3, 2);
        let depth = g.rng().gen_range(1..=3);
        let a: Vec<usize> = (0..depth).map(|_| g.rng().gen_range(1..=4)).collect();
        let b: Vec<usize> = (0..depth).map(|_| g.rng().gen_range(1..=3)).collect();
        let req = CapacityRequest::new(a, b).unwrap();
        let (out, _) = ensure_capacity(&d, &req).unwrap();
        prop_assert!(req.check(&out).is_ok());
        prop_assert!(out.validate().is_ok());
    }

    #[test]
    fn diagram_text_round_trips(seed in any::<u64>()) {
        let d = host(seed);
        prop_assert_eq!(parse_diagram(&emit_diagram(&d)).unwrap(), d);
    }
}

/// Transitive closure of a pair set by repeated composition.
fn closure(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut set: BTreeSet<(usize, usize)> = (0..n).map(|x| (x, x)).collect();
    for (x, y) in pairs {
        set.insert((x, y));
        set.insert((y, x));
    }
    loop {
        let mut next = set.clone();
        for &(x, y) in &set {
            for &(_, z) in set.range((y, 0)..=(y, usize::MAX)) {
                next.insert((x, z));
            }
        }
        if next.len() == set.len() {
            return set;
        }
        set = next;
    }
}

fn pair_set(r: &FiniteEqRel) -> BTreeSet<(usize, usize)> {
    r.pairs().collect()
}

fn random_relation(g: &mut Gen, n: usize) -> FiniteEqRel {
    let labels: Vec<usize> = (0..n).map(|_| g.rng().gen_range(0..n.max(1))).collect();
    FiniteEqRel::from_labels(bratteli_core::relations::numbered_points(n), &labels)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relation_classes_partition_the_points(seed in any::<u64>(), n in 1usize..12) {
        let r = random_relation(&mut Gen::new(seed), n);
        let mut seen = vec![0; n];
        for c in r.classes() {
            for &x in c {
                seen[x] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
        prop_assert_eq!(pair_set(&r), closure(n, r.pairs()));
    }

    #[test]
    fn join_is_the_closure_of_the_union(seed in any::<u64>(), n in 1usize..10) {
        let mut g = Gen::new(seed);
        let (r, s) = (random_relation(&mut g, n), random_relation(&mut g, n));
        let j = join(&r, &s).unwrap();
        prop_assert_eq!(pair_set(&j), closure(n, r.pairs().chain(s.pairs())));
    }

    #[test]
    fn commuting_actions_are_transverse(seed in any::<u64>()) {
        let (r, s) = Gen::new(seed).transverse_pair(16);
        let w = find_transversal(&r, &s).unwrap().unwrap();
        prop_assert!(w.verify().is_ok());
        prop_assert!(class_size_check(&w).is_ok());
        prop_assert_eq!(w.len(), join(&r, &s).unwrap().pair_count());
    }

    #[test]
    fn enlarged_pairs_are_not_transverse(seed in any::<u64>()) {
        let (r, s) = Gen::new(seed).non_transverse_pair(16);
        let f = find_transversal(&r, &s).unwrap().unwrap_err();
        prop_assert!(!f.points.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compiled_chains_round_trip(seed in any::<u64>(), points in 1usize..=12, len in 2usize..=4) {
        let chain = Gen::new(seed).chain(points, len);
        let c = diagram_from_filtration(&chain).unwrap();
        prop_assert!(check_compiled(&chain, &c, CAP).unwrap().is_ok());
        for p in &c.partitions {
            prop_assert!(p.check().is_ok());
        }
        let depth = c.diagram.depth();
        let mut prev: Option<FiniteEqRel> = None;
        for n in 0..=depth {
            let cl = af_classes_at(&c.diagram, n, depth, CAP).unwrap().relation;
            if let Some(p) = &prev {
                prop_assert!(p.is_finer_than(&cl));
            }
            prev = Some(cl);
        }
    }

    #[test]
    fn a_bare_diagonal_codes_only_one_point(points in 2usize..=12) {
        let chain = Gen::new(0).chain(points, 1);
        prop_assert!(diagram_from_filtration(&chain).is_err());
    }

    #[test]
    fn transverse_diagrams_satisfy_the_quotient_laws(seed in any::<u64>()) {
        let (chain, s) = Gen::new(seed).transverse_chain(8, 3);
        let td = transverse_diagrams(&chain, &s).unwrap();
        prop_assert_eq!(td.q.strictness, Strictness::Full);
        prop_assert!(td.q.validate().is_ok());
        prop_assert!(td.check_s_is_af1(CAP).unwrap());
        prop_assert!(td.check_joint_generation(CAP).unwrap());
        let d = &td.q.source;
        for n in 1..=d.depth() {
            let lift = td.q.lift_paths(n, CAP).unwrap();
            prop_assert_eq!(BigUint::from(lift.len()), d.count_paths(n).unwrap().total());
        }
        let ranges: HashSet<usize> = d.edges(1).iter().map(|e| e.range).collect();
        prop_assert_eq!(ranges.len(), d.edges(1).len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn star_closure_is_always_sound(seed in any::<u64>()) {
        let inst = Gen::new(seed).absorption_instance(4, 3).unwrap();
        let y = plant_y(&inst.host, &inst.template).unwrap();
        let sc = plant_replicas(&inst.host, Some(y), &inst.template).unwrap();
        let r = build_absorption_diagram(&sc).unwrap();
        prop_assert!(r.fiber_law(&sc));
        let mut by_host: HashMap<usize, usize> = HashMap::new();
        for (v, fiber) in r.fibers[3].iter().enumerate() {
            by_host.insert(v, fiber.len());
        }
        prop_assert_eq!(by_host.values().sum::<usize>(), r.diagram.vertex_count(3));
        for n in 0..3 {
            for skip in [vec![], vec![1], vec![2]] {
                let star = verify_star(&sc, &r, &StarOptions { skip, ..StarOptions::new(n, 3) }).unwrap();
                prop_assert!(star.sound);
            }
        }
    }
}
