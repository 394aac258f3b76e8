use bratteli_core::absorption::{
    build_absorption_diagram, check_capacity_conditions, embedding_from_subdiagram, find_isomorphism, min_margin,
    plant_replicas, plant_y, shift_map_alpha, two_point_demo, verify_star, verify_star_exhaustive, DemoOptions,
    StarOptions, Template,
};
use bratteli_core::fixtures::{complete, layered, loop1, odo2, q2, tree2};
use bratteli_core::gen::Gen;
use bratteli_core::Subdiagram;

#[test]
fn demo_depth_four_pins_margin_one() {
    let r = two_point_demo(&DemoOptions::new(4)).unwrap();
    assert!(r.passed(), "{:#?}", r.lines());
    assert_eq!(r.margin, Some((3, 4)));
    assert_eq!(r.scaffold.replicas.len(), 3);
}

#[test]
fn demo_depth_six_all_stages() {
    let r = two_point_demo(&DemoOptions::new(6)).unwrap();
    assert!(r.passed(), "{:#?}", r.lines());
    assert_eq!(r.margin, Some((5, 6)));
    assert_eq!(r.scaffold.replicas.len(), 5);
    // replica fibres are the two-element fibres of the fold
    let sizes: Vec<usize> = r.result.fibers.iter().flatten().map(Vec::len).filter(|&k| k > 1).collect();
    assert!(!sizes.is_empty() && sizes.iter().all(|&k| k == 2));
    let star = verify_star(&r.scaffold, &r.result, &StarOptions::new(4, 6)).unwrap();
    assert!(star.holds());
}

#[test]
fn demo_alpha_sends_y_to_replica_one() {
    let r = two_point_demo(&DemoOptions::new(6)).unwrap();
    let a = shift_map_alpha(&r.scaffold, &r.result, 6, 10_000).unwrap();
    let ys = a.kinds.iter().filter(|k| matches!(k, bratteli_core::absorption::PathKind::Y(_))).count();
    assert_eq!(ys, 2);
    let c = a.check(&r.scaffold, &r.result, 10_000).unwrap();
    assert!(c.all_ok(), "{c:?}");
}

#[test]
fn omitting_k1_leaves_a_witness_through_replica_one() {
    let r = two_point_demo(&DemoOptions::new(5)).unwrap();
    let o = StarOptions { skip: vec![1], ..StarOptions::new(4, 5) };
    let star = verify_star(&r.scaffold, &r.result, &o).unwrap();
    assert!(star.sound);
    assert!(!star.complete);
    let w = star.witnesses.iter().find(|w| w.kind == "complete").unwrap();
    assert_eq!(w.left_terminal, w.right_terminal);
    let host = &r.scaffold.host;
    let end = host.vertex_index(5, &w.left_terminal).unwrap();
    assert!(r.scaffold.replicas[0].vertices[4].contains(&end));
    assert_eq!(min_margin(&r.scaffold, &r.result, 5, &[1]).unwrap(), Some(4));
}

#[test]
fn degenerate_k_gives_identity_rewrite() {
    let r = two_point_demo(&DemoOptions { degenerate: true, ..DemoOptions::new(4) }).unwrap();
    assert!(r.passed(), "{:#?}", r.lines());
    assert!(r.result.diagram.same_shape(&r.scaffold.host));
}

#[test]
fn compressed_star_agrees_with_brute_force() {
    let r = two_point_demo(&DemoOptions::new(4)).unwrap();
    for depth in 2..=3 {
        for n in 0..depth {
            for skip in [vec![], vec![1], vec![2]] {
                for with_k in [false, true] {
                    let o = StarOptions { skip: skip.clone(), with_k, ..StarOptions::new(n, depth) };
                    let a = verify_star(&r.scaffold, &r.result, &o).unwrap();
                    let b = verify_star_exhaustive(&r.scaffold, &r.result, &o).unwrap();
                    let tag = format!("n={n} N={depth} skip={skip:?} k={with_k}");
                    assert_eq!((a.sound, a.complete, a.exact, a.classes), (b.sound, b.complete, b.exact, b.classes), "{tag}");
                }
            }
        }
    }
}

#[test]
fn random_instances_agree_with_brute_force() {
    for seed in 0..4 {
        let inst = Gen::new(seed).absorption_instance(4, 3).unwrap();
        let y = plant_y(&inst.host, &inst.template).unwrap();
        let s = plant_replicas(&inst.host, Some(y), &inst.template).unwrap();
        let r = build_absorption_diagram(&s).unwrap();
        let (report, _) = r.check(100_000).unwrap();
        assert!(report.is_ok(), "seed {seed}: {report}");
        assert!(r.fiber_law(&s));
        for n in 0..3 {
            for skip in [vec![], vec![1]] {
                let o = StarOptions { skip, ..StarOptions::new(n, 3) };
                let a = verify_star(&s, &r, &o).unwrap();
                let b = verify_star_exhaustive(&s, &r, &o).unwrap();
                assert!(a.sound && b.sound, "seed {seed}");
                assert_eq!((a.complete, a.classes), (b.complete, b.classes), "seed {seed} n={n}");
            }
        }
    }
}

#[test]
fn tree2_host_fails_condition_one_at_level_one() {
    let host = tree2(3);
    let t = Template::trivial(&tree2(3)).unwrap();
    let report = check_capacity_conditions(&host, &Subdiagram::full(&host), &t).unwrap();
    let first = report.errors().next().unwrap();
    assert_eq!(first.level, Some(1));
    assert_eq!(first.subject, "(1)");
}

#[test]
fn level_one_needs_only_room_for_the_spine() {
    let t = Template::trivial(&complete(1, 1, 1)).unwrap();
    let host = complete(3, 2, 1);
    let y = plant_y(&host, &t).unwrap();
    let report = check_capacity_conditions(&host, &y.subdiagram(1), &t).unwrap();
    assert!(report.is_ok(), "{report}");
    let tight = complete(1, 1, 1);
    let y = plant_y(&tight, &t).unwrap();
    assert!(!check_capacity_conditions(&tight, &y.subdiagram(1), &t).unwrap().is_ok());
}

#[test]
fn empty_y_with_trivial_template_rewrites_to_identity() {
    let t = Template::trivial(&complete(1, 1, 4)).unwrap();
    let host = layered(&[2, 3, 4, 5], &[2, 2, 4, 6]);
    let s = plant_replicas(&host, None, &t).unwrap();
    assert!(s.check().unwrap().is_ok());
    let r = build_absorption_diagram(&s).unwrap();
    assert!(r.diagram.same_shape(&host));
    assert!(r.fibers.iter().flatten().all(|f| f.len() == 1));
    let star = verify_star(&s, &r, &StarOptions::new(2, 4)).unwrap();
    assert!(star.holds() && star.exact);
    assert_eq!(star.classes, host.vertex_count(4));
    assert!(shift_map_alpha(&s, &r, 4, 1000).is_err());
}

#[test]
fn embedding_is_recovered_from_its_subdiagram() {
    let r = two_point_demo(&DemoOptions::new(4)).unwrap();
    let s = &r.scaffold;
    let y = embedding_from_subdiagram(&s.host, &s.y_sub, &s.template).unwrap();
    assert_eq!(Some(&y), s.y.as_ref());
}

#[test]
fn isomorphism_search() {
    assert!(find_isomorphism(&tree2(3), &tree2(3)).is_some());
    assert!(find_isomorphism(&tree2(3), &odo2(3)).is_none());
    assert!(find_isomorphism(&loop1(3), &odo2(3)).is_none());
    let (v, e) = find_isomorphism(&odo2(2), &odo2(2)).unwrap();
    assert_eq!(v, vec![vec![0], vec![0], vec![0]]);
    assert_eq!(e, vec![vec![0, 1], vec![0, 1]]);
}

#[test]
fn plant_rejects_a_host_without_room() {
    let t = Template::new(q2(3)).unwrap();
    assert!(plant_y(&odo2(3), &t).is_err());
    let host = complete(3, 2, 3);
    let y = plant_y(&host, &t).unwrap();
    assert!(plant_replicas(&host, Some(y), &t).is_err());
}
