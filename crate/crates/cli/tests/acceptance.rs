//! Acceptance suite: one PASS/FAIL line per criterion, exact comparisons,
//! pinned wall-clock limits. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use bratteli_cli::{run, Cli};
use bratteli_core::absorption::{
    build_absorption_diagram, capacity_request, demo_host, find_isomorphism, plant_replicas, plant_y, verify_star,
    StarOptions, Template,
};
use bratteli_core::fixtures::{complete, loop1, odo2, tree2};
use bratteli_core::gen::Gen;
use bratteli_core::io::ReportLine;
use bratteli_core::{
    check_compiled, class_size_check, diagram_from_filtration, ensure_capacity, find_transversal, join, microscope,
    telescope, thinness_bound, transverse_diagrams, BratteliDiagram, CapacityRequest, FiniteEqRel, Strictness,
    Subdiagram,
};
use clap::Parser;
use num_rational::BigRational;

const CAP: usize = 200_000;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c1_golden_pipeline() -> Outcome {
    let cli = Cli::try_parse_from(["bratteli", "demo", "two-point", "--depth", "6"]).map_err(err)?;
    let out = run(&cli).map_err(err)?;
    let failed: Vec<String> = out.report.lines.iter().filter(|l| matches!(l, ReportLine::Stage { pass: false, .. })).map(ToString::to_string).collect();
    ensure(failed.is_empty(), || format!("failed stages: {failed:?}"))?;
    let stages = out.report.lines.iter().filter(|l| matches!(l, ReportLine::Stage { .. })).count();
    let margin = out.report.lines.iter().find_map(|l| match l {
        ReportLine::Margin(m) => Some(*m),
        _ => None,
    });
    ensure(margin == Some(Some((5, 6))), || format!("margin {margin:?}, pinned (5, 6)"))?;
    let rep = bratteli_core::two_point_demo(&bratteli_core::absorption::DemoOptions::new(6)).map_err(err)?;
    let star = verify_star(&rep.scaffold, &rep.result, &StarOptions::new(4, 6)).map_err(err)?;
    ensure(star.holds() && star.exact, || format!("star at n=4 N=6: {star:?}"))?;
    Ok(format!("{stages} stages pass, star holds at n=4 N=6, margin pinned at 5/6"))
}

fn quotient_laws(chain: &[FiniteEqRel], s: &FiniteEqRel) -> Result<(), String> {
    let td = transverse_diagrams(chain, s).map_err(err)?;
    ensure(td.q.strictness == Strictness::Full, || "quotient not checked at full strictness".into())?;
    let v = td.q.validate();
    ensure(v.is_ok(), || format!("quotient: {}", v.first_error().unwrap_or_default()))?;
    let d = &td.d.diagram;
    let ranges: BTreeSet<usize> = d.edges(1).iter().map(|e| e.range).collect();
    ensure(ranges.len() == d.edges(1).len(), || "t not injective on E_1".into())?;
    ensure(td.check_s_is_af1(CAP).map_err(err)?, || "S differs from AF_1".into())?;
    ensure(td.check_joint_generation(CAP).map_err(err)?, || "joint generation fails".into())
}

fn c2_transverse_suite() -> Outcome {
    let names = vec!["y1".to_string(), "y2".to_string()];
    let chain = vec![FiniteEqRel::diagonal(names.clone()); 4];
    quotient_laws(&chain, &FiniteEqRel::full(names)).map_err(|e| format!("two-point instance: {e}"))?;
    let cases = 24;
    for seed in 0..cases {
        let (chain, s) = Gen::new(seed).transverse_chain(8, 3);
        quotient_laws(&chain, &s).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("two-point instance + {cases} seeded instances (<=8 points, chain length <=3)"))
}

fn c3_transversality() -> Outcome {
    let mut negatives = 0;
    for seed in 0..100u64 {
        let (r, s) = Gen::new(seed).transverse_pair(16);
        let w = find_transversal(&r, &s).map_err(err)?.map_err(|f| format!("seed {seed}: {f}"))?;
        let joined = join(&r, &s).map_err(err)?;
        ensure(w.len() == joined.pair_count(), || format!("seed {seed}: |R x S| {} vs |R v S| {}", w.len(), joined.pair_count()))?;
        let v = w.verify();
        ensure(v.is_ok(), || format!("seed {seed}: {}", v.first_error().unwrap_or_default()))?;
        let v = class_size_check(&w);
        ensure(v.is_ok(), || format!("seed {seed}: {}", v.first_error().unwrap_or_default()))?;
        if seed % 10 == 0 {
            let (r, s) = Gen::new(seed + 1000).non_transverse_pair(16);
            match find_transversal(&r, &s).map_err(err)? {
                Err(f) if !f.points.is_empty() => negatives += 1,
                Err(_) => return Err(format!("negative {seed}: failure without a witness")),
                Ok(_) => return Err(format!("negative {seed}: accepted")),
            }
        }
    }
    Ok(format!("100 pairs transverse with all laws; {negatives}/10 negatives rejected with witnesses"))
}

fn transform_identities(d: &BratteliDiagram, tag: &str) -> Result<(), String> {
    let depth = d.depth();
    let cuts: Vec<usize> = (0..=depth).filter(|n| n % 2 == 0 || *n == depth).collect();
    let (t, _) = telescope(d, &cuts).map_err(err)?;
    for k in 1..cuts.len() {
        let prod = d.interval_product(cuts[k - 1], cuts[k]).map_err(err)?;
        ensure(t.incidence_matrix(k).map_err(err)? == prod, || format!("{tag}: telescope level {k} differs from product"))?;
    }
    for level in 1..=depth {
        let (m, _) = microscope(d, level).map_err(err)?;
        let back: Vec<usize> = (0..=m.depth()).filter(|n| *n != level).collect();
        let (t, _) = telescope(&m, &back).map_err(err)?;
        ensure(find_isomorphism(&t, d).is_some(), || format!("{tag}: microscope {level} round trip not isomorphic"))?;
    }
    Ok(())
}

fn c4_transforms() -> Outcome {
    for (d, tag) in [(odo2(5), "odo2"), (tree2(4), "tree2"), (loop1(4), "loop1"), (complete(3, 2, 4), "complete")] {
        transform_identities(&d, tag)?;
    }
    for seed in 0..10u64 {
        let mut g = Gen::new(seed);
        let d = g.simple_host(16, 3, 2);
        transform_identities(&g.simple_host(4, 3, 2), &format!("seed {seed}"))?;
        let a = vec![2 + seed as usize % 3, 3, 2];
        let b = vec![1 + seed as usize % 2, 2, 3];
        let req = CapacityRequest::new(a, b).map_err(err)?;
        let (out, _) = ensure_capacity(&d, &req).map_err(|e| format!("seed {seed}: {e}"))?;
        let v = req.check(&out);
        ensure(v.is_ok(), || format!("seed {seed}: {}", v.first_error().unwrap_or_default()))?;
    }
    Ok("products, microscope round trips, ensure_capacity on 10 seeded simple hosts".into())
}

fn c5_thinness() -> Outcome {
    let host = odo2(10);
    let half = Subdiagram::from_ids(&host, (1..=10).map(|n| (n, "a"))).map_err(err)?;
    let bound = thinness_bound(&host, &half, 10).map_err(err)?;
    let expected = BigRational::new(1.into(), 1024.into());
    ensure(bound == expected, || format!("odo2 half bound {bound}, expected 1/1024"))?;
    let names = vec!["y1".to_string(), "y2".to_string()];
    let td = transverse_diagrams(&vec![FiniteEqRel::diagonal(names.clone()); 7], &FiniteEqRel::full(names)).map_err(err)?;
    let template = Template::new(td.q).map_err(err)?;
    let (host, _, _) = demo_host(&template, 6).map_err(err)?;
    let y = plant_y(&host, &template).map_err(err)?;
    let sc = plant_replicas(&host, Some(y), &template).map_err(err)?;
    let (full, _) = sc.thinness(6).map_err(err)?;
    let (two, _) = sc.thinness(2).map_err(err)?;
    let half = BigRational::new(1.into(), 2.into());
    ensure(full < half && full <= two, || format!("L' bound {full} at 6 vs {two} at 2"))?;
    Ok(format!("odo2 half = 1/1024; demo L' {full} < 1/2 and <= {two}"))
}

fn c6_chain_round_trip() -> Outcome {
    for seed in 0..20u64 {
        let points = 1 + (seed as usize * 7) % 12;
        let len = 2 + seed as usize % 3;
        let chain = Gen::new(seed).chain(points, len);
        let c = diagram_from_filtration(&chain).map_err(|e| format!("seed {seed}: {e}"))?;
        let v = check_compiled(&chain, &c, CAP).map_err(err)?;
        ensure(v.is_ok(), || format!("seed {seed}: {}", v.first_error().unwrap_or_default()))?;
    }
    Ok("20 chains (<=12 points, length <=4): classes reproduced, height recursion holds".into())
}

fn c7_star_soundness() -> Outcome {
    let mut checks = 0;
    for seed in 0..12u64 {
        let depth = 3 + seed as usize % 2;
        let inst = Gen::new(seed).absorption_instance(4, depth).map_err(err)?;
        let req = capacity_request(&inst.template, depth).map_err(err)?;
        ensure(req.check(&inst.host).is_ok(), || format!("seed {seed}: host misses its capacity request"))?;
        let y = plant_y(&inst.host, &inst.template).map_err(err)?;
        let sc = plant_replicas(&inst.host, Some(y), &inst.template).map_err(|e| format!("seed {seed}: {e}"))?;
        let r = build_absorption_diagram(&sc).map_err(|e| format!("seed {seed}: {e}"))?;
        for n in 0..depth {
            for skip in [vec![], vec![1], vec![2]] {
                for with_k in [false, true] {
                    let o = StarOptions { skip: skip.clone(), with_k, cap: CAP, ..StarOptions::new(n, depth) };
                    let s = verify_star(&sc, &r, &o).map_err(err)?;
                    ensure(s.sound, || format!("seed {seed} n={n} skip={skip:?}: {:?}", s.witnesses))?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("12 seeded builds, {checks} closures, none relates distinct terminals"))
}

fn main() {
    let criteria: [(u8, &str, Duration, fn() -> Outcome); 7] = [
        (1, "two-point golden pipeline", Duration::from_secs(5), c1_golden_pipeline),
        (2, "transverse diagram laws", Duration::from_secs(10), c2_transverse_suite),
        (3, "transversality oracles", Duration::from_secs(5), c3_transversality),
        (4, "transform identities", Duration::from_secs(5), c4_transforms),
        (5, "thinness certificates", Duration::from_secs(1), c5_thinness),
        (6, "chain round trip", Duration::from_secs(5), c6_chain_round_trip),
        (7, "star soundness", Duration::from_secs(30), c7_star_soundness),
    ];
    let mut failed = 0;
    for (k, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {} s limit", limit.as_secs())),
            Err(e) => (false, e),
        };
        failed += usize::from(!pass);
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("ACCEPT {k} {verdict} {name}: {detail} [{} ms, limit {} s, exact]", took.as_millis(), limit.as_secs());
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
