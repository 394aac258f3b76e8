use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Result};
use bratteli_core::absorption::{
    build_absorption_diagram, check_capacity_conditions, find_isomorphism, min_margin, plant_replicas, plant_y,
    shift_map_alpha, two_point_demo, verify_star, verify_star_exhaustive, AbsorptionResult, AbsorptionScaffold,
    DemoOptions, StarOptions, StarReport,
};
use bratteli_core::io::{
    emit_chain, emit_diagram, emit_dot, emit_quotient, emit_relation, emit_subdiagram, parse_quotient, parse_subdiagram,
};
use bratteli_core::transforms::DEFAULT_STEP_BUDGET;
use bratteli_core::{
    check_compiled, class_size_check, diagram_from_filtration, ensure_capacity, find_transversal, join, microscope,
    relation_from_group_action, simplicity_window, telescope, thinness_bound, transverse_diagrams,
    transverse_filtration, BratteliDiagram, CapacityRequest, Error,
};
use num_bigint::BigUint;
use num_rational::BigRational;

use crate::input::{load_absorption, load_chain, load_diagram, load_relation, load_relations, parse_ratio, read, write};
use crate::{AbsorbArgs, Cli, Command, DemoKind, Outcome, Report};

fn ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn summary(d: &BratteliDiagram) -> String {
    format!("depth {}, {} vertices, {} edges", d.depth(), d.total_vertices(), d.total_edges())
}

fn emit_to(path: &Option<std::path::PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => Ok(()),
    }
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    let mut r = Report::default();
    let mut stdout = None;
    let (seed, cap, out) = (cli.seed, cli.cap, &cli.out);
    match &cli.command {
        Command::Validate { diagram, sub, quotient, target } => {
            let d = load_diagram(diagram, seed)?;
            let v = d.validate();
            r.stage("diagram", v.is_ok(), v.first_error().unwrap_or_else(|| summary(&d)));
            if let Some(path) = sub {
                let s = parse_subdiagram(&read(path)?, &d)?;
                let v = s.validate(&d)?;
                let edges: usize = (1..=s.depth()).map(|n| s.edges(n).len()).sum();
                r.stage("subdiagram", v.is_ok(), v.first_error().unwrap_or_else(|| format!("{edges} edges")));
            }
            if let Some(path) = quotient {
                let Some(target) = target else { bail!("--quotient needs --target") };
                let t = load_diagram(target, seed)?;
                let q = parse_quotient(&read(path)?, &d, &t)?;
                let v = q.validate();
                r.stage("quotient", v.is_ok(), v.first_error().unwrap_or_else(|| format!("{:?}", q.strictness)));
                if v.is_ok() && d.count_paths(d.depth())?.total() <= BigUint::from(cap) {
                    match q.lift_paths(d.depth(), cap) {
                        Ok(b) => r.stage("lift", true, format!("{} paths at depth {}", b.len(), d.depth())),
                        Err(e) => r.stage("lift", false, e.to_string()),
                    }
                }
            }
        }
        Command::Paths { diagram, level } => {
            let d = load_diagram(diagram, seed)?;
            let n = level.unwrap_or(d.depth());
            let counts = d.count_paths(n)?;
            let per: Vec<String> = counts.counts.iter().enumerate().map(|(v, c)| format!("{}={c}", d.vertex_id(n, v))).collect();
            r.stage("paths", true, format!("level {n} total {}: {}", counts.total(), per.join(" ")));
            if counts.total() <= BigUint::from(cap) {
                let mut grouped = vec![BigUint::from(0u32); d.vertex_count(n)];
                for p in d.enumerate_paths(n, cap)? {
                    grouped[d.terminal(&p)] += 1u32;
                }
                r.stage("enumerate", grouped == counts.counts, "enumeration grouped by terminal vertex");
            }
        }
        Command::Telescope { diagram, cuts } => {
            let d = load_diagram(diagram, seed)?;
            let (t, _) = telescope(&d, cuts)?;
            let mut ok = true;
            for k in 1..cuts.len() {
                ok &= t.incidence_matrix(k)? == d.interval_product(cuts[k - 1], cuts[k])?;
            }
            r.stage("telescope", t.validate().is_ok(), summary(&t));
            r.stage("products", ok, "incidence matrices equal interval products");
            emit_to(out, &emit_diagram(&t))?;
        }
        Command::Microscope { diagram, level } => {
            let d = load_diagram(diagram, seed)?;
            let (m, _) = microscope(&d, *level)?;
            let cuts: Vec<usize> = (0..=m.depth()).filter(|n| n != level).collect();
            let (back, _) = telescope(&m, &cuts)?;
            r.stage("microscope", m.validate().is_ok(), summary(&m));
            r.stage("round-trip", find_isomorphism(&back, &d).is_some(), "telescoping the new level restores the input");
            emit_to(out, &emit_diagram(&m))?;
        }
        Command::Capacity { diagram, cap_a, cap_b, step_budget } => {
            let d = load_diagram(diagram, seed)?;
            let req = CapacityRequest::new(cap_a.clone(), cap_b.clone())?
                .with_budget(step_budget.unwrap_or(DEFAULT_STEP_BUDGET));
            match ensure_capacity(&d, &req) {
                Ok((c, map)) => {
                    let steps: Vec<String> = map.steps().iter().map(|s| s.describe()).collect();
                    r.stage("capacity", true, format!("{} steps: {}", steps.len(), steps.join("; ")));
                    let v = req.check(&c);
                    r.stage("recheck", v.is_ok(), v.first_error().unwrap_or_else(|| summary(&c)));
                    emit_to(out, &emit_diagram(&c))?;
                }
                Err(e) => r.stage("capacity", false, e.to_string()),
            }
        }
        Command::Simple { diagram } => {
            let d = load_diagram(diagram, seed)?;
            let w = simplicity_window(&d);
            let detail = if w.is_simple() {
                let ws: Vec<String> = w.windows.iter().enumerate().map(|(n, m)| format!("{n}->{}", m.unwrap_or(0))).collect();
                format!("windows {}", ws.join(" "))
            } else {
                format!("no window from levels {:?}", w.missing())
            };
            r.stage("simple", w.is_simple(), detail);
        }
        Command::Thin { diagram, sub, depth, eps } => {
            let d = load_diagram(diagram, seed)?;
            let s = parse_subdiagram(&read(sub)?, &d)?;
            let n = depth.unwrap_or(d.depth());
            let eps = parse_ratio(eps)?;
            let bound = thinness_bound(&d, &s, n)?;
            r.stage("thin", bound <= eps, format!("bound {} at level {n}, eps {}", ratio(&bound), ratio(&eps)));
        }
        Command::RelJoin { r: rp, s: sp } => {
            let j = join(&load_relation(rp)?, &load_relation(sp)?)?;
            r.stage("join", true, format!("{} classes on {} points", j.classes().len(), j.len()));
            emit_to(out, &emit_relation(&j))?;
        }
        Command::RelTransversal { r: rp, s: sp } => {
            let (rr, ss) = (load_relation(rp)?, load_relation(sp)?);
            match find_transversal(&rr, &ss)? {
                Ok(w) => {
                    let joined = join(&rr, &ss)?.pair_count();
                    r.stage("transversal", w.len() == joined, format!("|R x_X S| = {} = |R v S| = {joined}", w.len()));
                    let v = w.verify();
                    r.stage("witness", v.is_ok(), v.first_error().unwrap_or_else(|| "h bijective, transport closed".into()));
                    let v = class_size_check(&w);
                    r.stage("class-size", v.is_ok(), v.first_error().unwrap_or_else(|| "#[x]_S = #[y]_S and m*n law".into()));
                }
                Err(f) => r.stage("transversal", false, f.to_string()),
            }
        }
        Command::RelFiltration { chain, s } => {
            let (chain, s) = (load_chain(chain)?, load_relation(s)?);
            let top = chain.last().expect("non-empty");
            match find_transversal(top, &s)? {
                Ok(w) => {
                    let shrunk = transverse_filtration(&chain, &w)?;
                    let sizes: Vec<String> =
                        chain.iter().zip(&shrunk).map(|(a, b)| format!("{}->{}", a.pair_count(), b.pair_count())).collect();
                    r.stage("filtration", true, format!("pairs per level {}", sizes.join(" ")));
                    emit_to(out, &emit_chain(&shrunk))?;
                }
                Err(f) => r.stage("filtration", false, format!("top level not transverse: {f}")),
            }
        }
        Command::RelFromAction { generators } => {
            let f = load_relations(generators)?;
            match relation_from_group_action(f.names.clone(), &f.generators) {
                Ok(rel) => {
                    r.stage("action", true, format!("{} generators, {} orbits", f.generators.len(), rel.classes().len()));
                    emit_to(out, &emit_relation(&rel))?;
                }
                Err(e) => r.stage("action", false, e.to_string()),
            }
        }
        Command::BuildDiagram { chain } => {
            let chain = load_chain(chain)?;
            let c = diagram_from_filtration(&chain)?;
            r.stage("compile", c.diagram.validate().is_ok(), summary(&c.diagram));
            let v = check_compiled(&chain, &c, cap)?;
            r.stage("round-trip", v.is_ok(), v.first_error().unwrap_or_else(|| "F carries R_n onto AF_n; heights add up".into()));
            emit_to(out, &emit_diagram(&c.diagram))?;
        }
        Command::TransverseBuild { chain, s, out_prime, out_quotient } => {
            let (chain, s) = (load_chain(chain)?, load_relation(s)?);
            transverse_build(&mut r, &chain, &s, cap, out, out_prime, out_quotient)?;
        }
        Command::Plant(a) => {
            if let Some(sc) = plant(&mut r, a, seed)? {
                emit_to(out, &emit_subdiagram(&sc.l_prime, &sc.host))?;
            }
        }
        Command::Absorb { args, out_quotient } => {
            if let Some((_, res)) = absorb(&mut r, args, seed, cap)? {
                emit_to(out, &emit_diagram(&res.diagram))?;
                emit_to(out_quotient, &emit_quotient(&res.quotient))?;
            }
        }
        Command::Alpha(a) => {
            if let Some((sc, res)) = absorb(&mut r, a, seed, cap)? {
                match shift_map_alpha(&sc, &res, sc.depth(), cap) {
                    Ok(map) => {
                        let c = map.check(&sc, &res, cap)?;
                        r.stage("alpha", c.all_ok(), c.to_string());
                    }
                    Err(e) => r.stage("alpha", false, e.to_string()),
                }
            }
        }
        Command::VerifyStar { args, level, skip, with_k, exhaustive } => {
            if let Some((sc, res)) = absorb(&mut r, args, seed, cap)? {
                let depth = sc.depth();
                let n = level.unwrap_or(depth - 1);
                let o = StarOptions { n, depth, skip: skip.clone(), with_k: *with_k, cap };
                let star = verify_star(&sc, &res, &o)?;
                star_stages(&mut r, &star);
                if *exhaustive {
                    let b = verify_star_exhaustive(&sc, &res, &o)?;
                    let agree = (b.sound, b.complete, b.exact, b.classes) == (star.sound, star.complete, star.exact, star.classes);
                    r.stage("star-exhaustive", agree, format!("sound={} complete={} classes={}", b.sound, b.complete, b.classes));
                }
                let m = min_margin(&sc, &res, depth, skip)?;
                r.margin(m.map(|m| (depth - m, depth)));
            }
        }
        Command::Demo { kind: DemoKind::TwoPoint, depth, degenerate } => {
            let rep = two_point_demo(&DemoOptions { depth: *depth, degenerate: *degenerate, cap })?;
            for s in &rep.stages {
                r.stage(s.name, s.pass, s.detail.clone());
            }
            r.margin(rep.margin);
            emit_to(out, &emit_diagram(&rep.result.diagram))?;
        }
        Command::Dot { diagram, sub } => {
            let d = load_diagram(diagram, seed)?;
            let s = sub.as_deref().map(|p: &Path| read(p).and_then(|t| Ok(parse_subdiagram(&t, &d)?))).transpose()?;
            let text = emit_dot(&d, s.as_ref());
            match out {
                Some(p) => {
                    write(p, &text)?;
                    r.stage("dot", true, format!("{} nodes, {} edges", d.total_vertices(), d.total_edges()));
                }
                None => stdout = Some(text),
            }
        }
    }
    Ok(Outcome { report: r, stdout })
}

fn transverse_build(
    r: &mut Report,
    chain: &[bratteli_core::FiniteEqRel],
    s: &bratteli_core::FiniteEqRel,
    cap: usize,
    out: &Option<std::path::PathBuf>,
    out_prime: &Option<std::path::PathBuf>,
    out_quotient: &Option<std::path::PathBuf>,
) -> Result<()> {
    let td = match transverse_diagrams(chain, s) {
        Ok(td) => td,
        Err(e @ (Error::NotTransverse(_) | Error::Inconsistent(_))) => {
            r.stage("transverse", false, e.to_string());
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let shift = if td.shifted { "leading diagonal inserted" } else { "chain used as given" };
    r.stage("transverse", true, format!("d {}; d' {}; {shift}", summary(&td.d.diagram), summary(&td.d_prime.diagram)));
    let v = td.q.validate();
    r.stage("quotient", v.is_ok(), v.first_error().unwrap_or_else(|| "conditions (i), (ii), (iii) hold".into()));
    let d = &td.d.diagram;
    let ranges: BTreeSet<usize> = d.edges(1).iter().map(|e| e.range).collect();
    r.stage("t-injective", ranges.len() == d.edges(1).len(), format!("{} edges at level 1", d.edges(1).len()));
    r.stage("af1", td.check_s_is_af1(cap)?, "S equals AF_1 of d' through the coding");
    r.stage("joint", td.check_joint_generation(cap)?, "AF_1(d') and the lifted AF(d) generate AF(d')");
    emit_to(out, &emit_diagram(d))?;
    emit_to(out_prime, &emit_diagram(&td.d_prime.diagram))?;
    emit_to(out_quotient, &emit_quotient(&td.q))?;
    Ok(())
}

/// Plants `Y` and the replicas; failures become FAIL stages.
fn plant(r: &mut Report, a: &AbsorbArgs, seed: u64) -> Result<Option<AbsorptionScaffold>> {
    let (host, template) = load_absorption(a, seed)?;
    let depth = host.depth();
    let y = match plant_y(&host, &template) {
        Ok(y) => y,
        Err(e) => {
            r.stage("conditions", false, format!("no room for the template: {e}"));
            return Ok(None);
        }
    };
    let cond = check_capacity_conditions(&host, &y.subdiagram(depth), &template)?;
    r.stage("conditions", cond.is_ok(), cond.first_error().unwrap_or_else(|| "(1), (2) and half bounds hold".into()));
    let sc = match plant_replicas(&host, Some(y), &template) {
        Ok(sc) => sc,
        Err(e) => {
            r.stage("plant", false, e.to_string());
            return Ok(None);
        }
    };
    let v = sc.check()?;
    r.stage("plant", v.is_ok(), v.first_error().unwrap_or_else(|| format!("{} replicas along the spine", sc.replicas.len())));
    let (lp, l) = sc.thinness(depth)?;
    let one = BigRational::from_integer(1.into());
    r.stage("thin", lp < one && l < one, format!("L' {} and L {} at level {depth}", ratio(&lp), ratio(&l)));
    Ok(v.is_ok().then_some(sc))
}

fn absorb(r: &mut Report, a: &AbsorbArgs, seed: u64, cap: usize) -> Result<Option<(AbsorptionScaffold, AbsorptionResult)>> {
    let Some(sc) = plant(r, a, seed)? else { return Ok(None) };
    let res = match build_absorption_diagram(&sc) {
        Ok(res) => res,
        Err(e) => {
            r.stage("rewrite", false, e.to_string());
            return Ok(None);
        }
    };
    let (v, exhaustive) = res.check(cap)?;
    r.stage(
        "rewrite",
        v.is_ok(),
        v.first_error().unwrap_or_else(|| format!("{}; lift exhaustive through depth {exhaustive}", summary(&res.diagram))),
    );
    r.stage("fibers", res.fiber_law(&sc), "fibre sizes follow the template");
    Ok(v.is_ok().then_some((sc, res)))
}

fn star_stages(r: &mut Report, s: &StarReport) {
    let witness = |kind: &str| {
        s.witnesses.iter().find(|w| w.kind == kind).map(|w| {
            format!("; witness {} ~ {} ending {} / {}", w.left, w.right, w.left_terminal, w.right_terminal)
        })
    };
    r.stage(
        "star-sound",
        s.sound,
        format!("{} classes, {} generators{}", s.classes, s.generators, witness("sound").unwrap_or_default()),
    );
    r.stage(
        "star-complete",
        s.complete,
        format!("n={} N={}, {} states{}", s.n, s.depth, s.states, witness("complete").unwrap_or_default()),
    );
    r.stage("star-exact", s.exact, "closure equals the target partition at depth N");
}
