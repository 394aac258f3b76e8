use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{
    build_absorption_diagram, capacity_request, check_capacity_conditions, min_margin, plant_replicas, plant_y,
    shift_map_alpha, verify_star, AbsorptionResult, AbsorptionScaffold, StarOptions, Template,
};
use crate::af::{transverse_diagrams, TransverseDiagrams};
use crate::diagram::BratteliDiagram;
use crate::error::{Error, Result};
use crate::fixtures::complete;
use crate::relations::FiniteEqRel;
use crate::transforms::{ensure_capacity, thinness_bound};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoOptions {
    /// Host depth `N`.
    pub depth: usize,
    /// Use `K = Δ_Y` instead of the full relation on `Y`.
    pub degenerate: bool,
    /// Cap for exhaustive path checks.
    pub cap: usize,
}

impl DemoOptions {
    pub fn new(depth: usize) -> Self {
        Self { depth, degenerate: false, cap: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "STAGE {} {verdict} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub stages: Vec<Stage>,
    /// `(n, N)` with `N - n` the least margin at which completeness holds.
    pub margin: Option<(usize, usize)>,
    pub transverse: TransverseDiagrams,
    pub scaffold: AbsorptionScaffold,
    pub result: AbsorptionResult,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.pass)
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.stages.iter().map(Stage::to_string).collect();
        match self.margin {
            Some((n, big_n)) => out.push(format!("MARGIN {n} {big_n}")),
            None => out.push("MARGIN none".into()),
        }
        out
    }
}

fn ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Host with enough room for `template` at `depth`: a complete three-wide
/// diagram, recoded by `ensure_capacity` from the shallowest base that works.
pub fn demo_host(template: &Template, depth: usize) -> Result<(BratteliDiagram, usize, usize)> {
    let req = capacity_request(template, depth)?;
    let mut last = None;
    for base in depth..=depth * 8 + 8 {
        match ensure_capacity(&complete(3, 1, base), &req) {
            Ok((host, map)) => return Ok((host, base, map.steps().len())),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Capacity("no base depth tried".into())))
}

/// The whole pipeline on `Y = {y1, y2}`: transverse diagrams for the all-Δ
/// chain and `K`, a host from `ensure_capacity`, the scaffold, the rewrite,
/// `α`, and both decompositions with a negative control.
pub fn two_point_demo(opts: &DemoOptions) -> Result<DemoReport> {
    let big_n = opts.depth;
    if big_n < 2 {
        return Err(Error::LevelOutOfRange { level: big_n, depth: 2 });
    }
    let names = vec!["y1".to_string(), "y2".to_string()];
    let chain = vec![FiniteEqRel::diagonal(names.clone()); big_n + 1];
    let k = if opts.degenerate { FiniteEqRel::diagonal(names) } else { FiniteEqRel::full(names) };
    let td = transverse_diagrams(&chain, &k)?;
    let mut stages = Vec::new();

    let template = Template::new(td.q.clone())?;
    let generated = td.check_s_is_af1(opts.cap)? && td.check_joint_generation(opts.cap)?;
    stages.push(Stage {
        name: "transverse",
        pass: generated,
        detail: format!(
            "W {} edges, W' {} edges at depth {}",
            template.w().total_edges(),
            template.w_prime().total_edges(),
            template.depth()
        ),
    });

    let (host, base, steps) = demo_host(&template, big_n)?;
    stages.push(Stage {
        name: "capacity",
        pass: capacity_request(&template, big_n)?.check(&host).is_ok(),
        detail: format!("base depth {base}, {steps} recoding steps, {} vertices", host.total_vertices()),
    });

    let y = plant_y(&host, &template)?;
    let conditions = check_capacity_conditions(&host, &y.subdiagram(big_n), &template)?;
    stages.push(Stage {
        name: "conditions",
        pass: conditions.is_ok(),
        detail: conditions.first_error().unwrap_or_else(|| "(1), (2) and half bounds hold".into()),
    });

    let scaffold = plant_replicas(&host, Some(y), &template)?;
    let planted = scaffold.check()?;
    stages.push(Stage {
        name: "plant",
        pass: planted.is_ok(),
        detail: format!("{} replicas along the spine", scaffold.replicas.len()),
    });

    let result = build_absorption_diagram(&scaffold)?;
    let (thin_full, _) = scaffold.thinness(big_n)?;
    let (thin_two, _) = scaffold.thinness(2)?;
    let early = 2.max(big_n.saturating_sub(2));
    let bar_full = thinness_bound(&result.diagram, &result.l_bar, big_n)?;
    let bar_early = thinness_bound(&result.diagram, &result.l_bar, early)?;
    let half = BigRational::one() / BigRational::from_integer(2.into());
    stages.push(Stage {
        name: "thin",
        pass: thin_full < half && thin_full <= thin_two && thin_full > BigRational::zero() && bar_full <= bar_early,
        detail: format!(
            "L' {} at depth {big_n} vs {} at 2; L-bar {} vs {} at {early}",
            ratio(&thin_full),
            ratio(&thin_two),
            ratio(&bar_full),
            ratio(&bar_early)
        ),
    });

    let (report, exhaustive) = result.check(opts.cap)?;
    let identity = result.diagram.same_shape(&host) && result.fibers.iter().flatten().all(|f| f.len() == 1);
    let degenerate_ok = result.fiber_law(&scaffold) && (!opts.degenerate || identity);
    stages.push(Stage {
        name: "rewrite",
        pass: report.is_ok() && degenerate_ok,
        detail: report
            .first_error()
            .unwrap_or_else(|| format!("lift exhaustive through depth {exhaustive}, counted beyond")),
    });

    let alpha = shift_map_alpha(&scaffold, &result, big_n, opts.cap)?;
    let ac = alpha.check(&scaffold, &result, opts.cap)?;
    stages.push(Stage {
        name: "alpha",
        pass: ac.all_ok(),
        detail: ac.to_string(),
    });

    let star = verify_star(&scaffold, &result, &StarOptions::new(big_n - 1, big_n))?;
    let has_fibres = result.fibers.iter().flatten().any(|f| f.len() > 1);
    let control = verify_star(&scaffold, &result, &StarOptions { skip: vec![1], ..StarOptions::new(big_n - 1, big_n) })?;
    let control_ok = !has_fibres || !control.complete || big_n < 3;
    stages.push(Stage {
        name: "star",
        pass: star.holds() && star.exact && control_ok,
        detail: format!(
            "{} classes, {} states; without K_1 complete={}",
            star.classes, star.states, control.complete
        ),
    });

    let star_k = verify_star(&scaffold, &result, &StarOptions { with_k: true, ..StarOptions::new(big_n - 1, big_n) })?;
    stages.push(Stage {
        name: "star-k",
        pass: star_k.holds() && star_k.exact,
        detail: format!("{} classes", star_k.classes),
    });

    let margin = min_margin(&scaffold, &result, big_n, &[])?.map(|m| (big_n - m, big_n));
    Ok(DemoReport { stages, margin, transverse: td, scaffold, result })
}
