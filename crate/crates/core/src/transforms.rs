//! Rewriting diagrams without changing their path spaces: telescoping,
//! microscoping (edge splitting), truncation, plus the capacity enforcer
//! and the simplicity and thinness certificates built on them.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::diagram::{BratteliDiagram, FinitePath, Subdiagram};
use crate::error::{Error, Result};
use crate::report::ValidationReport;

pub const DEFAULT_STEP_BUDGET: usize = 16;

/// One rewriting step together with the data needed to recode paths.
#[derive(Debug, Clone)]
pub enum RecodingStep {
    Telescope {
        cuts: Vec<usize>,
        /// `segments[k - 1][e]`: the input edges making up output edge `e` of level `k`.
        segments: Vec<Vec<Vec<usize>>>,
        lookup: Vec<HashMap<Vec<usize>, usize>>,
    },
    /// New level inserted in front of `level`; edge indices are preserved.
    Microscope { level: usize },
    Truncate { depth: usize },
}

impl RecodingStep {
    fn forward(&self, path: &FinitePath) -> Option<FinitePath> {
        match self {
            RecodingStep::Telescope { cuts, lookup, .. } => {
                let k = cuts.iter().position(|&c| c == path.len())?;
                let edges = (1..=k)
                    .map(|j| lookup[j - 1].get(&path.0[cuts[j - 1]..cuts[j]]).copied())
                    .collect::<Option<Vec<_>>>()?;
                Some(FinitePath(edges))
            }
            RecodingStep::Microscope { level } => {
                let mut edges = path.0.clone();
                if path.len() >= *level {
                    edges.insert(*level, path.0[*level - 1]);
                }
                Some(FinitePath(edges))
            }
            RecodingStep::Truncate { depth } => (path.len() <= *depth).then(|| path.clone()),
        }
    }

    fn inverse(&self, path: &FinitePath) -> Option<FinitePath> {
        match self {
            RecodingStep::Telescope { segments, .. } => {
                let mut edges = Vec::new();
                for (k, &e) in path.0.iter().enumerate() {
                    edges.extend_from_slice(segments.get(k)?.get(e)?);
                }
                Some(FinitePath(edges))
            }
            RecodingStep::Microscope { level } => {
                let mut edges = path.0.clone();
                if path.len() > *level {
                    if edges[*level] != edges[*level - 1] {
                        return None;
                    }
                    edges.remove(*level);
                }
                Some(FinitePath(edges))
            }
            RecodingStep::Truncate { depth } => (path.len() <= *depth).then(|| path.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RecodingStep::Telescope { cuts, .. } => {
                let cuts: Vec<String> = cuts.iter().map(ToString::to_string).collect();
                format!("telescope {}", cuts.join(","))
            }
            RecodingStep::Microscope { level } => format!("microscope {level}"),
            RecodingStep::Truncate { depth } => format!("truncate {depth}"),
        }
    }
}

/// Composite path recoding between an input diagram and a rewritten one.
#[derive(Debug, Clone, Default)]
pub struct RecodingMap {
    steps: Vec<RecodingStep>,
}

impl RecodingMap {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[RecodingStep] {
        &self.steps
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: RecodingMap) -> Self {
        self.steps.extend(next.steps);
        self
    }

    /// Image of an input path; `None` when its length is not a comparison depth.
    pub fn forward(&self, path: &FinitePath) -> Option<FinitePath> {
        self.steps.iter().try_fold(path.clone(), |p, s| s.forward(&p))
    }

    pub fn inverse(&self, path: &FinitePath) -> Option<FinitePath> {
        self.steps.iter().rev().try_fold(path.clone(), |p, s| s.inverse(&p))
    }
}

/// Keeps only the levels in `cuts`; edges become the paths between cuts.
pub fn telescope(d: &BratteliDiagram, cuts: &[usize]) -> Result<(BratteliDiagram, RecodingMap)> {
    check_cuts(d, cuts)?;
    let out_adj = d.out_adjacency();
    let mut out = BratteliDiagram::with_root(d.vertex_id(0, 0));
    let mut segments = Vec::with_capacity(cuts.len() - 1);
    let mut lookup = Vec::with_capacity(cuts.len() - 1);
    for k in 1..cuts.len() {
        let (from, to) = (cuts[k - 1], cuts[k]);
        for id in d.vertices(to) {
            out.add_vertex(k, id.clone())?;
        }
        let mut segs = Vec::new();
        if to == from + 1 {
            segs.extend((0..d.edges(to).len()).map(|e| vec![e]));
        } else {
            for v in 0..d.vertex_count(from) {
                segs.extend(d.segments_with(&out_adj, from, v, to));
            }
        }
        let mut map = HashMap::with_capacity(segs.len());
        for (idx, seg) in segs.iter().enumerate() {
            let ids: Vec<&str> = seg.iter().enumerate().map(|(j, &e)| d.edge(from + j + 1, e).id.as_str()).collect();
            let source = d.edge(from + 1, seg[0]).source;
            let range = d.edge(to, *seg.last().expect("non-empty segment")).range;
            out.add_edge_by_index(k, ids.join("."), source, range)?;
            map.insert(seg.clone(), idx);
        }
        segments.push(segs);
        lookup.push(map);
    }
    let step = RecodingStep::Telescope { cuts: cuts.to_vec(), segments, lookup };
    Ok((out, RecodingMap { steps: vec![step] }))
}

fn check_cuts(d: &BratteliDiagram, cuts: &[usize]) -> Result<()> {
    if cuts.first() != Some(&0) {
        return Err(Error::InvalidCuts("cuts must start at 0".into()));
    }
    if cuts.last() != Some(&d.depth()) {
        return Err(Error::InvalidCuts(format!("cuts must end at the depth {}", d.depth())));
    }
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidCuts("cuts must be strictly increasing".into()));
    }
    Ok(())
}

/// Splits every edge of `E_level` through a new vertex named after the edge.
pub fn microscope(d: &BratteliDiagram, level: usize) -> Result<(BratteliDiagram, RecodingMap)> {
    if level == 0 || level > d.depth() {
        return Err(Error::LevelOutOfRange { level, depth: d.depth() });
    }
    let mut out = BratteliDiagram::with_root(d.vertex_id(0, 0));
    let shift = |n: usize| if n >= level { n + 1 } else { n };
    for n in 1..=d.depth() {
        if n == level {
            for e in d.edges(n) {
                out.add_vertex(n, e.id.clone())?;
            }
        }
        for id in d.vertices(n) {
            out.add_vertex(shift(n), id.clone())?;
        }
    }
    for n in 1..=d.depth() {
        for (k, e) in d.edges(n).iter().enumerate() {
            if n == level {
                out.add_edge_by_index(n, e.id.clone(), e.source, k)?;
                out.add_edge_by_index(n + 1, e.id.clone(), k, e.range)?;
            } else {
                out.add_edge_by_index(shift(n), e.id.clone(), e.source, e.range)?;
            }
        }
    }
    Ok((out, RecodingMap { steps: vec![RecodingStep::Microscope { level }] }))
}

pub fn truncate(d: &BratteliDiagram, depth: usize) -> Result<(BratteliDiagram, RecodingMap)> {
    let out = d.truncate(depth)?;
    Ok((out, RecodingMap { steps: vec![RecodingStep::Truncate { depth }] }))
}

/// Least `m > n` with a strictly positive incidence product from `n` to `m`,
/// for every `n < depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicityWindows {
    pub windows: Vec<Option<usize>>,
}

impl SimplicityWindows {
    pub fn is_simple(&self) -> bool {
        self.windows.iter().all(Option::is_some)
    }

    pub fn missing(&self) -> Vec<usize> {
        self.windows.iter().enumerate().filter(|(_, w)| w.is_none()).map(|(n, _)| n).collect()
    }
}

pub fn simplicity_window(d: &BratteliDiagram) -> SimplicityWindows {
    let depth = d.depth();
    let windows = (0..depth)
        .map(|n| {
            // reach[v][w]: some path from v in V_n to w in V_m
            let mut reach: Vec<Vec<bool>> =
                (0..d.vertex_count(n)).map(|v| (0..d.vertex_count(n)).map(|w| v == w).collect()).collect();
            for m in n + 1..=depth {
                let mut next = vec![vec![false; d.vertex_count(m)]; d.vertex_count(n)];
                for e in d.edges(m) {
                    for (row, nrow) in reach.iter().zip(next.iter_mut()) {
                        if row[e.source] {
                            nrow[e.range] = true;
                        }
                    }
                }
                reach = next;
                if reach.iter().all(|row| row.iter().all(|&b| b)) {
                    return Some(m);
                }
            }
            None
        })
        .collect();
    SimplicityWindows { windows }
}

/// Lower bounds on vertex counts (`a`) and pairwise edge multiplicities (`b`)
/// for output levels `1..=a.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityRequest {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub step_budget: usize,
}

impl CapacityRequest {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Capacity(format!("a has {} entries, b has {}", a.len(), b.len())));
        }
        if a.iter().chain(&b).any(|&x| x == 0) {
            return Err(Error::Capacity("bounds must be at least 1".into()));
        }
        Ok(Self { a, b, step_budget: DEFAULT_STEP_BUDGET })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn depth(&self) -> usize {
        self.a.len()
    }

    /// Re-checks both bounds on a diagram of depth `self.depth()`.
    pub fn check(&self, d: &BratteliDiagram) -> ValidationReport {
        let mut report = ValidationReport::new();
        if d.depth() != self.depth() {
            report.error(None, "depth", format!("expected {}, found {}", self.depth(), d.depth()));
            return report;
        }
        for n in 1..=self.depth() {
            if d.vertex_count(n) < self.a[n - 1] {
                report.error(Some(n), "#V", format!("{} < a = {}", d.vertex_count(n), self.a[n - 1]));
            }
            let m = d.incidence_matrix(n).expect("level in range");
            let min = m.min_entry().cloned().unwrap_or_default();
            if min < BigUint::from(self.b[n - 1]) {
                report.error(Some(n), "multiplicity", format!("{min} < b = {}", self.b[n - 1]));
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kept {
    Level(usize),
    /// Vertices are the paths from `V_s` to `V_m`.
    Segment(usize, usize),
}

/// Rewrites a simple diagram so that it meets a [`CapacityRequest`].
///
/// Output levels are chosen greedily: each one is either an input level
/// reached once the edge multiplicities are large enough, or, when that
/// level has too few vertices, a microscoped segment level whose vertices
/// are the paths between two input levels. The input is first truncated,
/// telescoped to the chosen breakpoints, microscoped at the segment levels,
/// and telescoped again to the kept levels.
pub fn ensure_capacity(d: &BratteliDiagram, req: &CapacityRequest) -> Result<(BratteliDiagram, RecodingMap)> {
    let windows = simplicity_window(d);
    if !windows.is_simple() {
        return Err(Error::NotSimple { levels: windows.missing() });
    }
    let plan = plan_capacity(d, req)?;
    let mut breakpoints = vec![0];
    for item in &plan {
        match *item {
            Kept::Level(s) => breakpoints.push(s),
            Kept::Segment(s, m) => breakpoints.extend([s, m]),
        }
    }
    let last = *breakpoints.last().expect("non-empty");

    let mut steps = Vec::new();
    let mut cur = d.clone();
    let mut apply = |cur: &mut BratteliDiagram, r: Result<(BratteliDiagram, RecodingMap)>| -> Result<()> {
        let (next, map) = r?;
        *cur = next;
        steps.extend(map.steps);
        if steps.len() > req.step_budget {
            return Err(Error::StepBudgetExhausted {
                budget: req.step_budget,
                reason: format!("plan needs more than {} steps", req.step_budget),
            });
        }
        Ok(())
    };
    if last < cur.depth() {
        let r = truncate(&cur, last);
        apply(&mut cur, r)?;
    }
    if breakpoints.len() != cur.depth() + 1 {
        let r = telescope(&cur, &breakpoints);
        apply(&mut cur, r)?;
    }
    let index_of = |level: usize| breakpoints.iter().position(|&b| b == level).expect("breakpoint");
    let mut segment_levels: Vec<usize> = plan
        .iter()
        .filter_map(|k| match *k {
            Kept::Segment(_, m) => Some(index_of(m)),
            Kept::Level(_) => None,
        })
        .collect();
    segment_levels.sort_unstable();
    for &lvl in segment_levels.iter().rev() {
        let r = microscope(&cur, lvl);
        apply(&mut cur, r)?;
    }
    // after microscoping, breakpoint index j sits at j + (segments at or below j)
    let shifted = |j: usize| j + segment_levels.iter().filter(|&&s| s <= j).count();
    let mut kept = vec![0];
    for item in &plan {
        kept.push(match *item {
            Kept::Level(s) => shifted(index_of(s)),
            Kept::Segment(_, m) => shifted(index_of(m)) - 1,
        });
    }
    let top = *kept.last().expect("non-empty");
    if top < cur.depth() {
        let r = truncate(&cur, top);
        apply(&mut cur, r)?;
    }
    if kept.len() != cur.depth() + 1 {
        let r = telescope(&cur, &kept);
        apply(&mut cur, r)?;
    }
    Ok((cur, RecodingMap { steps }))
}

fn plan_capacity(d: &BratteliDiagram, req: &CapacityRequest) -> Result<Vec<Kept>> {
    let depth = d.depth();
    let mut plan = Vec::with_capacity(req.depth());
    let mut end = 0;
    let too_shallow = |k: usize| Error::StepBudgetExhausted {
        budget: req.step_budget,
        reason: format!("depth {depth} too shallow to realize output level {k}"),
    };
    for k in 1..=req.depth() {
        let (a, b) = (req.a[k - 1], BigUint::from(req.b[k - 1]));
        let mut product = d.interval_product(end, end)?;
        let mut s = end;
        loop {
            s += 1;
            if s > depth {
                return Err(too_shallow(k));
            }
            product = product.mul(&d.incidence_matrix(s)?);
            if product.min_entry().is_some_and(|m| *m >= b) {
                break;
            }
        }
        if d.vertex_count(s) >= a {
            plan.push(Kept::Level(s));
            end = s;
            continue;
        }
        let mut counts: Vec<BigUint> = vec![BigUint::one(); d.vertex_count(s)];
        let mut m = s;
        loop {
            m += 1;
            if m > depth {
                return Err(too_shallow(k));
            }
            let mut next = vec![BigUint::zero(); d.vertex_count(m)];
            for e in d.edges(m) {
                let c = counts[e.source].clone();
                next[e.range] += c;
            }
            counts = next;
            if counts.iter().sum::<BigUint>() >= BigUint::from(a) {
                break;
            }
        }
        plan.push(Kept::Segment(s, m));
        end = m;
    }
    Ok(plan)
}

/// Largest ratio, over subdiagram vertices `w` of level `n`, of `F`-paths
/// to host paths ending at `w`. Zero when `W_n` is empty.
pub fn thinness_bound(host: &BratteliDiagram, sub: &Subdiagram, n: usize) -> Result<BigRational> {
    host.check_level(n)?;
    if sub.depth() != host.depth() {
        return Err(Error::DepthMismatch { left: sub.depth(), right: host.depth() });
    }
    let all = host.count_paths(n)?.counts;
    let within = sub.count_paths(host, n)?;
    let mut best = BigRational::zero();
    for w in sub.vertices(host, n) {
        let ratio = BigRational::new(within[w].clone().into(), all[w].clone().into());
        if ratio > best {
            best = ratio;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{complete, odo2, tree2};
    use crate::matrix::IncidenceMatrix;

    #[test]
    fn telescope_every_level_is_identity() {
        let d = odo2(3);
        let (t, map) = telescope(&d, &[0, 1, 2, 3]).unwrap();
        assert_eq!(t, d);
        for p in d.enumerate_paths(3, 100).unwrap() {
            assert_eq!(map.forward(&p), Some(p));
        }
    }

    #[test]
    fn telescope_examples() {
        let (t, _) = telescope(&odo2(4), &[0, 2, 4]).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.incidence_matrix(1).unwrap(), IncidenceMatrix::from_rows(vec![vec![4]]));
        assert_eq!(t.incidence_matrix(2).unwrap(), IncidenceMatrix::from_rows(vec![vec![4]]));
        let (t, _) = telescope(&tree2(4), &[0, 2, 4]).unwrap();
        assert_eq!(t.vertices(1).iter().collect::<Vec<_>>(), ["x2", "y2"]);
        assert_eq!(t.incidence_matrix(1).unwrap(), IncidenceMatrix::from_rows(vec![vec![1, 1]]));
    }

    #[test]
    fn bad_cuts_rejected() {
        let d = odo2(4);
        for cuts in [&[1, 4][..], &[0, 2], &[0, 3, 2, 4], &[0, 2, 2, 4]] {
            assert!(matches!(telescope(&d, cuts), Err(Error::InvalidCuts(_))));
        }
    }

    #[test]
    fn microscope_examples() {
        let (m, _) = microscope(&odo2(3), 1).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(m.depth(), 4);
        assert_eq!(m.vertex_count(1), 2);
        assert_eq!(m.incidence_matrix(2).unwrap(), IncidenceMatrix::from_rows(vec![vec![1], vec![1]]));
        assert_eq!(m.incidence_matrix(3).unwrap(), IncidenceMatrix::from_rows(vec![vec![2]]));
        let (m, _) = microscope(&tree2(3), 2).unwrap();
        assert_eq!(m.count_paths(4).unwrap().total(), tree2(3).count_paths(3).unwrap().total());
        assert!(microscope(&odo2(3), 0).is_err());
        assert!(microscope(&odo2(3), 4).is_err());
    }

    #[test]
    fn microscope_then_telescope_round_trip() {
        let d = complete(2, 2, 3);
        for n in 1..=3 {
            let (m, _) = microscope(&d, n).unwrap();
            let cuts: Vec<usize> = (0..=4).filter(|&k| k != n).collect();
            let (back, _) = telescope(&m, &cuts).unwrap();
            assert!(back.same_shape(&d), "level {n}");
        }
    }

    #[test]
    fn simplicity_examples() {
        let w = simplicity_window(&odo2(5));
        assert_eq!(w.windows, (1..=5).map(Some).collect::<Vec<_>>());
        let w = simplicity_window(&tree2(5));
        assert_eq!(w.missing(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn ensure_capacity_all_ones_is_identity() {
        let d = odo2(4);
        let req = CapacityRequest::new(vec![1; 4], vec![1; 4]).unwrap();
        let (out, map) = ensure_capacity(&d, &req).unwrap();
        assert!(map.is_identity());
        assert_eq!(out, d);
    }

    #[test]
    fn ensure_capacity_odometer() {
        let req = CapacityRequest::new(vec![3], vec![4]).unwrap();
        let (out, _) = ensure_capacity(&odo2(6), &req).unwrap();
        assert!(req.check(&out).is_ok(), "{}", req.check(&out));
        assert!(out.validate().is_ok());
    }

    #[test]
    fn ensure_capacity_rejects_tree() {
        let req = CapacityRequest::new(vec![1], vec![1]).unwrap();
        assert!(matches!(ensure_capacity(&tree2(4), &req), Err(Error::NotSimple { .. })));
    }

    #[test]
    fn ensure_capacity_reports_shallow_depth() {
        let req = CapacityRequest::new(vec![3, 3, 3], vec![4, 4, 4]).unwrap();
        assert!(matches!(ensure_capacity(&odo2(6), &req), Err(Error::StepBudgetExhausted { .. })));
    }

    #[test]
    fn thinness_examples() {
        let d = odo2(10);
        let half = Subdiagram::from_ids(&d, (1..=10).map(|n| (n, "a"))).unwrap();
        assert_eq!(thinness_bound(&d, &half, 10).unwrap(), BigRational::new(1.into(), 1024.into()));
        assert_eq!(thinness_bound(&d, &Subdiagram::full(&d), 7).unwrap(), BigRational::one());
        assert!(thinness_bound(&d, &half, 11).is_err());
    }
}
