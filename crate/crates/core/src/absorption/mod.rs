//! Absorbing a thin copy of a relation: plant replicas of a template
//! quotient `(W,F) → (W′,F′)` along a spine, rewrite the host so that the
//! replicas carry `(W,F)`, and check the resulting decompositions.

mod alpha;
mod demo;
mod rewrite;
mod star;

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::diagram::{BratteliDiagram, DiagramQuotient, Subdiagram};
use crate::error::{Error, Result};
use crate::report::ValidationReport;
use crate::transforms::{thinness_bound, CapacityRequest};

pub use alpha::{shift_map_alpha, AlphaCheck, AlphaMap, PathKind};
pub use demo::{demo_host, two_point_demo, DemoOptions, DemoReport, Stage};
pub use rewrite::{build_absorption_diagram, AbsorptionResult};
pub use star::{min_margin, verify_star, verify_star_exhaustive, StarOptions, StarReport, StarWitness};

/// The template quotient `q: (W,F) → (W′,F′)` whose replicas get planted.
#[derive(Debug, Clone)]
pub struct Template {
    pub quotient: DiagramQuotient,
}

impl Template {
    /// Accepts a quotient that passes its own strictness checks.
    pub fn new(quotient: DiagramQuotient) -> Result<Self> {
        if let Some(e) = quotient.validate().first_error() {
            return Err(Error::Inconsistent(format!("template quotient: {e}")));
        }
        Ok(Self { quotient })
    }

    /// `W = W′` with the identity quotient.
    pub fn trivial(w: &BratteliDiagram) -> Result<Self> {
        Self::new(DiagramQuotient::identity(w))
    }

    pub fn w(&self) -> &BratteliDiagram {
        &self.quotient.source
    }

    pub fn w_prime(&self) -> &BratteliDiagram {
        &self.quotient.target
    }

    pub fn depth(&self) -> usize {
        self.quotient.depth()
    }

    /// `W` vertices over the `W′` vertex `b` of level `k`, in `W` order.
    pub fn vertex_fiber(&self, k: usize, b: usize) -> Vec<usize> {
        (0..self.w().vertex_count(k)).filter(|&a| self.quotient.map_vertex(k, a) == b).collect()
    }
}

/// A copy of a template diagram inside the host, rooted at host level
/// `offset`: template level `k` lands on host level `offset + k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub offset: usize,
    /// `vertices[k][a]`: host index of template vertex `a` of level `k`.
    pub vertices: Vec<Vec<usize>>,
    /// `edges[k - 1][f]`: host index of template edge `f` of level `k`.
    pub edges: Vec<Vec<usize>>,
}

impl Embedding {
    /// Number of template levels carried (`0` when only the root is placed).
    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    pub fn subdiagram(&self, host_depth: usize) -> Subdiagram {
        let mut sub = Subdiagram::empty(host_depth);
        for (k, es) in self.edges.iter().enumerate() {
            for &e in es {
                sub.insert(self.offset + k + 1, e);
            }
        }
        sub
    }

    /// Template edge at template level `k` carried by host edge `e`.
    pub fn preimage_edge(&self, k: usize, e: usize) -> Option<usize> {
        self.edges.get(k.wrapping_sub(1))?.iter().position(|&x| x == e)
    }
}

/// Host edges grouped by `(source, range)`, ascending.
fn edge_groups(host: &BratteliDiagram, n: usize) -> HashMap<(usize, usize), Vec<usize>> {
    let mut g: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, e) in host.edges(n).iter().enumerate() {
        g.entry((e.source, e.range)).or_default().push(i);
    }
    g
}

/// Places template level `k` on host level `n` below the images `prev` of
/// template level `k - 1`, using the first free vertices with enough room.
fn embed_level(
    host: &BratteliDiagram,
    n: usize,
    tmpl: &BratteliDiagram,
    k: usize,
    prev: &[usize],
    taken: &mut [bool],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let groups = edge_groups(host, n);
    let mut need: Vec<HashMap<usize, usize>> = vec![HashMap::new(); tmpl.vertex_count(k)];
    for f in tmpl.edges(k) {
        *need[f.range].entry(f.source).or_default() += 1;
    }
    let mut verts = Vec::with_capacity(need.len());
    for wants in &need {
        let x = (0..host.vertex_count(n)).find(|&x| {
            !taken[x]
                && wants
                    .iter()
                    .all(|(&a, &c)| groups.get(&(prev[a], x)).is_some_and(|g| g.len() >= c))
        })?;
        taken[x] = true;
        verts.push(x);
    }
    let mut next: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::with_capacity(tmpl.edges(k).len());
    for f in tmpl.edges(k) {
        let key = (prev[f.source], verts[f.range]);
        let slot = next.entry(key).or_default();
        edges.push(groups[&key][*slot]);
        *slot += 1;
    }
    Some((verts, edges))
}

/// Embeds the template source `W` at the host root, level by level on the
/// first admissible vertices.
pub fn plant_y(host: &BratteliDiagram, template: &Template) -> Result<Embedding> {
    let depth = host.depth();
    if template.depth() < depth {
        return Err(Error::DepthMismatch { left: template.depth(), right: depth });
    }
    let mut emb = Embedding { offset: 0, vertices: vec![vec![0]], edges: Vec::new() };
    for n in 1..=depth {
        let mut taken = vec![false; host.vertex_count(n)];
        let (v, e) = embed_level(host, n, template.w(), n, &emb.vertices[n - 1], &mut taken)
            .ok_or_else(|| Error::Capacity(format!("no room for a copy of W at level {n}")))?;
        emb.vertices.push(v);
        emb.edges.push(e);
    }
    Ok(emb)
}

/// Recovers the embedding of `W` from a host subdiagram that is a copy of it.
pub fn embedding_from_subdiagram(host: &BratteliDiagram, sub: &Subdiagram, template: &Template) -> Result<Embedding> {
    let x = sub.extract(host)?;
    let w = template.w().truncate(host.depth())?;
    let (vm, em) = find_isomorphism(&w, &x.diagram)
        .ok_or_else(|| Error::Inconsistent("the Y subdiagram is not a copy of the template source".into()))?;
    let vertices = vm.iter().enumerate().map(|(n, row)| row.iter().map(|&v| x.vertex_map[n][v]).collect()).collect();
    let edges = em.iter().enumerate().map(|(k, row)| row.iter().map(|&e| x.edge_map[k][e]).collect()).collect();
    Ok(Embedding { offset: 0, vertices, edges })
}

type Mult = Vec<HashMap<(usize, usize), Vec<usize>>>;

/// Vertex and edge maps of a diagram isomorphism `a → b`, if one exists.
/// Parallel edges are matched in declaration order.
pub fn find_isomorphism(a: &BratteliDiagram, b: &BratteliDiagram) -> Option<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    if a.depth() != b.depth() || (0..=a.depth()).any(|n| a.vertex_count(n) != b.vertex_count(n)) {
        return None;
    }
    let ga: Mult = (1..=a.depth()).map(|n| edge_groups(a, n)).collect();
    let gb: Mult = (1..=b.depth()).map(|n| edge_groups(b, n)).collect();
    let mut maps: Vec<Vec<usize>> = vec![vec![0]];
    if !iso_search(a, b, &ga, &gb, &mut maps, 1, &mut Vec::new()) {
        return None;
    }
    let edges = (1..=a.depth())
        .map(|n| {
            let mut out = vec![0; a.edges(n).len()];
            for (&(s, r), list) in &ga[n - 1] {
                let image = &gb[n - 1][&(maps[n - 1][s], maps[n][r])];
                for (f, &g) in list.iter().zip(image) {
                    out[*f] = g;
                }
            }
            out
        })
        .collect();
    Some((maps, edges))
}

fn iso_search(
    a: &BratteliDiagram,
    b: &BratteliDiagram,
    ga: &Mult,
    gb: &Mult,
    maps: &mut Vec<Vec<usize>>,
    n: usize,
    cur: &mut Vec<usize>,
) -> bool {
    if n > a.depth() {
        return true;
    }
    let i = cur.len();
    if i == a.vertex_count(n) {
        maps.push(std::mem::take(cur));
        if iso_search(a, b, ga, gb, maps, n + 1, &mut Vec::new()) {
            return true;
        }
        *cur = maps.pop().expect("pushed above");
        return false;
    }
    let mult = |g: &Mult, s: usize, r: usize| g[n - 1].get(&(s, r)).map_or(0, Vec::len);
    for x in 0..b.vertex_count(n) {
        if cur.contains(&x) {
            continue;
        }
        let fits = (0..a.vertex_count(n - 1)).all(|u| mult(ga, u, i) == mult(gb, maps[n - 1][u], x));
        if fits {
            cur.push(x);
            if iso_search(a, b, ga, gb, maps, n, cur) {
                return true;
            }
            cur.pop();
        }
    }
    false
}

/// Capacity conditions for absorbing `(W̃,F̃) = y_sub` with template `W`:
/// (1) `#V_n ≥ #W̃_n + 1 + Σ_{k<n} #W_k`, (2) every multiplicity of `E_n`
/// is at least `2 Σ_{k<n} #F_k`, `#W̃_n ≤ #V_n / 2`, and every `w ∈ W̃_n`
/// receives at most half of the host paths through `F̃`.
pub fn check_capacity_conditions(host: &BratteliDiagram, y_sub: &Subdiagram, template: &Template) -> Result<ValidationReport> {
    let depth = host.depth();
    if y_sub.depth() != depth {
        return Err(Error::DepthMismatch { left: y_sub.depth(), right: depth });
    }
    if template.depth() + 1 < depth {
        return Err(Error::DepthMismatch { left: template.depth(), right: depth });
    }
    let w = template.w();
    let mut report = ValidationReport::new();
    let mut sum_w = 0usize;
    let mut sum_f = 0usize;
    let mut host_paths = vec![BigUint::from(1u32)];
    let mut y_paths = vec![BigUint::from(1u32)];
    for n in 1..=depth {
        let y_n = if y_sub.edges(n).is_empty() { 0 } else { y_sub.vertices(host, n).len() };
        let need = y_n + 1 + sum_w;
        if host.vertex_count(n) < need {
            report.error(Some(n), "(1)", format!("#V_{n} = {} < {need}", host.vertex_count(n)));
        }
        let groups = edge_groups(host, n);
        let sources = host.vertex_count(n - 1);
        let min_mult = (0..sources)
            .flat_map(|s| (0..host.vertex_count(n)).map(move |r| (s, r)))
            .map(|k| groups.get(&k).map_or(0, Vec::len))
            .min()
            .unwrap_or(0);
        if min_mult < 2 * sum_f {
            report.error(Some(n), "(2)", format!("multiplicity {min_mult} < {}", 2 * sum_f));
        }
        if 2 * y_n > host.vertex_count(n) {
            report.error(Some(n), "#W~", format!("{y_n} vertices exceed half of #V_{n} = {}", host.vertex_count(n)));
        }
        let mut hp = vec![BigUint::default(); host.vertex_count(n)];
        let mut yp = vec![BigUint::default(); host.vertex_count(n)];
        for (i, e) in host.edges(n).iter().enumerate() {
            hp[e.range] += &host_paths[e.source];
            if y_sub.contains(n, i) {
                yp[e.range] += &y_paths[e.source];
            }
        }
        for v in y_sub.vertices(host, n) {
            if &yp[v] * 2u32 > hp[v] {
                report.error(Some(n), host.vertex_id(n, v).to_string(), format!("F~ reaches {} of {} paths", yp[v], hp[v]));
            }
        }
        host_paths = hp;
        y_paths = yp;
        if n <= w.depth() {
            sum_w += w.vertex_count(n);
            sum_f += w.edges(n).len();
        }
    }
    Ok(report)
}

/// Spine, planted replicas and the induced subdiagrams.
#[derive(Debug, Clone)]
pub struct AbsorptionScaffold {
    pub host: BratteliDiagram,
    pub template: Template,
    /// Copy of `W` carrying `(W̃,F̃)`; `None` when `Y` is empty.
    pub y: Option<Embedding>,
    pub y_sub: Subdiagram,
    /// `spine[n - 1]` is the edge `e_n` of `x_∞`.
    pub spine: Vec<usize>,
    /// `replicas[j - 1]`: copy of `W′` rooted at `t(e_j)`, `j = 1..depth`.
    pub replicas: Vec<Embedding>,
    /// `(L′,G′)`: spine plus replica edges.
    pub l_prime: Subdiagram,
    /// `(L,G) = F̃ ∪ G′`.
    pub l: Subdiagram,
}

impl AbsorptionScaffold {
    pub fn depth(&self) -> usize {
        self.host.depth()
    }

    /// Spine vertex `t(e_n)` (the root for `n = 0`).
    pub fn spine_vertex(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            self.host.edge(n, self.spine[n - 1]).range
        }
    }

    /// `(W′,F′)_j`: `e_1..e_j` followed by replica `j`.
    pub fn replica_sub(&self, j: usize) -> Subdiagram {
        let mut sub = match self.replicas.get(j.wrapping_sub(1)) {
            Some(r) => r.subdiagram(self.depth()),
            None => Subdiagram::empty(self.depth()),
        };
        for n in 1..=j.min(self.depth()) {
            sub.insert(n, self.spine[n - 1]);
        }
        sub
    }

    /// Disjointness of `W̃_n` and the replica vertex sets at each level,
    /// plus validity of every planted subdiagram.
    pub fn check(&self) -> Result<ValidationReport> {
        let mut report = ValidationReport::new();
        let d = self.depth();
        for n in 1..=d {
            let mut seen: HashMap<usize, String> = HashMap::new();
            let mut claim = |v: usize, who: String, report: &mut ValidationReport| {
                if let Some(prev) = seen.insert(v, who.clone()) {
                    report.error(Some(n), self.host.vertex_id(n, v).to_string(), format!("shared by {prev} and {who}"));
                }
            };
            if self.y.is_some() {
                for v in self.y_sub.vertices(&self.host, n) {
                    claim(v, "W~".into(), &mut report);
                }
            }
            claim(self.spine_vertex(n), "spine".into(), &mut report);
            for (j0, r) in self.replicas.iter().enumerate().take(n.saturating_sub(1)) {
                for &v in &r.vertices[n - j0 - 1] {
                    claim(v, format!("replica {}", j0 + 1), &mut report);
                }
            }
        }
        for (name, sub) in [("L'", &self.l_prime), ("L", &self.l)] {
            for v in sub.validate(&self.host)?.errors() {
                report.error(v.level, name, v.message.clone());
            }
        }
        if self.y.is_some() {
            report.merge(self.y_sub.validate(&self.host)?);
        }
        Ok(report)
    }

    /// Thinness bounds of `(L′,G′)` and `(L,G)` at `level`.
    pub fn thinness(&self, level: usize) -> Result<(BigRational, BigRational)> {
        Ok((thinness_bound(&self.host, &self.l_prime, level)?, thinness_bound(&self.host, &self.l, level)?))
    }
}

/// Chooses the spine `x_∞` and plants `W′` at every `t(e_j)`, `j < depth`,
/// keeping each level's pieces disjoint from each other and from `W̃`.
pub fn plant_replicas(host: &BratteliDiagram, y: Option<Embedding>, template: &Template) -> Result<AbsorptionScaffold> {
    let depth = host.depth();
    if depth == 0 {
        return Err(Error::Inconsistent("nothing to plant in a depth-0 host".into()));
    }
    if template.depth() + 1 < depth {
        return Err(Error::DepthMismatch { left: template.depth(), right: depth });
    }
    let y_sub = y.as_ref().map_or_else(|| Subdiagram::empty(depth), |e| e.subdiagram(depth));
    let report = check_capacity_conditions(host, &y_sub, template)?;
    if let Some(e) = report.first_error() {
        return Err(Error::Capacity(e));
    }
    let wp = template.w_prime();
    let mut spine = Vec::with_capacity(depth);
    let mut replicas: Vec<Embedding> = Vec::new();
    for n in 1..=depth {
        let mut taken = vec![false; host.vertex_count(n)];
        if y.is_some() {
            for v in y_sub.vertices(host, n) {
                taken[v] = true;
            }
        }
        let prev = if n == 1 { 0 } else { host.edge(n - 1, spine[n - 2]).range };
        let e = host
            .edges(n)
            .iter()
            .enumerate()
            .filter(|(_, e)| e.source == prev && !taken[e.range])
            .min_by_key(|(i, e)| (e.range, *i))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Inconsistent(format!("no admissible spine edge at level {n}")))?;
        taken[host.edge(n, e).range] = true;
        spine.push(e);
        for (j0, r) in replicas.iter_mut().enumerate() {
            let k = n - j0 - 1;
            let (v, es) = embed_level(host, n, wp, k, &r.vertices[k - 1], &mut taken)
                .ok_or_else(|| Error::Capacity(format!("no room for replica {} at level {n}", j0 + 1)))?;
            r.vertices.push(v);
            r.edges.push(es);
        }
        if n < depth {
            replicas.push(Embedding { offset: n, vertices: vec![vec![host.edge(n, e).range]], edges: Vec::new() });
        }
    }
    let mut l_prime = Subdiagram::empty(depth);
    for (k, &e) in spine.iter().enumerate() {
        l_prime.insert(k + 1, e);
    }
    for r in &replicas {
        l_prime = l_prime.union(&r.subdiagram(depth));
    }
    let l = l_prime.union(&y_sub);
    let scaffold = AbsorptionScaffold { host: host.clone(), template: template.clone(), y, y_sub, spine, replicas, l_prime, l };
    if let Some(e) = scaffold.check()?.first_error() {
        return Err(Error::Inconsistent(format!("planted scaffold: {e}")));
    }
    Ok(scaffold)
}

/// `BTreeSet` of the vertices of `sub` at every level, for reports.
pub fn vertex_sets(host: &BratteliDiagram, sub: &Subdiagram) -> Vec<BTreeSet<usize>> {
    (0..=host.depth()).map(|n| sub.vertices(host, n)).collect()
}

/// Vertex counts `a_n` and multiplicities `b_n` a host must reach so that a
/// copy of `W` plus the replicas fit and every capacity condition holds.
pub fn capacity_request(template: &Template, depth: usize) -> Result<CapacityRequest> {
    let w = template.w();
    if w.depth() < depth {
        return Err(Error::DepthMismatch { left: w.depth(), right: depth });
    }
    let (mut a, mut b) = (Vec::with_capacity(depth), Vec::with_capacity(depth));
    let (mut sum_w, mut sum_f) = (0, 0);
    for n in 1..=depth {
        let wn = w.vertex_count(n);
        a.push((wn + 1 + sum_w).max(2 * wn));
        let widest = edge_groups(w, n).values().map(Vec::len).max().unwrap_or(0);
        b.push((2 * widest).max(2 * sum_f).max(1));
        sum_w += wn;
        sum_f += w.edges(n).len();
    }
    CapacityRequest::new(a, b)
}
