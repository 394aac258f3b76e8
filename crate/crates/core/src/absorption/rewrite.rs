use std::collections::HashMap;

use num_bigint::BigUint;

use super::AbsorptionScaffold;
use crate::diagram::{BratteliDiagram, DiagramQuotient, Strictness, Subdiagram};
use crate::error::{Error, Result};
use crate::report::ValidationReport;
use crate::transforms::simplicity_window;

/// The rewritten diagram `(V̄,Ē)` with its quotient onto the host.
#[derive(Debug, Clone)]
pub struct AbsorptionResult {
    pub diagram: BratteliDiagram,
    /// `q̄: (V̄,Ē) → (V,E)`, checked with source-fibre strictness.
    pub quotient: DiagramQuotient,
    /// `fibers[n][v]`: the vertices of `V̄_n` over host vertex `v`.
    pub fibers: Vec<Vec<Vec<usize>>>,
    /// `spine[n - 1]`: the copy of `e_n` in `Ē_n`.
    pub spine: Vec<usize>,
    /// `y_edges[k - 1][f]`: copy in `Ē_k` of the `W` edge `f`, through `F̃`.
    pub y_edges: Option<Vec<Vec<usize>>>,
    /// `replica_edges[j - 1][k - 1][f]`: copy in `Ē_{j+k}` of the `W` edge `f`
    /// planted under `t(e_j)`.
    pub replica_edges: Vec<Vec<Vec<usize>>>,
    pub y_image: Subdiagram,
    /// `(W,F)_j` for `j = 1..depth`.
    pub replica_images: Vec<Subdiagram>,
    /// `(L̄,Ḡ) = F̃ ∪ ⋃ (W,F)_j`.
    pub l_bar: Subdiagram,
    /// `(L̄′,Ḡ′) = ⋃ (W,F)_j`.
    pub l_bar_prime: Subdiagram,
}

enum Kind {
    Spine,
    Replica { j0: usize, k: usize, f_prime: usize },
    Free,
}

/// Rewrites the host: replica vertices `v ∉ W′`-roots at levels `≥ 2` are
/// replaced by their `q_W` fibres, replica edges by their `(W,F)` preimages,
/// and every other edge is copied once per source-fibre vertex, with ranges
/// spread round-robin over the range fibre.
pub fn build_absorption_diagram(s: &AbsorptionScaffold) -> Result<AbsorptionResult> {
    let host = &s.host;
    let depth = host.depth();
    let t = &s.template;
    let w = t.w();

    // role[n][v] = (j0, b): v carries W′ vertex b of level n - j0 - 1 in replica j0 + 1
    let mut role: Vec<HashMap<usize, (usize, usize)>> = vec![HashMap::new(); depth + 1];
    for (j0, r) in s.replicas.iter().enumerate() {
        for (k, verts) in r.vertices.iter().enumerate().skip(1) {
            for (b, &v) in verts.iter().enumerate() {
                role[r.offset + k].insert(v, (j0, b));
            }
        }
    }

    let mut d = BratteliDiagram::new();
    let mut fibers: Vec<Vec<Vec<usize>>> = Vec::with_capacity(depth + 1);
    // position of W vertex `a` in the fibre over host vertex `v`
    let mut fiber_of: Vec<HashMap<(usize, usize), usize>> = Vec::with_capacity(depth + 1);
    let mut vertex_map: Vec<Vec<usize>> = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let mut level_fibers = Vec::with_capacity(host.vertex_count(n));
        let mut lookup = HashMap::new();
        let mut vm = Vec::new();
        for v in 0..host.vertex_count(n) {
            let id = host.vertex_id(n, v);
            let mut fiber = Vec::new();
            match role[n].get(&v) {
                Some(&(j0, b)) => {
                    let k = n - j0 - 1;
                    for a in t.vertex_fiber(k, b) {
                        let idx = d.add_vertex(n, format!("{id}~{}", w.vertex_id(k, a)))?;
                        lookup.insert((v, a), idx);
                        fiber.push(idx);
                        vm.push(v);
                    }
                }
                None => {
                    fiber.push(d.add_vertex(n, id)?);
                    vm.push(v);
                }
            }
            level_fibers.push(fiber);
        }
        fibers.push(level_fibers);
        fiber_of.push(lookup);
        vertex_map.push(vm);
    }

    // W edges over each W′ edge, per template level
    let preimages: Vec<Vec<Vec<usize>>> = (1..=t.depth())
        .map(|k| {
            let mut pre = vec![Vec::new(); t.w_prime().edges(k).len()];
            for f in 0..w.edges(k).len() {
                pre[t.quotient.map_edge(k, f)].push(f);
            }
            pre
        })
        .collect();

    let mut edge_map: Vec<Vec<usize>> = Vec::with_capacity(depth);
    let mut spine = Vec::with_capacity(depth);
    let mut replica_edges: Vec<Vec<Vec<usize>>> = s.replicas.iter().map(|_| Vec::new()).collect();
    let mut y_edges: Vec<Vec<usize>> = Vec::new();
    for n in 1..=depth {
        let mut kind: HashMap<usize, Kind> = HashMap::new();
        kind.insert(s.spine[n - 1], Kind::Spine);
        for (j0, r) in s.replicas.iter().enumerate() {
            if n > r.offset {
                let k = n - r.offset;
                for (f_prime, &e) in r.edges[k - 1].iter().enumerate() {
                    kind.insert(e, Kind::Replica { j0, k, f_prime });
                }
                replica_edges[j0].push(vec![usize::MAX; w.edges(k).len()]);
            }
        }
        let mut em = Vec::new();
        let mut copies: Vec<Vec<usize>> = vec![Vec::new(); host.edges(n).len()];
        let mut rr: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, e) in host.edges(n).iter().enumerate() {
            match kind.get(&i).unwrap_or(&Kind::Free) {
                Kind::Spine => {
                    let idx = d.add_edge_by_index(n, e.id.clone(), fibers[n - 1][e.source][0], fibers[n][e.range][0])?;
                    em.push(i);
                    spine.push(idx);
                }
                &Kind::Replica { j0, k, f_prime } => {
                    for &f in &preimages[k - 1][f_prime] {
                        let wf = w.edge(k, f);
                        let src = if k == 1 {
                            fibers[n - 1][e.source][0]
                        } else {
                            *fiber_of[n - 1].get(&(e.source, wf.source)).ok_or_else(|| {
                                Error::Inconsistent(format!("replica edge {} leaves its fibre at level {n}", e.id))
                            })?
                        };
                        let dst = *fiber_of[n].get(&(e.range, wf.range)).ok_or_else(|| {
                            Error::Inconsistent(format!("replica edge {} misses its fibre at level {n}", e.id))
                        })?;
                        let idx = d.add_edge_by_index(n, format!("{}~{}", e.id, wf.id), src, dst)?;
                        em.push(i);
                        replica_edges[j0][k - 1][f] = idx;
                    }
                }
                Kind::Free => {
                    let targets = &fibers[n][e.range];
                    let slot = rr.entry((e.source, e.range)).or_default();
                    let dst = targets[*slot % targets.len()];
                    *slot += 1;
                    let sources = &fibers[n - 1][e.source];
                    for (pos, &src) in sources.iter().enumerate() {
                        let id = if sources.len() == 1 { e.id.clone() } else { format!("{}@{pos}", e.id) };
                        copies[i].push(d.add_edge_by_index(n, id, src, dst)?);
                        em.push(i);
                    }
                }
            }
        }
        for (&(src, dst), &count) in &rr {
            let need = fibers[n][dst].len();
            if count < need {
                return Err(Error::Capacity(format!(
                    "insufficient reroutable edges at level {n}: {count} from {} to {}, fibre of {need}",
                    host.vertex_id(n - 1, src),
                    host.vertex_id(n, dst)
                )));
            }
        }
        if let Some(y) = &s.y {
            y_edges.push(y.edges[n - 1].iter().map(|&e| copies[e][0]).collect());
        }
        edge_map.push(em);
    }
    if replica_edges.iter().flatten().flatten().any(|&e| e == usize::MAX) {
        return Err(Error::Inconsistent("a W edge of some replica has no copy".into()));
    }

    let quotient = DiagramQuotient::new(d.clone(), host.clone(), vertex_map, edge_map, Strictness::SourceFiber)?;
    let spine_sub = {
        let mut sub = Subdiagram::empty(depth);
        for (k, &e) in spine.iter().enumerate() {
            sub.insert(k + 1, e);
        }
        sub
    };
    let replica_images: Vec<Subdiagram> = replica_edges
        .iter()
        .enumerate()
        .map(|(j0, levels)| {
            let mut sub = Subdiagram::empty(depth);
            for n in 1..=j0 + 1 {
                sub.insert(n, spine[n - 1]);
            }
            for (k0, es) in levels.iter().enumerate() {
                for &e in es {
                    sub.insert(j0 + 2 + k0, e);
                }
            }
            sub
        })
        .collect();
    let mut y_image = Subdiagram::empty(depth);
    for (k0, es) in y_edges.iter().enumerate() {
        for &e in es {
            y_image.insert(k0 + 1, e);
        }
    }
    let l_bar_prime = replica_images.iter().fold(spine_sub, |acc, r| acc.union(r));
    let l_bar = l_bar_prime.union(&y_image);
    Ok(AbsorptionResult {
        diagram: d,
        quotient,
        fibers,
        spine,
        y_edges: s.y.as_ref().map(|_| y_edges),
        replica_edges,
        y_image,
        replica_images,
        l_bar,
        l_bar_prime,
    })
}

impl AbsorptionResult {
    /// Fibre sizes: `#q_W⁻¹(b)` over a replica vertex carrying `b` at
    /// template level `≥ 1`, one everywhere else.
    pub fn fiber_law(&self, s: &AbsorptionScaffold) -> bool {
        let mut expected: Vec<Vec<usize>> = (0..=s.depth()).map(|n| vec![1; s.host.vertex_count(n)]).collect();
        for r in &s.replicas {
            for (k, verts) in r.vertices.iter().enumerate().skip(1) {
                for (b, &v) in verts.iter().enumerate() {
                    expected[r.offset + k][v] = s.template.vertex_fiber(k, b).len();
                }
            }
        }
        self.fibers.iter().zip(&expected).all(|(f, e)| f.iter().map(Vec::len).eq(e.iter().copied()))
    }

    /// Structural checks: the rewritten diagram is valid and simple within
    /// its depth, `q̄` passes source-fibre strictness, path counts agree at
    /// every level, and the path lift is exhaustively bijective at every
    /// level whose path count is at most `cap`. Returns the deepest level
    /// checked exhaustively alongside the report.
    pub fn check(&self, cap: usize) -> Result<(ValidationReport, usize)> {
        let mut report = self.diagram.validate();
        let windows = simplicity_window(&self.diagram);
        if !windows.is_simple() {
            report.error(None, "simplicity", format!("no window at levels {:?}", windows.missing()));
        }
        report.merge(self.quotient.validate());
        let host = &self.quotient.target;
        let mut exhaustive = 0;
        for n in 1..=host.depth() {
            let a = self.diagram.count_paths(n)?.total();
            let b = host.count_paths(n)?.total();
            if a != b {
                report.error(Some(n), "paths", format!("{a} paths in the rewrite vs {b} in the host"));
            }
            if a <= BigUint::from(cap) && report.is_ok() {
                match self.quotient.lift_paths(n, cap) {
                    Ok(_) => exhaustive = n,
                    Err(e) => report.error(Some(n), "lift", e.to_string()),
                }
            }
        }
        for (name, sub) in [("L-bar", &self.l_bar), ("L-bar'", &self.l_bar_prime)] {
            for v in sub.validate(&self.diagram)?.errors() {
                report.error(v.level, name, v.message.clone());
            }
        }
        Ok((report, exhaustive))
    }
}
