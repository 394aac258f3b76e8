//! Graded diagrams with a single root, finite paths through them, and the
//! structure-preserving maps used by the rest of the crate.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexSet;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::IncidenceMatrix;
use crate::report::ValidationReport;

/// Default number of paths an enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    /// Index of the source vertex in the previous level.
    pub source: usize,
    /// Index of the range vertex in this edge's level.
    pub range: usize,
}

/// A Bratteli diagram truncated at a finite depth.
///
/// `vertices[n]` holds `V_n` for `n` in `0..=depth`, `edges[n - 1]` holds
/// `E_n`. Ids are unique within a level and kept in insertion order. The
/// builder methods only enforce referential integrity; the diagram
/// invariants themselves are checked by [`BratteliDiagram::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BratteliDiagram {
    vertices: Vec<IndexSet<String>>,
    edges: Vec<Vec<Edge>>,
    edge_ids: Vec<HashMap<String, usize>>,
}

impl BratteliDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Diagram of depth 0 with the given root.
    pub fn with_root(id: impl Into<String>) -> Self {
        let mut d = Self::new();
        d.add_vertex(0, id).expect("fresh diagram");
        d
    }

    /// Depth `N` of the truncation. An empty diagram reports depth 0.
    pub fn depth(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn level_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn add_vertex(&mut self, level: usize, id: impl Into<String>) -> Result<usize> {
        let id = id.into();
        if level > self.vertices.len() {
            return Err(Error::LevelGap { level, depth: self.depth() });
        }
        if level == self.vertices.len() {
            self.vertices.push(IndexSet::new());
            if level > 0 {
                self.edges.push(Vec::new());
                self.edge_ids.push(HashMap::new());
            }
        }
        let (idx, fresh) = self.vertices[level].insert_full(id.clone());
        if !fresh {
            return Err(Error::DuplicateId { kind: "vertex", level, id });
        }
        Ok(idx)
    }

    pub fn add_edge(&mut self, level: usize, id: impl Into<String>, source: &str, range: &str) -> Result<usize> {
        self.check_edge_level(level)?;
        let s = self.vertex_index(level - 1, source).ok_or_else(|| Error::UnknownVertex {
            level: level - 1,
            id: source.to_string(),
        })?;
        let r = self
            .vertex_index(level, range)
            .ok_or_else(|| Error::UnknownVertex { level, id: range.to_string() })?;
        self.add_edge_by_index(level, id, s, r)
    }

    pub fn add_edge_by_index(&mut self, level: usize, id: impl Into<String>, source: usize, range: usize) -> Result<usize> {
        self.check_edge_level(level)?;
        let id = id.into();
        if source >= self.vertices[level - 1].len() {
            return Err(Error::UnknownVertex { level: level - 1, id: format!("#{source}") });
        }
        if range >= self.vertices[level].len() {
            return Err(Error::UnknownVertex { level, id: format!("#{range}") });
        }
        let slot = &mut self.edge_ids[level - 1];
        if slot.contains_key(&id) {
            return Err(Error::DuplicateId { kind: "edge", level, id });
        }
        let idx = self.edges[level - 1].len();
        slot.insert(id.clone(), idx);
        self.edges[level - 1].push(Edge { id, source, range });
        Ok(idx)
    }

    fn check_edge_level(&self, level: usize) -> Result<()> {
        if level == 0 || level >= self.vertices.len() {
            return Err(Error::LevelOutOfRange { level, depth: self.depth() });
        }
        Ok(())
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            return Err(Error::LevelOutOfRange { level, depth: self.depth() });
        }
        Ok(())
    }

    pub fn vertices(&self, level: usize) -> &IndexSet<String> {
        &self.vertices[level]
    }

    pub fn vertex_count(&self, level: usize) -> usize {
        self.vertices[level].len()
    }

    pub fn vertex_id(&self, level: usize, idx: usize) -> &str {
        &self.vertices[level][idx]
    }

    pub fn vertex_index(&self, level: usize, id: &str) -> Option<usize> {
        self.vertices.get(level)?.get_index_of(id)
    }

    /// `E_level`, for `level` in `1..=depth`.
    pub fn edges(&self, level: usize) -> &[Edge] {
        &self.edges[level - 1]
    }

    pub fn edge(&self, level: usize, idx: usize) -> &Edge {
        &self.edges[level - 1][idx]
    }

    pub fn edge_index(&self, level: usize, id: &str) -> Option<usize> {
        self.edge_ids.get(level.checked_sub(1)?)?.get(id).copied()
    }

    pub fn total_vertices(&self) -> usize {
        self.vertices.iter().map(IndexSet::len).sum()
    }

    pub fn total_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// `out[n][v]`: indices in `E_{n+1}` of edges leaving vertex `v` of `V_n`,
    /// sorted by edge id.
    pub fn out_adjacency(&self) -> Vec<Vec<Vec<usize>>> {
        let mut out: Vec<Vec<Vec<usize>>> =
            (0..self.depth()).map(|n| vec![Vec::new(); self.vertex_count(n)]).collect();
        for n in 1..=self.depth() {
            for (k, e) in self.edges(n).iter().enumerate() {
                out[n - 1][e.source].push(k);
            }
            for list in &mut out[n - 1] {
                let edges = self.edges(n);
                list.sort_by(|a, b| edges[*a].id.cmp(&edges[*b].id));
            }
        }
        out
    }

    /// `inc[n][w]`: indices in `E_n` of edges ranging at vertex `w` of `V_n`
    /// (`inc[0]` is empty).
    pub fn in_adjacency(&self) -> Vec<Vec<Vec<usize>>> {
        let mut inc: Vec<Vec<Vec<usize>>> =
            (0..=self.depth()).map(|n| vec![Vec::new(); self.vertex_count(n)]).collect();
        for n in 1..=self.depth() {
            for (k, e) in self.edges(n).iter().enumerate() {
                inc[n][e.range].push(k);
            }
        }
        inc
    }

    /// Checks the standing invariants: single root, non-empty source
    /// fibres below the last level, non-empty range fibres above level 0.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        if self.vertices.is_empty() {
            report.error(Some(0), "V_0", "diagram has no root level");
            return report;
        }
        if self.vertices[0].len() != 1 {
            report.error(Some(0), "V_0", format!("expected one root vertex, found {}", self.vertices[0].len()));
        }
        let mut has_out: Vec<Vec<bool>> = self.vertices.iter().map(|v| vec![false; v.len()]).collect();
        let mut has_in = has_out.clone();
        for n in 1..=self.depth() {
            for e in self.edges(n) {
                has_out[n - 1][e.source] = true;
                has_in[n][e.range] = true;
            }
        }
        for n in 0..=self.depth() {
            if self.vertices[n].is_empty() {
                report.error(Some(n), "V", "empty level");
            }
            for (v, id) in self.vertices[n].iter().enumerate() {
                if n < self.depth() && !has_out[n][v] {
                    report.error(Some(n), id.clone(), "no outgoing edge (i^-1 empty)");
                }
                if n > 0 && !has_in[n][v] {
                    report.error(Some(n), id.clone(), "no incoming edge (t^-1 empty)");
                }
            }
        }
        report
    }

    /// Edge-count matrix between `V_{level-1}` and `V_level`.
    pub fn incidence_matrix(&self, level: usize) -> Result<IncidenceMatrix> {
        if level == 0 || level > self.depth() {
            return Err(Error::LevelOutOfRange { level, depth: self.depth() });
        }
        let mut m = IncidenceMatrix::zeros(self.vertex_count(level - 1), self.vertex_count(level));
        for e in self.edges(level) {
            *m.get_mut(e.source, e.range) += 1u32;
        }
        Ok(m)
    }

    /// Product of the incidence matrices over levels `from+1..=to`.
    pub fn interval_product(&self, from: usize, to: usize) -> Result<IncidenceMatrix> {
        self.check_level(to)?;
        if from > to {
            return Err(Error::LevelOutOfRange { level: from, depth: to });
        }
        let mut acc = IncidenceMatrix::identity(self.vertex_count(from));
        for n in from + 1..=to {
            acc = acc.mul(&self.incidence_matrix(n)?);
        }
        Ok(acc)
    }

    /// Number of paths from the root to each vertex of `V_level`.
    pub fn count_paths(&self, level: usize) -> Result<PathCounts> {
        self.check_level(level)?;
        let mut counts = vec![BigUint::one(); self.vertex_count(0)];
        for n in 1..=level {
            let mut next = vec![BigUint::zero(); self.vertex_count(n)];
            for e in self.edges(n) {
                let c = counts[e.source].clone();
                next[e.range] += c;
            }
            counts = next;
        }
        Ok(PathCounts { level, counts })
    }

    /// All root paths to `level`, depth-first with children in edge-id order.
    pub fn enumerate_paths(&self, level: usize, cap: usize) -> Result<Vec<FinitePath>> {
        let total = self.count_paths(level)?.total();
        if total > BigUint::from(cap) {
            return Err(Error::CapExceeded { count: total.to_string(), cap });
        }
        let out = self.out_adjacency();
        let mut paths = Vec::with_capacity(total.to_usize().unwrap_or(0));
        if self.vertex_count(0) == 0 {
            return Ok(paths);
        }
        let mut stack: Vec<usize> = Vec::with_capacity(level);
        for root in 0..self.vertex_count(0) {
            self.dfs(&out, level, 0, root, &mut stack, &mut paths);
        }
        Ok(paths)
    }

    fn dfs(
        &self,
        out: &[Vec<Vec<usize>>],
        target: usize,
        level: usize,
        vertex: usize,
        stack: &mut Vec<usize>,
        acc: &mut Vec<FinitePath>,
    ) {
        if level == target {
            acc.push(FinitePath(stack.clone()));
            return;
        }
        for &e in &out[level][vertex] {
            stack.push(e);
            let next = self.edge(level + 1, e).range;
            self.dfs(out, target, level + 1, next, stack, acc);
            stack.pop();
        }
    }

    /// All paths from vertex `start` of `V_from` down to `V_to`.
    pub fn segments(&self, from: usize, start: usize, to: usize) -> Vec<Vec<usize>> {
        let out = self.out_adjacency();
        self.segments_with(&out, from, start, to)
    }

    pub(crate) fn segments_with(&self, out: &[Vec<Vec<usize>>], from: usize, start: usize, to: usize) -> Vec<Vec<usize>> {
        let mut acc = Vec::new();
        let mut stack = Vec::new();
        self.dfs(out, to, from, start, &mut stack, &mut acc);
        acc.into_iter().map(|p| p.0).collect()
    }

    /// Range vertex of a root path (the root index for the empty path).
    pub fn terminal(&self, path: &FinitePath) -> usize {
        match path.0.last() {
            Some(&e) => self.edge(path.len(), e).range,
            None => 0,
        }
    }

    /// Whether consecutive edges of `path` are composable.
    pub fn is_path(&self, path: &FinitePath) -> bool {
        if path.len() > self.depth() {
            return false;
        }
        let mut at = 0usize;
        for (k, &e) in path.0.iter().enumerate() {
            let Some(edge) = self.edges(k + 1).get(e) else { return false };
            if edge.source != at {
                return false;
            }
            at = edge.range;
        }
        true
    }

    /// Edge ids along a path, for reports.
    pub fn path_label(&self, path: &FinitePath) -> String {
        if path.is_empty() {
            return "()".into();
        }
        path.0
            .iter()
            .enumerate()
            .map(|(k, &e)| self.edge(k + 1, e).id.as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    /// Vertex-order-preserving isomorphism: equal level sizes and equal
    /// incidence matrices. Parallel edges are interchangeable, so this is
    /// exactly isomorphism up to renaming with the identity on vertex positions.
    pub fn same_shape(&self, other: &BratteliDiagram) -> bool {
        if self.depth() != other.depth() {
            return false;
        }
        (0..=self.depth()).all(|n| self.vertex_count(n) == other.vertex_count(n))
            && (1..=self.depth()).all(|n| self.incidence_matrix(n).ok() == other.incidence_matrix(n).ok())
    }

    /// Prefix diagram with levels `0..=depth`.
    pub fn truncate(&self, depth: usize) -> Result<BratteliDiagram> {
        self.check_level(depth)?;
        let mut d = self.clone();
        d.vertices.truncate(depth + 1);
        d.edges.truncate(depth);
        d.edge_ids.truncate(depth);
        Ok(d)
    }
}

/// A root path `(e_1, ..., e_n)`, stored as edge indices per level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FinitePath(pub Vec<usize>);

impl FinitePath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn edges(&self) -> &[usize] {
        &self.0
    }

    pub fn prefix(&self, n: usize) -> FinitePath {
        FinitePath(self.0[..n.min(self.0.len())].to_vec())
    }
}

/// Exact path counts from the root to every vertex of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCounts {
    pub level: usize,
    pub counts: Vec<BigUint>,
}

impl PathCounts {
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

/// Edge subset `F` of a host diagram, one set per level `1..=depth`.
///
/// The vertex set is induced: `W = {v_0} ∪ t(F)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Subdiagram {
    edges: Vec<BTreeSet<usize>>,
}

impl Subdiagram {
    pub fn empty(depth: usize) -> Self {
        Self { edges: vec![BTreeSet::new(); depth] }
    }

    pub fn full(host: &BratteliDiagram) -> Self {
        Self { edges: (1..=host.depth()).map(|n| (0..host.edges(n).len()).collect()).collect() }
    }

    pub fn from_indices(edges: Vec<BTreeSet<usize>>) -> Self {
        Self { edges }
    }

    pub fn from_ids<'a>(host: &BratteliDiagram, ids: impl IntoIterator<Item = (usize, &'a str)>) -> Result<Self> {
        let mut sub = Self::empty(host.depth());
        for (level, id) in ids {
            if level == 0 || level > host.depth() {
                return Err(Error::LevelOutOfRange { level, depth: host.depth() });
            }
            let idx = host
                .edge_index(level, id)
                .ok_or_else(|| Error::UnknownEdge { level, id: id.to_string() })?;
            sub.edges[level - 1].insert(idx);
        }
        Ok(sub)
    }

    pub fn depth(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self, level: usize) -> &BTreeSet<usize> {
        &self.edges[level - 1]
    }

    pub fn insert(&mut self, level: usize, edge: usize) {
        self.edges[level - 1].insert(edge);
    }

    pub fn contains(&self, level: usize, edge: usize) -> bool {
        self.edges.get(level.wrapping_sub(1)).is_some_and(|s| s.contains(&edge))
    }

    pub fn union(&self, other: &Subdiagram) -> Subdiagram {
        let depth = self.depth().max(other.depth());
        let edges = (0..depth)
            .map(|k| {
                let mut s = self.edges.get(k).cloned().unwrap_or_default();
                s.extend(other.edges.get(k).into_iter().flatten().copied());
                s
            })
            .collect();
        Subdiagram { edges }
    }

    /// Induced vertex set `W_level`.
    pub fn vertices(&self, host: &BratteliDiagram, level: usize) -> BTreeSet<usize> {
        if level == 0 {
            return [0].into_iter().collect();
        }
        self.edges(level).iter().map(|&e| host.edge(level, e).range).collect()
    }

    /// Checks `i(F) = {v_0} ∪ t(F)` level by level.
    pub fn validate(&self, host: &BratteliDiagram) -> Result<ValidationReport> {
        if self.depth() != host.depth() {
            return Err(Error::DepthMismatch { left: self.depth(), right: host.depth() });
        }
        for n in 1..=self.depth() {
            if let Some(&bad) = self.edges(n).iter().find(|&&e| e >= host.edges(n).len()) {
                return Err(Error::UnknownEdge { level: n, id: format!("#{bad}") });
            }
        }
        let mut report = ValidationReport::new();
        for n in 0..self.depth() {
            let sources: BTreeSet<usize> = self.edges(n + 1).iter().map(|&e| host.edge(n + 1, e).source).collect();
            let expected = self.vertices(host, n);
            for v in expected.difference(&sources) {
                report.error(Some(n), host.vertex_id(n, *v).to_string(), "vertex of W has no outgoing F-edge");
            }
            for v in sources.difference(&expected) {
                report.error(Some(n), host.vertex_id(n, *v).to_string(), "F-edge leaves a vertex outside t(F)");
            }
        }
        Ok(report)
    }

    /// F-path counts from the root to every host vertex of `level`.
    pub fn count_paths(&self, host: &BratteliDiagram, level: usize) -> Result<Vec<BigUint>> {
        host.check_level(level)?;
        let mut counts = vec![BigUint::one(); host.vertex_count(0)];
        for n in 1..=level {
            let mut next = vec![BigUint::zero(); host.vertex_count(n)];
            for &e in self.edges(n) {
                let edge = host.edge(n, e);
                let c = counts[edge.source].clone();
                next[edge.range] += c;
            }
            counts = next;
        }
        Ok(counts)
    }

    /// Whether every edge of a root path lies in `F`.
    pub fn contains_path(&self, path: &FinitePath) -> bool {
        path.0.iter().enumerate().all(|(k, &e)| self.contains(k + 1, e))
    }

    /// The subdiagram as a standalone diagram, with index maps back to the host.
    pub fn extract(&self, host: &BratteliDiagram) -> Result<ExtractedSubdiagram> {
        let mut diagram = BratteliDiagram::new();
        let mut vertex_map = Vec::new();
        let mut edge_map = Vec::new();
        let mut local: Vec<HashMap<usize, usize>> = Vec::new();
        for n in 0..=self.depth() {
            let verts: Vec<usize> = self.vertices(host, n).into_iter().collect();
            let mut lm = HashMap::new();
            for &v in &verts {
                let idx = diagram.add_vertex(n, host.vertex_id(n, v))?;
                lm.insert(v, idx);
            }
            if verts.is_empty() && diagram.level_count() == n {
                // keep level numbering aligned even when W_n is empty
                diagram.vertices.push(IndexSet::new());
                diagram.edges.push(Vec::new());
                diagram.edge_ids.push(HashMap::new());
            }
            vertex_map.push(verts);
            local.push(lm);
            if n > 0 {
                let mut em = Vec::new();
                for &e in self.edges(n) {
                    let edge = host.edge(n, e);
                    let s = *local[n - 1].get(&edge.source).ok_or_else(|| {
                        Error::Inconsistent(format!("F-edge at level {n} leaves a vertex outside W"))
                    })?;
                    let r = local[n][&edge.range];
                    diagram.add_edge_by_index(n, edge.id.clone(), s, r)?;
                    em.push(e);
                }
                edge_map.push(em);
            }
        }
        Ok(ExtractedSubdiagram { diagram, vertex_map, edge_map })
    }
}

/// Standalone copy of a subdiagram; `vertex_map[n][local] = host index`,
/// `edge_map[n - 1][local] = host index`.
#[derive(Debug, Clone)]
pub struct ExtractedSubdiagram {
    pub diagram: BratteliDiagram,
    pub vertex_map: Vec<Vec<usize>>,
    pub edge_map: Vec<Vec<usize>>,
}

impl ExtractedSubdiagram {
    pub fn to_host_path(&self, path: &FinitePath) -> FinitePath {
        FinitePath(path.0.iter().enumerate().map(|(k, &e)| self.edge_map[k][e]).collect())
    }
}

/// Which fibre conditions a quotient must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// Source fibres and range fibres (from level 2) are bijective and `t`
    /// is injective on `E_1`.
    Full,
    /// Only source fibres are required to be bijective.
    SourceFiber,
}

/// Grading-respecting surjections `q_V`, `q_E` from `source` onto `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramQuotient {
    pub source: BratteliDiagram,
    pub target: BratteliDiagram,
    /// `vertex_map[n][v]` is the image in `target` `V_n` of source vertex `v`.
    pub vertex_map: Vec<Vec<usize>>,
    /// `edge_map[n - 1][e]` is the image in target `E_n` of source edge `e`.
    pub edge_map: Vec<Vec<usize>>,
    pub strictness: Strictness,
}

impl DiagramQuotient {
    pub fn new(
        source: BratteliDiagram,
        target: BratteliDiagram,
        vertex_map: Vec<Vec<usize>>,
        edge_map: Vec<Vec<usize>>,
        strictness: Strictness,
    ) -> Result<Self> {
        if source.depth() != target.depth() {
            return Err(Error::DepthMismatch { left: source.depth(), right: target.depth() });
        }
        let depth = source.depth();
        if vertex_map.len() != depth + 1 || edge_map.len() != depth {
            return Err(Error::Inconsistent("quotient maps do not cover every level".into()));
        }
        for n in 0..=depth {
            if vertex_map[n].len() != source.vertex_count(n) {
                return Err(Error::Inconsistent(format!("q_V undefined on part of level {n}")));
            }
            if let Some(&bad) = vertex_map[n].iter().find(|&&w| w >= target.vertex_count(n)) {
                return Err(Error::UnknownVertex { level: n, id: format!("#{bad}") });
            }
            if n > 0 {
                if edge_map[n - 1].len() != source.edges(n).len() {
                    return Err(Error::Inconsistent(format!("q_E undefined on part of level {n}")));
                }
                if let Some(&bad) = edge_map[n - 1].iter().find(|&&e| e >= target.edges(n).len()) {
                    return Err(Error::UnknownEdge { level: n, id: format!("#{bad}") });
                }
            }
        }
        Ok(Self { source, target, vertex_map, edge_map, strictness })
    }

    pub fn identity(d: &BratteliDiagram) -> Self {
        let vertex_map = (0..=d.depth()).map(|n| (0..d.vertex_count(n)).collect()).collect();
        let edge_map = (1..=d.depth()).map(|n| (0..d.edges(n).len()).collect()).collect();
        Self {
            source: d.clone(),
            target: d.clone(),
            vertex_map,
            edge_map,
            strictness: Strictness::Full,
        }
    }

    pub fn depth(&self) -> usize {
        self.source.depth()
    }

    pub fn map_edge(&self, level: usize, e: usize) -> usize {
        self.edge_map[level - 1][e]
    }

    pub fn map_vertex(&self, level: usize, v: usize) -> usize {
        self.vertex_map[level][v]
    }

    /// The path map `H`: apply `q_E` coordinatewise.
    pub fn push_forward(&self, path: &FinitePath) -> FinitePath {
        FinitePath(path.0.iter().enumerate().map(|(k, &e)| self.map_edge(k + 1, e)).collect())
    }

    /// Inverse of `H`, computed greedily from the root using source-fibre
    /// bijectivity. Returns `None` when some step has no unique preimage.
    pub fn pull_back(&self, path: &FinitePath) -> Option<FinitePath> {
        let mut at = 0usize;
        let mut out = Vec::with_capacity(path.len());
        for (k, &target_edge) in path.0.iter().enumerate() {
            let level = k + 1;
            let mut found = None;
            for (e, edge) in self.source.edges(level).iter().enumerate() {
                if edge.source == at && self.map_edge(level, e) == target_edge {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(e);
                }
            }
            let e = found?;
            out.push(e);
            at = self.source.edge(level, e).range;
        }
        Some(FinitePath(out))
    }

    /// Conditions (i), (ii) and, for full strictness, (iii) plus
    /// injectivity of `t` on `E_1`; surjectivity of both maps always.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let (src, tgt) = (&self.source, &self.target);
        let depth = self.depth();
        for n in 0..=depth {
            let mut hit = vec![false; tgt.vertex_count(n)];
            for &w in &self.vertex_map[n] {
                hit[w] = true;
            }
            for (w, ok) in hit.iter().enumerate() {
                if !ok {
                    report.error(Some(n), tgt.vertex_id(n, w).to_string(), "q_V is not surjective onto this vertex");
                }
            }
        }
        for n in 1..=depth {
            let mut hit = vec![false; tgt.edges(n).len()];
            for (e, edge) in src.edges(n).iter().enumerate() {
                let image = self.map_edge(n, e);
                hit[image] = true;
                let timg = tgt.edge(n, image);
                if timg.source != self.map_vertex(n - 1, edge.source) {
                    report.error(Some(n), edge.id.clone(), "i(q_E(e)) != q_V(i(e))");
                }
                if timg.range != self.map_vertex(n, edge.range) {
                    report.error(Some(n), edge.id.clone(), "t(q_E(e)) != q_V(t(e))");
                }
            }
            for (e, ok) in hit.iter().enumerate() {
                if !ok {
                    report.error(Some(n), tgt.edge(n, e).id.clone(), "q_E is not surjective onto this edge");
                }
            }
        }
        let src_out = src.out_adjacency();
        let tgt_out = tgt.out_adjacency();
        for n in 0..depth {
            for v in 0..src.vertex_count(n) {
                let images: Vec<usize> = src_out[n][v].iter().map(|&e| self.map_edge(n + 1, e)).collect();
                let expected = &tgt_out[n][self.map_vertex(n, v)];
                if !is_bijection_onto(&images, expected) {
                    report.error(
                        Some(n),
                        src.vertex_id(n, v).to_string(),
                        format!(
                            "q_E restricted to i^-1(v) is not a bijection onto i^-1(q_V(v)) ({} -> {})",
                            images.len(),
                            expected.len()
                        ),
                    );
                }
            }
        }
        if self.strictness == Strictness::Full {
            let src_in = src.in_adjacency();
            let tgt_in = tgt.in_adjacency();
            for n in 1..=depth {
                for v in 0..src.vertex_count(n) {
                    let images: Vec<usize> = src_in[n][v].iter().map(|&e| self.map_edge(n, e)).collect();
                    let expected = &tgt_in[n][self.map_vertex(n, v)];
                    if !is_bijection_onto(&images, expected) {
                        let msg = "q_E restricted to t^-1(v) is not a bijection onto t^-1(q_V(v))";
                        if n >= 2 {
                            report.error(Some(n), src.vertex_id(n, v).to_string(), msg);
                        } else {
                            report.info(Some(n), src.vertex_id(n, v).to_string(), msg);
                        }
                    }
                }
            }
            if depth >= 1 {
                let mut seen = vec![false; src.vertex_count(1)];
                for e in src.edges(1) {
                    if std::mem::replace(&mut seen[e.range], true) {
                        report.error(Some(1), e.id.clone(), "t is not injective on E_1");
                    }
                }
            }
        }
        report
    }

    /// Exhaustive path bijection at depth `level`.
    pub fn lift_paths(&self, level: usize, cap: usize) -> Result<PathBijection> {
        let sources = self.source.enumerate_paths(level, cap)?;
        let target_total = self.target.count_paths(level)?.total();
        let mut inverse = HashMap::with_capacity(sources.len());
        let mut pairs = Vec::with_capacity(sources.len());
        for (k, p) in sources.into_iter().enumerate() {
            let image = self.push_forward(&p);
            if inverse.insert(image.clone(), k).is_some() {
                return Err(Error::NotBijective(format!(
                    "two source paths map to {}",
                    self.target.path_label(&image)
                )));
            }
            pairs.push((p, image));
        }
        if BigUint::from(pairs.len()) != target_total {
            return Err(Error::NotBijective(format!(
                "{} source paths vs {} target paths at depth {level}",
                pairs.len(),
                target_total
            )));
        }
        Ok(PathBijection { pairs, inverse })
    }
}

fn is_bijection_onto(images: &[usize], expected: &[usize]) -> bool {
    if images.len() != expected.len() {
        return false;
    }
    let a: BTreeSet<usize> = images.iter().copied().collect();
    let b: BTreeSet<usize> = expected.iter().copied().collect();
    a.len() == images.len() && a == b
}

/// Forward map on depth-`n` paths with its inverse.
#[derive(Debug, Clone)]
pub struct PathBijection {
    pairs: Vec<(FinitePath, FinitePath)>,
    inverse: HashMap<FinitePath, usize>,
}

impl PathBijection {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(FinitePath, FinitePath)] {
        &self.pairs
    }

    pub fn forward(&self, source: &FinitePath) -> Option<&FinitePath> {
        self.pairs.iter().find(|(s, _)| s == source).map(|(_, t)| t)
    }

    pub fn inverse(&self, target: &FinitePath) -> Option<&FinitePath> {
        self.inverse.get(target).map(|&k| &self.pairs[k].0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{loop1, odo2, q2, tree2};

    #[test]
    fn fixtures_validate() {
        assert!(tree2(4).validate().is_ok());
        assert!(odo2(4).validate().is_ok());
        assert!(loop1(4).validate().is_ok());
    }

    #[test]
    fn isolated_vertex_is_reported() {
        let mut d = tree2(3);
        d.add_vertex(2, "lonely").unwrap();
        let report = d.validate();
        assert!(!report.is_ok());
        assert!(report.errors().any(|v| v.level == Some(2) && v.subject == "lonely"));
    }

    #[test]
    fn two_roots_are_reported() {
        let mut d = BratteliDiagram::new();
        d.add_vertex(0, "a").unwrap();
        d.add_vertex(0, "b").unwrap();
        assert!(!d.validate().is_ok());
    }

    #[test]
    fn builder_rejects_bad_references() {
        let mut d = odo2(1);
        assert!(matches!(d.add_edge(1, "c", "nope", "u1"), Err(Error::UnknownVertex { .. })));
        assert!(matches!(d.add_edge(1, "a", "v0", "u1"), Err(Error::DuplicateId { .. })));
        assert!(matches!(d.add_vertex(3, "x"), Err(Error::LevelGap { .. })));
    }

    #[test]
    fn incidence_examples() {
        assert_eq!(odo2(3).incidence_matrix(1).unwrap(), IncidenceMatrix::from_rows(vec![vec![2]]));
        assert_eq!(tree2(3).incidence_matrix(1).unwrap(), IncidenceMatrix::from_rows(vec![vec![1, 1]]));
        assert!(odo2(3).incidence_matrix(4).is_err());
        assert!(odo2(3).incidence_matrix(0).is_err());
    }

    #[test]
    fn count_examples() {
        assert_eq!(odo2(3).count_paths(3).unwrap().counts, vec![BigUint::from(8u32)]);
        assert_eq!(tree2(3).count_paths(3).unwrap().counts, vec![BigUint::one(), BigUint::one()]);
        assert_eq!(loop1(3).count_paths(3).unwrap().counts, vec![BigUint::from(2u32)]);
        assert!(odo2(3).count_paths(4).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let d = odo2(2);
        let labels: Vec<String> = d.enumerate_paths(2, 100).unwrap().iter().map(|p| d.path_label(p)).collect();
        assert_eq!(labels, vec!["a.a", "a.b", "b.a", "b.b"]);
        assert_eq!(d.enumerate_paths(0, 100).unwrap(), vec![FinitePath::default()]);
        assert!(matches!(odo2(10).enumerate_paths(10, 1000), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn subdiagram_examples() {
        let host = tree2(3);
        assert!(Subdiagram::full(&host).validate(&host).unwrap().is_ok());
        let mut broken = Subdiagram::full(&host);
        broken.edges[1].remove(&0);
        let report = broken.validate(&host).unwrap();
        assert!(report.errors().any(|v| v.level == Some(1)));
        assert!(!Subdiagram::empty(3).validate(&host).unwrap().is_ok());
        let trivial = BratteliDiagram::with_root("v0");
        assert!(Subdiagram::empty(0).validate(&trivial).unwrap().is_ok());
        assert!(matches!(
            Subdiagram::from_ids(&host, [(1, "zz")]),
            Err(Error::UnknownEdge { .. })
        ));
    }

    #[test]
    fn quotient_examples() {
        let q = q2(4);
        assert!(q.validate().is_ok(), "{}", q.validate());
        let mut bad = q.clone();
        bad.edge_map[0] = vec![0, 0];
        let report = bad.validate();
        assert!(report.errors().any(|v| v.level == Some(0) && v.subject == "v0"));
        assert!(DiagramQuotient::identity(&tree2(3)).validate().is_ok());
        // parallel level-1 edges break t-injectivity, which full strictness also demands
        let report = DiagramQuotient::identity(&odo2(3)).validate();
        assert_eq!(report.errors().count(), 1);
        assert!(report.errors().all(|v| v.level == Some(1)));
        assert!(DiagramQuotient::new(tree2(2), loop1(3), vec![], vec![], Strictness::Full).is_err());
    }

    #[test]
    fn level_one_range_fibres_are_informational() {
        let report = q2(3).validate();
        assert!(report.is_ok());
        assert!(report.violations().iter().any(|v| v.level == Some(1)));
    }

    #[test]
    fn lift_examples() {
        let q = q2(3);
        let bij = q.lift_paths(3, 100).unwrap();
        assert_eq!(bij.len(), 2);
        for (s, t) in bij.pairs() {
            assert_eq!(q.pull_back(t).as_ref(), Some(s));
        }
        let id = DiagramQuotient::identity(&odo2(3));
        let bij = id.lift_paths(3, 100).unwrap();
        assert!(bij.pairs().iter().all(|(s, t)| s == t));
    }

    #[test]
    fn lift_rejects_non_bijective_quotient() {
        let mut bad = q2(3);
        bad.edge_map[0] = vec![0, 0];
        assert!(matches!(bad.lift_paths(3, 100), Err(Error::NotBijective(_))));
    }

    #[test]
    fn same_shape_ignores_ids() {
        let mut d = BratteliDiagram::with_root("r");
        d.add_vertex(1, "q").unwrap();
        d.add_edge(1, "p1", "r", "q").unwrap();
        d.add_edge(1, "p2", "r", "q").unwrap();
        assert!(d.same_shape(&odo2(1)));
        assert!(!d.same_shape(&tree2(1)));
    }
}
