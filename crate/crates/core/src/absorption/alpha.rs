use std::collections::{HashMap, HashSet};

use super::{AbsorptionResult, AbsorptionScaffold};
use crate::diagram::{BratteliDiagram, FinitePath, Subdiagram};
use crate::error::{Error, Result};
use crate::relations::UnionFind;

/// Where a path of `(L̄,Ḡ)` lives, with its `W` coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// Through `F̃`; the path read as a `W` path.
    Y(Vec<usize>),
    /// `e_1..e_j` followed by the `W` path `w` under `t(e_j)`.
    Replica { j: usize, w: Vec<usize> },
    /// A prefix of `x_∞`.
    Spine,
}

/// `α` from depth `depth - 1` paths of `(L̄,Ḡ)` to depth `depth` paths of
/// `(L̄′,Ḡ′)`, both in `(V̄,Ē)` coordinates.
#[derive(Debug, Clone)]
pub struct AlphaMap {
    pub depth: usize,
    pub pairs: Vec<(FinitePath, FinitePath)>,
    pub kinds: Vec<PathKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaCheck {
    pub domain: usize,
    pub codomain: usize,
    pub bijective: bool,
    pub spine_fixed: bool,
    /// `K` on `Y` corresponds exactly to `K_1`.
    pub k_to_k1: bool,
    /// `K_j` corresponds exactly to `K_{j+1}`, and no mixed pair is related.
    pub kj_shift: bool,
    /// `H̄ α (Y)` is the path set of `(W′,F′)_1`.
    pub y_onto_replica1: bool,
    /// `R|_Y ∨ K` transported by `α` is the host terminal relation there.
    pub relation_transported: bool,
}

/// `<domain> -> <codomain> paths, flag,flag,…` with failed flags prefixed by `!`.
impl std::fmt::Display for AlphaCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let flags: Vec<String> = [
            (self.bijective, "bijective"),
            (self.spine_fixed, "spine"),
            (self.k_to_k1, "K->K1"),
            (self.kj_shift, "Kj->Kj+1"),
            (self.y_onto_replica1, "Y->replica1"),
            (self.relation_transported, "R|Y+K"),
        ]
        .iter()
        .map(|(ok, name)| if *ok { name.to_string() } else { format!("!{name}") })
        .collect();
        write!(f, "{} -> {} paths, {}", self.domain, self.codomain, flags.join(","))
    }
}

impl AlphaCheck {
    pub fn all_ok(&self) -> bool {
        self.bijective
            && self.spine_fixed
            && self.k_to_k1
            && self.kj_shift
            && self.y_onto_replica1
            && self.relation_transported
    }
}

/// Paths of `sub` at `level`, as host paths.
pub(crate) fn sub_paths(host: &BratteliDiagram, sub: &Subdiagram, level: usize, cap: usize) -> Result<Vec<FinitePath>> {
    let x = sub.extract(host)?;
    Ok(x.diagram.enumerate_paths(level, cap)?.iter().map(|p| x.to_host_path(p)).collect())
}

fn classify(r: &AbsorptionResult, y_rev: &[HashMap<usize, usize>], rep_rev: &[Vec<HashMap<usize, usize>>], p: &FinitePath) -> Option<PathKind> {
    let m = p.len();
    if m == 0 {
        return Some(PathKind::Spine);
    }
    if let Some(f) = y_rev.first().and_then(|t| t.get(&p.0[0])) {
        let mut w = vec![*f];
        for k in 2..=m {
            w.push(*y_rev[k - 1].get(&p.0[k - 1])?);
        }
        return Some(PathKind::Y(w));
    }
    let j = p.0.iter().zip(&r.spine).take_while(|(a, b)| a == b).count();
    if j == m {
        return Some(PathKind::Spine);
    }
    let rev = rep_rev.get(j.checked_sub(1)?)?;
    let w = (j + 1..=m).map(|n| rev[n - j - 1].get(&p.0[n - 1]).copied()).collect::<Option<Vec<_>>>()?;
    Some(PathKind::Replica { j, w })
}

fn build(r: &AbsorptionResult, kind: &PathKind, depth: usize) -> Option<FinitePath> {
    let mut out: Vec<usize> = Vec::with_capacity(depth);
    match kind {
        PathKind::Spine => out.extend(r.spine.get(..depth)?),
        PathKind::Replica { j, w } => {
            out.extend(r.spine.get(..*j)?);
            let levels = r.replica_edges.get(j - 1)?;
            for (k0, &f) in w.iter().enumerate() {
                out.push(*levels.get(k0)?.get(f)?);
            }
        }
        PathKind::Y(_) => return None,
    }
    Some(FinitePath(out))
}

/// Builds `α` at `depth`: `Y` paths go to `(W,F)_1`, paths of `(W,F)_j` go
/// to `(W,F)_{j+1}` with the same `W` coordinates, and `x_∞` is fixed.
pub fn shift_map_alpha(s: &AbsorptionScaffold, r: &AbsorptionResult, depth: usize, cap: usize) -> Result<AlphaMap> {
    let y_edges = r
        .y_edges
        .as_ref()
        .ok_or_else(|| Error::Inconsistent("α needs a non-empty Y".into()))?;
    if depth < 1 || depth > s.depth() {
        return Err(Error::LevelOutOfRange { level: depth, depth: s.depth() });
    }
    let y_rev: Vec<HashMap<usize, usize>> =
        y_edges.iter().map(|es| es.iter().enumerate().map(|(f, &e)| (e, f)).collect()).collect();
    let rep_rev: Vec<Vec<HashMap<usize, usize>>> = r
        .replica_edges
        .iter()
        .map(|levels| levels.iter().map(|es| es.iter().enumerate().map(|(f, &e)| (e, f)).collect()).collect())
        .collect();
    let mut pairs = Vec::new();
    let mut kinds = Vec::new();
    for p in sub_paths(&r.diagram, &r.l_bar, depth - 1, cap)? {
        let kind = classify(r, &y_rev, &rep_rev, &p)
            .ok_or_else(|| Error::Inconsistent(format!("unclassified path {}", r.diagram.path_label(&p))))?;
        let image_kind = match &kind {
            PathKind::Y(w) => PathKind::Replica { j: 1, w: w.clone() },
            PathKind::Replica { j, w } => PathKind::Replica { j: j + 1, w: w.clone() },
            PathKind::Spine => PathKind::Spine,
        };
        let image = build(r, &image_kind, depth)
            .ok_or_else(|| Error::Inconsistent(format!("α leaves the replicas at depth {depth}")))?;
        pairs.push((p, image));
        kinds.push(kind);
    }
    Ok(AlphaMap { depth, pairs, kinds })
}

/// Host-side relations used to test `α`, computed from the scaffold alone.
pub(crate) struct HostRelations<'a> {
    s: &'a AbsorptionScaffold,
    replica_sets: Vec<Vec<HashSet<usize>>>,
}

impl<'a> HostRelations<'a> {
    pub(crate) fn new(s: &'a AbsorptionScaffold) -> Self {
        let replica_sets = s
            .replicas
            .iter()
            .map(|r| r.edges.iter().map(|es| es.iter().copied().collect()).collect())
            .collect();
        Self { s, replica_sets }
    }

    /// `j` when `x` is `e_1..e_j` followed by replica-`j` edges to its end.
    pub(crate) fn replica_of(&self, x: &FinitePath) -> Option<usize> {
        let j = x.0.iter().zip(&self.s.spine).take_while(|(a, b)| a == b).count();
        if j == 0 || j == x.len() {
            return None;
        }
        let sets = self.replica_sets.get(j - 1)?;
        (j + 1..=x.len())
            .all(|n| sets.get(n - j - 1).is_some_and(|set| set.contains(&x.0[n - 1])))
            .then_some(j)
    }

    /// `K_j`: same replica, equal from host coordinate `j + 2`, same terminal.
    pub(crate) fn k_replica(&self, x: &FinitePath, y: &FinitePath) -> bool {
        match (self.replica_of(x), self.replica_of(y)) {
            (Some(a), Some(b)) if a == b => {
                x.0[a + 1..] == y.0[a + 1..] && self.s.host.terminal(x) == self.s.host.terminal(y)
            }
            _ => false,
        }
    }

    /// `K` on `Y`: the template images agree from coordinate 2 with the same terminal.
    pub(crate) fn k_y(&self, x: &FinitePath, y: &FinitePath) -> bool {
        let (Some(a), Some(b)) = (self.w_image(x), self.w_image(y)) else {
            return false;
        };
        let q = &self.s.template.quotient;
        let (ha, hb) = (q.push_forward(&a), q.push_forward(&b));
        ha.0[1.min(ha.len())..] == hb.0[1.min(hb.len())..] && q.target.terminal(&ha) == q.target.terminal(&hb)
    }

    fn w_image(&self, x: &FinitePath) -> Option<FinitePath> {
        let y = self.s.y.as_ref()?;
        x.0.iter().enumerate().map(|(k, &e)| y.preimage_edge(k + 1, e)).collect::<Option<Vec<_>>>().map(FinitePath)
    }
}

impl AlphaMap {
    /// Checks bijectivity onto `(L̄′,Ḡ′)`, the conjugation of `K` to `K_1`
    /// and `K_j` to `K_{j+1}`, and the transport of `R|_Y ∨ K`.
    pub fn check(&self, s: &AbsorptionScaffold, r: &AbsorptionResult, cap: usize) -> Result<AlphaCheck> {
        let host = &s.host;
        let rel = HostRelations::new(s);
        let codomain: HashSet<FinitePath> = sub_paths(&r.diagram, &r.l_bar_prime, self.depth, cap)?.into_iter().collect();
        let images: HashSet<&FinitePath> = self.pairs.iter().map(|(_, b)| b).collect();
        let bijective = images.len() == self.pairs.len()
            && images.len() == codomain.len()
            && images.iter().all(|p| codomain.contains(*p));
        let spine_fixed = self
            .pairs
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == PathKind::Spine)
            .all(|((_, b), _)| b.0[..] == r.spine[..self.depth]);

        let h = |p: &FinitePath| r.quotient.push_forward(p);
        let dom: Vec<FinitePath> = self.pairs.iter().map(|(a, _)| h(a)).collect();
        let cod: Vec<FinitePath> = self.pairs.iter().map(|(_, b)| h(b)).collect();
        let is_y: Vec<bool> = self.kinds.iter().map(|k| matches!(k, PathKind::Y(_))).collect();
        let (mut k_to_k1, mut kj_shift) = (true, true);
        for a in 0..dom.len() {
            for b in 0..dom.len() {
                let before = if is_y[a] && is_y[b] {
                    rel.k_y(&dom[a], &dom[b])
                } else {
                    rel.k_replica(&dom[a], &dom[b])
                };
                let after = rel.k_replica(&cod[a], &cod[b]);
                if before != after {
                    if is_y[a] && is_y[b] {
                        k_to_k1 = false;
                    } else {
                        kj_shift = false;
                    }
                }
            }
        }

        let replica1: HashSet<FinitePath> = sub_paths(host, &s.replica_sub(1), self.depth, cap)?.into_iter().collect();
        let y_img: HashSet<FinitePath> = (0..dom.len()).filter(|&a| is_y[a]).map(|a| cod[a].clone()).collect();
        let y_onto_replica1 = y_img == replica1;

        let ys: Vec<usize> = (0..dom.len()).filter(|&a| is_y[a]).collect();
        let mut uf = UnionFind::new(ys.len());
        for (i, &a) in ys.iter().enumerate() {
            for (k, &b) in ys.iter().enumerate().skip(i + 1) {
                if host.terminal(&dom[a]) == host.terminal(&dom[b]) || rel.k_y(&dom[a], &dom[b]) {
                    uf.union(i, k);
                }
            }
        }
        let mut relation_transported = true;
        for (i, &a) in ys.iter().enumerate() {
            for (k, &b) in ys.iter().enumerate() {
                let joined = uf.find(i) == uf.find(k);
                if joined != (host.terminal(&cod[a]) == host.terminal(&cod[b])) {
                    relation_transported = false;
                }
            }
        }
        Ok(AlphaCheck {
            domain: self.pairs.len(),
            codomain: codomain.len(),
            bijective,
            spine_fixed,
            k_to_k1,
            kj_shift,
            y_onto_replica1,
            relation_transported,
        })
    }
}
