use std::collections::{BTreeSet, HashMap};

use super::alpha::{sub_paths, HostRelations};
use super::{AbsorptionResult, AbsorptionScaffold};
use crate::diagram::{BratteliDiagram, FinitePath};
use crate::error::{Error, Result};
use crate::relations::UnionFind;

/// Which closure to test and at which truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarOptions {
    /// Completeness is tested on pairs cofinal from level `n`.
    pub n: usize,
    /// Truncation depth `N`.
    pub depth: usize,
    /// Indices `j` of the `K_j` left out (negative controls).
    pub skip: Vec<usize>,
    /// Add `K` on `Y` and compare with `R ∨ K` instead of `R`.
    pub with_k: bool,
    /// Enumeration cap for the generator path sets.
    pub cap: usize,
}

impl StarOptions {
    pub fn new(n: usize, depth: usize) -> Self {
        Self { n, depth, skip: Vec::new(), with_k: false, cap: crate::diagram::DEFAULT_ENUMERATION_CAP }
    }
}

/// A pair of host paths showing a failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarWitness {
    /// `"sound"` for a closure pair outside the target relation,
    /// `"complete"` for a cofinal pair the closure misses.
    pub kind: &'static str,
    pub left: String,
    pub right: String,
    pub left_terminal: String,
    pub right_terminal: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarReport {
    pub n: usize,
    pub depth: usize,
    pub sound: bool,
    pub complete: bool,
    /// Whether the closure induces exactly the target partition at depth `N`.
    pub exact: bool,
    /// Number of closure classes on depth-`N` paths.
    pub classes: usize,
    /// Generator pairs used (compressed: unions; exhaustive: related pairs).
    pub generators: usize,
    /// Search states visited by the completeness pass.
    pub states: usize,
    pub witnesses: Vec<StarWitness>,
}

impl StarReport {
    pub fn holds(&self) -> bool {
        self.sound && self.complete
    }
}

const MAX_WITNESSES: usize = 8;

/// `lift[n - 1][(v̄, e)]`: the unique `Ē_n` edge over `e` leaving `v̄`.
fn lift_table(r: &AbsorptionResult) -> Vec<HashMap<(usize, usize), usize>> {
    let d = &r.diagram;
    (1..=d.depth())
        .map(|n| {
            d.edges(n)
                .iter()
                .enumerate()
                .map(|(i, e)| ((e.source, r.quotient.map_edge(n, i)), i))
                .collect()
        })
        .collect()
}

fn lift(d: &BratteliDiagram, table: &[HashMap<(usize, usize), usize>], x: &FinitePath) -> Result<FinitePath> {
    let mut at = 0;
    let mut out = Vec::with_capacity(x.len());
    for (k, &e) in x.0.iter().enumerate() {
        let ebar = *table[k]
            .get(&(at, e))
            .ok_or_else(|| Error::Inconsistent(format!("no lift of edge #{e} at level {}", k + 1)))?;
        at = d.edge(k + 1, ebar).range;
        out.push(ebar);
    }
    Ok(FinitePath(out))
}

fn check_options(s: &AbsorptionScaffold, o: &StarOptions) -> Result<()> {
    if o.depth == 0 || o.depth > s.depth() {
        return Err(Error::LevelOutOfRange { level: o.depth, depth: s.depth() });
    }
    if o.n >= o.depth {
        return Err(Error::Inconsistent(format!("cofinality level {} must lie below depth {}", o.n, o.depth)));
    }
    if o.with_k && s.y.is_none() {
        return Err(Error::Inconsistent("K needs a non-empty Y".into()));
    }
    Ok(())
}

/// Generator pairs at depth `N`, grouped into blocks of mutually related
/// host paths: each `K_j` (unless skipped) and optionally `K` on `Y`.
fn generator_blocks(s: &AbsorptionScaffold, o: &StarOptions) -> Result<Vec<Vec<FinitePath>>> {
    let rel = HostRelations::new(s);
    let mut blocks = Vec::new();
    for j in 1..o.depth.min(s.replicas.len() + 1) {
        if o.skip.contains(&j) {
            continue;
        }
        let mut groups: HashMap<(Vec<usize>, usize), Vec<FinitePath>> = HashMap::new();
        for x in sub_paths(&s.host, &s.replica_sub(j), o.depth, o.cap)? {
            if rel.replica_of(&x) == Some(j) {
                groups.entry((x.0[j + 1..].to_vec(), s.host.terminal(&x))).or_default().push(x);
            }
        }
        blocks.extend(groups.into_values());
    }
    if o.with_k {
        let ys = sub_paths(&s.host, &s.y_sub, o.depth, o.cap)?;
        for a in 0..ys.len() {
            for b in a + 1..ys.len() {
                if rel.k_y(&ys[a], &ys[b]) {
                    blocks.push(vec![ys[a].clone(), ys[b].clone()]);
                }
            }
        }
    }
    Ok(blocks)
}

/// Target partition of host `V_N`: the terminal relation, joined with the
/// terminals of `K` pairs when `with_k` is set.
fn target_classes(s: &AbsorptionScaffold, o: &StarOptions, blocks: &[Vec<FinitePath>]) -> Vec<usize> {
    let mut uf = UnionFind::new(s.host.vertex_count(o.depth));
    if o.with_k {
        for b in blocks {
            for x in &b[1..] {
                uf.union(s.host.terminal(&b[0]), s.host.terminal(x));
            }
        }
    }
    uf.labels()
}

/// Checks `R = R̄ ∨ K_1 ∨ K_2 ∨ …` (or its `K`-augmented form) at depth `N`
/// without enumerating host paths.
///
/// Closure classes are unions of `V̄_N` vertices, since `R̄` is the terminal
/// relation of `(V̄,Ē)`. Soundness compares every union with the target
/// partition under `q̄`. Completeness for pairs cofinal from `n` walks the
/// sets of lifted positions that start in one fibre over `V_n` and follow
/// a common host suffix down to level `N`.
pub fn verify_star(s: &AbsorptionScaffold, r: &AbsorptionResult, o: &StarOptions) -> Result<StarReport> {
    check_options(s, o)?;
    let host = &s.host;
    let d = &r.diagram;
    let big_n = o.depth;
    let table = lift_table(r);
    let blocks = generator_blocks(s, o)?;
    let target = target_classes(s, o, &blocks);
    let mut uf = UnionFind::new(d.vertex_count(big_n));
    let mut witnesses = Vec::new();
    let mut sound = true;
    let mut generators = 0;
    for b in &blocks {
        let first = lift(d, &table, &b[0])?;
        for x in &b[1..] {
            let lx = lift(d, &table, x)?;
            let (u, v) = (d.terminal(&first), d.terminal(&lx));
            generators += 1;
            uf.union(u, v);
            if target[r.quotient.map_vertex(big_n, u)] != target[r.quotient.map_vertex(big_n, v)] {
                sound = false;
                push_witness(&mut witnesses, "sound", host, &b[0], x);
            }
        }
    }
    let labels = uf.labels();

    // exactness: closure classes correspond one-to-one with target classes
    let mut image: HashMap<usize, usize> = HashMap::new();
    let mut back: HashMap<usize, usize> = HashMap::new();
    let mut exact = true;
    for v in 0..d.vertex_count(big_n) {
        let t = target[r.quotient.map_vertex(big_n, v)];
        exact &= *image.entry(labels[v]).or_insert(t) == t;
        exact &= *back.entry(t).or_insert(labels[v]) == labels[v];
    }
    let classes = image.len();

    // completeness: states are (host vertex, set of lifted positions)
    let out = host.out_adjacency();
    let mut complete = true;
    let mut states = 0;
    type State = (usize, Vec<usize>);
    let mut frontier: Vec<(State, usize, Vec<usize>)> = Vec::new();
    for u in 0..host.vertex_count(o.n) {
        let fiber = &r.fibers[o.n][u];
        if fiber.len() > 1 {
            frontier.push(((u, fiber.clone()), u, Vec::new()));
        }
    }
    for m in o.n..big_n {
        let mut next: HashMap<State, (usize, Vec<usize>)> = HashMap::new();
        for ((u, set), origin, suffix) in frontier {
            for &e in &out[m][u] {
                let moved: BTreeSet<usize> = set
                    .iter()
                    .map(|&v| table[m][&(v, e)])
                    .map(|eb| d.edge(m + 1, eb).range)
                    .collect();
                if moved.len() < 2 {
                    continue;
                }
                let key = (host.edge(m + 1, e).range, moved.into_iter().collect());
                next.entry(key).or_insert_with(|| {
                    let mut s = suffix.clone();
                    s.push(e);
                    (origin, s)
                });
            }
        }
        states += next.len();
        frontier = next.into_iter().map(|(k, (o, s))| (k, o, s)).collect();
    }
    frontier.sort();
    let prefixes = root_paths(d);
    for ((_, set), origin, suffix) in &frontier {
        if set.iter().all(|&v| labels[v] == labels[set[0]]) {
            continue;
        }
        complete = false;
        // two fibre points over `origin` whose common suffix lands apart
        let fiber = &r.fibers[o.n][*origin];
        let ends: Vec<(usize, usize)> = fiber
            .iter()
            .map(|&v0| {
                let mut v = v0;
                for (k, &e) in suffix.iter().enumerate() {
                    v = d.edge(o.n + k + 1, table[o.n + k][&(v, e)]).range;
                }
                (v0, v)
            })
            .collect();
        let (a, _) = ends[0];
        if let Some(&(b, _)) = ends.iter().find(|(_, v)| labels[*v] != labels[ends[0].1]) {
            let full = |v0: usize| {
                let mut p = r.quotient.push_forward(&FinitePath(prefixes[o.n][v0].clone())).0;
                p.extend(suffix);
                FinitePath(p)
            };
            push_witness(&mut witnesses, "complete", host, &full(a), &full(b));
        }
    }
    Ok(StarReport { n: o.n, depth: big_n, sound, complete, exact, classes, generators, states, witnesses })
}

fn push_witness(out: &mut Vec<StarWitness>, kind: &'static str, host: &BratteliDiagram, x: &FinitePath, y: &FinitePath) {
    if out.len() < MAX_WITNESSES {
        out.push(StarWitness {
            kind,
            left: host.path_label(x),
            right: host.path_label(y),
            left_terminal: host.vertex_id(x.len(), host.terminal(x)).to_string(),
            right_terminal: host.vertex_id(y.len(), host.terminal(y)).to_string(),
        });
    }
}

/// One root path to every vertex, per level.
fn root_paths(d: &BratteliDiagram) -> Vec<Vec<Vec<usize>>> {
    let mut paths: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new()]];
    for n in 1..=d.depth() {
        let mut level: Vec<Option<Vec<usize>>> = vec![None; d.vertex_count(n)];
        for (i, e) in d.edges(n).iter().enumerate() {
            if level[e.range].is_none() {
                let mut p = paths[n - 1][e.source].clone();
                p.push(i);
                level[e.range] = Some(p);
            }
        }
        paths.push(level.into_iter().map(Option::unwrap_or_default).collect());
    }
    paths
}

/// Same check by brute force over every host path of depth `N`, closing
/// the generators on paths directly. Feasible on small hosts only.
pub fn verify_star_exhaustive(s: &AbsorptionScaffold, r: &AbsorptionResult, o: &StarOptions) -> Result<StarReport> {
    check_options(s, o)?;
    let host = &s.host;
    let big_n = o.depth;
    let paths = host.enumerate_paths(big_n, o.cap)?;
    let index: HashMap<&FinitePath, usize> = paths.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let table = lift_table(r);
    let rel = HostRelations::new(s);
    let mut uf = UnionFind::new(paths.len());
    let mut generators = 0;

    let mut by_lift: HashMap<usize, usize> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        let t = r.diagram.terminal(&lift(&r.diagram, &table, p)?);
        if let Some(&j) = by_lift.get(&t) {
            uf.union(i, j);
        } else {
            by_lift.insert(t, i);
        }
    }
    let mut by_key: HashMap<(usize, Vec<usize>, usize), usize> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        if let Some(j) = rel.replica_of(p) {
            if j < big_n && !o.skip.contains(&j) {
                let key = (j, p.0[j + 1..].to_vec(), host.terminal(p));
                if let Some(&k) = by_key.get(&key) {
                    generators += 1;
                    uf.union(i, k);
                } else {
                    by_key.insert(key, i);
                }
            }
        }
    }
    let mut target = UnionFind::new(paths.len());
    let mut by_terminal: HashMap<usize, usize> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        let t = host.terminal(p);
        match by_terminal.get(&t) {
            Some(&j) => {
                target.union(i, j);
            }
            None => {
                by_terminal.insert(t, i);
            }
        }
    }
    if o.with_k {
        let ys: Vec<usize> = (0..paths.len()).filter(|&i| s.y_sub.contains_path(&paths[i])).collect();
        for &a in &ys {
            for &b in &ys {
                if a < b && rel.k_y(&paths[a], &paths[b]) {
                    generators += 1;
                    uf.union(index[&paths[a]], index[&paths[b]]);
                    target.union(a, b);
                }
            }
        }
    }
    let closure = uf.labels();
    let target = target.labels();

    let mut witnesses = Vec::new();
    let mut rep: HashMap<usize, usize> = HashMap::new();
    let mut sound = true;
    for i in 0..paths.len() {
        let j = *rep.entry(closure[i]).or_insert(i);
        if target[i] != target[j] {
            sound = false;
            push_witness(&mut witnesses, "sound", host, &paths[j], &paths[i]);
        }
    }
    let classes = rep.len();
    let mut complete = true;
    let mut by_suffix: HashMap<&[usize], usize> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        let j = *by_suffix.entry(&p.0[o.n..]).or_insert(i);
        if closure[i] != closure[j] {
            complete = false;
            push_witness(&mut witnesses, "complete", host, &paths[j], p);
        }
    }
    let target_classes: BTreeSet<usize> = target.iter().copied().collect();
    let exact = sound && classes == target_classes.len();
    Ok(StarReport { n: o.n, depth: big_n, sound, complete, exact, classes, generators, states: paths.len(), witnesses })
}

/// Least margin `N - n` at which completeness holds, i.e. `N` minus the
/// largest `n < N` that passes; `None` when no level passes.
pub fn min_margin(s: &AbsorptionScaffold, r: &AbsorptionResult, depth: usize, skip: &[usize]) -> Result<Option<usize>> {
    for n in (0..depth).rev() {
        let o = StarOptions { skip: skip.to_vec(), ..StarOptions::new(n, depth) };
        if verify_star(s, r, &o)?.complete {
            return Ok(Some(depth - n));
        }
    }
    Ok(None)
}
