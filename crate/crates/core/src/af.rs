//! Truncated AF relations on path sets, the compiler from nested relation
//! chains to diagrams, and the diagram pair attached to a transverse pair.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::diagram::{BratteliDiagram, DiagramQuotient, FinitePath, Strictness};
use crate::error::{Error, Result};
use crate::groupoid::{groupoid_refine, GroupoidPartition, PairLabels};
use crate::relations::{check_chain, find_transversal, join, transverse_filtration, FiniteEqRel, UnionFind};
use crate::report::ValidationReport;

/// Depth-`N` paths grouped by "equal from coordinate `n + 1` on, same terminal".
#[derive(Debug, Clone)]
pub struct AfClasses {
    pub paths: Vec<FinitePath>,
    /// Relation on indices into `paths`.
    pub relation: FiniteEqRel,
}

pub fn af_classes_at(d: &BratteliDiagram, n: usize, depth: usize, cap: usize) -> Result<AfClasses> {
    d.check_level(depth)?;
    if n > depth {
        return Err(Error::LevelOutOfRange { level: n, depth });
    }
    let paths = d.enumerate_paths(depth, cap)?;
    let mut keys: HashMap<(&[usize], usize), usize> = HashMap::new();
    let labels: Vec<usize> = paths
        .iter()
        .map(|p| {
            let next = keys.len();
            *keys.entry((&p.0[n..], d.terminal(p))).or_insert(next)
        })
        .collect();
    let names = paths.iter().map(|p| d.path_label(p)).collect();
    let relation = FiniteEqRel::from_labels(names, &labels);
    let counts = d.count_paths(n)?.counts;
    for class in relation.classes() {
        let head = paths[class[0]].prefix(n);
        if BigUint::from(class.len()) != counts[d.terminal(&head)] {
            return Err(Error::Inconsistent(format!(
                "class of {} has size {}, expected {}",
                d.path_label(&paths[class[0]]),
                class.len(),
                counts[d.terminal(&head)]
            )));
        }
    }
    Ok(AfClasses { paths, relation })
}

/// The map `F` from points to depth-`M` paths of a compiled diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCoding {
    paths: Vec<FinitePath>,
    index: HashMap<FinitePath, usize>,
}

impl PathCoding {
    pub fn path(&self, x: usize) -> &FinitePath {
        &self.paths[x]
    }

    pub fn point(&self, p: &FinitePath) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Relation on points induced by a relation on paths.
    pub fn pull_relation(&self, classes: &AfClasses) -> Result<Vec<usize>> {
        let pos: HashMap<&FinitePath, usize> = classes.paths.iter().enumerate().map(|(k, p)| (p, k)).collect();
        self.paths
            .iter()
            .map(|p| {
                pos.get(p)
                    .map(|&k| classes.relation.class_index(k))
                    .ok_or_else(|| Error::Inconsistent("coded path missing from the diagram".into()))
            })
            .collect()
    }
}

/// Output of the chain compiler.
#[derive(Debug, Clone)]
pub struct CompiledChain {
    pub diagram: BratteliDiagram,
    pub coding: PathCoding,
    /// `partitions[n - 1]` is the groupoid partition of `R_n`.
    pub partitions: Vec<GroupoidPartition>,
}

/// Extra pair decoration on top of the previous level's graphs; used to
/// force refinements such as `{Δ, R∖Δ, S∖Δ, rest}`.
pub type PairBlock<'a> = &'a dyn Fn(usize, usize, usize) -> usize;

/// Compiles `Δ = R_0 ⊆ R_1 ⊆ … ⊆ R_M` into a depth-`M` diagram.
///
/// Level `n` vertices are the towers of a groupoid partition of `R_n` that
/// refines the previous partition's graphs plus `R_n ∖ R_{n-1}` and has
/// singleton floors' point decoration; level `n` edges are floors modulo
/// the graphs that already lie in `R_{n-1}`.
pub fn diagram_from_filtration(chain: &[FiniteEqRel]) -> Result<CompiledChain> {
    diagram_from_filtration_with(chain, &|_, _, _| 0)
}

pub fn diagram_from_filtration_with(chain: &[FiniteEqRel], block: PairBlock<'_>) -> Result<CompiledChain> {
    check_chain(chain)?;
    let points = chain[0].len();
    let names = chain[0].names().to_vec();
    let mut d = BratteliDiagram::with_root("v0");
    let mut partitions: Vec<GroupoidPartition> = Vec::with_capacity(chain.len() - 1);
    let mut coding: Vec<Vec<usize>> = vec![Vec::with_capacity(chain.len() - 1); points];
    let singletons: Vec<usize> = (0..points).collect();
    for n in 1..chain.len() {
        let (prev, cur) = (&chain[n - 1], &chain[n]);
        let prev_graph = |x: usize, y: usize| -> Option<usize> {
            if !prev.related(x, y) {
                return None;
            }
            match partitions.last() {
                None => Some(0),
                Some(p) => {
                    let g = p.graph_of(x, y)?;
                    Some(graph_index(p, g.tower, g.from, g.to))
                }
            }
        };
        let mut labels = PairLabels::with_capacity(cur.pair_count());
        let mut intern: HashMap<(Option<usize>, usize), usize> = HashMap::new();
        for (x, y) in cur.pairs() {
            let key = (prev_graph(x, y), block(n, x, y));
            let next = intern.len();
            labels.insert((x, y), *intern.entry(key).or_insert(next));
        }
        let part = groupoid_refine(cur, &labels, &singletons)?;
        for (t, _) in part.towers().iter().enumerate() {
            d.add_vertex(n, format!("t{t}"))?;
        }
        let mut edge_of_floor: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tower) in part.towers().iter().enumerate() {
            let h = tower.height();
            let mut uf = UnionFind::new(h);
            let rep = &tower.classes[0];
            for i in 0..h {
                for j in 0..h {
                    if prev.related(rep[i], rep[j]) {
                        uf.union(i, j);
                    }
                }
            }
            let comp = uf.labels();
            let mut first_edge: HashMap<usize, usize> = HashMap::new();
            for (i, &c) in comp.iter().enumerate() {
                let e = match first_edge.get(&c) {
                    Some(&e) => e,
                    None => {
                        let source = source_tower(&partitions, &tower.floor(i))?;
                        let idx = d.edges(n).len();
                        d.add_edge_by_index(n, format!("e{idx}"), source, t)?;
                        first_edge.insert(c, idx);
                        idx
                    }
                };
                edge_of_floor.insert((t, i), e);
            }
        }
        for (x, code) in coding.iter_mut().enumerate() {
            let s = part.slot(x);
            code.push(edge_of_floor[&(s.tower, s.floor)]);
        }
        partitions.push(part);
    }
    let paths: Vec<FinitePath> = coding.into_iter().map(FinitePath).collect();
    let mut index = HashMap::with_capacity(paths.len());
    for (x, p) in paths.iter().enumerate() {
        if !d.is_path(p) {
            return Err(Error::Inconsistent(format!("code of `{}` is not a path", names[x])));
        }
        if index.insert(p.clone(), x).is_some() {
            return Err(Error::NotBijective(format!("two points share the code of `{}`", names[x])));
        }
    }
    let total = d.count_paths(d.depth())?.total();
    if total != BigUint::from(paths.len()) {
        return Err(Error::NotBijective(format!("{} points but {total} paths", paths.len())));
    }
    Ok(CompiledChain { diagram: d, coding: PathCoding { paths, index }, partitions })
}

fn graph_index(p: &GroupoidPartition, tower: usize, from: usize, to: usize) -> usize {
    let offset: usize = p.towers()[..tower].iter().map(|t| t.height() * t.height()).sum();
    offset + from * p.towers()[tower].height() + to
}

fn source_tower(partitions: &[GroupoidPartition], floor: &[usize]) -> Result<usize> {
    let Some(prev) = partitions.last() else { return Ok(0) };
    let t = prev.slot(floor[0]).tower;
    if floor.iter().any(|&x| prev.slot(x).tower != t) {
        return Err(Error::Inconsistent("floor straddles two towers of the previous level".into()));
    }
    Ok(t)
}

/// Checks the compiled diagram against its chain: level-1 multiplicities
/// equal tower heights, heights satisfy `h̃ = Σ t_i h_i`, class sizes are
/// bounded by the largest height, and `F` carries each `R_n` onto the
/// level-`n` AF classes.
pub fn check_compiled(chain: &[FiniteEqRel], c: &CompiledChain, cap: usize) -> Result<ValidationReport> {
    let mut report = ValidationReport::new();
    let d = &c.diagram;
    let height = |n: usize, v: usize| if n == 0 { 1 } else { c.partitions[n - 1].towers()[v].height() };
    for n in 1..=d.depth() {
        let mut sums = vec![0usize; d.vertex_count(n)];
        for e in d.edges(n) {
            sums[e.range] += height(n - 1, e.source);
        }
        for (v, s) in sums.iter().enumerate() {
            if *s != height(n, v) {
                report.error(Some(n), d.vertex_id(n, v).to_string(), format!("height {} but Σ t_i h_i = {s}", height(n, v)));
            }
        }
        let max_h = (0..d.vertex_count(n)).map(|v| height(n, v)).max().unwrap_or(0);
        if chain[n].classes().iter().any(|cl| cl.len() > max_h) {
            report.error(Some(n), "R_n", "class larger than every tower");
        }
    }
    for n in 0..=d.depth() {
        let classes = af_classes_at(d, n, d.depth(), cap)?;
        let labels = c.coding.pull_relation(&classes)?;
        let pulled = FiniteEqRel::from_labels(chain[n].names().to_vec(), &labels);
        if pulled != chain[n] {
            report.error(Some(n), "F", format!("AF_{n} pulls back to {pulled}, expected {}", chain[n]));
        }
    }
    Ok(report)
}

/// The diagrams `d`, `d′` of a transverse pair and the quotient between them.
#[derive(Debug, Clone)]
pub struct TransverseDiagrams {
    /// Whether a leading Δ was inserted so that `R_1 = Δ`.
    pub shifted: bool,
    /// The chain actually compiled (after the shift and the transverse shrinkage).
    pub chain: Vec<FiniteEqRel>,
    pub chain_prime: Vec<FiniteEqRel>,
    pub s: FiniteEqRel,
    pub d: CompiledChain,
    pub d_prime: CompiledChain,
    pub q: DiagramQuotient,
}

pub fn transverse_diagrams(chain: &[FiniteEqRel], s: &FiniteEqRel) -> Result<TransverseDiagrams> {
    check_chain(chain)?;
    let mut chain = chain.to_vec();
    let shifted = chain.len() < 2 || !chain[1].is_diagonal();
    if shifted {
        chain.insert(0, chain[0].clone());
    }
    let top = chain.last().expect("non-empty").clone();
    let w = match find_transversal(&top, s)? {
        Ok(w) => w,
        Err(f) => return Err(Error::NotTransverse(f.to_string())),
    };
    let chain = transverse_filtration(&chain, &w)?;
    let mut chain_prime = vec![chain[0].clone()];
    for rn in &chain[1..] {
        chain_prime.push(join(rn, s)?);
    }
    let d = diagram_from_filtration(&chain)?;
    let four_block = |n: usize, x: usize, y: usize| {
        let rn = &chain[n];
        match (x == y, rn.related(x, y), s.related(x, y)) {
            (true, _, _) => 0,
            (false, true, _) => 1,
            (false, false, true) => 2,
            _ => 3,
        }
    };
    let d_prime = diagram_from_filtration_with(&chain_prime, &four_block)?;
    let q = build_quotient(&d, &d_prime)?;
    let report = q.validate();
    if let Some(e) = report.first_error() {
        return Err(Error::Inconsistent(format!("transverse quotient fails: {e}")));
    }
    Ok(TransverseDiagrams { shifted, chain, chain_prime, s: s.clone(), d, d_prime, q })
}

fn build_quotient(d: &CompiledChain, dp: &CompiledChain) -> Result<DiagramQuotient> {
    let (src, tgt) = (&d.diagram, &dp.diagram);
    let points = d.coding.len();
    let depth = src.depth();
    let mut vertex_map: Vec<Vec<Option<usize>>> = (0..=depth).map(|n| vec![None; src.vertex_count(n)]).collect();
    let mut edge_map: Vec<Vec<Option<usize>>> = (1..=depth).map(|n| vec![None; src.edges(n).len()]).collect();
    vertex_map[0][0] = Some(0);
    for x in 0..points {
        let (p, pp) = (d.coding.path(x), dp.coding.path(x));
        for n in 1..=depth {
            let (e, ep) = (p.0[n - 1], pp.0[n - 1]);
            let (v, vp) = (src.edge(n, e).range, tgt.edge(n, ep).range);
            for (slot, image, what) in [(&mut edge_map[n - 1][e], ep, "q_E"), (&mut vertex_map[n][v], vp, "q_V")] {
                match slot {
                    None => *slot = Some(image),
                    Some(old) if *old == image => {}
                    Some(_) => {
                        return Err(Error::Inconsistent(format!("{what} is not well defined at level {n}")));
                    }
                }
            }
        }
    }
    let unwrap = |m: Vec<Vec<Option<usize>>>| -> Result<Vec<Vec<usize>>> {
        m.into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Inconsistent("quotient undefined on an unused vertex or edge".into()))
    };
    DiagramQuotient::new(src.clone(), tgt.clone(), unwrap(vertex_map)?, unwrap(edge_map)?, Strictness::Full)
}

impl TransverseDiagrams {
    /// `S` read back from `AF_1` of `d′` through its coding.
    pub fn check_s_is_af1(&self, cap: usize) -> Result<bool> {
        let dp = &self.d_prime;
        let classes = af_classes_at(&dp.diagram, 1, dp.diagram.depth(), cap)?;
        let labels = dp.coding.pull_relation(&classes)?;
        Ok(FiniteEqRel::from_labels(self.s.names().to_vec(), &labels) == self.s)
    }

    /// Closure of `AF_1(d′)` and the lifted terminal relation of `d` equals
    /// the terminal relation of `d′` at full depth.
    pub fn check_joint_generation(&self, cap: usize) -> Result<bool> {
        let dp = &self.d_prime.diagram;
        let depth = dp.depth();
        let af1 = af_classes_at(dp, 1, depth, cap)?;
        let full = af_classes_at(dp, depth, depth, cap)?;
        let bij = self.q.lift_paths(depth, cap)?;
        let pos: HashMap<&FinitePath, usize> = af1.paths.iter().enumerate().map(|(k, p)| (p, k)).collect();
        let mut uf = UnionFind::new(af1.paths.len());
        for class in af1.relation.classes() {
            for &y in &class[1..] {
                uf.union(class[0], y);
            }
        }
        let d = &self.d.diagram;
        let mut by_terminal: HashMap<usize, usize> = HashMap::new();
        for (src, tgt) in bij.pairs() {
            let k = pos[tgt];
            match by_terminal.get(&d.terminal(src)) {
                Some(&first) => {
                    uf.union(first, k);
                }
                None => {
                    by_terminal.insert(d.terminal(src), k);
                }
            }
        }
        let closure = FiniteEqRel::from_labels(af1.relation.names().to_vec(), &uf.labels());
        Ok(closure == full.relation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{loop1, odo2, tree2};
    use crate::matrix::IncidenceMatrix;
    use crate::relations::numbered_points;

    fn rel(n: usize, classes: &[&[usize]]) -> FiniteEqRel {
        let classes: Vec<Vec<usize>> = classes.iter().map(|c| c.iter().map(|x| x - 1).collect()).collect();
        FiniteEqRel::from_classes(numbered_points(n), &classes).unwrap()
    }

    #[test]
    fn af_class_examples() {
        let d = odo2(3);
        let sizes = |n| {
            let c = af_classes_at(&d, n, 3, 100).unwrap();
            c.relation.classes().iter().map(Vec::len).collect::<Vec<_>>()
        };
        assert_eq!(sizes(0), vec![1; 8]);
        assert_eq!(sizes(1), vec![2; 4]);
        assert_eq!(sizes(3), vec![8]);
    }

    #[test]
    fn four_point_chain() {
        let chain = vec![rel(4, &[]), rel(4, &[&[1, 2], &[3, 4]]), rel(4, &[&[1, 2, 3, 4]])];
        let c = diagram_from_filtration(&chain).unwrap();
        let d = &c.diagram;
        assert_eq!(d.incidence_matrix(1).unwrap(), IncidenceMatrix::from_rows(vec![vec![2, 2]]));
        assert_eq!(d.incidence_matrix(2).unwrap(), IncidenceMatrix::from_rows(vec![vec![1], vec![1]]));
        assert!(check_compiled(&chain, &c, 100).unwrap().is_ok());
    }

    #[test]
    fn diagonal_chain() {
        let chain = vec![rel(3, &[]); 3];
        let c = diagram_from_filtration(&chain).unwrap();
        assert!((1..=2).all(|n| c.diagram.vertex_count(n) == 3));
        assert!(check_compiled(&chain, &c, 100).unwrap().is_ok());
    }

    #[test]
    fn rejects_unrooted_chain() {
        let chain = vec![rel(2, &[&[1, 2]])];
        assert!(matches!(diagram_from_filtration(&chain), Err(Error::ChainNotRooted)));
    }

    #[test]
    fn two_point_loop() {
        let y = FiniteEqRel::diagonal(numbered_points(2));
        let k = FiniteEqRel::full(numbered_points(2));
        let t = transverse_diagrams(&vec![y; 4], &k).unwrap();
        assert!(!t.shifted);
        assert!(t.d.diagram.same_shape(&tree2(3)));
        assert!(t.d_prime.diagram.same_shape(&loop1(3)));
        assert!(t.q.validate().is_ok());
        assert!(t.check_s_is_af1(100).unwrap());
        assert!(t.check_joint_generation(100).unwrap());
    }

    #[test]
    fn trivial_s_gives_identity() {
        let chain = vec![rel(4, &[]), rel(4, &[]), rel(4, &[&[1, 2], &[3, 4]])];
        let t = transverse_diagrams(&chain, &rel(4, &[])).unwrap();
        assert_eq!(t.d.diagram, t.d_prime.diagram);
        assert_eq!(t.q.vertex_map, DiagramQuotient::identity(&t.d.diagram).vertex_map);
        assert_eq!(t.q.edge_map, DiagramQuotient::identity(&t.d.diagram).edge_map);
    }

    #[test]
    fn shift_example() {
        let s = rel(8, &[&[1, 5], &[2, 6], &[3, 7], &[4, 8]]);
        let chain = vec![rel(8, &[]), rel(8, &[&[1, 2], &[3, 4], &[5, 6], &[7, 8]]), rel(8, &[&[1, 2, 3, 4], &[5, 6, 7, 8]])];
        let t = transverse_diagrams(&chain, &s).unwrap();
        assert!(t.shifted);
        assert_eq!(t.d.diagram.depth(), 3);
        assert!(t.check_s_is_af1(1000).unwrap());
        assert!(t.check_joint_generation(1000).unwrap());
    }

    #[test]
    fn non_transverse_rejected() {
        let chain = vec![rel(4, &[]), rel(4, &[]), rel(4, &[&[1, 2], &[3, 4]])];
        let s = rel(4, &[&[1, 2]]);
        assert!(matches!(transverse_diagrams(&chain, &s), Err(Error::NotTransverse(_))));
    }
}
