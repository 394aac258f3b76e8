//! Equivalence relations on finite point sets and the transversality
//! machinery between pairs of them.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::report::ValidationReport;

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Class label per element, numbered by first occurrence.
    pub fn labels(&mut self) -> Vec<usize> {
        let mut seen = HashMap::new();
        (0..self.parent.len())
            .map(|x| {
                let r = self.find(x);
                let next = seen.len();
                *seen.entry(r).or_insert(next)
            })
            .collect()
    }
}

/// An equivalence relation on the points `0..len()`, which carry names.
///
/// Classes are stored sorted ascending and ordered by their least point,
/// so equal relations compare equal regardless of how they were built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteEqRel {
    names: Vec<String>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl FiniteEqRel {
    /// Points not covered by `classes` become singletons.
    pub fn from_classes(names: Vec<String>, classes: &[Vec<usize>]) -> Result<Self> {
        let n = names.len();
        let mut label = vec![usize::MAX; n];
        for (c, class) in classes.iter().enumerate() {
            for &x in class {
                if x >= n {
                    return Err(Error::NotPartition(format!("point index {x} out of range")));
                }
                if label[x] != usize::MAX {
                    return Err(Error::NotPartition(format!("point `{}` lies in two classes", names[x])));
                }
                label[x] = c;
            }
        }
        let mut next = classes.len();
        for l in label.iter_mut().filter(|l| **l == usize::MAX) {
            *l = next;
            next += 1;
        }
        Ok(Self::from_labels(names, &label))
    }

    /// Points with equal labels are related.
    pub fn from_labels(names: Vec<String>, labels: &[usize]) -> Self {
        assert_eq!(names.len(), labels.len());
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of = vec![0; labels.len()];
        for (x, l) in labels.iter().enumerate() {
            let c = *index.entry(*l).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[c].push(x);
            class_of[x] = c;
        }
        Self { names, class_of, classes }
    }

    /// Smallest equivalence relation containing `pairs`.
    pub fn generated_by(names: Vec<String>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut uf = UnionFind::new(names.len());
        for (x, y) in pairs {
            uf.union(x, y);
        }
        let labels = uf.labels();
        Self::from_labels(names, &labels)
    }

    pub fn diagonal(names: Vec<String>) -> Self {
        let labels: Vec<usize> = (0..names.len()).collect();
        Self::from_labels(names, &labels)
    }

    pub fn full(names: Vec<String>) -> Self {
        let labels = vec![0; names.len()];
        Self::from_labels(names, &labels)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_index(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn class_of(&self, x: usize) -> &[usize] {
        &self.classes[self.class_of[x]]
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    pub fn is_diagonal(&self) -> bool {
        self.classes.len() == self.names.len()
    }

    /// Number of related ordered pairs, the diagonal included.
    pub fn pair_count(&self) -> usize {
        self.classes.iter().map(|c| c.len() * c.len()).sum()
    }

    /// Ordered pairs, `x` ascending then `y` ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |x| self.class_of(x).iter().map(move |&y| (x, y)))
    }

    pub fn same_points(&self, other: &FiniteEqRel) -> bool {
        self.names == other.names
    }

    /// Every class of `self` lies inside a class of `other`.
    pub fn is_finer_than(&self, other: &FiniteEqRel) -> bool {
        self.same_points(other) && self.classes.iter().all(|c| c.iter().all(|&y| other.related(c[0], y)))
    }

    pub fn meet(&self, other: &FiniteEqRel) -> Result<FiniteEqRel> {
        if !self.same_points(other) {
            return Err(Error::PointSetMismatch);
        }
        let labels: Vec<usize> = (0..self.len()).map(|x| self.class_of[x] * other.classes.len() + other.class_of[x]).collect();
        Ok(Self::from_labels(self.names.clone(), &labels))
    }

    /// Restriction to the points of `subset`, renumbered in the given order.
    pub fn restrict(&self, subset: &[usize]) -> FiniteEqRel {
        let names = subset.iter().map(|&x| self.names[x].clone()).collect();
        let labels: Vec<usize> = subset.iter().map(|&x| self.class_of[x]).collect();
        Self::from_labels(names, &labels)
    }
}

impl fmt::Display for FiniteEqRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .classes
            .iter()
            .map(|c| c.iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "{{{}}}", parts.join(" | "))
    }
}

/// The equivalence relation generated by `r` and `s`.
pub fn join(r: &FiniteEqRel, s: &FiniteEqRel) -> Result<FiniteEqRel> {
    if !r.same_points(s) {
        return Err(Error::PointSetMismatch);
    }
    let mut uf = UnionFind::new(r.len());
    for rel in [r, s] {
        for class in rel.classes() {
            for &y in &class[1..] {
                uf.union(class[0], y);
            }
        }
    }
    let labels = uf.labels();
    Ok(FiniteEqRel::from_labels(r.names.clone(), &labels))
}

/// The map `h` from composable pairs `((x,y),(y,z))` of `R ×_X S` to
/// composable pairs `((x,y'),(y',z))` of `S ×_X R`, stored as `(x,y,z) ↦ y'`.
#[derive(Debug, Clone)]
pub struct TransversalWitness {
    r: FiniteEqRel,
    s: FiniteEqRel,
    h: HashMap<(usize, usize, usize), usize>,
}

/// Why a pair of relations is not transverse, with the offending points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalFailure {
    pub reason: String,
    pub points: Vec<String>,
}

impl fmt::Display for TransversalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at ({})", self.reason, self.points.join(","))
    }
}

pub type TransversalCheck = std::result::Result<TransversalWitness, TransversalFailure>;

impl TransversalWitness {
    pub fn r(&self) -> &FiniteEqRel {
        &self.r
    }

    pub fn s(&self) -> &FiniteEqRel {
        &self.s
    }

    /// `y'` for the composable pair `((x,y),(y,z))`.
    pub fn apply(&self, x: usize, y: usize, z: usize) -> Option<usize> {
        self.h.get(&(x, y, z)).copied()
    }

    /// `#(R ×_X S)`.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Re-checks the witness from scratch: endpoint preservation, bijectivity
    /// of `h`, the product map onto the join, and the transport law that
    /// `y_l ↦ x_l` is a bijection `[y]_S → [x]_S` with `(x_l, y_l) ∈ R`.
    pub fn verify(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let (r, s) = (&self.r, &self.s);
        let mut images = HashSet::with_capacity(self.h.len());
        for (&(x, y, z), &yp) in &self.h {
            if !(r.related(x, y) && s.related(y, z)) {
                report.error(None, r.name(x).to_string(), "h defined off R ×_X S");
            }
            if !(s.related(x, yp) && r.related(yp, z)) {
                report.error(None, r.name(x).to_string(), "h leaves S ×_X R or moves an endpoint");
            }
            images.insert((x, yp, z));
        }
        let target: usize = (0..s.len()).map(|x| s.class_of(x).iter().map(|&y| r.class_of(y).len()).sum::<usize>()).sum();
        if images.len() != self.h.len() || images.len() != target {
            report.error(None, "h", format!("not a bijection: {} pairs onto {} of {}", self.h.len(), images.len(), target));
        }
        if let Ok(joined) = join(r, s) {
            let onto: HashSet<(usize, usize)> = self.h.keys().map(|&(x, _, z)| (x, z)).collect();
            if onto.len() != self.h.len() || onto.len() != joined.pair_count() {
                report.error(None, "r×s", "R ×_X S does not map bijectively onto the join");
            }
        }
        for (x, y) in r.pairs() {
            let mut hit = BTreeSet::new();
            for &yl in s.class_of(y) {
                match self.apply(x, y, yl) {
                    Some(xl) if r.related(xl, yl) && s.related(x, xl) => {
                        hit.insert(xl);
                    }
                    _ => report.error(None, r.name(x).to_string(), "transport label missing"),
                }
            }
            if hit.len() != s.class_of(y).len() || hit.len() != s.class_of(x).len() {
                report.error(None, format!("{},{}", r.name(x), r.name(y)), "transport is not a bijection of S-classes");
            }
        }
        report
    }
}

/// Searches for the witness `h`; every candidate `y'` is found exhaustively
/// and uniqueness is checked rather than assumed.
pub fn find_transversal(r: &FiniteEqRel, s: &FiniteEqRel) -> Result<TransversalCheck> {
    if !r.same_points(s) {
        return Err(Error::PointSetMismatch);
    }
    let fail = |reason: &str, pts: &[usize]| {
        Ok(Err(TransversalFailure {
            reason: reason.to_string(),
            points: pts.iter().map(|&p| r.name(p).to_string()).collect(),
        }))
    };
    for (x, y) in r.pairs() {
        if x != y && s.related(x, y) {
            return fail("R and S share an off-diagonal pair", &[x, y]);
        }
    }
    let mut h = HashMap::new();
    for (x, y) in r.pairs() {
        for &z in s.class_of(y) {
            let candidates: Vec<usize> = s.class_of(x).iter().copied().filter(|&c| r.related(c, z)).collect();
            match candidates.as_slice() {
                [yp] => {
                    h.insert((x, y, z), *yp);
                }
                [] => return fail("no y' for composable pair", &[x, y, z]),
                _ => return fail("several y' for composable pair", &[x, y, z]),
            }
        }
    }
    // reverse direction: every ((x,y'),(y',z)) in S ×_X R has a unique preimage
    for (x, yp) in s.pairs() {
        for &z in r.class_of(yp) {
            let count = r.class_of(x).iter().filter(|&&c| s.related(c, z)).count();
            if count != 1 {
                return fail("h is not onto S ×_X R", &[x, yp, z]);
            }
        }
    }
    let joined = join(r, s)?;
    let mut rs = HashSet::new();
    for &(x, _, z) in h.keys() {
        if !rs.insert((x, z)) {
            return fail("r×s is not injective on R ×_X S", &[x, z]);
        }
    }
    if rs.len() != joined.pair_count() {
        return fail("r×s is not onto the join", &[]);
    }
    Ok(Ok(TransversalWitness { r: r.clone(), s: s.clone(), h }))
}

/// Class-size laws of a transverse pair: `#[x]_S = #[y]_S` whenever `x R y`,
/// and each join class has size `m·n` with `m` R-classes and `n` S-classes.
pub fn class_size_check(w: &TransversalWitness) -> ValidationReport {
    let mut report = ValidationReport::new();
    let (r, s) = (&w.r, &w.s);
    for (x, y) in r.pairs() {
        if s.class_of(x).len() != s.class_of(y).len() {
            report.error(
                None,
                format!("{},{}", r.name(x), r.name(y)),
                format!("#[x]_S = {} but #[y]_S = {}", s.class_of(x).len(), s.class_of(y).len()),
            );
        }
    }
    let joined = join(r, s).expect("witness relations share points");
    for class in joined.classes() {
        let m: BTreeSet<usize> = class.iter().map(|&x| r.class_index(x)).collect();
        let n: BTreeSet<usize> = class.iter().map(|&x| s.class_index(x)).collect();
        if class.len() != m.len() * n.len() {
            report.error(
                None,
                r.name(class[0]).to_string(),
                format!("join class of size {} is not {}·{}", class.len(), m.len(), n.len()),
            );
        }
    }
    report
}

/// Shrinks each `R_n` to the pairs whose `h`-transport stays in `R_n`, so
/// that every level is transverse to `S`.
pub fn transverse_filtration(chain: &[FiniteEqRel], w: &TransversalWitness) -> Result<Vec<FiniteEqRel>> {
    check_chain(chain)?;
    let top = chain.last().expect("non-empty chain");
    if top != w.r() {
        return Err(Error::WitnessMismatch);
    }
    let s = w.s();
    let mut out = Vec::with_capacity(chain.len());
    for rn in chain {
        let pairs: Vec<(usize, usize)> = rn
            .pairs()
            .filter(|&(x, y)| {
                s.class_of(y)
                    .iter()
                    .all(|&z| w.apply(x, y, z).is_some_and(|yp| rn.related(yp, z)))
            })
            .collect();
        let rel = FiniteEqRel::generated_by(rn.names.clone(), pairs.iter().copied());
        if rel.pair_count() != pairs.len() {
            return Err(Error::Inconsistent("shrunken level is not an equivalence relation".into()));
        }
        if let Err(f) = find_transversal(&rel, s)? {
            return Err(Error::NotTransverse(f.to_string()));
        }
        out.push(rel);
    }
    if out.last() != Some(top) {
        return Err(Error::Inconsistent("shrunken chain does not exhaust the top level".into()));
    }
    Ok(out)
}

/// A chain must start at the diagonal and be nested.
pub fn check_chain(chain: &[FiniteEqRel]) -> Result<()> {
    let first = chain.first().ok_or(Error::ChainNotRooted)?;
    if !first.is_diagonal() {
        return Err(Error::ChainNotRooted);
    }
    for (k, w) in chain.windows(2).enumerate() {
        if !w[0].same_points(&w[1]) {
            return Err(Error::PointSetMismatch);
        }
        if !w[0].is_finer_than(&w[1]) {
            return Err(Error::NotNested { index: k + 1 });
        }
    }
    Ok(())
}

/// A permutation of `0..n`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::NotPermutation(format!("image {i} repeated or out of range")));
            }
        }
        Ok(Self(images))
    }

    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                if x >= n || std::mem::replace(&mut used[x], true) {
                    return Err(Error::NotPermutation(format!("point {x} repeated or out of range")));
                }
                images[x] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Self(images))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(x, &y)| x == y)
    }

    pub fn fixed_point(&self) -> Option<usize> {
        self.0.iter().enumerate().position(|(x, &y)| x == y)
    }

    /// Disjoint cycles of length at least two, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.0[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.0[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_notation(&self, names: &[String]) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".into();
        }
        cycles
            .iter()
            .map(|c| format!("({})", c.iter().map(|&x| names[x].as_str()).collect::<Vec<_>>().join(" ")))
            .collect()
    }
}

/// Orbit relation of the group generated by `generators`, which must act
/// freely: a non-identity element with a fixed point is reported.
pub fn relation_from_group_action(names: Vec<String>, generators: &[Permutation]) -> Result<FiniteEqRel> {
    let n = names.len();
    if let Some(g) = generators.iter().find(|g| g.len() != n) {
        return Err(Error::NotPermutation(format!("acts on {} points, expected {n}", g.len())));
    }
    let not_free = |g: &Permutation, x: usize| Error::NotFree {
        point: names[x].clone(),
        element: g.cycle_notation(&names),
    };
    let id = Permutation::identity(n);
    let mut elements: Vec<Permutation> = vec![id.clone()];
    let mut seen: HashSet<Permutation> = [id].into_iter().collect();
    let mut queue: VecDeque<usize> = [0].into_iter().collect();
    while let Some(k) = queue.pop_front() {
        for gen in generators {
            let next = gen.compose(&elements[k]);
            if seen.contains(&next) {
                continue;
            }
            if let Some(x) = next.fixed_point() {
                return Err(not_free(&next, x));
            }
            if elements.len() == n {
                // a free action has at most n elements; two of them agree at point 0
                let clash = elements.iter().find(|e| e.apply(0) == next.apply(0)).expect("pigeonhole");
                let g = clash.inverse().compose(&next);
                return Err(not_free(&g, 0));
            }
            seen.insert(next.clone());
            elements.push(next);
            queue.push_back(elements.len() - 1);
        }
    }
    let pairs = generators.iter().flat_map(|g| (0..n).map(move |x| (x, g.apply(x))));
    Ok(FiniteEqRel::generated_by(names, pairs))
}

/// Point names `"1".."n"`.
pub fn numbered_points(n: usize) -> Vec<String> {
    (1..=n).map(|k| k.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(n: usize, classes: &[&[usize]]) -> FiniteEqRel {
        let classes: Vec<Vec<usize>> = classes.iter().map(|c| c.iter().map(|x| x - 1).collect()).collect();
        FiniteEqRel::from_classes(numbered_points(n), &classes).unwrap()
    }

    #[test]
    fn join_examples() {
        let r = rel(4, &[&[1, 2], &[3, 4]]);
        let s = rel(4, &[&[1, 3], &[2, 4]]);
        assert_eq!(join(&r, &s).unwrap(), FiniteEqRel::full(numbered_points(4)));
        assert_eq!(join(&r, &FiniteEqRel::diagonal(numbered_points(4))).unwrap(), r);
        assert_eq!(join(&r, &rel(3, &[])), Err(Error::PointSetMismatch));
    }

    #[test]
    fn overlapping_classes_rejected() {
        assert!(FiniteEqRel::from_classes(numbered_points(3), &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn product_pair_is_transverse() {
        let r = rel(4, &[&[1, 2], &[3, 4]]);
        let s = rel(4, &[&[1, 3], &[2, 4]]);
        let w = find_transversal(&r, &s).unwrap().unwrap();
        assert_eq!(w.len(), 16);
        assert!(w.verify().is_ok(), "{}", w.verify());
        assert!(class_size_check(&w).is_ok());
    }

    #[test]
    fn diagonal_witness_swaps() {
        let d = FiniteEqRel::diagonal(numbered_points(4));
        let s = rel(4, &[&[1, 3], &[2, 4]]);
        let w = find_transversal(&d, &s).unwrap().unwrap();
        for (x, z) in s.pairs() {
            assert_eq!(w.apply(x, x, z), Some(z));
        }
    }

    #[test]
    fn uneven_classes_fail() {
        let r = rel(4, &[&[1, 2], &[3, 4]]);
        let s = rel(4, &[&[1, 3]]);
        let f = find_transversal(&r, &s).unwrap().unwrap_err();
        assert_eq!(f.points, vec!["2", "1", "3"]);
    }

    #[test]
    fn shared_pair_fails() {
        let r = rel(4, &[&[1, 2], &[3, 4]]);
        let f = find_transversal(&r, &r).unwrap().unwrap_err();
        assert_eq!(f.points, vec!["1", "2"]);
    }

    #[test]
    fn filtration_examples() {
        let pts = numbered_points(8);
        let s = rel(8, &[&[1, 5], &[2, 6], &[3, 7], &[4, 8]]);
        let chain = vec![
            FiniteEqRel::diagonal(pts.clone()),
            rel(8, &[&[1, 2], &[3, 4], &[5, 6], &[7, 8]]),
            rel(8, &[&[1, 2, 3, 4], &[5, 6, 7, 8]]),
        ];
        let w = find_transversal(&chain[2], &s).unwrap().unwrap();
        assert_eq!(transverse_filtration(&chain, &w).unwrap(), chain);

        let skew = vec![chain[0].clone(), rel(8, &[&[1, 2], &[3, 4], &[5, 7], &[6, 8]]), chain[2].clone()];
        let out = transverse_filtration(&skew, &w).unwrap();
        assert!(out[1].is_finer_than(&skew[1]) && out[1] != skew[1]);

        let delta = FiniteEqRel::diagonal(pts);
        let w = find_transversal(&chain[2], &delta).unwrap().unwrap();
        assert_eq!(transverse_filtration(&chain, &w).unwrap(), chain);
    }

    #[test]
    fn chain_checks() {
        let chain = vec![rel(4, &[&[1, 2]]), rel(4, &[&[1, 2, 3]])];
        assert_eq!(check_chain(&chain), Err(Error::ChainNotRooted));
        let chain = vec![rel(4, &[]), rel(4, &[&[1, 2]]), rel(4, &[&[1, 3]])];
        assert_eq!(check_chain(&chain), Err(Error::NotNested { index: 2 }));
    }

    #[test]
    fn group_action_examples() {
        let inv = Permutation::from_cycles(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        let r = relation_from_group_action(numbered_points(4), &[inv]).unwrap();
        assert_eq!(r, rel(4, &[&[1, 3], &[2, 4]]));
        let cyc = Permutation::from_cycles(4, &[vec![0, 1, 2, 3]]).unwrap();
        let r = relation_from_group_action(numbered_points(4), &[cyc]).unwrap();
        assert_eq!(r, FiniteEqRel::full(numbered_points(4)));
        let swap = Permutation::from_cycles(3, &[vec![0, 1]]).unwrap();
        let err = relation_from_group_action(numbered_points(3), &[swap]).unwrap_err();
        assert_eq!(err, Error::NotFree { point: "3".into(), element: "(1 2)".into() });
    }

    #[test]
    fn non_permutations_rejected() {
        assert!(Permutation::from_images(vec![0, 0]).is_err());
        assert!(Permutation::from_cycles(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }
}
