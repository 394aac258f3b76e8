//! Groupoid partitions of a finite equivalence relation: towers of floors
//! joined by the partial bijections ("graphs") between them.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::relations::FiniteEqRel;
use crate::report::ValidationReport;

/// Block labels for the ordered pairs of a relation.
pub type PairLabels = HashMap<(usize, usize), usize>;

/// Decorated type of a class: size, point labels in ascending point order,
/// and the row-major matrix of pair labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ClassType {
    points: Vec<usize>,
    pairs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    /// The host classes of this type, each in canonical (ascending) order.
    pub classes: Vec<Vec<usize>>,
}

impl Tower {
    pub fn height(&self) -> usize {
        self.classes[0].len()
    }

    /// Points of floor `i`.
    pub fn floor(&self, i: usize) -> Vec<usize> {
        self.classes.iter().map(|c| c[i]).collect()
    }

    /// Pairs `(x, y)` of the graph from floor `i` to floor `j`.
    pub fn graph(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        self.classes.iter().map(|c| (c[i], c[j])).collect()
    }
}

/// Location of a point: tower, floor (position in its class), class within the tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub tower: usize,
    pub floor: usize,
    pub class: usize,
}

/// Identifier of a graph `(A, γ, B)`: tower with source and target floors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphId {
    pub tower: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidPartition {
    host: FiniteEqRel,
    towers: Vec<Tower>,
    slots: Vec<Slot>,
}

impl GroupoidPartition {
    pub fn host(&self) -> &FiniteEqRel {
        &self.host
    }

    pub fn towers(&self) -> &[Tower] {
        &self.towers
    }

    pub fn slot(&self, x: usize) -> Slot {
        self.slots[x]
    }

    pub fn floor_count(&self) -> usize {
        self.towers.iter().map(Tower::height).sum()
    }

    pub fn graph_count(&self) -> usize {
        self.towers.iter().map(|t| t.height() * t.height()).sum()
    }

    /// The graph containing `(x, y)`, when the pair lies in the host.
    pub fn graph_of(&self, x: usize, y: usize) -> Option<GraphId> {
        if !self.host.related(x, y) {
            return None;
        }
        let (a, b) = (self.slots[x], self.slots[y]);
        Some(GraphId { tower: a.tower, from: a.floor, to: b.floor })
    }

    /// Checks the structural laws: graphs partition the host pairs, graphs
    /// on the diagonal are identities, floors of a tower have equal size,
    /// and graphs compose and invert inside their tower.
    pub fn check(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let mut covered = 0usize;
        for (t, tower) in self.towers.iter().enumerate() {
            let h = tower.height();
            if tower.classes.iter().any(|c| c.len() != h) {
                report.error(None, format!("tower {t}"), "floors of unequal size");
                continue;
            }
            for i in 0..h {
                for j in 0..h {
                    let g = tower.graph(i, j);
                    covered += g.len();
                    for &(x, y) in &g {
                        if !self.host.related(x, y) {
                            report.error(None, format!("tower {t}"), "graph leaves the host relation");
                        }
                        if i == j && x != y {
                            report.error(None, format!("tower {t}"), "diagonal graph is not an identity");
                        }
                        if self.graph_of(y, x) != Some(GraphId { tower: t, from: j, to: i }) {
                            report.error(None, format!("tower {t}"), "inverse graph missing");
                        }
                    }
                    for k in 0..h {
                        // (i→j)·(j→k) must be exactly the graph i→k
                        let composed: Vec<(usize, usize)> =
                            tower.classes.iter().map(|c| (c[i], c[k])).collect();
                        if composed != tower.graph(i, k) {
                            report.error(None, format!("tower {t}"), "graphs do not compose");
                        }
                    }
                }
            }
        }
        if covered != self.host.pair_count() {
            report.error(None, "graphs", format!("cover {covered} of {} pairs", self.host.pair_count()));
        }
        report
    }
}

/// Groupoid partition of `host` finer than `pair_labels` whose floors refine
/// `point_labels`. Classes are typed by their decorated label pattern in
/// ascending point order; equal types share a tower.
pub fn groupoid_refine(host: &FiniteEqRel, pair_labels: &PairLabels, point_labels: &[usize]) -> Result<GroupoidPartition> {
    if point_labels.len() != host.len() {
        return Err(Error::NotPartition(format!(
            "{} point labels for {} points",
            point_labels.len(),
            host.len()
        )));
    }
    if pair_labels.len() != host.pair_count() {
        return Err(Error::NotPartition(format!(
            "{} pair labels for {} pairs",
            pair_labels.len(),
            host.pair_count()
        )));
    }
    let mut towers: Vec<Tower> = Vec::new();
    let mut index: HashMap<ClassType, usize> = HashMap::new();
    let mut slots = vec![Slot { tower: 0, floor: 0, class: 0 }; host.len()];
    for class in host.classes() {
        let mut pairs = Vec::with_capacity(class.len() * class.len());
        for &x in class {
            for &y in class {
                let label = pair_labels.get(&(x, y)).ok_or_else(|| {
                    Error::NotPartition(format!("pair ({},{}) has no label", host.name(x), host.name(y)))
                })?;
                pairs.push(*label);
            }
        }
        let ty = ClassType { points: class.iter().map(|&x| point_labels[x]).collect(), pairs };
        let t = *index.entry(ty).or_insert_with(|| {
            towers.push(Tower { classes: Vec::new() });
            towers.len() - 1
        });
        let c = towers[t].classes.len();
        for (floor, &x) in class.iter().enumerate() {
            slots[x] = Slot { tower: t, floor, class: c };
        }
        towers[t].classes.push(class.clone());
    }
    Ok(GroupoidPartition { host: host.clone(), towers, slots })
}

/// Pair labels that are constant on the whole relation.
pub fn uniform_pair_labels(host: &FiniteEqRel) -> PairLabels {
    host.pairs().map(|p| (p, 0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::numbered_points;

    #[test]
    fn diagonal_gives_height_one_towers() {
        let d = FiniteEqRel::diagonal(numbered_points(3));
        let p = groupoid_refine(&d, &uniform_pair_labels(&d), &[0; 3]).unwrap();
        assert_eq!(p.towers().len(), 1);
        assert_eq!(p.towers()[0].height(), 1);
        assert!(p.check().is_ok());
    }

    #[test]
    fn singleton_point_labels_split_towers() {
        let r = FiniteEqRel::from_classes(numbered_points(4), &[vec![0, 1], vec![2, 3]]).unwrap();
        let p = groupoid_refine(&r, &uniform_pair_labels(&r), &[0, 1, 2, 3]).unwrap();
        assert_eq!(p.towers().len(), 2);
        assert!(p.towers().iter().all(|t| t.height() == 2));
        assert!(p.check().is_ok());
    }

    #[test]
    fn full_relation_is_one_tower() {
        let r = FiniteEqRel::full(numbered_points(4));
        let p = groupoid_refine(&r, &uniform_pair_labels(&r), &[0; 4]).unwrap();
        assert_eq!(p.towers().len(), 1);
        assert_eq!(p.towers()[0].height(), 4);
        assert_eq!(p.graph_count(), 16);
        assert!(p.check().is_ok());
    }

    #[test]
    fn incomplete_labels_rejected() {
        let r = FiniteEqRel::full(numbered_points(2));
        let mut labels = uniform_pair_labels(&r);
        labels.remove(&(0, 1));
        assert!(groupoid_refine(&r, &labels, &[0, 0]).is_err());
        assert!(groupoid_refine(&r, &uniform_pair_labels(&r), &[0]).is_err());
    }
}
