//! Seeded random instances for property tests, acceptance suites and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::absorption::{capacity_request, Template};
use crate::af::transverse_diagrams;
use crate::diagram::BratteliDiagram;
use crate::error::Result;
use crate::fixtures::layered;
use crate::relations::{numbered_points, relation_from_group_action, FiniteEqRel, Permutation};

/// Two commuting free cyclic actions on a relabelled product `A × B × C`.
#[derive(Debug, Clone)]
pub struct ActionPair {
    pub names: Vec<String>,
    /// Generator of the action shifting the `A` coordinate.
    pub g: Permutation,
    /// Generator of the action shifting the `B` coordinate.
    pub h: Permutation,
}

impl ActionPair {
    pub fn r(&self) -> FiniteEqRel {
        relation_from_group_action(self.names.clone(), std::slice::from_ref(&self.g)).expect("cyclic shifts act freely")
    }

    pub fn s(&self) -> FiniteEqRel {
        relation_from_group_action(self.names.clone(), std::slice::from_ref(&self.h)).expect("cyclic shifts act freely")
    }
}

/// Random absorption input: a template from a transverse pair and a host
/// meeting its capacity request.
#[derive(Debug, Clone)]
pub struct AbsorptionInstance {
    pub chain: Vec<FiniteEqRel>,
    pub s: FiniteEqRel,
    pub template: Template,
    pub host: BratteliDiagram,
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Sizes `(a, b, c)` with `a, b ≥ 2` and `a·b·c ≤ max_points`.
    fn product_sizes(&mut self, max_points: usize, with_c: bool) -> (usize, usize, usize) {
        assert!(max_points >= 4, "need room for two non-trivial factors");
        loop {
            let a = self.rng.gen_range(2..=4);
            let b = self.rng.gen_range(2..=4);
            let c = if with_c { self.rng.gen_range(1..=3) } else { 1 };
            if a * b * c <= max_points {
                return (a, b, c);
            }
        }
    }

    pub fn commuting_actions(&mut self, max_points: usize) -> ActionPair {
        let (a, b, c) = self.product_sizes(max_points, true);
        let n = a * b * c;
        let mut relabel: Vec<usize> = (0..n).collect();
        relabel.shuffle(&mut self.rng);
        let index = |i: usize, j: usize, k: usize| relabel[(i * b + j) * c + k];
        let mut g = vec![0; n];
        let mut h = vec![0; n];
        for i in 0..a {
            for j in 0..b {
                for k in 0..c {
                    g[index(i, j, k)] = index((i + 1) % a, j, k);
                    h[index(i, j, k)] = index(i, (j + 1) % b, k);
                }
            }
        }
        ActionPair {
            names: numbered_points(n),
            g: Permutation::from_images(g).expect("relabelled shift"),
            h: Permutation::from_images(h).expect("relabelled shift"),
        }
    }

    /// A transverse pair `(R, S)` from [`Gen::commuting_actions`].
    pub fn transverse_pair(&mut self, max_points: usize) -> (FiniteEqRel, FiniteEqRel) {
        let p = self.commuting_actions(max_points);
        (p.r(), p.s())
    }

    /// A pair that cannot be transverse: `S` is enlarged by one pair of `R`.
    pub fn non_transverse_pair(&mut self, max_points: usize) -> (FiniteEqRel, FiniteEqRel) {
        let p = self.commuting_actions(max_points);
        let (r, s) = (p.r(), p.s());
        let x = self.rng.gen_range(0..r.len());
        let y = p.g.apply(x);
        let pairs = s.pairs().chain([(x, y)]);
        let s = FiniteEqRel::generated_by(s.names().to_vec(), pairs.collect::<Vec<_>>());
        (r, s)
    }

    /// Nested chain `Δ = R_0 ⊆ … ⊆ R_{len-1}` on `points` points, each step
    /// merging a random selection of classes.
    pub fn chain(&mut self, points: usize, len: usize) -> Vec<FiniteEqRel> {
        let names = numbered_points(points);
        let mut labels: Vec<usize> = (0..points).collect();
        let mut out = vec![FiniteEqRel::diagonal(names.clone())];
        for _ in 1..len {
            let mut classes: Vec<usize> = labels.clone();
            classes.sort_unstable();
            classes.dedup();
            classes.shuffle(&mut self.rng);
            let merges = self.rng.gen_range(0..=classes.len() / 2);
            for pair in classes.chunks(2).take(merges) {
                if let [a, b] = pair {
                    for l in labels.iter_mut().filter(|l| **l == *b) {
                        *l = *a;
                    }
                }
            }
            out.push(FiniteEqRel::from_labels(names.clone(), &labels));
        }
        out
    }

    /// Random refinement steps from `Δ` up to `top`, `len` relations in all,
    /// with the last equal to `top`. When `lead_diagonal`, `R_1 = Δ` too.
    fn chain_below(&mut self, top: &FiniteEqRel, len: usize, lead_diagonal: bool) -> Vec<FiniteEqRel> {
        let names = top.names().to_vec();
        let mut labels: Vec<usize> = (0..top.len()).collect();
        let mut out = vec![FiniteEqRel::diagonal(names.clone())];
        for step in 1..len {
            if step + 1 == len {
                out.push(top.clone());
                break;
            }
            if !(lead_diagonal && step == 1) {
                for class in top.classes() {
                    let head = labels[class[0]];
                    for &x in &class[1..] {
                        if self.rng.gen_bool(0.5) {
                            let old = labels[x];
                            for l in labels.iter_mut().filter(|l| **l == old) {
                                *l = head;
                            }
                        }
                    }
                }
            }
            out.push(FiniteEqRel::from_labels(names.clone(), &labels));
        }
        out
    }

    /// Chain of `2..=max_len` relations whose top is transverse to `S`.
    pub fn transverse_chain(&mut self, max_points: usize, max_len: usize) -> (Vec<FiniteEqRel>, FiniteEqRel) {
        let p = self.commuting_actions(max_points);
        let len = self.rng.gen_range(2..=max_len.max(2));
        let chain = self.chain_below(&p.r(), len, false);
        (chain, p.s())
    }

    /// Random simple host: every pair across consecutive levels is joined
    /// by `1..=max_mult` edges.
    pub fn simple_host(&mut self, depth: usize, max_width: usize, max_mult: usize) -> BratteliDiagram {
        let mut d = BratteliDiagram::with_root("v0");
        for n in 1..=depth {
            let width = self.rng.gen_range(1..=max_width);
            for w in 0..width {
                d.add_vertex(n, format!("h{n}_{w}")).expect("fresh vertex");
            }
            for s in 0..d.vertex_count(n - 1) {
                for w in 0..width {
                    for m in 0..self.rng.gen_range(1..=max_mult) {
                        d.add_edge_by_index(n, format!("e{s}_{w}_{m}"), s, w).expect("fresh edge");
                    }
                }
            }
        }
        d
    }

    /// Template from a transverse pair on at most `max_points` points and a
    /// layered host of `depth` levels with a little slack over the capacity
    /// request.
    pub fn absorption_instance(&mut self, max_points: usize, depth: usize) -> Result<AbsorptionInstance> {
        let (a, b, _) = self.product_sizes(max_points, false);
        let n = a * b;
        let names = numbered_points(n);
        let labels_r: Vec<usize> = (0..n).map(|x| x % b).collect();
        let labels_s: Vec<usize> = (0..n).map(|x| x / b).collect();
        let top = FiniteEqRel::from_labels(names.clone(), &labels_r);
        let s = FiniteEqRel::from_labels(names, &labels_s);
        let chain = self.chain_below(&top, depth + 1, true);
        let td = transverse_diagrams(&chain, &s)?;
        let template = Template::new(td.q)?;
        let req = capacity_request(&template, depth)?;
        let widths: Vec<usize> = req.a.iter().map(|&x| x + self.rng.gen_range(0..=1)).collect();
        let mults: Vec<usize> = req.b.iter().map(|&x| x + self.rng.gen_range(0..=1)).collect();
        Ok(AbsorptionInstance { chain, s, template, host: layered(&widths, &mults) })
    }
}
