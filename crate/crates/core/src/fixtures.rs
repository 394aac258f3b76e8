//! Small named diagrams used by tests, benches and the CLI.

use crate::diagram::{BratteliDiagram, DiagramQuotient, Strictness};

/// One vertex `u_n` per level joined by two parallel edges `a`, `b`.
pub fn odo2(depth: usize) -> BratteliDiagram {
    let mut d = BratteliDiagram::with_root("v0");
    for n in 1..=depth {
        let (prev, cur) = (level_id("u", n - 1), level_id("u", n));
        d.add_vertex(n, cur.clone()).expect("fresh vertex");
        d.add_edge(n, "a", &prev, &cur).expect("fresh edge");
        d.add_edge(n, "b", &prev, &cur).expect("fresh edge");
    }
    d
}

/// Two disjoint chains `x_n` and `y_n` leaving the root.
pub fn tree2(depth: usize) -> BratteliDiagram {
    let mut d = BratteliDiagram::with_root("v0");
    for n in 1..=depth {
        for (branch, edge) in [("x", "a"), ("y", "b")] {
            let cur = level_id(branch, n);
            d.add_vertex(n, cur.clone()).expect("fresh vertex");
            d.add_edge(n, edge, &level_id(branch, n - 1), &cur).expect("fresh edge");
        }
    }
    d
}

/// Two loop edges `l0`, `l1` from the root to `z_1`, then a single chain.
pub fn loop1(depth: usize) -> BratteliDiagram {
    let mut d = BratteliDiagram::with_root("v0");
    for n in 1..=depth {
        let (prev, cur) = (level_id("z", n - 1), level_id("z", n));
        d.add_vertex(n, cur.clone()).expect("fresh vertex");
        if n == 1 {
            d.add_edge(1, "l0", &prev, &cur).expect("fresh edge");
            d.add_edge(1, "l1", &prev, &cur).expect("fresh edge");
        } else {
            d.add_edge(n, "c", &prev, &cur).expect("fresh edge");
        }
    }
    d
}

/// Folds the two chains of [`tree2`] onto [`loop1`].
pub fn q2(depth: usize) -> DiagramQuotient {
    let src = tree2(depth);
    let tgt = loop1(depth);
    let vertex_map = (0..=depth).map(|n| vec![0; src.vertex_count(n)]).collect();
    let edge_map = (1..=depth).map(|n| if n == 1 { vec![0, 1] } else { vec![0, 0] }).collect();
    DiagramQuotient::new(src, tgt, vertex_map, edge_map, Strictness::Full).expect("maps are total")
}

/// Complete diagram: `width` vertices per level, `mult` parallel edges
/// between every pair of consecutive vertices.
pub fn complete(width: usize, mult: usize, depth: usize) -> BratteliDiagram {
    layered(&vec![width; depth], &vec![mult; depth])
}

/// Complete diagram with `widths[n - 1]` vertices at level `n` and
/// `mults[n - 1]` parallel edges between every pair across `E_n`.
pub fn layered(widths: &[usize], mults: &[usize]) -> BratteliDiagram {
    assert_eq!(widths.len(), mults.len(), "one multiplicity per level");
    let mut d = BratteliDiagram::with_root("v0");
    for (k, (&width, &mult)) in widths.iter().zip(mults).enumerate() {
        let n = k + 1;
        for w in 0..width {
            d.add_vertex(n, format!("k{n}_{w}")).expect("fresh vertex");
        }
        let sources = d.vertex_count(n - 1);
        for s in 0..sources {
            for w in 0..width {
                for m in 0..mult {
                    d.add_edge_by_index(n, format!("e{s}_{w}_{m}"), s, w).expect("fresh edge");
                }
            }
        }
    }
    d
}

fn level_id(prefix: &str, n: usize) -> String {
    if n == 0 {
        "v0".to_string()
    } else {
        format!("{prefix}{n}")
    }
}
