//! Builtin weighted graphs with their known exponents, named `fig1711` to
//! `fig1724`.
//!
//! Slot 1 carries the increment kernel, slot 2 the second-difference kernel.

use super::affine::Affine;
use super::graph::WeightedGraph;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub graph: WeightedGraph,
    pub expected: Affine,
    /// The functional used by the chaos oracle, with `j` ranging over `[n-1]`.
    pub functional: &'static str,
}

fn vertices(n: usize) -> WeightedGraph {
    WeightedGraph::new((0..n).map(|i| format!("v{i}")))
}

fn single(q1: u32, q2: u32) -> WeightedGraph {
    let mut g = vertices(1);
    g.q[0] = [q1, q2];
    g
}

fn build(n: usize, q: &[[u32; 2]], edges: &[(usize, usize, u32)]) -> WeightedGraph {
    let mut g = vertices(n);
    g.q.copy_from_slice(q);
    for &(u, v, w) in edges {
        g.add_theta(u, 2, v, 2, w).expect("catalog edge");
    }
    g
}

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    let e = Affine::frac;
    vec![
        CatalogEntry {
            name: "fig1711",
            graph: single(0, 2),
            expected: e(1, 2, -2),
            functional: "sum_j I_2(d_j d_j)",
        },
        CatalogEntry {
            name: "fig1712",
            graph: single(2, 1),
            expected: e(0, 1, -2),
            functional: "sum_j I_3(1_j 1_j d_j)",
        },
        CatalogEntry {
            name: "fig1713",
            graph: single(1, 0),
            expected: e(0, 1, 0),
            functional: "sum_j I_1(1_j)",
        },
        CatalogEntry {
            name: "fig1714",
            graph: single(0, 1),
            expected: e(1, 2, -1),
            functional: "sum_j I_1(d_j)",
        },
        CatalogEntry {
            name: "fig1715",
            graph: single(1, 1),
            expected: e(0, 1, -1),
            functional: "sum_j I_2(1_j d_j)",
        },
        CatalogEntry {
            name: "fig1716",
            graph: single(0, 0),
            expected: e(1, 1, 0),
            functional: "sum_j 1",
        },
        CatalogEntry {
            name: "fig1717",
            graph: build(2, &[[0, 0], [0, 0]], &[(0, 1, 2)]),
            expected: e(1, 1, -4),
            functional: "sum_{j,k} <d_j, d_k>^2",
        },
        CatalogEntry {
            name: "fig1718",
            graph: build(2, &[[0, 1], [0, 1]], &[(0, 1, 1)]),
            expected: e(1, 2, -4),
            functional: "sum_{j,k} <d_j, d_k> I_2(d_j d_k)",
        },
        CatalogEntry {
            name: "fig1719",
            graph: build(2, &[[0, 2], [0, 1]], &[]),
            expected: e(1, 1, -3),
            functional: "sum_{j,k} I_3(d_j d_j d_k)",
        },
        CatalogEntry {
            name: "fig1720",
            graph: build(3, &[[0, 0], [0, 0], [0, 1]], &[(0, 1, 2)]),
            expected: e(3, 2, -5),
            functional: "",
        },
        CatalogEntry {
            name: "fig1721",
            graph: build(3, &[[0, 1], [0, 1], [0, 1]], &[(0, 1, 1)]),
            expected: e(1, 1, -5),
            functional: "",
        },
        CatalogEntry {
            name: "fig1722",
            graph: build(3, &[[0, 1], [0, 0], [0, 1]], &[(0, 1, 1), (1, 2, 1)]),
            expected: e(1, 2, -6),
            functional: "",
        },
        CatalogEntry {
            name: "fig1723",
            graph: build(3, &[[0, 0], [0, 0], [0, 0]], &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]),
            expected: e(1, 1, -6),
            functional: "",
        },
        CatalogEntry {
            name: "fig1724",
            graph: build(2, &[[0, 1], [0, 0]], &[(0, 1, 1)]),
            expected: e(1, 2, -3),
            functional: "",
        },
    ]
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    builtin_catalog().into_iter().find(|e| e.name == name)
}
