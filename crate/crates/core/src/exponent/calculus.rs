use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::affine::Affine;
use super::graph::WeightedGraph;
use crate::error::{Error, Result};

/// Projected edge sets: `E1` carries weight only on slots `(1,1)`, `E2` has
/// weight on some other slot pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeClasses {
    pub e1: Vec<(usize, usize)>,
    pub e2: Vec<(usize, usize)>,
}

pub fn classify_edges(g: &WeightedGraph) -> EdgeClasses {
    let mut out = EdgeClasses::default();
    for (&pair, &(w11, rest)) in &g.projected() {
        if rest > 0 {
            out.e2.push(pair);
        } else if w11 > 0 {
            out.e1.push(pair);
        }
    }
    out
}

fn count_classes(n: usize, edges: &[(usize, usize)]) -> (usize, Vec<usize>) {
    let mut uf = UnionFind::<usize>::new(n);
    for &(u, v) in edges {
        uf.union(u, v);
    }
    let labels = uf.into_labeling();
    let mut roots = labels.clone();
    roots.sort_unstable();
    roots.dedup();
    (roots.len(), labels)
}

/// Vertex index sets of the connected components of the projected graph,
/// ordered by smallest member.
pub fn component_sets(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let edges: Vec<(usize, usize)> = g.projected().keys().copied().collect();
    let (_, labels) = count_classes(g.len(), &edges);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<(usize, usize)> = Vec::new();
    for (v, &r) in labels.iter().enumerate() {
        match root_of.iter().find(|(root, _)| *root == r) {
            Some(&(_, gi)) => groups[gi].push(v),
            None => {
                root_of.push((r, groups.len()));
                groups.push(vec![v]);
            }
        }
    }
    groups
}

pub fn components(g: &WeightedGraph) -> Vec<WeightedGraph> {
    component_sets(g).iter().map(|s| g.induced(s)).collect()
}

pub fn is_connected(g: &WeightedGraph) -> bool {
    component_sets(g).len() == 1
}

/// Largest number of `E2` edges in a spanning tree: `|V|` minus the number of
/// components of `(V, E2)`.
pub fn ell2(c: &WeightedGraph) -> Result<usize> {
    if c.is_empty() || !is_connected(c) {
        return Err(Error::Graph("ell2 needs a connected, nonempty component".into()));
    }
    let (k, _) = count_classes(c.len(), &classify_edges(c).e2);
    Ok(c.len() - k)
}

/// `max_T |E2 ∩ T|` over all spanning trees, by enumeration. Exponential;
/// for cross-checking [`ell2`] on small graphs.
pub fn ell2_brute_force(c: &WeightedGraph) -> Result<usize> {
    if c.is_empty() || !is_connected(c) {
        return Err(Error::Graph("ell2 needs a connected, nonempty component".into()));
    }
    let classes = classify_edges(c);
    let mut edges: Vec<((usize, usize), bool)> = classes.e1.iter().map(|&e| (e, false)).collect();
    edges.extend(classes.e2.iter().map(|&e| (e, true)));
    let need = c.len() - 1;
    let mut best = 0;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != need {
            continue;
        }
        let mut uf = UnionFind::<usize>::new(c.len());
        let mut acyclic = true;
        let mut e2 = 0;
        for (i, &((u, v), is_e2)) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                if !uf.union(u, v) {
                    acyclic = false;
                    break;
                }
                e2 += is_e2 as usize;
            }
        }
        if acyclic {
            best = best.max(e2);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub vertices: Vec<String>,
    pub q_bar: u32,
    pub q_bar_1: u32,
    pub q_bar_2: u32,
    pub theta_bar: u32,
    pub e1_edges: usize,
    pub e2_edges: usize,
    pub ell2: usize,
    pub e_q: Affine,
    pub e_theta: Affine,
    pub e: Affine,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub components: Vec<ComponentReport>,
    pub total: Affine,
    /// Evaluation point and value, when requested.
    pub h: Option<f64>,
    pub value: Option<f64>,
}

/// `e_q` from the slot weights of a component.
pub fn e_q(q_bar_1: u32, q_bar_2: u32) -> Affine {
    let q_bar = (q_bar_1 + q_bar_2) as i64;
    if q_bar == 0 {
        Affine::frac(0, 1, 0)
    } else if q_bar_1 > 0 {
        Affine::frac(-1, 1, 0) + Affine::frac(0, 1, -(q_bar - 1))
    } else {
        Affine::frac(-1, 2, -q_bar)
    }
}

/// `e_theta = 1 - 2H theta_bar + (2H - 1)(|V| - 1 - ell2)`.
pub fn e_theta(theta_bar: u32, vertices: usize, ell2: usize) -> Affine {
    let slack = vertices as i64 - 1 - ell2 as i64;
    Affine::frac(1, 1, -2 * theta_bar as i64) + Affine::frac(-slack, 1, 2 * slack)
}

fn component_report(c: &WeightedGraph) -> Result<ComponentReport> {
    let q_bar_1: u32 = c.q.iter().map(|w| w[0]).sum();
    let q_bar_2: u32 = c.q.iter().map(|w| w[1]).sum();
    let theta_bar: u32 = c.theta.values().sum();
    let classes = classify_edges(c);
    let l2 = ell2(c)?;
    let eq = e_q(q_bar_1, q_bar_2);
    let et = e_theta(theta_bar, c.len(), l2);
    Ok(ComponentReport {
        vertices: c.vertices.clone(),
        q_bar: q_bar_1 + q_bar_2,
        q_bar_1,
        q_bar_2,
        theta_bar,
        e1_edges: classes.e1.len(),
        e2_edges: classes.e2.len(),
        ell2: l2,
        e_q: eq,
        e_theta: et,
        e: eq + et,
    })
}

/// Exponent per component and in total, optionally evaluated at `h`.
pub fn exponent(g: &WeightedGraph, h: Option<f64>) -> Result<ExponentReport> {
    if g.is_empty() {
        return Err(Error::Graph("graph has no vertices".into()));
    }
    let components = components(g).iter().map(component_report).collect::<Result<Vec<_>>>()?;
    let total: Affine = components.iter().map(|c| c.e).sum();
    Ok(ExponentReport {
        value: h.map(|h| total.eval(h)),
        components,
        total,
        h,
    })
}

impl ExponentReport {
    /// Plain-text table, one row per component.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<24} {:>3} {:>3} {:>3} {:>4} {:>3} {:>3} {:>3}  {:<12} {:<14} {}\n",
            "component", "q", "q1", "q2", "th", "E1", "E2", "l2", "e_q", "e_theta", "e"
        );
        for c in &self.components {
            s += &format!(
                "{:<24} {:>3} {:>3} {:>3} {:>4} {:>3} {:>3} {:>3}  {:<12} {:<14} {}\n",
                c.vertices.join(","),
                c.q_bar,
                c.q_bar_1,
                c.q_bar_2,
                c.theta_bar,
                c.e1_edges,
                c.e2_edges,
                c.ell2,
                c.e_q.to_string(),
                c.e_theta.to_string(),
                c.e
            );
        }
        s += &format!("total: {}", self.total);
        if let (Some(h), Some(v)) = (self.h, self.value) {
            s += &format!(" = {v} at H = {h}");
        }
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize) -> WeightedGraph {
        WeightedGraph::new((0..n).map(|i| format!("v{i}")))
    }

    #[test]
    fn component_examples() {
        assert_eq!(components(&graph(1)).len(), 1);
        let mut g = graph(2);
        g.add_theta(0, 1, 1, 2, 1).unwrap();
        assert_eq!(component_sets(&g), vec![vec![0, 1]]);
        let mut g = graph(3);
        g.add_theta(0, 2, 1, 2, 1).unwrap();
        assert_eq!(component_sets(&g), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn classify_examples() {
        let mut g = graph(3);
        g.add_theta(0, 1, 1, 1, 1).unwrap();
        g.add_theta(1, 2, 2, 2, 1).unwrap();
        let c = classify_edges(&g);
        assert_eq!((c.e1, c.e2), (vec![(0, 1)], vec![(1, 2)]));
        let mut g = graph(2);
        g.add_theta(0, 1, 1, 1, 1).unwrap();
        g.add_theta(0, 1, 1, 2, 1).unwrap();
        let c = classify_edges(&g);
        assert!(c.e1.is_empty());
        assert_eq!(c.e2, vec![(0, 1)]);
    }

    #[test]
    fn ell2_examples() {
        let mut g = graph(2);
        g.add_theta(0, 2, 1, 2, 1).unwrap();
        assert_eq!(ell2(&g).unwrap(), 1);
        let mut t = graph(3);
        t.add_theta(0, 2, 1, 2, 1).unwrap();
        t.add_theta(1, 2, 2, 2, 1).unwrap();
        t.add_theta(0, 2, 2, 2, 1).unwrap();
        assert_eq!(ell2(&t).unwrap(), 2);
        assert_eq!(ell2_brute_force(&t).unwrap(), 2);
        let mut g = graph(2);
        g.add_theta(0, 1, 1, 1, 1).unwrap();
        assert_eq!(ell2(&g).unwrap(), 0);
        assert!(ell2(&graph(2)).is_err());
    }

    #[test]
    fn exponent_examples() {
        let mut g = graph(1);
        g.add_q(0, 2, 2).unwrap();
        assert_eq!(exponent(&g, None).unwrap().total, Affine::frac(1, 2, -2));
        let mut g = graph(1);
        g.add_q(0, 1, 1).unwrap();
        assert_eq!(exponent(&g, None).unwrap().total, Affine::frac(0, 1, 0));
        let mut g = graph(2);
        g.add_theta(0, 2, 1, 2, 2).unwrap();
        let r = exponent(&g, Some(0.75)).unwrap();
        assert_eq!(r.total, Affine::frac(1, 1, -4));
        assert_eq!(r.value, Some(-2.0));
        assert!(r.table().contains("1 - 4H"));
    }
}
