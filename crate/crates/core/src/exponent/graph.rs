//! Weighted graphs `(V, theta, q)`: every vertex has two slots, `q` weights
//! slots and `theta` weights unordered pairs of slots on distinct vertices.
//!
//! Slot 1 carries the increment kernel `1^n_j`, slot 2 the second-difference
//! kernel `d^n_j = 1^n_{j+1} - 1^n_j`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Slot = u8;

/// `((u, slot), (v, slot))` with `u < v`.
pub type SlotPair = ((usize, Slot), (usize, Slot));

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightedGraph {
    pub vertices: Vec<String>,
    /// `q[v] = [q(v,1), q(v,2)]`.
    pub q: Vec<[u32; 2]>,
    /// Keyed by `((u, slot), (v, slot))` with `u < v`; weights are positive.
    pub theta: BTreeMap<SlotPair, u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QEntry {
    v: String,
    slot: Slot,
    w: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ThetaEntry {
    u: String,
    uslot: Slot,
    v: String,
    vslot: Slot,
    w: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<String>,
    #[serde(default)]
    q: Vec<QEntry>,
    #[serde(default)]
    theta: Vec<ThetaEntry>,
}

fn check_slot(slot: Slot) -> Result<()> {
    if slot == 1 || slot == 2 {
        Ok(())
    } else {
        Err(Error::Graph(format!("slot must be 1 or 2, got {slot}")))
    }
}

impl WeightedGraph {
    pub fn new<S: Into<String>>(vertices: impl IntoIterator<Item = S>) -> Self {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let q = vec![[0, 0]; vertices.len()];
        WeightedGraph {
            vertices,
            q,
            theta: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Graph(format!("unknown vertex `{name}`")))
    }

    /// Adds `w` to `q(v, slot)`.
    pub fn add_q(&mut self, v: usize, slot: Slot, w: u32) -> Result<&mut Self> {
        check_slot(slot)?;
        if v >= self.len() {
            return Err(Error::Graph(format!("vertex index {v} out of range")));
        }
        self.q[v][(slot - 1) as usize] += w;
        Ok(self)
    }

    /// Adds `w` to `theta([(u, us), (v, vs)])`; zero weights are not stored.
    pub fn add_theta(&mut self, u: usize, us: Slot, v: usize, vs: Slot, w: u32) -> Result<&mut Self> {
        check_slot(us)?;
        check_slot(vs)?;
        if u >= self.len() || v >= self.len() {
            return Err(Error::Graph("edge endpoint out of range".into()));
        }
        if u == v {
            return Err(Error::Graph(format!(
                "edge endpoints must be distinct vertices (got `{}` twice)",
                self.vertices[u]
            )));
        }
        if w > 0 {
            let key = if u < v { ((u, us), (v, vs)) } else { ((v, vs), (u, us)) };
            *self.theta.entry(key).or_default() += w;
        }
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        if file.vertices.is_empty() {
            return Err(Error::Graph("graph has no vertices".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &file.vertices {
            if !seen.insert(v) {
                return Err(Error::Graph(format!("duplicate vertex `{v}`")));
            }
        }
        let mut g = WeightedGraph::new(file.vertices.clone());
        for e in &file.q {
            let v = g.index(&e.v)?;
            g.add_q(v, e.slot, e.w)?;
        }
        for e in &file.theta {
            let (u, v) = (g.index(&e.u)?, g.index(&e.v)?);
            g.add_theta(u, e.uslot, v, e.vslot, e.w)?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertices: self.vertices.clone(),
            q: self
                .q
                .iter()
                .enumerate()
                .flat_map(|(v, w)| {
                    (0..2).filter(move |&s| w[s] > 0).map(move |s| QEntry {
                        v: self.vertices[v].clone(),
                        slot: s as Slot + 1,
                        w: w[s],
                    })
                })
                .collect(),
            theta: self
                .theta
                .iter()
                .map(|(&((u, us), (v, vs)), &w)| ThetaEntry {
                    u: self.vertices[u].clone(),
                    uslot: us,
                    v: self.vertices[v].clone(),
                    vslot: vs,
                    w,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialises")
    }

    /// `theta` summed over slot pairs, per unordered vertex pair `(u, v)`,
    /// `u < v`, split into the `(1,1)` part and the rest.
    pub fn projected(&self) -> BTreeMap<(usize, usize), (u32, u32)> {
        let mut out: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
        for (&((u, us), (v, vs)), &w) in &self.theta {
            let e = out.entry((u, v)).or_default();
            if us == 1 && vs == 1 {
                e.0 += w;
            } else {
                e.1 += w;
            }
        }
        out
    }

    /// Subgraph induced on `keep` (indices into `self.vertices`, in order).
    pub fn induced(&self, keep: &[usize]) -> WeightedGraph {
        let pos = |v: usize| keep.iter().position(|&k| k == v);
        let mut g = WeightedGraph::new(keep.iter().map(|&v| self.vertices[v].clone()));
        for (i, &v) in keep.iter().enumerate() {
            g.q[i] = self.q[v];
        }
        for (&((u, us), (v, vs)), &w) in &self.theta {
            if let (Some(a), Some(b)) = (pos(u), pos(v)) {
                let key = if a < b { ((a, us), (b, vs)) } else { ((b, vs), (a, us)) };
                g.theta.insert(key, w);
            }
        }
        g
    }

    /// Disjoint union; vertex names of `other` are kept as given.
    pub fn disjoint_union(&self, other: &WeightedGraph) -> WeightedGraph {
        let off = self.len();
        let mut g = self.clone();
        g.vertices.extend(other.vertices.iter().cloned());
        g.q.extend(other.q.iter().copied());
        for (&((u, us), (v, vs)), &w) in &other.theta {
            g.theta.insert(((u + off, us), (v + off, vs)), w);
        }
        g
    }
}
