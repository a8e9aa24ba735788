//! Weighted-graph exponent calculus and a Wiener-chaos oracle for the orders
//! it predicts.
//!
//! For a connected component `C` with slot sums `q1`, `q2` (`q = q1 + q2`),
//! total edge weight `theta` and `l2` the largest number of `E2` edges in a
//! spanning tree,
//!
//! ```text
//! e_q(C)     = -1/2 - H q        if q2 > 0, q1 = 0
//!            = -1 - H (q - 1)    if q1 > 0
//!            = 0                 if q = 0
//! e_theta(C) = 1 - 2H theta + (2H - 1)(|V(C)| - 1 - l2)
//! ```
//!
//! and `e(G)` is the sum of `e_q + e_theta` over components.

mod affine;
mod calculus;
mod catalog;
pub mod chaos;
mod graph;

pub use affine::Affine;
pub use calculus::{
    classify_edges, component_sets, components, e_q, e_theta, ell2, ell2_brute_force, exponent, is_connected,
    ComponentReport, EdgeClasses, ExponentReport,
};
pub use catalog::{builtin_catalog, catalog_entry, CatalogEntry};
pub use chaos::{exact_l2_norm, mc_l2_norm, order_slope, McNorm};
pub use graph::{Slot, WeightedGraph};
