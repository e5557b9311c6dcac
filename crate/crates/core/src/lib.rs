//! Fon-Der-Flaass strongly regular graphs and Weisfeiler-Leman machinery.
//!
//! The crate builds the graphs `X_A(L, Σ)` over the affine planes AG(2, 2^k),
//! applies elementary and path switchings, and checks the combinatorial
//! statements needed to certify that their WL dimension is at most 4:
//! strong regularity, the 4-condition, the `s_e` relation, and discreteness
//! of two-point extensions of coherent closures.

pub mod cc;
pub mod certify;
pub mod error;
pub mod fdf;
pub mod formats;
pub mod field;
pub mod graph;
pub mod iso;
pub mod plane;
pub mod relation;
pub mod srg;
pub mod switching;

pub use error::{Error, Result};
pub use fdf::{build_fdf_graph, build_xstar, FdfGraph, FiberSet};
pub use field::{Field, FieldElement};
pub use graph::Graph;
pub use plane::{AffinePlane, ClassArray, Hyperoval, SigmaSet};
pub use relation::{BitMatrix, Relation};
pub use srg::SrgParams;
pub use switching::SwitchSpec;
