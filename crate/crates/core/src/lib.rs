//! Estimators for the regularized inverse trace `s(q) = q Tr((L + qI)⁻¹)`
//! of graph Laplacians and symmetric diagonally dominant matrices.
//!
//! The main estimator counts the roots of random spanning forests sampled
//! with interrupted loop-erased random walks ([`forest`]). A Gaussian-probe
//! baseline with conjugate gradients ([`probe`]) and a dense spectral oracle
//! ([`spectral`]) are provided for comparison, along with the reduction from
//! SDD matrices to Laplacians ([`sdd`]) and a benchmark harness ([`bench`]).
//!
//! ```
//! use rftrace::{estimate_rf, exact_s, gen::gen_ring, spectrum};
//!
//! let g = gen_ring(50).unwrap();
//! let est = estimate_rf(&g, 1.0, 2_000, 7).unwrap();
//! let exact = exact_s(&spectrum(&g).unwrap(), 1.0).unwrap();
//! assert!((est.mean - exact).abs() < 5.0 * est.stderr);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod estimate;
pub mod forest;
pub mod gen;
pub mod graph;
pub mod io;
pub mod operator;
pub mod probe;
pub mod rng;
pub mod sdd;
pub mod spectral;

pub use error::{Error, Result};
pub use estimate::{EstimatorResult, Method};
pub use forest::{estimate_rf, sample_forest, ForestSample, ForestSampler};
pub use graph::{LaplacianOperator, Violation, WeightedGraph};
pub use operator::SymmetricOperator;
pub use probe::{cg_solve, estimate_girard, quadratic_form, smooth, SolverConfig, SolverKind};
pub use rng::{StreamFamily, SubstreamId};
pub use sdd::{build_laplacians, dd_decompose, estimate_sdd, SddDecomposition, SddMatrix};
pub use spectral::{eig_sym_dense, exact_s, spectrum, var_girard, var_wilson, SpectralSummary};
