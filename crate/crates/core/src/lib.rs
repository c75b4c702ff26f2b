//! Functional multidimensional scaling.
//!
//! Time-varying dissimilarities `d_ij(t)` are embedded as smooth trajectories
//! `x_i(t) = C_i β(t)`, where `β(t)` is a clamped cubic B-spline basis and each
//! `C_i` is a `p × q` coefficient matrix. The coefficients minimize the
//! squared-stress objective
//!
//! ```text
//! F = Σ_{i<j} Σ_k [ d_ij(t_k)² − ‖C_i β(t_k) − C_j β(t_k)‖² ]²
//! ```
//!
//! with a pairwise Adam method warm-started from per-slice classical MDS.
//!
//! Module map:
//!
//! * [`bspline`]: knot vectors, Cox–de Boor evaluation, least-squares smoothing.
//! * [`dissimilarity`]: Euclidean and correlation dissimilarities, rolling tensors.
//! * [`cmds`]: double centering and classical MDS.
//! * [`fmds`]: the objective, its gradients, the Adam fit and trajectory evaluation.
//! * [`oracle`]: brute-force references, synthetic scenarios and the verify harness.

pub mod bspline;
pub mod cmds;
pub mod dissimilarity;
mod error;
pub mod fmds;
pub mod linalg;
#[cfg(feature = "oracle")]
pub mod oracle;

pub use bspline::{BasisMatrix, KnotVector, SmoothCurve};
pub use cmds::CmdsSolution;
pub use dissimilarity::{DissimilarityMatrix, DissimilarityTensor, Metric, ObjectPanel, ValidityReport};
pub use error::{Error, Result};
pub use fmds::{
    AdamParams, AdamState, Baseline, CoefficientSet, EmbeddingTrajectory, FitConfig, FitResult,
    InitMode, Objective,
};
pub use nalgebra::{DMatrix, DVector};
