//! Functional MDS: B-spline trajectories fitted to a dissimilarity tensor.

mod adam;
mod fit;
mod init;
mod objective;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bspline::{basis_matrix, KnotVector};
use crate::dissimilarity::{euclidean_dissimilarity, DissimilarityMatrix, DissimilarityTensor};
use crate::error::{Error, Result};

pub use adam::{AdamParams, AdamState};
pub use fit::{fit, fit_from};
pub use init::{init_from_cmds, random_init};
pub use objective::{stress, Objective};

/// Spline order of the trajectory basis (cubic).
pub const ORDER: usize = 4;

/// Stress above this value aborts the fit.
pub const DIVERGENCE_LIMIT: f64 = 1e30;

/// One `p × q` coefficient matrix per object over a shared knot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    knots: KnotVector,
    matrices: Vec<DMatrix<f64>>,
}

impl CoefficientSet {
    pub fn new(knots: KnotVector, matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let q = knots.num_basis();
        let Some(first) = matrices.first() else {
            return Err(Error::InsufficientObjects(0));
        };
        let p = first.nrows();
        if p == 0 {
            return Err(Error::Shape("embedding dimension must be at least 1".into()));
        }
        if let Some(i) = matrices.iter().position(|c| c.shape() != (p, q)) {
            return Err(Error::Shape(format!(
                "coefficient matrix {i} is {:?}, expected ({p}, {q})",
                matrices[i].shape()
            )));
        }
        Ok(Self { knots, matrices })
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &DMatrix<f64> {
        &self.matrices[i]
    }

    pub fn into_matrices(self) -> Vec<DMatrix<f64>> {
        self.matrices
    }

    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn q(&self) -> usize {
        self.knots.num_basis()
    }

    /// Applies `f` to every matrix, keeping the knot vector.
    pub fn map(&self, mut f: impl FnMut(usize, &DMatrix<f64>) -> DMatrix<f64>) -> Result<Self> {
        let matrices = self.matrices.iter().enumerate().map(|(i, c)| f(i, c)).collect();
        Self::new(self.knots.clone(), matrices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    #[default]
    Cmds,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    #[default]
    Adam,
    /// One plain gradient step on the full objective per epoch.
    FullBatchGd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Embedding dimension `p`.
    pub dim: usize,
    /// Interior knot count `L`; `None` picks `max(1, ⌊m/10⌋)`.
    pub interior_knots: Option<usize>,
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Convergence threshold on the largest per-epoch Frobenius displacement.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub init: InitMode,
    pub baseline: Baseline,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            interior_knots: None,
            alpha: 0.001,
            gamma1: 0.9,
            gamma2: 0.999,
            tolerance: 1e-6,
            max_epochs: 1000,
            seed: 0,
            init: InitMode::Cmds,
            baseline: Baseline::Adam,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma1) || !(0.0..1.0).contains(&self.gamma2) {
            return Err(Error::Config("decay rates must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn adam_params(&self) -> AdamParams {
        AdamParams {
            alpha: self.alpha,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            ..AdamParams::default()
        }
    }

    /// Cubic knot vector on the tensor's time span with uniform interior knots.
    pub fn knots_for(&self, tensor: &DissimilarityTensor) -> Result<KnotVector> {
        let grid = tensor.time_grid();
        let m = grid.len();
        let interior = self.interior_knots.unwrap_or((m / 10).max(1));
        let knots = KnotVector::uniform((grid[0], grid[m - 1]), interior, ORDER)?;
        if m < knots.num_basis() {
            return Err(Error::Underdetermined {
                rows: m,
                cols: knots.num_basis(),
            });
        }
        Ok(knots)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: CoefficientSet,
    /// Objective at the starting coefficients.
    pub initial_stress: f64,
    /// Objective after each epoch.
    pub stress_history: Vec<f64>,
    /// Largest Frobenius displacement of any coefficient matrix in each epoch.
    pub displacement_history: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn final_stress(&self) -> f64 {
        self.stress_history.last().copied().unwrap_or(self.initial_stress)
    }
}

/// Positions `x_i(t) = C_i β(t)` on a grid, with the distances they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTrajectory {
    pub grid: Vec<f64>,
    /// One `n × p` matrix per grid point.
    pub positions: Vec<DMatrix<f64>>,
    /// `d̂_ij(t) = ‖x_i(t) − x_j(t)‖` per grid point.
    pub fitted: Vec<DissimilarityMatrix>,
}

impl EmbeddingTrajectory {
    /// Largest `|d̂_ij(t_k) − d_ij(t_k)|` against a tensor on the same grid.
    pub fn max_abs_error(&self, tensor: &DissimilarityTensor) -> Result<f64> {
        self.check_grid(tensor)?;
        Ok(self
            .fitted
            .iter()
            .zip(tensor.slices())
            .map(|(f, d)| (f.values() - d.values()).amax())
            .fold(0.0, f64::max))
    }

    /// The objective recomputed from the fitted distances.
    pub fn stress_against(&self, tensor: &DissimilarityTensor) -> Result<f64> {
        self.check_grid(tensor)?;
        let mut total = 0.0;
        for (f, d) in self.fitted.iter().zip(tensor.slices()) {
            let n = d.n();
            for i in 0..n {
                for j in i + 1..n {
                    let r = d.get(i, j).powi(2) - f.get(i, j).powi(2);
                    total += r * r;
                }
            }
        }
        Ok(total)
    }

    fn check_grid(&self, tensor: &DissimilarityTensor) -> Result<()> {
        if self.grid.as_slice() != tensor.time_grid() {
            return Err(Error::Shape("trajectory grid differs from tensor grid".into()));
        }
        if self.fitted.first().map(|f| f.n()) != Some(tensor.n()) {
            return Err(Error::Shape("object count differs from tensor".into()));
        }
        Ok(())
    }
}

pub fn evaluate_trajectories(c: &CoefficientSet, grid: &[f64]) -> Result<EmbeddingTrajectory> {
    let phi = basis_matrix(c.knots(), grid)?;
    let (n, p) = (c.n(), c.dim());
    let mut positions = Vec::with_capacity(grid.len());
    let mut fitted = Vec::with_capacity(grid.len());
    for row in phi.values().row_iter() {
        let beta = row.transpose();
        let mut x = DMatrix::zeros(n, p);
        for (i, ci) in c.matrices().iter().enumerate() {
            x.row_mut(i).copy_from(&(ci * &beta).transpose());
        }
        let rows: Vec<Vec<f64>> = x.row_iter().map(|r| r.iter().copied().collect()).collect();
        fitted.push(euclidean_dissimilarity(&rows)?);
        positions.push(x);
    }
    Ok(EmbeddingTrajectory {
        grid: grid.to_vec(),
        positions,
        fitted,
    })
}
