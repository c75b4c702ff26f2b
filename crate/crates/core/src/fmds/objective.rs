use nalgebra::DMatrix;

use super::CoefficientSet;
use crate::bspline::{basis_matrix, KnotVector};
use crate::dissimilarity::DissimilarityTensor;
use crate::error::{Error, Result};

/// The squared-stress objective for a fixed tensor and basis.
///
/// `F = Σ_{i<j} Σ_k [d_ij(t_k)² − ‖(C_i − C_j) β(t_k)‖²]²`, which splits into
/// pair terms `f(C_h, C_j)` over `k`.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    tensor: &'a DissimilarityTensor,
    knots: KnotVector,
    /// `q × m`, column `k` is `β(t_k)`.
    basis: DMatrix<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(tensor: &'a DissimilarityTensor, knots: &KnotVector) -> Result<Self> {
        let phi = basis_matrix(knots, tensor.time_grid())?;
        Ok(Self {
            tensor,
            knots: knots.clone(),
            basis: phi.values().transpose(),
        })
    }

    pub fn tensor(&self) -> &DissimilarityTensor {
        self.tensor
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    /// `β(t_k)` as a slice of length `q`.
    pub fn beta(&self, k: usize) -> &[f64] {
        let q = self.basis.nrows();
        &self.basis.as_slice()[k * q..(k + 1) * q]
    }

    /// Checks that coefficients match the tensor's object count and basis size.
    pub fn check(&self, c: &[DMatrix<f64>]) -> Result<()> {
        if c.len() != self.tensor.n() {
            return Err(Error::Shape(format!(
                "{} coefficient matrices for {} objects",
                c.len(),
                self.tensor.n()
            )));
        }
        let q = self.basis.nrows();
        if let Some(i) = c.iter().position(|ci| ci.ncols() != q || ci.nrows() != c[0].nrows()) {
            return Err(Error::Shape(format!(
                "coefficient matrix {i} is {:?}, expected {} columns",
                c[i].shape(),
                q
            )));
        }
        Ok(())
    }

    /// `F` evaluated through the embedded positions at each time point.
    pub fn stress(&self, c: &CoefficientSet) -> Result<f64> {
        if c.knots() != &self.knots {
            return Err(Error::Shape("coefficients use a different knot vector".into()));
        }
        self.check(c.matrices())?;
        Ok(self.stress_of(c.matrices()))
    }

    pub(crate) fn stress_of(&self, c: &[DMatrix<f64>]) -> f64 {
        let n = c.len();
        let p = c[0].nrows();
        let mut x = vec![0.0; n * p];
        let mut total = 0.0;
        for k in 0..self.tensor.m() {
            let beta = self.beta(k);
            for (i, ci) in c.iter().enumerate() {
                for a in 0..p {
                    x[i * p + a] = (0..beta.len()).map(|b| ci[(a, b)] * beta[b]).sum();
                }
            }
            let slice = self.tensor.slice(k);
            for i in 0..n {
                for j in i + 1..n {
                    let dist2: f64 = (0..p).map(|a| (x[i * p + a] - x[j * p + a]).powi(2)).sum();
                    let r = slice.get(i, j).powi(2) - dist2;
                    total += r * r;
                }
            }
        }
        total
    }

    /// Writes `(C_h − C_j) β(t_k)` into `diff` and returns the residual
    /// `d_hj(t_k)² − ‖diff‖²`.
    fn pair_residual(&self, delta: &DMatrix<f64>, h: usize, j: usize, k: usize, diff: &mut [f64]) -> f64 {
        let beta = self.beta(k);
        let mut norm2 = 0.0;
        for (a, slot) in diff.iter_mut().enumerate() {
            let v: f64 = beta.iter().enumerate().map(|(b, w)| delta[(a, b)] * w).sum();
            *slot = v;
            norm2 += v * v;
        }
        self.tensor.get(k, h, j).powi(2) - norm2
    }

    /// `f(C_h, C_j) = Σ_k [d_hj(t_k)² − ‖(C_h − C_j) β(t_k)‖²]²`.
    pub fn pair_subfunction(&self, c_h: &DMatrix<f64>, c_j: &DMatrix<f64>, h: usize, j: usize) -> f64 {
        assert_ne!(h, j, "pair terms need distinct objects");
        let delta = c_h - c_j;
        let mut diff = vec![0.0; delta.nrows()];
        (0..self.tensor.m())
            .map(|k| self.pair_residual(&delta, h, j, k, &mut diff).powi(2))
            .sum()
    }

    /// `(∂f/∂C_h, ∂f/∂C_j)` with
    /// `∂f/∂C_h = −4 Σ_k r_k (C_h − C_j) β_k β_kᵀ` and `∂f/∂C_j = −∂f/∂C_h`.
    pub fn pair_gradients(
        &self,
        c_h: &DMatrix<f64>,
        c_j: &DMatrix<f64>,
        h: usize,
        j: usize,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        assert_ne!(h, j, "pair terms need distinct objects");
        let delta = c_h - c_j;
        let (p, q) = delta.shape();
        let mut diff = vec![0.0; p];
        let mut g_h = DMatrix::zeros(p, q);
        for k in 0..self.tensor.m() {
            let r = self.pair_residual(&delta, h, j, k, &mut diff);
            let beta = self.beta(k);
            for b in 0..q {
                if beta[b] == 0.0 {
                    continue;
                }
                for a in 0..p {
                    g_h[(a, b)] -= 4.0 * r * diff[a] * beta[b];
                }
            }
        }
        #[cfg(feature = "fault-injection")]
        let g_h = -g_h;
        let g_j = -&g_h;
        (g_h, g_j)
    }

    /// `∂F/∂C_i` for every object, accumulated from the pair gradients.
    pub fn full_gradient(&self, c: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let n = c.len();
        let mut grads: Vec<DMatrix<f64>> = c.iter().map(|ci| DMatrix::zeros(ci.nrows(), ci.ncols())).collect();
        for h in 0..n {
            for j in h + 1..n {
                let (g_h, g_j) = self.pair_gradients(&c[h], &c[j], h, j);
                grads[h] += g_h;
                grads[j] += g_j;
            }
        }
        grads
    }
}

/// `F` for coefficients on their own knot vector.
pub fn stress(c: &CoefficientSet, tensor: &DissimilarityTensor) -> Result<f64> {
    Objective::new(tensor, c.knots())?.stress(c)
}
