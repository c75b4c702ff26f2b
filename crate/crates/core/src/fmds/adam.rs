use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Entry of the constant matrix added to `√v̂` in the denominator.
    pub e: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            gamma1: 0.9,
            gamma2: 0.999,
            e: 1e-8,
        }
    }
}

/// Per-object Adam moments. Each object keeps its own update counter, which
/// drives the bias-correction exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    params: AdamParams,
    first: Vec<DMatrix<f64>>,
    second: Vec<DMatrix<f64>>,
    steps: Vec<u64>,
}

impl AdamState {
    pub fn new(n: usize, p: usize, q: usize, params: AdamParams) -> Self {
        Self {
            params,
            first: vec![DMatrix::zeros(p, q); n],
            second: vec![DMatrix::zeros(p, q); n],
            steps: vec![0; n],
        }
    }

    pub fn params(&self) -> &AdamParams {
        &self.params
    }

    pub fn first_moment(&self, idx: usize) -> &DMatrix<f64> {
        &self.first[idx]
    }

    pub fn second_moment(&self, idx: usize) -> &DMatrix<f64> {
        &self.second[idx]
    }

    pub fn steps(&self, idx: usize) -> u64 {
        self.steps[idx]
    }

    /// Bias-corrected second moment of object `idx`.
    pub fn corrected_second_moment(&self, idx: usize) -> DMatrix<f64> {
        let correction = 1.0 - pow(self.params.gamma2, self.steps[idx]);
        &self.second[idx] / correction
    }

    /// Folds `grad` into the moments of object `idx` and returns the
    /// increment `−α m̂ / (√v̂ + e)` to add to its coefficients.
    pub fn step(&mut self, idx: usize, grad: &DMatrix<f64>) -> DMatrix<f64> {
        let AdamParams { alpha, gamma1, gamma2, e } = self.params;
        let m = &mut self.first[idx];
        let v = &mut self.second[idx];
        m.zip_apply(grad, |mi, g| *mi = gamma1 * *mi + (1.0 - gamma1) * g);
        v.zip_apply(grad, |vi, g| *vi = gamma2 * *vi + (1.0 - gamma2) * (g * g));

        self.steps[idx] += 1;
        let t = self.steps[idx];
        let c1 = 1.0 - pow(gamma1, t);
        let c2 = 1.0 - pow(gamma2, t);
        m.zip_map(v, |mi, vi| {
            let m_hat = mi / c1;
            let v_hat = vi / c2;
            -alpha * m_hat / (v_hat.sqrt() + e)
        })
    }
}

fn pow(base: f64, exp: u64) -> f64 {
    base.powi(i32::try_from(exp).unwrap_or(i32::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_normalized_gradient() {
        let params = AdamParams::default();
        let mut state = AdamState::new(2, 2, 3, params);
        let g = DMatrix::from_row_slice(2, 3, &[0.5, -3.0, 1e-3, 0.0, 250.0, -7.5]);
        let step = state.step(1, &g);
        for (s, gi) in step.iter().zip(g.iter()) {
            let expected = -params.alpha * gi / (gi.abs() + params.e);
            assert!((s - expected).abs() <= 1e-15, "{s} vs {expected}");
        }
        assert_eq!(state.steps(1), 1);
        assert_eq!(state.steps(0), 0);
        assert!(state.first_moment(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let mut state = AdamState::new(1, 1, 2, AdamParams::default());
        for k in 0..50 {
            let g = DMatrix::from_row_slice(1, 2, &[(k as f64).sin() * 10.0, -(k as f64)]);
            state.step(0, &g);
            let v = state.second_moment(0);
            let v_hat = state.corrected_second_moment(0);
            assert!(v.iter().all(|x| *x >= 0.0));
            assert!(v_hat.iter().zip(v.iter()).all(|(h, x)| h >= x));
        }
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        let mut state = AdamState::new(1, 2, 2, AdamParams::default());
        let step = state.step(0, &DMatrix::zeros(2, 2));
        assert!(step.iter().all(|v| *v == 0.0));
    }
}
