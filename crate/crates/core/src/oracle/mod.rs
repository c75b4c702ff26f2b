//! Reference implementations written as direct transcriptions of the
//! defining formulas, plus synthetic scenarios and the verify harness.
//!
//! Nothing here is optimized. Any disagreement with the main modules beyond
//! the stated tolerances points at the main modules first.

mod synth;
pub mod verify;

use nalgebra::DMatrix;

use crate::bspline::KnotVector;
use crate::dissimilarity::DissimilarityTensor;
use crate::error::{Error, Result};
use crate::fmds::CoefficientSet;

pub use synth::{generate, ScenarioKind, SyntheticData, SyntheticScenario};

/// Literal recursive evaluation of `B_{l,s} = w_{l,s} B_{l,s−1} + (1 − w_{l+1,s}) B_{l+1,s−1}`
/// on the extended knots.
pub fn naive_bspline(kv: &KnotVector, t: f64) -> Result<Vec<f64>> {
    kv.check_domain(t)?;
    let knots = kv.extended();
    let s = kv.order();
    let q = kv.num_basis();
    Ok((0..q).map(|l| naive_b(knots, q, l, s, t)).collect())
}

fn naive_b(knots: &[f64], q: usize, l: usize, s: usize, t: f64) -> f64 {
    if s == 1 {
        let b = knots[knots.len() - 1];
        if knots[l] <= t && t < knots[l + 1] {
            return 1.0;
        }
        // The closed right end belongs to the last nonempty interval.
        return if t == b && l == q - 1 { 1.0 } else { 0.0 };
    }
    let w = |l: usize| {
        let span = knots[l + s - 1] - knots[l];
        if span != 0.0 {
            (t - knots[l]) / span
        } else {
            0.0
        }
    };
    w(l) * naive_b(knots, q, l, s - 1, t) + (1.0 - w(l + 1)) * naive_b(knots, q, l + 1, s - 1, t)
}

/// Stress and `∂F/∂C_i` for every object from fully expanded loops over
/// pairs, time points and matrix entries.
#[allow(clippy::needless_range_loop)]
pub fn naive_stress_and_grad(c: &CoefficientSet, tensor: &DissimilarityTensor) -> Result<(f64, Vec<DMatrix<f64>>)> {
    let n = c.n();
    if tensor.n() != n {
        return Err(Error::Shape(format!("{n} objects vs tensor with {}", tensor.n())));
    }
    let (p, q) = (c.dim(), c.q());
    let mut f = 0.0;
    let mut grads = vec![DMatrix::zeros(p, q); n];
    for (k, &t) in tensor.time_grid().iter().enumerate() {
        let beta = naive_bspline(c.knots(), t)?;
        let pos = |i: usize, a: usize| -> f64 { (0..q).map(|b| c.matrix(i)[(a, b)] * beta[b]).sum() };
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let diff: Vec<f64> = (0..p).map(|a| pos(i, a) - pos(j, a)).collect();
                let dist2: f64 = diff.iter().map(|v| v * v).sum();
                let r = tensor.get(k, i, j).powi(2) - dist2;
                if i < j {
                    f += r * r;
                }
                for a in 0..p {
                    for b in 0..q {
                        grads[i][(a, b)] += -4.0 * r * diff[a] * beta[b];
                    }
                }
            }
        }
    }
    Ok((f, grads))
}
