use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CoefficientSet, FitConfig};
use crate::bspline::{basis_matrix, Smoother};
use crate::cmds::classical_mds;
use crate::dissimilarity::DissimilarityTensor;
use crate::error::{Error, Result};
use crate::linalg::procrustes_rotation;

/// Warm start: classical MDS on every slice, each slice rotated onto its
/// predecessor by orthogonal Procrustes, then every coordinate series
/// smoothed by least squares onto the cubic basis.
pub fn init_from_cmds(tensor: &DissimilarityTensor, config: &FitConfig) -> Result<CoefficientSet> {
    let n = tensor.n();
    if n < 2 {
        return Err(Error::InsufficientObjects(n));
    }
    config.validate()?;
    let knots = config.knots_for(tensor)?;
    let smoother = Smoother::new(&basis_matrix(&knots, tensor.time_grid())?)?;
    let p = config.dim;

    let mut aligned: Vec<DMatrix<f64>> = Vec::with_capacity(tensor.m());
    for slice in tensor.slices() {
        let x = classical_mds(slice, p)?.configuration;
        let x = match aligned.last() {
            Some(prev) => {
                let r = procrustes_rotation(&x, prev)?;
                x * r
            }
            None => x,
        };
        aligned.push(x);
    }

    let mut series = vec![0.0; tensor.m()];
    let mut matrices = Vec::with_capacity(n);
    for i in 0..n {
        let mut c = DMatrix::zeros(p, knots.num_basis());
        for a in 0..p {
            for (k, x) in aligned.iter().enumerate() {
                series[k] = x[(i, a)];
            }
            let coef = smoother.coefficients(&series)?;
            c.row_mut(a).copy_from(&coef.transpose());
        }
        matrices.push(c);
    }
    CoefficientSet::new(knots, matrices)
}

/// Entries i.i.d. uniform on `[−0.5, 0.5]` scaled by the mean dissimilarity.
pub fn random_init(tensor: &DissimilarityTensor, config: &FitConfig) -> Result<CoefficientSet> {
    let n = tensor.n();
    if n < 2 {
        return Err(Error::InsufficientObjects(n));
    }
    config.validate()?;
    let knots = config.knots_for(tensor)?;

    let pairs = (n * (n - 1) / 2 * tensor.m()) as f64;
    let mut total = 0.0;
    for slice in tensor.slices() {
        for i in 0..n {
            for j in i + 1..n {
                total += slice.get(i, j);
            }
        }
    }
    let scale = total / pairs;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let q = knots.num_basis();
    let matrices = (0..n)
        .map(|_| DMatrix::from_fn(config.dim, q, |_, _| scale * (rng.random::<f64>() - 0.5)))
        .collect();
    CoefficientSet::new(knots, matrices)
}
