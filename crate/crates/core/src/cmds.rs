//! Classical multidimensional scaling.

use nalgebra::DMatrix;

use crate::dissimilarity::{euclidean_dissimilarity, DissimilarityMatrix};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Eigenvalues at or below this fraction of the largest are numerical noise
/// and contribute a zero column.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CmdsSolution {
    /// `n × p`, row `i` is the embedded point of object `i`.
    pub configuration: DMatrix<f64>,
    /// All `n` eigenvalues of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    pub used_dim: usize,
    /// `Σ|λ|` over negative eigenvalues divided by `Σ|λ|`. Negative values
    /// within the noise band of the largest eigenvalue are not counted.
    pub negative_mass: f64,
}

/// `B = H A H` with `a_ij = −d_ij² / 2` and `H = I − J/n`.
pub fn double_center(d: &DissimilarityMatrix) -> DMatrix<f64> {
    let n = d.n();
    let a = d.values().map(|v| -0.5 * v * v);
    // A is symmetric, so row means serve as column means too.
    let means: Vec<f64> = (0..n).map(|i| a.row(i).sum() / n as f64).collect();
    let grand = means.iter().sum::<f64>() / n as f64;
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] - means[i] - means[j] + grand)
}

pub fn classical_mds(d: &DissimilarityMatrix, p: usize) -> Result<CmdsSolution> {
    let n = d.n();
    if p == 0 || p + 1 > n {
        return Err(Error::Dim {
            p,
            max: n.saturating_sub(1),
        });
    }
    let b = double_center(d);
    let eig = symmetric_eigen(&b)?;

    let lambda_max = eig.values[0].max(0.0);
    let mut configuration = DMatrix::zeros(n, p);
    for k in 0..p {
        let lambda = eig.values[k];
        if lambda > RANK_TOL * lambda_max {
            let scale = lambda.sqrt();
            configuration
                .column_mut(k)
                .copy_from(&(eig.vectors.column(k) * scale));
        }
    }

    let total: f64 = eig.values.iter().map(|v| v.abs()).sum();
    let negative: f64 = eig
        .values
        .iter()
        .filter(|v| **v < -RANK_TOL * lambda_max.abs())
        .fold(0.0, |acc, v| acc + v.abs());
    let negative_mass = if total > 0.0 { negative / total } else { 0.0 };

    Ok(CmdsSolution {
        configuration,
        eigenvalues: eig.values.iter().copied().collect(),
        used_dim: p,
        negative_mass,
    })
}

/// Pairwise distances between the rows of the configuration.
pub fn reconstructed_dissimilarity(sol: &CmdsSolution) -> DissimilarityMatrix {
    let rows: Vec<Vec<f64>> = sol
        .configuration
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    euclidean_dissimilarity(&rows).expect("configuration rows share one dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn triangle() -> DissimilarityMatrix {
        DissimilarityMatrix::from_upper(3, |_, _| 1.0).unwrap()
    }

    #[test]
    fn double_center_examples() {
        assert_eq!(double_center(&DissimilarityMatrix::zeros(4)), DMatrix::zeros(4, 4));

        let d = DissimilarityMatrix::from_upper(2, |_, _| 2.0).unwrap();
        let b = double_center(&d);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((b - expected).amax() < 1e-15);

        let b = double_center(&triangle());
        assert_abs_diff_eq!(b.trace(), 1.0, epsilon = 1e-14);
        for i in 0..3 {
            assert_abs_diff_eq!(b.row(i).sum(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(b.column(i).sum(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn equilateral_triangle() {
        let sol = classical_mds(&triangle(), 2).unwrap();
        assert_abs_diff_eq!(sol.eigenvalues[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.eigenvalues[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.eigenvalues[2], 0.0, epsilon = 1e-12);
        let rec = reconstructed_dissimilarity(&sol);
        assert!((rec.values() - triangle().values()).amax() < 1e-9);
    }

    #[test]
    fn zero_input() {
        let sol = classical_mds(&DissimilarityMatrix::zeros(3), 1).unwrap();
        assert!(sol.configuration.iter().all(|v| *v == 0.0));
        assert!(sol.eigenvalues.iter().all(|v| *v == 0.0));
        assert_eq!(sol.negative_mass.to_bits(), 0.0f64.to_bits());
        let rec = reconstructed_dissimilarity(&sol);
        assert!(rec.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dimension_errors() {
        let d = triangle();
        assert!(matches!(classical_mds(&d, 0), Err(Error::Dim { .. })));
        assert!(matches!(classical_mds(&d, 3), Err(Error::Dim { p: 3, max: 2 })));
    }

    #[test]
    fn non_euclidean_input_reports_negative_mass() {
        // Violates the triangle inequality, so B is indefinite.
        let d = DissimilarityMatrix::from_upper(3, |i, j| if (i, j) == (0, 2) { 5.0 } else { 1.0 }).unwrap();
        let sol = classical_mds(&d, 2).unwrap();
        assert!(sol.negative_mass > 0.0);
        assert_eq!(sol.configuration.column(1).amax(), 0.0);
    }
}
