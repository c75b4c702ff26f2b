//! Dense helpers: a cyclic Jacobi symmetric eigensolver and orthogonal
//! Procrustes alignment.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition `A = V Λ Vᵀ`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DMatrix<f64>,
}

/// Cyclic Jacobi with row-by-row pivot order. The result is sorted by
/// descending eigenvalue; each eigenvector has its first nonzero component
/// positive, and numerically tied eigenvalues are ordered by the
/// lexicographic order of their sign-fixed eigenvectors.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }

    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm();

    let tol = 4.0 * n as f64 * f64::EPSILON * scale;
    let mut converged = false;
    for sweep in 0..=MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            converged = true;
            break;
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<f64> = v.column(k).iter().copied().collect();
            fix_sign(&mut col);
            (m[(k, k)], col)
        })
        .collect();

    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let tie = 1e-12 * pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end - 1].0 - pairs[end].0).abs() <= tie {
            end += 1;
        }
        let mut band: Vec<Vec<f64>> = pairs[start..end].iter().map(|p| p.1.clone()).collect();
        band.sort_by(|x, y| lex_desc(x, y));
        for (pair, col) in pairs[start..end].iter_mut().zip(band) {
            pair.1 = col;
        }
        start = end;
    }

    let values = DVector::from_iterator(n, pairs.iter().map(|p| p.0));
    let vectors = DMatrix::from_fn(n, n, |i, k| pairs[k].1[i]);
    Ok(SymmetricEigen { values, vectors })
}

fn fix_sign(col: &mut [f64]) {
    const ZERO: f64 = 1e-12;
    if let Some(first) = col.iter().find(|x| x.abs() > ZERO) {
        if *first < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lex_desc(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.total_cmp(x) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Orthogonal `R` minimizing `‖source · R − target‖_F`, the orthogonal polar
/// factor of `sourceᵀ target`. Reflections are allowed.
pub fn procrustes_rotation(source: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if source.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "procrustes shapes differ: {:?} vs {:?}",
            source.shape(),
            target.shape()
        )));
    }
    let cross = source.transpose() * target;
    let svd = SVD::new(cross, true, true);
    let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
        return Err(Error::Numerical("SVD did not produce singular vectors".into()));
    };
    Ok(u * vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn residual(a: &DMatrix<f64>, e: &SymmetricEigen) -> f64 {
        let norm = a.norm().max(f64::MIN_POSITIVE);
        (0..a.nrows())
            .map(|k| {
                let v = e.vectors.column(k);
                (a * v - e.values[k] * v).norm() / norm
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_and_small_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigen(&a).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        assert!(e.vectors[(0, 0)] > 0.0 && e.vectors[(0, 1)] > 0.0);

        let zero = DMatrix::<f64>::zeros(3, 3);
        let e = symmetric_eigen(&zero).unwrap();
        assert!(e.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn residuals_and_orthogonality() {
        let n = 9;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            (1.3 * i + 0.7 * j).sin() + if i == j { 2.0 } else { 0.0 }
        });
        let e = symmetric_eigen(&a).unwrap();
        assert!(residual(&a, &e) <= 1e-10);
        let gram = e.vectors.transpose() * &e.vectors;
        assert!((gram - DMatrix::<f64>::identity(n, n)).amax() < 1e-12);
        assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn ties_are_deterministic() {
        let a = DMatrix::<f64>::identity(3, 3);
        let e = symmetric_eigen(&a).unwrap();
        // Lexicographically largest eigenvector first among equal eigenvalues.
        assert_eq!(e.vectors.column(0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(e.vectors.column(2).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn procrustes_recovers_rotation() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 2.0, -1.0, 0.5, 0.3, -1.2]);
        let (c, s) = (0.6_f64.cos(), 0.6_f64.sin());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let reflect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        for g in [rot.clone(), &rot * &reflect] {
            let y = &x * &g;
            let r = procrustes_rotation(&y, &x).unwrap();
            assert!((&y * r - &x).amax() < 1e-12);
        }
    }
}
