//! Clamped B-spline bases and least-squares smoothing.
//!
//! A [`KnotVector`] on `[a, b]` with `L` strictly increasing interior
//! breakpoints and order `s` spans `q = s + L` basis functions. The boundary
//! knots are replicated `s` times so the basis interpolates at both ends.
//! Evaluation uses the triangular form of the Cox–de Boor recurrence, which
//! only touches the `s` functions that are nonzero on the active span.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reciprocal condition number of `ΦᵀΦ` below which smoothing is refused.
pub const RCOND_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    domain: (f64, f64),
    interior: Vec<f64>,
    order: usize,
    extended: Vec<f64>,
}

impl KnotVector {
    pub fn new(domain: (f64, f64), interior: &[f64], order: usize) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidDomain { a, b });
        }
        if order == 0 {
            return Err(Error::InvalidKnots("order must be at least 1".into()));
        }
        for (idx, &t) in interior.iter().enumerate() {
            if !t.is_finite() || t <= a || t >= b {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {t} at position {idx} is not inside ({a}, {b})"
                )));
            }
        }
        if let Some(w) = interior.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKnots(format!(
                "interior knots must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }

        let mut extended = Vec::with_capacity(2 * order + interior.len());
        extended.extend(std::iter::repeat_n(a, order));
        extended.extend_from_slice(interior);
        extended.extend(std::iter::repeat_n(b, order));

        Ok(Self {
            domain,
            interior: interior.to_vec(),
            order,
            extended,
        })
    }

    /// `count` equally spaced interior knots.
    pub fn uniform(domain: (f64, f64), count: usize, order: usize) -> Result<Self> {
        let (a, b) = domain;
        let step = (b - a) / (count + 1) as f64;
        let interior: Vec<f64> = (1..=count).map(|l| a + step * l as f64).collect();
        Self::new(domain, &interior, order)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    /// Full clamped knot sequence of length `q + s`.
    pub fn extended(&self) -> &[f64] {
        &self.extended
    }

    /// Number of basis functions, `q = s + L`.
    pub fn num_basis(&self) -> usize {
        self.order + self.interior.len()
    }

    /// Distinct breakpoints `a = t_0 < t_1 < … < t_{L+1} = b`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.interior.len() + 2);
        out.push(self.domain.0);
        out.extend_from_slice(&self.interior);
        out.push(self.domain.1);
        out
    }

    pub fn check_domain(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain;
        if t >= a && t <= b {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, a, b })
        }
    }

    /// Index `μ` into the extended knots with `e[μ] ≤ t < e[μ+1]`; the right
    /// endpoint belongs to the last nonempty span.
    fn span(&self, t: f64) -> usize {
        let q = self.num_basis();
        if t >= self.domain.1 {
            return q - 1;
        }
        // e[s-1] = a and e[q] = b; search the nondecreasing slice between them.
        let knots = &self.extended[..=q];
        let upper = knots.partition_point(|&k| k <= t);
        (upper - 1).clamp(self.order - 1, q - 1)
    }
}

/// Order-1 (indicator) basis on the breakpoints: one entry per interval
/// `[t_l, t_{l+1})`, with `t = b` assigned to the last interval.
pub fn eval_basis_order1(kv: &KnotVector, t: f64) -> Result<Vec<f64>> {
    kv.check_domain(t)?;
    let bp = kv.breakpoints();
    let intervals = bp.len() - 1;
    let owner = if t >= kv.domain.1 {
        intervals - 1
    } else {
        bp.partition_point(|&k| k <= t) - 1
    };
    let mut out = vec![0.0; intervals];
    out[owner] = 1.0;
    Ok(out)
}

/// Writes the `s` nonzero basis values at `t` into `out` and returns the
/// index of the first of them.
fn nonzero_basis(kv: &KnotVector, t: f64, out: &mut [f64]) -> usize {
    let s = kv.order;
    let e = &kv.extended;
    let mu = kv.span(t);

    let mut left = vec![0.0; s];
    let mut right = vec![0.0; s];
    out[0] = 1.0;
    for j in 1..s {
        left[j] = t - e[mu + 1 - j];
        right[j] = e[mu + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { out[r] / denom };
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
    mu + 1 - s
}

/// All `q` basis values at `t`.
pub fn eval_basis(kv: &KnotVector, t: f64) -> Result<Vec<f64>> {
    kv.check_domain(t)?;
    let mut local = vec![0.0; kv.order];
    let first = nonzero_basis(kv, t, &mut local);
    let mut out = vec![0.0; kv.num_basis()];
    out[first..first + kv.order].copy_from_slice(&local);
    Ok(out)
}

/// Basis functions evaluated on an ordered grid, one row per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    values: DMatrix<f64>,
    grid: Vec<f64>,
    knots: KnotVector,
}

impl BasisMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

pub fn basis_matrix(kv: &KnotVector, grid: &[f64]) -> Result<BasisMatrix> {
    if let Some(w) = grid.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::Shape(format!(
            "evaluation grid must be nondecreasing ({} then {})",
            w[0], w[1]
        )));
    }
    let q = kv.num_basis();
    let mut values = DMatrix::zeros(grid.len(), q);
    let mut local = vec![0.0; kv.order];
    for (row, &t) in grid.iter().enumerate() {
        kv.check_domain(t)?;
        let first = nonzero_basis(kv, t, &mut local);
        for (offset, &v) in local.iter().enumerate() {
            values[(row, first + offset)] = v;
        }
    }
    Ok(BasisMatrix {
        values,
        grid: grid.to_vec(),
        knots: kv.clone(),
    })
}

/// A scalar spline `f(t) = Σ c_k φ_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothCurve {
    coefficients: DVector<f64>,
    knots: KnotVector,
}

impl SmoothCurve {
    pub fn new(coefficients: DVector<f64>, knots: KnotVector) -> Result<Self> {
        if coefficients.len() != knots.num_basis() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} basis functions",
                coefficients.len(),
                knots.num_basis()
            )));
        }
        Ok(Self { coefficients, knots })
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn knots(&self) -> &KnotVector {
        &self.knots
    }
}

pub fn eval_curve(curve: &SmoothCurve, t: f64) -> Result<f64> {
    let kv = &curve.knots;
    kv.check_domain(t)?;
    let mut local = vec![0.0; kv.order];
    let first = nonzero_basis(kv, t, &mut local);
    Ok(local
        .iter()
        .enumerate()
        .map(|(offset, v)| v * curve.coefficients[first + offset])
        .sum())
}

/// Factorized least-squares problem for a fixed basis matrix, reusable across
/// many right-hand sides.
#[derive(Debug, Clone)]
pub struct Smoother {
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    knots: KnotVector,
    rows: usize,
}

impl Smoother {
    pub fn new(phi: &BasisMatrix) -> Result<Self> {
        let (m, q) = phi.values.shape();
        if m < q {
            return Err(Error::Underdetermined { rows: m, cols: q });
        }
        let svd = SVD::new(phi.values.clone(), true, true);
        let (lo, hi) = svd
            .singular_values
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        // cond(ΦᵀΦ) = cond(Φ)²
        let rcond = if hi > 0.0 { (lo / hi).powi(2) } else { 0.0 };
        if rcond.is_nan() || rcond < RCOND_THRESHOLD {
            return Err(Error::IllConditioned { rcond });
        }
        Ok(Self {
            svd,
            knots: phi.knots.clone(),
            rows: m,
        })
    }

    pub fn coefficients(&self, y: &[f64]) -> Result<DVector<f64>> {
        if y.len() != self.rows {
            return Err(Error::Shape(format!(
                "{} observations for a basis matrix with {} rows",
                y.len(),
                self.rows
            )));
        }
        let rhs = DVector::from_column_slice(y);
        self.svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Numerical(e.to_string()))
    }

    pub fn fit(&self, y: &[f64]) -> Result<SmoothCurve> {
        SmoothCurve::new(self.coefficients(y)?, self.knots.clone())
    }
}

/// Minimizes `Σ_j [y_j − Σ_k c_k φ_k(t_j)]²` over the coefficients.
pub fn smooth_least_squares(y: &[f64], phi: &BasisMatrix) -> Result<SmoothCurve> {
    Smoother::new(phi)?.fit(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn knots_without_interior() {
        let kv = KnotVector::new((0.0, 1.0), &[], 4).unwrap();
        assert_eq!(kv.num_basis(), 4);
        assert_eq!(kv.extended(), &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn cubic_with_three_interior_knots_has_seven_functions() {
        let kv = KnotVector::new((0.0, 1.0), &[0.25, 0.5, 0.75], 4).unwrap();
        assert_eq!(kv.num_basis(), 7);
    }

    #[test]
    fn knot_errors() {
        assert!(matches!(
            KnotVector::new((0.0, 1.0), &[0.5, 0.5], 4),
            Err(Error::InvalidKnots(_))
        ));
        assert!(matches!(
            KnotVector::new((0.0, 1.0), &[1.0], 4),
            Err(Error::InvalidKnots(_))
        ));
        assert!(matches!(
            KnotVector::new((0.0, 1.0), &[-0.1], 2),
            Err(Error::InvalidKnots(_))
        ));
        assert!(matches!(
            KnotVector::new((1.0, 1.0), &[], 4),
            Err(Error::InvalidDomain { .. })
        ));
        assert!(matches!(
            KnotVector::new((0.0, 1.0), &[], 0),
            Err(Error::InvalidKnots(_))
        ));
    }

    #[test]
    fn order_one_indicators() {
        let kv = KnotVector::new((0.0, 1.0), &[0.5], 1).unwrap();
        assert_eq!(eval_basis_order1(&kv, 0.25).unwrap(), vec![1.0, 0.0]);
        assert_eq!(eval_basis_order1(&kv, 0.5).unwrap(), vec![0.0, 1.0]);
        assert_eq!(eval_basis_order1(&kv, 1.0).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(
            eval_basis_order1(&kv, 1.5),
            Err(Error::OutOfDomain { .. })
        ));
        // The recurrence at order 1 reproduces the indicators.
        assert_eq!(eval_basis(&kv, 0.25).unwrap(), vec![1.0, 0.0]);
        assert_eq!(eval_basis(&kv, 1.0).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn cubic_uniform_center_values() {
        // Hand-unrolled recurrence on uniform knots: the central cubic
        // B-spline takes 1/6, 4/6, 1/6 at consecutive knots.
        let kv = KnotVector::new((0.0, 4.0), &[1.0, 2.0, 3.0], 4).unwrap();
        let b = eval_basis(&kv, 2.0).unwrap();
        let expected = [0.0, 0.0, 1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0, 0.0, 0.0];
        for (got, want) in b.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn clamped_endpoints_interpolate() {
        let kv = KnotVector::new((0.0, 1.0), &[], 4).unwrap();
        assert_eq!(eval_basis(&kv, 0.0).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(eval_basis(&kv, 1.0).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        assert!(eval_basis(&kv, -1e-9).is_err());
    }

    #[test]
    fn basis_matrix_shape_and_rows() {
        let kv = KnotVector::new((0.0, 1.0), &[0.25, 0.5, 0.75], 4).unwrap();
        let grid: Vec<f64> = (0..11).map(|j| j as f64 / 10.0).collect();
        let phi = basis_matrix(&kv, &grid).unwrap();
        assert_eq!(phi.values().shape(), (11, 7));

        let single = basis_matrix(&kv, &[0.0]).unwrap();
        let row: Vec<f64> = single.values().row(0).iter().copied().collect();
        assert_eq!(row, eval_basis(&kv, 0.0).unwrap());

        let kv = KnotVector::new((0.0, 4.0), &[1.0, 2.0, 3.0], 4).unwrap();
        let grid: Vec<f64> = (0..=40).map(|j| j as f64 / 10.0).collect();
        let phi = basis_matrix(&kv, &grid).unwrap();
        for row in phi.values().row_iter() {
            assert_abs_diff_eq!(row.sum(), 1.0, epsilon = 1e-12);
            assert!(row.iter().filter(|v| **v != 0.0).count() <= 4);
        }
        assert!(basis_matrix(&kv, &[1.0, 0.5]).is_err());
        assert!(matches!(
            basis_matrix(&kv, &[0.0, 5.0]),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn smoothing_reproduces_constants() {
        let kv = KnotVector::uniform((0.0, 1.0), 3, 4).unwrap();
        let grid: Vec<f64> = (0..20).map(|j| j as f64 / 19.0).collect();
        let phi = basis_matrix(&kv, &grid).unwrap();
        let curve = smooth_least_squares(&[3.7; 20], &phi).unwrap();
        for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_abs_diff_eq!(eval_curve(&curve, t).unwrap(), 3.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn smoothing_reproduces_cubics() {
        let kv = KnotVector::new((0.0, 2.0), &[0.3, 0.9, 1.1, 1.7], 4).unwrap();
        let grid: Vec<f64> = (0..30).map(|j| 2.0 * j as f64 / 29.0).collect();
        let poly = |t: f64| 1.5 - 2.0 * t + 0.7 * t * t - 0.4 * t * t * t;
        let y: Vec<f64> = grid.iter().map(|&t| poly(t)).collect();
        let phi = basis_matrix(&kv, &grid).unwrap();
        let curve = smooth_least_squares(&y, &phi).unwrap();
        let fitted = phi.values() * curve.coefficients();
        for (f, yy) in fitted.iter().zip(&y) {
            assert_abs_diff_eq!(*f, *yy, epsilon = 1e-9);
        }
        for (row, &t) in grid.iter().enumerate() {
            assert_abs_diff_eq!(eval_curve(&curve, t).unwrap(), fitted[row], epsilon = 1e-13);
        }
    }

    #[test]
    fn least_squares_gradient_vanishes() {
        let kv = KnotVector::uniform((0.0, 1.0), 4, 4).unwrap();
        let grid: Vec<f64> = (0..40).map(|j| j as f64 / 39.0).collect();
        let y: Vec<f64> = grid
            .iter()
            .enumerate()
            .map(|(j, &t)| (6.0 * t).sin() + 0.05 * ((j * 7919 % 13) as f64 - 6.0) / 6.0)
            .collect();
        let phi = basis_matrix(&kv, &grid).unwrap();
        let c = smooth_least_squares(&y, &phi).unwrap();
        let p = phi.values();
        let grad = 2.0 * p.transpose() * p * c.coefficients() - 2.0 * p.transpose() * DVector::from_vec(y);
        assert!(grad.norm() < 1e-8, "gradient norm {}", grad.norm());
    }

    #[test]
    fn smoothing_errors() {
        let kv = KnotVector::uniform((0.0, 1.0), 3, 4).unwrap();
        let phi = basis_matrix(&kv, &[0.0, 0.5, 1.0]).unwrap();
        assert!(matches!(
            smooth_least_squares(&[1.0, 2.0, 3.0], &phi),
            Err(Error::Underdetermined { rows: 3, cols: 7 })
        ));
        // Every sample in one span leaves functions unconstrained.
        let grid = vec![0.1; 10];
        let phi = basis_matrix(&kv, &grid).unwrap();
        assert!(matches!(
            smooth_least_squares(&[1.0; 10], &phi),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn curve_evaluation() {
        let kv = KnotVector::uniform((0.0, 1.0), 2, 4).unwrap();
        let q = kv.num_basis();
        let flat = SmoothCurve::new(DVector::from_element(q, -2.5), kv.clone()).unwrap();
        let zero = SmoothCurve::new(DVector::zeros(q), kv.clone()).unwrap();
        for t in [0.0, 0.2, 0.5, 1.0] {
            assert_abs_diff_eq!(eval_curve(&flat, t).unwrap(), -2.5, epsilon = 1e-14);
            assert_eq!(eval_curve(&zero, t).unwrap(), 0.0);
        }
        assert!(eval_curve(&zero, 1.1).is_err());
        assert!(SmoothCurve::new(DVector::zeros(q + 1), kv).is_err());
    }
}
