//! Static and time-varying dissimilarity matrices.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for [`validate`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// A symmetric, zero-diagonal, nonnegative `n × n` matrix.
///
/// The constructor enforces these axioms exactly. The triangle inequality is
/// not required: correlation-based dissimilarities may violate it.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    values: DMatrix<f64>,
}

impl DissimilarityMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let (n, cols) = values.shape();
        if n != cols {
            return Err(Error::Shape(format!("{n}x{cols} dissimilarity matrix is not square")));
        }
        if n == 0 {
            return Err(Error::Shape("empty dissimilarity matrix".into()));
        }
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(Error::InvalidDissimilarity(format!(
                    "diagonal entry ({i},{i}) is {}",
                    values[(i, i)]
                )));
            }
            for j in i + 1..n {
                let d = values[(i, j)];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidDissimilarity(format!(
                        "entry ({i},{j}) = {d} is not a finite nonnegative value"
                    )));
                }
                if values[(j, i)] != d {
                    return Err(Error::InvalidDissimilarity(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    /// Builds the matrix from a function of the upper triangle `i < j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[(i, j)] = d;
                values[(j, i)] = d;
            }
        }
        Self::new(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    pub fn validate(&self, tol: f64) -> ValidityReport {
        validate(&self.values, tol)
    }
}

/// Dissimilarity matrices on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityTensor {
    time_grid: Vec<f64>,
    slices: Vec<DissimilarityMatrix>,
}

impl DissimilarityTensor {
    pub fn new(time_grid: Vec<f64>, slices: Vec<DissimilarityMatrix>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::Shape("tensor needs at least one slice".into()));
        }
        if time_grid.len() != slices.len() {
            return Err(Error::Shape(format!(
                "{} time stamps for {} slices",
                time_grid.len(),
                slices.len()
            )));
        }
        if time_grid.iter().any(|t| !t.is_finite()) || time_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Shape("time grid must be finite and strictly increasing".into()));
        }
        let n = slices[0].n();
        if let Some(k) = slices.iter().position(|s| s.n() != n) {
            return Err(Error::Shape(format!(
                "slice {k} has {} objects, expected {n}",
                slices[k].n()
            )));
        }
        Ok(Self { time_grid, slices })
    }

    /// The same matrix repeated at every time stamp.
    pub fn constant(time_grid: Vec<f64>, matrix: &DissimilarityMatrix) -> Result<Self> {
        let slices = vec![matrix.clone(); time_grid.len()];
        Self::new(time_grid, slices)
    }

    pub fn n(&self) -> usize {
        self.slices[0].n()
    }

    pub fn m(&self) -> usize {
        self.slices.len()
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn slices(&self) -> &[DissimilarityMatrix] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &DissimilarityMatrix {
        &self.slices[k]
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.slices[k].get(i, j)
    }

    pub fn max(&self) -> f64 {
        self.slices.iter().map(DissimilarityMatrix::max).fold(0.0, f64::max)
    }

    /// Same slices on a new, strictly increasing grid.
    pub fn with_time_grid(&self, time_grid: Vec<f64>) -> Result<Self> {
        Self::new(time_grid, self.slices.clone())
    }
}

/// Objects observed on a shared time grid. Each time point carries `features`
/// values per object, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPanel {
    labels: Vec<String>,
    time_grid: Vec<f64>,
    features: usize,
    observations: Vec<Vec<f64>>,
}

impl ObjectPanel {
    pub fn new(
        labels: Vec<String>,
        time_grid: Vec<f64>,
        features: usize,
        observations: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if features == 0 {
            return Err(Error::Shape("panel needs at least one feature".into()));
        }
        if labels.len() != observations.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} observation series",
                labels.len(),
                observations.len()
            )));
        }
        let m = time_grid.len();
        for (label, obs) in labels.iter().zip(&observations) {
            if obs.len() != m * features {
                return Err(Error::Shape(format!(
                    "object `{label}` has {} values, expected {}",
                    obs.len(),
                    m * features
                )));
            }
            if obs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("object `{label}` has non-finite values")));
            }
        }
        Ok(Self {
            labels,
            time_grid,
            features,
            observations,
        })
    }

    /// One scalar series per object.
    pub fn scalar(labels: Vec<String>, time_grid: Vec<f64>, series: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(labels, time_grid, 1, series)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.time_grid.len()
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    /// All values of object `i` over the time points in `window`.
    pub fn window(&self, i: usize, window: Range<usize>) -> &[f64] {
        &self.observations[i][window.start * self.features..window.end * self.features]
    }

    pub fn series(&self, i: usize) -> &[f64] {
        &self.observations[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Correlation,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "correlation" => Ok(Self::Correlation),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

/// Pairwise Euclidean distances between feature vectors.
pub fn euclidean_dissimilarity<V: AsRef<[f64]>>(points: &[V]) -> Result<DissimilarityMatrix> {
    let Some(first) = points.first() else {
        return Err(Error::Shape("no points given".into()));
    };
    let r = first.as_ref().len();
    if let Some(i) = points.iter().position(|p| p.as_ref().len() != r) {
        return Err(Error::Shape(format!(
            "point {i} has dimension {}, expected {r}",
            points[i].as_ref().len()
        )));
    }
    DissimilarityMatrix::from_upper(points.len(), |i, j| {
        points[i]
            .as_ref()
            .iter()
            .zip(points[j].as_ref())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

/// Pearson correlation of two equally long series.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(x, y).map_err(|which| Error::DegenerateSeries {
        label: which.to_string(),
    })
}

/// `Err(0)` or `Err(1)` names the constant series.
fn pearson(x: &[f64], y: &[f64]) -> std::result::Result<f64, usize> {
    assert_eq!(x.len(), y.len(), "correlated series must have equal length");
    let r = x.len() as f64;
    let is_constant = |s: &[f64]| s.iter().all(|v| *v == s[0]);
    if x.len() < 2 || is_constant(x) {
        return Err(0);
    }
    if is_constant(y) {
        return Err(1);
    }
    let mx = x.iter().sum::<f64>() / r;
    let my = y.iter().sum::<f64>() / r;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(0);
    }
    if syy == 0.0 {
        return Err(1);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `d_ij = (1 − R_ij) / 2` over the time points in `window`.
pub fn correlation_dissimilarity(panel: &ObjectPanel, window: Range<usize>) -> Result<DissimilarityMatrix> {
    if panel.features != 1 {
        return Err(Error::Shape(format!(
            "correlation needs scalar series, panel has {} features",
            panel.features
        )));
    }
    if window.end > panel.m() || window.len() < 2 {
        return Err(Error::Config(format!(
            "correlation window {window:?} must hold at least 2 of {} time points",
            panel.m()
        )));
    }
    let n = panel.n();
    // Report degenerate series up front so the error names the right object.
    for i in 0..n {
        let w = panel.window(i, window.clone());
        if w.iter().all(|v| *v == w[0]) {
            return Err(Error::DegenerateSeries {
                label: panel.labels[i].clone(),
            });
        }
    }
    let mut failure = None;
    let d = DissimilarityMatrix::from_upper(n, |i, j| {
        match pearson(panel.window(i, window.clone()), panel.window(j, window.clone())) {
            Ok(r) => (1.0 - r) / 2.0,
            Err(which) => {
                failure.get_or_insert([i, j][which]);
                0.0
            }
        }
    })?;
    match failure {
        Some(i) => Err(Error::DegenerateSeries {
            label: panel.labels[i].clone(),
        }),
        None => Ok(d),
    }
}

/// One dissimilarity slice per window position, stamped at the window's last
/// time point.
pub fn rolling_dissimilarity_tensor(
    panel: &ObjectPanel,
    metric: Metric,
    window_len: usize,
    stride: usize,
) -> Result<DissimilarityTensor> {
    let m = panel.m();
    if window_len == 0 {
        return Err(Error::Config("window length must be at least 1".into()));
    }
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    if window_len > m {
        return Err(Error::WindowTooLong { window: window_len, len: m });
    }
    if metric == Metric::Correlation && window_len < 2 {
        return Err(Error::Config("correlation needs a window of at least 2".into()));
    }

    let mut grid = Vec::new();
    let mut slices = Vec::new();
    for start in (0..=m - window_len).step_by(stride) {
        let window = start..start + window_len;
        let slice = match metric {
            Metric::Euclidean => {
                let points: Vec<&[f64]> = (0..panel.n()).map(|i| panel.window(i, window.clone())).collect();
                euclidean_dissimilarity(&points)?
            }
            Metric::Correlation => correlation_dissimilarity(panel, window.clone())?,
        };
        grid.push(panel.time_grid[window.end - 1]);
        slices.push(slice);
    }
    DissimilarityTensor::new(grid, slices)
}

/// Outcome of checking the dissimilarity axioms on a raw matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub nonnegative: bool,
    pub zero_diagonal: bool,
    pub symmetric: bool,
    /// Informational; not required of a dissimilarity.
    pub triangle_inequality: bool,
}

impl ValidityReport {
    /// Nonnegativity, zero diagonal and symmetry all hold.
    pub fn is_dissimilarity(&self) -> bool {
        self.nonnegative && self.zero_diagonal && self.symmetric
    }
}

pub fn validate(values: &DMatrix<f64>, tol: f64) -> ValidityReport {
    let n = values.nrows().min(values.ncols());
    let mut report = ValidityReport {
        nonnegative: values.nrows() == values.ncols(),
        zero_diagonal: true,
        symmetric: values.nrows() == values.ncols(),
        triangle_inequality: true,
    };
    for i in 0..n {
        if values[(i, i)].abs() > tol {
            report.zero_diagonal = false;
        }
        for j in 0..n {
            let d = values[(i, j)];
            if d.is_nan() || d < -tol {
                report.nonnegative = false;
            }
            let gap = (d - values[(j, i)]).abs();
            if gap.is_nan() || gap > tol {
                report.symmetric = false;
            }
            for s in 0..n {
                if d > values[(i, s)] + values[(s, j)] + tol {
                    report.triangle_inequality = false;
                }
            }
        }
    }
    report
}
