use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bspline::{eval_curve, KnotVector, SmoothCurve};
use crate::dissimilarity::{rolling_dissimilarity_tensor, DissimilarityTensor, Metric, ObjectPanel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Fixed random points; only observation noise varies over time.
    StaticCloud,
    /// Points on circles with distinct radii, phases and angular speeds.
    SmoothRotation,
    /// Cubic splines whose coefficients follow a Gaussian random walk.
    RandomWalkSmoothed,
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static_cloud" => Ok(Self::StaticCloud),
            "smooth_rotation" => Ok(Self::SmoothRotation),
            "random_walk_smoothed" => Ok(Self::RandomWalkSmoothed),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub p_true: usize,
    pub m: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// Observed (noisy) positions, `p_true` features per time point.
    pub panel: ObjectPanel,
    /// Pointwise Euclidean distances of the observed positions.
    pub tensor: DissimilarityTensor,
    /// Noise-free positions, one `n × p_true` matrix per time point.
    pub truth: Vec<DMatrix<f64>>,
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("scenario needs at least 2 objects".into()));
        }
        if self.m < 1 {
            return Err(Error::Config("scenario needs at least 1 time point".into()));
        }
        if self.p_true < 1 {
            return Err(Error::Config("scenario dimension must be at least 1".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Config("noise_sd must be finite and nonnegative".into()));
        }
        if self.kind == ScenarioKind::SmoothRotation && self.p_true != 2 {
            return Err(Error::Config("smooth_rotation lives in the plane (p_true = 2)".into()));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Vec<f64> {
        if self.m == 1 {
            return vec![0.0];
        }
        (0..self.m).map(|k| k as f64 / (self.m - 1) as f64).collect()
    }
}

pub fn generate(scenario: &SyntheticScenario) -> Result<SyntheticData> {
    scenario.validate()?;
    let SyntheticScenario { kind, n, p_true: p, m, noise_sd, seed } = *scenario;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = scenario.time_grid();

    let truth: Vec<DMatrix<f64>> = match kind {
        ScenarioKind::StaticCloud => {
            let base = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
            vec![base; m]
        }
        ScenarioKind::SmoothRotation => {
            let orbits: Vec<(f64, f64, f64)> = (0..n)
                .map(|i| {
                    let radius = 0.5 + 0.5 * i as f64;
                    let phase = 2.0 * PI * rng.random::<f64>();
                    let speed = PI * rng.random_range(0.5..1.5);
                    (radius, phase, speed)
                })
                .collect();
            grid.iter()
                .map(|&t| {
                    DMatrix::from_fn(n, 2, |i, a| {
                        let (radius, phase, speed) = orbits[i];
                        let angle = speed * t + phase;
                        radius * if a == 0 { angle.cos() } else { angle.sin() }
                    })
                })
                .collect()
        }
        ScenarioKind::RandomWalkSmoothed => {
            let knots = KnotVector::uniform((0.0, 1.0), 2, 4)?;
            let q = knots.num_basis();
            let mut curves = Vec::with_capacity(n * p);
            for _ in 0..n * p {
                let mut level: f64 = rng.random_range(-1.0..1.0);
                let coefs: Vec<f64> = (0..q)
                    .map(|_| {
                        let step: f64 = rng.sample(StandardNormal);
                        level += 0.5 * step;
                        level
                    })
                    .collect();
                curves.push(SmoothCurve::new(DVector::from_vec(coefs), knots.clone())?);
            }
            grid.iter()
                .map(|&t| {
                    let mut x = DMatrix::zeros(n, p);
                    for i in 0..n {
                        for a in 0..p {
                            x[(i, a)] = eval_curve(&curves[i * p + a], t)?;
                        }
                    }
                    Ok(x)
                })
                .collect::<Result<_>>()?
        }
    };

    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::Config(e.to_string()))?;
    let observations: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            truth
                .iter()
                .flat_map(|x| x.row(i).iter().copied().collect::<Vec<_>>())
                .map(|v| if noise_sd > 0.0 { v + noise.sample(&mut rng) } else { v })
                .collect()
        })
        .collect();
    let labels = (1..=n).map(|i| format!("obj{i}")).collect();
    let panel = ObjectPanel::new(labels, grid, p, observations)?;
    let tensor = rolling_dissimilarity_tensor(&panel, Metric::Euclidean, 1, 1)?;
    Ok(SyntheticData { panel, tensor, truth })
}
