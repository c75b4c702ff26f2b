use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    init_from_cmds, random_init, AdamState, Baseline, CoefficientSet, FitConfig, FitResult, InitMode,
    Objective, DIVERGENCE_LIMIT,
};
use crate::dissimilarity::DissimilarityTensor;
use crate::error::{Error, Result};

/// Initializes according to `config.init` and runs [`fit_from`].
pub fn fit(tensor: &DissimilarityTensor, config: &FitConfig) -> Result<FitResult> {
    let initial = match config.init {
        InitMode::Cmds => init_from_cmds(tensor, config)?,
        InitMode::Random => random_init(tensor, config)?,
    };
    fit_from(tensor, config, initial)
}

/// Minimizes the stress starting from `initial`.
///
/// With [`Baseline::Adam`], an epoch visits the first indices `h` of
/// `0..n-1` in a fresh random order and, for each, sweeps `j = h+1..n`,
/// applying one Adam update to both `C_h` and `C_j` from the pair gradients.
/// Moments persist across epochs. The fit stops once no coefficient matrix
/// moved by `config.tolerance` or more (Frobenius norm) during an epoch.
pub fn fit_from(tensor: &DissimilarityTensor, config: &FitConfig, initial: CoefficientSet) -> Result<FitResult> {
    config.validate()?;
    let n = tensor.n();
    if n < 2 {
        return Err(Error::InsufficientObjects(n));
    }
    if initial.dim() != config.dim {
        return Err(Error::Shape(format!(
            "initial coefficients have dimension {}, config asks for {}",
            initial.dim(),
            config.dim
        )));
    }
    let knots = initial.knots().clone();
    let objective = Objective::new(tensor, &knots)?;
    let initial_stress = objective.stress(&initial)?;
    if !initial_stress.is_finite() || initial_stress > DIVERGENCE_LIMIT {
        return Err(Error::Diverged { epoch: 0, stress: initial_stress });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let (p, q) = (initial.dim(), initial.q());
    let mut coeffs = initial.into_matrices();
    let mut adam = AdamState::new(n, p, q, config.adam_params());
    let mut order: Vec<usize> = (0..n - 1).collect();

    let mut stress_history = Vec::new();
    let mut displacement_history = Vec::new();
    let mut converged = false;

    for epoch in 1..=config.max_epochs {
        let before = coeffs.clone();
        match config.baseline {
            Baseline::Adam => {
                order.shuffle(&mut rng);
                for &h in &order {
                    for j in h + 1..n {
                        let (g_h, g_j) = objective.pair_gradients(&coeffs[h], &coeffs[j], h, j);
                        let step_h = adam.step(h, &g_h);
                        let step_j = adam.step(j, &g_j);
                        coeffs[h] += step_h;
                        coeffs[j] += step_j;
                    }
                }
            }
            Baseline::FullBatchGd => {
                let grads = objective.full_gradient(&coeffs);
                for (c, g) in coeffs.iter_mut().zip(&grads) {
                    *c -= config.alpha * g;
                }
            }
        }

        let f = objective.stress_of(&coeffs);
        if !f.is_finite() || f > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { epoch, stress: f });
        }
        let displacement = max_displacement(&before, &coeffs);
        stress_history.push(f);
        displacement_history.push(displacement);
        if displacement < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        epochs: stress_history.len(),
        coefficients: CoefficientSet::new(knots, coeffs)?,
        initial_stress,
        stress_history,
        displacement_history,
        converged,
    })
}

fn max_displacement(before: &[DMatrix<f64>], after: &[DMatrix<f64>]) -> f64 {
    before
        .iter()
        .zip(after)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
