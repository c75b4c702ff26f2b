//! Cross-checks of the main modules against the oracles.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{naive_bspline, naive_stress_and_grad};
use crate::bspline::{eval_basis, KnotVector};
use crate::cmds::{classical_mds, reconstructed_dissimilarity};
use crate::dissimilarity::{euclidean_dissimilarity, DissimilarityMatrix, DissimilarityTensor};
use crate::error::Result;
use crate::fmds::{CoefficientSet, Objective};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &'static str, tolerance: f64, observed: f64) -> Self {
        Self {
            name,
            tolerance,
            observed,
            passed: observed <= tolerance,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {}  tol={:.1e}  max_dev={:.3e}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.tolerance,
            self.observed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "verification FAILED" })
    }
}

/// Runs every cross-check with a fixed seed.
pub fn run_all(seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (basis_dev, unity_dev) = basis_agreement(&mut rng, 1000)?;
    let (grad_dev, antisym_dev) = gradient_check(&mut rng, 100, |obj, ch, cj, h, j| obj.pair_gradients(ch, cj, h, j))?;
    let (stress_dev, full_grad_dev) = full_gradient_agreement(&mut rng, 25)?;
    let (cmds_dev, trailing_dev) = cmds_roundtrip(&mut rng, 50)?;
    let decomposition_dev = stress_decomposition(&mut rng, 50)?;
    Ok(VerifyReport {
        checks: vec![
            CheckOutcome::new("basis_vs_recursion", 1e-12, basis_dev),
            CheckOutcome::new("partition_of_unity", 1e-12, unity_dev),
            CheckOutcome::new("gradient_vs_fd", 1e-5, grad_dev),
            CheckOutcome::new("gradient_antisymmetry", 0.0, antisym_dev),
            CheckOutcome::new("stress_vs_naive", 1e-10, stress_dev),
            CheckOutcome::new("full_gradient_vs_naive", 1e-10, full_grad_dev),
            CheckOutcome::new("cmds_roundtrip", 1e-8, cmds_dev),
            CheckOutcome::new("cmds_trailing_eigs", 1e-8, trailing_dev),
            CheckOutcome::new("stress_decomposition", 1e-10, decomposition_dev),
        ],
    })
}

/// Knot vector of order 1..=4 with 0..=5 random interior knots on a random domain.
pub fn random_knots(rng: &mut impl Rng) -> KnotVector {
    let order = rng.random_range(1..=4);
    let a: f64 = rng.random_range(-2.0..1.0);
    let b = a + rng.random_range(0.5..3.0);
    let count = rng.random_range(0..=5);
    let mut interior: Vec<f64> = (0..count).map(|_| rng.random_range(a..b)).collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    interior.retain(|t| *t > a && *t < b);
    KnotVector::new((a, b), &interior, order).expect("sorted interior knots inside the domain")
}

/// A random point in the domain, hitting the ends and the knots now and then.
pub fn random_point(rng: &mut impl Rng, kv: &KnotVector) -> f64 {
    let (a, b) = kv.domain();
    match rng.random_range(0..10) {
        0 => a,
        1 => b,
        2 => {
            let bp = kv.breakpoints();
            bp[rng.random_range(0..bp.len())]
        }
        _ => rng.random_range(a..=b),
    }
}

/// Largest deviations `(|eval_basis − naive|, |Σφ − 1|)` over `draws` random cases.
pub fn basis_agreement(rng: &mut impl Rng, draws: usize) -> Result<(f64, f64)> {
    let mut basis_dev: f64 = 0.0;
    let mut unity_dev: f64 = 0.0;
    for _ in 0..draws {
        let kv = random_knots(rng);
        let t = random_point(rng, &kv);
        let fast = eval_basis(&kv, t)?;
        let slow = naive_bspline(&kv, t)?;
        for (x, y) in fast.iter().zip(&slow) {
            basis_dev = basis_dev.max((x - y).abs());
        }
        unity_dev = unity_dev.max((fast.iter().sum::<f64>() - 1.0).abs());
    }
    Ok((basis_dev, unity_dev))
}

/// A random tiny problem: `n ≤ 5`, `m ≤ 8`, `p ≤ 3`, `q ≤ 6`.
pub fn random_instance(rng: &mut impl Rng) -> Result<(CoefficientSet, DissimilarityTensor)> {
    let n = rng.random_range(2..=5);
    let p = rng.random_range(1..=3);
    let order = rng.random_range(2..=4);
    let interior = rng.random_range(0..=(6 - order));
    let knots = KnotVector::uniform((0.0, 1.0), interior, order)?;
    let m = rng.random_range(2..=8);
    let grid: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
    let slices = (0..m)
        .map(|_| DissimilarityMatrix::from_upper(n, |_, _| rng.random_range(0.0..2.0)))
        .collect::<Result<Vec<_>>>()?;
    let tensor = DissimilarityTensor::new(grid, slices)?;
    let q = knots.num_basis();
    let matrices = (0..n)
        .map(|_| DMatrix::from_fn(p, q, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    Ok((CoefficientSet::new(knots, matrices)?, tensor))
}

/// Central finite differences of the pair term against `grad`, with step
/// `1e-6 (1 + |entry|)`.
///
/// Returns the largest relative error `|g − fd| / max(|g|, |fd|, 1e-4 (1 + f))`
/// and the largest `|∂f/∂C_j + ∂f/∂C_h|`. The floor keeps entries that are
/// zero up to finite-difference roundoff from dominating.
pub fn gradient_check(
    rng: &mut impl Rng,
    trials: usize,
    grad: impl Fn(&Objective<'_>, &DMatrix<f64>, &DMatrix<f64>, usize, usize) -> (DMatrix<f64>, DMatrix<f64>),
) -> Result<(f64, f64)> {
    let mut rel: f64 = 0.0;
    let mut antisym: f64 = 0.0;
    for _ in 0..trials {
        let (c, tensor) = random_instance(rng)?;
        let obj = Objective::new(&tensor, c.knots())?;
        let n = c.n();
        let h = rng.random_range(0..n);
        let j = (h + rng.random_range(1..n)) % n;
        let (g_h, g_j) = grad(&obj, c.matrix(h), c.matrix(j), h, j);
        antisym = antisym.max((&g_h + &g_j).amax());

        let f0 = obj.pair_subfunction(c.matrix(h), c.matrix(j), h, j);
        let floor = 1e-4 * (1.0 + f0.abs());
        for (which, analytic) in [(h, &g_h), (j, &g_j)] {
            for idx in 0..analytic.len() {
                let entry = c.matrix(which)[idx];
                let step = 1e-6 * (1.0 + entry.abs());
                let eval = |delta: f64| {
                    let mut ch = c.matrix(h).clone();
                    let mut cj = c.matrix(j).clone();
                    if which == h {
                        ch[idx] += delta;
                    } else {
                        cj[idx] += delta;
                    }
                    obj.pair_subfunction(&ch, &cj, h, j)
                };
                let fd = (eval(step) - eval(-step)) / (2.0 * step);
                let g = analytic[idx];
                rel = rel.max((g - fd).abs() / g.abs().max(fd.abs()).max(floor));
            }
        }
    }
    Ok((rel, antisym))
}

/// Relative deviations of the modular stress and full gradient from
/// [`naive_stress_and_grad`].
pub fn full_gradient_agreement(rng: &mut impl Rng, trials: usize) -> Result<(f64, f64)> {
    let mut stress_dev: f64 = 0.0;
    let mut grad_dev: f64 = 0.0;
    for _ in 0..trials {
        let (c, tensor) = random_instance(rng)?;
        let obj = Objective::new(&tensor, c.knots())?;
        let (f_naive, g_naive) = naive_stress_and_grad(&c, &tensor)?;
        let f = obj.stress(&c)?;
        stress_dev = stress_dev.max((f - f_naive).abs() / (1.0 + f_naive.abs()));
        let grads = obj.full_gradient(c.matrices());
        for (g, gn) in grads.iter().zip(&g_naive) {
            let scale = 1.0 + gn.amax();
            grad_dev = grad_dev.max((g - gn).amax() / scale);
        }
    }
    Ok((stress_dev, grad_dev))
}

/// Classical MDS on Euclidean distances of random clouds in `ℝᵖ`, `n ∈ [4, 20]`,
/// `p ∈ [1, 3]`. Returns the largest reconstruction error and the largest
/// `|λ_k| / λ_1` over the trailing `n − p` eigenvalues.
pub fn cmds_roundtrip(rng: &mut impl Rng, trials: usize) -> Result<(f64, f64)> {
    let mut dist_dev: f64 = 0.0;
    let mut trailing: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(4..=20);
        let p = rng.random_range(1..=3);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let d = euclidean_dissimilarity(&points)?;
        let sol = classical_mds(&d, p)?;
        let rec = reconstructed_dissimilarity(&sol);
        dist_dev = dist_dev.max((rec.values() - d.values()).amax());
        let lead = sol.eigenvalues[0];
        for lambda in &sol.eigenvalues[p..] {
            trailing = trailing.max(lambda.abs() / lead);
        }
    }
    Ok((dist_dev, trailing))
}

/// Largest `|Σ_{h<j} f − F| / (1 + F)`.
pub fn stress_decomposition(rng: &mut impl Rng, trials: usize) -> Result<f64> {
    let mut dev: f64 = 0.0;
    for _ in 0..trials {
        let (c, tensor) = random_instance(rng)?;
        let obj = Objective::new(&tensor, c.knots())?;
        let f = obj.stress(&c)?;
        let mut sum = 0.0;
        for h in 0..c.n() {
            for j in h + 1..c.n() {
                sum += obj.pair_subfunction(c.matrix(h), c.matrix(j), h, j);
            }
        }
        dev = dev.max((sum - f).abs() / (1.0 + f));
    }
    Ok(dev)
}
