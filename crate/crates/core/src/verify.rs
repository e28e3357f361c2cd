//! Verification campaigns: the full property battery (oracle agreement, sum
//! rules, symmetries, pole reconstruction) at configurable dimension, trial
//! count, seed, and tolerance, with a machine-readable report.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::correlators::correlator_matrix;
use crate::error::Result;
use crate::oracles::{
    morozov_subset_sum, permutation_product_form, stream_rng, MAX_PERMUTATION_DIM,
    MAX_SUBSET_SUM_DIM,
};
use crate::resolvent::{pole_expansion_check, resolvent_w, ResolventEvaluator, ResolventPoint};
use crate::spectra::{ProblemPair, Spectrum};

/// One named check with its worst observed error.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Spectrum with entries uniform in the complex unit square and pairwise
/// gaps above 0.1; the standard campaign draw.
pub fn random_unit_square_spectrum(rng: &mut ChaCha8Rng, n: usize) -> Spectrum {
    'outer: loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                if (v[i] - v[j]).norm() <= 0.1 {
                    continue 'outer;
                }
            }
        }
        return Spectrum::new(v).expect("gap-filtered draw is valid");
    }
}

pub fn random_unit_square_pair(rng: &mut ChaCha8Rng, n: usize) -> ProblemPair {
    let x = random_unit_square_spectrum(rng, n);
    let y = random_unit_square_spectrum(rng, n);
    ProblemPair::new(x, y).expect("equal lengths by construction")
}

/// Point in a box around the unit square, at distance > 0.3 from both
/// spectra so resolvent magnitudes stay O(1).
pub fn random_off_pole_point(rng: &mut ChaCha8Rng, pair: &ProblemPair) -> ResolventPoint {
    loop {
        let x = Complex64::new(rng.gen_range(-1.5..2.5), rng.gen_range(-1.5..2.5));
        let y = Complex64::new(rng.gen_range(-1.5..2.5), rng.gen_range(-1.5..2.5));
        if pair.x().distance_to(x) > 0.3 && pair.y().distance_to(y) > 0.3 {
            return ResolventPoint::new(x, y);
        }
    }
}

/// Run the battery at dimension `n` over `trials` random pairs.
pub fn run_verification(n: usize, trials: usize, seed: u64, tol: f64) -> Result<VerifyReport> {
    let mut checks = Vec::new();

    // a) oracle agreement with the resolvent determinant
    if n <= MAX_PERMUTATION_DIM {
        let mut rng = stream_rng(seed, 1);
        let mut max_err = 0.0f64;
        let mut cases = 0;
        for _ in 0..trials {
            let pair = random_unit_square_pair(&mut rng, n);
            let pt = random_off_pole_point(&mut rng, &pair);
            let w = resolvent_w(&pair, &pt)?.w;
            let perm = permutation_product_form(&pair, &pt)?;
            let scale = w.norm().max(1e-10);
            max_err = max_err.max((w - perm).norm() / scale);
            if n <= MAX_SUBSET_SUM_DIM {
                let sub = morozov_subset_sum(&pair, &pt)?;
                max_err = max_err.max((w - sub).norm() / scale);
                max_err = max_err.max((perm - sub).norm() / scale);
            }
            cases += 1;
        }
        let name = if n <= MAX_SUBSET_SUM_DIM { "oracle-triangle" } else { "oracle-permutation" };
        checks.push(check(name, cases, max_err, tol));
    }

    // b) both determinant forms of the resolvent
    {
        let mut rng = stream_rng(seed, 2);
        let mut max_err = 0.0f64;
        let mut cases = 0;
        for _ in 0..trials {
            let pair = random_unit_square_pair(&mut rng, n);
            let eval = ResolventEvaluator::new(&pair)?;
            if eval.condition_estimate() >= 1e6 {
                continue; // the f64 ratio form is documented only below this
            }
            let pt = random_off_pole_point(&mut rng, &pair);
            let a = eval.w(&pt)?.w;
            let b = eval.w_ratio_form(&pt)?.w;
            max_err = max_err.max((a - b).norm() / a.norm().max(1e-10));
            cases += 1;
        }
        checks.push(check("resolvent-forms-agreement", cases, max_err, tol));
    }

    // c) doubly stochastic sum rules
    {
        let mut rng = stream_rng(seed, 3);
        let mut max_err = 0.0f64;
        for _ in 0..trials {
            let pair = random_unit_square_pair(&mut rng, n);
            let m = correlator_matrix(&pair)?;
            max_err = max_err.max(m.max_sum_deviation());
        }
        checks.push(check("doubly-stochastic-sums", trials, max_err, tol.max(1e-8)));
    }

    // d) exchange symmetry: W and the correlator transpose
    {
        let mut rng = stream_rng(seed, 4);
        let mut max_err = 0.0f64;
        for _ in 0..trials {
            let pair = random_unit_square_pair(&mut rng, n);
            let swapped = pair.swapped();
            let pt = random_off_pole_point(&mut rng, &pair);
            let a = resolvent_w(&pair, &pt)?.w;
            let b = resolvent_w(&swapped, &ResolventPoint::new(pt.y, pt.x))?.w;
            max_err = max_err.max((a - b).norm() / a.norm().max(1e-10));
            let ma = correlator_matrix(&pair)?;
            let mb = correlator_matrix(&swapped)?;
            for i in 0..n {
                for j in 0..n {
                    max_err = max_err.max((ma.entry(i, j) - mb.entry(j, i)).norm());
                }
            }
        }
        checks.push(check("exchange-symmetry", trials, max_err, tol));
    }

    // e) pole reconstruction of W from the correlator matrix
    {
        let mut rng = stream_rng(seed, 5);
        let mut max_err = 0.0f64;
        let points_per_pair = 20;
        let pairs = trials.clamp(1, 5);
        for _ in 0..pairs {
            let pair = random_unit_square_pair(&mut rng, n);
            let m = correlator_matrix(&pair)?;
            for _ in 0..points_per_pair {
                let pt = random_off_pole_point(&mut rng, &pair);
                max_err = max_err.max(pole_expansion_check(&pair, &m, &pt)?);
            }
        }
        checks.push(check("pole-reconstruction", pairs * points_per_pair, max_err, tol));
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { n, trials, seed, tolerance: tol, checks, passed })
}

fn check(name: &str, cases: usize, max_error: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        cases,
        max_error,
        tolerance,
        passed: max_error <= tolerance,
    }
}
