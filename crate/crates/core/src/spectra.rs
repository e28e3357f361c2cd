//! Domain types for eigenvalue lists and the validated problem instance,
//! plus Vandermonde products.

use num_complex::Complex64;

use crate::clinalg::LogComplex;
use crate::error::{Error, Result};

/// Below this pairwise separation the Vandermonde denominators lose all
/// double-precision accuracy; callers may lower it at their own risk.
pub const DEFAULT_SEPARATION_TOL: f64 = 1e-10;

/// Ordered list of pairwise-distinct complex eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    /// Validate with the default separation tolerance.
    pub fn new(values: Vec<Complex64>) -> Result<Spectrum> {
        validate_spectrum(values, DEFAULT_SEPARATION_TOL)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Smallest distance from `z` to any eigenvalue.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.values.iter().map(|v| (z - v).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Check pairwise separation and non-emptiness; values are kept in the
/// given order.
pub fn validate_spectrum(values: Vec<Complex64>, separation_tol: f64) -> Result<Spectrum> {
    if values.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let gap = (values[i] - values[j]).norm();
            if gap <= separation_tol {
                return Err(Error::DegenerateSpectrum { i, j, gap, tol: separation_tol });
            }
        }
    }
    Ok(Spectrum { values })
}

/// A validated `(X, Y)` instance. Equal lengths are checked here; the
/// companion assumption `det E != 0` is enforced where the kernel is
/// factorized and surfaces as [`Error::SingularKernel`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemPair {
    x: Spectrum,
    y: Spectrum,
}

impl ProblemPair {
    pub fn new(x: Spectrum, y: Spectrum) -> Result<ProblemPair> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x_len: x.len(), y_len: y.len() });
        }
        Ok(ProblemPair { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &Spectrum {
        &self.x
    }

    pub fn y(&self) -> &Spectrum {
        &self.y
    }

    /// The exchanged pair `(Y, X)`.
    pub fn swapped(&self) -> ProblemPair {
        ProblemPair { x: self.y.clone(), y: self.x.clone() }
    }
}

/// `Δ = ∏_{i<j} (v_i - v_j)` in log form; the empty product (N = 1) is
/// exactly one.
pub fn vandermonde(s: &Spectrum) -> LogComplex {
    let v = s.values();
    let mut log_mag = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = v[i] - v[j];
            let m = d.norm();
            log_mag += m.ln();
            phase *= d / m;
        }
    }
    LogComplex::new(log_mag, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn accepts_distinct_integers() {
        let s = validate_spectrum(vec![c(0.0, 0.0), c(1.0, 0.0)], 1e-10).unwrap();
        assert_eq!(s.values(), &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn rejects_gap_below_tolerance() {
        let err = validate_spectrum(vec![c(1.0, 0.0), c(1.0 + 1e-12, 0.0)], 1e-10).unwrap_err();
        match err {
            Error::DegenerateSpectrum { i, j, gap, .. } => {
                assert_eq!((i, j), (0, 1));
                assert!(gap < 1e-10);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn single_element_is_vacuously_distinct() {
        let s = validate_spectrum(vec![c(2.0, 0.0)], 1e-10).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn empty_list_is_rejected() {
        assert!(matches!(validate_spectrum(vec![], 1e-10), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn pair_requires_equal_lengths() {
        let x = Spectrum::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let y = Spectrum::new(vec![c(2.0, 0.0)]).unwrap();
        assert!(matches!(ProblemPair::new(x, y), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn vandermonde_examples() {
        let one = vandermonde(&Spectrum::new(vec![c(5.0, 0.0)]).unwrap());
        assert!((one.to_complex() - c(1.0, 0.0)).norm() < 1e-15);

        let minus_one = vandermonde(&Spectrum::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap());
        assert!((minus_one.to_complex() - c(-1.0, 0.0)).norm() < 1e-15);

        // (2-1)(2-0)(1-0) = 2
        let two = vandermonde(&Spectrum::new(vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap());
        assert!((two.to_complex() - c(2.0, 0.0)).norm() < 1e-14);
    }

    fn spectrum_strategy(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n).prop_filter_map(
            "pairwise gaps",
            |pts| {
                let v: Vec<Complex64> = pts.into_iter().map(|(re, im)| c(re, im)).collect();
                for i in 0..v.len() {
                    for j in i + 1..v.len() {
                        if (v[i] - v[j]).norm() < 0.05 {
                            return None;
                        }
                    }
                }
                Some(v)
            },
        )
    }

    proptest! {
        #[test]
        fn adjacent_swap_flips_sign_exactly(vals in spectrum_strategy(4), k in 0usize..3) {
            let s = Spectrum::new(vals.clone()).unwrap();
            let base = vandermonde(&s);
            let mut swapped = vals;
            swapped.swap(k, k + 1);
            let flipped = vandermonde(&Spectrum::new(swapped).unwrap());
            prop_assert!((base.log_magnitude() - flipped.log_magnitude()).abs() < 1e-12);
            prop_assert!((base.phase() + flipped.phase()).norm() < 1e-12);
        }

        #[test]
        fn magnitude_invariant_under_permutation(vals in spectrum_strategy(5), seed in 0u64..1000) {
            let base = vandermonde(&Spectrum::new(vals.clone()).unwrap());
            let mut perm = vals;
            // cheap deterministic shuffle
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let permuted = vandermonde(&Spectrum::new(perm).unwrap());
            prop_assert!((base.log_magnitude() - permuted.log_magnitude()).abs() < 1e-11);
        }

        #[test]
        fn scaling_multiplies_by_power(vals in spectrum_strategy(4), scale in 0.5..3.0f64) {
            let n = vals.len();
            let base = vandermonde(&Spectrum::new(vals.clone()).unwrap());
            let scaled: Vec<Complex64> = vals.iter().map(|v| v * scale).collect();
            let s = vandermonde(&Spectrum::new(scaled).unwrap());
            let expect = base.log_magnitude() + (n * (n - 1) / 2) as f64 * scale.ln();
            let denom = expect.abs().max(1.0);
            prop_assert!((s.log_magnitude() - expect).abs() / denom < 1e-12);
        }
    }
}
