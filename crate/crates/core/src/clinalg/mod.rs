//! Overflow-safe complex linear algebra: the kernel matrix `E_ij = e^{x_i y_j}`,
//! log-domain determinants, and linear solves that apply `E⁻¹` without ever
//! forming it.

pub mod dd;
mod lu;

pub use lu::LuFactors;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::ProblemPair;
use dd::{Dd, DdComplex, DdDet, DdMatrix};

/// A complex number stored as (log-magnitude, unit phase), so that products
/// and quotients of astronomically large or small values stay representable.
///
/// An exact zero is encoded as `log_magnitude = -inf` with phase 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    log_magnitude: f64,
    phase: Complex64,
}

impl LogComplex {
    pub fn new(log_magnitude: f64, phase: Complex64) -> LogComplex {
        let n = phase.norm();
        if n == 0.0 || log_magnitude == f64::NEG_INFINITY {
            return LogComplex::zero();
        }
        LogComplex { log_magnitude, phase: phase / n }
    }

    pub fn zero() -> LogComplex {
        LogComplex { log_magnitude: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn one() -> LogComplex {
        LogComplex { log_magnitude: 0.0, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn from_complex(z: Complex64) -> LogComplex {
        let n = z.norm();
        if n == 0.0 {
            LogComplex::zero()
        } else {
            LogComplex { log_magnitude: n.ln(), phase: z / n }
        }
    }

    /// `e^w` for a complex exponent `w`, without evaluating the exponential.
    pub fn from_exponent(w: Complex64) -> LogComplex {
        LogComplex { log_magnitude: w.re, phase: Complex64::from_polar(1.0, w.im) }
    }

    pub fn from_real(v: f64) -> LogComplex {
        LogComplex::from_complex(Complex64::new(v, 0.0))
    }

    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// Collapse to an ordinary complex number; overflows to infinity and
    /// underflows to zero outside the f64 exponent range.
    pub fn to_complex(&self) -> Complex64 {
        self.phase * self.log_magnitude.exp()
    }

    pub fn recip(&self) -> LogComplex {
        LogComplex { log_magnitude: -self.log_magnitude, phase: self.phase.conj() }
    }

    /// Log-domain sum; exact relative to the larger operand.
    pub fn add(&self, other: &LogComplex) -> LogComplex {
        if self.is_zero() {
            return *other;
        }
        if other.is_zero() {
            return *self;
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let z = big.phase + small.phase * (small.log_magnitude - big.log_magnitude).exp();
        let n = z.norm();
        if n == 0.0 {
            return LogComplex::zero();
        }
        LogComplex { log_magnitude: big.log_magnitude + n.ln(), phase: z / n }
    }
}

impl std::ops::Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::zero();
        }
        LogComplex::new(self.log_magnitude + rhs.log_magnitude, self.phase * rhs.phase)
    }
}

impl std::ops::Div for LogComplex {
    type Output = LogComplex;
    fn div(self, rhs: LogComplex) -> LogComplex {
        self * rhs.recip()
    }
}

impl std::ops::Neg for LogComplex {
    type Output = LogComplex;
    fn neg(self) -> LogComplex {
        LogComplex { log_magnitude: self.log_magnitude, phase: -self.phase }
    }
}

/// Row-scaled representation of the kernel `E_ij = e^{x_i y_j}`: row shifts
/// `m_i = max_j Re(x_i y_j)` and scaled entries `e^{x_i y_j - m_i}`, so every
/// stored entry has modulus at most one.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    n: usize,
    row_shifts: Vec<f64>,
    scaled: Array2<Complex64>,
    // spectra retained so that extended-precision paths can rebuild entries
    // from exact inputs instead of inheriting f64 rounding
    x: Vec<Complex64>,
    y: Vec<Complex64>,
}

/// Build the row-scaled kernel for a validated pair.
pub fn build_kernel(pair: &ProblemPair) -> KernelMatrix {
    KernelMatrix::from_raw_spectra(pair.x().values(), pair.y().values())
}

impl KernelMatrix {
    pub(crate) fn from_raw_spectra(x: &[Complex64], y: &[Complex64]) -> KernelMatrix {
        let n = x.len();
        assert_eq!(n, y.len());
        let mut row_shifts = vec![0.0; n];
        let mut scaled = Array2::zeros((n, n));
        for i in 0..n {
            let mut m = f64::NEG_INFINITY;
            for j in 0..n {
                m = m.max((x[i] * y[j]).re);
            }
            row_shifts[i] = m;
            for j in 0..n {
                scaled[[i, j]] = (x[i] * y[j] - Complex64::new(m, 0.0)).exp();
            }
        }
        KernelMatrix { n, row_shifts, scaled, x: x.to_vec(), y: y.to_vec() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_shifts(&self) -> &[f64] {
        &self.row_shifts
    }

    pub fn scaled_entries(&self) -> &Array2<Complex64> {
        &self.scaled
    }

    /// Full entry `e^{x_i y_j}` in log form.
    pub fn entry_log(&self, i: usize, j: usize) -> LogComplex {
        LogComplex::from_exponent(self.x[i] * self.y[j])
    }

    /// Scaled entries recomputed in double-double from the spectra, so the
    /// entry values carry ~31 correct digits instead of 16.
    pub(crate) fn dd_scaled_entries(&self) -> DdMatrix {
        let mut m = DdMatrix::zeros(self.n);
        for i in 0..self.n {
            let shift = Dd::from_f64(self.row_shifts[i]);
            for j in 0..self.n {
                let p = DdComplex::from_c64(self.x[i]).mul(DdComplex::from_c64(self.y[j]));
                let e = DdComplex::exp(p.re.sub(shift), p.im);
                m.set(i, j, e);
            }
        }
        m
    }
}

/// Log-domain determinant of the full kernel. Errors with [`Error::SingularKernel`]
/// when the matrix is exactly singular, which violates the `det E != 0`
/// assumption every downstream identity rests on.
pub fn logdet(k: &KernelMatrix) -> Result<LogComplex> {
    let det = k.dd_scaled_entries().det();
    if det.is_zero() {
        return Err(Error::SingularKernel { pivot: 0 });
    }
    let shift: f64 = k.row_shifts.iter().sum();
    Ok(LogComplex::new(det.log_magnitude() + shift, det.phase()))
}

/// Solve `G E = F` (that is, `G = F E⁻¹`) with one factorization of the
/// transposed scaled kernel reused across all rows of `F`.
pub fn solve_right(k: &KernelMatrix, f: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let fact = KernelFactorization::new(k)?;
    let mut g = fact.solve_right_scaled(f);
    // undo the row scaling of E: G = G_scaled * diag(e^{-m_j})
    for j in 0..k.n {
        let s = (-k.row_shifts[j]).exp();
        for i in 0..k.n {
            g[[i, j]] *= s;
        }
    }
    Ok(g)
}

/// 1-norm condition estimate of the scaled kernel (diagnostic only).
pub fn condition_estimate(k: &KernelMatrix) -> f64 {
    match KernelFactorization::new(k) {
        Ok(f) => f.condition_estimate(),
        Err(_) => f64::INFINITY,
    }
}

/// Shareable factorization of a kernel: f64 LU of the transposed scaled
/// matrix for solves, and a double-double determinant for log-det work.
#[derive(Clone, Debug)]
pub struct KernelFactorization {
    n: usize,
    shift_sum: f64,
    scaled: Array2<Complex64>,
    lu_t: LuFactors,
    dd_scaled: DdMatrix,
    dd_det_scaled: DdDet,
    cond: std::sync::OnceLock<f64>,
}

impl KernelFactorization {
    pub fn new(k: &KernelMatrix) -> Result<KernelFactorization> {
        let lu_t = LuFactors::factor(&k.scaled.t().to_owned());
        let dd_scaled = k.dd_scaled_entries();
        let dd_det_scaled = dd_scaled.clone().det();
        if dd_det_scaled.is_zero() {
            return Err(Error::SingularKernel { pivot: lu_t.singular_pivot().unwrap_or(0) });
        }
        if let Some(p) = lu_t.singular_pivot() {
            return Err(Error::SingularKernel { pivot: p });
        }
        Ok(KernelFactorization {
            n: k.n,
            shift_sum: k.row_shifts.iter().sum(),
            scaled: k.scaled.clone(),
            lu_t,
            dd_scaled,
            dd_det_scaled,
            cond: std::sync::OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scaled(&self) -> &Array2<Complex64> {
        &self.scaled
    }

    pub fn dd_scaled(&self) -> &DdMatrix {
        &self.dd_scaled
    }

    pub fn dd_det_scaled(&self) -> DdDet {
        self.dd_det_scaled
    }

    /// Determinant of the full kernel (shifts restored).
    pub fn log_det(&self) -> LogComplex {
        LogComplex::new(
            self.dd_det_scaled.log_magnitude() + self.shift_sum,
            self.dd_det_scaled.phase(),
        )
    }

    /// Determinant of the scaled kernel from the f64 factors alone; the
    /// determinant-ratio resolvent form uses this so that it stays
    /// numerically independent of the double-double path.
    pub fn log_det_scaled_f64(&self) -> LogComplex {
        self.lu_t.log_det()
    }

    /// `F * scaled⁻¹`, row by row through the transposed factors.
    pub fn solve_right_scaled(&self, f: &Array2<Complex64>) -> Array2<Complex64> {
        let n = self.n;
        let mut g = Array2::zeros((n, n));
        for r in 0..n {
            let rhs = f.row(r).to_owned();
            let sol = self.lu_t.solve(&rhs);
            for j in 0..n {
                g[[r, j]] = sol[j];
            }
        }
        g
    }

    /// Solve `scaled * v = b`.
    pub fn solve_scaled(&self, b: &Array1<Complex64>) -> Array1<Complex64> {
        self.lu_t.solve_transpose(b)
    }

    /// Hager-style 1-norm condition estimate of the scaled kernel, >= 1.
    /// Typically within a small factor of the true value; used for warnings
    /// and for routing between the f64 and double-double evaluation paths.
    pub fn condition_estimate(&self) -> f64 {
        *self.cond.get_or_init(|| {
            let n = self.n;
            let a_norm1 = (0..n)
                .map(|j| (0..n).map(|i| self.scaled[[i, j]].norm()).sum::<f64>())
                .fold(0.0_f64, f64::max);
            let mut x = Array1::from_elem(n, Complex64::new(1.0 / n as f64, 0.0));
            let mut best = 0.0_f64;
            let mut last_j = usize::MAX;
            for _ in 0..4 {
                let y = self.solve_scaled(&x);
                let est: f64 = y.iter().map(|v| v.norm()).sum();
                best = best.max(est);
                let xi = y.mapv(|v| {
                    let m = v.norm();
                    if m == 0.0 { Complex64::new(1.0, 0.0) } else { v / m }
                });
                // z = scaled^{-H} xi via conjugation through the transposed factors
                let z = self.lu_t.solve(&xi.mapv(|v| v.conj())).mapv(|v| v.conj());
                let (j, zmax) = z
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (j, v.norm()))
                    .fold((0, 0.0), |acc, it| if it.1 > acc.1 { it } else { acc });
                if j == last_j || zmax <= 1e-30 {
                    break;
                }
                last_j = j;
                x.fill(Complex64::new(0.0, 0.0));
                x[j] = Complex64::new(1.0, 0.0);
            }
            (a_norm1 * best).max(1.0)
        })
    }
}
