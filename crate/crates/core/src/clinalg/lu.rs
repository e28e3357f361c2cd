//! Dense complex LU with partial pivoting, log-domain determinant
//! accumulation, and forward/transpose solves.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::LogComplex;

/// LU factors of a square complex matrix, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: Array2<Complex64>,
    /// Row i of the permuted matrix is row `perm[i]` of the input.
    perm: Vec<usize>,
    sign: f64,
    singular_pivot: Option<usize>,
}

impl LuFactors {
    /// Factorize. A zero pivot does not fail the factorization; it is
    /// recorded and surfaces through [`LuFactors::singular_pivot`] and a
    /// `-inf` log-determinant.
    pub fn factor(a: &Array2<Complex64>) -> LuFactors {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU requires a square matrix");
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular_pivot = None;
        for col in 0..n {
            let mut pivot_row = col;
            let mut best = lu[[col, col]].norm_sqr();
            for r in col + 1..n {
                let m = lu[[r, col]].norm_sqr();
                if m > best {
                    best = m;
                    pivot_row = r;
                }
            }
            if pivot_row != col {
                for j in 0..n {
                    lu.swap([col, j], [pivot_row, j]);
                }
                perm.swap(col, pivot_row);
                sign = -sign;
            }
            let pivot = lu[[col, col]];
            if pivot == Complex64::new(0.0, 0.0) {
                if singular_pivot.is_none() {
                    singular_pivot = Some(col);
                }
                continue;
            }
            for r in col + 1..n {
                let factor = lu[[r, col]] / pivot;
                lu[[r, col]] = factor;
                for j in col + 1..n {
                    let sub = factor * lu[[col, j]];
                    lu[[r, j]] -= sub;
                }
            }
        }
        LuFactors { lu, perm, sign, singular_pivot }
    }

    pub fn n(&self) -> usize {
        self.lu.nrows()
    }

    /// Index of the first exactly-zero pivot, if any.
    pub fn singular_pivot(&self) -> Option<usize> {
        self.singular_pivot
    }

    /// Determinant in log form; exact zeros map to `-inf` log-magnitude.
    pub fn log_det(&self) -> LogComplex {
        let mut log_mag = 0.0;
        let mut phase = Complex64::new(self.sign, 0.0);
        for i in 0..self.n() {
            let p = self.lu[[i, i]];
            let m = p.norm();
            if m == 0.0 {
                return LogComplex::zero();
            }
            log_mag += m.ln();
            phase *= p / m;
        }
        LogComplex::new(log_mag, phase)
    }

    /// Plain determinant; overflows to inf / underflows to zero outside the
    /// f64 range. Use [`LuFactors::log_det`] when scale is uncertain.
    pub fn det(&self) -> Complex64 {
        let mut d = Complex64::new(self.sign, 0.0);
        for i in 0..self.n() {
            d *= self.lu[[i, i]];
        }
        d
    }

    /// Solve `A x = b`. Panics if the factorization is exactly singular.
    pub fn solve(&self, b: &Array1<Complex64>) -> Array1<Complex64> {
        let n = self.n();
        let mut x = Array1::zeros(n);
        for i in 0..n {
            let mut v = b[self.perm[i]];
            for j in 0..i {
                v -= self.lu[[i, j]] * x[j];
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for j in i + 1..n {
                v -= self.lu[[i, j]] * x[j];
            }
            x[i] = v / self.lu[[i, i]];
        }
        x
    }

    /// Solve `A^T x = b` using the same factors: `A^T = (LU)^T P`.
    pub fn solve_transpose(&self, b: &Array1<Complex64>) -> Array1<Complex64> {
        let n = self.n();
        // U^T w = b (forward), L^T z = w (backward), x = P^T z
        let mut w = Array1::zeros(n);
        for i in 0..n {
            let mut v = b[i];
            for j in 0..i {
                v -= self.lu[[j, i]] * w[j];
            }
            w[i] = v / self.lu[[i, i]];
        }
        for i in (0..n).rev() {
            let mut v = w[i];
            for j in i + 1..n {
                v -= self.lu[[j, i]] * w[j];
            }
            w[i] = v;
        }
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = w[i];
        }
        x
    }

    /// Solve `A^H x = b` via conjugation: `A^T conj(x) = conj(b)`.
    pub fn solve_adjoint(&self, b: &Array1<Complex64>) -> Array1<Complex64> {
        let bc = b.mapv(|v| v.conj());
        self.solve_transpose(&bc).mapv(|v| v.conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let a = array![
            [c(1.0, 2.0), c(-0.5, 0.3)],
            [c(2.0, -1.0), c(0.7, 0.7)],
        ];
        let want = a[[0, 0]] * a[[1, 1]] - a[[0, 1]] * a[[1, 0]];
        let lu = LuFactors::factor(&a);
        assert!((lu.det() - want).norm() < 1e-14);
        let ld = lu.log_det();
        assert!((ld.to_complex() - want).norm() < 1e-14);
    }

    #[test]
    fn solve_and_transpose_solve_are_consistent() {
        let a = array![
            [c(2.0, 1.0), c(0.3, -0.2), c(-1.0, 0.0)],
            [c(0.1, 0.1), c(-3.0, 0.5), c(0.8, 2.0)],
            [c(1.5, -2.0), c(0.0, 1.0), c(0.9, -0.4)],
        ];
        let b = array![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5)];
        let lu = LuFactors::factor(&a);

        let x = lu.solve(&b);
        let r = a.dot(&x) - &b;
        assert!(r.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);

        let xt = lu.solve_transpose(&b);
        let rt = a.t().dot(&xt) - &b;
        assert!(rt.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);

        let xh = lu.solve_adjoint(&b);
        let ah = a.t().mapv(|v| v.conj());
        let rh = ah.dot(&xh) - &b;
        assert!(rh.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn singular_matrix_reports_zero_pivot() {
        let a = array![
            [c(1.0, 0.0), c(2.0, 0.0)],
            [c(2.0, 0.0), c(4.0, 0.0)],
        ];
        let lu = LuFactors::factor(&a);
        assert!(lu.singular_pivot().is_some());
        assert!(lu.log_det().is_zero());
    }

    #[test]
    fn permutation_sign_enters_determinant() {
        // anti-diagonal: det = -1
        let a = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let lu = LuFactors::factor(&a);
        assert!((lu.det() - c(-1.0, 0.0)).norm() < 1e-15);
    }
}
