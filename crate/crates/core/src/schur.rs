//! Hook-diagram Schur polynomials in both of their determinant and
//! monomial-sum representations, and their generating function.
//!
//! For variables `x_{i_1}, …, x_{i_{n+1}}` and degree `r >= n`, the hook
//! Schur polynomial `S_r` equals a ratio of bordered Vandermonde
//! determinants and also the complete homogeneous symmetric polynomial
//! `h_{r-n}` of the same variables. `S_r = 0` for `r < n` (the bordered
//! numerator repeats a row).

use ndarray::Array2;
use num_complex::Complex64;

use crate::clinalg::LuFactors;
use crate::error::{Error, Result};
use crate::spectra::DEFAULT_SEPARATION_TOL;

/// Variables plus hook degree for the determinant-ratio form.
#[derive(Clone, Debug)]
pub struct HookSchurInput {
    pub variables: Vec<Complex64>,
    pub degree_r: usize,
}

impl HookSchurInput {
    pub fn new(variables: Vec<Complex64>, degree_r: usize) -> HookSchurInput {
        HookSchurInput { variables, degree_r }
    }
}

/// `S_r` as the ratio of two (n+1)x(n+1) determinants. Values here are O(1)
/// in practice, so plain complex LU is used.
pub fn schur_hook_det(input: &HookSchurInput) -> Result<Complex64> {
    let vars = &input.variables;
    let r = input.degree_r;
    let n = vars.len() - 1;
    if r < n {
        return Err(Error::InvalidDegree { r, n });
    }
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let gap = (vars[i] - vars[j]).norm();
            if gap <= DEFAULT_SEPARATION_TOL {
                return Err(Error::DegenerateVariables { i, j, gap });
            }
        }
    }
    if n == 0 {
        // numerator x^r, denominator 1
        return Ok(vars[0].powu(r as u32));
    }
    let m = n + 1;
    // rows: powers 0..n-1 then the bordered row x^r
    let mut num = Array2::zeros((m, m));
    let mut den = Array2::zeros((m, m));
    for (j, &v) in vars.iter().enumerate() {
        let mut p = Complex64::new(1.0, 0.0);
        for row in 0..m {
            if row < m - 1 {
                num[[row, j]] = p;
            }
            den[[row, j]] = p;
            p *= v;
        }
        num[[m - 1, j]] = v.powu(r as u32);
    }
    let dn = LuFactors::factor(&num).det();
    let dd = LuFactors::factor(&den).det();
    Ok(dn / dd)
}

/// `S_r = h_{r-n}` by the stable one-dimensional recurrence
/// `h_k(x_1..x_m) = h_k(x_1..x_{m-1}) + x_m h_{k-1}(x_1..x_m)`.
/// Variables may repeat.
pub fn schur_hook_sum(variables: &[Complex64], degree_r: usize) -> Result<Complex64> {
    let n = variables.len() - 1;
    if degree_r < n {
        return Err(Error::InvalidDegree { r: degree_r, n });
    }
    let k = degree_r - n;
    let table = homogeneous_prefix_table(variables, k);
    Ok(table[k][variables.len()])
}

/// `h[q][i] = h_q(vals[0..i])` for `q = 0..=max_degree`, `i = 0..=len`.
/// The empty prefix has `h_0 = 1` and `h_q = 0` otherwise.
pub(crate) fn homogeneous_prefix_table(vals: &[Complex64], max_degree: usize) -> Vec<Vec<Complex64>> {
    let m = vals.len();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); m + 1]; max_degree + 1];
    for i in 0..=m {
        h[0][i] = Complex64::new(1.0, 0.0);
    }
    for q in 1..=max_degree {
        for i in 1..=m {
            h[q][i] = h[q][i - 1] + vals[i - 1] * h[q - 1][i];
        }
    }
    h
}

/// Truncated generating series `Σ_{r=n}^{R} S_r / x^{r+1}` together with the
/// closed product `∏_k 1/(x - x_k)` it converges to. Terms with `r < n`
/// vanish by the hook convention.
pub fn schur_generating_partial(
    variables: &[Complex64],
    x: Complex64,
    r_max: usize,
) -> Result<(Complex64, Complex64)> {
    let max_var = variables.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if x.norm() <= max_var {
        return Err(Error::DivergentSeries { x_abs: x.norm(), max_var });
    }
    let n = variables.len() - 1;
    debug_assert!(r_max >= n);
    let table = homogeneous_prefix_table(variables, r_max.saturating_sub(n));
    let m = variables.len();
    let inv_x = Complex64::new(1.0, 0.0) / x;
    // power = 1/x^{r+1} maintained multiplicatively
    let mut power = inv_x.powu(n as u32 + 1);
    let mut partial = Complex64::new(0.0, 0.0);
    for r in n..=r_max {
        partial += table[r - n][m] * power;
        power *= inv_x;
    }
    let mut product = Complex64::new(1.0, 0.0);
    for &v in variables {
        product /= x - v;
    }
    Ok((partial, product))
}
