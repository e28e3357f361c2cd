//! Double-double (~31 significant digit) real and complex arithmetic, plus
//! the determinant kernels that need it.
//!
//! The correlator and resolvent identities are exact, but their determinant
//! formulations can demand 10+ digits of cancellation headroom beyond f64
//! (the kernel matrix `e^{x_i y_j}` has condition number ~1e11 already at
//! N = 8 for unit-square spectra). Every routine here is value-level: no
//! allocation tricks, no SIMD, just the classical error-free transformations.

use num_complex::Complex64;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    /// Exact sum of two f64 values.
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    /// Exact product of two f64 values.
    #[inline]
    pub fn from_prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn add_f64(self, other: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, other);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, other);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * other);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, other: f64) -> Dd {
        self.div(Dd::from_f64(other))
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn ldexp(self, e: i32) -> Dd {
        let f = pow2(e);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn exp(self) -> Dd {
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        // e^a = 2^k e^r with r = a - k ln2, |r| <= ln2/2
        let k = (self.hi / LN2.hi).round();
        let r = self.sub(LN2.mul_f64(k));
        let mut sum = Dd::ONE.add(r);
        let mut term = r;
        let mut n = 2.0;
        loop {
            term = term.mul(r).div_f64(n);
            sum = sum.add(term);
            if term.hi.abs() <= 1e-40 * sum.hi.abs() || n > 60.0 {
                break;
            }
            n += 1.0;
        }
        sum.ldexp(k as i32)
    }

    /// Simultaneous sine and cosine. Argument reduction is accurate for
    /// |a| up to ~1e12; spectra products stay far below that.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let k = (self.hi * FRAC_2_PI.hi).round();
        let r = self.sub(FRAC_PI_2.mul_f64(k));
        // Taylor on |r| <= pi/4
        let r2 = r.mul(r);
        let mut s = r;
        let mut term = r;
        let mut n = 1.0;
        loop {
            term = term.mul(r2).div_f64(-((n + 1.0) * (n + 2.0)));
            s = s.add(term);
            n += 2.0;
            if term.hi.abs() <= 1e-40 * (s.hi.abs() + 1e-300) || n > 40.0 {
                break;
            }
        }
        let mut c = Dd::ONE;
        let mut term = Dd::ONE;
        let mut n = 0.0;
        loop {
            term = term.mul(r2).div_f64(-((n + 1.0) * (n + 2.0)));
            c = c.add(term);
            n += 2.0;
            if term.hi.abs() <= 1e-40 * (c.hi.abs() + 1e-300) || n > 40.0 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg()),
            2 => (s.neg(), c.neg()),
            _ => (c.neg(), s),
        }
    }
}

fn pow2(e: i32) -> f64 {
    // exact for the exponent range used by the determinant rebalancing
    if e >= -1022 && e <= 1023 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e < -1022 {
        f64::from_bits(((e + 1023 + 200) as u64) << 52) * pow2_small(-200)
    } else {
        f64::from_bits(((e + 1023 - 200) as u64) << 52) * pow2_small(200)
    }
}

fn pow2_small(e: i32) -> f64 {
    f64::from_bits(((e + 1023) as u64) << 52)
}

const LN2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };
const FRAC_PI_2: Dd = Dd { hi: 1.5707963267948966, lo: 6.123233995736766e-17 };
const FRAC_2_PI: Dd = Dd { hi: 0.6366197723675814, lo: -3.935735335036497e-17 };

/// Complex number with double-double components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: DdComplex = DdComplex { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn new(re: Dd, im: Dd) -> DdComplex {
        DdComplex { re, im }
    }

    #[inline]
    pub fn from_c64(z: Complex64) -> DdComplex {
        DdComplex { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    #[inline]
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    pub fn neg(self) -> DdComplex {
        DdComplex { re: self.re.neg(), im: self.im.neg() }
    }

    #[inline]
    pub fn add(self, other: DdComplex) -> DdComplex {
        DdComplex { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    #[inline]
    pub fn sub(self, other: DdComplex) -> DdComplex {
        DdComplex { re: self.re.sub(other.re), im: self.im.sub(other.im) }
    }

    #[inline]
    pub fn mul(self, other: DdComplex) -> DdComplex {
        let re = self.re.mul(other.re).sub(self.im.mul(other.im));
        let im = self.re.mul(other.im).add(self.im.mul(other.re));
        DdComplex { re, im }
    }

    pub fn div(self, other: DdComplex) -> DdComplex {
        let denom = other.re.mul(other.re).add(other.im.mul(other.im));
        let num = self.mul(other.conj());
        DdComplex { re: num.re.div(denom), im: num.im.div(denom) }
    }

    #[inline]
    pub fn conj(self) -> DdComplex {
        DdComplex { re: self.re, im: self.im.neg() }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> DdComplex {
        DdComplex { re: self.re.mul_f64(other), im: self.im.mul_f64(other) }
    }

    #[inline]
    pub fn norm_sqr(self) -> Dd {
        self.re.mul(self.re).add(self.im.mul(self.im))
    }

    /// Fast magnitude-squared estimate for pivot selection.
    #[inline]
    fn norm_sqr_hi(self) -> f64 {
        self.re.hi * self.re.hi + self.im.hi * self.im.hi
    }

    #[inline]
    pub fn ldexp(self, e: i32) -> DdComplex {
        DdComplex { re: self.re.ldexp(e), im: self.im.ldexp(e) }
    }

    /// `e^{re + i im}` for a double-double exponent.
    pub fn exp(re: Dd, im: Dd) -> DdComplex {
        let m = re.exp();
        let (s, c) = im.sin_cos();
        DdComplex { re: m.mul(c), im: m.mul(s) }
    }

    pub fn is_zero(self) -> bool {
        self.re.hi == 0.0 && self.im.hi == 0.0
    }
}

/// Determinant as `mantissa * 2^exp2`; keeps astronomically scaled values
/// representable without logarithms.
#[derive(Clone, Copy, Debug)]
pub struct DdDet {
    pub mantissa: DdComplex,
    pub exp2: i64,
}

impl DdDet {
    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Ratio of two determinants, assumed to land in f64 range.
    pub fn ratio(self, denom: DdDet) -> DdComplex {
        let m = self.mantissa.div(denom.mantissa);
        m.ldexp((self.exp2 - denom.exp2) as i32)
    }

    pub fn log_magnitude(&self) -> f64 {
        let n2 = self.mantissa.norm_sqr();
        0.5 * n2.to_f64().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    pub fn phase(&self) -> Complex64 {
        let z = self.mantissa.to_c64();
        let n = z.norm();
        if n == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            z / n
        }
    }
}

/// Row-major dense matrix of double-double complex entries.
#[derive(Clone, Debug)]
pub struct DdMatrix {
    pub n: usize,
    pub data: Vec<DdComplex>,
}

impl DdMatrix {
    pub fn zeros(n: usize) -> DdMatrix {
        DdMatrix { n, data: vec![DdComplex::ZERO; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> DdComplex {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: DdComplex) {
        self.data[i * self.n + j] = v;
    }

    /// Determinant by LU with partial pivoting, entirely in double-double.
    /// A pivot that is exactly zero yields an exactly zero determinant.
    pub fn det(mut self) -> DdDet {
        let n = self.n;
        let mut mantissa = DdComplex::ONE;
        let mut exp2: i64 = 0;
        for col in 0..n {
            let mut pivot_row = col;
            let mut best = self.at(col, col).norm_sqr_hi();
            for r in col + 1..n {
                let m = self.at(r, col).norm_sqr_hi();
                if m > best {
                    best = m;
                    pivot_row = r;
                }
            }
            if pivot_row != col {
                for j in 0..n {
                    let a = self.at(col, j);
                    let b = self.at(pivot_row, j);
                    self.set(col, j, b);
                    self.set(pivot_row, j, a);
                }
                mantissa = mantissa.neg();
            }
            let pivot = self.at(col, col);
            if pivot.is_zero() {
                return DdDet { mantissa: DdComplex::ZERO, exp2: 0 };
            }
            mantissa = mantissa.mul(pivot);
            // rebalance to keep the mantissa in a comfortable binade range
            let mag = mantissa.re.hi.abs().max(mantissa.im.hi.abs());
            if !(1e-60..=1e60).contains(&mag) {
                let e = mag.log2().floor() as i32;
                mantissa = mantissa.ldexp(-e);
                exp2 += e as i64;
            }
            for r in col + 1..n {
                let factor = self.at(r, col).div(pivot);
                if factor.is_zero() {
                    continue;
                }
                for j in col + 1..n {
                    let v = self.at(r, j).sub(factor.mul(self.at(col, j)));
                    self.set(r, j, v);
                }
            }
        }
        DdDet { mantissa, exp2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd_close(a: Dd, hi: f64, lo: f64, tol: f64) {
        let err = a.sub(Dd { hi, lo }).to_f64().abs();
        let scale = hi.abs().max(1e-300);
        assert!(err <= tol * scale, "dd mismatch: got {:?}, want ({}, {}), rel {:.2e}", a, hi, lo, err / scale);
    }

    #[test]
    fn exp_reference_values() {
        dd_close(Dd::from_f64(1.0).exp(), 2.718281828459045, 1.4456468917292502e-16, 1e-30);
        dd_close(Dd::from_f64(-1.0).exp(), 0.36787944117144233, -1.2428753672788363e-17, 1e-30);
        dd_close(Dd::from_f64(0.5).exp(), 1.6487212707001282, -4.731568479435833e-17, 1e-30);
        dd_close(Dd::from_f64(10.0).exp(), 22026.465794806718, -1.3780134700517372e-12, 1e-30);
        dd_close(Dd::from_f64(-20.0).exp(), 2.061153622438558e-9, -4.19755767595054e-26, 1e-30);
    }

    #[test]
    fn sincos_reference_values() {
        let (s, c) = Dd::from_f64(1.0).sin_cos();
        dd_close(s, 0.8414709848078965, 1.776845092935536e-18, 1e-30);
        dd_close(c, 0.5403023058681398, -4.760954612604417e-17, 1e-30);
        let (s, c) = Dd::from_f64(10.0).sin_cos();
        dd_close(s, -0.5440211108893698, -3.8949898668223557e-17, 1e-29);
        dd_close(c, -0.8390715290764524, -1.4147119988953418e-17, 1e-29);
        let (s, c) = Dd::from_f64(0.3).sin_cos();
        dd_close(s, 0.29552020666133955, 1.8315357276792536e-17, 1e-30);
        dd_close(c, 0.955336489125606, 4.1935600297907467e-17, 1e-30);
    }

    #[test]
    fn complex_exp_reference_values() {
        let z = DdComplex::exp(Dd::from_f64(0.7), Dd::from_f64(-0.3));
        dd_close(z.re, 1.9238114415220284, 6.317756666234064e-17, 1e-29);
        dd_close(z.im, -0.5951046162765072, -3.602268414912129e-17, 1e-29);
        let z = DdComplex::exp(Dd::from_f64(-2.5), Dd::from_f64(1.9));
        dd_close(z.re, -0.02653722365111151, 1.5541332193971716e-18, 1e-29);
        dd_close(z.im, 0.07767704139561674, -6.194593440014685e-18, 1e-29);
    }

    #[test]
    fn arithmetic_identities() {
        // (a*b)/b recovers a to ~1e-30 for well-scaled values
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..200 {
            let a = DdComplex::new(Dd::from_sum(next(), next() * 1e-17), Dd::from_sum(next(), next() * 1e-17));
            let b = DdComplex::new(Dd::from_f64(next() + 2.5), Dd::from_f64(next()));
            let r = a.mul(b).div(b).sub(a);
            let err = r.re.to_f64().abs() + r.im.to_f64().abs();
            assert!(err < 1e-29, "roundtrip error {err:.2e}");
        }
    }

    #[test]
    fn exact_sum_and_product() {
        let a = Dd::from_sum(1.0, 1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        let p = Dd::from_prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        // (1+u)^2 = 1 + 2u + u^2 captured exactly
        assert_eq!(p.to_f64(), p.hi + p.lo);
        assert!(p.lo != 0.0);
    }

    #[test]
    fn integer_matrix_determinant_is_exact() {
        // 5x5 Gaussian-integer matrix; determinant computed exactly offline.
        let entries: [[(f64, f64); 5]; 5] = [
            [(6.0, -1.0), (-8.0, 3.0), (-6.0, 2.0), (-5.0, -6.0), (-6.0, 5.0)],
            [(6.0, 5.0), (7.0, 9.0), (2.0, 5.0), (-9.0, -4.0), (-8.0, -3.0)],
            [(-3.0, 3.0), (-1.0, 3.0), (2.0, 4.0), (0.0, 7.0), (-4.0, -4.0)],
            [(-6.0, 8.0), (4.0, -9.0), (4.0, -8.0), (-9.0, 9.0), (-7.0, 8.0)],
            [(-1.0, -4.0), (-2.0, -7.0), (7.0, -4.0), (0.0, -9.0), (-2.0, 7.0)],
        ];
        let mut m = DdMatrix::zeros(5);
        for i in 0..5 {
            for j in 0..5 {
                let (re, im) = entries[i][j];
                m.set(i, j, DdComplex::from_c64(Complex64::new(re, im)));
            }
        }
        let det = m.det();
        let v = det.mantissa.ldexp(det.exp2 as i32).to_c64();
        let want = Complex64::new(-155518.0, -290529.0);
        assert!((v - want).norm() < 1e-9, "det {v} != {want}");
    }

    #[test]
    fn zero_pivot_gives_zero_determinant() {
        let mut m = DdMatrix::zeros(3);
        for j in 0..3 {
            m.set(0, j, DdComplex::from_c64(Complex64::new(j as f64 + 1.0, 0.0)));
            m.set(2, j, DdComplex::from_c64(Complex64::new(j as f64 + 1.0, 0.0)));
            m.set(1, j, DdComplex::from_c64(Complex64::new(0.5, -1.0)));
        }
        let det = m.det();
        assert!(det.is_zero() || det.log_magnitude() < -60.0);
    }

    #[test]
    fn determinant_rebalancing_handles_extreme_scales() {
        // diag(1e-80 .. ) * rotation-ish: det = product of diagonals
        let n = 6;
        let mut m = DdMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, DdComplex::from_c64(Complex64::new(1e-80, 0.0)));
        }
        let det = m.det();
        // |det| = 1e-480, far below f64 range
        let want_log = 6.0 * (1e-80f64).ln();
        assert!((det.log_magnitude() - want_log).abs() < 1e-9);
    }
}
