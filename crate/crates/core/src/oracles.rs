//! Independent ground-truth evaluators: the original permutation/subset sum
//! for `I(X,Y)·W(x,y)`, its intermediate permutation-product form, and Monte
//! Carlo integration over Haar-random unitaries.
//!
//! The two exact oracles are brute-force Leibniz-style sums whose terms
//! cancel down to `W · det E`; they accumulate in double-double so that
//! oracle noise stays far below every tolerance they are used to certify.
//! The Monte Carlo oracles are plain f64: sampling error dominates there.

use itertools::Itertools;
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::clinalg::dd::{Dd, DdComplex, DdMatrix};
use crate::error::{Error, Result};
use crate::exec;
use crate::resolvent::{ResolventPoint, DEFAULT_POLE_TOL};
use crate::spectra::ProblemPair;

/// Factorial blow-up caps: `N! 2^N` subset-sum terms, `N! N` product terms.
pub const MAX_SUBSET_SUM_DIM: usize = 6;
pub const MAX_PERMUTATION_DIM: usize = 7;

/// Jackknife block count; also fixes the reduction order, so results are
/// identical for any worker count.
pub const DEFAULT_JACKKNIFE_BLOCKS: usize = 100;

/// How the bordered-determinant ratios inside the subset sum are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BorderedMode {
    /// Closed products `∏ 1/(x - x_k)` from the generating-function identity.
    ClosedProduct,
    /// Literal bordered determinants with the `1/(x - x_k)` row appended;
    /// slower, but checks the determinant identity chain link by link.
    LiteralDeterminant,
}

/// `W(x,y)` from the original double sum over permutations and index
/// subsets, divided by `det E`. Ground truth for dimensions up to 6.
pub fn morozov_subset_sum(pair: &ProblemPair, pt: &ResolventPoint) -> Result<Complex64> {
    morozov_subset_sum_mode(pair, pt, BorderedMode::ClosedProduct)
}

pub fn morozov_subset_sum_mode(
    pair: &ProblemPair,
    pt: &ResolventPoint,
    mode: BorderedMode,
) -> Result<Complex64> {
    let n = pair.n();
    if n > MAX_SUBSET_SUM_DIM {
        return Err(Error::DimensionTooLarge { n, limit: MAX_SUBSET_SUM_DIM, oracle: "subset-sum" });
    }
    check_off_pole(pair, pt)?;
    let x = pair.x().values();
    let y = pair.y().values();

    // per-index pole factors in double-double
    let u: Vec<DdComplex> = x.iter().map(|&xi| dd_recip_diff(pt.x, xi)).collect();
    let v: Vec<DdComplex> = y.iter().map(|&yj| dd_recip_diff(pt.y, yj)).collect();

    // subset products for the closed mode, indexed by bitmask
    let (u_prod, v_prod) = if mode == BorderedMode::ClosedProduct {
        (subset_products(&u), subset_products(&v))
    } else {
        (Vec::new(), Vec::new())
    };

    let mut total = DdComplex::ZERO;
    for perm in (0..n).permutations(n) {
        let sign = permutation_sign(&perm);
        let weight = permutation_weight(x, y, &perm).mul_f64(sign);
        let mut inner = DdComplex::ZERO;
        for mask in 1usize..(1 << n) {
            let order = mask.count_ones() as usize; // subset size n+1
            let subset_sign = if (order - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let term = match mode {
                BorderedMode::ClosedProduct => {
                    let image = permuted_mask(mask, &perm);
                    u_prod[mask].mul(v_prod[image])
                }
                BorderedMode::LiteralDeterminant => {
                    let xs: Vec<Complex64> = bits(mask, n).map(|k| x[k]).collect();
                    let ys: Vec<Complex64> = bits(mask, n).map(|k| y[perm[k]]).collect();
                    let us: Vec<DdComplex> = bits(mask, n).map(|k| u[k]).collect();
                    let vs: Vec<DdComplex> = bits(mask, n).map(|k| v[perm[k]]).collect();
                    bordered_ratio(&xs, &us).mul(bordered_ratio(&ys, &vs))
                }
            };
            inner = inner.add(term.mul_f64(subset_sign));
        }
        total = total.add(weight.mul(inner));
    }
    let det_e = dd_kernel_det(x, y);
    Ok(total.div(det_e.mantissa.ldexp(det_e.exp2 as i32)).to_c64())
}

/// `W(x,y)` from the intermediate single-permutation form
/// `Σ_ρ ε(ρ) e^{Σ x_ℓ y_ρ(ℓ)} [1 - ∏_i (1 - u_i v_ρ(i))] / det E`.
pub fn permutation_product_form(pair: &ProblemPair, pt: &ResolventPoint) -> Result<Complex64> {
    let n = pair.n();
    if n > MAX_PERMUTATION_DIM {
        return Err(Error::DimensionTooLarge {
            n,
            limit: MAX_PERMUTATION_DIM,
            oracle: "permutation-product",
        });
    }
    check_off_pole(pair, pt)?;
    let x = pair.x().values();
    let y = pair.y().values();
    let u: Vec<DdComplex> = x.iter().map(|&xi| dd_recip_diff(pt.x, xi)).collect();
    let v: Vec<DdComplex> = y.iter().map(|&yj| dd_recip_diff(pt.y, yj)).collect();

    let mut total = DdComplex::ZERO;
    for perm in (0..n).permutations(n) {
        let sign = permutation_sign(&perm);
        let weight = permutation_weight(x, y, &perm).mul_f64(sign);
        let mut prod = DdComplex::ONE;
        for i in 0..n {
            prod = prod.mul(DdComplex::ONE.sub(u[i].mul(v[perm[i]])));
        }
        total = total.add(weight.mul(DdComplex::ONE.sub(prod)));
    }
    let det_e = dd_kernel_det(x, y);
    Ok(total.div(det_e.mantissa.ldexp(det_e.exp2 as i32)).to_c64())
}

fn check_off_pole(pair: &ProblemPair, pt: &ResolventPoint) -> Result<()> {
    let dist = pair.x().distance_to(pt.x).min(pair.y().distance_to(pt.y));
    if dist <= DEFAULT_POLE_TOL {
        return Err(Error::PoleProximity { dist, tol: DEFAULT_POLE_TOL });
    }
    Ok(())
}

fn bits(mask: usize, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |k| mask & (1 << k) != 0)
}

fn permuted_mask(mask: usize, perm: &[usize]) -> usize {
    let mut out = 0usize;
    for (k, &pk) in perm.iter().enumerate() {
        if mask & (1 << k) != 0 {
            out |= 1 << pk;
        }
    }
    out
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 { 1.0 } else { -1.0 }
}

/// `e^{Σ_ℓ x_ℓ y_ρ(ℓ)}` with the exponent accumulated in double-double.
fn permutation_weight(x: &[Complex64], y: &[Complex64], perm: &[usize]) -> DdComplex {
    let mut re = Dd::ZERO;
    let mut im = Dd::ZERO;
    for (l, &pl) in perm.iter().enumerate() {
        let p = DdComplex::from_c64(x[l]).mul(DdComplex::from_c64(y[pl]));
        re = re.add(p.re);
        im = im.add(p.im);
    }
    DdComplex::exp(re, im)
}

/// `1/(a - b)` with the difference taken error-free.
fn dd_recip_diff(a: Complex64, b: Complex64) -> DdComplex {
    DdComplex::ONE.div(DdComplex::from_c64(a).sub(DdComplex::from_c64(b)))
}

/// Products of `vals` over every bitmask subset.
fn subset_products(vals: &[DdComplex]) -> Vec<DdComplex> {
    let n = vals.len();
    let mut out = vec![DdComplex::ONE; 1 << n];
    for mask in 1usize..(1 << n) {
        let k = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)].mul(vals[k]);
    }
    out
}

/// Bordered-determinant ratio: rows `1, x, …, x^{m-2}`, then the `a` row,
/// over the plain Vandermonde with rows `1, x, …, x^{m-1}`.
fn bordered_ratio(xs: &[Complex64], a_row: &[DdComplex]) -> DdComplex {
    let m = xs.len();
    let mut num = DdMatrix::zeros(m);
    let mut den = DdMatrix::zeros(m);
    for (col, &xv) in xs.iter().enumerate() {
        let xdd = DdComplex::from_c64(xv);
        let mut p = DdComplex::ONE;
        for row in 0..m {
            if row < m - 1 {
                num.set(row, col, p);
            }
            den.set(row, col, p);
            p = p.mul(xdd);
        }
        num.set(m - 1, col, a_row[col]);
    }
    num.det().ratio(den.det())
}

/// Full kernel determinant `det e^{x_i y_j}` in double-double.
fn dd_kernel_det(x: &[Complex64], y: &[Complex64]) -> crate::clinalg::dd::DdDet {
    let n = x.len();
    let mut m = DdMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let p = DdComplex::from_c64(x[i]).mul(DdComplex::from_c64(y[j]));
            m.set(i, j, DdComplex::exp(p.re, p.im));
        }
    }
    m.det()
}

/// A Haar-distributed unitary.
#[derive(Clone, Debug)]
pub struct HaarSample {
    pub u: Array2<Complex64>,
}

/// Monte Carlo mean, jackknife standard error, and sample count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub samples: usize,
}

/// The RNG for block `stream` of a run with master seed `seed`. ChaCha
/// streams are independent by construction, so worker count never touches
/// the sample sequence of a block.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Haar sample by QR of a complex Ginibre matrix with the R-diagonal phase
/// fix (each column of Q is rotated so the matching `R` diagonal entry is
/// real positive; without it the distribution is not Haar).
pub fn sample_haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> HaarSample {
    assert!(n >= 1);
    let root_half = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = Array2::from_shape_fn((n, n), |_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * root_half, im * root_half)
    });
    // Householder triangularization, accumulating Q^H
    let mut qh = Array2::from_shape_fn((n, n), |(i, j)| {
        Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    for k in 0..n {
        let norm_x = (k..n).map(|i| a[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let akk = a[[k, k]];
        let phase = if akk.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { akk / akk.norm() };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex64> = (k..n).map(|i| a[[i, k]]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 < 1e-300 {
            continue;
        }
        let scale = 2.0 / vnorm2;
        for j in k..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, &vi)| vi.conj() * a[[k + i, j]]).sum();
            let s = s * scale;
            for (i, &vi) in v.iter().enumerate() {
                a[[k + i, j]] -= s * vi;
            }
        }
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, &vi)| vi.conj() * qh[[k + i, j]]).sum();
            let s = s * scale;
            for (i, &vi) in v.iter().enumerate() {
                qh[[k + i, j]] -= s * vi;
            }
        }
    }
    // U = Q Λ with Λ_jj = R_jj/|R_jj|
    let mut u = Array2::zeros((n, n));
    for j in 0..n {
        let rjj = a[[j, j]];
        let lambda = if rjj.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { rjj / rjj.norm() };
        for i in 0..n {
            u[[i, j]] = qh[[j, i]].conj() * lambda;
        }
    }
    HaarSample { u }
}

/// `tr(X U† Y U) = Σ_{i,k} x_i y_k |U_{ki}|²`.
fn weight_exponent(x: &[Complex64], y: &[Complex64], u: &Array2<Complex64>) -> Complex64 {
    let n = x.len();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            s += y[k] * u[[k, i]].norm_sqr();
        }
        total += x[i] * s;
    }
    total
}

struct BlockSums {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

/// Mean and jackknife standard error of `e^{tr(X U† Y U)}` over Haar
/// samples; estimates the probability-normalized integral.
pub fn mc_hciz(pair: &ProblemPair, samples: usize, seed: u64) -> Result<MCEstimate> {
    mc_hciz_blocks(pair, samples, seed, DEFAULT_JACKKNIFE_BLOCKS)
}

pub fn mc_hciz_blocks(
    pair: &ProblemPair,
    samples: usize,
    seed: u64,
    blocks: usize,
) -> Result<MCEstimate> {
    let sums = sample_block_sums(pair, samples, seed, blocks, None)?;
    let (mean, se) = jackknife_ratio(&sums.num, &sums.den);
    Ok(MCEstimate { mean, std_error: se, samples })
}

/// Ratio estimator `mean(|U_ij|² w)/mean(w)` with jackknife bias correction
/// and standard error over the blocks.
pub fn mc_correlator(
    pair: &ProblemPair,
    i: usize,
    j: usize,
    samples: usize,
    seed: u64,
) -> Result<MCEstimate> {
    mc_correlator_blocks(pair, i, j, samples, seed, DEFAULT_JACKKNIFE_BLOCKS)
}

pub fn mc_correlator_blocks(
    pair: &ProblemPair,
    i: usize,
    j: usize,
    samples: usize,
    seed: u64,
    blocks: usize,
) -> Result<MCEstimate> {
    let n = pair.n();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let sums = sample_block_sums(pair, samples, seed, blocks, Some((i, j)))?;
    // the weight mean must be resolvably nonzero for the ratio to mean anything
    let counts: Vec<Complex64> = block_counts(samples, blocks);
    let (den_mean, den_se) = jackknife_ratio(&sums.den, &counts);
    if den_mean.norm() < 2.0 * den_se {
        return Err(Error::DegenerateDenominator { mean_abs: den_mean.norm(), std_error: den_se });
    }
    let (mean, se) = jackknife_ratio(&sums.num, &sums.den);
    Ok(MCEstimate { mean, std_error: se, samples })
}

fn block_counts(samples: usize, blocks: usize) -> Vec<Complex64> {
    let base = samples / blocks;
    let extra = samples % blocks;
    (0..blocks)
        .map(|k| Complex64::new((base + usize::from(k < extra)) as f64, 0.0))
        .collect()
}

/// Shared sampling pass: numerator is `|U_ij|² w` when an entry is given,
/// otherwise `w`; the denominator is `w` or the plain sample count.
fn sample_block_sums(
    pair: &ProblemPair,
    samples: usize,
    seed: u64,
    blocks: usize,
    entry: Option<(usize, usize)>,
) -> Result<BlockSums> {
    assert!(samples >= 1000, "at least 1000 Monte Carlo samples required");
    assert!(blocks >= 2 && blocks <= samples / 2, "block count out of range");
    let n = pair.n();
    let x = pair.x().values().to_vec();
    let y = pair.y().values().to_vec();
    let max_coupling = x
        .iter()
        .flat_map(|xi| y.iter().map(move |yj| (xi * yj).re.abs()))
        .fold(0.0, f64::max);
    assert!(
        max_coupling <= 20.0,
        "Monte Carlo weight variance explodes for |Re(x_i y_j)| > 20"
    );
    let base = samples / blocks;
    let extra = samples % blocks;
    let per_block: Vec<(Complex64, Complex64)> = exec::map_indexed(blocks, |k| {
        let mut rng = stream_rng(seed, k as u64);
        let count = base + usize::from(k < extra);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for _ in 0..count {
            let s = sample_haar_unitary(n, &mut rng);
            let w = weight_exponent(&x, &y, &s.u).exp();
            match entry {
                Some((i, j)) => {
                    num += s.u[[i, j]].norm_sqr() * w;
                    den += w;
                }
                None => {
                    num += w;
                    den += Complex64::new(1.0, 0.0);
                }
            }
        }
        (num, den)
    });
    let mut sums = BlockSums { num: Vec::with_capacity(blocks), den: Vec::with_capacity(blocks) };
    for (num, den) in per_block {
        if !num.is_finite() || !den.is_finite() {
            return Err(Error::VarianceOverflow { samples });
        }
        sums.num.push(num);
        sums.den.push(den);
    }
    Ok(sums)
}

/// Leave-one-block-out jackknife for the ratio of summed numerators and
/// denominators: returns the bias-corrected mean and standard error.
/// For a linear estimator (constant denominators) this reduces exactly to
/// the plain mean and its block standard error.
fn jackknife_ratio(num: &[Complex64], den: &[Complex64]) -> (Complex64, f64) {
    let b = num.len();
    let tot_n: Complex64 = num.iter().sum();
    let tot_d: Complex64 = den.iter().sum();
    let theta = tot_n / tot_d;
    let leave_out: Vec<Complex64> = (0..b).map(|k| (tot_n - num[k]) / (tot_d - den[k])).collect();
    let theta_bar = leave_out.iter().sum::<Complex64>() / b as f64;
    let corrected = theta * b as f64 - theta_bar * (b as f64 - 1.0);
    let var: f64 = leave_out.iter().map(|t| (t - theta_bar).norm_sqr()).sum::<f64>()
        * (b as f64 - 1.0)
        / b as f64;
    (corrected, var.sqrt())
}
