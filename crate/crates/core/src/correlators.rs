//! Extraction of every `⟨|U_ij|²⟩` from `W(x,y)` by double residues.
//!
//! `P[i][j]` is pinned as the coefficient of `1/((x-x_i)(y-y_j))` in the
//! pole expansion of `W`. Two independent extraction methods:
//!
//! * **Affine**: the determinant `h(u,v) = det(I - D_u E D_v E⁻¹)` is affine
//!   in each `u_k` (row multilinearity) and each `v_m` (the coefficient
//!   matrix of `v_m` is rank one), so the double residue is an exact mixed
//!   difference over the four corners `(u_i, v_j) ∈ {0,1}²` with the other
//!   components frozen at `u_k = 1/(x_i-x_k)`, `v_m = 1/(y_j-y_m)`. Exact
//!   up to roundoff, no quadrature parameter; the corner determinants run
//!   in double-double because they cancel ~|h| down to O(1) entries.
//! * **Quadrature**: a literal double contour integral on circles around
//!   `x_i` and `y_j` with the tensor-product trapezoid rule, which converges
//!   geometrically for rational integrands. Retained as an independent
//!   numerical witness.

use ndarray::Array2;
use num_complex::Complex64;

use crate::clinalg::dd::{DdComplex, DdMatrix};
use crate::error::{Error, Result};
use crate::exec;
use crate::resolvent::{ResolventEvaluator, ResolventPoint};
use crate::spectra::ProblemPair;

/// Row/column sums further than this from 1 signal numerical breakdown.
pub const DEFAULT_ROW_SUM_TOL: f64 = 1e-8;

/// Largest corner magnitude the double-double mixed difference can cancel
/// while keeping absolute entry errors near 1e-15; beyond it (deep
/// small-coupling regime) the entry is recomputed by contour quadrature.
const CORNER_HEADROOM: f64 = 1e15;

/// Sum-rule tolerance applied when any entry came from the quadrature
/// fallback, whose own accuracy is ~1e-6; deviations past this still mean
/// breakdown.
const FALLBACK_ROW_SUM_TOL: f64 = 1e-3;

/// Nodes for the internal quadrature fallback; the trapezoid truncation at
/// radius fraction 0.25 is ~0.25^32 and already negligible.
const FALLBACK_NODES: usize = 32;

/// The matrix `P[i][j] = ⟨|U_ij|²⟩`; doubly stochastic by unitarity even
/// under the complex weight.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorMatrix {
    p: Array2<Complex64>,
}

impl CorrelatorMatrix {
    pub(crate) fn from_entries(p: Array2<Complex64>) -> CorrelatorMatrix {
        CorrelatorMatrix { p }
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.p[[i, j]]
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.p
    }

    pub fn row_sum(&self, i: usize) -> Complex64 {
        (0..self.n()).map(|j| self.p[[i, j]]).sum()
    }

    pub fn column_sum(&self, j: usize) -> Complex64 {
        (0..self.n()).map(|i| self.p[[i, j]]).sum()
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn max_sum_deviation(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let rows = (0..self.n()).map(|i| (self.row_sum(i) - one).norm());
        let cols = (0..self.n()).map(|j| (self.column_sum(j) - one).norm());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

/// `⟨|U_ij|²⟩` by affine-coefficient extraction; builds a fresh evaluator.
pub fn correlator_entry_affine(pair: &ProblemPair, i: usize, j: usize) -> Result<Complex64> {
    let n = pair.n();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let eval = ResolventEvaluator::new(pair)?;
    Ok(entry_adaptive_with(&eval, i, j))
}

/// All entries through one shared factorization; the fill is embarrassingly
/// parallel and deterministic regardless of worker count. Cost O(N^5):
/// 4N² determinants of size N.
pub fn correlator_matrix(pair: &ProblemPair) -> Result<CorrelatorMatrix> {
    let eval = ResolventEvaluator::new(pair)?;
    correlator_matrix_with(&eval)
}

pub fn correlator_matrix_with(eval: &ResolventEvaluator) -> Result<CorrelatorMatrix> {
    let n = eval.n();
    let flat = exec::map_indexed(n * n, |idx| entry_affine_corners(eval, idx / n, idx % n));
    let mut fell_back = false;
    let mut p = Array2::zeros((n, n));
    for idx in 0..n * n {
        let (i, j) = (idx / n, idx % n);
        let (value, corner_mag) = flat[idx];
        p[[i, j]] = if corner_mag <= CORNER_HEADROOM {
            value
        } else {
            fell_back = true;
            entry_quadrature_with(eval, i, j, 0.25, FALLBACK_NODES)
        };
    }
    let m = CorrelatorMatrix { p };

    let one = Complex64::new(1.0, 0.0);
    let tol = if fell_back { FALLBACK_ROW_SUM_TOL } else { DEFAULT_ROW_SUM_TOL };
    for i in 0..n {
        let delta = (m.row_sum(i) - one).norm();
        if delta > tol {
            return Err(Error::StochasticityViolation {
                which: "row",
                index: i,
                delta,
                tol,
                cond: eval.condition_estimate(),
            });
        }
    }
    for j in 0..n {
        let delta = (m.column_sum(j) - one).norm();
        if delta > tol {
            return Err(Error::StochasticityViolation {
                which: "column",
                index: j,
                delta,
                tol,
                cond: eval.condition_estimate(),
            });
        }
    }
    Ok(m)
}

/// Entry with automatic method selection; used by the matrix fill and the
/// one-shot entry API.
pub(crate) fn entry_adaptive_with(eval: &ResolventEvaluator, i: usize, j: usize) -> Complex64 {
    let (value, corner_mag) = entry_affine_corners(eval, i, j);
    if corner_mag <= CORNER_HEADROOM {
        value
    } else {
        entry_quadrature_with(eval, i, j, 0.25, FALLBACK_NODES)
    }
}

/// Four corner evaluations of `h(u,v) = det(I - D_u Ẽ D_v Ẽ⁻¹)`, combined
/// into the mixed coefficient: `P_ij = -[h(1,1) - h(1,0) - h(0,1) + h(0,0)]`.
/// Everything is evaluated as `det(Ẽ - D_u Ẽ D_v)/det(Ẽ)` in double-double:
/// the corner values can dwarf their O(1) combination, so the returned
/// magnitude tells the caller how much cancellation headroom was spent.
fn entry_affine_corners(eval: &ResolventEvaluator, i: usize, j: usize) -> (Complex64, f64) {
    let n = eval.n();
    let x = eval.pair().x().values();
    let y = eval.pair().y().values();
    let ddk = eval.factorization().dd_scaled();
    let det_e = eval.factorization().dd_det_scaled();

    let mut u = vec![DdComplex::ZERO; n];
    for k in 0..n {
        if k != i {
            u[k] = DdComplex::ONE.div(DdComplex::from_c64(x[i]).sub(DdComplex::from_c64(x[k])));
        }
    }
    let mut v = vec![DdComplex::ZERO; n];
    for m in 0..n {
        if m != j {
            v[m] = DdComplex::ONE.div(DdComplex::from_c64(y[j]).sub(DdComplex::from_c64(y[m])));
        }
    }

    let corner = |ui: DdComplex, vj: DdComplex| -> DdComplex {
        let mut a = DdMatrix::zeros(n);
        for r in 0..n {
            let ur = if r == i { ui } else { u[r] };
            for s in 0..n {
                let vs = if s == j { vj } else { v[s] };
                let factor = DdComplex::ONE.sub(ur.mul(vs));
                a.set(r, s, ddk.at(r, s).mul(factor));
            }
        }
        a.det().ratio(det_e)
    };

    let h00 = corner(DdComplex::ZERO, DdComplex::ZERO);
    let h01 = corner(DdComplex::ZERO, DdComplex::ONE);
    let h10 = corner(DdComplex::ONE, DdComplex::ZERO);
    let h11 = corner(DdComplex::ONE, DdComplex::ONE);
    let value = h11.sub(h10).sub(h01).add(h00).neg().to_c64();
    let corner_mag = [h00, h01, h10, h11]
        .iter()
        .map(|h| h.to_c64().norm())
        .fold(0.0, f64::max);
    (value, corner_mag)
}

/// `⟨|U_ij|²⟩` as the double contour integral `(1/2πi)² ∮∮ W dx dy` on
/// circles of radius `radius_fraction * (min gap to the other spectrum
/// points)` with an `nodes`-point trapezoid rule per circle. `W` on the
/// contour is evaluated in double-double so that node-doubling reflects the
/// rule's geometric truncation, not evaluation noise.
pub fn correlator_entry_quadrature(
    pair: &ProblemPair,
    i: usize,
    j: usize,
    radius_fraction: f64,
    nodes: usize,
) -> Result<Complex64> {
    assert!(radius_fraction > 0.0 && radius_fraction < 0.5, "radius_fraction must lie in (0, 0.5)");
    assert!(nodes >= 16, "at least 16 quadrature nodes required");
    let n = pair.n();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let eval = ResolventEvaluator::new(pair)?;
    Ok(entry_quadrature_with(&eval, i, j, radius_fraction, nodes))
}

/// Full matrix with every entry from contour quadrature; the cross-method
/// witness at matrix scale. No sum-rule gate here: callers inspect
/// [`CorrelatorMatrix::max_sum_deviation`] against their own budget.
pub fn correlator_matrix_quadrature(
    pair: &ProblemPair,
    radius_fraction: f64,
    nodes: usize,
) -> Result<CorrelatorMatrix> {
    assert!(radius_fraction > 0.0 && radius_fraction < 0.5, "radius_fraction must lie in (0, 0.5)");
    assert!(nodes >= 16, "at least 16 quadrature nodes required");
    let eval = ResolventEvaluator::new(pair)?;
    let n = eval.n();
    let flat =
        exec::map_indexed(n * n, |idx| entry_quadrature_with(&eval, idx / n, idx % n, radius_fraction, nodes));
    Ok(CorrelatorMatrix { p: Array2::from_shape_vec((n, n), flat).expect("shape") })
}

fn entry_quadrature_with(
    eval: &ResolventEvaluator,
    i: usize,
    j: usize,
    radius_fraction: f64,
    nodes: usize,
) -> Complex64 {
    let x = eval.pair().x().values();
    let y = eval.pair().y().values();
    let gap = |vals: &[Complex64], k: usize| -> f64 {
        let g = vals
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, v)| (vals[k] - v).norm())
            .fold(f64::INFINITY, f64::min);
        if g.is_finite() {
            g
        } else {
            1.0 // single eigenvalue: any radius encircles only its pole
        }
    };
    let rx = radius_fraction * gap(x, i);
    let ry = radius_fraction * gap(y, j);

    let rows = exec::map_indexed(nodes, |a| {
        let tx = std::f64::consts::TAU * a as f64 / nodes as f64;
        let ex = Complex64::from_polar(rx, tx);
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..nodes {
            let ty = std::f64::consts::TAU * b as f64 / nodes as f64;
            let ey = Complex64::from_polar(ry, ty);
            let pt = ResolventPoint::new(x[i] + ex, y[j] + ey);
            let w = eval.w_ratio_dd(&pt);
            acc += w * ex * ey;
        }
        acc
    });
    rows.iter().sum::<Complex64>() / (nodes * nodes) as f64
}
