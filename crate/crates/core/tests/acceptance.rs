//! Acceptance suite: every release criterion as one test with a printed
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines; tolerances are pinned here, not configurable.

use num_complex::Complex64;
use rand::Rng;

use izcorr_core::correlators::{
    correlator_entry_affine, correlator_entry_quadrature, correlator_matrix,
};
use izcorr_core::hciz::hciz_probability_normalized;
use izcorr_core::oracles::{
    mc_correlator, mc_hciz, morozov_subset_sum, permutation_product_form, stream_rng,
};
use izcorr_core::resolvent::{pole_expansion_check, resolvent_w, ResolventEvaluator, ResolventPoint};
use izcorr_core::schur::{schur_generating_partial, schur_hook_det, schur_hook_sum, HookSchurInput};
use izcorr_core::spectra::{ProblemPair, Spectrum};
use izcorr_core::verify::{random_off_pole_point, random_unit_square_pair};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(id: &str, name: &str, max_err: f64, tol: f64, extra: &str) {
    let verdict = if max_err <= tol { "PASS" } else { "FAIL" };
    println!("[acceptance] {id} {name}: {verdict} (max err {max_err:.3e}, tol {tol:.1e}{extra})");
}

#[test]
fn criterion_01_main_result_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = stream_rng(0xA1, 0);
    let mut max_err = 0.0f64;
    for n in 2..=4 {
        for _ in 0..25 {
            let pair = random_unit_square_pair(&mut rng, n);
            let eval = ResolventEvaluator::new(&pair).unwrap();
            for _ in 0..4 {
                let pt = random_off_pole_point(&mut rng, &pair);
                let w = eval.w(&pt).unwrap().w;
                let oracle = morozov_subset_sum(&pair, &pt).unwrap();
                max_err = max_err.max((w - oracle).norm() / oracle.norm());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report("01", "main-result-equivalence", max_err, 1e-9, &format!(", {elapsed:.2} s"));
    assert!(max_err <= 1e-9);
    assert!(elapsed <= 60.0, "runtime budget exceeded: {elapsed:.1} s");
}

#[test]
fn criterion_02_oracle_triangle() {
    let mut rng = stream_rng(0xA2, 0);
    let mut max_err = 0.0f64;
    for n in 2..=4 {
        for _ in 0..25 {
            let pair = random_unit_square_pair(&mut rng, n);
            let eval = ResolventEvaluator::new(&pair).unwrap();
            for _ in 0..4 {
                let pt = random_off_pole_point(&mut rng, &pair);
                let w = eval.w(&pt).unwrap().w;
                let sub = morozov_subset_sum(&pair, &pt).unwrap();
                let perm = permutation_product_form(&pair, &pt).unwrap();
                let scale = w.norm();
                max_err = max_err.max((w - sub).norm() / scale);
                max_err = max_err.max((w - perm).norm() / scale);
                max_err = max_err.max((sub - perm).norm() / scale);
            }
        }
    }
    report("02", "oracle-triangle", max_err, 1e-9, "");
    assert!(max_err <= 1e-9);
}

#[test]
fn criterion_03_schur_identities() {
    let mut rng = stream_rng(0xA3, 0);
    let mut max_rel = 0.0f64;
    let mut cases = 0;
    while cases < 200 {
        let m = rng.gen_range(1..=5usize);
        let vars: Vec<Complex64> = (0..m)
            .map(|_| {
                let r: f64 = rng.gen_range(0.0..1.0f64).sqrt();
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(r, t)
            })
            .collect();
        let mut ok = true;
        for i in 0..m {
            for j in i + 1..m {
                if (vars[i] - vars[j]).norm() <= 0.1 {
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        let n = m - 1;
        let r = rng.gen_range(n..=12usize);
        let det = schur_hook_det(&HookSchurInput::new(vars.clone(), r)).unwrap();
        let sum = schur_hook_sum(&vars, r).unwrap();
        max_rel = max_rel.max((det - sum).norm() / (1.0 + sum.norm()));
        cases += 1;
    }

    // generating function truncation at R_max = 60 with rho <= 1/2
    let mut max_gap = 0.0f64;
    for _ in 0..50 {
        let m = rng.gen_range(1..=5usize);
        let vars: Vec<Complex64> = (0..m)
            .map(|_| {
                let r: f64 = rng.gen_range(0.0..0.9f64);
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(r, t)
            })
            .collect();
        let max_var = vars.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        // |x| = 2 max|x_k| would give rho = 1/2 exactly; stay just inside
        let x = Complex64::from_polar((2.0 * max_var).max(1.0) * 1.05, theta);
        let (partial, product) = schur_generating_partial(&vars, x, 60).unwrap();
        max_gap = max_gap.max((partial - product).norm());
    }
    let err = max_rel.max(max_gap / 1e-15 * 1e-10); // scale to shared report
    report(
        "03",
        "schur-identities",
        err,
        1e-10,
        &format!(", det-vs-sum {max_rel:.3e}, series gap {max_gap:.3e}"),
    );
    assert!(max_rel <= 1e-10);
    assert!(max_gap <= 1e-15);
}

#[test]
fn criterion_04_doubly_stochastic_sums() {
    let mut rng = stream_rng(0xA4, 0);
    let mut max_dev = 0.0f64;
    for n in 2..=8 {
        for _ in 0..20 {
            let pair = random_unit_square_pair(&mut rng, n);
            let m = correlator_matrix(&pair).unwrap();
            max_dev = max_dev.max(m.max_sum_deviation());
        }
    }
    report("04", "doubly-stochastic-sums", max_dev, 1e-8, "");
    assert!(max_dev <= 1e-8);
}

#[test]
fn criterion_05_residue_cross_method() {
    let mut rng = stream_rng(0xA5, 0);
    let mut max_abs = 0.0f64;
    for (n, pairs) in [(2usize, 4usize), (3, 3), (4, 3)] {
        for _ in 0..pairs {
            let pair = random_unit_square_pair(&mut rng, n);
            for i in 0..n {
                for j in 0..n {
                    let a = correlator_entry_affine(&pair, i, j).unwrap();
                    let q = correlator_entry_quadrature(&pair, i, j, 0.25, 64).unwrap();
                    max_abs = max_abs.max((a - q).norm());
                }
            }
        }
    }
    report("05", "residue-cross-method", max_abs, 1e-8, "");
    assert!(max_abs <= 1e-8);
}

#[test]
fn criterion_06_pole_reconstruction() {
    let mut rng = stream_rng(0xA6, 0);
    let mut max_res = 0.0f64;
    for n in 2..=5 {
        for _ in 0..2 {
            let pair = random_unit_square_pair(&mut rng, n);
            let m = correlator_matrix(&pair).unwrap();
            for _ in 0..20 {
                let pt = random_off_pole_point(&mut rng, &pair);
                max_res = max_res.max(pole_expansion_check(&pair, &m, &pt).unwrap());
            }
        }
    }
    report("06", "pole-reconstruction", max_res, 1e-9, "");
    assert!(max_res <= 1e-9);
}

#[test]
fn criterion_07_n2_closed_form() {
    let pair = ProblemPair::new(
        Spectrum::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        Spectrum::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
    )
    .unwrap();
    let e = std::f64::consts::E;
    let closed = e / (e - 1.0) - 1.0;

    // independent confirmation: double residue of the subset-sum oracle's W
    // by contour quadrature, never touching the determinant pipeline
    let nodes = 48;
    let radius = 0.25;
    let mut acc = c(0.0, 0.0);
    for a in 0..nodes {
        let tx = std::f64::consts::TAU * a as f64 / nodes as f64;
        let ex = Complex64::from_polar(radius, tx);
        for b in 0..nodes {
            let ty = std::f64::consts::TAU * b as f64 / nodes as f64;
            let ey = Complex64::from_polar(radius, ty);
            let pt = ResolventPoint::new(ex, ey); // circles around x_1 = y_1 = 0
            let w = morozov_subset_sum(&pair, &pt).unwrap();
            acc += w * ex * ey;
        }
    }
    let oracle_value = acc / (nodes * nodes) as f64;
    let oracle_gap = (oracle_value - c(closed, 0.0)).norm();
    assert!(
        oracle_gap <= 1e-11,
        "closed form not confirmed by the oracle residue: {oracle_value} vs {closed}"
    );

    let entry = correlator_entry_affine(&pair, 0, 0).unwrap();
    let err = (entry - c(closed, 0.0)).norm();
    report(
        "07",
        "n2-closed-form",
        err,
        1e-10,
        &format!(", oracle residue gap {oracle_gap:.3e}"),
    );
    assert!(err <= 1e-10);
}

#[test]
fn criterion_08_monte_carlo_anchors() {
    let start = std::time::Instant::now();
    let samples = 200_000;
    let seed = 2024;
    let mut rng = stream_rng(0xA8, 0);
    let mut worst_sigmas = 0.0f64;
    for n in [2usize, 3] {
        // real spectra in [0,1] with the usual 0.1 separation
        let draw_real = |rng: &mut rand_chacha::ChaCha8Rng| -> Spectrum {
            'outer: loop {
                let v: Vec<Complex64> =
                    (0..n).map(|_| c(rng.gen_range(0.0..1.0), 0.0)).collect();
                for i in 0..n {
                    for j in i + 1..n {
                        if (v[i] - v[j]).norm() <= 0.1 {
                            continue 'outer;
                        }
                    }
                }
                return Spectrum::new(v).unwrap();
            }
        };
        let pair = ProblemPair::new(draw_real(&mut rng), draw_real(&mut rng)).unwrap();

        let exact = hciz_probability_normalized(&pair).unwrap().to_complex();
        let est = mc_hciz(&pair, samples, seed).unwrap();
        let sigmas = (est.mean - exact).norm() / est.std_error;
        worst_sigmas = worst_sigmas.max(sigmas);

        let m = correlator_matrix(&pair).unwrap();
        for i in 0..n {
            for j in 0..n {
                let est = mc_correlator(&pair, i, j, samples, seed).unwrap();
                let sigmas = (est.mean - m.entry(i, j)).norm() / est.std_error;
                worst_sigmas = worst_sigmas.max(sigmas);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "08",
        "monte-carlo-anchors",
        worst_sigmas,
        4.0,
        &format!(" sigmas, {elapsed:.1} s"),
    );
    assert!(worst_sigmas <= 4.0);
    assert!(elapsed <= 300.0, "runtime budget exceeded: {elapsed:.1} s");
}

#[test]
fn criterion_09_normalization_constant() {
    let mut rng = stream_rng(0xA9, 0);
    let eps = 1e-3;
    let mut max_gap = 0.0f64;
    for n in 2..=4 {
        let base = random_unit_square_pair(&mut rng, n);
        let pair = ProblemPair::new(
            Spectrum::new(base.x().values().iter().map(|v| v * eps).collect()).unwrap(),
            Spectrum::new(base.y().values().iter().map(|v| v * eps).collect()).unwrap(),
        )
        .unwrap();
        let v = hciz_probability_normalized(&pair).unwrap().to_complex();
        max_gap = max_gap.max((v - c(1.0, 0.0)).norm());
    }
    report("09", "normalization-constant", max_gap, 1e-2, "");
    assert!(max_gap <= 1e-2);
}

#[test]
fn criterion_10_asymptotics_and_symmetry() {
    let mut rng = stream_rng(0xAA, 0);

    // x W -> sum_j 1/(y - y_j) at |x| = 1e8
    let mut max_asym = 0.0f64;
    for n in 1..=6 {
        let pair = random_unit_square_pair(&mut rng, n);
        let y = c(2.1, -1.3);
        let x = Complex64::from_polar(1e8, rng.gen_range(0.0..std::f64::consts::TAU));
        let w = resolvent_w(&pair, &ResolventPoint::new(x, y)).unwrap().w;
        let want: Complex64 = pair.y().values().iter().map(|&yj| 1.0 / (y - yj)).sum();
        max_asym = max_asym.max((x * w - want).norm() / want.norm());
    }

    // exchange symmetry of W and transpose symmetry of the correlators
    let mut max_sym = 0.0f64;
    for n in 2..=6 {
        let pair = random_unit_square_pair(&mut rng, n);
        let swapped = pair.swapped();
        for _ in 0..3 {
            let pt = random_off_pole_point(&mut rng, &pair);
            let a = resolvent_w(&pair, &pt).unwrap().w;
            let b = resolvent_w(&swapped, &ResolventPoint::new(pt.y, pt.x)).unwrap().w;
            max_sym = max_sym.max((a - b).norm() / a.norm().max(1e-10));
        }
        let ma = correlator_matrix(&pair).unwrap();
        let mb = correlator_matrix(&swapped).unwrap();
        for i in 0..n {
            for j in 0..n {
                max_sym = max_sym.max((ma.entry(i, j) - mb.entry(j, i)).norm());
            }
        }
    }
    report(
        "10",
        "asymptotics-and-symmetry",
        max_sym.max(max_asym / 1e-6 * 1e-9),
        1e-9,
        &format!(", asymptotic {max_asym:.3e} vs 1e-6, symmetry {max_sym:.3e}"),
    );
    assert!(max_asym <= 1e-6);
    assert!(max_sym <= 1e-9);
}

#[test]
fn criterion_11_trivial_exactness() {
    let mut rng = stream_rng(0xAB, 0);
    let pair = ProblemPair::new(
        Spectrum::new(vec![c(0.42, -0.17)]).unwrap(),
        Spectrum::new(vec![c(-0.31, 0.55)]).unwrap(),
    )
    .unwrap();
    let entry = correlator_entry_affine(&pair, 0, 0).unwrap();
    let entry_err = (entry - c(1.0, 0.0)).norm();

    let x1 = pair.x().values()[0];
    let y1 = pair.y().values()[0];
    let eval = ResolventEvaluator::new(&pair).unwrap();
    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let pt = random_off_pole_point(&mut rng, &pair);
        let w = eval.w(&pt).unwrap().w;
        let want = 1.0 / ((pt.x - x1) * (pt.y - y1));
        max_rel = max_rel.max((w - want).norm() / want.norm());
    }
    report(
        "11",
        "trivial-exactness",
        entry_err.max(max_rel / 1e-13 * 1e-14),
        1e-14,
        &format!(", entry gap {entry_err:.3e}, W rel {max_rel:.3e}"),
    );
    assert!(entry_err <= 1e-14);
    assert!(max_rel <= 1e-13);
}
