//! `izcorr`: batch evaluation and verification campaigns from the shell.
//!
//! Exit codes: 0 success; 2 validation error (degenerate spectra, singular
//! kernel, malformed arguments); 3 verification failure (any check outside
//! tolerance); 4 Monte Carlo variance or denominator failure. Results go to
//! stdout, diagnostics and warnings to stderr.

mod args;
mod output;
mod parse;

use std::process::ExitCode;

use clap::Parser;
use num_complex::Complex64;
use serde_json::json;

use izcorr_core::correlators::{
    correlator_entry_affine, correlator_entry_quadrature, correlator_matrix_quadrature,
    correlator_matrix_with, CorrelatorMatrix,
};
use izcorr_core::hciz::{hciz_probability_normalized, hciz_value};
use izcorr_core::oracles::{mc_correlator_blocks, mc_hciz_blocks, MCEstimate};
use izcorr_core::resolvent::{ResolventEvaluator, ResolventPoint};
use izcorr_core::spectra::{validate_spectrum, ProblemPair, Spectrum};
use izcorr_core::verify::run_verification;
use izcorr_core::{clinalg::LogComplex, Error};

use args::{Cli, Command, Format, JobSpec, Method, Normalization, Quantity, ResolventForm, SpectraArgs};
use output::{complex_json, fmt_f64, matrix_csv, CsvWriter};

enum Failure {
    Validation(String),
    Verification(String),
    MonteCarlo(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Verification(_) => 3,
            Failure::MonteCarlo(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Verification(m) | Failure::MonteCarlo(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::VarianceOverflow { .. } | Error::DegenerateDenominator { .. } => {
                Failure::MonteCarlo(e.to_string())
            }
            Error::StochasticityViolation { .. } => Failure::Verification(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // overrides RAYON_NUM_THREADS; ignore the error if a pool exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn build_pair(spectra: &SpectraArgs) -> Result<(ProblemPair, Vec<[f64; 2]>, Vec<[f64; 2]>), Failure> {
    let (xv, yv) = match (&spectra.x, &spectra.y, &spectra.input) {
        (Some(x), Some(y), None) => (
            parse::parse_spectrum_list(x).map_err(Failure::Validation)?,
            parse::parse_spectrum_list(y).map_err(Failure::Validation)?,
        ),
        (None, None, Some(path)) => parse::load_input_file(path).map_err(Failure::Validation)?,
        _ => {
            return Err(Failure::Validation(
                "provide either --x and --y or --input".into(),
            ))
        }
    };
    let raw_x: Vec<[f64; 2]> = xv.iter().map(|z| [z.re, z.im]).collect();
    let raw_y: Vec<[f64; 2]> = yv.iter().map(|z| [z.re, z.im]).collect();
    let x = validate_spectrum(xv, spectra.separation_tol).map_err(Failure::from)?;
    let y = validate_spectrum(yv, spectra.separation_tol).map_err(Failure::from)?;
    let pair = ProblemPair::new(x, y).map_err(Failure::from)?;
    Ok((pair, raw_x, raw_y))
}

fn parse_entry(s: &str, n: usize) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::Validation(format!("entry must be 'i,j' with zero-based indices, got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let i: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let j: usize = parts[1].trim().parse().map_err(|_| bad())?;
    if i >= n || j >= n {
        return Err(Failure::Validation(format!(
            "entry ({i}, {j}) out of range for dimension {n}"
        )));
    }
    Ok((i, j))
}

fn parse_point(s: &str) -> Result<ResolventPoint, Failure> {
    let vals = parse::parse_spectrum_list(s).map_err(Failure::Validation)?;
    if vals.len() != 2 {
        return Err(Failure::Validation(format!(
            "point must be 'x,y' (two complex numbers), got '{s}'"
        )));
    }
    Ok(ResolventPoint::new(vals[0], vals[1]))
}

fn warn_condition(eval: &ResolventEvaluator) {
    let cond = eval.condition_estimate();
    if cond > 1e6 {
        eprintln!(
            "warning: kernel condition estimate {cond:.3e}; f64 accuracy degrades, \
             extended-precision paths engaged where available"
        );
    }
}

fn warn_pole_distance(pair: &ProblemPair, pt: &ResolventPoint) {
    let dist = pair.x().distance_to(pt.x).min(pair.y().distance_to(pt.y));
    if dist < 1e-2 {
        eprintln!(
            "warning: evaluation point within {dist:.3e} of a spectral pole; \
             expect ~1e-7 relative accuracy"
        );
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Hciz { spectra, normalization, format } => {
            let (pair, x, y) = build_pair(&spectra)?;
            let job = JobSpec::Hciz {
                x,
                y,
                normalization,
                format,
                separation_tol: spectra.separation_tol,
            };
            run_hciz(&pair, &job)
        }
        Command::Correlators { spectra, entry, method, radius_fraction, nodes, format } => {
            let (pair, x, y) = build_pair(&spectra)?;
            let entry = entry.as_deref().map(|s| parse_entry(s, pair.n())).transpose()?;
            if !(radius_fraction > 0.0 && radius_fraction < 0.5) {
                return Err(Failure::Validation(
                    "radius-fraction must lie strictly between 0 and 0.5".into(),
                ));
            }
            if nodes < 16 {
                return Err(Failure::Validation("at least 16 quadrature nodes required".into()));
            }
            let job = JobSpec::Correlators {
                x,
                y,
                entry,
                method,
                radius_fraction,
                nodes,
                format,
                separation_tol: spectra.separation_tol,
            };
            run_correlators(&pair, &job)
        }
        Command::Resolvent { spectra, point, form, format } => {
            let (pair, x, y) = build_pair(&spectra)?;
            let points: Vec<ResolventPoint> =
                point.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
            let raw_points: Vec<[f64; 4]> =
                points.iter().map(|p| [p.x.re, p.x.im, p.y.re, p.y.im]).collect();
            let job = JobSpec::Resolvent {
                x,
                y,
                points: raw_points,
                form,
                format,
                separation_tol: spectra.separation_tol,
            };
            run_resolvent(&pair, &points, &job)
        }
        Command::Verify { n, trials, seed, tol, format } => {
            if n == 0 || trials == 0 {
                return Err(Failure::Validation("n and trials must be positive".into()));
            }
            let job = JobSpec::Verify { n, trials, seed, tol, format };
            run_verify(&job)
        }
        Command::Mc { spectra, quantity, entry, samples, seed, blocks, format } => {
            let (pair, x, y) = build_pair(&spectra)?;
            let entry = entry.as_deref().map(|s| parse_entry(s, pair.n())).transpose()?;
            if samples < 1000 {
                return Err(Failure::Validation("at least 1000 samples required".into()));
            }
            if blocks < 2 || blocks > samples / 2 {
                return Err(Failure::Validation("blocks must lie in [2, samples/2]".into()));
            }
            let max_coupling = pair
                .x()
                .values()
                .iter()
                .flat_map(|xi| pair.y().values().iter().map(move |yj| (xi * yj).re.abs()))
                .fold(0.0, f64::max);
            if max_coupling > 20.0 {
                return Err(Failure::Validation(format!(
                    "max |Re(x_i y_j)| = {max_coupling:.2} exceeds 20; the Monte Carlo weight \
                     variance is uncontrolled there"
                )));
            }
            let job = JobSpec::Mc { x, y, quantity, entry, samples, seed, blocks, format };
            run_mc(&pair, &job)
        }
    }
}

fn run_hciz(pair: &ProblemPair, job: &JobSpec) -> Result<(), Failure> {
    let JobSpec::Hciz { normalization, format, .. } = job else { unreachable!() };
    let value: LogComplex = match normalization {
        Normalization::Paper => hciz_value(pair).map_err(Failure::from)?,
        Normalization::Haar => hciz_probability_normalized(pair).map_err(Failure::from)?,
    };
    match format {
        Format::Json => {
            let out = json!({
                "log_magnitude": value.log_magnitude(),
                "phase": complex_json(value.phase()),
            });
            println!("{out}");
        }
        Format::Csv => {
            let mut w = CsvWriter::new();
            w.header(&["log_magnitude", "phase_re", "phase_im"]);
            w.row(&[
                fmt_f64(value.log_magnitude()),
                fmt_f64(value.phase().re),
                fmt_f64(value.phase().im),
            ]);
            print!("{}", w.finish());
        }
    }
    Ok(())
}

fn run_correlators(pair: &ProblemPair, job: &JobSpec) -> Result<(), Failure> {
    let JobSpec::Correlators { entry, method, radius_fraction, nodes, format, .. } = job else {
        unreachable!()
    };
    let eval = ResolventEvaluator::new(pair).map_err(Failure::from)?;
    warn_condition(&eval);
    match entry {
        Some((i, j)) => {
            let value = match method {
                Method::Affine => {
                    correlator_entry_affine(pair, *i, *j).map_err(Failure::from)?
                }
                Method::Quadrature => {
                    correlator_entry_quadrature(pair, *i, *j, *radius_fraction, *nodes)
                        .map_err(Failure::from)?
                }
            };
            emit_entry(pair.n(), (*i, *j), value, *format);
        }
        None => {
            let matrix: CorrelatorMatrix = match method {
                Method::Affine => correlator_matrix_with(&eval).map_err(Failure::from)?,
                Method::Quadrature => {
                    let m = correlator_matrix_quadrature(pair, *radius_fraction, *nodes)
                        .map_err(Failure::from)?;
                    let dev = m.max_sum_deviation();
                    if dev > 1e-6 {
                        eprintln!("warning: quadrature sum-rule deviation {dev:.3e}");
                    }
                    m
                }
            };
            match format {
                Format::Json => {
                    let entries: Vec<Vec<serde_json::Value>> = (0..pair.n())
                        .map(|i| (0..pair.n()).map(|j| complex_json(matrix.entry(i, j))).collect())
                        .collect();
                    println!("{}", json!({ "n": pair.n(), "entries": entries }));
                }
                Format::Csv => print!("{}", matrix_csv(matrix.entries())),
            }
        }
    }
    Ok(())
}

fn emit_entry(n: usize, (i, j): (usize, usize), value: Complex64, format: Format) {
    match format {
        Format::Json => {
            println!("{}", json!({ "n": n, "entry": [i, j], "value": complex_json(value) }));
        }
        Format::Csv => {
            let mut w = CsvWriter::new();
            w.header(&["i", "j", "value_re", "value_im"]);
            w.row(&[i.to_string(), j.to_string(), fmt_f64(value.re), fmt_f64(value.im)]);
            print!("{}", w.finish());
        }
    }
}

fn run_resolvent(
    pair: &ProblemPair,
    points: &[ResolventPoint],
    job: &JobSpec,
) -> Result<(), Failure> {
    let JobSpec::Resolvent { form, format, .. } = job else { unreachable!() };
    let eval = ResolventEvaluator::new(pair).map_err(Failure::from)?;
    warn_condition(&eval);
    let mut results = Vec::with_capacity(points.len());
    for pt in points {
        warn_pole_distance(pair, pt);
        let w = match form {
            ResolventForm::Default => eval.w(pt).map_err(Failure::from)?.w,
            ResolventForm::Ratio => eval.w_ratio_form(pt).map_err(Failure::from)?.w,
        };
        results.push((pt, w));
    }
    match format {
        Format::Json => {
            let pts: Vec<serde_json::Value> = results
                .iter()
                .map(|(pt, w)| {
                    json!({
                        "x": complex_json(pt.x),
                        "y": complex_json(pt.y),
                        "w": complex_json(*w),
                    })
                })
                .collect();
            println!("{}", json!({ "n": pair.n(), "points": pts }));
        }
        Format::Csv => {
            let mut wtr = CsvWriter::new();
            wtr.header(&["x_re", "x_im", "y_re", "y_im", "w_re", "w_im"]);
            for (pt, w) in results {
                wtr.row(&[
                    fmt_f64(pt.x.re),
                    fmt_f64(pt.x.im),
                    fmt_f64(pt.y.re),
                    fmt_f64(pt.y.im),
                    fmt_f64(w.re),
                    fmt_f64(w.im),
                ]);
            }
            print!("{}", wtr.finish());
        }
    }
    Ok(())
}

fn run_verify(job: &JobSpec) -> Result<(), Failure> {
    let JobSpec::Verify { n, trials, seed, tol, format } = job else { unreachable!() };
    let report = run_verification(*n, *trials, *seed, *tol).map_err(Failure::from)?;
    match format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Csv => {
            let mut w = CsvWriter::new();
            w.header(&["name", "cases", "max_error", "tolerance", "passed"]);
            for c in &report.checks {
                w.row(&[
                    c.name.clone(),
                    c.cases.to_string(),
                    fmt_f64(c.max_error),
                    fmt_f64(c.tolerance),
                    c.passed.to_string(),
                ]);
            }
            print!("{}", w.finish());
        }
    }
    if !report.passed {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        return Err(Failure::Verification(format!(
            "verification failed: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn run_mc(pair: &ProblemPair, job: &JobSpec) -> Result<(), Failure> {
    let JobSpec::Mc { quantity, entry, samples, seed, blocks, format, .. } = job else {
        unreachable!()
    };
    let (est, label): (MCEstimate, &str) = match quantity {
        Quantity::Hciz => {
            (mc_hciz_blocks(pair, *samples, *seed, *blocks).map_err(Failure::from)?, "hciz")
        }
        Quantity::Correlator => {
            let (i, j) = entry.ok_or_else(|| {
                Failure::Validation("--quantity correlator requires --entry i,j".into())
            })?;
            (
                mc_correlator_blocks(pair, i, j, *samples, *seed, *blocks)
                    .map_err(Failure::from)?,
                "correlator",
            )
        }
    };
    match format {
        Format::Json => {
            let mut out = json!({
                "quantity": label,
                "mean": complex_json(est.mean),
                "std_error": est.std_error,
                "samples": est.samples,
                "seed": seed,
                "blocks": blocks,
            });
            if let Some((i, j)) = entry {
                out["entry"] = json!([i, j]);
            }
            println!("{out}");
        }
        Format::Csv => {
            let mut w = CsvWriter::new();
            w.header(&["quantity", "mean_re", "mean_im", "std_error", "samples", "seed", "blocks"]);
            w.row(&[
                label.to_string(),
                fmt_f64(est.mean.re),
                fmt_f64(est.mean.im),
                fmt_f64(est.std_error),
                est.samples.to_string(),
                seed.to_string(),
                blocks.to_string(),
            ]);
            print!("{}", w.finish());
        }
    }
    Ok(())
}

/// Spectrum helper kept for documentation examples.
#[allow(dead_code)]
fn spectrum_from_reals(v: &[f64]) -> Spectrum {
    Spectrum::new(v.iter().map(|&re| Complex64::new(re, 0.0)).collect()).expect("valid")
}
