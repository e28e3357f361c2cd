//! Command-line surface and the serializable job description.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "izcorr",
    version,
    about = "Exact correlation functions of unitary matrices under the Itzykson-Zuber weight",
    after_help = "Spectra are comma-separated lists: `--x \"0,1\"` for reals, \
                  `--x \"0+0i,1+2i\"` for complex entries, or `--input file.json` \
                  with schema {\"x\": [[re,im],...], \"y\": [[re,im],...]}."
)]
pub struct Cli {
    /// Worker threads for parallel fills (defaults to RAYON_NUM_THREADS or
    /// all cores); results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the matrix integral `∫ dU e^{tr(X U† Y U)}` in log form.
    Hciz {
        #[command(flatten)]
        spectra: SpectraArgs,
        /// `paper`: the convention where the formula has prefactor one;
        /// `haar`: probability-normalized Haar measure.
        #[arg(long, value_enum, default_value_t = Normalization::Paper)]
        normalization: Normalization,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// The matrix of ⟨|U_ij|²⟩ entries (or one entry).
    Correlators {
        #[command(flatten)]
        spectra: SpectraArgs,
        /// Single entry `i,j` (zero-based) instead of the full matrix.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Affine)]
        method: Method,
        /// Contour radius as a fraction of the spectral gap (quadrature only).
        #[arg(long, default_value_t = 0.25)]
        radius_fraction: f64,
        /// Trapezoid nodes per circle (quadrature only).
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// The two-point correlator W(x,y) at one or more spectator points.
    Resolvent {
        #[command(flatten)]
        spectra: SpectraArgs,
        /// Evaluation point as `x,y` (each possibly complex); repeatable.
        #[arg(long, required = true)]
        point: Vec<String>,
        /// `default`: identity-minus form; `ratio`: determinant-ratio
        /// cross-check form.
        #[arg(long, value_enum, default_value_t = ResolventForm::Default)]
        form: ResolventForm,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the verification battery and emit a machine-readable report.
    Verify {
        /// Matrix dimension.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Random pairs per check.
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Relative tolerance for every check.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Monte Carlo oracles over Haar-random unitaries (real spectra).
    Mc {
        #[command(flatten)]
        spectra: SpectraArgs,
        #[arg(long, value_enum, default_value_t = Quantity::Hciz)]
        quantity: Quantity,
        /// Entry `i,j` for `--quantity correlator`.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Jackknife blocks; also the unit of RNG stream derivation.
        #[arg(long, default_value_t = 100)]
        blocks: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Args, Debug)]
pub struct SpectraArgs {
    /// Eigenvalues of X, comma separated.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub x: Option<String>,
    /// Eigenvalues of Y, comma separated.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub y: Option<String>,
    /// JSON file with {"x": [[re,im],...], "y": [[re,im],...]}.
    #[arg(long)]
    pub input: Option<String>,
    /// Minimum pairwise eigenvalue separation accepted.
    #[arg(long, default_value_t = izcorr_core::spectra::DEFAULT_SEPARATION_TOL)]
    pub separation_tol: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Paper,
    Haar,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Affine,
    Quadrature,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolventForm {
    Default,
    Ratio,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Hciz,
    Correlator,
}

/// Fully resolved job description; round-trips through serialization
/// unchanged, which pins the CLI surface for reproducibility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum JobSpec {
    Hciz {
        x: Vec<[f64; 2]>,
        y: Vec<[f64; 2]>,
        normalization: Normalization,
        format: Format,
        separation_tol: f64,
    },
    Correlators {
        x: Vec<[f64; 2]>,
        y: Vec<[f64; 2]>,
        entry: Option<(usize, usize)>,
        method: Method,
        radius_fraction: f64,
        nodes: usize,
        format: Format,
        separation_tol: f64,
    },
    Resolvent {
        x: Vec<[f64; 2]>,
        y: Vec<[f64; 2]>,
        points: Vec<[f64; 4]>,
        form: ResolventForm,
        format: Format,
        separation_tol: f64,
    },
    Verify {
        n: usize,
        trials: usize,
        seed: u64,
        tol: f64,
        format: Format,
    },
    Mc {
        x: Vec<[f64; 2]>,
        y: Vec<[f64; 2]>,
        quantity: Quantity,
        entry: Option<(usize, usize)>,
        samples: usize,
        seed: u64,
        blocks: usize,
        format: Format,
    },
}
