//! `shapelab` command-line driver.
//!
//! Exit codes: 0 when everything checked passes, 1 when an inequality or
//! bound check fails, 2 for bad input, 3 when a solver fails.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shapelab::Error;

/// Bumped whenever a field of an emitted JSON document changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "shapelab",
    version,
    about = "Torsion, perimeter and area of planar domains with holes and slits"
)]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measures, torsion and F_q of one domain.
    Compute(ComputeArgs),
    /// The full inequality bundle; exits 1 if any check fails.
    Verify(CommonArgs),
    /// Area and length profiles of the interior parallel sets (CSV).
    Profile(ProfileArgs),
    /// Trend table over a ramp of one family parameter (CSV).
    Sweep(SweepArgs),
    /// Minimize F_q over star-shaped domains with circular holes.
    Optimize(OptimizeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    /// Built-in family: disc, annulus, rectangle (or square), thin_triangle,
    /// slit_disc, wiggly_disc, k_hole_disc, channel_join.
    #[arg(long, conflicts_with = "domain", required_unless_present = "domain")]
    pub family: Option<String>,
    /// JSON domain file with `outer`, `holes` and `slits` point lists.
    #[arg(long)]
    pub domain: Option<PathBuf>,

    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long)]
    pub inner: Option<String>,
    #[arg(long)]
    pub outer: Option<String>,
    #[arg(long)]
    pub width: Option<String>,
    #[arg(long)]
    pub height: Option<String>,
    #[arg(long)]
    pub aspect: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub amplitude: Option<String>,
    #[arg(long)]
    pub frequency: Option<String>,
    #[arg(long)]
    pub holes: Option<String>,
    #[arg(long)]
    pub hole_radius: Option<String>,
    #[arg(long)]
    pub gap: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
}

impl DomainArgs {
    /// Family parameter flags in a fixed order, as (name, raw value).
    pub fn params(&self) -> Vec<(&'static str, &str)> {
        let all = [
            &self.radius,
            &self.inner,
            &self.outer,
            &self.width,
            &self.height,
            &self.aspect,
            &self.n,
            &self.amplitude,
            &self.frequency,
            &self.holes,
            &self.hole_radius,
            &self.gap,
            &self.epsilon,
        ];
        input::PARAM_FLAGS
            .iter()
            .zip(all)
            .filter_map(|(name, v)| v.as_deref().map(|v| (*name, v)))
            .collect()
    }
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[command(flatten)]
    pub source: DomainArgs,
    /// Exponent in (0, 1/2]; fractions allowed.
    #[arg(long, default_value = "1/2", value_parser = input::parse_number)]
    pub q: f64,
    /// Hole budget; defaults to the number of holes of the domain.
    #[arg(long)]
    pub k: Option<usize>,
    /// Grid spacing; defaults to the family's resolution policy.
    #[arg(long, value_parser = input::parse_number)]
    pub h: Option<f64>,
    /// Relative residual at which conjugate gradients stop.
    #[arg(long, default_value = "1e-8", value_parser = input::parse_number)]
    pub rel_tol: f64,
    /// Use the solve at h alone instead of extrapolating from h and h/2.
    #[arg(long)]
    pub no_richardson: bool,
    /// Accepted by every command; only `optimize` draws random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory that receives the output files as well.
    #[arg(long, env = "SHAPELAB_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write the torsion function on the grid to field.csv in the output directory.
    #[arg(long, requires = "out")]
    pub dump_field: bool,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of parallel distances sampled on [0, ρ].
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Values per `a..b` range.
    #[arg(long, default_value_t = 4)]
    pub steps: usize,
    /// Space `a..b` ranges geometrically.
    #[arg(long)]
    pub log: bool,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Exponent in (0, 1/2]; fractions allowed.
    #[arg(long, default_value = "0.45", value_parser = input::parse_number)]
    pub q: f64,
    /// Hole budget of the class searched.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Circular holes in the starting shape (at most k).
    #[arg(long, default_value_t = 0)]
    pub start_holes: usize,
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fourier modes of the radial function.
    #[arg(long, default_value_t = shapelab::optimizer::DEFAULT_MODES)]
    pub modes: usize,
    /// Objective grid spacing is √|Ω| divided by this.
    #[arg(long, default_value_t = shapelab::optimizer::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Resolution for re-evaluating finalists; 0 skips the pass.
    #[arg(long, default_value_t = 2 * shapelab::optimizer::DEFAULT_RESOLUTION)]
    pub fine_resolution: usize,
    /// Relative simplex spread that ends a cycle.
    #[arg(long, default_value = "1e-6", value_parser = input::parse_number)]
    pub tol: f64,
    /// Minimize the relaxed upper value instead of F_q.
    #[arg(long)]
    pub relaxed: bool,
    /// Continue from a previous run artifact with `--budget` more evaluations.
    #[arg(long, conflicts_with = "probe")]
    pub resume: Option<PathBuf>,
    /// Compare best values for k = 0 and k = 2 over seeds seed, seed+1, seed+2.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, env = "SHAPELAB_OUT")]
    pub out: Option<PathBuf>,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. }
            | Error::DegenerateProfile(_)
            | Error::ZeroTrial
            | Error::NoFeasiblePoint { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Compute(a) => commands::compute(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Profile(a) => commands::profile(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Optimize(a) => commands::optimize(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
