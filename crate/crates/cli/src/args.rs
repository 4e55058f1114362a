use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use steinbasis::scalar::{parse_rational, Rational};

#[derive(Debug, Parser)]
#[command(name = "steinbasis", version, about = "Certified plurisubharmonic defining functions for flat hyperbolic complex points")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build Φ for one α and certify it.
    Construct(ConstructArgs),
    /// Recheck a certificate written by `construct --emit-certificate`.
    Verify(VerifyArgs),
    /// Construct and certify a list of α values.
    Sweep(SweepArgs),
    /// Exact root-interval claims behind the degree-6 regime split.
    Roots,
    /// Classify a union of two totally real planes and check the map Ψ.
    Planes(PlanesArgs),
    /// Flow sublevel sets of Φ onto {u = v = 0}.
    Retract(RetractArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    /// Coefficient M of the (x² + y²)u^{2n} term, as p/q.
    #[arg(long = "M", value_parser = rational, default_value = "1")]
    pub m: Rational,
    /// Initial grid spacing of the certified grid, as p/q.
    #[arg(long, value_parser = rational, default_value = "1/8")]
    pub grid: Rational,
    /// Number of dyadic annuli tried below the outer radius.
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Bishop invariant α ∈ [0, 1), as p/q.
    #[arg(long, value_parser = alpha)]
    pub alpha: Rational,
    #[command(flatten)]
    pub certify: CertifyArgs,
    /// Directory receiving certificate.json and phi.txt.
    #[arg(long)]
    pub emit_certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Path to certificate.json.
    pub certificate: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated α values, each p/q in [0, 1).
    #[arg(long, value_parser = alpha, value_delimiter = ',', required = true)]
    pub alphas: Vec<Rational>,
    #[command(flatten)]
    pub certify: CertifyArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("matrix").required(true).args(["b", "mu"])))]
pub struct PlanesArgs {
    /// Entries a,b,c,d of B = [[a, b], [c, d]], each p/q.
    #[arg(long = "B", value_parser = rational, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<Rational>>,
    /// μ of the normal form, as p/q.
    #[arg(long, value_parser = nonnegative)]
    pub mu: Option<Rational>,
    /// Use the rotation normal form [[0, μ], [−μ, 0]] instead of diag(μ, −μ).
    #[arg(long, requires = "mu")]
    pub elliptic: bool,
    /// Decimal digits of working precision (at least 30).
    #[arg(long, default_value_t = 50)]
    pub precision: u32,
    /// Points sampled on each plane.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Correction weight N as p/q, or `auto`.
    #[arg(long = "N", default_value = "auto")]
    pub n: String,
    /// Points sampled on the critical line z = e^{iθ}w.
    #[arg(long, default_value_t = 100)]
    pub gradient_samples: usize,
}

#[derive(Debug, Args)]
pub struct RetractArgs {
    #[arg(long, value_parser = alpha)]
    pub alpha: Rational,
    #[command(flatten)]
    pub certify: CertifyArgs,
    /// Comma-separated levels ε, each p/q.
    #[arg(long, value_parser = rational, value_delimiter = ',', default_value = "1/1000")]
    pub eps: Vec<Rational>,
    /// Samples per level.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Radial lines checked.
    #[arg(long, default_value_t = 1000)]
    pub lines: usize,
    /// Write every trajectory as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn nonnegative(s: &str) -> Result<Rational, String> {
    let q = rational(s)?;
    if q < Rational::from_integer(0.into()) {
        return Err(format!("expected a nonnegative value, got {s}"));
    }
    Ok(q)
}

fn alpha(s: &str) -> Result<Rational, String> {
    let a = rational(s)?;
    if a < Rational::from_integer(0.into()) || a >= Rational::from_integer(1.into()) {
        return Err(format!("alpha must satisfy 0 <= alpha < 1, got {s}"));
    }
    Ok(a)
}
