use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncpoisson::Complex64;

use crate::tau::parse_tau;

#[derive(Debug, Parser)]
#[command(name = "ncpoisson", version, about = "Elliptic nonabelian Poisson brackets: generate, export and verify")]
pub struct Cli {
    /// Seed for every randomized battery.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Override the pass/fail tolerance of a check.
    #[arg(long, global = true, env = "NCPOISSON_TOLERANCE")]
    pub tolerance: Option<f64>,

    /// Override the theta-series truncation (number of terms each side).
    #[arg(long, global = true, env = "NCPOISSON_TRUNCATION")]
    pub truncation: Option<usize>,

    /// Write the JSON document here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the elliptic bracket for (n, k, tau) and print it as JSON.
    Gen(GenArgs),
    /// Run one verification check and print a JSON report.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Continued-fraction expansion n/k = [n1, ..., np] with determinant check.
    Contfrac { n: u64, k: u64 },
    /// Residuals of every theta-function identity at random points.
    ThetaSelftest(ThetaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Affine,
    Homogeneous,
}

#[derive(Debug, Args)]
pub struct Elliptic {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Modular parameter written as RE+IMi.
    #[arg(long, value_parser = parse_tau, default_value = "0+1i")]
    pub tau: Complex64,
}

/// Either explicit parameters or a document written by `gen`.
#[derive(Debug, Args)]
pub struct Source {
    #[arg(long, required_unless_present = "input")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "input")]
    pub k: Option<usize>,
    #[arg(long, value_parser = parse_tau, default_value = "0+1i")]
    pub tau: Complex64,
    /// Affine chart (index of the variable set to one); defaults to n-1.
    #[arg(long)]
    pub chart: Option<usize>,
    /// JSON document produced by `gen`.
    #[arg(long, conflicts_with_all = ["n", "k", "chart"])]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub params: Elliptic,
    #[arg(long)]
    pub chart: Option<usize>,
    /// Which bracket the human-readable rendering shows.
    #[arg(long, value_enum, default_value_t = Form::Affine)]
    pub form: Form,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_tau, default_value = "0+1i")]
    pub tau: Complex64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum Check {
    /// Solve the index equations for (p, q) and re-substitute.
    Jac2(Source),
    /// Jacobi identity of the chart bracket on monomials up to a degree.
    Chart {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Homogeneity of the bivector and its Jacobiator on homogeneous triples.
    Homogeneous {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Jacobi identity of the induced bracket on N x N matrices.
    Matrix {
        #[command(flatten)]
        source: Source,
        #[arg(long = "N", short = 'N', default_value_t = 2)]
        size: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Theta-function identities for one n.
    Theta(ThetaArgs),
    /// Abelianized bracket against the commutative elliptic bracket.
    Abelian(Source),
}
