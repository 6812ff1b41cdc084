use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "varlex",
    version,
    about = "Variable-exponent norms, fractional maximal operators and their pointwise inequalities",
    after_help = "Exit status: 0 success, 1 input error, 2 verification failure.\n\
                  VARLEX_THREADS sets the worker count (output does not depend on it)."
)]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an exponent field and report its range and log-Hölder constants.
    ValidateExponent(ValidateExponentArgs),
    /// Luxemburg norm of a field file.
    Norm(NormArgs),
    /// Fractional maximal function of a field file, written as CSV.
    Maximal(MaximalArgs),
    /// Run the lemma or one of the proposition checks from a config.
    Verify(VerifyArgs),
    /// Boundedness ratios over a seeded family of functions.
    Sweep(SweepArgs),
    /// Time the kernels on a config's grid.
    Bench(BenchArgs),
}

/// Grid source shared by the commands that read field files. Without
/// `--domain` the grid is inferred from the CSV cell centers.
#[derive(Debug, Args)]
pub struct DomainArg {
    /// Domain JSON `{n, box, resolution, mask}`.
    #[arg(long, value_name = "PATH")]
    pub domain: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateExponentArgs {
    /// `const:P`, `affine:P0,SLOPE,LO,HI`, `log_decay:P_INF,A`, `csv:PATH` or a JSON file.
    #[arg(long)]
    pub exponent: String,

    /// Take the domain (and `alpha`, unless given) from a run config.
    #[arg(long, value_name = "PATH", conflicts_with = "domain")]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub domain: DomainArg,

    /// Pair with this order and derive `q`.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Fail (exit 2) when either log-Hölder constant exceeds this.
    #[arg(long, value_name = "C")]
    pub max_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long, value_name = "PATH")]
    pub function: PathBuf,

    /// Exponent shorthand or JSON file, as for `validate-exponent`.
    #[arg(long)]
    pub exponent: String,

    #[command(flatten)]
    pub domain: DomainArg,

    /// Relative bracket width.
    #[arg(long, default_value_t = varlex_core::DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct MaximalArgs {
    #[arg(long, value_name = "PATH")]
    pub function: PathBuf,

    /// Order in `[0, n)`; 0 gives the Hardy–Littlewood operator.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,

    /// Largest cube side in cells (default: largest axis count).
    #[arg(long)]
    pub max_side: Option<usize>,

    /// Use direct enumeration instead of the fast path.
    #[arg(long, conflicts_with = "bench")]
    pub oracle: bool,

    /// Time both paths and print cells/second instead of the field.
    #[arg(long)]
    pub bench: bool,

    #[command(flatten)]
    pub domain: DomainArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Lemma,
    Prop1,
    Prop2,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: CheckKind,

    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,

    /// Field file to check (overrides the config's `function`).
    #[arg(long, value_name = "PATH")]
    pub function: Option<PathBuf>,

    /// Include per-cell lhs and rhs in the report.
    #[arg(long)]
    pub dump_fields: bool,

    /// Also write `x1[,x2],lhs,rhs` rows here.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Run config (default: the built-in demo).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Generator seed (default: the config's seed).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of cases (default: the config's `cases`, else 100).
    #[arg(long)]
    pub cases: Option<u64>,

    /// Also write per-case ratios as CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Run config (default: the built-in demo).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Timed repetitions per kernel.
    #[arg(long, default_value_t = 3)]
    pub repeat: u32,
}
