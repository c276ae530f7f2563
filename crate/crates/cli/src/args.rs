use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "minrep", version, about = "Minimal representation of O(p,q): tables and numerical checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// K-types of the kernel of the Yamabe operator with their dimensions.
    Ktypes,
    /// Dimensions of spherical harmonics on both factors.
    Dims,
    /// Yamabe eigenvalues on all K-types up to the cutoff.
    YamabeSpectrum,
    /// Run a numerical check; exit status 1 when it fails.
    Verify {
        #[arg(value_enum)]
        which: Check,
    },
    /// Knapp-Stein eigenvalues, closed form against quadrature.
    KnappStein,
    /// Infinitesimal characters.
    Infchar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Cocycle,
    Intertwine,
    Unitarity,
    GroupLaw,
    Beckner,
    KnappStein,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Cocycle => "cocycle",
            Check::Intertwine => "intertwine",
            Check::Unitarity => "unitarity",
            Check::GroupLaw => "group-law",
            Check::Beckner => "beckner",
            Check::KnappStein => "knapp-stein",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Displayed,
    HalfArguments,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    #[arg(long, global = true, default_value_t = 4)]
    pub p: usize,
    #[arg(long, global = true, default_value_t = 2)]
    pub q: usize,
    /// K-type cutoff; the default depends on the command.
    #[arg(long, global = true)]
    pub a_max: Option<usize>,
    /// Polynomial exactness of the quadrature grid; default depends on the command.
    #[arg(long, global = true)]
    pub exact_degree: Option<usize>,
    /// Boost parameter; default depends on the command.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub boost_t: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda_re: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 0.0)]
    pub lambda_im: f64,
    /// +1 or -1.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<i8>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add wall-clock time to the report (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    /// Knapp-Stein: every label of matching parity instead of the kernel line.
    #[arg(long, global = true)]
    pub all_labels: bool,
    /// Gamma-argument convention for the Knapp-Stein closed form.
    #[arg(long, global = true, value_enum, default_value_t = Convention::HalfArguments)]
    pub convention: Convention,
}
