//! Command-line front end: parses arguments, runs one computation and
//! writes a versioned JSON or CSV record.

mod commands;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lame_core::LameError;

pub use output::{Format, OutputRecord, Row, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lame", version, about = "Eigenvalues and eigenfunctions of Lamé's equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    /// Write the record to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Where {
    Segment,
    Real,
    Strip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    SelfAdjoint,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Endpoint,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    C1,
    C2,
    C3,
    Z1,
    Z2,
    Recessive,
    Limit,
}

#[derive(Debug, Args)]
pub struct Cell {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
    #[arg(long)]
    pub k: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constants K, K', η₁, η₂ and a table of sn, cn, dn, am.
    ///
    /// CSV columns: x, sn, cn, dn, am (label "table"), preceded by one
    /// "constants" row holding k, k', K, K', η₁ in the first five columns.
    Elliptic {
        #[arg(long)]
        k: f64,
        /// x-grid `start:end:count` in units of K.
        #[arg(long, default_value = "0:2:9")]
        grid: String,
    },
    /// Floquet eigenvalues h_0..h_mmax for exponent μ.
    ///
    /// CSV columns: m, h.
    Floquet {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[command(flatten)]
        cell: Cell,
        #[arg(long)]
        mmax: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Lamé–Wangerin eigenvalues of the given kind.
    ///
    /// CSV columns: m, h, truncation, residual.
    Wangerin {
        #[arg(long)]
        kind: u8,
        #[command(flatten)]
        cell: Cell,
        #[arg(long)]
        mmax: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Values of one eigenfunction on a grid.
    ///
    /// CSV columns: segment gives u, w; real and strip give x, y, re, im.
    Eigenfunction {
        #[arg(long)]
        kind: u8,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        cell: Cell,
        /// `start:end:count`, in units of K.
        #[arg(long)]
        grid: String,
        /// y-grid `start:end:count` in units of K' (strip only).
        #[arg(long, default_value = "0:0.5:3")]
        y_grid: String,
        #[arg(long = "where", value_enum, default_value = "segment")]
        location: Where,
        #[arg(long, value_enum, default_value = "self-adjoint")]
        form: FormArg,
        #[arg(long, value_enum, default_value = "endpoint")]
        norm: NormArg,
    },
    /// Algebraic Lamé functions at ν = −p − ½.
    ///
    /// CSV columns: m, h, then the coefficients a_0..a_{p-1}.
    Algebraic {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: f64,
    },
    /// Lamé polynomials at ν = −p − 1.
    ///
    /// CSV columns: kind, h, then the coefficients; the label is the
    /// sn·cn·dn class.
    Polynomial {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: f64,
    },
    /// Distance to the k → 0 limit for a decreasing list of k.
    ///
    /// CSV columns: k, max_error, ratio (ratio to the previous k; 0 for
    /// the first row).
    Limit {
        #[arg(long)]
        kind: u8,
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        nu: f64,
        /// Comma-separated, decreasing.
        #[arg(long, value_delimiter = ',')]
        klist: Vec<f64>,
    },
    /// Zeros on the segment and winding number on the unit circle.
    ///
    /// CSV columns: u (label "zero"), then one "winding" row with
    /// winding, min modulus and ℓ.
    Zeros {
        #[arg(long)]
        kind: u8,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        cell: Cell,
    },
    /// Runs a verification suite; exit code 1 if any check fails.
    ///
    /// CSV columns: nu, k, lhs, rhs, margin, holds.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        /// `default` selects the standard (ν, k) grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(LameError),
    Io(std::io::Error),
}

impl From<LameError> for Failure {
    fn from(e: LameError) -> Self {
        match e {
            LameError::Domain(msg) => Failure::Usage(msg),
            other => Failure::Compute(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Runs one invocation. Returns the process exit code.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match commands::execute(&cli.command) {
        Ok((record, passed)) => {
            let written = match &cli.out {
                Some(path) => std::fs::File::create(path).and_then(|mut f| output::write_record(&record, cli.format, &mut f)),
                None => output::write_record(&record, cli.format, stdout),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_FAILED;
            }
            if passed {
                EXIT_OK
            } else {
                let _ = writeln!(stderr, "verification failed");
                EXIT_FAILED
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILED
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILED
        }
    }
}
