//! `timesym` command-line interface.
//!
//! Exit status: 0 when every requested check passes, 1 when a check fails,
//! 2 for unreadable or invalid input. Errors are reported on stderr as one
//! JSON line.

mod bundled;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use timesym::matcore::ToleranceConfig;

#[derive(Parser)]
#[command(name = "timesym", version, about = "Operational time reversal toolkit")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Hermiticity tolerance.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().herm)]
    tol_herm: f64,
    /// Most negative eigenvalue accepted as PSD.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().psd)]
    tol_psd: f64,
    /// Relative eigenvalue cutoff for supports.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().support)]
    tol_support: f64,
    /// Absolute tolerance on probabilities.
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().prob)]
    tol_prob: f64,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Expect {
    Feasible,
    Infeasible,
}

#[derive(Subcommand)]
enum Command {
    /// Behavior CSV of an experiment.
    Predict { experiment: String },
    /// Reverse experiment document and its verification record.
    Reverse {
        experiment: String,
        /// Write the reversed experiment here and print only the verification record.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also search for a qubit gauge mapping the reverse onto the original.
        #[arg(long)]
        gauge: bool,
    },
    /// Check that the second experiment is an operational time reverse of the first.
    VerifyReverse { experiment: String, reversed: String },
    /// Bipartite state of an experiment and the timelike/spacelike deviation.
    Bipartite { experiment: String },
    /// CHSH value, facets and LP certificate.
    Chsh { experiment: String },
    /// Local-causality certificate for a behavior CSV.
    LhvCheck {
        behavior: PathBuf,
        /// Fail unless the verdict matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// All conditional-independence checks on an ontic extension.
    OnticCheck { extension: String },
    /// Build the toy-model extension and run the full check suite on it.
    ToyModel,
    /// Price argument on a psi-ontic extension (built in unless given).
    PriceDemo { extension: Option<String> },
    /// Chained-family table as CSV.
    CrFamily {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
    /// Run the reproduction suite and the bundled-document checks.
    PaperSuite,
}

/// Error with its exit status.
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "input",
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "check",
            message: message.into(),
        }
    }
}

impl From<timesym::Error> for Failure {
    fn from(e: timesym::Error) -> Self {
        match e {
            timesym::Error::CertificateRejected(_) => Self::check(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let t = &cli.tol;
    let tol = ToleranceConfig {
        herm: t.tol_herm,
        psd: t.tol_psd,
        support: t.tol_support,
        prob: t.tol_prob,
    };
    tol.validate()?;
    match cli.command {
        Command::Predict { experiment } => commands::predict(&experiment, &tol),
        Command::Reverse { experiment, out, gauge } => commands::reverse(&experiment, out.as_deref(), gauge, &tol),
        Command::VerifyReverse { experiment, reversed } => commands::verify_reverse(&experiment, &reversed, &tol),
        Command::Bipartite { experiment } => commands::bipartite(&experiment, &tol),
        Command::Chsh { experiment } => commands::chsh(&experiment, &tol),
        Command::LhvCheck { behavior, expect } => commands::lhv_check(&behavior, expect, &tol),
        Command::OnticCheck { extension } => commands::ontic_check(&extension, &tol),
        Command::ToyModel => commands::toy_model(),
        Command::PriceDemo { extension } => commands::price_demo(extension.as_deref(), &tol),
        Command::CrFamily { n_max } => commands::cr_family(n_max, &tol),
        Command::PaperSuite => commands::paper_suite(&tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", serde_json::json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
