use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use entroproof_core::atoms::MAX_VARS;

mod commands;

/// Exact prover for linear information inequalities and identities.
#[derive(Parser, Debug)]
#[command(name = "entroproof", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Largest number of random variables accepted.
    #[arg(
        long,
        global = true,
        env = "ENTROPROOF_MAX_N",
        default_value_t = 8,
        value_parser = clap::value_parser!(u8).range(1..=MAX_VARS as i64)
    )]
    max_n: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prove the objective of a query document.
    Prove {
        /// Query document, or `-` for stdin.
        file: PathBuf,
        /// Re-verify the certificate and cross-check against the direct LP.
        #[arg(long)]
        check: bool,
        /// Print problem sizes before the proof.
        #[arg(long)]
        stats: bool,
        /// Write the JSON certificate to this file when proved.
        #[arg(long, value_name = "FILE")]
        cert_out: Option<PathBuf>,
    },
    /// Check a JSON certificate against a query document.
    Verify {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        cert: PathBuf,
    },
    /// Print the reduced minimal characterization of a document's constraints.
    Simplify { file: PathBuf },
    /// List the elemental inequalities for n random variables.
    Elemental { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const INTERNAL: u8 = 3;
}

pub struct Config {
    pub format: Format,
    pub max_n: usize,
}

pub fn read_input(path: &Path) -> Result<String, String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("cannot read stdin: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = Config {
        format: cli.format,
        max_n: cli.max_n as usize,
    };
    let code = match cli.command {
        Command::Prove {
            file,
            check,
            stats,
            cert_out,
        } => commands::prove(&cfg, &file, check, stats, cert_out.as_deref()),
        Command::Verify { file, cert } => commands::verify(&cfg, &file, &cert),
        Command::Simplify { file } => commands::simplify(&cfg, &file),
        Command::Elemental { n } => commands::elemental(&cfg, n),
    };
    ExitCode::from(code)
}
