use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use randers_cli::commands::{self, CheckArgs};
use randers_cli::error::CliError;
use randers_cli::problem;
use randers_cli::render::{self, Format};

#[derive(Parser)]
#[command(
    name = "randers",
    version,
    about = "Curvature of invariant Randers metrics from Lie-algebra data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Table,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Predicate {
    Berwald,
    Perfect,
    YsPositive,
    YsNegative,
    YsZero,
    Milnor,
}

impl Predicate {
    fn as_str(self) -> &'static str {
        match self {
            Predicate::Berwald => "berwald",
            Predicate::Perfect => "perfect",
            Predicate::YsPositive => "ys-positive",
            Predicate::YsNegative => "ys-negative",
            Predicate::YsZero => "ys-zero",
            Predicate::Milnor => "milnor",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a problem file and report every validated invariant
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Flag-curvature report for the flag spanned by --y and --u
    Flag {
        file: PathBuf,
        /// pole span vector, comma-separated in basis order
        #[arg(long)]
        y: String,
        /// second span vector, comma-separated in basis order
        #[arg(long)]
        u: String,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Seeded random flag scan with oracle curvature statistics
    Scan {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Classification predicates and condition reports
    Check {
        file: PathBuf,
        #[arg(value_enum)]
        predicate: Predicate,
        /// flag-curvature constant for the ys-positive / ys-negative cases
        #[arg(long)]
        k: Option<f64>,
        /// direction for the milnor check (defaults to the drift)
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
    /// Printed-formula vs. oracle discrepancy audit over sampled flags
    Compare {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
    },
}

fn parse_csv(label: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{label}: cannot parse component {tok:?}")))
        })
        .collect()
}

fn run() -> Result<String, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { file, format } => {
            let (loaded, bytes) = problem::load_path(&file)?;
            let header = commands::make_header(
                "validate",
                &file.display().to_string(),
                &bytes,
                &loaded.geometry.tolerances,
            );
            let output = commands::run_validate(&loaded)?;
            Ok(render::render_validate(&header, &output, format.into()))
        }
        Command::Flag { file, y, u, format } => {
            let (loaded, bytes) = problem::load_path(&file)?;
            let header = commands::make_header(
                "flag",
                &file.display().to_string(),
                &bytes,
                &loaded.geometry.tolerances,
            );
            let y = parse_csv("--y", &y)?;
            let u = parse_csv("--u", &u)?;
            let output = commands::run_flag(&loaded, &y, &u)?;
            Ok(render::render_flag(&header, &output, format.into()))
        }
        Command::Scan {
            file,
            n,
            seed,
            format,
        } => {
            let (loaded, bytes) = problem::load_path(&file)?;
            let header = commands::make_header(
                "scan",
                &file.display().to_string(),
                &bytes,
                &loaded.geometry.tolerances,
            );
            let output = commands::run_scan(&loaded, n, seed)?;
            Ok(render::render_scan(&header, &output, format.into()))
        }
        Command::Check {
            file,
            predicate,
            k,
            x,
            n,
            seed,
            format,
        } => {
            let (loaded, bytes) = problem::load_path(&file)?;
            let header = commands::make_header(
                "check",
                &file.display().to_string(),
                &bytes,
                &loaded.geometry.tolerances,
            );
            let x = match x {
                Some(raw) => Some(parse_csv("--x", &raw)?),
                None => None,
            };
            let args = CheckArgs {
                k,
                x,
                samples: n,
                seed,
            };
            let output = commands::run_check(&loaded, predicate.as_str(), &args)?;
            Ok(render::render_check(&header, &output, format.into()))
        }
        Command::Compare {
            file,
            n,
            seed,
            format,
        } => {
            let (loaded, bytes) = problem::load_path(&file)?;
            let header = commands::make_header(
                "compare",
                &file.display().to_string(),
                &bytes,
                &loaded.geometry.tolerances,
            );
            let output = commands::run_compare(&loaded, n, seed)?;
            Ok(render::render_compare(&header, &output, format.into()))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
