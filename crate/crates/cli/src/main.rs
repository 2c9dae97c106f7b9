//! `l2betti`: exact L²-Betti numbers and theorem checks from JSON documents.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use l2betti::betti::{Pipeline, Theorem};
use l2betti::fiber_square::Reading;
use l2betti_cli::commands::{self, Failure, Outcome, EXIT_INPUT};
use l2betti_cli::{corpus, input, render};

#[derive(Parser, Debug)]
#[command(name = "l2betti", version, about = "Exact L²-Betti numbers of finite groupoids and tracial extensions")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Structured, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Structured,
    Plain,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PipelineArg {
    Hochschild,
    Sauer,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReadingArg {
    Standard,
    Swapped,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a groupoid, extension, cocycle or instance document.
    Validate { file: String },
    /// L²-Betti numbers in degrees 0..N-1.
    Betti {
        file: String,
        #[arg(long = "N", default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum)]
        pipeline: Option<PipelineArg>,
        /// Run both pipelines on a groupoid and compare them.
        #[arg(long)]
        both: bool,
    },
    /// Chain dimensions, boundary ranks and homology of a complex.
    Homology {
        file: String,
        #[arg(long = "N", default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// bar, cyclic or acyclic; with --geometric also nerve or classifying.
        #[arg(long, default_value = "acyclic")]
        complex: String,
        /// Use the geometric complex of a groupoid.
        #[arg(long)]
        geometric: bool,
    },
    /// Build the fiber square and report its checks.
    FiberSquare {
        file: String,
        #[arg(long, value_enum, default_value_t = ReadingArg::Standard)]
        reading: ReadingArg,
    },
    /// Verify a theorem on an instance (the bundled default when FILE is omitted).
    Verify {
        /// compression, directed_sum, central_quadratic, groupoid_equality or residual.
        theorem: String,
        file: Option<String>,
        #[arg(long = "N", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Allow compressions by projections outside the center of B.
        #[arg(long)]
        extended_scope: bool,
    },
    /// List the bundled documents.
    Corpus,
}

fn default_instance(t: Theorem) -> &'static str {
    match t {
        Theorem::Compression => "bundled:compression_m2_scalars",
        Theorem::DirectedSum => "bundled:directed_sum",
        Theorem::CentralQuadratic => "bundled:central_quadratic",
        Theorem::GroupoidEquality => "bundled:groupoid_equality_action",
        Theorem::Residual => "bundled:residual_pair_3",
    }
}

/// Text of a path or `bundled:<name>`.
fn load(file: &str) -> Result<String, Failure> {
    let err = |m: String| Failure::Input(input::InputError { location: file.to_string(), message: m });
    match file.strip_prefix("bundled:") {
        Some(name) => corpus::get(name).map(str::to_string).ok_or_else(|| err(format!("no bundled document `{name}`"))),
        None => std::fs::read_to_string(file).map_err(|e| err(e.to_string())),
    }
}

fn sha256(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn run(cmd: &Command) -> Result<Outcome, Failure> {
    let doc = |file: &str| -> Result<(input::Document, String), Failure> {
        let text = load(file)?;
        Ok((input::parse_document(file, &text)?, sha256(&text)))
    };
    match cmd {
        Command::Validate { file } => {
            let (d, _) = doc(file)?;
            commands::validate(&d, file)
        }
        Command::Betti { file, n, pipeline, both } => {
            let (d, h) = doc(file)?;
            let p = pipeline.map(|p| match p {
                PipelineArg::Hochschild => Pipeline::Hochschild,
                PipelineArg::Sauer => Pipeline::Sauer,
            });
            commands::betti(&d, file, &h, *n as usize, p, *both)
        }
        Command::Homology { file, n, complex, geometric } => {
            let (d, _) = doc(file)?;
            commands::homology(&d, file, *n as usize, complex, *geometric)
        }
        Command::FiberSquare { file, reading } => {
            let (d, _) = doc(file)?;
            let r = match reading {
                ReadingArg::Standard => Reading::Standard,
                ReadingArg::Swapped => Reading::Swapped,
            };
            commands::fiber(&d, file, r)
        }
        Command::Verify { theorem, file, n, extended_scope } => {
            let t = Theorem::parse(theorem).ok_or_else(|| {
                Failure::Input(input::InputError {
                    location: "THEOREM".into(),
                    message: format!("unknown theorem `{theorem}`"),
                })
            })?;
            let file = file.as_deref().unwrap_or(default_instance(t));
            let (d, h) = doc(file)?;
            commands::verify(t, &d, file, &h, *n as usize, *extended_scope)
        }
        Command::Corpus => Ok(Outcome {
            report: serde_json::json!({
                "command": "corpus",
                "documents": corpus::CORPUS.iter().map(|(n, _)| format!("bundled:{n}")).collect::<Vec<_>>(),
            }),
            status: commands::EXIT_OK,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(f) => {
            match f {
                Failure::Input(e) => eprintln!("error: {e}"),
                Failure::Rejected(m) => eprintln!("error: {m}"),
            }
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let text = match cli.format {
        Format::Structured => render::structured(&outcome.report),
        Format::Plain => render::plain(&outcome.report),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_INPUT as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.status as u8)
}
