//! `kdecl`: lint programs, compile formulas, score candidates against gold,
//! build demonstration stores and record or replay sessions.
//!
//! Exit codes: 0 when the command succeeded with no error findings, 1 when it
//! ran but found errors (or a session stopped early), 2 for usage, input or
//! backend failures.

mod commands;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{cmd_compile_fol, cmd_embed, cmd_eval, cmd_lint, cmd_record, cmd_replay, cmd_viz};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Llm(#[from] kdecl::llm::LlmError),
    #[error(transparent)]
    Store(#[from] kdecl::retrieval::StoreError),
}

/// What a successful command found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Findings,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Clean => EXIT_OK,
            Outcome::Findings => EXIT_FINDINGS,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kdecl", version, about = "Concept-graph program tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Replay,
    Live,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VizFormat {
    Dot,
    Json,
}

/// Overrides applied on top of a script's pipeline configuration.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunOptions {
    /// Refinement rounds before giving up.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Samples drawn per generation call.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Demonstration store used for retrieval; none means no demonstrations.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check programs and report diagnostics.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print the validation report as JSON.
        #[arg(long)]
        json: bool,
        /// Also write one JSON record per diagnostic to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compile a file of formulas against a program's graph.
    CompileFol {
        file: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Score candidate programs against gold programs paired by file name.
    Eval {
        candidates: PathBuf,
        gold: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a session script against scripted responses and save the transcript.
    Record {
        #[arg(long)]
        script: PathBuf,
        /// JSON object mapping template ids to response lists.
        #[arg(long)]
        responses: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        options: RunOptions,
    },
    /// Run a session script against a backend and write the session archive.
    Replay {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "replay")]
        backend: BackendKind,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        options: RunOptions,
    },
    /// Render a program's graph as DOT or layout JSON.
    Viz {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: VizFormat,
    },
    /// Embed a demonstration corpus into a store file.
    Embed {
        demos: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = kdecl::retrieval::DEFAULT_DIMENSION)]
        dimension: usize,
    },
}

/// Runs `cli`, writing results to `out` and problems to `err`; returns the
/// process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Lint { files, json, report } => cmd_lint(files, *json, report.as_deref(), out),
        Command::CompileFol { file, graph, json } => cmd_compile_fol(file, graph, *json, out),
        Command::Eval { candidates, gold, json } => cmd_eval(candidates, gold, *json, out),
        Command::Record {
            script,
            responses,
            out: path,
            options,
        } => cmd_record(script, responses, path, options, out),
        Command::Replay {
            script,
            transcript,
            backend,
            out: path,
            options,
        } => cmd_replay(script, transcript.as_deref(), *backend, path, options, out),
        Command::Viz { file, format } => cmd_viz(file, *format, out),
        Command::Embed { demos, out: path, dimension } => cmd_embed(demos, path, *dimension, out),
    };
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}
