use std::fs;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use kdecl::llm::backend_from_env;
use kdecl::pipeline::PipelineConfig;
use kdecl::retrieval::{DemoStore, Embedder, NgramEmbedder, DEFAULT_DIMENSION};
use kdecl_server::{router, AppState};

/// Serves the session API. The model backend comes from `KDECL_BACKEND`
/// and friends; `KDECL_TOKEN` enables bearer authentication.
#[derive(Parser)]
#[command(name = "kdecl-server", version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Demonstration store (JSONL) used for retrieval.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Directory sessions are saved to and reloaded from.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Pipeline configuration (JSON); defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load(args: &Args) -> Result<AppState, String> {
    let backend = backend_from_env().map_err(|e| e.to_string())?;
    let store = match &args.store {
        None => DemoStore::new(DEFAULT_DIMENSION, NgramEmbedder::new(DEFAULT_DIMENSION).id()),
        Some(p) => {
            let file = fs::File::open(p).map_err(|e| format!("{}: {e}", p.display()))?;
            DemoStore::read_from(BufReader::new(file)).map_err(|e| format!("{}: {e}", p.display()))?
        }
    };
    let config: PipelineConfig = match &args.config {
        None => PipelineConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
    };
    let token = std::env::var("KDECL_TOKEN").ok().filter(|t| !t.is_empty());
    AppState::new(backend, store, config, args.data_dir.clone(), token).map_err(|e| e.to_string())
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let state = match load(&args) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(args.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", args.addr);
            return ExitCode::from(2);
        }
    };
    eprintln!("listening on {}", args.addr);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
