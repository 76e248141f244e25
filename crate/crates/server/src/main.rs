use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use a4f_server::{open_repository, serve, AppState, ServiceConfig};
use clap::Parser;

#[derive(Parser)]
#[command(name = "a4f-server", version, about = "Model sharing and challenge grading service")]
struct Args {
    #[arg(long, env = "A4F_PORT", default_value_t = 8080)]
    port: u16,
    /// Store file; kept in memory when absent.
    #[arg(long, env = "A4F_STORE")]
    store: Option<PathBuf>,
    #[arg(long, env = "A4F_TIMEOUT_MS", default_value_t = 10_000)]
    timeout_ms: u64,
    #[arg(long, env = "A4F_MAX_SCOPE", default_value_t = 8)]
    max_scope: u32,
    #[arg(long, default_value_t = 65_536)]
    max_code_bytes: usize,
    /// Allowed CORS origins (comma separated); any origin when empty.
    #[arg(long, env = "A4F_CORS_ORIGINS", value_delimiter = ',')]
    cors_origin: Vec<String>,
    #[arg(long, default_value_t = 30)]
    executes_per_minute: u32,
    /// Concurrent solves; defaults to the CPU count.
    #[arg(long)]
    solver_slots: Option<usize>,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    let defaults = ServiceConfig::default();
    let config = ServiceConfig {
        port: args.port,
        store_path: args.store,
        solve_timeout_ms: args.timeout_ms,
        max_scope: args.max_scope,
        max_code_bytes: args.max_code_bytes,
        cors_allowed_origins: args.cors_origin,
        executes_per_minute: args.executes_per_minute,
        solver_slots: args.solver_slots.unwrap_or(defaults.solver_slots),
        queue_timeout: Duration::from_secs(30),
    };
    if let Err(e) = config.validate() {
        eprintln!("a4f-server: {e}");
        return ExitCode::from(2);
    }
    let repo = match open_repository(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("a4f-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("a4f-server: cannot bind port {}: {e}", config.port);
            return ExitCode::FAILURE;
        }
    };
    tracing::info!(port = config.port, store = ?config.store_path, "listening");
    match serve(listener, AppState::new(repo, config)).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("a4f-server: {e}");
            ExitCode::FAILURE
        }
    }
}
