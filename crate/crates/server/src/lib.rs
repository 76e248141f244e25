//! HTTP service: share models and instances, execute commands through
//! public or private links, and download derivation trees.

pub mod app;
pub mod config;
pub mod error;
pub mod limit;

use std::net::SocketAddr;
use std::sync::Arc;

use a4f_repo::{FileStore, RepoError, Repository};

pub use app::{router, AppState, ExecuteResponse};
pub use config::{ConfigError, ServiceConfig};
pub use error::{ApiError, ErrorBody};

pub fn open_repository(config: &ServiceConfig) -> Result<Repository, RepoError> {
    match &config.store_path {
        Some(p) => Repository::open(Box::new(FileStore::open(p)?)),
        None => Ok(Repository::in_memory()),
    }
}

/// Serves `state` on `listener` until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(
        listener,
        router(state).into_make_service_with_connect_info::<SocketAddr>(),
    )
    .await
}
