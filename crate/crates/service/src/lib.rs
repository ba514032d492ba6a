//! HTTP service for the expert survey and the interaction results.

pub mod app;
pub mod config;
pub mod error;
pub mod http;
pub mod store;

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use thiserror::Error;

pub use app::App;
pub use config::{AdminSeed, ConfigInvalid, ServiceConfig};
pub use error::ApiError;
pub use http::{router, Shared};
pub use store::{FileRepository, MemoryRepository, Repository, StoreSnapshot};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    ConfigInvalid(#[from] ConfigInvalid),
    #[error("store unavailable: {0}")]
    StoreUnavailable(String),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Opens the configured store and builds the shared state.
pub fn open_state(config: ServiceConfig) -> Result<Shared, ServeError> {
    config.validate()?;
    let repo: Box<dyn Repository + Sync> = match &config.store_path {
        Some(path) => Box::new(FileRepository::new(path)),
        None => Box::new(MemoryRepository::default()),
    };
    let app = App::open(config, repo).map_err(|e| ServeError::StoreUnavailable(e.message))?;
    Ok(Arc::new(Mutex::new(app)))
}

pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let state = open_state(config)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}
