//! HTTP service for crowdsourced segment collection.
//!
//! State is an event-sourced fold ([`state`]) over an append-only log
//! ([`store`]). [`Service`] validates requests and commits events through a
//! single writer; [`api::router`] exposes it over REST.

pub mod api;
pub mod config;
pub mod service;
pub mod state;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

pub use config::{ConfigError, Role, ServiceConfig};
pub use service::{ApiError, Principal, Service, StartupError};
pub use state::{Event, EventBody, ExportOptions, ExportRecord, PairStats, State, StoredSegment};
pub use store::{read_log, replay, Store, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Startup(#[from] StartupError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Server(#[source] std::io::Error),
}

/// Recovers the store and serves until Ctrl-C. `on_ready` receives the bound address.
pub async fn serve(config: ServiceConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), ServeError> {
    let addr = config.listen.clone();
    let service = Arc::new(Service::open(config)?);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServeError::Bind { addr: addr.clone(), source })?;
    on_ready(listener.local_addr().map_err(ServeError::Server)?);
    axum::serve(listener, api::router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(ServeError::Server)
}
