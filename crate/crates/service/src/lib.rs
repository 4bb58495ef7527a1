//! HTTP API over a fixed vector space and a directory of categories.
//!
//! | Route | |
//! |---|---|
//! | `POST /analyze` | category counts and byte spans for a text |
//! | `POST /categories/generate` | expand seeds into a stored category |
//! | `GET /categories`, `GET /categories/{name}` | stored categories |
//! | `POST /crowd/export/{name}` | labeling tasks as CSV |
//! | `POST /crowd/import/{name}` | worker labels as CSV; filters the category |
//!
//! Errors are JSON [`ApiError`] bodies.

mod error;
pub mod routes;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use thiserror::Error;

use seedlex_core::embedding::{load_embeddings, EmbeddingError};
use seedlex_core::vsm::{VectorSpace, VsmError};

pub use error::ApiError;
pub use store::CategoryStore;

pub const PORT_ENV: &str = "SEEDLEX_PORT";
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_TEXT_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("loading embeddings: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("building vector space: {0}")]
    Space(#[from] VsmError),
    #[error("{PORT_ENV}={0:?} is not a port number")]
    InvalidPort(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone)]
pub struct ServiceState {
    pub space: Arc<VectorSpace>,
    pub store: Arc<CategoryStore>,
    pub max_text_bytes: usize,
}

impl ServiceState {
    pub fn new(space: VectorSpace, store: CategoryStore) -> Self {
        ServiceState { space: Arc::new(space), store: Arc::new(store), max_text_bytes: DEFAULT_MAX_TEXT_BYTES }
    }
}

pub fn router(state: ServiceState) -> Router {
    // JSON escaping can grow a text up to six-fold; the text length itself is
    // checked against the limit in the handler.
    let body_limit = state.max_text_bytes.saturating_mul(6).saturating_add(64 * 1024);
    Router::new()
        .route("/analyze", post(routes::analyze_text))
        .route("/categories", get(routes::list_categories))
        .route("/categories/generate", post(routes::generate_category))
        .route("/categories/{name}", get(routes::get_category))
        .route("/crowd/export/{name}", post(routes::export_category))
        .route("/crowd/import/{name}", post(routes::import_labels))
        .fallback(routes::not_found)
        .method_not_allowed_fallback(routes::method_not_allowed)
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub embeddings: PathBuf,
    pub categories: PathBuf,
    pub host: String,
    pub port: u16,
    pub max_text_bytes: usize,
}

impl ServiceConfig {
    /// The configured port unless `SEEDLEX_PORT` is set.
    pub fn effective_port(&self) -> Result<u16, ServiceError> {
        match std::env::var(PORT_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| ServiceError::InvalidPort(v)),
            Err(_) => Ok(self.port),
        }
    }
}

pub fn load_state(config: &ServiceConfig) -> Result<ServiceState, ServiceError> {
    let space = VectorSpace::new(load_embeddings(&config.embeddings)?)?;
    let store = CategoryStore::open(&config.categories)?;
    let mut state = ServiceState::new(space, store);
    state.max_text_bytes = config.max_text_bytes;
    Ok(state)
}

/// Serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = load_state(&config)?;
    let addr: SocketAddr = format!("{}:{}", config.host, config.effective_port()?)
        .parse()
        .map_err(|_| ServiceError::InvalidPort(format!("{}:{}", config.host, config.port)))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
