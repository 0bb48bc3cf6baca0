//! HTTP service: submit documents for detection, review the spans, and
//! anonymize with document- or corpus-scoped placeholders.

pub mod api;
pub mod config;
pub mod error;
pub mod persist;
pub mod state;

use std::sync::Arc;

use deid_core::detect::Detector;

pub use api::{router, AppState};
pub use config::ServiceConfig;
pub use error::ApiError;
pub use state::{Decision, DocumentRecord, ReviewRequest, Status};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Persist(#[from] persist::PersistError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binds and serves until ctrl-c.
pub async fn serve(config: ServiceConfig, detector: Arc<dyn Detector>) -> Result<(), ServeError> {
    config.check_bind().map_err(ServeError::Config)?;
    let bind = config.bind;
    let state = AppState::open(config, detector)?;
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
