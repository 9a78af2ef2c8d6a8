//! REST control plane for per-port RTT histograms.
//!
//! Wraps the measurement pipeline behind a resource-per-port HTTP API and a
//! background loop that keeps aggregated statistics fresh: every poll reads
//! the table counters, sums them by bin, derives mean/stddev/percentiles and
//! atomically publishes the document `GET /api/histogram/{port}` serves.

pub mod api;
pub mod config;
pub mod error;
pub mod state;

use std::sync::Arc;
use std::time::Duration;

pub use api::router;
pub use config::{ConfigError, ServiceConfig};
pub use error::{ApiError, ErrorBody};
pub use state::{AppState, ConfigureResponse, PortInfo, PortsResponse};

/// Background polling loop: sweeps all ports every `interval`, forever.
pub async fn poll_loop(state: Arc<AppState>, interval: Duration) {
    let mut ticker = tokio::time::interval(interval);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        ticker.tick().await;
        state.poll_once();
    }
}

/// Binds the listener, starts the poll loop and serves the API until the
/// process ends.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error>> {
    config.validate()?;
    let state = Arc::new(AppState::new(config.ports.iter().copied(), config.capacity));
    serve_with_state(config, state).await
}

/// Like [`serve`], but on externally constructed state so a caller can keep
/// a handle for driving traffic in-process.
pub async fn serve_with_state(
    config: ServiceConfig,
    state: Arc<AppState>,
) -> Result<(), Box<dyn std::error::Error>> {
    config.validate()?;
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    tracing::info!(listen = %listener.local_addr()?, "control service up");
    tokio::spawn(poll_loop(Arc::clone(&state), config.poll_interval()));
    axum::serve(listener, router(state)).await?;
    Ok(())
}
