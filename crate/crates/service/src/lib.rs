//! Local HTTP API over the simulator, the simulated device and experiment sessions.

pub mod error;
pub mod lab;
mod routes;
pub mod state;

use std::net::SocketAddr;

use axum::Router;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use state::{AppState, ServiceConfig};

/// The full application: JSON API plus optional static console assets.
pub fn router(state: AppState) -> Router {
    let app = routes::api();
    let app = match &state.config().assets_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    };
    app.with_state(state)
}

/// Refuses non-loopback addresses unless external binding was requested.
pub fn check_bind_address(addr: &SocketAddr, allow_external: bool) -> Result<(), String> {
    if addr.ip().is_loopback() || allow_external {
        Ok(())
    } else {
        Err(format!("refusing to bind {addr}: the device API is loopback-only unless external binding is allowed"))
    }
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
