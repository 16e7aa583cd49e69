//! Session-oriented HTTP and WebSocket service: create learners, step episodes, set scenes,
//! give instructions, run HME proposals and stream every event.

pub mod api;
pub mod session;
pub mod ws;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;

pub use session::{Event, GraphView, Session, Sessions, StateView};

pub const DEFAULT_PORT: u16 = 8080;
pub const PORT_ENV: &str = "TAA_PORT";

#[derive(Clone, Default)]
pub struct AppState {
    pub sessions: Arc<Sessions>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", axum::routing::delete(api::delete_session))
        .route("/sessions/{id}/state", get(api::get_state))
        .route("/sessions/{id}/graph", get(api::get_graph))
        .route("/sessions/{id}/episodes", post(api::post_episodes))
        .route("/sessions/{id}/scene", post(api::post_scene))
        .route("/sessions/{id}/instruction", post(api::post_instruction))
        .route("/sessions/{id}/hme/propose", post(api::post_propose))
        .route("/sessions/{id}/events", get(ws::events))
        .with_state(state)
}

/// `--port` wins over `TAA_PORT`, which wins over the default.
pub fn resolve_port(flag: Option<u16>, env: Option<&str>) -> Result<u16, String> {
    match (flag, env) {
        (Some(p), _) => Ok(p),
        (None, Some(v)) => v.trim().parse().map_err(|_| format!("{PORT_ENV}={v} is not a port number")),
        (None, None) => Ok(DEFAULT_PORT),
    }
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::default())).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn port_precedence() {
        assert_eq!(resolve_port(Some(9000), Some("7000")), Ok(9000));
        assert_eq!(resolve_port(None, Some("7000")), Ok(7000));
        assert_eq!(resolve_port(None, None), Ok(DEFAULT_PORT));
        assert!(resolve_port(None, Some("nope")).is_err());
    }
}
