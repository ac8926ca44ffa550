//! HTTP facade over phasefold datasets.
//!
//! Uploads are folded in the background into a period grid; once a dataset
//! reports `ready`, the window and ticks endpoints read from that grid.
//! Suggestions, detail matrices and phase assignments are computed per request.

pub mod api;
mod error;
mod state;

use axum::extract::DefaultBodyLimit;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
pub use state::{AppState, ServiceConfig};

/// Upload size limit in bytes.
pub const MAX_UPLOAD_BYTES: usize = 256 * 1024 * 1024;

pub fn router(state: AppState) -> Router {
    let cors = match &state.config().allowed_origin {
        Some(origin) => CorsLayer::new()
            .allow_origin(origin.clone())
            .allow_methods(Any)
            .allow_headers(Any),
        None => CorsLayer::permissive(),
    };
    Router::new()
        .route("/datasets", get(api::list_datasets).post(api::upload))
        .route("/datasets/{id}", get(api::get_dataset))
        .route("/datasets/{id}/window", get(api::window))
        .route("/datasets/{id}/suggestions", get(api::suggestions))
        .route("/datasets/{id}/detail", get(api::detail))
        .route("/datasets/{id}/phases", get(api::phases))
        .route("/datasets/{id}/ticks", get(api::ticks))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .layer(cors)
        .with_state(state)
}

/// Serves the API on `listener` until the task is cancelled.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
