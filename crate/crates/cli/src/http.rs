//! The HTTP service.
//!
//! Every handler runs its computation on the blocking pool; requests share
//! nothing but the immutable preset store.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::{Body, Bytes};
use axum::extract::Path;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use tokio::sync::mpsc;
use tokio_stream::wrappers::UnboundedReceiverStream;
use tokio_stream::StreamExt;
use tower_http::services::ServeDir;

use crate::api::{execute_streaming, handle_request, preflight, Reply, Request, SweepLine};

fn respond(reply: Reply) -> Response {
    let status = StatusCode::from_u16(reply.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, reply.content_type)], reply.body).into_response()
}

async fn blocking(method: &'static str, path: String, body: Bytes) -> Response {
    let reply = tokio::task::spawn_blocking(move || handle_request(method, &path, &body)).await;
    match reply {
        Ok(r) => respond(r),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, format!("request panicked: {e}")).into_response(),
    }
}

async fn healthz() -> Response {
    respond(handle_request("GET", "/healthz", b""))
}

async fn presets() -> Response {
    blocking("GET", "/api/presets".into(), Bytes::new()).await
}

async fn compute(Path(route): Path<String>, body: Bytes) -> Response {
    blocking("POST", format!("/api/{route}"), body).await
}

/// Streams one JSON line per finished level, then the final envelope.
///
/// Input errors are reported before streaming starts, with the usual status code.
async fn sweep(body: Bytes) -> Response {
    let req = match Request::parse("sweep", &body) {
        Ok(r) => r,
        Err(_) => return blocking("POST", "/api/sweep".into(), body).await,
    };
    if let Some(env) = preflight(&req) {
        return respond(Reply::json(&env));
    }
    let (tx, rx) = mpsc::unbounded_channel::<String>();
    tokio::task::spawn_blocking(move || {
        let env = execute_streaming(&req, &|line: SweepLine| {
            let _ = tx.send(serde_json::to_string(&line).expect("lines serialize") + "\n");
        });
        let _ = tx.send(serde_json::to_string(&env).expect("envelopes serialize") + "\n");
    });
    let stream = UnboundedReceiverStream::new(rx).map(|l| Ok::<_, Infallible>(Bytes::from(l)));
    (StatusCode::OK, [(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(stream)).into_response()
}

async fn not_found(method: Method, uri: Uri) -> Response {
    respond(handle_request(method.as_str(), uri.path(), b""))
}

pub fn router(static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/presets", get(presets))
        .route("/api/sweep", post(sweep))
        .route("/api/{route}", post(compute));
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

pub async fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
