//! Routes: `/` (rendered page), `/client/*` (embedded client assets),
//! `/ws` (binary protocol) and static files from the presentation directory.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{ConnectInfo, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use cobra_core::slidedoc::{render_page, Deck};
use futures::{SinkExt, StreamExt};
use percent_encoding::percent_decode_str;
use tracing::debug;

use crate::engine::{Engine, Outbound};
use crate::hub::{codes, Role};
use crate::wire::{decode, encode, WireMessage};

#[derive(Clone)]
pub struct AppState {
    pub engine: Engine,
    pub deck: Arc<Deck>,
    pub root: Arc<PathBuf>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/client/*path", get(client_asset))
        .route("/ws", get(ws_upgrade))
        .fallback(get(static_file))
        .with_state(state)
}

async fn index(State(s): State<AppState>) -> Html<String> {
    let (settings, variants) = s
        .engine
        .with_hub(|h| (h.settings().clone(), h.fragment_variants()));
    Html(render_page(&s.deck, &settings, &variants))
}

static ASSETS: &[(&str, &str)] = &[
    ("cobra.js", include_str!("../assets/cobra.js")),
    ("cobra.css", include_str!("../assets/cobra.css")),
    ("theme/white.css", include_str!("../assets/theme/white.css")),
    ("theme/black.css", include_str!("../assets/theme/black.css")),
    (
        "code/default.css",
        include_str!("../assets/code/default.css"),
    ),
    ("code/dark.css", include_str!("../assets/code/dark.css")),
];

pub fn client_asset_names() -> impl Iterator<Item = &'static str> {
    ASSETS.iter().map(|(name, _)| *name)
}

async fn client_asset(axum::extract::Path(path): axum::extract::Path<String>) -> Response {
    match ASSETS.iter().find(|(name, _)| *name == path) {
        Some((name, body)) => {
            let mime = mime_guess::from_path(name).first_or_octet_stream();
            ([(header::CONTENT_TYPE, mime.as_ref().to_owned())], *body).into_response()
        }
        None => StatusCode::NOT_FOUND.into_response(),
    }
}

/// Maps a request path to a file below `root`, or `None` if it would leave
/// the directory or does not name a regular file.
pub fn resolve_static(root: &Path, request_path: &str) -> Option<PathBuf> {
    let decoded = percent_decode_str(request_path).decode_utf8().ok()?;
    let relative = decoded.trim_start_matches('/');
    if relative.is_empty()
        || relative.contains('\\')
        || relative.contains('\0')
        || relative.split('/').any(|seg| seg == "..")
        || Path::new(relative).is_absolute()
    {
        return None;
    }
    let root = root.canonicalize().ok()?;
    let candidate = root.join(relative).canonicalize().ok()?;
    (candidate.starts_with(&root) && candidate.is_file()).then_some(candidate)
}

async fn static_file(State(s): State<AppState>, uri: Uri) -> Response {
    let Some(path) = resolve_static(&s.root, uri.path()) else {
        return StatusCode::NOT_FOUND.into_response();
    };
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let mime = mime_guess::from_path(&path).first_or_octet_stream();
            (
                [(header::CONTENT_TYPE, mime.as_ref().to_owned())],
                Body::from(bytes),
            )
                .into_response()
        }
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

async fn ws_upgrade(
    ws: WebSocketUpgrade,
    ConnectInfo(peer): ConnectInfo<SocketAddr>,
    State(s): State<AppState>,
) -> Response {
    let role = if peer.ip().is_loopback() {
        Role::Presenter
    } else {
        Role::Viewer
    };
    ws.on_upgrade(move |socket| session(socket, s.engine, role))
}

async fn session(socket: WebSocket, engine: Engine, role: Role) {
    let (mut sink, mut stream) = socket.split();
    let (id, mut outbox) = engine.connect(role);
    debug!(client = id.0, ?role, "session opened");
    let writer = tokio::spawn(async move {
        while let Some(out) = outbox.recv().await {
            match out {
                Outbound::Message(msg) => {
                    if sink.send(Message::Binary(encode(&msg))).await.is_err() {
                        break;
                    }
                }
                Outbound::Close => {
                    let _ = sink.send(Message::Close(None)).await;
                    break;
                }
            }
        }
    });
    while let Some(Ok(frame)) = stream.next().await {
        match frame {
            Message::Binary(bytes) => match decode(&bytes) {
                Ok(msg) => engine.handle(id, msg),
                Err(e) => engine.reply(id, WireMessage::error(codes::DECODE_ERROR, e.to_string())),
            },
            Message::Text(_) => engine.reply(
                id,
                WireMessage::error(codes::BAD_REQUEST, "the protocol uses binary frames"),
            ),
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => {}
        }
        if writer.is_finished() {
            break;
        }
    }
    engine.disconnect(id);
    let _ = writer.await;
    debug!(client = id.0, "session closed");
}
