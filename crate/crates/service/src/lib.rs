//! HTTP+JSON API for the translation center.
//!
//! Build a router with [`router`] over an [`AppState`], or run the whole
//! server with [`serve`].

use std::io::Write;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post, put};
use axum::Router;
use tcenter_core::config::Config;
use tcenter_core::persist::Db;
use tokio::net::TcpListener;

pub mod api;
pub mod auth;
mod docs;
pub mod error;
pub mod session;

pub use error::{ApiError, ApiResult};
pub use session::Sessions;

#[derive(Clone)]
pub struct AppState {
    pub db: Arc<Db>,
    pub sessions: Arc<Sessions>,
    pub config: Arc<Config>,
}

impl AppState {
    pub fn new(db: Arc<Db>, config: Config) -> Self {
        AppState {
            db,
            sessions: Arc::new(Sessions::new(config.session_ttl_secs)),
            config: Arc::new(config),
        }
    }
}

pub fn router(state: AppState) -> Router {
    use api::*;
    Router::new()
        .route("/api/languages", get(languages))
        .route("/api/progress", get(all_progress))
        .route("/api/progress/{lang}", get(progress))
        .route("/api/items", get(list_items))
        .route("/api/items/{id}", get(get_item))
        .route("/api/items/{id}/context", get(item_context))
        .route("/api/items/{id}/view", post(record_view))
        .route("/api/items/{id}/translations", get(translations).post(submit_translation))
        .route("/api/items/{id}/comments", get(comments).post(add_comment))
        .route("/api/pages/{id}/preview", get(page_preview))
        .route("/api/requests", post(request_translation))
        .route("/api/binder", get(binder))
        .route("/api/translations/{tid}", get(get_translation))
        .route("/api/translations/{tid}/reviews", get(reviews).post(submit_review))
        .route("/api/quality/{item}/{lang}", get(quality))
        .route("/api/glossary", get(glossary).post(glossary_upsert))
        .route("/api/glossary/{term}/comments", post(glossary_comment))
        .route("/api/glossary/{term}/poll", put(glossary_link_poll))
        .route("/api/forums", get(forums).post(new_thread))
        .route("/api/forums/{thread}/posts", get(thread_posts).post(add_post))
        .route("/api/polls", get(polls).post(create_poll))
        .route("/api/polls/{id}", get(get_poll))
        .route("/api/polls/{id}/votes", post(vote))
        .route("/api/polls/{id}/close", post(close_poll))
        .route("/api/directory", get(directory))
        .route("/api/members", post(register))
        .route("/api/members/me", get(me).put(update_me))
        .route("/api/sessions", post(login))
        .route("/api/random", get(random_item))
        .route("/api/export/{lang}", get(export))
        .route("/api/import", post(import))
        .route("/docs/tutorial", get(docs::tutorial))
        .route("/docs/faq", get(docs::faq))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Store(#[from] tcenter_core::Error),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

impl ServeError {
    /// True for failures of the environment rather than of the input.
    pub fn is_io(&self) -> bool {
        match self {
            ServeError::Store(e) => e.is_io(),
            _ => true,
        }
    }
}

/// Opens the data directory, binds the configured address and serves until
/// interrupted. Prints `listening on <addr>` to stdout once ready.
pub async fn serve(config: Config) -> Result<(), ServeError> {
    let db = Arc::new(Db::open(&config.data_dir, config.settings())?);
    let listener = TcpListener::bind(&config.listen).await.map_err(|source| ServeError::Bind {
        addr: config.listen.clone(),
        source,
    })?;
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, data_dir = %config.data_dir.display(), "server started");
    {
        let mut out = std::io::stdout().lock();
        writeln!(out, "listening on {addr}")?;
        out.flush()?;
    }
    let app = router(AppState::new(db.clone(), config));
    axum::serve(listener, app).with_graceful_shutdown(shutdown_signal()).await?;
    db.flush()?;
    tracing::info!("server stopped");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
