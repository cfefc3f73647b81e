use std::path::Path;

use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;

use crate::AppState;

const TUTORIAL: &str = include_str!("../../../docs/tutorial.md");
const FAQ: &str = include_str!("../../../docs/faq.md");

const MARKDOWN: &str = "text/markdown; charset=utf-8";

/// Serves `name.md` from the configured docs directory, falling back to the
/// copy compiled into the binary when the file is missing.
fn page(dir: &Path, name: &str, builtin: &'static str) -> impl IntoResponse {
    let body = std::fs::read_to_string(dir.join(format!("{name}.md"))).unwrap_or_else(|_| builtin.to_owned());
    ([(header::CONTENT_TYPE, MARKDOWN)], body)
}

pub async fn tutorial(State(app): State<AppState>) -> impl IntoResponse {
    page(&app.config.docs_dir, "tutorial", TUTORIAL)
}

pub async fn faq(State(app): State<AppState>) -> impl IntoResponse {
    page(&app.config.docs_dir, "faq", FAQ)
}
