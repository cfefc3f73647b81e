//! Route handlers. Every mutation goes through [`Db::write`], which persists
//! before the handler answers, so a 2xx response means the change is durable.
//!
//! [`Db::write`]: tcenter_core::persist::Db::write

use std::collections::BTreeMap;

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Path, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tcenter_core::catalog::{Item, ItemStatus, ListFilter, ListOrder};
use tcenter_core::community::{
    ForumKind, ForumPost, ForumThread, GlossaryEntry, Member, MemberUpdate, NewThread, Poll, PollState, PostTarget,
};
use tcenter_core::exchange::Document;
use tcenter_core::review::{RawRubric, Review, RubricScores};
use tcenter_core::store::Translation;
use tcenter_core::workflow::RequestTarget;
use tcenter_core::{Lang, MemberId};

use crate::auth::{Admin, Auth};
use crate::error::{ApiError, ApiResult};
use crate::session::{digest, random_token};
use crate::AppState;

/// JSON body extractor whose rejections use the error envelope.
#[derive(FromRequest)]
#[from_request(via(Json), rejection(ApiError))]
pub struct Body<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct Query<T>(pub T);

#[derive(Deserialize)]
pub struct LangQuery {
    lang: String,
}

#[derive(Deserialize)]
pub struct OptLangQuery {
    lang: Option<String>,
}

// Languages and progress

pub async fn languages(State(app): State<AppState>) -> impl IntoResponse {
    Json(app.db.read(|c| c.languages().cloned().collect::<Vec<_>>()))
}

pub async fn all_progress(State(app): State<AppState>) -> impl IntoResponse {
    Json(app.db.read(|c| c.languages().map(|l| c.progress(l.code.as_str())).collect::<Vec<_>>()))
}

pub async fn progress(State(app): State<AppState>, Path(lang): Path<String>) -> ApiResult<impl IntoResponse> {
    let p = app.db.read(|c| c.require_lang(&lang).map(|_| c.progress(&lang)))?;
    Ok(Json(p))
}

// Items

#[derive(Deserialize)]
pub struct ItemsQuery {
    lang: String,
    #[serde(default)]
    filter: ListFilter,
    #[serde(default)]
    order: ListOrder,
}

#[derive(Serialize)]
pub struct ItemView {
    #[serde(flatten)]
    item: Item,
    status: ItemStatus,
    priority: f64,
    request_count: u32,
}

pub async fn list_items(State(app): State<AppState>, Query(q): Query<ItemsQuery>) -> ApiResult<impl IntoResponse> {
    let items = app.db.read(|c| {
        c.list_items(&q.lang, q.filter, q.order).map(|listings| {
            listings
                .into_iter()
                .map(|l| ItemView {
                    request_count: c.request_count(l.item.id.as_str(), &q.lang),
                    item: l.item,
                    status: l.status,
                    priority: l.priority,
                })
                .collect::<Vec<_>>()
        })
    })?;
    Ok(Json(items))
}

pub async fn get_item(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.db.read(|c| c.item(&id).cloned())?))
}

pub async fn item_context(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<LangQuery>,
) -> ApiResult<impl IntoResponse> {
    let snippet = app.db.read(|c| c.context_snippet(&id, &q.lang))?;
    Ok(Json(json!({ "item_id": id, "lang": q.lang, "snippet": snippet })))
}

pub async fn record_view(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let count = app.db.write(|c| c.record_view(&id))?;
    Ok(Json(json!({ "item_id": id, "view_count": count })))
}

#[derive(Deserialize)]
pub struct PreviewQuery {
    lang: String,
    highlight: Option<String>,
}

pub async fn page_preview(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PreviewQuery>,
) -> ApiResult<impl IntoResponse> {
    let preview = app.db.read(|c| c.page_preview(&id, &q.lang, q.highlight.as_deref()))?;
    Ok(Json(json!({ "page_id": id, "lang": q.lang, "preview": preview })))
}

// Translations and comments

#[derive(Serialize)]
pub struct TranslationsView {
    current: Option<Translation>,
    history: Vec<Translation>,
}

pub async fn translations(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<LangQuery>,
) -> ApiResult<impl IntoResponse> {
    let view = app.db.read(|c| {
        c.require_lang(&q.lang)?;
        let history = c.translation_history(&id, &q.lang)?.to_vec();
        let current = c.current_translation(&id, &q.lang)?.cloned();
        Ok::<_, tcenter_core::Error>(TranslationsView { current, history })
    })?;
    Ok(Json(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitTranslation {
    lang: String,
    text: String,
    base_version: Option<u32>,
}

pub async fn submit_translation(
    State(app): State<AppState>,
    auth: Auth,
    Path(id): Path<String>,
    Body(body): Body<SubmitTranslation>,
) -> ApiResult<impl IntoResponse> {
    let t = app.db.write(|c| {
        c.submit_translation(&id, &body.lang, &body.text, auth.member_id.as_str(), body.base_version)
    })?;
    Ok((StatusCode::CREATED, Json(t)))
}

pub async fn get_translation(State(app): State<AppState>, Path(tid): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.db.read(|c| c.translation(&tid).cloned())?))
}

pub async fn comments(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<LangQuery>,
) -> ApiResult<impl IntoResponse> {
    let list = app.db.read(|c| {
        c.require_lang(&q.lang)?;
        c.comments(&id, &q.lang).map(<[_]>::to_vec)
    })?;
    Ok(Json(list))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewComment {
    lang: Option<String>,
    body: String,
    parent_id: Option<String>,
}

pub async fn add_comment(
    State(app): State<AppState>,
    auth: Auth,
    Path(id): Path<String>,
    Query(q): Query<OptLangQuery>,
    Body(body): Body<NewComment>,
) -> ApiResult<impl IntoResponse> {
    let lang = body
        .lang
        .or(q.lang)
        .ok_or_else(|| ApiError::validation("lang is required"))?;
    let comment = app.db.write(|c| {
        c.add_comment(&id, &lang, auth.member_id.as_str(), &body.body, body.parent_id.as_deref())
    })?;
    Ok((StatusCode::CREATED, Json(comment)))
}

// Requests and binder

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewRequest {
    item_id: Option<String>,
    page_id: Option<String>,
    lang: String,
}

pub async fn request_translation(
    State(app): State<AppState>,
    auth: Auth,
    Body(body): Body<NewRequest>,
) -> ApiResult<impl IntoResponse> {
    let target = match (body.item_id, body.page_id) {
        (Some(item), None) => RequestTarget::Item(item.into()),
        (None, Some(page)) => RequestTarget::Page(page.into()),
        _ => return Err(ApiError::validation("give exactly one of item_id and page_id")),
    };
    let outcome = app
        .db
        .write(|c| c.request_translation(target, &body.lang, auth.member_id.as_str()))?;
    let status = if outcome.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(outcome)))
}

pub async fn binder(State(app): State<AppState>, auth: Auth) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.db.write(|c| c.binder_of(auth.member_id.as_str()))?))
}

// Reviews and quality

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewReview {
    rubric: RawRubric,
    body: Option<String>,
}

pub async fn submit_review(
    State(app): State<AppState>,
    auth: Auth,
    Path(tid): Path<String>,
    Body(body): Body<NewReview>,
) -> ApiResult<impl IntoResponse> {
    let rubric = RubricScores::try_from(body.rubric)?;
    let review = app
        .db
        .write(|c| c.submit_review(&tid, auth.member_id.as_str(), rubric, body.body.as_deref()))?;
    Ok((StatusCode::CREATED, Json(review)))
}

pub async fn reviews(State(app): State<AppState>, Path(tid): Path<String>) -> ApiResult<impl IntoResponse> {
    let list: Vec<Review> = app
        .db
        .read(|c| c.reviews_of(&tid).map(|r| r.into_iter().cloned().collect()))?;
    Ok(Json(list))
}

pub async fn quality(
    State(app): State<AppState>,
    Path((item, lang)): Path<(String, String)>,
) -> ApiResult<impl IntoResponse> {
    let q = app.db.read(|c| {
        c.item(&item)?;
        c.require_lang(&lang)?;
        Ok::<_, tcenter_core::Error>(c.quality(&item, &lang))
    })?;
    Ok(Json(json!({ "item_id": item, "lang": lang, "quality": q })))
}

// Glossary

#[derive(Deserialize)]
pub struct TermQuery {
    term: Option<String>,
}

pub async fn glossary(State(app): State<AppState>, Query(q): Query<TermQuery>) -> ApiResult<impl IntoResponse> {
    let entries: Vec<GlossaryEntry> = app.db.read(|c| match &q.term {
        Some(term) => c
            .glossary_lookup(term)
            .cloned()
            .map(|e| vec![e])
            .ok_or_else(|| ApiError::not_found(format!("glossary term not found: {term}"))),
        None => Ok(c.glossary().cloned().collect()),
    })?;
    Ok(Json(entries))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewTerm {
    term: String,
    #[serde(default)]
    definition: String,
    lang: String,
    text: String,
    region_note: Option<String>,
}

pub async fn glossary_upsert(
    State(app): State<AppState>,
    auth: Auth,
    Body(body): Body<NewTerm>,
) -> ApiResult<impl IntoResponse> {
    let entry = app.db.write(|c| {
        c.glossary_upsert(
            &body.term,
            &body.definition,
            &body.lang,
            &body.text,
            body.region_note.as_deref(),
            auth.member_id.as_str(),
        )
        .cloned()
    })?;
    Ok(Json(entry))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewGlossaryComment {
    body: String,
    parent_id: Option<String>,
}

pub async fn glossary_comment(
    State(app): State<AppState>,
    auth: Auth,
    Path(term): Path<String>,
    Body(body): Body<NewGlossaryComment>,
) -> ApiResult<impl IntoResponse> {
    let comment = app.db.write(|c| {
        c.glossary_comment(&term, auth.member_id.as_str(), &body.body, body.parent_id.as_deref())
    })?;
    Ok((StatusCode::CREATED, Json(comment)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPoll {
    poll_id: String,
}

pub async fn glossary_link_poll(
    State(app): State<AppState>,
    _auth: Auth,
    Path(term): Path<String>,
    Body(body): Body<LinkPoll>,
) -> ApiResult<impl IntoResponse> {
    let entry = app.db.write(|c| c.glossary_link_poll(&term, &body.poll_id).cloned())?;
    Ok(Json(entry))
}

// Forums

#[derive(Deserialize)]
pub struct ForumQuery {
    kind: Option<ForumKind>,
    lang: Option<String>,
}

pub async fn forums(State(app): State<AppState>, Query(q): Query<ForumQuery>) -> impl IntoResponse {
    let threads: Vec<ForumThread> = app.db.read(|c| {
        c.forum_threads()
            .into_iter()
            .filter(|t| q.kind.is_none_or(|k| t.kind == k))
            .filter(|t| q.lang.as_deref().is_none_or(|l| t.lang.as_ref().is_some_and(|tl| tl.as_str() == l)))
            .cloned()
            .collect()
    });
    Json(threads)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewForumThread {
    kind: ForumKind,
    lang: Option<Lang>,
    title: String,
    body: String,
}

pub async fn new_thread(
    State(app): State<AppState>,
    auth: Auth,
    Body(body): Body<NewForumThread>,
) -> ApiResult<impl IntoResponse> {
    let target = PostTarget::New(NewThread {
        kind: body.kind,
        lang: body.lang,
        title: body.title,
    });
    let (thread, post) = app.db.write(|c| {
        let post = c.forum_post(target, auth.member_id.as_str(), &body.body)?;
        let thread = c.forum_thread(&post.thread_id)?.clone();
        Ok((thread, post))
    })?;
    Ok((StatusCode::CREATED, Json(json!({ "thread": thread, "post": post }))))
}

#[derive(Serialize)]
pub struct ThreadView {
    thread: ForumThread,
    posts: Vec<ForumPost>,
}

pub async fn thread_posts(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let view = app.db.read(|c| {
        Ok::<_, tcenter_core::Error>(ThreadView {
            thread: c.forum_thread(&id)?.clone(),
            posts: c.forum_posts(&id)?.to_vec(),
        })
    })?;
    Ok(Json(view))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewPost {
    body: String,
}

pub async fn add_post(
    State(app): State<AppState>,
    auth: Auth,
    Path(id): Path<String>,
    Body(body): Body<NewPost>,
) -> ApiResult<impl IntoResponse> {
    let post = app
        .db
        .write(|c| c.forum_post(PostTarget::Existing(id.clone()), auth.member_id.as_str(), &body.body))?;
    Ok((StatusCode::CREATED, Json(post)))
}

// Polls

/// A poll as shown to members: counts, but not who voted for what.
#[derive(Serialize)]
pub struct PollView {
    poll_id: String,
    question: String,
    options: Vec<String>,
    lang: Option<Lang>,
    state: PollState,
    counts: Vec<u32>,
    voters: usize,
    created_by: MemberId,
    created_at: DateTime<Utc>,
}

impl From<&Poll> for PollView {
    fn from(p: &Poll) -> Self {
        let tally = p.tally();
        PollView {
            poll_id: p.poll_id.clone(),
            question: p.question.clone(),
            options: p.options.clone(),
            lang: p.lang.clone(),
            state: p.state,
            counts: tally.counts,
            voters: tally.voters,
            created_by: p.created_by.clone(),
            created_at: p.created_at,
        }
    }
}

pub async fn polls(State(app): State<AppState>) -> impl IntoResponse {
    Json(app.db.read(|c| c.polls().map(PollView::from).collect::<Vec<_>>()))
}

pub async fn get_poll(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.db.read(|c| c.poll(&id).map(PollView::from))?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewPoll {
    question: String,
    options: Vec<String>,
    lang: Option<String>,
}

pub async fn create_poll(
    State(app): State<AppState>,
    auth: Auth,
    Body(body): Body<NewPoll>,
) -> ApiResult<impl IntoResponse> {
    let view = app.db.write(|c| {
        c.create_poll(&body.question, &body.options, body.lang.as_deref(), auth.member_id.as_str())
            .map(PollView::from)
    })?;
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vote {
    option: usize,
}

pub async fn vote(
    State(app): State<AppState>,
    auth: Auth,
    Path(id): Path<String>,
    Body(body): Body<Vote>,
) -> ApiResult<impl IntoResponse> {
    let tally = app.db.write(|c| c.poll_vote(&id, auth.member_id.as_str(), body.option))?;
    Ok(Json(tally))
}

pub async fn close_poll(
    State(app): State<AppState>,
    _admin: Admin,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.db.write(|c| c.close_poll(&id))?))
}

// Members and sessions

pub async fn directory(State(app): State<AppState>) -> impl IntoResponse {
    Json(app.db.read(|c| c.directory_list()))
}

/// A member's own profile; never includes the secret hash.
#[derive(Serialize)]
pub struct Profile {
    member_id: MemberId,
    display_name: String,
    languages: Vec<Lang>,
    contact_opt_in: bool,
    contact_info: String,
    created_at: DateTime<Utc>,
}

impl From<&Member> for Profile {
    fn from(m: &Member) -> Self {
        Profile {
            member_id: m.member_id.clone(),
            display_name: m.display_name.clone(),
            languages: m.languages.clone(),
            contact_opt_in: m.contact_opt_in,
            contact_info: m.contact_info.clone(),
            created_at: m.created_at,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registration {
    display_name: String,
    #[serde(default)]
    languages: Vec<Lang>,
}

pub async fn register(State(app): State<AppState>, Body(body): Body<Registration>) -> ApiResult<impl IntoResponse> {
    let secret = random_token();
    let profile = app.db.write(|c| {
        c.register_member(&body.display_name, &body.languages, &digest(&secret))
            .map(Profile::from)
    })?;
    let (token, expires_at) = app.sessions.issue(&profile.member_id, Utc::now());
    Ok((
        StatusCode::CREATED,
        Json(json!({ "member": profile, "secret": secret, "token": token, "expires_at": expires_at })),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Login {
    display_name: String,
    secret: String,
}

pub async fn login(State(app): State<AppState>, Body(body): Body<Login>) -> ApiResult<impl IntoResponse> {
    let hash = digest(&body.secret);
    let member_id = app
        .db
        .read(|c| {
            c.member_by_name(&body.display_name)
                .filter(|m| m.secret_hash == hash)
                .map(|m| m.member_id.clone())
        })
        .ok_or_else(|| ApiError::auth("unknown member or wrong secret"))?;
    let (token, expires_at) = app.sessions.issue(&member_id, Utc::now());
    Ok((
        StatusCode::CREATED,
        Json(json!({ "member_id": member_id, "token": token, "expires_at": expires_at })),
    ))
}

pub async fn me(State(app): State<AppState>, auth: Auth) -> ApiResult<impl IntoResponse> {
    Ok(Json(app.db.read(|c| c.member(auth.member_id.as_str()).map(Profile::from))?))
}

pub async fn update_me(
    State(app): State<AppState>,
    auth: Auth,
    Body(update): Body<MemberUpdate>,
) -> ApiResult<impl IntoResponse> {
    let profile = app
        .db
        .write(|c| c.update_member(auth.member_id.as_str(), update).map(Profile::from))?;
    Ok(Json(profile))
}

// Random item

#[derive(Deserialize)]
pub struct RandomQuery {
    lang: String,
    seed: Option<u64>,
}

pub async fn random_item(State(app): State<AppState>, Query(q): Query<RandomQuery>) -> ApiResult<impl IntoResponse> {
    let seed = q.seed.unwrap_or_else(rand::random);
    Ok(Json(app.db.read(|c| c.next_random_item(&q.lang, seed).cloned())?))
}

// Administration

pub async fn export(
    State(app): State<AppState>,
    _admin: Admin,
    Path(lang): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let doc = app.db.read(|c| c.export_translations(&lang))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], doc.to_json()))
}

pub async fn import(State(app): State<AppState>, admin: Admin, body: Bytes) -> ApiResult<impl IntoResponse> {
    let text = std::str::from_utf8(&body).map_err(|e| ApiError::validation(format!("body is not UTF-8: {e}")))?;
    let summary: BTreeMap<&str, Value> = match Document::parse(text)? {
        Document::Catalog(doc) => {
            let s = app.db.write(|c| c.import_catalog(&doc))?;
            BTreeMap::from([
                ("kind", json!("catalog")),
                ("added", json!(s.added)),
                ("updated", json!(s.updated)),
                ("unchanged", json!(s.unchanged)),
            ])
        }
        Document::Translations(doc) => {
            let s = app
                .db
                .write(|c| c.import_translations(&doc, admin.member_id.as_str()))?;
            BTreeMap::from([
                ("kind", json!("translations")),
                ("applied", json!(s.applied)),
                ("unchanged", json!(s.unchanged)),
                ("skipped", json!(s.skipped)),
            ])
        }
    };
    Ok(Json(summary))
}
