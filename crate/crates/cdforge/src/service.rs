//! HTTP/JSON API over a [`Wiki`].
//!
//! Reads are open; writes need `Authorization: Bearer <token>` naming a
//! principal from the token table. Errors are JSON objects
//! `{status, code, detail, position}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use cdforge_core::discussion::{DiscussionError, NewPost, PostType};
use cdforge_core::fragment::{FragmentError, FragmentId};
use cdforge_core::graph::{Solutions, Term};
use cdforge_core::notation::page_href;
use cdforge_core::vcs::{LockToken, Revision, VcsError};
use cdforge_core::wiki::{Wiki, WikiError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Principal, Role};

pub const SUMMARY_HEADER: &str = "x-summary";
pub const BASE_REVISION_HEADER: &str = "x-base-revision";
pub const REVISION_HEADER: &str = "x-revision";
pub const LOCK_TOKEN_HEADER: &str = "x-lock-token";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub detail: String,
    pub position: Option<Position>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            detail: detail.into(),
            position: None,
        }
    }
}

impl From<WikiError> for ApiError {
    fn from(e: WikiError) -> Self {
        ApiError {
            status: status_for(&e).as_u16(),
            code: e.code().to_string(),
            detail: e.to_string(),
            position: e.position().map(|(line, column)| Position { line, column }),
        }
    }
}

impl From<FragmentError> for ApiError {
    fn from(e: FragmentError) -> Self {
        WikiError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

pub fn status_for(e: &WikiError) -> StatusCode {
    use StatusCode as S;
    match e {
        WikiError::UnknownFragment(_) => S::NOT_FOUND,
        WikiError::CdExists(_) => S::CONFLICT,
        WikiError::Io(_) => S::INTERNAL_SERVER_ERROR,
        WikiError::Query(_) => S::BAD_REQUEST,
        WikiError::Fragment(FragmentError::UnknownFragment(_)) => S::NOT_FOUND,
        WikiError::Fragment(FragmentError::InvalidId(_)) => S::BAD_REQUEST,
        WikiError::Vcs(v) => match v {
            VcsError::Conflict { .. } => S::CONFLICT,
            VcsError::LockHeld { .. } => S::LOCKED,
            VcsError::NotFound(_) | VcsError::UnknownLock => S::NOT_FOUND,
            VcsError::NoSuchRevision(_) => S::BAD_REQUEST,
            VcsError::Corrupt(_) | VcsError::Io(_) => S::INTERNAL_SERVER_ERROR,
            _ => S::UNPROCESSABLE_ENTITY,
        },
        WikiError::Discussion(DiscussionError::UnknownPost(_)) => S::NOT_FOUND,
        WikiError::Discussion(DiscussionError::AlreadyDecided(_)) => S::CONFLICT,
        _ => S::UNPROCESSABLE_ENTITY,
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    pub wiki: Wiki,
    principals: HashMap<String, Principal>,
}

impl AppState {
    pub fn new(wiki: Wiki, principals: HashMap<String, Principal>) -> Self {
        AppState { wiki, principals }
    }

    /// The principal behind the request's bearer token, if it has at least `min`.
    pub fn authorize(&self, headers: &HeaderMap, min: Role) -> ApiResult<&Principal> {
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "a bearer token is required"))?;
        let p = self
            .principals
            .get(token)
            .ok_or_else(|| ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "unknown token"))?;
        if p.role < min {
            return Err(ApiError::new(
                StatusCode::FORBIDDEN,
                "Forbidden",
                format!("{} has role {}, {} is required", p.user, p.role.as_str(), min.as_str()),
            ));
        }
        Ok(p)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/cds", get(list_cds).post(create_cd))
        .route("/page/{id}", get(get_page).put(put_page))
        .route("/page/{id}/history", get(history))
        .route("/page/{id}/lock", axum::routing::post(lock).delete(unlock))
        .route("/page/{id}/discussion", get(get_discussion).post(post_discussion))
        .route("/discussion/reply-types", get(reply_types))
        .route("/notations/{cd}", get(get_notations).put(put_notations))
        .route("/query", axum::routing::post(query))
        .route("/dashboard/open-issues", get(open_issues))
        .route("/metrics", get(metrics))
        .route("/check", get(check))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint") })
        .with_state(state)
}

/// Run wiki work off the async threads.
async fn blocking<T, F>(st: &Arc<AppState>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Wiki) -> ApiResult<T> + Send + 'static,
{
    let st = st.clone();
    tokio::task::spawn_blocking(move || f(&st.wiki))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

fn fragment_id(raw: &str) -> ApiResult<FragmentId> {
    Ok(raw.parse::<FragmentId>()?)
}

fn json_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        let mut err = ApiError::new(StatusCode::BAD_REQUEST, "InvalidJson", e.to_string());
        if e.line() > 0 {
            err.position = Some(Position {
                line: e.line(),
                column: e.column(),
            });
        }
        err
    })
}

fn text_body(body: Bytes) -> ApiResult<String> {
    String::from_utf8(body.to_vec())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "InvalidEncoding", format!("body is not UTF-8: {e}")))
}

fn header_text(headers: &HeaderMap, name: &str) -> ApiResult<Option<String>> {
    match headers.get(name) {
        None => Ok(None),
        Some(v) => String::from_utf8(v.as_bytes().to_vec())
            .map(Some)
            .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "InvalidHeader", format!("{name} is not UTF-8"))),
    }
}

fn text_response(content_type: &'static str, revision: u64, body: String) -> Response {
    let mut r = ([(header::CONTENT_TYPE, content_type)], body).into_response();
    r.headers_mut().insert(REVISION_HEADER, HeaderValue::from(revision));
    r
}

#[derive(Serialize)]
struct CdListing {
    name: String,
    href: String,
}

async fn list_cds(State(st): State<Arc<AppState>>) -> Json<Vec<CdListing>> {
    Json(
        st.wiki
            .cd_names()
            .into_iter()
            .map(|name| CdListing {
                href: page_href(&FragmentId::cd(&name)),
                name,
            })
            .collect(),
    )
}

#[derive(Deserialize)]
struct NewCd {
    name: String,
    #[serde(default)]
    description: String,
}

async fn create_cd(State(st): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let user = st.authorize(&headers, Role::Administrator)?.user.clone();
    let req: NewCd = json_body(&body)?;
    let out = blocking(&st, move |w| Ok(w.create_cd(&req.name, &req.description, &user)?)).await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

#[derive(Deserialize)]
struct PageParams {
    format: Option<String>,
}

async fn get_page(
    State(st): State<Arc<AppState>>,
    Path(raw): Path<String>,
    Query(params): Query<PageParams>,
) -> ApiResult<Response> {
    let id = fragment_id(&raw)?;
    let format = params.format.unwrap_or_else(|| "html".into());
    blocking(&st, move |w| match format.as_str() {
        "html" => {
            let rev = w.head();
            let page = w.page(&id)?;
            Ok(text_response("text/html; charset=utf-8", rev, page.markup.clone()))
        }
        "source" => {
            let (src, rev) = w.source(&id)?;
            Ok(text_response("application/xml; charset=utf-8", rev, src))
        }
        "om" => {
            let rev = w.head();
            Ok(text_response("application/xml; charset=utf-8", rev, w.objects(&id)?))
        }
        other => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "InvalidFormat",
            format!("format must be html, source or om, not {other}"),
        )),
    })
    .await
}

async fn put_page(
    State(st): State<Arc<AppState>>,
    Path(raw): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let user = st.authorize(&headers, Role::CdEditor)?.user.clone();
    let id = fragment_id(&raw)?;
    let summary = header_text(&headers, SUMMARY_HEADER)?;
    let base = match header_text(&headers, BASE_REVISION_HEADER)? {
        None => None,
        Some(b) => Some(b.trim().parse::<u64>().map_err(|_| {
            ApiError::new(StatusCode::BAD_REQUEST, "InvalidHeader", format!("{BASE_REVISION_HEADER} must be a revision number"))
        })?),
    };
    let src = text_body(body)?;
    let out = blocking(&st, move |w| Ok(w.edit_fragment(&id, &src, &user, summary.as_deref(), base)?)).await?;
    Ok(Json(out).into_response())
}

#[derive(Serialize)]
struct HistoryEntry {
    #[serde(flatten)]
    revision: Revision,
    header: String,
}

async fn history(State(st): State<Arc<AppState>>, Path(raw): Path<String>) -> ApiResult<Json<Vec<HistoryEntry>>> {
    let id = fragment_id(&raw)?;
    let revs = blocking(&st, move |w| Ok(w.history(&id)?)).await?;
    Ok(Json(
        revs.into_iter()
            .map(|r| HistoryEntry {
                header: r.header(),
                revision: r,
            })
            .collect(),
    ))
}

async fn lock(State(st): State<Arc<AppState>>, Path(raw): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let user = st.authorize(&headers, Role::CdEditor)?.user.clone();
    let id = fragment_id(&raw)?;
    let info = blocking(&st, move |w| {
        w.lock(&id, &user)?;
        let st = w.state();
        let path = &st
            .cd(&id.cd)
            .ok_or_else(|| WikiError::UnknownFragment(id.to_string()))?
            .path;
        Ok(w.repository().lock_info(path))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn unlock(State(st): State<Arc<AppState>>, Path(raw): Path<String>, headers: HeaderMap) -> ApiResult<StatusCode> {
    st.authorize(&headers, Role::CdEditor)?;
    fragment_id(&raw)?;
    let token = header_text(&headers, LOCK_TOKEN_HEADER)?
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "MissingHeader", format!("{LOCK_TOKEN_HEADER} is required")))?;
    blocking(&st, move |w| Ok(w.unlock(&LockToken(token))?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_discussion(State(st): State<Arc<AppState>>, Path(raw): Path<String>) -> ApiResult<Json<Value>> {
    let id = fragment_id(&raw)?;
    blocking(&st, move |w| {
        let posts = w.discussion(&id)?;
        let mut out = Vec::with_capacity(posts.len());
        for p in posts {
            let types = w.reply_types(Some(&p.id))?;
            let mut v = serde_json::to_value(&p).expect("posts serialize");
            v["reply_types"] = json!(types);
            out.push(v);
        }
        Ok(Json(json!({
            "forum": id,
            "thread_types": w.reply_types(None)?,
            "posts": out,
        })))
    })
    .await
}

async fn post_discussion(
    State(st): State<Arc<AppState>>,
    Path(raw): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let user = st.authorize(&headers, Role::Visitor)?.user.clone();
    let id = fragment_id(&raw)?;
    let new: NewPost = json_body(&body)?;
    let post = blocking(&st, move |w| Ok(w.add_post(&id, new, &user)?)).await?;
    Ok((StatusCode::CREATED, Json(post)).into_response())
}

#[derive(Deserialize)]
struct ReplyParams {
    parent: Option<String>,
}

#[derive(Serialize)]
struct ReplyTypes {
    parent: Option<String>,
    types: Vec<PostType>,
}

async fn reply_types(State(st): State<Arc<AppState>>, Query(p): Query<ReplyParams>) -> ApiResult<Json<ReplyTypes>> {
    let types = st.wiki.reply_types(p.parent.as_deref())?;
    Ok(Json(ReplyTypes {
        parent: p.parent,
        types: types.into_iter().collect(),
    }))
}

async fn get_notations(State(st): State<Arc<AppState>>, Path(cd): Path<String>) -> ApiResult<Response> {
    let (src, rev) = st.wiki.notation_source(&cd)?;
    Ok(text_response("application/xml; charset=utf-8", rev, src))
}

async fn put_notations(
    State(st): State<Arc<AppState>>,
    Path(cd): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let user = st.authorize(&headers, Role::CdEditor)?.user.clone();
    let summary = header_text(&headers, SUMMARY_HEADER)?;
    let base = match header_text(&headers, BASE_REVISION_HEADER)? {
        None => None,
        Some(b) => Some(b.trim().parse::<u64>().map_err(|_| {
            ApiError::new(StatusCode::BAD_REQUEST, "InvalidHeader", format!("{BASE_REVISION_HEADER} must be a revision number"))
        })?),
    };
    let src = text_body(body)?;
    let out = blocking(&st, move |w| Ok(w.edit_notations(&cd, &src, &user, summary.as_deref(), base)?)).await?;
    Ok(Json(out).into_response())
}

/// One query result cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub href: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub vars: Vec<String>,
    pub rows: Vec<BTreeMap<String, Option<Binding>>>,
}

impl QueryResponse {
    pub fn from_solutions(s: &Solutions) -> Self {
        let rows = s
            .rows
            .iter()
            .map(|row| {
                s.vars
                    .iter()
                    .zip(row)
                    .map(|(var, cell)| (var.clone(), cell.as_ref().map(binding)))
                    .collect()
            })
            .collect();
        QueryResponse {
            vars: s.vars.clone(),
            rows,
        }
    }
}

fn binding(t: &Term) -> Binding {
    match t {
        Term::Iri(i) => Binding {
            kind: "iri".into(),
            value: i.clone(),
            href: i
                .strip_prefix("page:")
                .and_then(|id| id.parse::<FragmentId>().ok())
                .map(|id| page_href(&id)),
        },
        Term::Literal(l) => Binding {
            kind: "literal".into(),
            value: l.clone(),
            href: None,
        },
    }
}

async fn query(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<QueryResponse>> {
    let text = text_body(body)?;
    let sols = blocking(&st, move |w| Ok(w.query(&text)?)).await?;
    Ok(Json(QueryResponse::from_solutions(&sols)))
}

#[derive(Deserialize)]
struct IssueParams {
    #[serde(rename = "type")]
    page_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageLink {
    pub id: String,
    pub href: String,
}

async fn open_issues(State(st): State<Arc<AppState>>, Query(p): Query<IssueParams>) -> Json<Vec<PageLink>> {
    Json(
        st.wiki
            .open_issues(p.page_type.as_deref())
            .into_iter()
            .map(|id| PageLink {
                href: page_href(&id),
                id: id.to_string(),
            })
            .collect(),
    )
}

async fn metrics(State(st): State<Arc<AppState>>) -> Json<cdforge_core::wiki::CacheMetrics> {
    Json(st.wiki.metrics())
}

async fn check(State(st): State<Arc<AppState>>) -> ApiResult<Json<Value>> {
    let diags = blocking(&st, |w| Ok(w.check()?)).await?;
    Ok(Json(json!({ "diagnostics": diags })))
}
