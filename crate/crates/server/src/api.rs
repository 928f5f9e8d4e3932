// SPDX-License-Identifier: Apache-2.0

//! Route table and handlers. Every handler resolves the caller from the
//! bearer token and lets the registry decide what the caller may see.

use std::sync::Arc;

use axum::body::Body;
use axum::extract::{FromRequest, FromRequestParts, State};
use axum::http::header::{AUTHORIZATION, CONTENT_DISPOSITION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::Router;
use base64::Engine;
use domainhub_core::{
    ArticleDraft, ArticleId, BindingId, DirectoryId, Error, Query, Registry, Right, SearchMode,
    Service, UserAccount, UserId,
};
use domainhub_relay::Hub;
use futures::StreamExt;

use crate::dto::*;
use crate::error::{ApiError, ApiResult};

#[derive(Clone)]
pub struct AppState {
    pub service: Arc<Service>,
    pub hub: Hub,
}

/// JSON body whose rejections render as API errors.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct Json<T>(pub T);

impl<T: serde::Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Path), rejection(ApiError))]
pub struct Path<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct QueryParams<T>(pub T);

fn bearer(parts: &Parts) -> Result<&str, ApiError> {
    parts
        .headers
        .get(AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
        .ok_or_else(|| Error::Unauthenticated.into())
}

/// The authenticated caller.
pub struct Caller(pub UserId);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        Ok(Caller(state.service.authenticate(bearer(parts)?)?))
    }
}

struct Token(String);

impl FromRequestParts<AppState> for Token {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &AppState) -> Result<Self, ApiError> {
        Ok(Token(bearer(parts)?.to_string()))
    }
}

/// One endpoint. `variant` distinguishes actions that share a path and are
/// selected by a body field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Route {
    pub method: &'static str,
    pub path: &'static str,
    pub variant: Option<&'static str>,
}

const fn r(method: &'static str, path: &'static str) -> Route {
    Route {
        method,
        path,
        variant: None,
    }
}

const fn rv(method: &'static str, path: &'static str, variant: &'static str) -> Route {
    Route {
        method,
        path,
        variant: Some(variant),
    }
}

/// Every capability of the API.
pub const ROUTES: &[Route] = &[
    r("POST", "/api/register"),
    r("POST", "/api/login"),
    r("POST", "/api/logout"),
    r("GET", "/api/me"),
    r("GET", "/api/users"),
    r("GET", "/api/dirs"),
    r("POST", "/api/dirs"),
    r("GET", "/api/dirs/{id}"),
    r("DELETE", "/api/dirs/{id}"),
    r("GET", "/api/dirs/{id}/children"),
    r("GET", "/api/dirs/{id}/bar"),
    r("POST", "/api/dirs/{id}/trash"),
    r("POST", "/api/dirs/{id}/restore"),
    r("GET", "/api/dirs/{id}/matrix"),
    r("POST", "/api/dirs/{id}/matrix"),
    r("GET", "/api/dirs/{id}/grants"),
    rv("POST", "/api/dirs/{id}/grants/users", "grant"),
    rv("POST", "/api/dirs/{id}/grants/users", "revoke"),
    rv("POST", "/api/dirs/{id}/grants/groups", "grant"),
    rv("POST", "/api/dirs/{id}/grants/groups", "revoke"),
    r("POST", "/api/dirs/{id}/visibility"),
    r("POST", "/api/dirs/{id}/join"),
    r("GET", "/api/dirs/{id}/group"),
    rv("POST", "/api/dirs/{id}/applications/{uid}", "permit"),
    rv("POST", "/api/dirs/{id}/applications/{uid}", "refuse"),
    r("POST", "/api/dirs/{id}/blacklist/{uid}"),
    r("DELETE", "/api/dirs/{id}/blacklist/{uid}"),
    r("DELETE", "/api/dirs/{id}/members/{uid}"),
    r("GET", "/api/dirs/{id}/articles"),
    r("POST", "/api/dirs/{id}/articles"),
    r("GET", "/api/a/{article}"),
    r("GET", "/api/a/{article}/attachments/{name}"),
    r("GET", "/api/search"),
    r("GET", "/api/dirs/{id}/mounts"),
    r("POST", "/api/dirs/{id}/mounts"),
    r("GET", "/api/dirs/{id}/mounts/entries"),
    r("GET", "/api/mounts/{binding}/file"),
    r("DELETE", "/api/mounts/{binding}"),
];

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/register", post(register))
        .route("/api/login", post(login))
        .route("/api/logout", post(logout))
        .route("/api/me", get(me))
        .route("/api/users", get(lookup_user))
        .route("/api/dirs", get(resolve_dir).post(create_dir))
        .route("/api/dirs/{id}", get(show_dir).delete(delete_dir))
        .route("/api/dirs/{id}/children", get(children))
        .route("/api/dirs/{id}/bar", get(bar))
        .route("/api/dirs/{id}/trash", post(trash))
        .route("/api/dirs/{id}/restore", post(restore))
        .route("/api/dirs/{id}/matrix", get(get_matrix).post(set_matrix))
        .route("/api/dirs/{id}/grants", get(grants))
        .route("/api/dirs/{id}/grants/users", post(grant_user))
        .route("/api/dirs/{id}/grants/groups", post(grant_group))
        .route("/api/dirs/{id}/visibility", post(visibility))
        .route("/api/dirs/{id}/join", post(join))
        .route("/api/dirs/{id}/group", get(group))
        .route("/api/dirs/{id}/applications/{uid}", post(review))
        .route(
            "/api/dirs/{id}/blacklist/{uid}",
            post(blacklist).delete(unblacklist),
        )
        .route("/api/dirs/{id}/members/{uid}", delete(kick))
        .route("/api/dirs/{id}/articles", get(articles).post(publish))
        .route("/api/a/{article}", get(article))
        .route("/api/a/{article}/attachments/{name}", get(attachment))
        .route("/api/search", get(search))
        .route("/api/dirs/{id}/mounts", get(mounts).post(bind))
        .route("/api/dirs/{id}/mounts/entries", get(mount_entries))
        .route("/api/mounts/{binding}/file", get(mount_file))
        .route("/api/mounts/{binding}", delete(unbind))
        .fallback(no_route)
        .layer(axum::extract::DefaultBodyLimit::max(64 << 20))
        .with_state(state)
}

async fn no_route() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NoRoute", "no such endpoint")
}

fn user_view(u: &UserAccount) -> UserView {
    UserView {
        id: u.id,
        username: u.username.clone(),
        created_at: u.created_at,
    }
}

fn dir_view(reg: &Registry, id: DirectoryId, viewer: UserId) -> ApiResult<DirView> {
    let view = reg.domain_tool_view(id, viewer)?;
    let roles = reg.roles_of(viewer, id)?;
    let matrix = view.directory.matrix;
    Ok(DirView {
        bar: reg.navigator_path_for(id, viewer)?,
        viewer: ViewerInfo {
            roles: roles.iter().collect(),
            rights: Right::ALL
                .into_iter()
                .filter(|r| matrix.allows(roles, *r))
                .collect(),
            membership: reg.membership(id, viewer)?,
        },
        directory: view.directory,
    })
}

fn no_content() -> StatusCode {
    StatusCode::NO_CONTENT
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, Error> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
        .map_err(Into::into)
}

async fn register(
    State(s): State<AppState>,
    Json(c): Json<Credentials>,
) -> ApiResult<(StatusCode, Json<UserView>)> {
    let svc = s.service.clone();
    let account = blocking(move || svc.register(&c.username, &c.password)).await?;
    Ok((StatusCode::CREATED, Json(user_view(&account))))
}

async fn login(
    State(s): State<AppState>,
    Json(c): Json<Credentials>,
) -> ApiResult<Json<domainhub_core::SessionToken>> {
    let svc = s.service.clone();
    Ok(Json(
        blocking(move || svc.login(&c.username, &c.password)).await?,
    ))
}

async fn logout(State(s): State<AppState>, Token(t): Token) -> ApiResult<StatusCode> {
    if s.service.logout(&t) {
        Ok(no_content())
    } else {
        Err(Error::Unauthenticated.into())
    }
}

async fn me(State(s): State<AppState>, Caller(me): Caller) -> ApiResult<Json<UserView>> {
    let reg = s.service.read();
    let u = reg.user(me).ok_or(Error::UserNotFound)?;
    Ok(Json(user_view(u)))
}

async fn lookup_user(
    State(s): State<AppState>,
    Caller(_): Caller,
    QueryParams(q): QueryParams<NameQuery>,
) -> ApiResult<Json<UserView>> {
    let reg = s.service.read();
    let u = reg.user_by_name(&q.name).ok_or(Error::UserNotFound)?;
    Ok(Json(user_view(u)))
}

async fn resolve_dir(
    State(s): State<AppState>,
    Caller(me): Caller,
    QueryParams(q): QueryParams<PathQuery>,
) -> ApiResult<Json<DirView>> {
    let reg = s.service.read();
    let id = reg.resolve_path(&q.path, me)?;
    Ok(Json(dir_view(&reg, id, me)?))
}

async fn create_dir(
    State(s): State<AppState>,
    Caller(me): Caller,
    Json(req): Json<CreateDir>,
) -> ApiResult<(StatusCode, Json<DirView>)> {
    let mut reg = s.service.write();
    let d = reg.create_directory(req.parent, &req.name, me)?;
    Ok((StatusCode::CREATED, Json(dir_view(&reg, d.id, me)?)))
}

async fn show_dir(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<DirView>> {
    Ok(Json(dir_view(&s.service.read(), id, me)?))
}

async fn delete_dir(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<StatusCode> {
    s.service.write().delete_directory(id, me)?;
    Ok(no_content())
}

async fn children(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<domainhub_core::DomainView>> {
    Ok(Json(s.service.read().domain_tool_view(id, me)?))
}

async fn bar(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<BarView>> {
    let segments = s.service.read().navigator_path_for(id, me)?;
    Ok(Json(BarView {
        text: segments.to_string(),
        segments,
    }))
}

async fn trash(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<DirView>> {
    let mut reg = s.service.write();
    reg.trash_directory(id, me)?;
    Ok(Json(dir_view(&reg, id, me)?))
}

async fn restore(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<DirView>> {
    let mut reg = s.service.write();
    reg.restore_directory(id, me)?;
    Ok(Json(dir_view(&reg, id, me)?))
}

async fn get_matrix(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<domainhub_core::AuthMatrix>> {
    let reg = s.service.read();
    Ok(Json(dir_view(&reg, id, me)?.directory.matrix))
}

async fn set_matrix(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    Json(table): Json<MatrixTable>,
) -> ApiResult<Json<domainhub_core::AuthMatrix>> {
    let matrix = domainhub_core::AuthMatrix::from_table(&table).map_err(ApiError::bad_request)?;
    let mut reg = s.service.write();
    reg.set_matrix(id, me, matrix)?;
    Ok(Json(reg.matrix(id)?))
}

async fn grants(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<domainhub_core::GrantSet>> {
    Ok(Json(s.service.read().grants_for(id, me)?))
}

async fn grant_user(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    Json(g): Json<UserGrant>,
) -> ApiResult<Json<domainhub_core::GrantSet>> {
    let mut reg = s.service.write();
    match g.action {
        GrantAction::Grant => reg.grant_user(id, me, g.user)?,
        GrantAction::Revoke => reg.revoke_user(id, me, g.user)?,
    }
    Ok(Json(reg.grants_for(id, me)?))
}

async fn grant_group(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    Json(g): Json<GroupGrant>,
) -> ApiResult<Json<domainhub_core::GrantSet>> {
    let mut reg = s.service.write();
    match g.action {
        GrantAction::Grant => reg.grant_group(id, me, g.group)?,
        GrantAction::Revoke => reg.revoke_group(id, me, g.group)?,
    }
    Ok(Json(reg.grants_for(id, me)?))
}

async fn visibility(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    Json(v): Json<SetVisibility>,
) -> ApiResult<Json<DirView>> {
    let mut reg = s.service.write();
    reg.set_visibility(id, me, v.visibility)?;
    Ok(Json(dir_view(&reg, id, me)?))
}

async fn join(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<JoinView>> {
    let mut reg = s.service.write();
    // Joining a directory one cannot see would reveal that it exists.
    if !reg.is_visible_to(id, me) {
        return Err(Error::NotFound(domainhub_core::Entity::Directory).into());
    }
    Ok(Json(JoinView {
        outcome: reg.join(id, me)?,
    }))
}

async fn group(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<domainhub_core::GroupState>> {
    Ok(Json(s.service.read().group_for(id, me)?))
}

async fn review(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path((id, uid)): Path<(DirectoryId, UserId)>,
    Json(r): Json<Review>,
) -> ApiResult<StatusCode> {
    s.service
        .write()
        .review_application(id, me, uid, r.decision)?;
    Ok(no_content())
}

async fn blacklist(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path((id, uid)): Path<(DirectoryId, UserId)>,
) -> ApiResult<StatusCode> {
    s.service.write().blacklist_user(id, me, uid)?;
    Ok(no_content())
}

async fn unblacklist(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path((id, uid)): Path<(DirectoryId, UserId)>,
) -> ApiResult<StatusCode> {
    s.service.write().unblacklist_user(id, me, uid)?;
    Ok(no_content())
}

async fn kick(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path((id, uid)): Path<(DirectoryId, UserId)>,
) -> ApiResult<StatusCode> {
    s.service.write().remove_member(id, me, uid)?;
    Ok(no_content())
}

async fn articles(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<Vec<domainhub_core::ArticleSummary>>> {
    Ok(Json(s.service.read().list_articles(id, me)?))
}

fn article_view(reg: &Registry, id: ArticleId, viewer: UserId) -> ApiResult<ArticleView> {
    let article = reg.get_article(id, viewer)?;
    Ok(ArticleView {
        url: article.url(),
        bar: reg.navigator_path_for(article.directory, viewer)?,
        article,
    })
}

async fn publish(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    Json(req): Json<PublishArticle>,
) -> ApiResult<(StatusCode, Json<ArticleView>)> {
    let engine = base64::engine::general_purpose::STANDARD;
    let mut attachments = Vec::with_capacity(req.attachments.len());
    for a in req.attachments {
        let bytes = engine
            .decode(a.data.as_bytes())
            .map_err(|e| ApiError::bad_request(format!("attachment {}: {e}", a.filename)))?;
        attachments.push((a.filename, bytes));
    }
    let draft = ArticleDraft {
        title: req.title,
        abstract_text: req.abstract_text,
        body: req.body,
        attachments,
    };
    let mut reg = s.service.write();
    let article = reg.publish_article(id, me, draft)?;
    Ok((
        StatusCode::CREATED,
        Json(article_view(&reg, article.id, me)?),
    ))
}

async fn article(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<ArticleId>,
) -> ApiResult<Json<ArticleView>> {
    Ok(Json(article_view(&s.service.read(), id, me)?))
}

fn download_headers(filename: &str) -> [(axum::http::HeaderName, HeaderValue); 2] {
    let safe: String = filename
        .chars()
        .map(|c| {
            if c.is_ascii_graphic() && c != '"' && c != '\\' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let disposition = HeaderValue::from_str(&format!("attachment; filename=\"{safe}\""))
        .unwrap_or_else(|_| HeaderValue::from_static("attachment"));
    [
        (
            CONTENT_TYPE,
            HeaderValue::from_static("application/octet-stream"),
        ),
        (CONTENT_DISPOSITION, disposition),
    ]
}

async fn attachment(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path((id, name)): Path<(ArticleId, String)>,
) -> ApiResult<Response> {
    let (att, bytes) = s.service.read().fetch_attachment(id, &name, me)?;
    Ok((download_headers(&att.filename), bytes.to_vec()).into_response())
}

async fn search(
    State(s): State<AppState>,
    Caller(me): Caller,
    QueryParams(q): QueryParams<SearchQuery>,
) -> ApiResult<Json<Vec<domainhub_core::SearchHit>>> {
    let mode = SearchMode::from_label(&q.mode)?;
    let query = Query::new(&q.q, mode, me)?;
    Ok(Json(s.service.read().search(&query)?))
}

async fn mounts(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
) -> ApiResult<Json<Vec<BindingView>>> {
    let targets = s.service.read().mount_targets(id, me)?;
    Ok(Json(
        targets
            .into_iter()
            .map(|t| BindingView {
                live: s.hub.is_live(t.binding.account, &t.binding.agent_id),
                label: t.label,
                binding: t.binding,
            })
            .collect(),
    ))
}

async fn bind(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    Json(req): Json<BindMount>,
) -> ApiResult<(StatusCode, Json<BindingView>)> {
    let mut reg = s.service.write();
    let binding = reg.bind_mount(id, me, &req.agent_id, &req.share)?;
    let view = BindingView {
        label: reg.mount_label(&binding),
        live: s.hub.is_live(binding.account, &binding.agent_id),
        binding,
    };
    Ok((StatusCode::CREATED, Json(view)))
}

async fn mount_entries(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(id): Path<DirectoryId>,
    QueryParams(q): QueryParams<EntriesQuery>,
) -> ApiResult<Json<Vec<domainhub_core::RemoteEntry>>> {
    let mut targets = s.service.read().mount_targets(id, me)?;
    if let Some(only) = q.binding {
        targets.retain(|t| t.binding.id == only);
        if targets.is_empty() {
            return Err(Error::NotFound(domainhub_core::Entity::Binding).into());
        }
    }
    Ok(Json(s.hub.list_entries(&targets, &q.path).await?))
}

async fn mount_file(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(binding): Path<BindingId>,
    QueryParams(q): QueryParams<FileQuery>,
) -> ApiResult<Response> {
    let target = s.service.read().mount_for_fetch(binding, me)?;
    let transfer = s.hub.fetch(&target.binding, &q.path).await?;
    let name = q.path.rsplit('/').find(|s| !s.is_empty()).unwrap_or("file");
    // Streams chunk by chunk. A relay failure aborts the body, so clients
    // see a truncated transfer rather than a short file.
    let body = Body::from_stream(transfer.into_stream().map(|chunk| chunk.map(bytes_of)));
    Ok((download_headers(name), body).into_response())
}

fn bytes_of(v: Vec<u8>) -> axum::body::Bytes {
    axum::body::Bytes::from(v)
}

async fn unbind(
    State(s): State<AppState>,
    Caller(me): Caller,
    Path(binding): Path<BindingId>,
) -> ApiResult<StatusCode> {
    s.service.write().unbind_mount(binding, me)?;
    Ok(no_content())
}
