use std::collections::BTreeMap;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use a4f_core::challenge::{execute_on_view, merged_source, Access, ChallengeError, GradeError, Verdict};
use a4f_core::finder::{Instance, ResourceBudget};
use a4f_repo::{ExecResult, InstanceRecord, ModelView, Point, Repository, SharedLinks, Theme, TreeDocument, Visibility};
use axum::extract::rejection::JsonRejection;
use axum::extract::{ConnectInfo, DefaultBodyLimit, FromRequest, FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::limit::RateLimiter;

pub struct AppState {
    pub repo: Arc<Repository>,
    pub config: ServiceConfig,
    limiter: RateLimiter,
    slots: Arc<Semaphore>,
}

impl AppState {
    pub fn new(repo: Repository, config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState {
            repo: Arc::new(repo.with_max_code_bytes(config.max_code_bytes)),
            limiter: RateLimiter::new(config.executes_per_minute),
            slots: Arc::new(Semaphore::new(config.solver_slots)),
            config,
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = if state.config.cors_allowed_origins.is_empty() {
        CorsLayer::new().allow_origin(Any)
    } else {
        let origins: Vec<HeaderValue> = state
            .config
            .cors_allowed_origins
            .iter()
            .filter_map(|o| o.parse().ok())
            .collect();
        CorsLayer::new().allow_origin(AllowOrigin::list(origins))
    }
    .allow_methods(Any)
    .allow_headers(Any);
    // Escaped JSON can be several times the code it carries.
    let body_limit = state.config.max_code_bytes.saturating_mul(8).saturating_add(1 << 20);
    Router::new()
        .route("/api/models", post(share_model))
        .route("/api/models/{token}", get(load_model))
        .route("/api/models/{token}/execute", post(execute))
        .route("/api/models/{token}/tree", get(tree))
        .route("/api/instances", post(share_instance))
        .route("/api/instances/{token}", get(load_instance))
        .route("/healthz", get(health))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

/// JSON body whose rejections use the service error shape.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(rejection) => Err(json_rejection(rejection)),
        }
    }
}

fn json_rejection(r: JsonRejection) -> ApiError {
    if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
        return ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "too_large", r.body_text());
    }
    ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
}

/// Source address; loopback when the transport does not provide one.
pub struct ClientAddr(pub IpAddr);

impl<S: Send + Sync> FromRequestParts<S> for ClientAddr {
    type Rejection = std::convert::Infallible;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, Self::Rejection> {
        let ip = parts
            .extensions
            .get::<ConnectInfo<SocketAddr>>()
            .map_or(IpAddr::V4(Ipv4Addr::LOCALHOST), |c| c.0.ip());
        Ok(ClientAddr(ip))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShareRequest {
    code: String,
    #[serde(default)]
    theme: Option<Theme>,
}

async fn share_model(
    State(app): State<Arc<AppState>>,
    ApiJson(req): ApiJson<ShareRequest>,
) -> Result<(StatusCode, Json<SharedLinks>), ApiError> {
    let repo = app.repo.clone();
    let links = blocking(move || repo.save_shared(&req.code, req.theme)).await??;
    Ok((StatusCode::CREATED, Json(links)))
}

async fn load_model(State(app): State<Arc<AppState>>, Path(token): Path<String>) -> Result<Json<ModelView>, ApiError> {
    let repo = app.repo.clone();
    Ok(Json(blocking(move || repo.load_by_token(&token)).await??))
}

async fn tree(State(app): State<Arc<AppState>>, Path(token): Path<String>) -> Result<Json<TreeDocument>, ApiError> {
    let repo = app.repo.clone();
    Ok(Json(blocking(move || repo.export_tree(&token)).await??))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExecuteRequest {
    code: String,
    command: String,
    #[serde(default)]
    skip: u64,
    #[serde(default)]
    parent: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecuteResponse {
    pub result: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<Instance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub model_id: String,
}

/// Raises the cancel flag when the request goes away.
struct CancelOnDrop(Arc<AtomicBool>);

impl Drop for CancelOnDrop {
    fn drop(&mut self) {
        self.0.store(true, Ordering::Relaxed);
    }
}

async fn execute(
    State(app): State<Arc<AppState>>,
    ClientAddr(ip): ClientAddr,
    Path(token): Path<String>,
    ApiJson(req): ApiJson<ExecuteRequest>,
) -> Result<Json<ExecuteResponse>, ApiError> {
    if !app.limiter.allow(ip) {
        return Err(ApiError::new(
            StatusCode::TOO_MANY_REQUESTS,
            "rate_limited",
            "too many executions from this address, try again in a minute",
        ));
    }
    if req.code.len() > app.config.max_code_bytes {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "code_too_large",
            format!("code is over the {} byte limit", app.config.max_code_bytes),
        ));
    }
    let repo = app.repo.clone();
    let (ctx, req) = blocking(move || {
        let ctx = repo.link_context(&token)?;
        repo.check_parent(&token, req.parent.as_deref())?;
        Ok::<_, a4f_repo::RepoError>((ctx, req))
    })
    .await??;

    let permit = tokio::time::timeout(app.config.queue_timeout, app.slots.clone().acquire_owned())
        .await
        .map_err(|_| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "busy", "all solvers are busy"))?
        .expect("semaphore stays open");
    let cancel = Arc::new(AtomicBool::new(false));
    let _guard = CancelOnDrop(cancel.clone());
    let budget = ResourceBudget {
        max_steps: u64::MAX,
        timeout: app.config.solve_timeout(),
        max_scope: app.config.max_scope,
        cancel: Some(cancel),
        ..ResourceBudget::default()
    };
    let repo = app.repo.clone();
    let (graded, recorded) = blocking(move || {
        let _permit = permit;
        let access = match ctx.link.visibility {
            Visibility::Public => Access::Public,
            Visibility::Private => Access::Private,
        };
        let graded = execute_on_view(&ctx.split, access, &req.code, &req.command, req.skip, &budget);
        let result = match &graded {
            Ok(g) => ExecResult::parse(g.verdict.result()).expect("verdicts map to results"),
            Err(_) => ExecResult::Error,
        };
        let full_code = match access {
            Access::Public => merged_source(&ctx.split.secret_paragraphs, &req.code).0,
            Access::Private => req.code.clone(),
        };
        let recorded =
            repo.record_execution(&ctx.link.token, req.parent.as_deref(), &full_code, &req.command, result);
        (graded, recorded)
    })
    .await?;
    let model_id = recorded?;
    let verdict = match graded {
        Ok(g) => g.verdict,
        Err(ChallengeError::UnknownCommand(c)) => {
            return Err(
                ApiError::new(StatusCode::BAD_REQUEST, "unknown_command", format!("no command named `{c}`"))
                    .recorded_as(model_id),
            )
        }
    };
    let result = verdict.result();
    match verdict {
        Verdict::Counterexample(i) | Verdict::Witness(i) => Ok(Json(ExecuteResponse {
            result,
            instance: Some(i),
            message: None,
            model_id,
        })),
        Verdict::Solved | Verdict::NoWitness | Verdict::ResourceLimit => Ok(Json(ExecuteResponse {
            result,
            instance: None,
            message: None,
            model_id,
        })),
        Verdict::Error(GradeError::Analysis { message }) => Ok(Json(ExecuteResponse {
            result,
            instance: None,
            message: Some(message),
            model_id,
        })),
        Verdict::Error(e) => {
            let status = match e {
                GradeError::SecretNameClash { .. } => StatusCode::UNPROCESSABLE_ENTITY,
                _ => StatusCode::BAD_REQUEST,
            };
            Err(ApiError::new(status, e.code(), e.message())
                .at(e.position())
                .recorded_as(model_id))
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct InstanceRequest {
    model_id: String,
    command: String,
    #[serde(default)]
    skip: u64,
    instance: serde_json::Value,
    #[serde(default)]
    theme: Theme,
    #[serde(default)]
    layout: BTreeMap<String, Point>,
}

#[derive(Serialize)]
struct InstanceToken {
    token: String,
}

async fn share_instance(
    State(app): State<Arc<AppState>>,
    ApiJson(req): ApiJson<InstanceRequest>,
) -> Result<(StatusCode, Json<InstanceToken>), ApiError> {
    let repo = app.repo.clone();
    let token = blocking(move || {
        repo.save_instance(&req.model_id, &req.command, req.skip, req.instance, req.theme, req.layout)
    })
    .await??;
    Ok((StatusCode::CREATED, Json(InstanceToken { token })))
}

async fn load_instance(
    State(app): State<Arc<AppState>>,
    Path(token): Path<String>,
) -> Result<Json<InstanceRecord>, ApiError> {
    let repo = app.repo.clone();
    Ok(Json(blocking(move || repo.load_instance(&token)).await??))
}

async fn health(State(app): State<Arc<AppState>>) -> Response {
    let repo = app.repo.clone();
    match blocking(move || repo.health()).await {
        Ok(Ok(())) => Json(serde_json::json!({"status": "ok"})).into_response(),
        Ok(Err(e)) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "unhealthy", e.to_string()).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}
