use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use tollgate_core::{InvoiceId, OwnerId, ReportId, VehicleId};

use crate::service::Service;
use crate::wire::*;
use crate::{FileTransport, ServiceError};

pub const PLAZA_KEY_HEADER: &str = "x-plaza-key";

type AppState = State<Arc<Service>>;
type ApiResult = Result<Response, ApiError>;

#[derive(Debug)]
pub struct ApiError(ServiceError);

impl<E: Into<ServiceError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        Self(e.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.0.status_code();
        if status >= 500 {
            log::error!("{}", self.0);
        }
        let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(json!({ "code": code, "message": self.0.to_string() }))).into_response()
    }
}

fn ok<T: Serialize>(v: T) -> ApiResult {
    Ok(Json(v).into_response())
}

fn created<T: Serialize>(v: T) -> ApiResult {
    Ok((StatusCode::CREATED, Json(v)).into_response())
}

fn no_content() -> ApiResult {
    Ok(StatusCode::NO_CONTENT.into_response())
}

/// Bodies are parsed after authentication so an unauthenticated request
/// always gets 401, whatever it carries.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ServiceError::Invalid(format!("malformed body: {e}")).into())
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(axum::http::header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
}

fn id<T: FromStr>(raw: &str, what: &str) -> Result<T, ApiError> {
    raw.parse()
        .map_err(|_| ServiceError::NotFound(format!("unknown {what} {raw:?}")).into())
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/users", post(register_user))
        .route("/api/users/self", get(get_self).patch(patch_self))
        .route("/api/auth/login", post(login))
        .route("/api/auth/logout", post(logout))
        .route("/api/auth/change-password", post(change_password))
        .route("/api/auth/recover", post(recover))
        .route("/api/auth/reset", post(reset))
        .route("/api/notifications", get(notifications))
        .route("/api/payment-methods", post(add_payment_method))
        .route("/api/balance/top-up", post(top_up))
        .route("/api/transactions", get(transactions))
        .route("/api/invoices", get(invoices))
        .route("/api/invoices/{id}/pay", post(pay))
        .route("/api/vehicles", get(vehicles).post(register_vehicle))
        .route("/api/vehicles/{id}/report-loss", post(report_loss))
        .route("/api/vehicles/{id}/tag", post(set_tag))
        .route("/api/reports", get(my_reports))
        .route("/api/admin/users", get(admin_users))
        .route("/api/admin/users/{id}", patch(admin_patch_user).delete(admin_delete_user))
        .route("/api/admin/users/{id}/credit", post(admin_credit))
        .route("/api/admin/reports", get(admin_reports))
        .route("/api/admin/reports/{id}/respond", post(admin_respond))
        .route("/api/admin/reports/{id}/close", post(admin_close))
        .route("/api/admin/vehicles", get(admin_vehicles))
        .route("/api/admin/vehicles/{id}/track", get(admin_track))
        .route("/api/admin/vehicles/{id}/tag", post(admin_set_tag))
        .route("/api/admin/alerts", get(admin_alerts))
        .route("/api/admin/incidents", get(admin_incidents))
        .route("/api/admin/directory", post(admin_directory))
        .route("/api/admin/stats", get(admin_stats))
        .route("/api/admin/sweep", post(admin_sweep))
        .route("/api/admin/outbox/drain", post(admin_drain))
        .route("/api/plaza/events", post(ingest))
        .fallback(|| async { ApiError(ServiceError::NotFound("no such route".into())) })
        .with_state(service)
}

/// Every route with its method, for the authorization sweep in tests.
pub const ROUTES: &[(&str, &str)] = &[
    ("GET", "/api/users/self"),
    ("PATCH", "/api/users/self"),
    ("POST", "/api/auth/change-password"),
    ("GET", "/api/notifications"),
    ("POST", "/api/payment-methods"),
    ("POST", "/api/balance/top-up"),
    ("GET", "/api/transactions"),
    ("GET", "/api/invoices"),
    ("POST", "/api/invoices/{id}/pay"),
    ("GET", "/api/vehicles"),
    ("POST", "/api/vehicles"),
    ("POST", "/api/vehicles/{id}/report-loss"),
    ("POST", "/api/vehicles/{id}/tag"),
    ("GET", "/api/reports"),
    ("GET", "/api/admin/users"),
    ("PATCH", "/api/admin/users/{id}"),
    ("DELETE", "/api/admin/users/{id}"),
    ("POST", "/api/admin/users/{id}/credit"),
    ("GET", "/api/admin/reports"),
    ("POST", "/api/admin/reports/{id}/respond"),
    ("POST", "/api/admin/reports/{id}/close"),
    ("GET", "/api/admin/vehicles"),
    ("GET", "/api/admin/vehicles/{id}/track"),
    ("POST", "/api/admin/vehicles/{id}/tag"),
    ("GET", "/api/admin/alerts"),
    ("GET", "/api/admin/incidents"),
    ("POST", "/api/admin/directory"),
    ("GET", "/api/admin/stats"),
    ("POST", "/api/admin/sweep"),
    ("POST", "/api/admin/outbox/drain"),
];

async fn health(State(s): AppState) -> ApiResult {
    ok(json!({ "status": "ok", "journal_seq": s.journal_seq(), "now": s.now() }))
}

// ---- user ---------------------------------------------------------------

async fn register_user(State(s): AppState, raw: Bytes) -> ApiResult {
    let b: RegisterUser = body(&raw)?;
    created(s.register_user(&b.name, &b.email, &b.password)?)
}

async fn login(State(s): AppState, raw: Bytes) -> ApiResult {
    let b: Login = body(&raw)?;
    ok(s.login(&b.email, &b.password)?)
}

async fn logout(State(s): AppState, h: HeaderMap) -> ApiResult {
    let session = s.authenticate(bearer(&h))?;
    s.logout(&session.token);
    no_content()
}

async fn get_self(State(s): AppState, h: HeaderMap) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    ok(s.account(o)?)
}

async fn patch_self(State(s): AppState, h: HeaderMap, raw: Bytes) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let b: UpdateUser = body(&raw)?;
    ok(s.update_user(o, b.name, b.email)?)
}

async fn change_password(State(s): AppState, h: HeaderMap, raw: Bytes) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let b: ChangePassword = body(&raw)?;
    s.change_password(o, &b.old_password, &b.new_password)?;
    no_content()
}

async fn recover(State(s): AppState, raw: Bytes) -> ApiResult {
    let b: Recover = body(&raw)?;
    s.recover_password(&b.email)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "status": "if the account exists, a token was sent" }))).into_response())
}

async fn reset(State(s): AppState, raw: Bytes) -> ApiResult {
    let b: ResetPassword = body(&raw)?;
    s.reset_password(&b.token, &b.new_password)?;
    no_content()
}

async fn notifications(State(s): AppState, h: HeaderMap) -> ApiResult {
    let session = s.authenticate(bearer(&h))?;
    ok(s.notifications(&session))
}

async fn add_payment_method(State(s): AppState, h: HeaderMap, raw: Bytes) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let b: AddPaymentMethod = body(&raw)?;
    created(s.add_payment_method(o, &b.method)?)
}

async fn top_up(State(s): AppState, h: HeaderMap, raw: Bytes) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let b: TopUp = body(&raw)?;
    ok(s.top_up(o, b.amount)?)
}

async fn transactions(State(s): AppState, h: HeaderMap, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let limit = match q.get("limit") {
        None => None,
        Some(v) => Some(
            v.parse::<usize>()
                .map_err(|_| ServiceError::Invalid(format!("limit must be a non-negative integer, got {v:?}")))?,
        ),
    };
    ok(s.transactions(o, limit))
}

async fn invoices(State(s): AppState, h: HeaderMap) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    ok(s.invoices(o))
}

async fn pay(State(s): AppState, h: HeaderMap, Path(raw): Path<String>) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let inv: InvoiceId = id(&raw, "invoice")?;
    created(s.pay_invoice(o, inv)?)
}

async fn vehicles(State(s): AppState, h: HeaderMap) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    ok(s.vehicles(o))
}

async fn register_vehicle(State(s): AppState, h: HeaderMap, raw: Bytes) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let b: RegisterVehicle = body(&raw)?;
    created(s.register_vehicle(o, &b.plate, b.tag_id.as_deref(), b.class)?)
}

async fn report_loss(State(s): AppState, h: HeaderMap, Path(raw): Path<String>) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let v: VehicleId = id(&raw, "vehicle")?;
    created(s.report_loss(o, v)?)
}

async fn set_tag(State(s): AppState, h: HeaderMap, Path(raw): Path<String>, b: Bytes) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    let v: VehicleId = id(&raw, "vehicle")?;
    let b: TagStateWire = body(&b)?;
    ok(s.set_tag_active(Some(o), v, b.active)?)
}

async fn my_reports(State(s): AppState, h: HeaderMap) -> ApiResult {
    let o = s.require_user(bearer(&h))?;
    ok(s.reports_of(o))
}

// ---- admin --------------------------------------------------------------

async fn admin_users(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    ok(s.users())
}

async fn admin_patch_user(State(s): AppState, h: HeaderMap, Path(raw): Path<String>, b: Bytes) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let o: OwnerId = id(&raw, "user")?;
    let b: UpdateUser = body(&b)?;
    ok(s.update_user(o, b.name, b.email)?)
}

async fn admin_delete_user(State(s): AppState, h: HeaderMap, Path(raw): Path<String>) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let o: OwnerId = id(&raw, "user")?;
    s.remove_user(o)?;
    no_content()
}

async fn admin_credit(State(s): AppState, h: HeaderMap, Path(raw): Path<String>, b: Bytes) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let o: OwnerId = id(&raw, "user")?;
    let b: TopUp = body(&b)?;
    ok(s.admin_credit(o, b.amount)?)
}

async fn admin_reports(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    ok(s.report_summary())
}

async fn admin_respond(State(s): AppState, h: HeaderMap, Path(raw): Path<String>, b: Bytes) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let r: ReportId = id(&raw, "report")?;
    let b: Respond = body(&b)?;
    ok(s.respond(r, &b.response)?)
}

async fn admin_close(State(s): AppState, h: HeaderMap, Path(raw): Path<String>) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let r: ReportId = id(&raw, "report")?;
    ok(s.close_report(r)?)
}

async fn admin_vehicles(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    ok(s.all_vehicles())
}

async fn admin_track(State(s): AppState, h: HeaderMap, Path(raw): Path<String>) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let v: VehicleId = id(&raw, "vehicle")?;
    ok(s.track(v)?)
}

async fn admin_set_tag(State(s): AppState, h: HeaderMap, Path(raw): Path<String>, b: Bytes) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let v: VehicleId = id(&raw, "vehicle")?;
    let b: TagStateWire = body(&b)?;
    ok(s.set_tag_active(None, v, b.active)?)
}

async fn admin_alerts(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    ok(s.alerts())
}

async fn admin_incidents(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    ok(s.incidents())
}

async fn admin_directory(State(s): AppState, h: HeaderMap, b: Bytes) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let b: DirectoryWire = body(&b)?;
    s.add_directory_entry(&b.plate, &b.name, &b.email)?;
    no_content()
}

async fn admin_stats(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    ok(s.registry_stats())
}

async fn admin_sweep(State(s): AppState, h: HeaderMap, b: Bytes) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let b: Sweep = if b.is_empty() { Sweep::default() } else { body(&b)? };
    ok(s.sweep(b.now)?)
}

async fn admin_drain(State(s): AppState, h: HeaderMap) -> ApiResult {
    s.require_admin(bearer(&h))?;
    let svc = s.clone();
    let report = tokio::task::spawn_blocking(move || svc.drain_outbox(&mut FileTransport::new(svc.outbox_dir())))
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e)))??;
    ok(report)
}

// ---- plazas -------------------------------------------------------------

async fn ingest(State(s): AppState, h: HeaderMap, raw: Bytes) -> ApiResult {
    let key = h.get(PLAZA_KEY_HEADER).and_then(|v| v.to_str().ok()).map(str::to_owned);
    // reject unknown keys before looking at the body
    if !key.as_deref().is_some_and(|k| s.config().plaza_keys.values().any(|v| v == k)) {
        return Err(ServiceError::Unauthorized("missing or unknown plaza key".into()).into());
    }
    let wire: PassageWire = body(&raw)?;
    let svc = s.clone();
    // scene decoding runs the plate reader; keep it off the async workers
    let outcome = tokio::task::spawn_blocking(move || svc.ingest(wire, key.as_deref()))
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e)))??;
    ok(outcome)
}
