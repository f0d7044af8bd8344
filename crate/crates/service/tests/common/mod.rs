#![allow(dead_code)]

use std::sync::Arc;

use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::Method;
use serde_json::{json, Value};
use tempfile::TempDir;
use tollgate_core::engine::ManualClock;
use tollgate_service::{spawn_background, AdminCredentials, HasherKind, RunningServer, Service, ServiceConfig};

pub const PLAZA: &str = "north";
pub const PLAZA_KEY: &str = "north-secret";
pub const ADMIN: (&str, &str) = ("admin@tollgate.test", "admin-pass");

pub fn config(dir: &std::path::Path) -> ServiceConfig {
    ServiceConfig {
        data_dir: dir.to_path_buf(),
        plaza_keys: [(PLAZA.to_string(), PLAZA_KEY.to_string()), ("south".into(), "south-secret".into())]
            .into_iter()
            .collect(),
        admin: Some(AdminCredentials {
            email: ADMIN.0.into(),
            password: ADMIN.1.into(),
        }),
        password_hasher: HasherKind::Stub,
        session_ttl_secs: 600,
        ..ServiceConfig::default()
    }
}

pub struct Fixture {
    pub dir: TempDir,
    pub clock: Arc<ManualClock>,
    pub server: RunningServer,
    pub http: Client,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let clock = Arc::new(ManualClock::new(1_000));
        let service = Arc::new(Service::open_with_clock(config(dir.path()), clock.clone()).unwrap());
        let server = spawn_background(service).unwrap();
        Self {
            dir,
            clock,
            server,
            http: Client::new(),
        }
    }

    pub fn service(&self) -> &Service {
        &self.server.service
    }

    pub fn req(&self, method: &str, path: &str, token: Option<&str>) -> RequestBuilder {
        let m = Method::from_bytes(method.as_bytes()).unwrap();
        let mut r = self.http.request(m, format!("{}{path}", self.server.base_url()));
        if let Some(t) = token {
            r = r.bearer_auth(t);
        }
        r
    }

    pub fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> (u16, Value) {
        let mut r = self.req(method, path, token);
        if let Some(b) = body {
            r = r.json(&b);
        }
        parse(r.send().unwrap())
    }

    /// Registers and logs in; returns (owner id string, token).
    pub fn user(&self, name: &str) -> (String, String) {
        let email = format!("{}@example.com", name.to_lowercase());
        let (st, v) = self.call(
            "POST",
            "/api/users",
            None,
            Some(json!({"name": name, "email": email, "password": "pw-1234"})),
        );
        assert_eq!(st, 201, "{v}");
        (v["owner_id"].as_str().unwrap().to_string(), self.login(&email, "pw-1234"))
    }

    pub fn login(&self, email: &str, password: &str) -> String {
        let (st, v) = self.call("POST", "/api/auth/login", None, Some(json!({"email": email, "password": password})));
        assert_eq!(st, 200, "{v}");
        v["token"].as_str().unwrap().to_string()
    }

    pub fn admin(&self) -> String {
        self.login(ADMIN.0, ADMIN.1)
    }

    pub fn passage(&self, body: Value) -> (u16, Value) {
        parse(
            self.req("POST", "/api/plaza/events", None)
                .header("x-plaza-key", PLAZA_KEY)
                .json(&body)
                .send()
                .unwrap(),
        )
    }
}

pub fn parse(r: Response) -> (u16, Value) {
    let st = r.status().as_u16();
    let text = r.text().unwrap();
    let v = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap() };
    (st, v)
}
