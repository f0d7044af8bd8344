use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use tollgate_core::engine::{report_theft, sweep_overdue, Capture, EngineConfig, PassageEvent, PassageOutcome, TollEngine};
use tollgate_core::{LedgerStats, Money, PlazaId, Registry, TagId, TagState, Tick};
use tollgate_plate::GrayBitmap;
use tollgate_service::wire::{CameraWire, PassageWire};
use tollgate_service::PLAZA_KEY_HEADER;

use crate::{HttpSettings, SimError, SimVehicle, VehicleClass};

const PAYMENT_METHOD: &str = "sim-card";
const SIM_PASSWORD: &str = "sim-password";

/// One plaza event as produced by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPassage {
    pub plaza: String,
    pub seq: u64,
    pub timestamp: Tick,
    pub tag_read: Option<TagId>,
    pub camera: SimCamera,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimCamera {
    Scene(GrayBitmap),
    Reading(String),
}

/// Something the simulator can drive: the engine in-process or a service
/// over HTTP. Both must see the same command sequence for runs to agree.
pub trait SimTarget {
    /// Registers one vehicle (and its owner) or adds it to the plate directory.
    fn enroll(&mut self, vehicle: &SimVehicle, initial_balance: Money) -> Result<(), SimError>;
    fn passage(&mut self, passage: &SimPassage) -> Result<PassageOutcome, SimError>;
    fn sweep(&mut self, now: Tick) -> Result<(), SimError>;
    fn stats(&mut self) -> Result<LedgerStats, SimError>;
}

fn rejected(what: impl Into<String>, e: impl std::fmt::Display) -> SimError {
    SimError::Target {
        what: what.into(),
        reason: e.to_string(),
    }
}

/// Registry and engine in the current process.
#[derive(Debug, Clone, Default)]
pub struct EngineTarget {
    pub registry: Registry,
    pub engine: TollEngine,
}

impl EngineTarget {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            registry: Registry::new(),
            engine: TollEngine::new(config),
        }
    }
}

impl SimTarget for EngineTarget {
    fn enroll(&mut self, v: &SimVehicle, initial_balance: Money) -> Result<(), SimError> {
        let what = || format!("enrolment of vehicle {}", v.index);
        let reg = &mut self.registry;
        if v.class == VehicleClass::Unregistered {
            reg.add_directory_entry(v.plate.clone(), &format!("Sim Driver {}", v.index), &v.owner_email())
                .map_err(|e| rejected(what(), e))?;
        } else {
            let owner = reg
                .register_owner(&v.owner_name(), &v.owner_email(), format!("sim:{SIM_PASSWORD}"))
                .map_err(|e| rejected(what(), e))?;
            reg.add_payment_method(owner, PAYMENT_METHOD).map_err(|e| rejected(what(), e))?;
            if initial_balance > 0 {
                reg.credit_balance(owner, initial_balance, 0).map_err(|e| rejected(what(), e))?;
            }
            let vid = reg
                .register_vehicle(v.plate.clone(), owner, v.tag.clone())
                .map_err(|e| rejected(what(), e))?
                .vehicle_id;
            if v.class == VehicleClass::TaggedInactive {
                let tag = v.tag.as_ref().expect("tagged class");
                reg.set_tag_state(tag, TagState::Inactive).map_err(|e| rejected(what(), e))?;
            }
            if v.class == VehicleClass::Stolen {
                report_theft(reg, vid, 0).map_err(|e| rejected(what(), e))?;
            }
        }
        reg.take_uncommitted();
        Ok(())
    }

    fn passage(&mut self, p: &SimPassage) -> Result<PassageOutcome, SimError> {
        let event = PassageEvent {
            plaza_id: PlazaId::new(p.plaza.clone()),
            timestamp: p.timestamp,
            tag_read: p.tag_read.clone(),
            camera: Some(match &p.camera {
                SimCamera::Scene(img) => Capture::Scene(img.clone()),
                SimCamera::Reading(t) => Capture::Reading(t.clone()),
            }),
            delivery_key: Some(format!("{}:{}", p.plaza, p.seq)),
        };
        let out = self
            .engine
            .process_passage(&mut self.registry, &event)
            .map_err(|e| rejected(format!("passage {}", p.seq), e))?;
        self.registry.take_uncommitted();
        Ok(out)
    }

    fn sweep(&mut self, now: Tick) -> Result<(), SimError> {
        sweep_overdue(&mut self.registry, &self.engine.config, now).map_err(|e| rejected("sweep", e))?;
        self.registry.take_uncommitted();
        Ok(())
    }

    fn stats(&mut self) -> Result<LedgerStats, SimError> {
        Ok(self.registry.stats())
    }
}

/// A running service reached over its JSON API.
#[derive(Debug)]
pub struct HttpTarget {
    client: Client,
    base: String,
    admin_token: String,
    settings: HttpSettings,
}

impl HttpTarget {
    /// Logs in as the configured admin; fails with `TargetUnavailable` when
    /// nothing answers at `base_url`.
    pub fn connect(base_url: &str, settings: HttpSettings) -> Result<Self, SimError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| SimError::TargetUnavailable(e.to_string()))?;
        let mut target = Self {
            client,
            base: base_url.trim_end_matches('/').to_string(),
            admin_token: String::new(),
            settings,
        };
        target
            .client
            .get(format!("{}/api/health", target.base))
            .send()
            .map_err(|e| SimError::TargetUnavailable(format!("{}: {e}", target.base)))?;
        let login: Value = target.call(
            "admin login",
            reqwest::Method::POST,
            "/api/auth/login",
            None,
            Some(json!({"email": target.settings.admin_email, "password": target.settings.admin_password})),
        )?;
        target.admin_token = login["token"].as_str().unwrap_or_default().to_string();
        Ok(target)
    }

    fn call<T: DeserializeOwned>(
        &self,
        what: &str,
        method: reqwest::Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> Result<T, SimError> {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        self.finish(what, req)
    }

    fn finish<T: DeserializeOwned>(&self, what: &str, req: reqwest::blocking::RequestBuilder) -> Result<T, SimError> {
        let resp = req.send().map_err(|e| SimError::TargetUnavailable(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| SimError::TargetUnavailable(e.to_string()))?;
        if !status.is_success() {
            return Err(rejected(what, format!("{status}: {text}")));
        }
        let text = if status == StatusCode::NO_CONTENT || text.is_empty() {
            "null"
        } else {
            &text
        };
        serde_json::from_str(text).map_err(|e| rejected(what, e))
    }

    fn admin<T: DeserializeOwned>(&self, what: &str, method: reqwest::Method, path: &str, body: Option<Value>) -> Result<T, SimError> {
        self.call(what, method, path, Some(&self.admin_token), body)
    }
}

impl SimTarget for HttpTarget {
    fn enroll(&mut self, v: &SimVehicle, initial_balance: Money) -> Result<(), SimError> {
        use reqwest::Method;
        let what = format!("enrolment of vehicle {}", v.index);
        if v.class == VehicleClass::Unregistered {
            let body = json!({"plate": v.plate.normalized(), "name": format!("Sim Driver {}", v.index), "email": v.owner_email()});
            let _: Value = self.admin(&what, Method::POST, "/api/admin/directory", Some(body))?;
            return Ok(());
        }
        let creds = json!({"email": v.owner_email(), "password": SIM_PASSWORD});
        let _: Value = self.call(
            &what,
            Method::POST,
            "/api/users",
            None,
            Some(json!({"name": v.owner_name(), "email": v.owner_email(), "password": SIM_PASSWORD})),
        )?;
        let session: Value = self.call(&what, Method::POST, "/api/auth/login", None, Some(creds))?;
        let token = session["token"].as_str().unwrap_or_default().to_string();
        let t = Some(token.as_str());
        let _: Value = self.call(&what, Method::POST, "/api/payment-methods", t, Some(json!({"method": PAYMENT_METHOD})))?;
        if initial_balance > 0 {
            let _: Value = self.call(&what, Method::POST, "/api/balance/top-up", t, Some(json!({"amount": initial_balance})))?;
        }
        let body = json!({"plate": v.plate.normalized(), "tag_id": v.tag.as_ref().map(|t| t.as_str())});
        let vehicle: Value = self.call(&what, Method::POST, "/api/vehicles", t, Some(body))?;
        let vid = vehicle["vehicle_id"].as_str().unwrap_or_default().to_string();
        if v.class == VehicleClass::TaggedInactive {
            let _: Value = self.call(&what, Method::POST, &format!("/api/vehicles/{vid}/tag"), t, Some(json!({"active": false})))?;
        }
        if v.class == VehicleClass::Stolen {
            let _: Value = self.call(&what, Method::POST, &format!("/api/vehicles/{vid}/report-loss"), t, None)?;
        }
        let _: Value = self.call(&what, Method::POST, "/api/auth/logout", t, None)?;
        Ok(())
    }

    fn passage(&mut self, p: &SimPassage) -> Result<PassageOutcome, SimError> {
        let key = self
            .settings
            .plaza_keys
            .get(&p.plaza)
            .ok_or_else(|| SimError::BadConfig(format!("no plaza key configured for {}", p.plaza)))?;
        let wire = PassageWire {
            plaza_id: p.plaza.clone(),
            seq: Some(p.seq),
            idempotency_key: None,
            timestamp: p.timestamp,
            tag_read: p.tag_read.as_ref().map(|t| t.as_str().to_string()),
            camera: Some(match &p.camera {
                SimCamera::Scene(img) => CameraWire::scene(img),
                SimCamera::Reading(t) => CameraWire::Reading(t.clone()),
            }),
        };
        let req = self
            .client
            .post(format!("{}/api/plaza/events", self.base))
            .header(PLAZA_KEY_HEADER, key)
            .json(&wire);
        self.finish(&format!("passage {}", p.seq), req)
    }

    fn sweep(&mut self, now: Tick) -> Result<(), SimError> {
        let _: Value = self.admin("sweep", reqwest::Method::POST, "/api/admin/sweep", Some(json!({"now": now})))?;
        Ok(())
    }

    fn stats(&mut self) -> Result<LedgerStats, SimError> {
        self.admin("stats", reqwest::Method::GET, "/api/admin/stats", None)
    }
}
