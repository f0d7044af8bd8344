use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::Serialize;
use tollgate_core::engine::{
    close_report, pay_invoice, queue, report_theft, respond_to_report, sweep_overdue, Clock, Message, PassageOutcome, TollEngine,
};
use tollgate_core::{
    normalize_plate, AuthorityAlert, LedgerStats, Incident, Invoice, InvoiceId, ModelError, Money, Notification,
    NotificationKind, OwnerAccount, OwnerId, PasswordHasher, ReportId, ReportState,
    Registry, SaltedSha256, StubHasher, TagId, TagState, TheftReport, Tick, Transaction, VehicleId,
    VehicleRecord, AUTHORITY_CHANNEL,
};

use crate::config::{HasherKind, ServiceConfig};
use crate::journal::Journal;
use crate::outbox::{DrainReport, Transport};
use crate::sessions::{random_token, Role, Session, Sessions, SystemClock};
use crate::wire::PassageWire;
use crate::ServiceError;

pub const OUTBOX_DIR: &str = "outbox";
const RECOVERY_TTL_SECS: u64 = 900;

/// Account as shown over the API (no password hash).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OwnerView {
    pub owner_id: OwnerId,
    pub name: String,
    pub email: String,
    pub balance: Money,
    pub payment_methods: Vec<String>,
    pub guest: bool,
}

impl From<&OwnerAccount> for OwnerView {
    fn from(o: &OwnerAccount) -> Self {
        Self {
            owner_id: o.owner_id,
            name: o.name.clone(),
            email: o.email.clone(),
            balance: o.balance,
            payment_methods: o.payment_methods.clone(),
            guest: o.guest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub total: usize,
    pub open: usize,
    pub responded: usize,
    pub closed: usize,
    pub reports: Vec<TheftReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackView {
    pub vehicle: VehicleRecord,
    pub alerts: Vec<AuthorityAlert>,
}

struct State {
    registry: Registry,
    journal: Journal,
    /// Latest logical tick seen; commands without their own time use it.
    now: Tick,
}

struct Recovery {
    owner: OwnerId,
    expires_at: u64,
}

/// The service core. HTTP handlers are thin wrappers over these methods.
///
/// All writes go through one lock, which gives the journal a total order
/// and serializes commands per owner as a special case.
pub struct Service {
    config: ServiceConfig,
    engine: TollEngine,
    hasher: Box<dyn PasswordHasher>,
    wall: Arc<dyn Clock>,
    state: Mutex<State>,
    sessions: Mutex<Sessions>,
    recoveries: Mutex<HashMap<String, Recovery>>,
    drain_lock: Mutex<()>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl Service {
    /// Opens the data directory and replays the journal.
    pub fn open(config: ServiceConfig) -> Result<Self, ServiceError> {
        Self::open_with_clock(config, Arc::new(SystemClock))
    }

    pub fn open_with_clock(config: ServiceConfig, wall: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        config.validate()?;
        let (journal, records) = Journal::open(&config.data_dir)?;
        let now = records.iter().map(|r| r.timestamp).max().unwrap_or(0);
        let registry = Registry::replay(records.iter().flat_map(|r| r.events.iter())).map_err(|e| {
            ServiceError::CorruptJournal {
                last_good_seq: 0,
                reason: format!("replay failed: {e}"),
            }
        })?;
        let hasher: Box<dyn PasswordHasher> = match config.password_hasher {
            HasherKind::Sha256 => Box::new(SaltedSha256),
            HasherKind::Stub => Box::new(StubHasher),
        };
        let engine = TollEngine {
            config: config.engine.clone(),
            schedule: config.schedule.clone(),
            ..TollEngine::default()
        };
        log::info!("replayed {} journal records", journal.last_seq());
        Ok(Self {
            config,
            engine,
            hasher,
            wall,
            state: Mutex::new(State { registry, journal, now }),
            sessions: Mutex::new(Sessions::default()),
            recoveries: Mutex::new(HashMap::new()),
            drain_lock: Mutex::new(()),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn engine(&self) -> &TollEngine {
        &self.engine
    }

    /// Copy of the current registry.
    pub fn registry(&self) -> Registry {
        lock(&self.state).registry.clone()
    }

    pub fn journal_seq(&self) -> u64 {
        lock(&self.state).journal.last_seq()
    }

    pub fn now(&self) -> Tick {
        lock(&self.state).now
    }

    fn read<T>(&self, f: impl FnOnce(&Registry) -> T) -> T {
        f(&lock(&self.state).registry)
    }

    /// Runs a command and journals the events it emitted as one record. On
    /// failure, partially applied events are rolled back by replaying the
    /// journal.
    fn exec<T>(
        &self,
        at: Option<Tick>,
        f: impl FnOnce(&mut Registry, Tick) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let mut st = lock(&self.state);
        let now = at.map_or(st.now, |t| t.max(st.now));
        let res = f(&mut st.registry, at.unwrap_or(now));
        let events = st.registry.take_uncommitted();
        match res {
            Ok(v) => {
                if !events.is_empty() {
                    if let Err(e) = st.journal.append(now, events) {
                        log::error!("journal append failed, reloading: {e}");
                        self.reload(&mut st)?;
                        return Err(e);
                    }
                }
                st.now = now;
                Ok(v)
            }
            Err(e) => {
                if !events.is_empty() {
                    self.reload(&mut st)?;
                }
                Err(e)
            }
        }
    }

    fn reload(&self, st: &mut State) -> Result<(), ServiceError> {
        let records = Journal::read(st.journal.path())?;
        st.registry = Registry::replay(records.iter().flat_map(|r| r.events.iter()))?;
        Ok(())
    }

    // ---- sessions -------------------------------------------------------

    pub fn login(&self, email: &str, password: &str) -> Result<Session, ServiceError> {
        let denied = || ServiceError::Unauthorized("invalid email or password".into());
        let expires = self.wall.now() + self.config.session_ttl_secs;
        if let Some(admin) = &self.config.admin {
            if admin.email.eq_ignore_ascii_case(email.trim()) {
                if admin.password != password {
                    return Err(denied());
                }
                return Ok(lock(&self.sessions).open(Role::Admin, None, expires));
            }
        }
        let owner = self.read(|r| r.owner_by_email(email).cloned()).ok_or_else(denied)?;
        if owner.guest || !self.hasher.verify(password, &owner.password_hash) {
            return Err(denied());
        }
        Ok(lock(&self.sessions).open(Role::User, Some(owner.owner_id), expires))
    }

    pub fn logout(&self, token: &str) {
        lock(&self.sessions).close(token);
    }

    pub fn authenticate(&self, token: Option<&str>) -> Result<Session, ServiceError> {
        let token = token.ok_or_else(|| ServiceError::Unauthorized("missing bearer token".into()))?;
        let session = lock(&self.sessions)
            .get(token, self.wall.now())
            .ok_or_else(|| ServiceError::Unauthorized("session expired or unknown".into()))?;
        // a removed owner's sessions die with the account
        if let Some(o) = session.owner_id {
            if self.read(|r| r.owner(o).is_err()) {
                lock(&self.sessions).close(token);
                return Err(ServiceError::Unauthorized("account no longer exists".into()));
            }
        }
        Ok(session)
    }

    pub fn require_user(&self, token: Option<&str>) -> Result<OwnerId, ServiceError> {
        let s = self.authenticate(token)?;
        match (s.role, s.owner_id) {
            (Role::User, Some(o)) => Ok(o),
            _ => Err(ServiceError::Forbidden("user role required".into())),
        }
    }

    pub fn require_admin(&self, token: Option<&str>) -> Result<(), ServiceError> {
        match self.authenticate(token)?.role {
            Role::Admin => Ok(()),
            Role::User => Err(ServiceError::Forbidden("admin role required".into())),
        }
    }

    fn hash(&self, password: &str) -> Result<String, ServiceError> {
        if password.len() < 4 {
            return Err(ServiceError::Invalid("password must have at least 4 characters".into()));
        }
        Ok(self.hasher.hash(password, &random_token()[..16]))
    }

    // ---- user commands --------------------------------------------------

    pub fn register_user(&self, name: &str, email: &str, password: &str) -> Result<OwnerView, ServiceError> {
        if name.trim().is_empty() {
            return Err(ServiceError::Invalid("name is empty".into()));
        }
        if self.config.admin.as_ref().is_some_and(|a| a.email.eq_ignore_ascii_case(email.trim())) {
            return Err(ModelError::DuplicateEmail(email.to_string()).into());
        }
        let hash = self.hash(password)?;
        self.exec(None, |r, _| {
            let id = r.register_owner(name.trim(), email, hash)?;
            Ok(OwnerView::from(r.owner(id)?))
        })
    }

    pub fn account(&self, owner: OwnerId) -> Result<OwnerView, ServiceError> {
        self.read(|r| Ok(OwnerView::from(r.owner(owner)?)))
    }

    pub fn update_user(&self, owner: OwnerId, name: Option<String>, email: Option<String>) -> Result<OwnerView, ServiceError> {
        if name.as_deref().is_some_and(|n| n.trim().is_empty()) {
            return Err(ServiceError::Invalid("name is empty".into()));
        }
        self.exec(None, |r, _| {
            r.update_owner(owner, name, email)?;
            Ok(OwnerView::from(r.owner(owner)?))
        })
    }

    /// Also ends every session of the account.
    pub fn change_password(&self, owner: OwnerId, old: &str, new: &str) -> Result<(), ServiceError> {
        let stored = self.read(|r| r.owner(owner).map(|o| o.password_hash.clone()))?;
        if !self.hasher.verify(old, &stored) {
            return Err(ServiceError::Forbidden("current password is wrong".into()));
        }
        let hash = self.hash(new)?;
        self.exec(None, |r, _| Ok(r.change_password(owner, hash)?))?;
        lock(&self.sessions).revoke_owner(owner);
        Ok(())
    }

    /// Mails a single-use reset token. Unknown emails are accepted silently
    /// so the endpoint does not reveal which addresses exist.
    pub fn recover_password(&self, email: &str) -> Result<(), ServiceError> {
        let Some(owner) = self.read(|r| r.owner_by_email(email).filter(|o| !o.guest).cloned()) else {
            return Ok(());
        };
        let token = random_token();
        let key = format!("recover-{}", &token[..16]);
        self.exec(None, |r, now| {
            queue(
                r,
                Message {
                    recipient: owner.email.clone(),
                    owner_id: Some(owner.owner_id),
                    kind: NotificationKind::PasswordRecovery,
                    subject: "Password recovery".into(),
                    body: format!(
                        "Use this single-use token to set a new password within {} minutes:\n\n{token}\n",
                        RECOVERY_TTL_SECS / 60
                    ),
                    key: &key,
                },
                now,
            )?;
            Ok(())
        })?;
        lock(&self.recoveries).insert(
            token,
            Recovery {
                owner: owner.owner_id,
                expires_at: self.wall.now() + RECOVERY_TTL_SECS,
            },
        );
        Ok(())
    }

    pub fn reset_password(&self, token: &str, new: &str) -> Result<(), ServiceError> {
        let hash = self.hash(new)?;
        let rec = lock(&self.recoveries)
            .remove(token)
            .filter(|r| r.expires_at > self.wall.now())
            .ok_or_else(|| ServiceError::Unauthorized("recovery token is invalid or used".into()))?;
        self.exec(None, |r, _| Ok(r.change_password(rec.owner, hash)?))?;
        lock(&self.sessions).revoke_owner(rec.owner);
        Ok(())
    }

    pub fn add_payment_method(&self, owner: OwnerId, method: &str) -> Result<OwnerView, ServiceError> {
        if method.trim().is_empty() {
            return Err(ServiceError::Invalid("payment method is empty".into()));
        }
        self.exec(None, |r, _| {
            r.add_payment_method(owner, method.trim())?;
            Ok(OwnerView::from(r.owner(owner)?))
        })
    }

    fn require_payment_method(r: &Registry, owner: OwnerId) -> Result<(), ServiceError> {
        if r.owner(owner)?.payment_methods.is_empty() {
            return Err(ServiceError::Conflict("add a payment method first".into()));
        }
        Ok(())
    }

    /// Prepaid credit bought through the owner's payment method.
    pub fn top_up(&self, owner: OwnerId, amount: Money) -> Result<OwnerView, ServiceError> {
        self.exec(None, |r, now| {
            Self::require_payment_method(r, owner)?;
            r.credit_balance(owner, amount, now)?;
            Ok(OwnerView::from(r.owner(owner)?))
        })
    }

    /// Most recent first.
    pub fn transactions(&self, owner: OwnerId, limit: Option<usize>) -> Vec<Transaction> {
        self.read(|r| {
            r.transactions_of(owner)
                .rev()
                .take(limit.unwrap_or(usize::MAX))
                .cloned()
                .collect()
        })
    }

    pub fn invoices(&self, owner: OwnerId) -> Vec<Invoice> {
        self.read(|r| r.invoices_of(owner).cloned().collect())
    }

    pub fn pay_invoice(&self, owner: OwnerId, invoice: InvoiceId) -> Result<Transaction, ServiceError> {
        self.exec(None, |r, now| {
            if r.invoice(invoice)?.owner_id != owner {
                return Err(ModelError::UnknownInvoice(invoice).into());
            }
            Self::require_payment_method(r, owner)?;
            Ok(pay_invoice(r, invoice, now)?)
        })
    }

    pub fn notifications(&self, session: &Session) -> Vec<Notification> {
        self.read(|r| match session.owner_id {
            Some(o) => r.notifications_for(o).cloned().collect(),
            None => r.notifications().filter(|n| n.recipient == AUTHORITY_CHANNEL).cloned().collect(),
        })
    }

    pub fn vehicles(&self, owner: OwnerId) -> Vec<VehicleRecord> {
        self.read(|r| r.vehicles_of(owner).cloned().collect())
    }

    pub fn register_vehicle(
        &self,
        owner: OwnerId,
        plate: &str,
        tag: Option<&str>,
        class: Option<String>,
    ) -> Result<VehicleRecord, ServiceError> {
        let plate = normalize_plate(plate).map_err(ModelError::from)?;
        let tag = tag.map(TagId::parse).transpose()?;
        self.exec(None, |r, _| Ok(r.register_vehicle_class(plate, owner, tag, class)?.clone()))
    }

    fn own_vehicle(r: &Registry, owner: OwnerId, vehicle: VehicleId) -> Result<(), ServiceError> {
        match r.vehicle(vehicle) {
            Ok(v) if v.owner_id == owner => Ok(()),
            _ => Err(ModelError::UnknownVehicle(vehicle).into()),
        }
    }

    pub fn report_loss(&self, owner: OwnerId, vehicle: VehicleId) -> Result<TheftReport, ServiceError> {
        self.exec(None, |r, now| {
            Self::own_vehicle(r, owner, vehicle)?;
            Ok(report_theft(r, vehicle, now)?)
        })
    }

    pub fn reports_of(&self, owner: OwnerId) -> Vec<TheftReport> {
        self.read(|r| {
            r.reports()
                .filter(|rep| r.vehicle(rep.vehicle_id).is_ok_and(|v| v.owner_id == owner))
                .cloned()
                .collect()
        })
    }

    pub fn set_tag_active(&self, owner: Option<OwnerId>, vehicle: VehicleId, active: bool) -> Result<VehicleRecord, ServiceError> {
        self.exec(None, |r, _| {
            if let Some(o) = owner {
                Self::own_vehicle(r, o, vehicle)?;
            }
            let tag = r
                .vehicle(vehicle)?
                .tag
                .clone()
                .ok_or_else(|| ServiceError::Conflict(format!("{vehicle} has no tag")))?;
            let state = if active { TagState::Active } else { TagState::Inactive };
            r.set_tag_state(&tag.tag_id, state)?;
            Ok(r.vehicle(vehicle)?.clone())
        })
    }

    // ---- admin ----------------------------------------------------------

    pub fn users(&self) -> Vec<OwnerView> {
        self.read(|r| r.owners().map(OwnerView::from).collect())
    }

    pub fn remove_user(&self, owner: OwnerId) -> Result<(), ServiceError> {
        self.exec(None, |r, _| Ok(r.remove_owner(owner)?))?;
        lock(&self.sessions).revoke_owner(owner);
        Ok(())
    }

    pub fn report_summary(&self) -> ReportSummary {
        self.read(|r| {
            let reports: Vec<TheftReport> = r.reports().cloned().collect();
            let count = |s: ReportState| reports.iter().filter(|x| x.state == s).count();
            ReportSummary {
                total: reports.len(),
                open: count(ReportState::Open),
                responded: count(ReportState::Responded),
                closed: count(ReportState::Closed),
                reports,
            }
        })
    }

    pub fn respond(&self, report: ReportId, response: &str) -> Result<TheftReport, ServiceError> {
        if response.trim().is_empty() {
            return Err(ServiceError::Invalid("response is empty".into()));
        }
        self.exec(None, |r, now| Ok(respond_to_report(r, report, response, now)?))
    }

    pub fn close_report(&self, report: ReportId) -> Result<TheftReport, ServiceError> {
        self.exec(None, |r, _| {
            close_report(r, report)?;
            Ok(r.report(report)?.clone())
        })
    }

    pub fn track(&self, vehicle: VehicleId) -> Result<TrackView, ServiceError> {
        self.read(|r| {
            Ok(TrackView {
                vehicle: r.vehicle(vehicle)?.clone(),
                alerts: r.alerts_for(vehicle).cloned().collect(),
            })
        })
    }

    pub fn alerts(&self) -> Vec<AuthorityAlert> {
        self.read(|r| r.alerts().to_vec())
    }

    pub fn incidents(&self) -> Vec<Incident> {
        self.read(|r| r.incidents().to_vec())
    }

    pub fn all_vehicles(&self) -> Vec<VehicleRecord> {
        self.read(|r| r.vehicles().cloned().collect())
    }

    pub fn add_directory_entry(&self, plate: &str, name: &str, email: &str) -> Result<(), ServiceError> {
        let plate = normalize_plate(plate).map_err(ModelError::from)?;
        self.exec(None, |r, _| Ok(r.add_directory_entry(plate, name, email)?))
    }

    /// Credits an account directly (e.g. a cash payment at a plaza office).
    pub fn admin_credit(&self, owner: OwnerId, amount: Money) -> Result<OwnerView, ServiceError> {
        self.exec(None, |r, now| {
            r.credit_balance(owner, amount, now)?;
            Ok(OwnerView::from(r.owner(owner)?))
        })
    }

    /// Fines overdue invoices at `now` (default: the latest tick seen).
    pub fn sweep(&self, now: Option<Tick>) -> Result<Vec<Transaction>, ServiceError> {
        let cfg = self.engine.config.clone();
        self.exec(now, |r, t| Ok(sweep_overdue(r, &cfg, t)?))
    }

    // ---- plazas ---------------------------------------------------------

    /// Checks the plaza's pre-shared key.
    pub fn authenticate_plaza(&self, plaza_id: &str, key: Option<&str>) -> Result<(), ServiceError> {
        match (self.config.plaza_keys.get(plaza_id), key) {
            (Some(expected), Some(given)) if expected == given => Ok(()),
            _ => Err(ServiceError::Unauthorized(format!("bad key for plaza {plaza_id:?}"))),
        }
    }

    pub fn ingest(&self, wire: PassageWire, key: Option<&str>) -> Result<PassageOutcome, ServiceError> {
        self.authenticate_plaza(&wire.plaza_id, key)?;
        let event = wire.into_event()?;
        let at = event.timestamp;
        self.exec(Some(at), |r, _| Ok(self.engine.process_passage(r, &event)?))
    }

    // ---- outbox ---------------------------------------------------------

    /// Sends every queued notification, then journals its delivery. A
    /// failed send leaves the message queued for the next drain.
    pub fn drain_outbox(&self, transport: &mut dyn Transport) -> Result<DrainReport, ServiceError> {
        let _one_drain_at_a_time = lock(&self.drain_lock);
        let queued: Vec<Notification> = self.read(|r| r.queued_notifications().cloned().collect());
        let mut report = DrainReport::default();
        for n in queued {
            if let Err(e) = transport.send(&n) {
                log::warn!("{e}");
                report.failed += 1;
                continue;
            }
            self.exec(None, |r, _| match r.mark_delivered(n.notif_id) {
                Ok(()) | Err(ModelError::AlreadyDelivered(_)) => Ok(()),
                Err(e) => Err(e.into()),
            })?;
            report.delivered += 1;
        }
        Ok(report)
    }

    pub fn outbox_dir(&self) -> std::path::PathBuf {
        self.config.data_dir.join(OUTBOX_DIR)
    }

    pub fn registry_stats(&self) -> LedgerStats {
        self.read(Registry::stats)
    }
}
