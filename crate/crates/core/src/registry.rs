use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::engine::PassageOutcome;
use crate::events::DomainEvent;
use crate::ids::{AlertId, IncidentId, InvoiceId, NotificationId, OwnerId, PlazaId, ReportId, TagId, TxId, VehicleId};
use crate::model::{
    AuthorityAlert, DirectoryEntry, Incident, Invoice, InvoiceState, Money, Notification, NotificationState,
    OwnerAccount, ReportState, RfidTag, TagState, TheftReport, Tick, Transaction, TxKind, VehicleRecord,
    VehicleStatus, WatchEntry,
};
use crate::{ModelError, PlateString};

/// One processed passage, in arrival order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageRecord {
    pub plaza_id: PlazaId,
    pub at: Tick,
    pub delivery_key: Option<String>,
    pub outcome: PassageOutcome,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerStats {
    /// Sum of TollDeduction amounts.
    pub toll_revenue: Money,
    pub invoices_issued: usize,
    pub invoice_payments: Money,
    pub fines: usize,
    pub fine_total: Money,
    pub alerts: usize,
    pub incidents: usize,
    pub total_balance: Money,
}

#[derive(Debug, Default, Clone, PartialEq)]
struct Counters {
    owner: u64,
    vehicle: u64,
    tx: u64,
    invoice: u64,
    notification: u64,
    report: u64,
    alert: u64,
    incident: u64,
}

fn bump(counter: &mut u64, id: u64) {
    *counter = (*counter).max(id + 1);
}

/// In-memory state. Every mutation is a [`DomainEvent`] passed through
/// [`Registry::apply`]; events applied via [`Registry::emit`] are also kept
/// in an uncommitted buffer for the persistence layer to drain.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Registry {
    owners: BTreeMap<OwnerId, OwnerAccount>,
    emails: HashMap<String, OwnerId>,
    vehicles: BTreeMap<VehicleId, VehicleRecord>,
    by_plate: HashMap<PlateString, VehicleId>,
    by_tag: HashMap<TagId, VehicleId>,
    directory: BTreeMap<PlateString, DirectoryEntry>,
    plazas: BTreeMap<PlazaId, Vec<WatchEntry>>,
    transactions: Vec<Transaction>,
    invoices: BTreeMap<InvoiceId, Invoice>,
    notifications: BTreeMap<NotificationId, Notification>,
    notif_by_key: HashMap<String, NotificationId>,
    delivered_keys: BTreeSet<String>,
    reports: BTreeMap<ReportId, TheftReport>,
    alerts: Vec<AuthorityAlert>,
    incidents: Vec<Incident>,
    passages: Vec<PassageRecord>,
    by_delivery_key: HashMap<String, usize>,
    next: Counters,
    uncommitted: Vec<DomainEvent>,
}

pub(crate) fn normalize_email(email: &str) -> Result<String, ModelError> {
    let e = email.trim().to_ascii_lowercase();
    match e.split_once('@') {
        Some((user, host)) if !user.is_empty() && !host.is_empty() && !e.contains(char::is_whitespace) => Ok(e),
        _ => Err(ModelError::BadEmail(email.to_string())),
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a registry from a recorded event sequence.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a DomainEvent>) -> Result<Self, ModelError> {
        let mut reg = Self::new();
        for ev in events {
            reg.apply(ev.clone())?;
        }
        Ok(reg)
    }

    /// Applies and buffers an event.
    pub fn emit(&mut self, ev: DomainEvent) -> Result<(), ModelError> {
        self.apply(ev.clone())?;
        self.uncommitted.push(ev);
        Ok(())
    }

    /// Events emitted since the last call.
    pub fn take_uncommitted(&mut self) -> Vec<DomainEvent> {
        std::mem::take(&mut self.uncommitted)
    }

    pub fn has_uncommitted(&self) -> bool {
        !self.uncommitted.is_empty()
    }

    /// Validates `ev` against the current state and applies it. On error the
    /// state is unchanged.
    pub fn apply(&mut self, ev: DomainEvent) -> Result<(), ModelError> {
        use DomainEvent as E;
        match ev {
            E::OwnerRegistered {
                owner_id,
                name,
                email,
                password_hash,
                guest,
            } => {
                let email = normalize_email(&email)?;
                if self.emails.contains_key(&email) {
                    return Err(ModelError::DuplicateEmail(email));
                }
                bump(&mut self.next.owner, owner_id.0);
                self.emails.insert(email.clone(), owner_id);
                self.owners.insert(
                    owner_id,
                    OwnerAccount {
                        owner_id,
                        name,
                        email,
                        password_hash,
                        balance: 0,
                        payment_methods: Vec::new(),
                        guest,
                    },
                );
            }
            E::OwnerUpdated { owner_id, name, email } => {
                let current = self.owner(owner_id)?.email.clone();
                let email = email.map(|e| normalize_email(&e)).transpose()?;
                if let Some(e) = &email {
                    if *e != current && self.emails.contains_key(e) {
                        return Err(ModelError::DuplicateEmail(e.clone()));
                    }
                }
                if let Some(e) = email {
                    self.emails.remove(&current);
                    self.emails.insert(e.clone(), owner_id);
                    self.owner_mut(owner_id)?.email = e;
                }
                if let Some(n) = name {
                    self.owner_mut(owner_id)?.name = n;
                }
            }
            E::PasswordChanged { owner_id, password_hash } => {
                self.owner_mut(owner_id)?.password_hash = password_hash;
            }
            E::PaymentMethodAdded { owner_id, method } => {
                self.owner_mut(owner_id)?.payment_methods.push(method);
            }
            E::BalanceCredited { owner_id, amount, .. } => {
                if amount <= 0 {
                    return Err(ModelError::NonPositiveAmount(amount));
                }
                self.owner_mut(owner_id)?.balance += amount;
            }
            E::OwnerRemoved { owner_id } => {
                let owner = self.owner(owner_id)?;
                if owner.balance != 0 || self.open_invoices(owner_id).next().is_some() {
                    return Err(ModelError::OwnerHasObligations(owner_id));
                }
                let email = owner.email.clone();
                let owned: Vec<VehicleId> = self.vehicles_of(owner_id).map(|v| v.vehicle_id).collect();
                for vid in owned {
                    let v = self.vehicles.remove(&vid).expect("listed vehicle exists");
                    self.by_plate.remove(&v.plate);
                    if let Some(t) = v.tag {
                        self.by_tag.remove(&t.tag_id);
                    }
                    for list in self.plazas.values_mut() {
                        list.retain(|w| w.vehicle_id != vid);
                    }
                }
                self.emails.remove(&email);
                self.owners.remove(&owner_id);
            }
            E::VehicleRegistered {
                vehicle_id,
                plate,
                owner_id,
                tag_id,
                class,
            } => {
                self.owner(owner_id)?;
                if self.by_plate.contains_key(&plate) {
                    return Err(ModelError::DuplicatePlate(plate));
                }
                if let Some(t) = &tag_id {
                    if self.by_tag.contains_key(t) {
                        return Err(ModelError::DuplicateTag(t.clone()));
                    }
                }
                bump(&mut self.next.vehicle, vehicle_id.0);
                self.by_plate.insert(plate.clone(), vehicle_id);
                if let Some(t) = &tag_id {
                    self.by_tag.insert(t.clone(), vehicle_id);
                }
                self.vehicles.insert(
                    vehicle_id,
                    VehicleRecord {
                        vehicle_id,
                        tag: tag_id.map(|tag_id| RfidTag {
                            tag_id,
                            plate: plate.clone(),
                            state: TagState::Active,
                        }),
                        plate,
                        owner_id,
                        class,
                        status: VehicleStatus::Normal,
                        last_seen: None,
                    },
                );
            }
            E::TagStateChanged { tag_id, state } => {
                let vid = *self.by_tag.get(&tag_id).ok_or_else(|| ModelError::UnknownTag(tag_id.clone()))?;
                let v = self.vehicles.get_mut(&vid).expect("tag index points at a vehicle");
                v.tag.as_mut().expect("indexed tag is present").state = state;
            }
            E::DirectoryEntryAdded(entry) => {
                normalize_email(&entry.email)?;
                self.directory.insert(entry.plate.clone(), entry);
            }
            E::PlazaRegistered { plaza_id } => {
                if !self.plazas.contains_key(&plaza_id) {
                    let list = self.active_watch_entries();
                    self.plazas.insert(plaza_id, list);
                }
            }
            E::TransactionRecorded(tx) => {
                if tx.amount <= 0 {
                    return Err(ModelError::NonPositiveAmount(tx.amount));
                }
                let owner = self.owner(tx.owner_id)?;
                if tx.kind == TxKind::TollDeduction && owner.balance < tx.amount {
                    return Err(ModelError::InsufficientFunds {
                        balance: owner.balance,
                        needed: tx.amount,
                    });
                }
                bump(&mut self.next.tx, tx.tx_id.0);
                // only tag-path deductions move the prepaid balance; invoice
                // payments and fines settle through a payment method
                if tx.kind == TxKind::TollDeduction {
                    self.owner_mut(tx.owner_id)?.balance -= tx.amount;
                }
                self.transactions.push(tx);
            }
            E::InvoiceIssued(inv) => {
                self.owner(inv.owner_id)?;
                if inv.amount <= 0 {
                    return Err(ModelError::NonPositiveAmount(inv.amount));
                }
                bump(&mut self.next.invoice, inv.invoice_id.0);
                self.invoices.insert(inv.invoice_id, inv);
            }
            E::InvoicePaid { invoice_id } => self.close_invoice(invoice_id, InvoiceState::Paid)?,
            E::InvoiceFined { invoice_id } => self.close_invoice(invoice_id, InvoiceState::Fined)?,
            E::NotificationQueued(n) => {
                bump(&mut self.next.notification, n.notif_id.0);
                self.notif_by_key.entry(n.idempotency_key.clone()).or_insert(n.notif_id);
                self.notifications.insert(n.notif_id, n);
            }
            E::NotificationDelivered { notif_id } => {
                let n = self
                    .notifications
                    .get_mut(&notif_id)
                    .ok_or(ModelError::UnknownNotification(notif_id))?;
                if n.state == NotificationState::Delivered {
                    return Err(ModelError::AlreadyDelivered(notif_id));
                }
                n.state = NotificationState::Delivered;
                self.delivered_keys.insert(n.idempotency_key.clone());
            }
            E::TheftReported(report) => {
                let v = self.vehicle(report.vehicle_id)?;
                if v.status == VehicleStatus::ReportedStolen {
                    return Err(ModelError::AlreadyReported(report.vehicle_id));
                }
                let entry = WatchEntry {
                    report_id: report.report_id,
                    vehicle_id: v.vehicle_id,
                    plate: v.plate.clone(),
                    tag_id: v.tag.as_ref().map(|t| t.tag_id.clone()),
                };
                bump(&mut self.next.report, report.report_id.0);
                self.vehicles.get_mut(&report.vehicle_id).expect("checked").status = VehicleStatus::ReportedStolen;
                for list in self.plazas.values_mut() {
                    list.push(entry.clone());
                }
                self.reports.insert(report.report_id, report);
            }
            E::TheftReportResponded { report_id, response } => {
                let r = self.reports.get_mut(&report_id).ok_or(ModelError::UnknownReport(report_id))?;
                if r.state == ReportState::Closed {
                    return Err(ModelError::ReportClosed(report_id));
                }
                r.state = ReportState::Responded;
                r.admin_response = Some(response);
            }
            E::TheftReportClosed { report_id } => {
                let r = self.reports.get_mut(&report_id).ok_or(ModelError::UnknownReport(report_id))?;
                if r.state == ReportState::Closed {
                    return Err(ModelError::ReportClosed(report_id));
                }
                r.state = ReportState::Closed;
                let vid = r.vehicle_id;
                if let Some(v) = self.vehicles.get_mut(&vid) {
                    v.status = VehicleStatus::Normal;
                }
                for list in self.plazas.values_mut() {
                    list.retain(|w| w.report_id != report_id);
                }
            }
            E::AlertRaised(alert) => {
                self.vehicle(alert.vehicle_id)?;
                bump(&mut self.next.alert, alert.alert_id.0);
                self.alerts.push(alert);
            }
            E::VehicleSeen { vehicle_id, plaza_id, at } => {
                let v = self
                    .vehicles
                    .get_mut(&vehicle_id)
                    .ok_or(ModelError::UnknownVehicle(vehicle_id))?;
                v.last_seen = Some((plaza_id, at));
            }
            E::IncidentLogged(incident) => {
                bump(&mut self.next.incident, incident.incident_id.0);
                self.incidents.push(incident);
            }
            E::PassageRecorded {
                plaza_id,
                at,
                delivery_key,
                outcome,
            } => {
                if let Some(k) = &delivery_key {
                    self.by_delivery_key.insert(k.clone(), self.passages.len());
                }
                self.passages.push(PassageRecord {
                    plaza_id,
                    at,
                    delivery_key,
                    outcome,
                });
            }
        }
        Ok(())
    }

    fn close_invoice(&mut self, id: InvoiceId, to: InvoiceState) -> Result<(), ModelError> {
        let inv = self.invoices.get_mut(&id).ok_or(ModelError::UnknownInvoice(id))?;
        if inv.state != InvoiceState::Open {
            return Err(ModelError::InvoiceNotOpen(id));
        }
        inv.state = to;
        Ok(())
    }

    fn active_watch_entries(&self) -> Vec<WatchEntry> {
        self.reports
            .values()
            .filter(|r| r.is_active())
            .filter_map(|r| {
                let v = self.vehicles.get(&r.vehicle_id)?;
                Some(WatchEntry {
                    report_id: r.report_id,
                    vehicle_id: v.vehicle_id,
                    plate: v.plate.clone(),
                    tag_id: v.tag.as_ref().map(|t| t.tag_id.clone()),
                })
            })
            .collect()
    }

    fn owner_mut(&mut self, id: OwnerId) -> Result<&mut OwnerAccount, ModelError> {
        self.owners.get_mut(&id).ok_or(ModelError::UnknownOwner(id))
    }

    // ---- commands -------------------------------------------------------

    pub fn register_owner(
        &mut self,
        name: &str,
        email: &str,
        password_hash: String,
    ) -> Result<OwnerId, ModelError> {
        self.add_owner(name, email, password_hash, false)
    }

    pub(crate) fn add_owner(
        &mut self,
        name: &str,
        email: &str,
        password_hash: String,
        guest: bool,
    ) -> Result<OwnerId, ModelError> {
        let owner_id = OwnerId(self.next.owner);
        self.emit(DomainEvent::OwnerRegistered {
            owner_id,
            name: name.to_string(),
            email: email.to_string(),
            password_hash,
            guest,
        })?;
        Ok(owner_id)
    }

    pub fn register_vehicle(
        &mut self,
        plate: PlateString,
        owner_id: OwnerId,
        tag_id: Option<TagId>,
    ) -> Result<&VehicleRecord, ModelError> {
        self.register_vehicle_class(plate, owner_id, tag_id, None)
    }

    pub fn register_vehicle_class(
        &mut self,
        plate: PlateString,
        owner_id: OwnerId,
        tag_id: Option<TagId>,
        class: Option<String>,
    ) -> Result<&VehicleRecord, ModelError> {
        let vehicle_id = VehicleId(self.next.vehicle);
        self.emit(DomainEvent::VehicleRegistered {
            vehicle_id,
            plate,
            owner_id,
            tag_id,
            class,
        })?;
        self.vehicle(vehicle_id)
    }

    pub fn set_tag_state(&mut self, tag_id: &TagId, state: TagState) -> Result<(), ModelError> {
        self.emit(DomainEvent::TagStateChanged {
            tag_id: tag_id.clone(),
            state,
        })
    }

    pub fn credit_balance(&mut self, owner_id: OwnerId, amount: Money, at: Tick) -> Result<(), ModelError> {
        self.emit(DomainEvent::BalanceCredited { owner_id, amount, at })
    }

    pub fn add_payment_method(&mut self, owner_id: OwnerId, method: &str) -> Result<(), ModelError> {
        self.emit(DomainEvent::PaymentMethodAdded {
            owner_id,
            method: method.to_string(),
        })
    }

    pub fn change_password(&mut self, owner_id: OwnerId, password_hash: String) -> Result<(), ModelError> {
        self.emit(DomainEvent::PasswordChanged { owner_id, password_hash })
    }

    pub fn update_owner(&mut self, owner_id: OwnerId, name: Option<String>, email: Option<String>) -> Result<(), ModelError> {
        self.emit(DomainEvent::OwnerUpdated { owner_id, name, email })
    }

    pub fn remove_owner(&mut self, owner_id: OwnerId) -> Result<(), ModelError> {
        self.emit(DomainEvent::OwnerRemoved { owner_id })
    }

    pub fn add_directory_entry(&mut self, plate: PlateString, name: &str, email: &str) -> Result<(), ModelError> {
        self.emit(DomainEvent::DirectoryEntryAdded(DirectoryEntry {
            plate,
            name: name.to_string(),
            email: email.to_string(),
        }))
    }

    pub fn register_plaza(&mut self, plaza_id: PlazaId) -> Result<(), ModelError> {
        if self.plazas.contains_key(&plaza_id) {
            return Ok(());
        }
        self.emit(DomainEvent::PlazaRegistered { plaza_id })
    }

    pub fn mark_delivered(&mut self, notif_id: NotificationId) -> Result<(), ModelError> {
        self.emit(DomainEvent::NotificationDelivered { notif_id })
    }

    // ---- id allocation for engine-built events --------------------------

    pub(crate) fn next_tx_id(&self) -> TxId {
        TxId(self.next.tx)
    }

    pub(crate) fn next_invoice_id(&self) -> InvoiceId {
        InvoiceId(self.next.invoice)
    }

    pub(crate) fn next_notification_id(&self) -> NotificationId {
        NotificationId(self.next.notification)
    }

    pub(crate) fn next_report_id(&self) -> ReportId {
        ReportId(self.next.report)
    }

    pub(crate) fn next_alert_id(&self) -> AlertId {
        AlertId(self.next.alert)
    }

    pub(crate) fn next_incident_id(&self) -> IncidentId {
        IncidentId(self.next.incident)
    }

    // ---- queries --------------------------------------------------------

    pub fn owner(&self, id: OwnerId) -> Result<&OwnerAccount, ModelError> {
        self.owners.get(&id).ok_or(ModelError::UnknownOwner(id))
    }

    pub fn owner_by_email(&self, email: &str) -> Option<&OwnerAccount> {
        let e = normalize_email(email).ok()?;
        self.emails.get(&e).and_then(|id| self.owners.get(id))
    }

    pub fn owners(&self) -> impl Iterator<Item = &OwnerAccount> {
        self.owners.values()
    }

    pub fn vehicle(&self, id: VehicleId) -> Result<&VehicleRecord, ModelError> {
        self.vehicles.get(&id).ok_or(ModelError::UnknownVehicle(id))
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &VehicleRecord> {
        self.vehicles.values()
    }

    pub fn vehicles_of(&self, owner: OwnerId) -> impl Iterator<Item = &VehicleRecord> {
        self.vehicles.values().filter(move |v| v.owner_id == owner)
    }

    pub fn lookup_by_tag(&self, tag_id: &TagId) -> Option<&VehicleRecord> {
        self.by_tag.get(tag_id).and_then(|id| self.vehicles.get(id))
    }

    pub fn lookup_by_plate(&self, plate: &PlateString) -> Option<&VehicleRecord> {
        self.by_plate.get(plate).and_then(|id| self.vehicles.get(id))
    }

    pub fn directory_entry(&self, plate: &PlateString) -> Option<&DirectoryEntry> {
        self.directory.get(plate)
    }

    pub fn directory(&self) -> impl Iterator<Item = &DirectoryEntry> {
        self.directory.values()
    }

    pub fn plazas(&self) -> impl Iterator<Item = &PlazaId> {
        self.plazas.keys()
    }

    pub fn watchlist(&self, plaza: &PlazaId) -> Result<&[WatchEntry], ModelError> {
        self.plazas
            .get(plaza)
            .map(Vec::as_slice)
            .ok_or_else(|| ModelError::UnknownPlaza(plaza.clone()))
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn transactions_of(&self, owner: OwnerId) -> impl DoubleEndedIterator<Item = &Transaction> {
        self.transactions.iter().filter(move |t| t.owner_id == owner)
    }

    pub fn invoice(&self, id: InvoiceId) -> Result<&Invoice, ModelError> {
        self.invoices.get(&id).ok_or(ModelError::UnknownInvoice(id))
    }

    pub fn invoices(&self) -> impl Iterator<Item = &Invoice> {
        self.invoices.values()
    }

    pub fn invoices_of(&self, owner: OwnerId) -> impl Iterator<Item = &Invoice> {
        self.invoices.values().filter(move |i| i.owner_id == owner)
    }

    pub fn open_invoices(&self, owner: OwnerId) -> impl Iterator<Item = &Invoice> {
        self.invoices_of(owner).filter(|i| i.state == InvoiceState::Open)
    }

    pub fn notification(&self, id: NotificationId) -> Result<&Notification, ModelError> {
        self.notifications.get(&id).ok_or(ModelError::UnknownNotification(id))
    }

    pub fn notifications(&self) -> impl Iterator<Item = &Notification> {
        self.notifications.values()
    }

    pub fn notifications_for(&self, owner: OwnerId) -> impl Iterator<Item = &Notification> {
        self.notifications.values().filter(move |n| n.owner_id == Some(owner))
    }

    pub fn queued_notifications(&self) -> impl Iterator<Item = &Notification> {
        self.notifications
            .values()
            .filter(|n| n.state == NotificationState::Queued)
    }

    pub fn notification_by_key(&self, key: &str) -> Option<&Notification> {
        self.notif_by_key.get(key).and_then(|id| self.notifications.get(id))
    }

    pub fn is_key_delivered(&self, key: &str) -> bool {
        self.delivered_keys.contains(key)
    }

    pub fn report(&self, id: ReportId) -> Result<&TheftReport, ModelError> {
        self.reports.get(&id).ok_or(ModelError::UnknownReport(id))
    }

    pub fn reports(&self) -> impl Iterator<Item = &TheftReport> {
        self.reports.values()
    }

    pub fn active_report_for(&self, vehicle: VehicleId) -> Option<&TheftReport> {
        self.reports
            .values()
            .find(|r| r.vehicle_id == vehicle && r.is_active())
    }

    pub fn alerts(&self) -> &[AuthorityAlert] {
        &self.alerts
    }

    pub fn alerts_for(&self, vehicle: VehicleId) -> impl Iterator<Item = &AuthorityAlert> {
        self.alerts.iter().filter(move |a| a.vehicle_id == vehicle)
    }

    pub fn incidents(&self) -> &[Incident] {
        &self.incidents
    }

    pub fn passages(&self) -> &[PassageRecord] {
        &self.passages
    }

    pub fn passage_by_key(&self, key: &str) -> Option<&PassageRecord> {
        self.by_delivery_key.get(key).map(|&i| &self.passages[i])
    }

    /// Money and alert totals.
    pub fn stats(&self) -> LedgerStats {
        let sum = |k: TxKind| {
            self.transactions
                .iter()
                .filter(|t| t.kind == k)
                .fold((0usize, 0 as Money), |(n, a), t| (n + 1, a + t.amount))
        };
        let (_, toll_revenue) = sum(TxKind::TollDeduction);
        let (fines, fine_total) = sum(TxKind::Fine);
        let (_, invoice_payments) = sum(TxKind::InvoicePayment);
        LedgerStats {
            toll_revenue,
            invoices_issued: self.invoices.len(),
            invoice_payments,
            fines,
            fine_total,
            alerts: self.alerts.len(),
            incidents: self.incidents.len(),
            total_balance: self.owners.values().map(|o| o.balance).sum(),
        }
    }

    /// Cross-checks the structural invariants; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for v in self.vehicles.values() {
            if self.by_plate.get(&v.plate) != Some(&v.vehicle_id) {
                return Err(format!("plate index misses {}", v.vehicle_id));
            }
            if let Some(t) = &v.tag {
                if t.plate != v.plate {
                    return Err(format!("{} tag plate differs", v.vehicle_id));
                }
                if self.by_tag.get(&t.tag_id) != Some(&v.vehicle_id) {
                    return Err(format!("tag index misses {}", v.vehicle_id));
                }
            }
            if !self.owners.contains_key(&v.owner_id) {
                return Err(format!("{} has no owner", v.vehicle_id));
            }
            let active = self
                .reports
                .values()
                .filter(|r| r.vehicle_id == v.vehicle_id && r.is_active())
                .count();
            match (v.status, active) {
                (VehicleStatus::ReportedStolen, 1) | (VehicleStatus::Normal, 0) => {}
                (s, n) => return Err(format!("{} status {s:?} with {n} active reports", v.vehicle_id)),
            }
        }
        if self.by_plate.len() != self.vehicles.len() {
            return Err("plate index has stale entries".into());
        }
        if self.by_tag.len() != self.vehicles.values().filter(|v| v.tag.is_some()).count() {
            return Err("tag index has stale entries".into());
        }
        for o in self.owners.values() {
            if o.balance < 0 {
                return Err(format!("{} balance is negative", o.owner_id));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &self.transactions {
            if t.amount <= 0 || !seen.insert(t.tx_id) {
                return Err(format!("bad transaction {}", t.tx_id));
            }
        }
        for i in self.invoices.values() {
            if i.deadline <= i.issued_at {
                return Err(format!("{} deadline not after issue", i.invoice_id));
            }
            if i.state == InvoiceState::Fined
                && !self
                    .transactions
                    .iter()
                    .any(|t| t.kind == TxKind::Fine && t.invoice_id == Some(i.invoice_id))
            {
                return Err(format!("{} fined without a fine transaction", i.invoice_id));
            }
        }
        for a in &self.alerts {
            if !self
                .reports
                .values()
                .any(|r| r.vehicle_id == a.vehicle_id && r.reported_at <= a.timestamp)
            {
                return Err(format!("{} has no prior theft report", a.alert_id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize_plate;

    fn plate(s: &str) -> PlateString {
        normalize_plate(s).unwrap()
    }

    fn tag(n: u128) -> TagId {
        TagId::from_u128(n)
    }

    fn with_owner() -> (Registry, OwnerId) {
        let mut r = Registry::new();
        let o = r.register_owner("Ann", "ann@example.com", "plain:pw".into()).unwrap();
        (r, o)
    }

    #[test]
    fn register_and_lookup() {
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("dha-1234"), o, Some(tag(1))).unwrap();
        let v = r.lookup_by_tag(&tag(1)).unwrap();
        assert_eq!(v.plate.normalized(), "DHA1234");
        assert_eq!(v.status, VehicleStatus::Normal);
        assert_eq!(r.lookup_by_plate(&plate("DHA1234")).unwrap(), v);
    }

    #[test]
    fn duplicates_rejected() {
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("DHA1234"), o, Some(tag(1))).unwrap();
        assert_eq!(
            r.register_vehicle(plate("dha 1234"), o, None).unwrap_err(),
            ModelError::DuplicatePlate(plate("DHA1234"))
        );
        assert_eq!(
            r.register_vehicle(plate("X1"), o, Some(tag(1))).unwrap_err(),
            ModelError::DuplicateTag(tag(1))
        );
        assert_eq!(
            r.register_vehicle(plate("X1"), OwnerId(9), None).unwrap_err(),
            ModelError::UnknownOwner(OwnerId(9))
        );
        assert!(matches!(
            r.register_owner("B", "ANN@example.com", String::new()),
            Err(ModelError::DuplicateEmail(_))
        ));
        // failed commands leave nothing behind
        assert_eq!(r.vehicles().count(), 1);
    }

    #[test]
    fn untagged_vehicle() {
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("4821"), o, None).unwrap();
        assert_eq!(r.lookup_by_plate(&plate("4821")).unwrap().tag, None);
        assert!(r.lookup_by_tag(&tag(5)).is_none());
    }

    #[test]
    fn lookup_sees_latest_balance() {
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("4821"), o, Some(tag(2))).unwrap();
        r.credit_balance(o, 100, 0).unwrap();
        let owner = r.lookup_by_tag(&tag(2)).unwrap().owner_id;
        assert_eq!(r.owner(owner).unwrap().balance, 100);
    }

    #[test]
    fn replay_rebuilds_state() {
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("4821"), o, Some(tag(2))).unwrap();
        r.credit_balance(o, 40, 3).unwrap();
        r.register_plaza(PlazaId::new("p1")).unwrap();
        let events = r.take_uncommitted();
        assert_eq!(events.len(), 4);
        let copy = Registry::replay(&events).unwrap();
        assert_eq!(copy.owner(o).unwrap(), r.owner(o).unwrap());
        assert_eq!(copy.lookup_by_tag(&tag(2)), r.lookup_by_tag(&tag(2)));
        // ids continue where the log left off
        let mut copy = copy;
        let o2 = copy.register_owner("B", "b@example.com", String::new()).unwrap();
        assert_eq!(o2, OwnerId(1));
    }

    #[test]
    fn remove_owner_guard() {
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("4821"), o, Some(tag(2))).unwrap();
        r.credit_balance(o, 5, 0).unwrap();
        assert_eq!(r.remove_owner(o).unwrap_err(), ModelError::OwnerHasObligations(o));
        let (mut r, o) = with_owner();
        r.register_vehicle(plate("4821"), o, Some(tag(2))).unwrap();
        r.remove_owner(o).unwrap();
        assert!(r.lookup_by_plate(&plate("4821")).is_none());
        assert!(r.owner_by_email("ann@example.com").is_none());
        r.check_invariants().unwrap();
    }

    #[test]
    fn bad_email_rejected() {
        let mut r = Registry::new();
        assert!(matches!(r.register_owner("x", "nope", String::new()), Err(ModelError::BadEmail(_))));
    }
}
