use serde::{Deserialize, Serialize};

use crate::ids::{AlertId, IncidentId, InvoiceId, NotificationId, OwnerId, PlazaId, ReportId, TagId, TxId, VehicleId};
use crate::PlateString;

/// Logical time in ticks from the injected clock.
pub type Tick = u64;
/// Integer minor currency units.
pub type Money = i64;

/// Recipient name for alerts meant for local authorities.
pub const AUTHORITY_CHANNEL: &str = "authority";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TagState {
    Active,
    Inactive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfidTag {
    pub tag_id: TagId,
    pub plate: PlateString,
    pub state: TagState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnerAccount {
    pub owner_id: OwnerId,
    pub name: String,
    pub email: String,
    pub password_hash: String,
    pub balance: Money,
    pub payment_methods: Vec<String>,
    /// Created from the plate directory for an unregistered vehicle; cannot log in.
    pub guest: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VehicleStatus {
    Normal,
    ReportedStolen,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub vehicle_id: VehicleId,
    pub plate: PlateString,
    pub tag: Option<RfidTag>,
    pub owner_id: OwnerId,
    /// Toll schedule class; `None` pays the default amount.
    pub class: Option<String>,
    pub status: VehicleStatus,
    pub last_seen: Option<(PlazaId, Tick)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TxKind {
    TollDeduction,
    InvoicePayment,
    Fine,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub tx_id: TxId,
    pub owner_id: OwnerId,
    /// Empty for transactions not made at a plaza.
    pub plaza_id: Option<PlazaId>,
    pub amount: Money,
    pub kind: TxKind,
    pub timestamp: Tick,
    /// Invoice this payment or fine settles.
    pub invoice_id: Option<InvoiceId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvoiceState {
    Open,
    Paid,
    Fined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invoice {
    pub invoice_id: InvoiceId,
    pub owner_id: OwnerId,
    pub plate: PlateString,
    pub plaza_id: Option<PlazaId>,
    pub amount: Money,
    pub issued_at: Tick,
    pub deadline: Tick,
    pub state: InvoiceState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReportState {
    Open,
    Responded,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheftReport {
    pub report_id: ReportId,
    pub vehicle_id: VehicleId,
    pub reported_at: Tick,
    pub state: ReportState,
    pub admin_response: Option<String>,
}

impl TheftReport {
    /// Open and Responded reports keep the vehicle flagged.
    pub fn is_active(&self) -> bool {
        self.state != ReportState::Closed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorityAlert {
    pub alert_id: AlertId,
    pub vehicle_id: VehicleId,
    pub plaza_id: PlazaId,
    pub timestamp: Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NotificationKind {
    InvoiceIssued,
    FineApplied,
    TheftConfirmed,
    AuthorityAlert,
    PasswordRecovery,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NotificationState {
    Queued,
    Delivered,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub notif_id: NotificationId,
    /// Owner email or [`AUTHORITY_CHANNEL`].
    pub recipient: String,
    pub owner_id: Option<OwnerId>,
    pub kind: NotificationKind,
    pub subject: String,
    pub body: String,
    pub idempotency_key: String,
    pub created_at: Tick,
    pub state: NotificationState,
}

/// Owner contact for a plate that is not registered with the system, e.g.
/// from the national vehicle register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectoryEntry {
    pub plate: PlateString,
    pub name: String,
    pub email: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum IncidentKind {
    TagInactive { tag_id: TagId },
    TagUnknown { tag_id: TagId },
    Unreadable { reason: String },
    TwoFactorMismatch { vehicle_id: VehicleId, tag_plate: PlateString, ocr_text: String },
    UnknownPlate { ocr_text: String },
    AmbiguousPlate { ocr_text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incident {
    pub incident_id: IncidentId,
    pub plaza_id: PlazaId,
    pub timestamp: Tick,
    pub kind: IncidentKind,
}

/// A plaza's copy of the stolen-vehicle broadcast.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchEntry {
    pub report_id: ReportId,
    pub vehicle_id: VehicleId,
    pub plate: PlateString,
    pub tag_id: Option<TagId>,
}
