//! Domain model for the toll system: owners, vehicles, RFID tags, the
//! transaction ledger, invoices and theft reports, all held in an
//! event-sourced [`Registry`], plus the passage state machine in [`engine`].

pub mod engine;
mod events;
mod ids;
mod model;
mod password;
mod registry;

use thiserror::Error;

pub use events::DomainEvent;
pub use ids::{AlertId, IncidentId, InvoiceId, NotificationId, OwnerId, PlazaId, Ref, ReportId, TagId, TxId, VehicleId};
pub use model::{
    AuthorityAlert, DirectoryEntry, Incident, IncidentKind, Invoice, InvoiceState, Money, Notification,
    NotificationKind, NotificationState, OwnerAccount, ReportState, RfidTag, TagState, TheftReport, Tick,
    Transaction, TxKind, VehicleRecord, VehicleStatus, WatchEntry, AUTHORITY_CHANNEL,
};
pub use password::{PasswordHasher, SaltedSha256, StubHasher};
pub use registry::{LedgerStats, PassageRecord, Registry};
pub use tollgate_plate::{normalize_plate, PlateError, PlateString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("plate {0} is already registered")]
    DuplicatePlate(PlateString),
    #[error("tag {0} is already bound to a vehicle")]
    DuplicateTag(TagId),
    #[error("email {0} is already in use")]
    DuplicateEmail(String),
    #[error("unknown owner {0}")]
    UnknownOwner(OwnerId),
    #[error("unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
    #[error("unknown tag {0}")]
    UnknownTag(TagId),
    #[error("unknown invoice {0}")]
    UnknownInvoice(InvoiceId),
    #[error("unknown theft report {0}")]
    UnknownReport(ReportId),
    #[error("unknown notification {0}")]
    UnknownNotification(NotificationId),
    #[error("unknown plaza {0}")]
    UnknownPlaza(PlazaId),
    #[error("tag binds plate {tag_plate} but the vehicle carries {plate}")]
    TagPlateMismatch { tag_plate: PlateString, plate: PlateString },
    #[error("invalid tag id {0:?}: expected 24 hex digits")]
    BadTagId(String),
    #[error("amount must be positive (got {0})")]
    NonPositiveAmount(Money),
    #[error("insufficient funds: balance {balance}, needed {needed}")]
    InsufficientFunds { balance: Money, needed: Money },
    #[error("invoice {0} is not open")]
    InvoiceNotOpen(InvoiceId),
    #[error("vehicle {0} already has an active theft report")]
    AlreadyReported(VehicleId),
    #[error("theft report {0} is closed")]
    ReportClosed(ReportId),
    #[error("owner {0} still has open invoices or a non-zero balance")]
    OwnerHasObligations(OwnerId),
    #[error("notification {0} was already delivered")]
    AlreadyDelivered(NotificationId),
    #[error("invalid email address {0:?}")]
    BadEmail(String),
    #[error(transparent)]
    Plate(#[from] PlateError),
}
