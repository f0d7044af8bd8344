use serde::{Deserialize, Serialize};

use crate::engine::PassageOutcome;
use crate::ids::{InvoiceId, NotificationId, OwnerId, PlazaId, ReportId, TagId, VehicleId};
use crate::model::{
    AuthorityAlert, DirectoryEntry, Incident, Invoice, Money, Notification, TagState, TheftReport, Tick, Transaction,
};
use crate::PlateString;

/// Every state change of the registry. Replaying the same sequence of
/// events on an empty registry rebuilds the same state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum DomainEvent {
    OwnerRegistered {
        owner_id: OwnerId,
        name: String,
        email: String,
        password_hash: String,
        guest: bool,
    },
    OwnerUpdated {
        owner_id: OwnerId,
        name: Option<String>,
        email: Option<String>,
    },
    PasswordChanged {
        owner_id: OwnerId,
        password_hash: String,
    },
    PaymentMethodAdded {
        owner_id: OwnerId,
        method: String,
    },
    BalanceCredited {
        owner_id: OwnerId,
        amount: Money,
        at: Tick,
    },
    OwnerRemoved {
        owner_id: OwnerId,
    },
    VehicleRegistered {
        vehicle_id: VehicleId,
        plate: PlateString,
        owner_id: OwnerId,
        tag_id: Option<TagId>,
        class: Option<String>,
    },
    TagStateChanged {
        tag_id: TagId,
        state: TagState,
    },
    DirectoryEntryAdded(DirectoryEntry),
    PlazaRegistered {
        plaza_id: PlazaId,
    },
    TransactionRecorded(Transaction),
    InvoiceIssued(Invoice),
    InvoicePaid {
        invoice_id: InvoiceId,
    },
    InvoiceFined {
        invoice_id: InvoiceId,
    },
    NotificationQueued(Notification),
    NotificationDelivered {
        notif_id: NotificationId,
    },
    TheftReported(TheftReport),
    TheftReportResponded {
        report_id: ReportId,
        response: String,
    },
    TheftReportClosed {
        report_id: ReportId,
    },
    AlertRaised(AuthorityAlert),
    VehicleSeen {
        vehicle_id: VehicleId,
        plaza_id: PlazaId,
        at: Tick,
    },
    IncidentLogged(Incident),
    PassageRecorded {
        plaza_id: PlazaId,
        at: Tick,
        delivery_key: Option<String>,
        outcome: PassageOutcome,
    },
}
