//! The central toll service: a journaled registry behind an HTTP API, the
//! notification outbox, and plaza event ingestion.

mod api;
mod config;
mod journal;
mod outbox;
mod server;
mod service;
mod sessions;
pub mod wire;

use thiserror::Error;
use tollgate_core::engine::EngineError;
use tollgate_core::ModelError;

pub use api::{router, PLAZA_KEY_HEADER, ROUTES};
pub use config::{AdminCredentials, HasherKind, ServiceConfig};
pub use journal::{Journal, JournalRecord, JOURNAL_FILE};
pub use outbox::{render_message, DrainReport, FileTransport, MemoryTransport, Transport, TransportError};
pub use server::{serve, spawn_background, RunningServer};
pub use service::{OwnerView, ReportSummary, Service, TrackView, OUTBOX_DIR};
pub use sessions::{Role, Session, SystemClock};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("journal is corrupt after seq {last_good_seq}: {reason}")]
    CorruptJournal { last_good_seq: u64, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Unauthorized(String),
    #[error("{0}")]
    Forbidden(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    /// HTTP status and a stable machine-readable code.
    pub fn status_code(&self) -> (u16, &'static str) {
        use ModelError as M;
        match self {
            Self::Unauthorized(_) => (401, "unauthorized"),
            Self::Forbidden(_) => (403, "forbidden"),
            Self::NotFound(_) => (404, "not_found"),
            Self::Conflict(_) => (409, "conflict"),
            Self::Invalid(_) | Self::Engine(EngineError::EmptyPassage) => (422, "invalid"),
            Self::Model(m) => match m {
                M::UnknownOwner(_)
                | M::UnknownVehicle(_)
                | M::UnknownTag(_)
                | M::UnknownInvoice(_)
                | M::UnknownReport(_)
                | M::UnknownNotification(_)
                | M::UnknownPlaza(_) => (404, "not_found"),
                M::DuplicatePlate(_) => (409, "duplicate_plate"),
                M::DuplicateTag(_) => (409, "duplicate_tag"),
                M::DuplicateEmail(_) => (409, "duplicate_email"),
                M::AlreadyReported(_) => (409, "already_reported"),
                M::InvoiceNotOpen(_) => (409, "invoice_not_open"),
                M::OwnerHasObligations(_) => (409, "owner_has_obligations"),
                M::InsufficientFunds { .. } => (409, "insufficient_funds"),
                M::ReportClosed(_) => (409, "report_closed"),
                M::AlreadyDelivered(_) => (409, "already_delivered"),
                M::TagPlateMismatch { .. } => (409, "tag_plate_mismatch"),
                M::BadTagId(_) | M::NonPositiveAmount(_) | M::BadEmail(_) | M::Plate(_) => (422, "invalid"),
            },
            Self::CorruptJournal { .. } | Self::Config(_) | Self::Io(_) => (500, "internal"),
        }
    }
}
