//! The passage state machine and the money/theft operations around it.
//!
//! A passage takes the tag path when the read tag is known and active, and
//! the camera path otherwise. Every well-formed passage ends in exactly one
//! [`OutcomeKind`]; nothing on the passage path returns an error.

mod billing;
mod passage;
mod theft;
mod two_factor;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tollgate_plate::vision::RecognizeParams;
use tollgate_plate::GrayBitmap;

use crate::ids::{PlazaId, Ref, TagId, VehicleId};
use crate::model::{Money, Tick};
use crate::PlateString;

pub use billing::{charge_account, issue_invoice, pay_invoice, queue, sweep_overdue, Message};
pub use passage::{resolve_plate, PlateMatch};
pub use theft::{close_report, report_theft, respond_to_report};
pub use two_factor::{two_factor_check, TwoFactor, TwoFactorPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Toll when the schedule has no entry for a vehicle's class.
    pub toll_default: Money,
    /// Time an invoice stays payable.
    pub deadline_ticks: Tick,
    /// Fine = invoice amount plus this percentage of it, rounded down.
    pub fine_surcharge_percent: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            toll_default: 25,
            deadline_ticks: 1000,
            fine_surcharge_percent: 50,
        }
    }
}

impl EngineConfig {
    pub fn fine_for(&self, amount: Money) -> Money {
        amount + amount * self.fine_surcharge_percent as Money / 100
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TollSchedule {
    pub by_class: BTreeMap<String, Money>,
}

impl TollSchedule {
    pub fn amount_for(&self, class: Option<&str>, config: &EngineConfig) -> Money {
        class
            .and_then(|c| self.by_class.get(c))
            .copied()
            .unwrap_or(config.toll_default)
    }
}

/// What the camera produced for a passage.
#[derive(Debug, Clone, PartialEq)]
pub enum Capture {
    /// Raw frame; the engine runs the plate reader on it.
    Scene(GrayBitmap),
    /// Text already extracted by a plate reader at the plaza. Empty means
    /// nothing was readable.
    Reading(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageEvent {
    pub plaza_id: PlazaId,
    pub timestamp: Tick,
    /// `None` means the reader found no tag.
    pub tag_read: Option<TagId>,
    pub camera: Option<Capture>,
    /// Plaza-assigned key (`plaza:seq`); redelivery returns the first outcome.
    pub delivery_key: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeKind {
    ChargedViaTag,
    InvoiceIssued,
    TwoFactorMismatch,
    TheftAlertRaised,
    UnreadableIgnored,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 5] = [
        Self::ChargedViaTag,
        Self::InvoiceIssued,
        Self::TwoFactorMismatch,
        Self::TheftAlertRaised,
        Self::UnreadableIgnored,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassageOutcome {
    pub kind: OutcomeKind,
    /// Records created by this passage.
    pub refs: Vec<Ref>,
    pub plate_seen: Option<PlateString>,
    /// Registered vehicle the passage was attributed to.
    pub vehicle_id: Option<VehicleId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("passage has neither a tag read nor a camera capture")]
    EmptyPassage,
}

/// Engine settings bundled for the passage path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TollEngine {
    pub config: EngineConfig,
    pub schedule: TollSchedule,
    pub policy: TwoFactorPolicy,
    pub reader: RecognizeParams,
}

impl TollEngine {
    pub fn new(config: EngineConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }
}

/// Source of logical time.
pub trait Clock: Send + Sync {
    fn now(&self) -> Tick;
}

/// Clock moved by hand, for tests and the simulator.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start: Tick) -> Self {
        Self(AtomicU64::new(start))
    }

    pub fn set(&self, t: Tick) {
        self.0.store(t, Ordering::SeqCst);
    }

    pub fn advance(&self, by: Tick) -> Tick {
        self.0.fetch_add(by, Ordering::SeqCst) + by
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Tick {
        self.0.load(Ordering::SeqCst)
    }
}
