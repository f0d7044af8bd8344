//! Seeded traffic simulation against the toll engine, either in-process or
//! through a running service's HTTP API.

mod config;
mod population;
mod run;
mod target;

use thiserror::Error;

pub use config::{CameraMode, Fractions, HttpSettings, SimConfig};
pub use population::{generate_population, VehicleClass, SimVehicle};
pub use run::{run, run_with, EventRow, SimReport};
pub use target::{EngineTarget, HttpTarget, SimCamera, SimPassage, SimTarget};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("vehicle class fractions must be in [0, 1] and sum to 1 (sum is {0})")]
    BadFractions(f64),
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("target unavailable: {0}")]
    TargetUnavailable(String),
    #[error("target rejected {what}: {reason}")]
    Target { what: String, reason: String },
    #[error(transparent)]
    Corpus(#[from] tollgate_plate::CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
