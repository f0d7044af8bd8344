use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tollgate_core::engine::{OutcomeKind, PassageOutcome};
use tollgate_core::{Money, Tick};
use tollgate_plate::corpus::{compose_scene, render_plate, CorpusConfig, SaltPepper};
use tollgate_plate::rng;

use crate::target::{SimCamera, SimPassage, SimTarget};
use crate::{generate_population, CameraMode, SimConfig, SimError, SimVehicle, VehicleClass};

/// Passages rendered ahead of submission; rendering runs in parallel.
const BATCH: usize = 256;

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub seq: u64,
    pub timestamp: Tick,
    pub plaza: String,
    pub vehicle: usize,
    pub class: VehicleClass,
    pub plate: String,
    pub tag_read: bool,
    pub outcome: PassageOutcome,
}

impl EventRow {
    pub const CSV_HEADER: &'static str = "seq,timestamp,plaza,vehicle,class,plate,tag_read,outcome,plate_seen,vehicle_id";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:?},{},{}",
            self.seq,
            self.timestamp,
            self.plaza,
            self.vehicle,
            self.class.as_str(),
            self.plate,
            self.tag_read,
            self.outcome.kind,
            self.outcome.plate_seen.as_ref().map(|p| p.normalized()).unwrap_or(""),
            self.outcome.vehicle_id.map(|v| v.to_string()).unwrap_or_default(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub n_vehicles: usize,
    pub n_passages: usize,
    pub population: BTreeMap<VehicleClass, usize>,
    pub outcomes: BTreeMap<OutcomeKind, usize>,
    pub toll_revenue: Money,
    pub invoices_issued: usize,
    pub fines: usize,
    pub fine_total: Money,
    pub alerts: usize,
    pub incidents: usize,
    pub final_sweep_at: Tick,
    /// SHA-256 over the passage outcomes as JSON lines, in arrival order.
    pub event_log_digest: String,
}

impl SimReport {
    pub fn outcome(&self, kind: OutcomeKind) -> usize {
        self.outcomes.get(&kind).copied().unwrap_or(0)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed              {}", self.seed);
        let _ = writeln!(s, "vehicles          {}", self.n_vehicles);
        for (c, n) in &self.population {
            let _ = writeln!(s, "  {:<22}{n}", c.as_str());
        }
        let _ = writeln!(s, "passages          {}", self.n_passages);
        for (k, n) in &self.outcomes {
            let _ = writeln!(s, "  {:<22}{n}", format!("{k:?}"));
        }
        let _ = writeln!(s, "toll revenue      {}", self.toll_revenue);
        let _ = writeln!(s, "invoices issued   {}", self.invoices_issued);
        let _ = writeln!(s, "fines             {} (total {})", self.fines, self.fine_total);
        let _ = writeln!(s, "alerts            {}", self.alerts);
        let _ = writeln!(s, "incidents         {}", self.incidents);
        let _ = writeln!(s, "final sweep at    {}", self.final_sweep_at);
        let _ = writeln!(s, "event log digest  {}", self.event_log_digest);
        s
    }
}

/// Builds passage `k`. Each (vehicle, round) pair has its own substream and
/// always makes the same draws, so rates change outcomes but not the
/// plates, offsets or noise patterns.
fn make_passage(cfg: &SimConfig, corpus: &CorpusConfig, fleet: &[SimVehicle], k: usize) -> Result<SimPassage, SimError> {
    let n = fleet.len();
    let (round, i) = (k / n, k % n);
    let v = &fleet[i];
    let mut r = rng::stream(rng::derive_seed(cfg.seed, i as u64), round as u64 + 1);
    let rfid_u: f64 = r.gen();
    let render_seed: u64 = r.gen();
    let fx: f64 = r.gen();
    let fy: f64 = r.gen();
    let noise_seed: u64 = r.gen();

    let tag_read = v.tag.clone().filter(|_| rfid_u >= cfg.rfid_read_failure_rate);
    let camera = match cfg.camera {
        CameraMode::Truth => SimCamera::Reading(v.plate.normalized().to_string()),
        CameraMode::Scene => {
            let plate = render_plate(&v.plate, &corpus.style, render_seed)?;
            let x = (fx * (corpus.canvas_w - plate.width() + 1) as f64) as usize;
            let y = (fy * (corpus.canvas_h - plate.height() + 1) as f64) as usize;
            let noise = SaltPepper {
                rate: cfg.scene_noise_rate,
                seed: noise_seed,
            };
            let scene = compose_scene(&format!("pass_{k}"), &plate, &v.plate, corpus.canvas_w, corpus.canvas_h, (x, y), noise)?;
            SimCamera::Scene(scene.image)
        }
    };
    Ok(SimPassage {
        plaza: cfg.plazas[k % cfg.plazas.len()].clone(),
        seq: k as u64,
        timestamp: (k as u64 + 1) * cfg.ticks_between_arrivals,
        tag_read,
        camera,
    })
}

pub fn run(cfg: &SimConfig, target: &mut dyn SimTarget) -> Result<SimReport, SimError> {
    run_with(cfg, target, |_| {})
}

/// Enrols the fleet, sends every passage in arrival order, then sweeps
/// once every invoice is past its deadline. `on_event` sees each outcome.
pub fn run_with(
    cfg: &SimConfig,
    target: &mut dyn SimTarget,
    mut on_event: impl FnMut(&EventRow),
) -> Result<SimReport, SimError> {
    let fleet = generate_population(cfg)?;
    for v in &fleet {
        target.enroll(v, cfg.initial_balance)?;
    }

    let corpus = CorpusConfig::default();
    let total = fleet.len() * cfg.passages_per_vehicle;
    let mut outcomes: BTreeMap<OutcomeKind, usize> = OutcomeKind::ALL.into_iter().map(|k| (k, 0)).collect();
    let mut digest = Sha256::new();
    let mut last_tick = 0;
    for start in (0..total).step_by(BATCH) {
        let batch: Vec<SimPassage> = (start..(start + BATCH).min(total))
            .into_par_iter()
            .map(|k| make_passage(cfg, &corpus, &fleet, k))
            .collect::<Result<_, _>>()?;
        for p in batch {
            let outcome = target.passage(&p)?;
            *outcomes.entry(outcome.kind).or_default() += 1;
            digest.update(serde_json::to_string(&outcome).expect("outcome serializes"));
            digest.update(b"\n");
            last_tick = p.timestamp;
            let v = &fleet[p.seq as usize % fleet.len()];
            on_event(&EventRow {
                seq: p.seq,
                timestamp: p.timestamp,
                plaza: p.plaza,
                vehicle: v.index,
                class: v.class,
                plate: v.plate.normalized().to_string(),
                tag_read: p.tag_read.is_some(),
                outcome,
            });
        }
    }

    let final_sweep_at = last_tick + cfg.engine.deadline_ticks + 1;
    target.sweep(final_sweep_at)?;
    let stats = target.stats()?;
    let mut population: BTreeMap<VehicleClass, usize> = VehicleClass::ALL.into_iter().map(|c| (c, 0)).collect();
    for v in &fleet {
        *population.entry(v.class).or_default() += 1;
    }
    Ok(SimReport {
        seed: cfg.seed,
        n_vehicles: fleet.len(),
        n_passages: total,
        population,
        outcomes,
        toll_revenue: stats.toll_revenue,
        invoices_issued: stats.invoices_issued,
        fines: stats.fines,
        fine_total: stats.fine_total,
        alerts: stats.alerts,
        incidents: stats.incidents,
        final_sweep_at,
        event_log_digest: hex::encode(digest.finalize()),
    })
}
