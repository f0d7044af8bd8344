mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tollgate_core::engine::ManualClock;
use tollgate_core::{Registry, TxKind};
use tollgate_service::wire::{CameraWire, PassageWire};
use tollgate_service::{Journal, MemoryTransport, Service, ServiceError, JOURNAL_FILE};

fn open(dir: &std::path::Path) -> Result<Service, ServiceError> {
    Service::open_with_clock(config(dir), Arc::new(ManualClock::new(0)))
}

fn wire(seq: u64, ts: u64, tag: Option<u128>, reading: Option<&str>) -> PassageWire {
    PassageWire {
        plaza_id: PLAZA.into(),
        seq: Some(seq),
        idempotency_key: None,
        timestamp: ts,
        tag_read: tag.map(|t| format!("{t:024x}")),
        camera: reading.map(|r| CameraWire::Reading(r.into())),
    }
}

/// Owners, vehicles and a random mix of passages, thefts and sweeps.
fn populate(s: &Service, rng: &mut ChaCha8Rng, passages: usize) {
    let mut owners = Vec::new();
    for i in 0..4 {
        let o = s.register_user(&format!("U{i}"), &format!("u{i}@example.com"), "pw-1234").unwrap();
        s.add_payment_method(o.owner_id, "card").unwrap();
        s.top_up(o.owner_id, rng.gen_range(0..120)).unwrap();
        owners.push(o.owner_id);
    }
    let plates = ["1001", "2002", "3003", "4004", "5005", "6006"];
    let mut vehicles = Vec::new();
    for (i, p) in plates.iter().enumerate() {
        let tag = (i % 2 == 0).then(|| format!("{:024x}", i + 1));
        vehicles.push(s.register_vehicle(owners[i % 4], p, tag.as_deref(), None).unwrap().vehicle_id);
    }
    for k in 0..passages {
        let ts = 10 * (k as u64 + 1);
        match rng.gen_range(0..10) {
            0 => {
                let v = vehicles[rng.gen_range(0..vehicles.len())];
                let owner = s.registry().vehicle(v).unwrap().owner_id;
                let _ = s.report_loss(owner, v);
            }
            1 => {
                s.sweep(Some(ts)).unwrap();
            }
            _ => {
                let i = rng.gen_range(0..plates.len());
                let tag = (rng.gen_bool(0.6) && i % 2 == 0).then_some(i as u128 + 1);
                let reading = match rng.gen_range(0..4) {
                    0 => None,
                    1 => Some(""),
                    _ => Some(plates[i]),
                };
                let (tag, reading) = if tag.is_none() && reading.is_none() { (None, Some("")) } else { (tag, reading) };
                s.ingest(wire(k as u64, ts, tag, reading), Some(PLAZA_KEY)).unwrap();
            }
        }
    }
}

#[test]
fn restart_rebuilds_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = open(dir.path()).unwrap();
    populate(&s, &mut rng, 40);
    let before = s.registry();
    let now = s.now();
    drop(s);
    let s = open(dir.path()).unwrap();
    assert_eq!(s.registry(), before);
    assert_eq!(s.now(), now);
}

#[test]
fn empty_dir_starts_empty() {
    let dir = tempfile::tempdir().unwrap();
    let s = open(dir.path()).unwrap();
    assert_eq!(s.registry(), Registry::new());
    assert_eq!(s.journal_seq(), 0);
}

#[test]
fn random_prefixes_replay_to_valid_states() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = open(dir.path()).unwrap();
    populate(&s, &mut rng, 150);
    drop(s);
    let records = Journal::read(&dir.path().join(JOURNAL_FILE)).unwrap();
    let lines: Vec<String> = std::fs::read_to_string(dir.path().join(JOURNAL_FILE))
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    assert_eq!(records.len(), lines.len());
    for _ in 0..40 {
        let k = rng.gen_range(0..=records.len());
        let reg = Registry::replay(records[..k].iter().flat_map(|r| r.events.iter())).unwrap();
        reg.check_invariants().unwrap();
        // the same prefix on disk opens to the same state
        let d = tempfile::tempdir().unwrap();
        let text: String = lines[..k].iter().map(|l| format!("{l}\n")).collect();
        std::fs::write(d.path().join(JOURNAL_FILE), text).unwrap();
        assert_eq!(open(d.path()).unwrap().registry(), reg);
    }
}

#[test]
fn truncated_record_is_rejected_with_last_good_seq() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = open(dir.path()).unwrap();
    populate(&s, &mut rng, 10);
    let last = s.journal_seq();
    drop(s);
    let path = dir.path().join(JOURNAL_FILE);
    let bytes = std::fs::read(&path).unwrap();
    let start_of_last = bytes[..bytes.len() - 1].iter().rposition(|&b| b == b'\n').unwrap() + 1;
    for cut in [start_of_last + 1, start_of_last + 30, bytes.len() - 1] {
        std::fs::write(&path, &bytes[..cut]).unwrap();
        match open(dir.path()) {
            Err(ServiceError::CorruptJournal { last_good_seq, .. }) => assert_eq!(last_good_seq, last - 1),
            Err(e) => panic!("unexpected error {e}"),
            Ok(_) => panic!("truncated journal accepted"),
        }
    }
}

#[test]
fn duplicate_deliveries_never_double_charge() {
    let dir = tempfile::tempdir().unwrap();
    let s = open(dir.path()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let o = s.register_user("Ann", "ann@example.com", "pw-1234").unwrap().owner_id;
    s.add_payment_method(o, "card").unwrap();
    s.top_up(o, 10_000).unwrap();
    s.register_vehicle(o, "4821", Some(&format!("{:024x}", 1)), None).unwrap();
    let mut charged_keys = BTreeSet::new();
    for _ in 0..300 {
        let seq = rng.gen_range(0..60u64);
        let out = s.ingest(wire(seq, seq * 10, Some(1), None), Some(PLAZA_KEY)).unwrap();
        if out.kind == tollgate_core::engine::OutcomeKind::ChargedViaTag {
            charged_keys.insert(seq);
        }
    }
    let deductions = s
        .registry()
        .transactions()
        .iter()
        .filter(|t| t.kind == TxKind::TollDeduction)
        .count();
    assert_eq!(deductions, charged_keys.len());
    assert_eq!(s.registry().owner(o).unwrap().balance, 10_000 - 25 * deductions as i64);
}

#[test]
fn outbox_retry_and_idempotence() {
    let dir = tempfile::tempdir().unwrap();
    let s = open(dir.path()).unwrap();
    let o = s.register_user("Ann", "ann@example.com", "pw-1234").unwrap().owner_id;
    s.register_vehicle(o, "4821", None, None).unwrap();
    for seq in 0..3 {
        s.ingest(wire(seq, seq, None, Some("4821")), Some(PLAZA_KEY)).unwrap();
    }
    let mut down = MemoryTransport {
        fail: true,
        ..Default::default()
    };
    let r = s.drain_outbox(&mut down).unwrap();
    assert_eq!((r.delivered, r.failed), (0, 3));
    assert_eq!(s.registry().queued_notifications().count(), 3);

    let mut up = MemoryTransport::default();
    assert_eq!(s.drain_outbox(&mut up).unwrap().delivered, 3);
    assert_eq!(s.drain_outbox(&mut up).unwrap().delivered, 0);
    assert_eq!(up.sent.len(), 3);
    // delivery survives a restart
    drop(s);
    let s = open(dir.path()).unwrap();
    assert_eq!(s.registry().queued_notifications().count(), 0);
    assert!(s.registry().is_key_delivered("invoice-0"));
}
