#![allow(dead_code)]

use tollgate_core::{normalize_plate, OwnerId, PlateString, PlazaId, Registry, TagId, VehicleId};
use tollgate_core::engine::{Capture, PassageEvent};

pub fn plate(s: &str) -> PlateString {
    normalize_plate(s).unwrap()
}

pub fn tag(n: u128) -> TagId {
    TagId::from_u128(n)
}

pub fn owner(reg: &mut Registry, name: &str, balance: i64) -> OwnerId {
    let id = reg
        .register_owner(name, &format!("{}@example.com", name.to_lowercase()), "plain:pw".into())
        .unwrap();
    if balance > 0 {
        reg.credit_balance(id, balance, 0).unwrap();
    }
    id
}

pub fn vehicle(reg: &mut Registry, p: &str, owner: OwnerId, t: Option<u128>) -> VehicleId {
    reg.register_vehicle(plate(p), owner, t.map(tag)).unwrap().vehicle_id
}

pub fn passage(plaza: &str, at: u64, tag_read: Option<u128>, reading: Option<&str>) -> PassageEvent {
    PassageEvent {
        plaza_id: PlazaId::new(plaza),
        timestamp: at,
        tag_read: tag_read.map(tag),
        camera: reading.map(|r| Capture::Reading(r.to_string())),
        delivery_key: None,
    }
}
