use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use tollgate_core::TagId;
use tollgate_plate::corpus::random_plate;
use tollgate_plate::{rng, PlateString};

use crate::{SimConfig, SimError};

const DIGITS: [char; 10] = ['0', '1', '2', '3', '4', '5', '6', '7', '8', '9'];
const PLATE_LEN: (usize, usize) = (5, 8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    TaggedActive,
    TaggedInactive,
    UntaggedRegistered,
    Unregistered,
    Stolen,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 5] = [
        Self::TaggedActive,
        Self::TaggedInactive,
        Self::UntaggedRegistered,
        Self::Unregistered,
        Self::Stolen,
    ];

    pub fn has_tag(self) -> bool {
        matches!(self, Self::TaggedActive | Self::TaggedInactive | Self::Stolen)
    }

    pub fn is_registered(self) -> bool {
        self != Self::Unregistered
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TaggedActive => "tagged_active",
            Self::TaggedInactive => "tagged_inactive",
            Self::UntaggedRegistered => "untagged_registered",
            Self::Unregistered => "unregistered",
            Self::Stolen => "stolen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimVehicle {
    pub index: usize,
    pub class: VehicleClass,
    pub plate: PlateString,
    pub tag: Option<TagId>,
}

impl SimVehicle {
    pub fn owner_email(&self) -> String {
        format!("owner{}@sim.invalid", self.index)
    }

    pub fn owner_name(&self) -> String {
        format!("Sim Owner {}", self.index)
    }
}

/// Draws the fleet. Vehicle `i` reads its class draw and plate from its own
/// substream, so changing one fraction only moves vehicles across the
/// affected class boundary; the order of classes is the order of
/// [`VehicleClass::ALL`].
pub fn generate_population(cfg: &SimConfig) -> Result<Vec<SimVehicle>, SimError> {
    cfg.validate()?;
    let bounds: Vec<f64> = cfg
        .fractions
        .as_array()
        .iter()
        .scan(0.0, |acc, f| {
            *acc += f;
            Some(*acc)
        })
        .collect();
    // rounding can leave the last bound a hair below 1
    let last_class = VehicleClass::ALL
        .into_iter()
        .zip(cfg.fractions.as_array())
        .rev()
        .find(|(_, f)| *f > 0.0)
        .map(|(c, _)| c)
        .expect("fractions sum to 1");
    let mut taken = BTreeSet::new();
    let mut fleet = Vec::with_capacity(cfg.n_vehicles);
    for i in 0..cfg.n_vehicles {
        let mut r = rng::stream(cfg.seed, i as u64);
        let u: f64 = r.gen();
        let class = VehicleClass::ALL
            .into_iter()
            .zip(&bounds)
            .find(|(_, b)| u < **b)
            .map(|(c, _)| c)
            .unwrap_or(last_class);
        let plate = loop {
            let p = random_plate(&mut r, &DIGITS, PLATE_LEN.0, PLATE_LEN.1);
            if taken.insert(p.normalized().to_string()) {
                break p;
            }
        };
        let tag = class
            .has_tag()
            .then(|| TagId::from_u128((((cfg.seed & 0xffff_ffff) as u128) << 64) | (i as u128 + 1)));
        fleet.push(SimVehicle {
            index: i,
            class,
            plate,
            tag,
        });
    }
    Ok(fleet)
}
