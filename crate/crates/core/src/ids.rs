use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ModelError;

macro_rules! numeric_id {
    ($(#[$doc:meta])* $name:ident, $prefix:literal) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u64);

        impl $name {
            pub const PREFIX: &'static str = $prefix;
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}-{}", $prefix, self.0)
            }
        }

        impl FromStr for $name {
            type Err = String;

            /// Accepts `7` or `prefix-7`.
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let digits = s.strip_prefix(concat!($prefix, "-")).unwrap_or(s);
                digits.parse().map($name).map_err(|_| format!("bad {} id {s:?}", $prefix))
            }
        }

        // serialized in display form, e.g. "tx-7"
        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

numeric_id!(OwnerId, "owner");
numeric_id!(VehicleId, "veh");
numeric_id!(TxId, "tx");
numeric_id!(InvoiceId, "inv");
numeric_id!(NotificationId, "msg");
numeric_id!(ReportId, "rep");
numeric_id!(AlertId, "alert");
numeric_id!(IncidentId, "inc");

/// Toll plaza name, e.g. `north-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlazaId(pub String);

impl PlazaId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }
}

impl fmt::Display for PlazaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// 96-bit RFID tag identifier, stored as 24 lowercase hex digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct TagId(String);

impl TagId {
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let t = s.trim();
        if t.len() != 24 || !t.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(ModelError::BadTagId(s.to_string()));
        }
        Ok(Self(t.to_ascii_lowercase()))
    }

    pub fn from_u128(v: u128) -> Self {
        Self(format!("{:024x}", v & ((1u128 << 96) - 1)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for TagId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TagId::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Anything a passage outcome can point at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ref {
    Transaction(TxId),
    Invoice(InvoiceId),
    Notification(NotificationId),
    Alert(AlertId),
    Incident(IncidentId),
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ref::Transaction(id) => id.fmt(f),
            Ref::Invoice(id) => id.fmt(f),
            Ref::Notification(id) => id.fmt(f),
            Ref::Alert(id) => id.fmt(f),
            Ref::Incident(id) => id.fmt(f),
        }
    }
}

impl FromStr for Ref {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, _) = s.split_once('-').ok_or_else(|| format!("bad reference {s:?}"))?;
        Ok(match prefix {
            TxId::PREFIX => Ref::Transaction(s.parse()?),
            InvoiceId::PREFIX => Ref::Invoice(s.parse()?),
            NotificationId::PREFIX => Ref::Notification(s.parse()?),
            AlertId::PREFIX => Ref::Alert(s.parse()?),
            IncidentId::PREFIX => Ref::Incident(s.parse()?),
            _ => return Err(format!("bad reference {s:?}")),
        })
    }
}

impl Serialize for Ref {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ref {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
