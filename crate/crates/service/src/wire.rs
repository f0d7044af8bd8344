//! JSON shapes of the HTTP API that are not plain model types.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use tollgate_core::engine::{Capture, PassageEvent};
use tollgate_core::{Money, PlazaId, TagId, Tick};
use tollgate_plate::{pgm, GrayBitmap};

use crate::ServiceError;

/// Camera payload of a plaza event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CameraWire {
    /// Text from the plaza's own plate reader; empty when unreadable.
    Reading(String),
    /// Binary PGM (P5) frame, base64-encoded.
    ScenePgm(String),
}

impl CameraWire {
    pub fn scene(img: &GrayBitmap) -> Self {
        Self::ScenePgm(B64.encode(pgm::encode(img)))
    }
}

/// `POST /api/plaza/events` body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassageWire {
    pub plaza_id: String,
    /// Plaza-local sequence number; `plaza_id:seq` is the idempotency key
    /// unless `idempotency_key` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idempotency_key: Option<String>,
    pub timestamp: Tick,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag_read: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraWire>,
}

impl PassageWire {
    pub fn delivery_key(&self) -> Option<String> {
        self.idempotency_key
            .clone()
            .or_else(|| self.seq.map(|s| format!("{}:{s}", self.plaza_id)))
    }

    pub fn into_event(self) -> Result<PassageEvent, ServiceError> {
        let delivery_key = self.delivery_key();
        if self.plaza_id.trim().is_empty() {
            return Err(ServiceError::Invalid("plaza_id is empty".into()));
        }
        let tag_read = self.tag_read.as_deref().map(TagId::parse).transpose()?;
        let camera = match self.camera {
            None => None,
            Some(CameraWire::Reading(t)) => Some(Capture::Reading(t)),
            Some(CameraWire::ScenePgm(b)) => {
                let bytes = B64
                    .decode(b.as_bytes())
                    .map_err(|e| ServiceError::Invalid(format!("scene is not base64: {e}")))?;
                let img = pgm::decode(&bytes).map_err(|e| ServiceError::Invalid(format!("scene is not a PGM: {e}")))?;
                Some(Capture::Scene(img))
            }
        };
        if tag_read.is_none() && camera.is_none() {
            return Err(ServiceError::Invalid("event has neither tag_read nor camera".into()));
        }
        Ok(PassageEvent {
            plaza_id: PlazaId::new(self.plaza_id),
            timestamp: self.timestamp,
            tag_read,
            camera,
            delivery_key,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterUser {
    pub name: String,
    pub email: String,
    pub password: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Login {
    pub email: String,
    pub password: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateUser {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub email: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangePassword {
    pub old_password: String,
    pub new_password: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recover {
    pub email: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetPassword {
    pub token: String,
    pub new_password: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddPaymentMethod {
    pub method: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopUp {
    pub amount: Money,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterVehicle {
    pub plate: String,
    #[serde(default)]
    pub tag_id: Option<String>,
    #[serde(default)]
    pub class: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Respond {
    pub response: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub now: Option<Tick>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectoryWire {
    pub plate: String,
    pub name: String,
    pub email: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagStateWire {
    pub active: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passage_wire_forms() {
        let w: PassageWire = serde_json::from_str(
            r#"{"plaza_id":"north","seq":7,"timestamp":3,"tag_read":"00000000000000000000000a","camera":{"reading":"1234"}}"#,
        )
        .unwrap();
        assert_eq!(w.delivery_key().as_deref(), Some("north:7"));
        let ev = w.into_event().unwrap();
        assert_eq!(ev.camera, Some(Capture::Reading("1234".into())));
        assert_eq!(ev.tag_read.unwrap().as_str(), "00000000000000000000000a");

        let img = GrayBitmap::filled(4, 3, 200).unwrap();
        let w = PassageWire {
            plaza_id: "p".into(),
            seq: None,
            idempotency_key: None,
            timestamp: 1,
            tag_read: None,
            camera: Some(CameraWire::scene(&img)),
        };
        let back: PassageWire = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back.into_event().unwrap().camera, Some(Capture::Scene(img)));
    }

    #[test]
    fn malformed_events() {
        let empty = PassageWire {
            plaza_id: "p".into(),
            seq: None,
            idempotency_key: None,
            timestamp: 1,
            tag_read: None,
            camera: None,
        };
        assert!(matches!(empty.clone().into_event(), Err(ServiceError::Invalid(_))));
        let bad_tag = PassageWire {
            tag_read: Some("xyz".into()),
            ..empty.clone()
        };
        assert!(bad_tag.into_event().is_err());
        let bad_scene = PassageWire {
            camera: Some(CameraWire::ScenePgm("!!".into())),
            ..empty
        };
        assert!(bad_scene.into_event().is_err());
    }
}
