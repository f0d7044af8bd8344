use tollgate_plate::vision::recognize_with;

use super::billing::{charge_account, issue_invoice, queue, Message};
use super::two_factor::{two_factor_check, TwoFactor};
use super::{Capture, EngineError, OutcomeKind, PassageEvent, PassageOutcome, TollEngine};
use crate::events::DomainEvent;
use crate::ids::{OwnerId, PlazaId, Ref, VehicleId};
use crate::model::{
    AuthorityAlert, DirectoryEntry, Incident, IncidentKind, NotificationKind, TagState, Tick, VehicleRecord,
    VehicleStatus, AUTHORITY_CHANNEL,
};
use crate::registry::Registry;
use crate::{normalize_plate, ModelError, PlateString};

/// Who a camera reading belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum PlateMatch {
    Vehicle(VehicleId),
    Directory(DirectoryEntry),
    Unknown,
    Ambiguous,
}

/// Exact plate first (registry, then directory). A digits-only reading
/// falls back to the unique registered or directory plate with the same
/// digit subsequence.
pub fn resolve_plate(reg: &Registry, seen: &PlateString) -> PlateMatch {
    if let Some(v) = reg.lookup_by_plate(seen) {
        return PlateMatch::Vehicle(v.vehicle_id);
    }
    if let Some(e) = reg.directory_entry(seen) {
        return PlateMatch::Directory(e.clone());
    }
    let digits = seen.normalized();
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return PlateMatch::Unknown;
    }
    let mut found = PlateMatch::Unknown;
    let vehicles = reg
        .vehicles()
        .filter(|v| v.plate.digits() == digits)
        .map(|v| PlateMatch::Vehicle(v.vehicle_id));
    let entries = reg
        .directory()
        .filter(|e| e.plate.digits() == digits && reg.lookup_by_plate(&e.plate).is_none())
        .map(|e| PlateMatch::Directory(e.clone()));
    for m in vehicles.chain(entries) {
        if found != PlateMatch::Unknown {
            return PlateMatch::Ambiguous;
        }
        found = m;
    }
    found
}

struct Ctx<'a> {
    engine: &'a TollEngine,
    plaza: PlazaId,
    now: Tick,
    refs: Vec<Ref>,
}

impl Ctx<'_> {
    fn incident(&mut self, reg: &mut Registry, kind: IncidentKind) -> Result<(), ModelError> {
        let incident = Incident {
            incident_id: reg.next_incident_id(),
            plaza_id: self.plaza.clone(),
            timestamp: self.now,
            kind,
        };
        self.refs.push(Ref::Incident(incident.incident_id));
        reg.emit(DomainEvent::IncidentLogged(incident))
    }

    fn seen(&self, reg: &mut Registry, vehicle_id: VehicleId) -> Result<(), ModelError> {
        reg.emit(DomainEvent::VehicleSeen {
            vehicle_id,
            plaza_id: self.plaza.clone(),
            at: self.now,
        })
    }

    fn alert(&mut self, reg: &mut Registry, v: &VehicleRecord) -> Result<(), ModelError> {
        let alert = AuthorityAlert {
            alert_id: reg.next_alert_id(),
            vehicle_id: v.vehicle_id,
            plaza_id: self.plaza.clone(),
            timestamp: self.now,
        };
        reg.emit(DomainEvent::AlertRaised(alert.clone()))?;
        self.seen(reg, v.vehicle_id)?;
        self.refs.push(Ref::Alert(alert.alert_id));
        let body = format!(
            "Stolen vehicle {} passed plaza {} at tick {}.\n",
            v.plate.display(),
            self.plaza,
            self.now
        );
        let owner_email = reg.owner(v.owner_id)?.email.clone();
        for (recipient, owner, suffix) in [
            (AUTHORITY_CHANNEL.to_string(), None, "authority"),
            (owner_email, Some(v.owner_id), "owner"),
        ] {
            let key = format!("alert-{}-{suffix}", alert.alert_id.0);
            let n = queue(
                reg,
                Message {
                    recipient,
                    owner_id: owner,
                    kind: NotificationKind::AuthorityAlert,
                    subject: format!("Stolen vehicle {} sighted", v.plate.display()),
                    body: body.clone(),
                    key: &key,
                },
                self.now,
            )?;
            self.refs.push(Ref::Notification(n.notif_id));
        }
        Ok(())
    }

    fn invoice(&mut self, reg: &mut Registry, owner: OwnerId, plate: &PlateString, class: Option<&str>) -> Result<(), ModelError> {
        let amount = self.engine.schedule.amount_for(class, &self.engine.config);
        let (inv, note) = issue_invoice(reg, &self.engine.config, owner, plate, amount, Some(&self.plaza), self.now)?;
        self.refs.push(Ref::Invoice(inv.invoice_id));
        self.refs.push(Ref::Notification(note.notif_id));
        Ok(())
    }
}

enum Reading {
    Plate(PlateString),
    Unreadable(String),
}

fn read_capture(engine: &TollEngine, capture: &Capture, image_id: &str) -> Reading {
    let text = match capture {
        Capture::Reading(t) => t.clone(),
        Capture::Scene(scene) => match recognize_with(scene, image_id, &engine.reader) {
            Ok(r) => r.filtered_text,
            Err(e) => return Reading::Unreadable(e.to_string()),
        },
    };
    if text.trim().is_empty() {
        return Reading::Unreadable("no characters survived the whitelist".into());
    }
    match normalize_plate(&text) {
        Ok(p) => Reading::Plate(p),
        Err(e) => Reading::Unreadable(e.to_string()),
    }
}

impl TollEngine {
    /// Runs one passage through the state machine and records it. A repeated
    /// delivery key returns the recorded outcome without side effects.
    pub fn process_passage(&self, reg: &mut Registry, event: &PassageEvent) -> Result<PassageOutcome, EngineError> {
        if event.tag_read.is_none() && event.camera.is_none() {
            return Err(EngineError::EmptyPassage);
        }
        if let Some(prev) = event.delivery_key.as_deref().and_then(|k| reg.passage_by_key(k)) {
            return Ok(prev.outcome.clone());
        }
        // every event below was validated against the state it is applied to
        let outcome = self.decide(reg, event).expect("passage events are consistent with the registry");
        reg.emit(DomainEvent::PassageRecorded {
            plaza_id: event.plaza_id.clone(),
            at: event.timestamp,
            delivery_key: event.delivery_key.clone(),
            outcome: outcome.clone(),
        })
        .expect("recording a passage cannot fail");
        Ok(outcome)
    }

    fn decide(&self, reg: &mut Registry, event: &PassageEvent) -> Result<PassageOutcome, ModelError> {
        reg.register_plaza(event.plaza_id.clone())?;
        let mut cx = Ctx {
            engine: self,
            plaza: event.plaza_id.clone(),
            now: event.timestamp,
            refs: Vec::new(),
        };
        let image_id = format!("{}-{}", event.plaza_id, event.timestamp);
        let read = |c: &Capture| read_capture(self, c, &image_id);

        let tagged = event.tag_read.as_ref().map(|t| (t, reg.lookup_by_tag(t).cloned()));
        if let Some((_, Some(v))) = &tagged {
            let tag = v.tag.as_ref().expect("tag index points at tagged vehicle");
            if tag.state == TagState::Active {
                return self.tag_path(reg, &mut cx, v, event.camera.as_ref().map(read));
            }
        }
        match tagged {
            Some((t, Some(_))) => cx.incident(reg, IncidentKind::TagInactive { tag_id: t.clone() })?,
            Some((t, None)) => cx.incident(reg, IncidentKind::TagUnknown { tag_id: t.clone() })?,
            None => {}
        }

        let reading = match &event.camera {
            Some(c) => read(c),
            None => Reading::Unreadable("no camera frame".into()),
        };
        let seen = match reading {
            Reading::Plate(p) => p,
            Reading::Unreadable(reason) => {
                cx.incident(reg, IncidentKind::Unreadable { reason })?;
                return Ok(cx.finish(OutcomeKind::UnreadableIgnored, None, None));
            }
        };
        match resolve_plate(reg, &seen) {
            PlateMatch::Vehicle(vid) => {
                let v = reg.vehicle(vid)?.clone();
                if v.status == VehicleStatus::ReportedStolen {
                    cx.alert(reg, &v)?;
                    return Ok(cx.finish(OutcomeKind::TheftAlertRaised, Some(seen), Some(vid)));
                }
                cx.invoice(reg, v.owner_id, &v.plate, v.class.as_deref())?;
                cx.seen(reg, vid)?;
                Ok(cx.finish(OutcomeKind::InvoiceIssued, Some(seen), Some(vid)))
            }
            PlateMatch::Directory(entry) => {
                let owner = match reg.owner_by_email(&entry.email) {
                    Some(o) => o.owner_id,
                    None => reg.add_owner(&entry.name, &entry.email, String::new(), true)?,
                };
                cx.invoice(reg, owner, &entry.plate, None)?;
                Ok(cx.finish(OutcomeKind::InvoiceIssued, Some(seen), None))
            }
            PlateMatch::Unknown => {
                cx.incident(
                    reg,
                    IncidentKind::UnknownPlate {
                        ocr_text: seen.normalized().to_string(),
                    },
                )?;
                Ok(cx.finish(OutcomeKind::UnreadableIgnored, Some(seen), None))
            }
            PlateMatch::Ambiguous => {
                cx.incident(
                    reg,
                    IncidentKind::AmbiguousPlate {
                        ocr_text: seen.normalized().to_string(),
                    },
                )?;
                Ok(cx.finish(OutcomeKind::UnreadableIgnored, Some(seen), None))
            }
        }
    }

    fn tag_path(
        &self,
        reg: &mut Registry,
        cx: &mut Ctx<'_>,
        v: &VehicleRecord,
        reading: Option<Reading>,
    ) -> Result<PassageOutcome, ModelError> {
        let vid = Some(v.vehicle_id);
        let seen = match &reading {
            Some(Reading::Plate(p)) => Some(p.clone()),
            _ => None,
        };
        if v.status == VehicleStatus::ReportedStolen {
            cx.alert(reg, v)?;
            return Ok(cx.finish(OutcomeKind::TheftAlertRaised, seen, vid));
        }
        if let Some(ocr) = &seen {
            if two_factor_check(&v.plate, ocr, self.policy) == TwoFactor::Mismatch {
                cx.incident(
                    reg,
                    IncidentKind::TwoFactorMismatch {
                        vehicle_id: v.vehicle_id,
                        tag_plate: v.plate.clone(),
                        ocr_text: ocr.normalized().to_string(),
                    },
                )?;
                return Ok(cx.finish(OutcomeKind::TwoFactorMismatch, seen, vid));
            }
        }
        // an unreadable frame leaves the tag as the only factor
        let amount = self.schedule.amount_for(v.class.as_deref(), &self.config);
        let outcome = match charge_account(reg, v.owner_id, amount, &cx.plaza, cx.now) {
            Ok(tx) => {
                cx.refs.push(Ref::Transaction(tx.tx_id));
                OutcomeKind::ChargedViaTag
            }
            Err(ModelError::InsufficientFunds { .. }) => {
                cx.invoice(reg, v.owner_id, &v.plate, v.class.as_deref())?;
                OutcomeKind::InvoiceIssued
            }
            Err(e) => return Err(e),
        };
        cx.seen(reg, v.vehicle_id)?;
        Ok(cx.finish(outcome, seen, vid))
    }
}

impl Ctx<'_> {
    fn finish(&mut self, kind: OutcomeKind, plate_seen: Option<PlateString>, vehicle_id: Option<VehicleId>) -> PassageOutcome {
        PassageOutcome {
            kind,
            refs: std::mem::take(&mut self.refs),
            plate_seen,
            vehicle_id,
        }
    }
}
