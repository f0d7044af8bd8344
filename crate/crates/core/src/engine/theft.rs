use super::billing::{queue, Message};
use crate::events::DomainEvent;
use crate::ids::{ReportId, VehicleId};
use crate::model::{NotificationKind, ReportState, TheftReport, Tick, VehicleStatus};
use crate::registry::Registry;
use crate::ModelError;

/// Flags the vehicle stolen and puts it on every plaza's watchlist.
pub fn report_theft(reg: &mut Registry, vehicle_id: VehicleId, now: Tick) -> Result<TheftReport, ModelError> {
    let v = reg.vehicle(vehicle_id)?;
    if v.status == VehicleStatus::ReportedStolen {
        return Err(ModelError::AlreadyReported(vehicle_id));
    }
    let (owner_id, plate) = (v.owner_id, v.plate.clone());
    let report = TheftReport {
        report_id: reg.next_report_id(),
        vehicle_id,
        reported_at: now,
        state: ReportState::Open,
        admin_response: None,
    };
    reg.emit(DomainEvent::TheftReported(report.clone()))?;
    let email = reg.owner(owner_id)?.email.clone();
    let key = format!("theft-{}", report.report_id.0);
    queue(
        reg,
        Message {
            recipient: email,
            owner_id: Some(owner_id),
            kind: NotificationKind::TheftConfirmed,
            subject: format!("Theft report {} received", report.report_id),
            body: format!(
                "Vehicle {} is now flagged at every toll plaza. You will be notified when it is seen.\n",
                plate.display()
            ),
            key: &key,
        },
        now,
    )?;
    Ok(report)
}

/// Admin reply to a report; the owner is notified.
pub fn respond_to_report(reg: &mut Registry, report_id: ReportId, response: &str, now: Tick) -> Result<TheftReport, ModelError> {
    reg.emit(DomainEvent::TheftReportResponded {
        report_id,
        response: response.to_string(),
    })?;
    let report = reg.report(report_id)?.clone();
    let v = reg.vehicle(report.vehicle_id)?;
    let (owner_id, plate) = (v.owner_id, v.plate.clone());
    let email = reg.owner(owner_id)?.email.clone();
    let key = format!("report-response-{}-{}", report_id.0, reg.notifications().count());
    queue(
        reg,
        Message {
            recipient: email,
            owner_id: Some(owner_id),
            kind: NotificationKind::Generic,
            subject: format!("Update on theft report {report_id}"),
            body: format!("About vehicle {}:\n\n{response}\n", plate.display()),
            key: &key,
        },
        now,
    )?;
    Ok(report)
}

/// Vehicle recovered: clears the stolen flag and the watchlists.
pub fn close_report(reg: &mut Registry, report_id: ReportId) -> Result<(), ModelError> {
    reg.emit(DomainEvent::TheftReportClosed { report_id })
}
