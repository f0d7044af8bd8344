use super::EngineConfig;
use crate::events::DomainEvent;
use crate::ids::{InvoiceId, OwnerId, PlazaId};
use crate::model::{Invoice, InvoiceState, Money, Notification, NotificationKind, NotificationState, Tick, Transaction, TxKind};
use crate::registry::Registry;
use crate::{ModelError, PlateString};

/// An outgoing notification before it gets an id.
pub struct Message<'a> {
    pub recipient: String,
    pub owner_id: Option<OwnerId>,
    pub kind: NotificationKind,
    pub subject: String,
    pub body: String,
    pub key: &'a str,
}

/// Queues a message unless one with the same idempotency key exists.
pub fn queue(reg: &mut Registry, msg: Message<'_>, at: Tick) -> Result<Notification, ModelError> {
    if let Some(existing) = reg.notification_by_key(msg.key) {
        return Ok(existing.clone());
    }
    let n = Notification {
        notif_id: reg.next_notification_id(),
        recipient: msg.recipient,
        owner_id: msg.owner_id,
        kind: msg.kind,
        subject: msg.subject,
        body: msg.body,
        idempotency_key: msg.key.to_string(),
        created_at: at,
        state: NotificationState::Queued,
    };
    reg.emit(DomainEvent::NotificationQueued(n.clone()))?;
    Ok(n)
}

/// Deducts a toll from the prepaid balance.
pub fn charge_account(
    reg: &mut Registry,
    owner_id: OwnerId,
    amount: Money,
    plaza_id: &PlazaId,
    now: Tick,
) -> Result<Transaction, ModelError> {
    if amount <= 0 {
        return Err(ModelError::NonPositiveAmount(amount));
    }
    let tx = Transaction {
        tx_id: reg.next_tx_id(),
        owner_id,
        plaza_id: Some(plaza_id.clone()),
        amount,
        kind: TxKind::TollDeduction,
        timestamp: now,
        invoice_id: None,
    };
    reg.emit(DomainEvent::TransactionRecorded(tx.clone()))?;
    Ok(tx)
}

/// Opens an invoice due `deadline_ticks` from now and mails the owner.
pub fn issue_invoice(
    reg: &mut Registry,
    config: &EngineConfig,
    owner_id: OwnerId,
    plate: &PlateString,
    amount: Money,
    plaza_id: Option<&PlazaId>,
    now: Tick,
) -> Result<(Invoice, Notification), ModelError> {
    let owner = reg.owner(owner_id)?;
    let (email, name) = (owner.email.clone(), owner.name.clone());
    let inv = Invoice {
        invoice_id: reg.next_invoice_id(),
        owner_id,
        plate: plate.clone(),
        plaza_id: plaza_id.cloned(),
        amount,
        issued_at: now,
        deadline: now + config.deadline_ticks.max(1),
        state: InvoiceState::Open,
    };
    reg.emit(DomainEvent::InvoiceIssued(inv.clone()))?;
    let where_ = plaza_id.map(|p| format!(" at plaza {p}")).unwrap_or_default();
    let key = format!("invoice-{}", inv.invoice_id.0);
    let note = queue(
        reg,
        Message {
            recipient: email,
            owner_id: Some(owner_id),
            kind: NotificationKind::InvoiceIssued,
            subject: format!("Toll invoice {} for {}", inv.invoice_id, plate.display()),
            body: format!(
                "Dear {name},\n\nVehicle {} passed{where_} at tick {now}. A toll of {amount} is due by tick {}. \
                 Unpaid invoices are fined {}% after the deadline.\n",
                plate.display(),
                inv.deadline,
                config.fine_surcharge_percent,
            ),
            key: &key,
        },
        now,
    )?;
    Ok((inv, note))
}

/// Fines every open invoice whose deadline is strictly before `now`.
/// Running it again at the same time adds nothing.
pub fn sweep_overdue(reg: &mut Registry, config: &EngineConfig, now: Tick) -> Result<Vec<Transaction>, ModelError> {
    let due: Vec<Invoice> = reg
        .invoices()
        .filter(|i| i.state == InvoiceState::Open && i.deadline < now)
        .cloned()
        .collect();
    let mut fines = Vec::with_capacity(due.len());
    for inv in due {
        let tx = Transaction {
            tx_id: reg.next_tx_id(),
            owner_id: inv.owner_id,
            plaza_id: inv.plaza_id.clone(),
            amount: config.fine_for(inv.amount),
            kind: TxKind::Fine,
            timestamp: now,
            invoice_id: Some(inv.invoice_id),
        };
        reg.emit(DomainEvent::TransactionRecorded(tx.clone()))?;
        reg.emit(DomainEvent::InvoiceFined {
            invoice_id: inv.invoice_id,
        })?;
        let email = reg.owner(inv.owner_id)?.email.clone();
        let key = format!("fine-{}", inv.invoice_id.0);
        queue(
            reg,
            Message {
                recipient: email,
                owner_id: Some(inv.owner_id),
                kind: NotificationKind::FineApplied,
                subject: format!("Fine applied to invoice {}", inv.invoice_id),
                body: format!(
                    "Invoice {} for {} was not paid by tick {}. A fine of {} has been charged.\n",
                    inv.invoice_id,
                    inv.plate.display(),
                    inv.deadline,
                    tx.amount
                ),
                key: &key,
            },
            now,
        )?;
        fines.push(tx);
    }
    Ok(fines)
}

/// Settles an open invoice through the owner's payment method.
pub fn pay_invoice(reg: &mut Registry, invoice_id: InvoiceId, now: Tick) -> Result<Transaction, ModelError> {
    let inv = reg.invoice(invoice_id)?;
    if inv.state != InvoiceState::Open {
        return Err(ModelError::InvoiceNotOpen(invoice_id));
    }
    let tx = Transaction {
        tx_id: reg.next_tx_id(),
        owner_id: inv.owner_id,
        plaza_id: None,
        amount: inv.amount,
        kind: TxKind::InvoicePayment,
        timestamp: now,
        invoice_id: Some(invoice_id),
    };
    reg.emit(DomainEvent::TransactionRecorded(tx.clone()))?;
    reg.emit(DomainEvent::InvoicePaid { invoice_id })?;
    Ok(tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize_plate;

    fn setup(balance: Money) -> (Registry, OwnerId) {
        let mut r = Registry::new();
        let o = r.register_owner("Ann", "ann@example.com", String::new()).unwrap();
        if balance > 0 {
            r.credit_balance(o, balance, 0).unwrap();
        }
        (r, o)
    }

    fn plaza() -> PlazaId {
        PlazaId::new("p1")
    }

    #[test]
    fn charges() {
        let (mut r, o) = setup(100);
        charge_account(&mut r, o, 25, &plaza(), 1).unwrap();
        assert_eq!(r.owner(o).unwrap().balance, 75);
        charge_account(&mut r, o, 25, &plaza(), 2).unwrap();
        assert_eq!(r.owner(o).unwrap().balance, 50);
        assert_eq!(r.transactions().len(), 2);
        assert_ne!(r.transactions()[0].tx_id, r.transactions()[1].tx_id);
    }

    #[test]
    fn insufficient_funds_leaves_balance() {
        let (mut r, o) = setup(10);
        assert_eq!(
            charge_account(&mut r, o, 25, &plaza(), 1).unwrap_err(),
            ModelError::InsufficientFunds { balance: 10, needed: 25 }
        );
        assert_eq!(r.owner(o).unwrap().balance, 10);
        assert!(r.transactions().is_empty());
    }

    #[test]
    fn invoice_deadline_and_body() {
        let (mut r, o) = setup(0);
        let cfg = EngineConfig::default();
        let plate = normalize_plate("dha-1234").unwrap();
        let (inv, note) = issue_invoice(&mut r, &cfg, o, &plate, 25, Some(&plaza()), 5000).unwrap();
        assert_eq!(inv.deadline, 6000);
        assert_eq!(inv.state, InvoiceState::Open);
        assert!(note.body.contains("dha-1234"));
        assert!(note.body.contains("6000"));
        let (inv2, _) = issue_invoice(&mut r, &cfg, o, &plate, 25, None, 5000).unwrap();
        assert_ne!(inv.invoice_id, inv2.invoice_id);
        assert_eq!(r.open_invoices(o).count(), 2);
        assert!(matches!(
            issue_invoice(&mut r, &cfg, OwnerId(42), &plate, 25, None, 0),
            Err(ModelError::UnknownOwner(_))
        ));
    }

    #[test]
    fn sweep_boundary_and_idempotence() {
        let (mut r, o) = setup(0);
        let cfg = EngineConfig::default();
        let plate = normalize_plate("4821").unwrap();
        let (inv, _) = issue_invoice(&mut r, &cfg, o, &plate, 25, None, 5000).unwrap();
        assert!(sweep_overdue(&mut r, &cfg, 5999).unwrap().is_empty());
        assert!(sweep_overdue(&mut r, &cfg, 6000).unwrap().is_empty());
        let fines = sweep_overdue(&mut r, &cfg, 6001).unwrap();
        assert_eq!(fines.len(), 1);
        assert_eq!(fines[0].amount, 37);
        assert_eq!(r.invoice(inv.invoice_id).unwrap().state, InvoiceState::Fined);
        assert!(sweep_overdue(&mut r, &cfg, 6001).unwrap().is_empty());
        let fine_txs = r.transactions().iter().filter(|t| t.kind == TxKind::Fine).count();
        assert_eq!(fine_txs, 1);
        assert_eq!(r.notifications().filter(|n| n.kind == NotificationKind::FineApplied).count(), 1);
        // fines do not touch the prepaid balance
        assert_eq!(r.owner(o).unwrap().balance, 0);
    }

    #[test]
    fn pay_state_machine() {
        let (mut r, o) = setup(0);
        let cfg = EngineConfig::default();
        let plate = normalize_plate("4821").unwrap();
        let (a, _) = issue_invoice(&mut r, &cfg, o, &plate, 25, None, 0).unwrap();
        let tx = pay_invoice(&mut r, a.invoice_id, 10).unwrap();
        assert_eq!((tx.kind, tx.amount), (TxKind::InvoicePayment, 25));
        assert_eq!(r.invoice(a.invoice_id).unwrap().state, InvoiceState::Paid);
        assert_eq!(pay_invoice(&mut r, a.invoice_id, 11).unwrap_err(), ModelError::InvoiceNotOpen(a.invoice_id));
        let (b, _) = issue_invoice(&mut r, &cfg, o, &plate, 25, None, 0).unwrap();
        sweep_overdue(&mut r, &cfg, 2000).unwrap();
        assert_eq!(pay_invoice(&mut r, b.invoice_id, 2001).unwrap_err(), ModelError::InvoiceNotOpen(b.invoice_id));
    }

    #[test]
    fn fine_rounding() {
        let cfg = EngineConfig::default();
        assert_eq!(cfg.fine_for(25), 37);
        assert_eq!(cfg.fine_for(100), 150);
        let none = EngineConfig {
            fine_surcharge_percent: 0,
            ..cfg
        };
        assert_eq!(none.fine_for(25), 25);
    }
}
