use std::path::{Path, PathBuf};

use thiserror::Error;
use tollgate_core::Notification;

#[derive(Debug, Error)]
#[error("transport failed for {key}: {reason}")]
pub struct TransportError {
    pub key: String,
    pub reason: String,
}

/// Delivers notifications somewhere outside the service.
pub trait Transport: Send {
    fn send(&mut self, n: &Notification) -> Result<(), TransportError>;
}

/// Writes each message to `<dir>/<idempotency_key>.txt`. Resending the same
/// key overwrites the same file, so redelivery is harmless.
#[derive(Debug, Clone)]
pub struct FileTransport {
    dir: PathBuf,
}

impl FileTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn file_for(&self, key: &str) -> PathBuf {
        let safe: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
            .collect();
        self.dir.join(format!("{safe}.txt"))
    }
}

pub fn render_message(n: &Notification) -> String {
    format!(
        "To: {}\nSubject: {}\nKind: {:?}\nId: {}\nKey: {}\n\n{}",
        n.recipient, n.subject, n.kind, n.notif_id, n.idempotency_key, n.body
    )
}

impl Transport for FileTransport {
    fn send(&mut self, n: &Notification) -> Result<(), TransportError> {
        let fail = |e: std::io::Error| TransportError {
            key: n.idempotency_key.clone(),
            reason: e.to_string(),
        };
        std::fs::create_dir_all(&self.dir).map_err(fail)?;
        let path = self.file_for(&n.idempotency_key);
        // write-then-rename so a crash never leaves half a message
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, render_message(n)).map_err(fail)?;
        std::fs::rename(&tmp, &path).map_err(fail)
    }
}

/// Collects messages in memory.
#[derive(Debug, Default, Clone)]
pub struct MemoryTransport {
    pub sent: Vec<Notification>,
    /// When set, every send fails.
    pub fail: bool,
}

impl Transport for MemoryTransport {
    fn send(&mut self, n: &Notification) -> Result<(), TransportError> {
        if self.fail {
            return Err(TransportError {
                key: n.idempotency_key.clone(),
                reason: "transport offline".into(),
            });
        }
        self.sent.push(n.clone());
        Ok(())
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct DrainReport {
    pub delivered: usize,
    pub failed: usize,
}
