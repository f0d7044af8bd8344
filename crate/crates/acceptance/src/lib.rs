//! Runner for the acceptance gate in `tests/acceptance.rs`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Result of one criterion.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "{} {:<28} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Runs `check` under a time budget. A panic, an `Err`, or overrunning the
/// budget fails the criterion; `Ok(detail)` passes it.
pub fn criterion(name: &'static str, budget: Duration, check: impl FnOnce() -> Result<String, String>) -> Verdict {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(Ok(d)) if elapsed <= budget => (true, d),
        Ok(Ok(d)) => (false, format!("{d}; over the {}s budget", budget.as_secs())),
        Ok(Err(e)) => (false, e),
        Err(p) => (
            false,
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()),
        ),
    };
    Verdict {
        name,
        passed,
        detail,
        elapsed,
    }
}

/// `Err(msg)` unless `cond` holds.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}
