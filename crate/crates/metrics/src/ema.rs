use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::EvalError;

/// Smoothing weight used when none is configured.
pub const DEFAULT_EMA_WEIGHT: f64 = 0.6;

/// A named training-log curve, e.g. `total-loss` or `learning-rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSeries {
    pub name: String,
    pub points: Vec<(i64, f64)>,
}

impl LogSeries {
    pub fn new(name: impl Into<String>, points: Vec<(i64, f64)>) -> Result<Self, EvalError> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(EvalError::NonIncreasingStep(w[1].0, w[0].0));
            }
        }
        Ok(Self {
            name: name.into(),
            points,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_weight(weight: f64) -> Result<(), EvalError> {
    if (0.0..1.0).contains(&weight) {
        Ok(())
    } else {
        Err(EvalError::BadWeight(weight))
    }
}

/// Debiased exponential moving average: `s_t = w*s_{t-1} + (1-w)*v_t` from
/// `s_0 = 0`, reported as `s_t / (1 - w^(t+1))`. Steps are carried over.
pub fn ema_smooth(series: &LogSeries, weight: f64) -> Result<LogSeries, EvalError> {
    check_weight(weight)?;
    if series.is_empty() {
        return Err(EvalError::EmptySeries);
    }
    let mut s = 0.0;
    let mut decay = 1.0;
    let points = series
        .points
        .iter()
        .map(|&(step, v)| {
            s = weight * s + (1.0 - weight) * v;
            decay *= weight;
            (step, s / (1.0 - decay))
        })
        .collect();
    Ok(LogSeries {
        name: series.name.clone(),
        points,
    })
}

/// Last smoothed value.
pub fn final_smoothed(series: &LogSeries, weight: f64) -> Result<f64, EvalError> {
    let smoothed = ema_smooth(series, weight)?;
    Ok(smoothed.points.last().map(|p| p.1).unwrap_or_default())
}

/// Reads a `step,value` CSV with a header line.
pub fn read_series_csv(name: &str, reader: impl BufRead) -> Result<LogSeries, EvalError> {
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if i == 0 || line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| EvalError::Parse { line: i + 1, reason };
        let (step, value) = line
            .split_once(',')
            .ok_or_else(|| parse_err("expected step,value".into()))?;
        let step: i64 = step.trim().parse().map_err(|e| parse_err(format!("step: {e}")))?;
        let value: f64 = value.trim().parse().map_err(|e| parse_err(format!("value: {e}")))?;
        points.push((step, value));
    }
    LogSeries::new(name, points)
}
