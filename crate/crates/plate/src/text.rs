use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MAX_PLATE_LEN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlateError {
    #[error("plate is empty")]
    EmptyPlate,
    #[error("plate contains illegal character {0:?}")]
    IllegalChar(char),
    #[error("plate has {0} characters, the limit is {MAX_PLATE_LEN}")]
    TooLong(usize),
}

/// A registration number: uppercase `[A-Z0-9]` without separators, plus the
/// form it was written in.
#[derive(Debug, Clone)]
pub struct PlateString {
    normalized: String,
    display: String,
}

/// Uppercases, drops `-` and space separators, and rejects anything outside
/// `[A-Za-z0-9]`.
pub fn normalize_plate(raw: &str) -> Result<PlateString, PlateError> {
    let display = raw.trim();
    if display.is_empty() {
        return Err(PlateError::EmptyPlate);
    }
    let mut normalized = String::with_capacity(display.len());
    for c in display.chars() {
        match c {
            '-' | ' ' => {}
            c if c.is_ascii_alphanumeric() => normalized.push(c.to_ascii_uppercase()),
            c => return Err(PlateError::IllegalChar(c)),
        }
    }
    if normalized.is_empty() {
        return Err(PlateError::EmptyPlate);
    }
    if normalized.len() > MAX_PLATE_LEN {
        return Err(PlateError::TooLong(normalized.len()));
    }
    Ok(PlateString {
        normalized,
        display: display.to_string(),
    })
}

impl PlateString {
    pub fn parse(raw: &str) -> Result<Self, PlateError> {
        normalize_plate(raw)
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    pub fn display(&self) -> &str {
        &self.display
    }

    /// The digit subsequence, e.g. `DHA1234` -> `1234`.
    pub fn digits(&self) -> String {
        self.normalized.chars().filter(char::is_ascii_digit).collect()
    }
}

// identity is the normalized form; display is presentation only
impl PartialEq for PlateString {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for PlateString {}

impl std::hash::Hash for PlateString {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.normalized.hash(state)
    }
}

impl PartialOrd for PlateString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PlateString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

impl std::fmt::Display for PlateString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.display)
    }
}

impl Serialize for PlateString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.display)
    }
}

impl<'de> Deserialize<'de> for PlateString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        normalize_plate(&raw).map_err(serde::de::Error::custom)
    }
}
