use serde::{Deserialize, Serialize};

use crate::PlateString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TwoFactorPolicy {
    /// OCR digits equal the digits of the registered plate, e.g. a
    /// digits-only reader seeing `DHA1234` as `1234`.
    #[default]
    DigitSubsequence,
    /// Full normalized plates must be equal.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoFactor {
    Match,
    Mismatch,
}

pub fn two_factor_check(tag_plate: &PlateString, ocr_plate: &PlateString, policy: TwoFactorPolicy) -> TwoFactor {
    let ok = match policy {
        TwoFactorPolicy::DigitSubsequence => ocr_plate.digits() == tag_plate.digits(),
        TwoFactorPolicy::Exact => ocr_plate == tag_plate,
    };
    if ok {
        TwoFactor::Match
    } else {
        TwoFactor::Mismatch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize_plate;

    fn p(s: &str) -> PlateString {
        normalize_plate(s).unwrap()
    }

    #[test]
    fn policy_examples() {
        let d = TwoFactorPolicy::DigitSubsequence;
        assert_eq!(two_factor_check(&p("DHA1234"), &p("1234"), d), TwoFactor::Match);
        assert_eq!(two_factor_check(&p("DHA1234"), &p("9999"), d), TwoFactor::Mismatch);
        assert_eq!(two_factor_check(&p("4821"), &p("4821"), d), TwoFactor::Match);
        assert_eq!(two_factor_check(&p("DHA1234"), &p("1234"), TwoFactorPolicy::Exact), TwoFactor::Mismatch);
    }
}
