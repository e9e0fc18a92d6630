//! Fixed-point time on the dialog audio timeline.
//!
//! All timeline arithmetic happens in whole milliseconds so that the
//! scheduler's gap rules and the emitted 3-decimal scripts are exact.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Millis(pub i64);

impl Millis {
    pub const ZERO: Millis = Millis(0);

    pub fn from_secs_f64(secs: f64) -> Option<Millis> {
        if !secs.is_finite() {
            return None;
        }
        let ms = (secs * 1000.0).round();
        if ms.abs() > i64::MAX as f64 / 2.0 {
            return None;
        }
        Some(Millis(ms as i64))
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// Parses a non-negative decimal seconds literal such as `1.90` or `12`.
    /// Digits beyond the millisecond are rounded.
    pub fn parse_secs(text: &str) -> Option<Millis> {
        let mut seen_dot = false;
        let mut digits = 0;
        for c in text.chars() {
            match c {
                '0'..='9' => digits += 1,
                '.' if !seen_dot => seen_dot = true,
                _ => return None,
            }
        }
        if digits == 0 {
            return None;
        }
        text.parse::<f64>().ok().and_then(Millis::from_secs_f64)
    }

    /// `self / factor`, rounded to the nearest millisecond.
    pub fn div_f64(self, factor: f64) -> Millis {
        Millis((self.0 as f64 / factor).round() as i64)
    }

    pub fn max(self, other: Millis) -> Millis {
        Millis(self.0.max(other.0))
    }

    pub fn min(self, other: Millis) -> Millis {
        Millis(self.0.min(other.0))
    }

    /// Seconds with two decimals when the value sits on the centisecond grid,
    /// three otherwise. Used by the annotation format.
    pub fn to_compact_secs(self) -> String {
        if self.0 % 10 == 0 {
            let cs = self.0 / 10;
            let sign = if cs < 0 { "-" } else { "" };
            format!("{sign}{}.{:02}", cs.abs() / 100, cs.abs() % 100)
        } else {
            self.to_string()
        }
    }
}

/// Seconds with exactly three decimals.
impl fmt::Display for Millis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{:03}", self.0.abs() / 1000, self.0.abs() % 1000)
    }
}

impl Add for Millis {
    type Output = Millis;
    fn add(self, rhs: Millis) -> Millis {
        Millis(self.0 + rhs.0)
    }
}

impl Sub for Millis {
    type Output = Millis;
    fn sub(self, rhs: Millis) -> Millis {
        Millis(self.0 - rhs.0)
    }
}

/// Rounds to three decimals. Values produced this way survive a
/// print-with-`{:.3}`-and-parse round trip bit for bit.
pub fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
