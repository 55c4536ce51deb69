// SPDX-License-Identifier: Apache-2.0
//! Time markers.
//!
//! A time marker tags every datum with the clock cycle at which it entered
//! the design. Markers start out [`TimeMarker::Uninitialized`] (rendered as
//! `-1` in reports) and become valid once a source starts emitting.
//!
//! Arithmetic lives on a [`MarkerDomain`]. The production domain is
//! [`MarkerWindow`], where markers wrap modulo a power-of-two window `W` and
//! differences are read in the signed half-window `[-W/2, W/2)`. All real
//! latency differences must stay below `W/2`; the domain does not attempt to
//! detect aliasing beyond that. [`Unbounded`] is a plain-integer domain used as
//! a reference when checking that wrapping does not change any result.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Default marker window, `2^16`.
pub const DEFAULT_WINDOW: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkerError {
    #[error("time marker is uninitialized")]
    UninitializedMarker,
    #[error("empty marker set")]
    EmptyMarkerSet,
    #[error("marker window {0} is not a power of two in 2..=2^62")]
    BadWindow(u64),
    #[error("marker value {value} outside window {window}")]
    OutOfWindow { value: u64, window: u64 },
    #[error("unbounded marker overflowed")]
    Overflow,
    #[error("invalid marker literal `{0}`")]
    BadLiteral(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TimeMarker {
    #[default]
    Uninitialized,
    Valid(u64),
}

impl TimeMarker {
    pub fn is_valid(self) -> bool {
        matches!(self, TimeMarker::Valid(_))
    }

    pub fn value(self) -> Option<u64> {
        match self {
            TimeMarker::Valid(v) => Some(v),
            TimeMarker::Uninitialized => None,
        }
    }

    /// Report rendering: the value itself, or `-1` when uninitialized.
    pub fn to_report_int(self) -> i64 {
        match self {
            TimeMarker::Valid(v) => v as i64,
            TimeMarker::Uninitialized => -1,
        }
    }

    pub fn from_report_int(v: i64) -> Result<Self, MarkerError> {
        match v {
            -1 => Ok(TimeMarker::Uninitialized),
            v if v >= 0 => Ok(TimeMarker::Valid(v as u64)),
            v => Err(MarkerError::BadLiteral(v.to_string())),
        }
    }
}

impl fmt::Display for TimeMarker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_report_int())
    }
}

impl FromStr for TimeMarker {
    type Err = MarkerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // Plain ASCII decimal only: no sign other than the literal -1, no padding.
        let ok = s == "-1"
            || (!s.is_empty()
                && s.bytes().all(|b| b.is_ascii_digit())
                && (s == "0" || !s.starts_with('0')));
        if !ok {
            return Err(MarkerError::BadLiteral(s.to_owned()));
        }
        let v: i64 = s
            .parse()
            .map_err(|_| MarkerError::BadLiteral(s.to_owned()))?;
        TimeMarker::from_report_int(v)
    }
}

/// Marker arithmetic.
///
/// Implementors supply successor and signed difference; minimum and equality
/// checks are derived from the difference so every domain orders markers the
/// same way.
pub trait MarkerDomain: Copy + fmt::Debug + Send + Sync {
    /// Successor of a valid marker. Sources own the transition out of
    /// `Uninitialized`, so advancing an uninitialized marker is an error.
    fn advance(&self, m: TimeMarker) -> Result<TimeMarker, MarkerError>;

    /// `a - b`; positive when `a` is newer.
    fn diff(&self, a: TimeMarker, b: TimeMarker) -> Result<i64, MarkerError>;

    /// Largest run length (or latency difference) the domain can represent
    /// unambiguously; `None` for unbounded domains.
    fn horizon(&self) -> Option<u64>;

    /// Checks that a value read back from a report belongs to the domain.
    fn check_value(&self, v: u64) -> Result<(), MarkerError>;

    /// The oldest marker of a set. Any uninitialized member makes the result
    /// uninitialized.
    fn min(&self, ms: &[TimeMarker]) -> Result<TimeMarker, MarkerError> {
        let first = ms.first().ok_or(MarkerError::EmptyMarkerSet)?;
        if ms.iter().any(|m| !m.is_valid()) {
            return Ok(TimeMarker::Uninitialized);
        }
        let pivot = *first;
        let mut best = pivot;
        let mut best_d = 0i64;
        for &m in &ms[1..] {
            let d = self.diff(m, pivot)?;
            if d < best_d {
                best = m;
                best_d = d;
            }
        }
        Ok(best)
    }

    /// True when every marker is identical (all-uninitialized counts as equal).
    fn all_equal(&self, ms: &[TimeMarker]) -> bool {
        ms.windows(2).all(|w| w[0] == w[1])
    }
}

/// Wrapping markers modulo a power-of-two window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarkerWindow {
    modulus: u64,
}

impl MarkerWindow {
    pub fn new(modulus: u64) -> Result<Self, MarkerError> {
        if modulus < 2 || !modulus.is_power_of_two() || modulus > 1 << 62 {
            return Err(MarkerError::BadWindow(modulus));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn half(&self) -> u64 {
        self.modulus / 2
    }
}

impl Default for MarkerWindow {
    fn default() -> Self {
        Self {
            modulus: DEFAULT_WINDOW,
        }
    }
}

impl MarkerDomain for MarkerWindow {
    fn advance(&self, m: TimeMarker) -> Result<TimeMarker, MarkerError> {
        match m {
            TimeMarker::Valid(v) => Ok(TimeMarker::Valid((v + 1) & (self.modulus - 1))),
            TimeMarker::Uninitialized => Err(MarkerError::UninitializedMarker),
        }
    }

    fn diff(&self, a: TimeMarker, b: TimeMarker) -> Result<i64, MarkerError> {
        let (Some(a), Some(b)) = (a.value(), b.value()) else {
            return Err(MarkerError::UninitializedMarker);
        };
        let d = a.wrapping_sub(b) & (self.modulus - 1);
        if d >= self.half() {
            Ok(d as i64 - self.modulus as i64)
        } else {
            Ok(d as i64)
        }
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.half())
    }

    fn check_value(&self, v: u64) -> Result<(), MarkerError> {
        if v < self.modulus {
            Ok(())
        } else {
            Err(MarkerError::OutOfWindow {
                value: v,
                window: self.modulus,
            })
        }
    }
}

/// Non-wrapping integer markers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Unbounded;

impl MarkerDomain for Unbounded {
    fn advance(&self, m: TimeMarker) -> Result<TimeMarker, MarkerError> {
        match m {
            TimeMarker::Valid(v) => v
                .checked_add(1)
                .filter(|&v| v <= i64::MAX as u64)
                .map(TimeMarker::Valid)
                .ok_or(MarkerError::Overflow),
            TimeMarker::Uninitialized => Err(MarkerError::UninitializedMarker),
        }
    }

    fn diff(&self, a: TimeMarker, b: TimeMarker) -> Result<i64, MarkerError> {
        match (a.value(), b.value()) {
            (Some(a), Some(b)) => Ok(a as i64 - b as i64),
            _ => Err(MarkerError::UninitializedMarker),
        }
    }

    fn horizon(&self) -> Option<u64> {
        None
    }

    fn check_value(&self, v: u64) -> Result<(), MarkerError> {
        if v <= i64::MAX as u64 {
            Ok(())
        } else {
            Err(MarkerError::Overflow)
        }
    }
}

/// Successor in the default window.
pub fn advance(m: TimeMarker) -> Result<TimeMarker, MarkerError> {
    MarkerWindow::default().advance(m)
}

/// Shortest-wrap difference in the default window.
pub fn marker_diff(a: TimeMarker, b: TimeMarker) -> Result<i64, MarkerError> {
    MarkerWindow::default().diff(a, b)
}

/// Oldest marker in the default window.
pub fn marker_min(ms: &[TimeMarker]) -> Result<TimeMarker, MarkerError> {
    MarkerWindow::default().min(ms)
}
