//! Fixed-point scores.
//!
//! LII and LXI values live on the closed interval `[0, 10]`. They are stored
//! as integer multiples of `1e-6` so that sums, argmax and optimality checks
//! are exact integer operations. Integer-valued instances (the common case)
//! never round.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

/// Number of fixed-point units per score unit.
pub const SCALE: i64 = 1_000_000;

/// Upper end of the normalized score range.
pub const MAX_SCORE: Score = Score(10 * SCALE);

/// A score or a sum of scores, in fixed-point units of `1e-6`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(i64);

impl Score {
    pub const ZERO: Score = Score(0);

    pub const fn from_int(v: i64) -> Self {
        Score(v * SCALE)
    }

    pub const fn from_raw(raw: i64) -> Self {
        Score(raw)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    /// Rounds `v` to the nearest representable score. Rejects non-finite input.
    pub fn from_f64(v: f64) -> Result<Self, ModelError> {
        if !v.is_finite() {
            return Err(ModelError::NonFinite(v));
        }
        Ok(Score((v * SCALE as f64).round() as i64))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// True if the value is a whole number of score units.
    pub fn is_integral(self) -> bool {
        self.0 % SCALE == 0
    }

    pub fn in_unit_range(self) -> bool {
        self >= Score::ZERO && self <= MAX_SCORE
    }

    pub fn clamp_to_range(self) -> Self {
        self.clamp(Score::ZERO, MAX_SCORE)
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, rhs: Score) -> Score {
        Score(self.0 + rhs.0)
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        self.0 += rhs.0;
    }
}

impl Sub for Score {
    type Output = Score;
    fn sub(self, rhs: Score) -> Score {
        Score(self.0 - rhs.0)
    }
}

impl Mul<i64> for Score {
    type Output = Score;
    fn mul(self, rhs: i64) -> Score {
        Score(self.0 * rhs)
    }
}

impl Sum for Score {
    fn sum<I: Iterator<Item = Score>>(iter: I) -> Score {
        iter.fold(Score::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Score> for Score {
    fn sum<I: Iterator<Item = &'a Score>>(iter: I) -> Score {
        iter.copied().sum()
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integral() {
            write!(f, "{}", self.0 / SCALE)
        } else {
            write!(f, "{}", self.as_f64())
        }
    }
}

// Integral scores serialize as JSON integers so that integer instances
// round-trip byte-for-byte.
impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_integral() {
            s.serialize_i64(self.0 / SCALE)
        } else {
            s.serialize_f64(self.as_f64())
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Score::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Leader-eligibility threshold ρ. A UE may lead only if its LII is strictly
/// greater than ρ.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Threshold(Score);

impl Threshold {
    pub const ZERO: Threshold = Threshold(Score::ZERO);

    pub fn new(rho: Score) -> Result<Self, ModelError> {
        if rho.in_unit_range() {
            Ok(Threshold(rho))
        } else {
            Err(ModelError::ThresholdOutOfRange(rho.as_f64()))
        }
    }

    pub fn from_int(v: i64) -> Result<Self, ModelError> {
        Self::new(Score::from_int(v))
    }

    pub fn from_f64(v: f64) -> Result<Self, ModelError> {
        Self::new(Score::from_f64(v)?)
    }

    /// Clamps any value into `[0, 10]`.
    pub fn clamped(rho: Score) -> Self {
        Threshold(rho.clamp_to_range())
    }

    pub fn score(self) -> Score {
        self.0
    }

    /// `lii > ρ`.
    pub fn admits(self, lii: Score) -> bool {
        lii > self.0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
