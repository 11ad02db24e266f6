//! Exact decimal numbers for thresholds and predictions.
//!
//! Atoms are keyed by value identity, so thresholds are never floats:
//! a `Decimal` is `mantissa * 10^-scale` with the mantissa normalized to
//! carry no trailing zeros. Comparison, ordering and midpoints are exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact base-10 number: `mantissa / 10^scale`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DecimalParseError {
    #[error("empty number")]
    Empty,
    #[error("invalid digit in number: {0:?}")]
    InvalidDigit(String),
    #[error("number out of range: {0:?}")]
    OutOfRange(String),
}

impl Decimal {
    pub const ZERO: Decimal = Decimal { mantissa: 0, scale: 0 };

    pub fn new(mantissa: i128, scale: u32) -> Decimal {
        Decimal { mantissa, scale }.normalized()
    }

    pub fn from_int(v: i64) -> Decimal {
        Decimal { mantissa: v as i128, scale: 0 }
    }

    fn normalized(mut self) -> Decimal {
        if self.mantissa == 0 {
            self.scale = 0;
            return self;
        }
        while self.scale > 0 && self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.scale -= 1;
        }
        self
    }

    /// Mantissa rescaled so both operands share a scale. Panics on overflow,
    /// which cannot happen for parsed inputs (mantissas are bounded by i64
    /// and scales by [`MAX_SCALE`]).
    fn aligned(self, other: Decimal) -> (i128, i128, u32) {
        let scale = self.scale.max(other.scale);
        let a = self.mantissa * pow10(scale - self.scale);
        let b = other.mantissa * pow10(scale - other.scale);
        (a, b, scale)
    }

    /// Exact midpoint of two decimals; lives at one digit more precision.
    pub fn midpoint(self, other: Decimal) -> Decimal {
        let (a, b, scale) = self.aligned(other);
        Decimal::new((a + b) * 5, scale + 1)
    }

    /// `self + 1`, used for the above-maximum grid representative.
    pub fn plus_one(self) -> Decimal {
        Decimal::new(self.mantissa + pow10(self.scale), self.scale)
    }

    /// `self - 1`, used for the below-minimum grid representative.
    pub fn minus_one(self) -> Decimal {
        Decimal::new(self.mantissa - pow10(self.scale), self.scale)
    }
}

/// Parsed inputs keep at most this many fractional digits so that scale
/// alignment stays far away from i128 overflow.
pub const MAX_SCALE: u32 = 18;

fn pow10(e: u32) -> i128 {
    10i128.pow(e)
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl FromStr for Decimal {
    type Err = DecimalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(DecimalParseError::Empty);
        }
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        if t.is_empty() {
            return Err(DecimalParseError::InvalidDigit(s.to_string()));
        }
        let (int_part, frac_part) = match t.split_once('.') {
            Some((i, f)) => (i, f),
            None => (t, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(DecimalParseError::InvalidDigit(s.to_string()));
        }
        if frac_part.len() as u32 > MAX_SCALE {
            return Err(DecimalParseError::OutOfRange(s.to_string()));
        }
        let mut mantissa: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            let d = c
                .to_digit(10)
                .ok_or_else(|| DecimalParseError::InvalidDigit(s.to_string()))? as i128;
            mantissa = mantissa
                .checked_mul(10)
                .and_then(|m| m.checked_add(d))
                .ok_or_else(|| DecimalParseError::OutOfRange(s.to_string()))?;
        }
        if mantissa.unsigned_abs() > i64::MAX as u128 {
            return Err(DecimalParseError::OutOfRange(s.to_string()));
        }
        if neg {
            mantissa = -mantissa;
        }
        Ok(Decimal::new(mantissa, frac_part.len() as u32))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let neg = self.mantissa < 0;
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let (int_digits, frac_digits) = if digits.len() > scale {
            let (i, fr) = digits.split_at(digits.len() - scale);
            (i.to_string(), fr.to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", digits, width = scale))
        };
        write!(f, "{}{}.{}", if neg { "-" } else { "" }, int_digits, frac_digits)
    }
}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
