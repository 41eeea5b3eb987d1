//! Rational differentiation orders `v/u` and their common denominator.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest denominator accepted when recovering a fraction from a decimal.
pub const MAX_DENOMINATOR: u64 = 1000;
/// Decimal orders must be reproduced to within this distance.
pub const DECIMAL_TOLERANCE: f64 = 1e-9;

/// A positive order `v/u` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalOrder {
    v: u64,
    u: u64,
}

impl RationalOrder {
    /// Reduces `numerator/denominator` by their gcd.
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if numerator == 0 || denominator == 0 {
            return Err(Error::Domain(format!(
                "order {numerator}/{denominator} must be a positive fraction"
            )));
        }
        let g = numerator.gcd(&denominator);
        Ok(Self {
            v: numerator / g,
            u: denominator / g,
        })
    }

    /// Nearest fraction with denominator at most [`MAX_DENOMINATOR`], found
    /// among the continued-fraction convergents of `value`.
    pub fn from_decimal(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Domain(format!(
                "order must be positive and finite, got {value}"
            )));
        }
        let precision_error = || Error::Precision {
            value,
            max_denominator: MAX_DENOMINATOR,
            tolerance: DECIMAL_TOLERANCE,
        };
        // convergents p_k/q_k via the standard recurrences
        let (mut p_prev, mut q_prev) = (1u64, 0u64);
        let (mut p, mut q) = (value.floor() as u64, 1u64);
        let mut rest = value - value.floor();
        loop {
            if (value - p as f64 / q as f64).abs() <= DECIMAL_TOLERANCE && p > 0 {
                return Self::new(p, q);
            }
            if rest <= f64::EPSILON {
                return Err(precision_error());
            }
            let x = 1.0 / rest;
            let a = x.floor();
            rest = x - a;
            let a = a as u64;
            let q_next = a
                .checked_mul(q)
                .and_then(|v| v.checked_add(q_prev))
                .filter(|&v| v <= MAX_DENOMINATOR)
                .ok_or_else(precision_error)?;
            let p_next = a
                .checked_mul(p)
                .and_then(|v| v.checked_add(p_prev))
                .ok_or_else(precision_error)?;
            (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        }
    }

    /// Numerator.
    pub fn v(&self) -> u64 {
        self.v
    }

    /// Denominator.
    pub fn u(&self) -> u64 {
        self.u
    }

    pub fn value(&self) -> f64 {
        self.v as f64 / self.u as f64
    }

    pub fn is_integer(&self) -> bool {
        self.u == 1
    }

    /// `self - 1`, defined for orders above one.
    pub fn minus_one(&self) -> Result<Self> {
        if self.v <= self.u {
            return Err(Error::Domain(format!("order {self} is not above 1")));
        }
        Self::new(self.v - self.u, self.u)
    }
}

impl fmt::Display for RationalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.v, self.u)
    }
}

/// Accepts `"v/u"` fractions and decimal literals.
impl FromStr for RationalOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let parse = |t: &str| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Input(format!("cannot parse order '{s}'")))
            };
            return Self::new(parse(num)?, parse(den)?);
        }
        let value: f64 = s
            .parse()
            .map_err(|_| Error::Input(format!("cannot parse order '{s}'")))?;
        Self::from_decimal(value)
    }
}

impl Serialize for RationalOrder {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Lowest common multiple of the denominators.
pub fn common_multiple(orders: &[RationalOrder]) -> Result<u64> {
    if orders.is_empty() {
        return Err(Error::Input(
            "common multiple of an empty order list".into(),
        ));
    }
    orders.iter().try_fold(1u64, |m, o| {
        let l = m.lcm(&o.u);
        if l > u32::MAX as u64 {
            Err(Error::Input(format!("common denominator {l} is too large")))
        } else {
            Ok(l)
        }
    })
}
