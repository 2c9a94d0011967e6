//! Coefficient fields for chain complexes.
//!
//! Homology is computed over a field so that every homology group is a vector
//! space with a well-defined rank. Two fields ship with the crate: the prime
//! field of order two ([`F2`]) and the exact rationals ([`Rational`]).

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A commutative field usable as a coefficient domain.
pub trait Field:
    Clone
    + Debug
    + Display
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Characteristic of the field (0 for the rationals).
    const CHARACTERISTIC: u32;

    /// Image of an integer under the canonical ring map.
    fn from_i64(value: i64) -> Self;

    /// JSON form used by reports: a number for prime fields, a `"p/q"` string otherwise.
    fn to_json(&self) -> serde_json::Value;

    /// Sign of an oriented simplex face, `(-1)^position`.
    fn sign(position: usize) -> Self {
        if position % 2 == 0 {
            Self::one()
        } else {
            -Self::one()
        }
    }
}

/// The prime field with two elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct F2(pub bool);

impl Debug for F2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(self.0))
    }
}

impl Display for F2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(self.0))
    }
}

impl Add for F2 {
    type Output = F2;
    fn add(self, rhs: F2) -> F2 {
        F2(self.0 ^ rhs.0)
    }
}

impl Sub for F2 {
    type Output = F2;
    fn sub(self, rhs: F2) -> F2 {
        F2(self.0 ^ rhs.0)
    }
}

impl Mul for F2 {
    type Output = F2;
    fn mul(self, rhs: F2) -> F2 {
        F2(self.0 & rhs.0)
    }
}

impl Div for F2 {
    type Output = F2;
    fn div(self, rhs: F2) -> F2 {
        assert!(rhs.0, "division by zero in F2");
        self
    }
}

impl Neg for F2 {
    type Output = F2;
    fn neg(self) -> F2 {
        self
    }
}

impl Zero for F2 {
    fn zero() -> F2 {
        F2(false)
    }
    fn is_zero(&self) -> bool {
        !self.0
    }
}

impl One for F2 {
    fn one() -> F2 {
        F2(true)
    }
}

impl Field for F2 {
    const CHARACTERISTIC: u32 = 2;

    fn from_i64(value: i64) -> Self {
        F2(value.rem_euclid(2) == 1)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(u8::from(self.0))
    }
}

/// Exact rational coefficients.
pub type Rational = BigRational;

impl Field for BigRational {
    const CHARACTERISTIC: u32 = 0;

    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn to_json(&self) -> serde_json::Value {
        if self.is_integer() {
            serde_json::Value::String(self.numer().to_string())
        } else {
            let sign = if self.is_negative() { "-" } else { "" };
            serde_json::Value::String(format!(
                "{sign}{}/{}",
                self.numer().abs(),
                self.denom()
            ))
        }
    }
}

/// Runtime selector for the coefficient field, as used by configuration and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FieldKind {
    /// Order-two prime field.
    F2,
    /// Rationals.
    Rational,
}

impl FieldKind {
    /// Parses the CLI convention: `2` for the prime field, `0` for the rationals.
    pub fn from_characteristic(c: u32) -> Option<Self> {
        match c {
            2 => Some(FieldKind::F2),
            0 => Some(FieldKind::Rational),
            _ => None,
        }
    }

    pub fn characteristic(self) -> u32 {
        match self {
            FieldKind::F2 => 2,
            FieldKind::Rational => 0,
        }
    }
}
