use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A spectral multiplicity: a positive integer or infinity.
///
/// Finite values are arbitrary precision; infinity absorbs under both
/// addition and multiplication. Ordering puts every finite value below
/// `Infinite`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Multiplicity {
    Finite(BigUint),
    Infinite,
}

impl Multiplicity {
    pub fn one() -> Self {
        Multiplicity::Finite(BigUint::one())
    }

    /// `None` for zero, which is not a multiplicity.
    pub fn finite(n: impl Into<BigUint>) -> Option<Self> {
        let n = n.into();
        if n.is_zero() {
            None
        } else {
            Some(Multiplicity::Finite(n))
        }
    }

    /// Panics on zero; for literals in code and tests.
    pub fn of(n: u64) -> Self {
        Self::finite(n).expect("multiplicity must be positive")
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Multiplicity::Infinite)
    }

    pub fn as_finite(&self) -> Option<&BigUint> {
        match self {
            Multiplicity::Finite(n) => Some(n),
            Multiplicity::Infinite => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_finite().and_then(|n| u64::try_from(n).ok())
    }
}

impl Add for &Multiplicity {
    type Output = Multiplicity;

    fn add(self, rhs: &Multiplicity) -> Multiplicity {
        match (self, rhs) {
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => Multiplicity::Finite(a + b),
            _ => Multiplicity::Infinite,
        }
    }
}

impl Add for Multiplicity {
    type Output = Multiplicity;

    fn add(self, rhs: Multiplicity) -> Multiplicity {
        &self + &rhs
    }
}

impl Mul for &Multiplicity {
    type Output = Multiplicity;

    fn mul(self, rhs: &Multiplicity) -> Multiplicity {
        match (self, rhs) {
            (Multiplicity::Finite(a), Multiplicity::Finite(b)) => Multiplicity::Finite(a * b),
            _ => Multiplicity::Infinite,
        }
    }
}

impl Mul for Multiplicity {
    type Output = Multiplicity;

    fn mul(self, rhs: Multiplicity) -> Multiplicity {
        &self * &rhs
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Infinite => write!(f, "∞"),
        }
    }
}

impl FromStr for Multiplicity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "∞" | "inf" | "infinity" | "Infinity" => Ok(Multiplicity::Infinite),
            other => {
                let n: BigUint = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad multiplicity `{other}`")))?;
                Multiplicity::finite(n)
                    .ok_or_else(|| Error::Parse("multiplicity must be positive".into()))
            }
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(n) => serializer.serialize_str(&n.to_string()),
            Multiplicity::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Formats a multiplicity set as `{1,3,∞}` in its canonical order.
pub fn format_set<'a>(set: impl IntoIterator<Item = &'a Multiplicity>) -> String {
    let items: Vec<String> = set.into_iter().map(|m| m.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Parses `{1,3,∞}`, `1,3,inf` or an empty string.
pub fn parse_set(s: &str) -> Result<std::collections::BTreeSet<Multiplicity>> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}
