//! Phases of the unit circle: an exact rational angle times a product of
//! abstract generic generators.
//!
//! A phase `e(r) * g1^a * g2^b * ...` stands for the unimodular number
//! `exp(2 pi i r) * z1^a * z2^b * ...` where the `z_i` are rotations assumed
//! to be in general position with respect to everything else in play.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Element of the abelian group `Q/Z x Z^(generators)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Phase {
    rational: BigRational,
    generic: BTreeMap<u32, i64>,
}

// Orders by denominator then numerator: cheaper than comparing values, and
// the identity still sorts first.
impl Ord for Phase {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rational
            .denom()
            .cmp(other.rational.denom())
            .then_with(|| self.rational.numer().cmp(other.rational.numer()))
            .then_with(|| self.generic.cmp(&other.generic))
    }
}

impl PartialOrd for Phase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn reduce_mod_one(r: &BigRational) -> BigRational {
    let floor = r.floor();
    r - floor
}

impl Phase {
    pub fn identity() -> Self {
        Phase { rational: BigRational::zero(), generic: BTreeMap::new() }
    }

    /// The rotation by `r` full turns, reduced into `[0, 1)`.
    pub fn from_turns(r: BigRational) -> Self {
        Phase { rational: reduce_mod_one(&r), generic: BTreeMap::new() }
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_turns(BigRational::new(numer.into(), denom.into()))
    }

    /// The `index`-th generic generator `g_index`.
    pub fn generator(index: u32) -> Self {
        let mut generic = BTreeMap::new();
        generic.insert(index, 1);
        Phase { rational: BigRational::zero(), generic }
    }

    pub fn with_generic(mut self, index: u32, exponent: i64) -> Self {
        if exponent == 0 {
            self.generic.remove(&index);
        } else {
            self.generic.insert(index, exponent);
        }
        self
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn generic_part(&self) -> &BTreeMap<u32, i64> {
        &self.generic
    }

    pub fn is_identity(&self) -> bool {
        self.rational.is_zero() && self.generic.is_empty()
    }

    pub fn checked_mul(&self, other: &Phase) -> Result<Phase> {
        // both parts already lie in [0, 1)
        let mut rational = &self.rational + &other.rational;
        if rational.numer() >= rational.denom() {
            rational -= BigRational::one();
        }
        let mut generic = self.generic.clone();
        for (&g, &e) in &other.generic {
            let entry = generic.entry(g).or_insert(0);
            *entry = entry
                .checked_add(e)
                .ok_or_else(|| Error::Overflow(format!("exponent of g{g}")))?;
        }
        generic.retain(|_, e| *e != 0);
        Ok(Phase { rational, generic })
    }

    pub fn inverse(&self) -> Phase {
        Phase {
            rational: reduce_mod_one(&-&self.rational),
            generic: self.generic.iter().map(|(&g, &e)| (g, -e)).collect(),
        }
    }

    /// `self^k`: the rational angle is multiplied by `k` mod 1 and every
    /// generic exponent by `k`.
    pub fn pow(&self, k: &BigUint) -> Result<Phase> {
        let k_int = BigInt::from(k.clone());
        let numer = self.rational.numer() * &k_int;
        let denom = self.rational.denom().clone();
        let rational = BigRational::new(numer.mod_floor(&denom), denom);
        let mut generic = BTreeMap::new();
        if !k.is_zero() {
            for (&g, &e) in &self.generic {
                let scaled = (BigInt::from(e) * &k_int)
                    .to_i64()
                    .ok_or_else(|| Error::Overflow(format!("g{g}^{e} raised to {k}")))?;
                generic.insert(g, scaled);
            }
        }
        Ok(Phase { rational, generic })
    }

    /// Numeric angle in turns, `[0, 1)`, given numeric values (in turns) for the generators.
    pub fn to_turns(&self, generator_turns: impl Fn(u32) -> f64) -> f64 {
        let mut t = self.rational.to_f64().unwrap_or(0.0);
        for (&g, &e) in &self.generic {
            t += e as f64 * generator_turns(g);
        }
        t.rem_euclid(1.0)
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::identity()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        if !self.rational.is_zero() {
            parts.push(format!("e({})", self.rational));
        }
        for (&g, &e) in &self.generic {
            if e == 1 {
                parts.push(format!("g{g}"));
            } else {
                parts.push(format!("g{g}^{e}"));
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut phase = Phase::identity();
        if s == "1" || s.is_empty() {
            return Ok(phase);
        }
        for part in s.split('*') {
            let part = part.trim();
            if let Some(inner) = part.strip_prefix("e(").and_then(|p| p.strip_suffix(')')) {
                let r = parse_rational(inner)?;
                phase = phase.checked_mul(&Phase::from_turns(r))?;
            } else if let Some(rest) = part.strip_prefix('g') {
                let (idx, exp) = match rest.split_once('^') {
                    Some((i, e)) => (i, e),
                    None => (rest, "1"),
                };
                let idx: u32 = idx
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad generator index in `{part}`")))?;
                let exp: i64 = exp
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{part}`")))?;
                phase = phase.checked_mul(&Phase::identity().with_generic(idx, exp))?;
            } else {
                return Err(Error::Parse(format!("unrecognised phase factor `{part}`")));
            }
        }
        Ok(phase)
    }
}

/// Parses `a`, `a/b` or `-a/b` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Formats a rational as `a` or `a/b`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-{}/{}", r.numer().abs(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
