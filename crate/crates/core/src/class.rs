use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::phase::Phase;

/// Base symbol shared by every Lebesgue class.
pub const LEBESGUE_BASE: &str = "lebesgue";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Singular,
    Lebesgue,
}

/// A symbolic measure class: `phase * base^(*level)` pushed forward by
/// `z -> z^power_tag`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasureClass {
    pub base: String,
    pub level: u32,
    pub phase: Phase,
    pub regularity: Regularity,
    pub power_tag: BigUint,
}

impl MeasureClass {
    pub fn singular(base: impl Into<String>) -> Self {
        MeasureClass {
            base: base.into(),
            level: 1,
            phase: Phase::identity(),
            regularity: Regularity::Singular,
            power_tag: BigUint::one(),
        }
    }

    pub fn lebesgue() -> Self {
        MeasureClass {
            base: LEBESGUE_BASE.to_string(),
            level: 1,
            phase: Phase::identity(),
            regularity: Regularity::Lebesgue,
            power_tag: BigUint::one(),
        }
    }

    pub fn rotated(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn at_level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }

    pub fn tagged(mut self, power_tag: BigUint) -> Self {
        self.power_tag = power_tag;
        self
    }

    pub fn is_lebesgue(&self) -> bool {
        self.regularity == Regularity::Lebesgue
    }

    /// Rotation and convolution fix the Lebesgue class, so every Lebesgue
    /// class collapses to the single canonical one.
    pub(crate) fn normalize_lebesgue(self) -> Self {
        if self.is_lebesgue() {
            MeasureClass::lebesgue()
        } else {
            self
        }
    }
}

impl fmt::Display for MeasureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_lebesgue() {
            return write!(f, "Leb");
        }
        if !self.phase.is_identity() {
            write!(f, "{}·", self.phase)?;
        }
        write!(f, "{}", self.base)?;
        if self.level > 1 {
            write!(f, "^({})", self.level)?;
        }
        if !self.power_tag.is_one() {
            write!(f, "[{}]", self.power_tag)?;
        }
        Ok(())
    }
}

/// Outcome of comparing two measure classes under a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationVerdict {
    Equivalent,
    Disjoint,
    Unknown,
}

impl fmt::Display for RelationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationVerdict::Equivalent => "equivalent",
            RelationVerdict::Disjoint => "disjoint",
            RelationVerdict::Unknown => "undecided",
        };
        f.write_str(s)
    }
}
