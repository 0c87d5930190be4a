//! Interchangeable rule sets for self-convolutions of a singular base.
//!
//! A [`Regime`] decides what happens once a class is convolved with itself
//! (or with a sibling base): whether it becomes Lebesgue, stays singular with
//! infinite multiplicity, or is refused. Regimes are registered by name in a
//! [`RegimeRegistry`]; profile files refer to them by that name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use once_cell::sync::Lazy;

use crate::class::{MeasureClass, RelationVerdict};
use crate::error::{Error, Result};
use crate::multiplicity::Multiplicity;
use crate::phase::Phase;

pub trait Regime: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Regime-specific normal form of a singular class.
    fn canonicalize(&self, class: MeasureClass) -> MeasureClass {
        class
    }

    /// Verdict for two distinct canonical singular classes, when the regime
    /// itself settles it. `None` defers to the profile's generic rules.
    /// Must not look at phases: rotations are the profile's business.
    fn relate_singular(&self, _a: &MeasureClass, _b: &MeasureClass) -> Option<RelationVerdict> {
        None
    }

    /// Rewrite for a freshly formed convolution class (level >= 2) carrying
    /// the raw product multiplicity. `same_base` is false for cross-base
    /// products that were given a fresh symbol.
    fn convolution_rule(
        &self,
        class: MeasureClass,
        multiplicity: Multiplicity,
        same_base: bool,
    ) -> Result<(MeasureClass, Multiplicity)>;

    /// Whether symmetric powers of infinite-multiplicity classes are defined.
    fn absorbs_infinite(&self) -> bool;

    /// Why every Fock level past a saturated one adds nothing new, if known.
    fn saturation_rule(&self) -> Option<&'static str> {
        None
    }

    /// Whether `U -> U^k` moves the base class (false for point masses at 1).
    fn power_moves_base(&self) -> bool {
        true
    }

    /// Dynamical label attached to Gaussian systems built in this regime.
    fn label(&self) -> Option<&'static str> {
        None
    }
}

/// `U^{⊙2}` has absolutely continuous spectrum: every convolution class is
/// Lebesgue of infinite multiplicity.
#[derive(Debug, Default)]
pub struct Salem;

impl Regime for Salem {
    fn name(&self) -> &str {
        "salem"
    }

    fn canonicalize(&self, class: MeasureClass) -> MeasureClass {
        if class.level >= 2 {
            MeasureClass::lebesgue()
        } else {
            class
        }
    }

    fn convolution_rule(
        &self,
        _class: MeasureClass,
        _multiplicity: Multiplicity,
        _same_base: bool,
    ) -> Result<(MeasureClass, Multiplicity)> {
        Ok((MeasureClass::lebesgue(), Multiplicity::Infinite))
    }

    fn absorbs_infinite(&self) -> bool {
        true
    }

    fn saturation_rule(&self) -> Option<&'static str> {
        Some("salem: every level n >= 2 is Lebesgue with infinite multiplicity, so higher levels merge into the same absorbing class")
    }

    fn label(&self) -> Option<&'static str> {
        Some("mixing Gaussian (absolutely continuous convolution square)")
    }
}

/// Symmetric powers `U^{⊙n}`, `n > 1`, are homogeneous of infinite
/// multiplicity and pairwise disjoint.
#[derive(Debug, Default)]
pub struct Chacon;

impl Regime for Chacon {
    fn name(&self) -> &str {
        "chacon"
    }

    fn relate_singular(&self, a: &MeasureClass, b: &MeasureClass) -> Option<RelationVerdict> {
        (a.level != b.level).then_some(RelationVerdict::Disjoint)
    }

    fn convolution_rule(
        &self,
        class: MeasureClass,
        _multiplicity: Multiplicity,
        _same_base: bool,
    ) -> Result<(MeasureClass, Multiplicity)> {
        Ok((class, Multiplicity::Infinite))
    }

    fn absorbs_infinite(&self) -> bool {
        true
    }

    fn saturation_rule(&self) -> Option<&'static str> {
        Some("chacon: every level n >= 2 is singular with infinite multiplicity and disjoint from all other levels")
    }

    fn label(&self) -> Option<&'static str> {
        Some("non-mixing, singular spectrum")
    }
}

/// No hypothesis about self-convolutions: the engine refuses them.
#[derive(Debug, Default)]
pub struct Undecided;

impl Regime for Undecided {
    fn name(&self) -> &str {
        "none"
    }

    fn convolution_rule(
        &self,
        class: MeasureClass,
        multiplicity: Multiplicity,
        same_base: bool,
    ) -> Result<(MeasureClass, Multiplicity)> {
        if same_base {
            Err(Error::UnknownConvolution { a: class.base.clone(), b: class.base })
        } else {
            Ok((class, multiplicity))
        }
    }

    fn absorbs_infinite(&self) -> bool {
        false
    }
}

/// Toy regime where every class is a point mass `δ_phase`. Convolution adds
/// phases, so the whole calculus reduces to counting coinciding eigenphases
/// of a diagonal unitary.
#[derive(Debug, Default)]
pub struct Atomic;

/// Base symbol every atomic class is normalised to.
pub const ATOM_BASE: &str = "atom";

impl Regime for Atomic {
    fn name(&self) -> &str {
        "atomic"
    }

    fn canonicalize(&self, class: MeasureClass) -> MeasureClass {
        MeasureClass::singular(ATOM_BASE).rotated(class.phase)
    }

    fn relate_singular(&self, _a: &MeasureClass, _b: &MeasureClass) -> Option<RelationVerdict> {
        Some(RelationVerdict::Disjoint)
    }

    fn convolution_rule(
        &self,
        class: MeasureClass,
        multiplicity: Multiplicity,
        _same_base: bool,
    ) -> Result<(MeasureClass, Multiplicity)> {
        Ok((self.canonicalize(class), multiplicity))
    }

    fn absorbs_infinite(&self) -> bool {
        true
    }

    fn power_moves_base(&self) -> bool {
        false
    }
}

/// Atomic class at the given phase.
pub fn atom(phase: Phase) -> MeasureClass {
    MeasureClass::singular(ATOM_BASE).rotated(phase)
}

#[derive(Clone, Default)]
pub struct RegimeRegistry {
    regimes: BTreeMap<String, Arc<dyn Regime>>,
}

impl RegimeRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding `salem`, `chacon`, `none` and `atomic`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(Salem));
        reg.register(Arc::new(Chacon));
        reg.register(Arc::new(Undecided));
        reg.register(Arc::new(Atomic));
        reg
    }

    pub fn register(&mut self, regime: Arc<dyn Regime>) {
        self.regimes.insert(regime.name().to_string(), regime);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Regime>> {
        self.regimes
            .get(name)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown regime `{name}`")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.regimes.keys().map(String::as_str)
    }
}

impl fmt::Debug for RegimeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.regimes.keys()).finish()
    }
}

static BUILTIN: Lazy<RegimeRegistry> = Lazy::new(RegimeRegistry::with_builtins);

pub fn builtin_regimes() -> &'static RegimeRegistry {
    &BUILTIN
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        let reg = builtin_regimes();
        assert_eq!(reg.names().collect::<Vec<_>>(), ["atomic", "chacon", "none", "salem"]);
        assert_eq!(reg.get("chacon").unwrap().name(), "chacon");
        assert!(reg.get("lebesgue").is_err());
    }

    #[test]
    fn salem_rewrite_is_idempotent() {
        let c = MeasureClass::singular("sigma").at_level(2);
        let once = Salem.canonicalize(c);
        assert_eq!(Salem.canonicalize(once.clone()), once);
        assert!(once.is_lebesgue());
    }

    #[test]
    fn undecided_refuses_self_convolution() {
        let c = MeasureClass::singular("sigma").at_level(2);
        assert!(matches!(
            Undecided.convolution_rule(c, Multiplicity::one(), true),
            Err(Error::UnknownConvolution { .. })
        ));
    }
}
