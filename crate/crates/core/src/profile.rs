//! Axiom profiles: the disjointness, equivalence and regularity facts a
//! construction is allowed to assume, plus the standard constructors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class::MeasureClass;
use crate::error::{Error, Result};
use crate::multiplicity::Multiplicity;
use crate::phase::Phase;
use crate::regime::{builtin_regimes, Atomic, Chacon, Regime, RegimeRegistry, Salem, Undecided};
use crate::spectral::SpectralType;

/// Base symbol used by the single-operator constructions.
pub const SIGMA: &str = "sigma";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionRewrite {
    /// The convolution of the two bases is equivalent to Lebesgue measure.
    Lebesgue,
    /// The convolution is a fresh named singular class.
    Fresh,
}

#[derive(Clone)]
pub struct AxiomProfile {
    name: String,
    regime: Arc<dyn Regime>,
    /// Distinct phases on the same base are disjoint.
    pub generic_rotations: bool,
    /// Distinct base symbols are disjoint.
    pub generic_bases: bool,
    /// Distinct power tags on the same base are disjoint.
    pub power_tags_disjoint: bool,
    /// Cross-base convolutions without a rule get a fresh symbol instead of failing.
    pub symbolic_cross_base: bool,
    self_similar: Option<u64>,
    cross_base_rules: BTreeMap<(String, String), ConvolutionRewrite>,
}

fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl AxiomProfile {
    pub fn new(name: impl Into<String>, regime: Arc<dyn Regime>) -> Self {
        AxiomProfile {
            name: name.into(),
            regime,
            generic_rotations: false,
            generic_bases: false,
            power_tags_disjoint: true,
            symbolic_cross_base: false,
            self_similar: None,
            cross_base_rules: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn regime(&self) -> &dyn Regime {
        self.regime.as_ref()
    }

    pub fn self_similar(&self) -> Option<u64> {
        self.self_similar
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_generic_rotations(mut self, on: bool) -> Self {
        self.generic_rotations = on;
        self
    }

    pub fn with_generic_bases(mut self, on: bool) -> Self {
        self.generic_bases = on;
        self
    }

    pub fn with_symbolic_cross_base(mut self, on: bool) -> Self {
        self.symbolic_cross_base = on;
        self
    }

    pub fn with_power_tags_disjoint(mut self, on: bool) -> Self {
        self.power_tags_disjoint = on;
        self
    }

    pub fn with_self_similar(mut self, q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("self-similarity order must be >= 2, got {q}")));
        }
        self.self_similar = Some(q);
        Ok(self)
    }

    pub fn with_cross_rule(mut self, a: &str, b: &str, rewrite: ConvolutionRewrite) -> Self {
        self.cross_base_rules.insert(ordered_pair(a, b), rewrite);
        self
    }

    pub fn cross_rule(&self, a: &str, b: &str) -> Option<ConvolutionRewrite> {
        self.cross_base_rules.get(&ordered_pair(a, b)).copied()
    }

    pub fn to_file(&self) -> ProfileFile {
        ProfileFile {
            name: self.name.clone(),
            regime: self.regime.name().to_string(),
            generic_rotations: self.generic_rotations,
            generic_bases: self.generic_bases,
            power_tags_disjoint: self.power_tags_disjoint,
            symbolic_cross_base: self.symbolic_cross_base,
            self_similar: self.self_similar,
            cross_base_rules: self
                .cross_base_rules
                .iter()
                .map(|((a, b), &rewrite)| CrossRuleRecord { a: a.clone(), b: b.clone(), rewrite })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("profile records always serialize")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, builtin_regimes())
    }

    pub fn from_toml_with(text: &str, registry: &RegimeRegistry) -> Result<Self> {
        let file: ProfileFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.resolve(registry)
    }
}

impl fmt::Debug for AxiomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AxiomProfile")
            .field("name", &self.name)
            .field("regime", &self.regime.name())
            .field("generic_rotations", &self.generic_rotations)
            .field("generic_bases", &self.generic_bases)
            .field("power_tags_disjoint", &self.power_tags_disjoint)
            .field("symbolic_cross_base", &self.symbolic_cross_base)
            .field("self_similar", &self.self_similar)
            .field("cross_base_rules", &self.cross_base_rules)
            .finish()
    }
}

impl PartialEq for AxiomProfile {
    fn eq(&self, other: &Self) -> bool {
        self.to_file() == other.to_file()
    }
}

/// On-disk form of a profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub name: String,
    pub regime: String,
    #[serde(default)]
    pub generic_rotations: bool,
    #[serde(default)]
    pub generic_bases: bool,
    #[serde(default = "default_true")]
    pub power_tags_disjoint: bool,
    #[serde(default)]
    pub symbolic_cross_base: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_similar: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cross_base_rules: Vec<CrossRuleRecord>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossRuleRecord {
    pub a: String,
    pub b: String,
    pub rewrite: ConvolutionRewrite,
}

impl ProfileFile {
    pub fn resolve(self, registry: &RegimeRegistry) -> Result<AxiomProfile> {
        let mut profile = AxiomProfile::new(self.name, registry.get(&self.regime)?)
            .with_generic_rotations(self.generic_rotations)
            .with_generic_bases(self.generic_bases)
            .with_power_tags_disjoint(self.power_tags_disjoint)
            .with_symbolic_cross_base(self.symbolic_cross_base);
        if let Some(q) = self.self_similar {
            profile = profile.with_self_similar(q)?;
        }
        for rule in self.cross_base_rules {
            profile = profile.with_cross_rule(&rule.a, &rule.b, rule.rewrite);
        }
        Ok(profile)
    }
}

/// Case a: singular simple base whose convolution square is absolutely continuous.
pub fn salem_profile() -> AxiomProfile {
    AxiomProfile::new("salem", Arc::new(Salem)).with_generic_rotations(true)
}

/// Case b: symmetric powers of infinite multiplicity, pairwise disjoint.
pub fn chacon_profile() -> AxiomProfile {
    AxiomProfile::new("chacon", Arc::new(Chacon)).with_generic_rotations(true)
}

/// [`chacon_profile`] plus `U^q ≅ q·U`.
pub fn self_similar_profile(q: u64) -> Result<AxiomProfile> {
    chacon_profile().named(format!("self-similar-{q}")).with_self_similar(q)
}

/// Point-mass toy profile used to check the calculus against diagonal unitaries.
pub fn atomic_profile() -> AxiomProfile {
    AxiomProfile::new("atomic", Arc::new(Atomic)).with_generic_rotations(true)
}

/// No convolution hypothesis at all.
pub fn undecided_profile() -> AxiomProfile {
    AxiomProfile::new("none", Arc::new(Undecided)).with_generic_rotations(true)
}

/// Names accepted by [`named_profile`].
pub const PROFILE_NAMES: [&str; 3] = ["salem", "chacon", "self-similar"];

/// Built-in profile by name. `self-similar` means order 3; `self-similar-q`
/// selects another order; `atomic` and `none` are also recognised.
pub fn named_profile(name: &str) -> Result<AxiomProfile> {
    match name {
        "salem" => Ok(salem_profile()),
        "chacon" => Ok(chacon_profile()),
        "self-similar" => self_similar_profile(3),
        "atomic" => Ok(atomic_profile()),
        "none" => Ok(undecided_profile()),
        other => match other.strip_prefix("self-similar-").map(str::parse::<u64>) {
            Some(Ok(q)) => self_similar_profile(q),
            _ => Err(Error::InvalidParameter(format!("unknown profile `{other}`"))),
        },
    }
}

/// `⊕_{m∈M} m·(g_m σ)`: for each requested multiplicity `m`, `m` copies of the
/// base rotated by its own generic generator `g_m`.
///
/// The result is canonical under any profile with generic rotations.
pub fn build_rotation_family(multiplicities: &BTreeSet<u64>) -> Result<SpectralType> {
    if multiplicities.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut terms = BTreeMap::new();
    for &m in multiplicities {
        let mult = Multiplicity::finite(m)
            .ok_or_else(|| Error::InvalidParameter("multiplicities must be >= 1".into()))?;
        let index = u32::try_from(m)
            .map_err(|_| Error::InvalidParameter(format!("multiplicity {m} too large for a generator index")))?;
        let class = MeasureClass::singular(SIGMA).rotated(Phase::generator(index));
        terms.insert(class, mult);
    }
    Ok(SpectralType::from_canonical_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{multiplicity_set, operator_power, relate};
    use crate::class::RelationVerdict;
    use num_bigint::BigUint;

    fn set(xs: &[u64]) -> BTreeSet<Multiplicity> {
        xs.iter().map(|&x| Multiplicity::of(x)).collect()
    }

    #[test]
    fn rotation_family_examples() {
        let v = build_rotation_family(&[1, 3].into()).unwrap();
        assert_eq!(v.len(), 2);
        let g1 = MeasureClass::singular(SIGMA).rotated(Phase::generator(1));
        let g3 = MeasureClass::singular(SIGMA).rotated(Phase::generator(3));
        assert_eq!(v.multiplicity_of(&g1), Some(&Multiplicity::of(1)));
        assert_eq!(v.multiplicity_of(&g3), Some(&Multiplicity::of(3)));

        let single = build_rotation_family(&[1].into()).unwrap();
        assert_eq!(multiplicity_set(&single).unwrap(), set(&[1]));

        let m: BTreeSet<u64> = [2, 5, 7].into();
        let v = build_rotation_family(&m).unwrap();
        assert_eq!(multiplicity_set(&v).unwrap(), set(&[2, 5, 7]));
    }

    #[test]
    fn rotation_family_errors() {
        assert_eq!(build_rotation_family(&BTreeSet::new()), Err(Error::EmptySet));
        assert!(build_rotation_family(&[0].into()).is_err());
    }

    #[test]
    fn builtin_profile_examples() {
        let sigma = MeasureClass::singular(SIGMA);
        let salem = salem_profile();
        assert_eq!(
            relate(&sigma.clone().at_level(2), &MeasureClass::lebesgue(), &salem),
            RelationVerdict::Equivalent
        );
        let chacon = chacon_profile();
        assert_eq!(relate(&sigma, &sigma.clone().at_level(2), &chacon), RelationVerdict::Disjoint);

        let ss = self_similar_profile(3).unwrap();
        let x = SpectralType::single(sigma.clone(), Multiplicity::one());
        let y = operator_power(&x, &BigUint::from(9u32), &ss).unwrap();
        assert_eq!(y, SpectralType::single(sigma, Multiplicity::of(9)));
    }

    #[test]
    fn self_similar_order_must_be_at_least_two() {
        assert!(matches!(self_similar_profile(1), Err(Error::InvalidParameter(_))));
        assert!(self_similar_profile(2).is_ok());
    }

    #[test]
    fn named_lookup() {
        for name in PROFILE_NAMES {
            assert!(named_profile(name).is_ok(), "{name}");
        }
        assert_eq!(named_profile("self-similar").unwrap().self_similar(), Some(3));
        assert_eq!(named_profile("self-similar-5").unwrap().self_similar(), Some(5));
        assert!(named_profile("gauss").is_err());
    }

    #[test]
    fn profile_file_round_trip() {
        let p = chacon_profile()
            .named("custom")
            .with_generic_bases(true)
            .with_cross_rule("s2", "s1", ConvolutionRewrite::Lebesgue)
            .with_self_similar(3)
            .unwrap();
        let text = p.to_toml();
        let back = AxiomProfile::from_toml(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.cross_rule("s1", "s2"), Some(ConvolutionRewrite::Lebesgue));
    }

    #[test]
    fn profile_file_rejects_unknown_keys_and_regimes() {
        assert!(AxiomProfile::from_toml("name = \"x\"\nregime = \"gauss\"\n").is_err());
        assert!(AxiomProfile::from_toml("name = \"x\"\nregime = \"chacon\"\nfoo = 1\n").is_err());
        assert!(AxiomProfile::from_toml("name = \"x\"\nregime = \"chacon\"\nself_similar = 1\n").is_err());
    }
}
