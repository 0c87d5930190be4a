//! Symmetric Fock exponential and the multiplicity formulas built on it.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::class::{MeasureClass, RelationVerdict};
use crate::error::{Error, Result};
use crate::multiplicity::Multiplicity;
use crate::profile::{build_rotation_family, chacon_profile, salem_profile, AxiomProfile, ConvolutionRewrite};
use crate::regime::Salem;
use crate::spectral::{direct_sum, multiplicity_set, relate_canonical, sym_power, tensor_product, SpectralType};

/// Hard stop for regimes whose saturation condition never triggers.
const MAX_LEVELS: u32 = 8;

/// `Exp(V)` truncated at the level where the profile certifies that nothing
/// new can appear. `level_types[0]` is level 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FockExpansion {
    pub level_types: Vec<SpectralType>,
    pub saturated: bool,
    pub trace: Vec<String>,
}

impl FockExpansion {
    /// Type at level `n >= 1`.
    pub fn level(&self, n: usize) -> Option<&SpectralType> {
        n.checked_sub(1).and_then(|i| self.level_types.get(i))
    }

    /// Union of the level multiplicity sets, without any disjointness check.
    pub fn union_of_levels(&self) -> BTreeSet<Multiplicity> {
        self.level_types
            .iter()
            .flat_map(|t| t.iter().map(|(_, m)| m.clone()))
            .collect()
    }
}

fn is_saturated(level: &SpectralType) -> bool {
    level.iter().all(|(_, m)| m.is_infinite())
}

pub fn exp_fock(v: &SpectralType, profile: &AxiomProfile) -> Result<FockExpansion> {
    expand(v, profile, true)
}

fn expand(v: &SpectralType, profile: &AxiomProfile, traced: bool) -> Result<FockExpansion> {
    let regime = profile.regime();
    let rule = regime
        .saturation_rule()
        .ok_or_else(|| Error::NoSaturationRule { regime: regime.name().to_string() })?;
    let mut trace = Vec::new();
    if traced {
        trace.push(format!("level 1: {v}"));
    }
    let mut level_types = vec![v.clone()];
    for n in 2..=MAX_LEVELS {
        let level = sym_power(v, n, profile)?;
        if traced {
            trace.push(format!("level {n}: {level}"));
        }
        let done = is_saturated(&level);
        level_types.push(level);
        if done {
            if traced {
                trace.push(format!("saturated at level {n}: {rule}"));
            }
            return Ok(FockExpansion { level_types, saturated: true, trace });
        }
    }
    Err(Error::NoSaturationRule { regime: regime.name().to_string() })
}

/// Checks that no level-1 class meets a class of a higher level.
fn check_level_disjointness(fock: &FockExpansion, profile: &AxiomProfile) -> Result<()> {
    let Some((first, higher)) = fock.level_types.split_first() else {
        return Ok(());
    };
    for (low, _) in first.iter() {
        for (high, _) in higher.iter().flat_map(SpectralType::iter) {
            match relate_canonical(low, high, profile) {
                RelationVerdict::Disjoint => {}
                verdict => {
                    return Err(Error::DisjointnessViolation {
                        low: low.to_string(),
                        high: high.to_string(),
                        verdict: verdict.to_string(),
                    })
                }
            }
        }
    }
    Ok(())
}

/// `M(Exp(V))`.
pub fn exp_multiplicity_set(v: &SpectralType, profile: &AxiomProfile) -> Result<BTreeSet<Multiplicity>> {
    let fock = expand(v, profile, false)?;
    check_level_disjointness(&fock, profile)?;
    let set = fock.union_of_levels();
    if set.is_empty() {
        return Err(Error::EmptyType);
    }
    Ok(set)
}

/// Koopman type of the Gaussian automorphism `G(U)`: the Fock expansion with
/// the constants recorded as level 0.
pub fn gaussian_type(u: &SpectralType, profile: &AxiomProfile) -> Result<FockExpansion> {
    let mut fock = exp_fock(u, profile)?;
    fock.trace
        .insert(0, "level 0: constants, one-dimensional identity (excluded from multiplicities)".into());
    Ok(fock)
}

/// `M(G(U))` on the orthocomplement of constants.
pub fn gaussian_multiplicity_set(u: &SpectralType, profile: &AxiomProfile) -> Result<BTreeSet<Multiplicity>> {
    exp_multiplicity_set(u, profile)
}

/// The two regimes of the first theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dichotomy {
    Salem,
    Chacon,
}

impl Dichotomy {
    pub fn profile(self) -> AxiomProfile {
        match self {
            Dichotomy::Salem => salem_profile(),
            Dichotomy::Chacon => chacon_profile(),
        }
    }
}

impl fmt::Display for Dichotomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dichotomy::Salem => "salem",
            Dichotomy::Chacon => "chacon",
        })
    }
}

impl FromStr for Dichotomy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "salem" => Ok(Dichotomy::Salem),
            "chacon" => Ok(Dichotomy::Chacon),
            other => Err(Error::InvalidParameter(format!("regime must be salem or chacon, got `{other}`"))),
        }
    }
}

/// A computed multiplicity set with the labels and caveats that go with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelledSet {
    pub set: BTreeSet<Multiplicity>,
    pub label: Option<String>,
    pub notes: Vec<String>,
    pub trace: Vec<String>,
}

fn positive_set(m: &BTreeSet<u64>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::EmptySet);
    }
    if m.contains(&0) {
        return Err(Error::InvalidParameter("multiplicities must be >= 1".into()));
    }
    Ok(())
}

/// Gaussian system with `M(G) = M ∪ {∞}` in the chosen regime.
pub fn theorem1_multiplicity(m: &BTreeSet<u64>, regime: Dichotomy) -> Result<LabelledSet> {
    positive_set(m)?;
    let profile = regime.profile();
    let v = build_rotation_family(m)?;
    let fock = gaussian_type(&v, &profile)?;
    check_level_disjointness(&fock, &profile)?;
    let label = profile.regime().label().map(str::to_string);
    Ok(LabelledSet {
        set: fock.union_of_levels(),
        label,
        notes: vec!["dynamical label is asserted for the regime, not verified".into()],
        trace: fock.trace,
    })
}

fn factor_base(i: usize) -> String {
    format!("s{}", i + 1)
}

/// Product `T_1 × T_2 × …` of factors with homogeneous spectra of the given
/// multiplicities whose pairwise convolutions are all Lebesgue.
pub fn theorem1_1_multiplicity(m: &BTreeSet<u64>) -> Result<LabelledSet> {
    positive_set(m)?;
    // at least two factors so that a cross term exists even for |M| = 1
    let factors: Vec<u64> = m.iter().copied().cycle().take(m.len().max(2)).collect();
    let mut profile = AxiomProfile::new("product", Arc::new(Salem)).with_generic_bases(true);
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            profile = profile.with_cross_rule(&factor_base(i), &factor_base(j), ConvolutionRewrite::Lebesgue);
        }
    }
    let mut trace = Vec::new();
    let mut acc: Option<SpectralType> = None;
    for (i, &mult) in factors.iter().enumerate() {
        let b = SpectralType::single(MeasureClass::singular(factor_base(i)), Multiplicity::of(mult));
        trace.push(format!("factor {}: homogeneous {b}", i + 1));
        // (1 ⊕ acc) ⊗ (1 ⊕ B) minus constants is acc ⊕ B ⊕ acc⊗B
        acc = Some(match acc {
            None => b,
            Some(a) => {
                let cross = tensor_product(&a, &b, &profile)?;
                direct_sum(&direct_sum(&a, &b, &profile)?, &cross, &profile)?
            }
        });
    }
    let total = acc.expect("at least two factors");
    trace.push(format!("product: {total}"));
    Ok(LabelledSet {
        set: multiplicity_set(&total)?,
        label: None,
        notes: vec!["disjointness of the product from every Gaussian automorphism is asserted, not verified".into()],
        trace,
    })
}
