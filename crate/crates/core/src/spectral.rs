//! Spectral types as canonical formal sums and the calculus on them.
//!
//! Every operation takes the [`AxiomProfile`] whose rules decide which
//! classes are equivalent, disjoint or undecided. Undecided pairs are always
//! reported as errors; the engine never guesses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::class::{MeasureClass, Regularity, RelationVerdict};
use crate::error::{Error, Result};
use crate::multiplicity::Multiplicity;
use crate::phase::Phase;
use crate::profile::{AxiomProfile, ConvolutionRewrite};

/// Finite map from pairwise-disjoint canonical classes to multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpectralType {
    terms: BTreeMap<MeasureClass, Multiplicity>,
}

impl SpectralType {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single class, assumed canonical.
    pub fn single(class: MeasureClass, multiplicity: Multiplicity) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(class.normalize_lebesgue(), multiplicity);
        SpectralType { terms }
    }

    /// Builds a type from terms that are already canonical and pairwise
    /// disjoint; only constructors that guarantee this should use it.
    pub(crate) fn from_canonical_terms(terms: BTreeMap<MeasureClass, Multiplicity>) -> Self {
        SpectralType { terms }
    }

    /// Canonicalizes and merges arbitrary terms under `profile`.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (MeasureClass, Multiplicity)>,
        profile: &AxiomProfile,
    ) -> Result<Self> {
        let mut out = SpectralType::zero();
        for (class, mult) in terms {
            out.absorb(canonicalize_class(class, profile), mult, profile)?;
        }
        Ok(out)
    }

    pub fn terms(&self) -> &BTreeMap<MeasureClass, Multiplicity> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MeasureClass, &Multiplicity)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn multiplicity_of(&self, class: &MeasureClass) -> Option<&Multiplicity> {
        self.terms.get(class)
    }

    /// Adds one canonical term, merging with an equivalent key or checking
    /// disjointness from every other key.
    fn absorb(&mut self, class: MeasureClass, mult: Multiplicity, profile: &AxiomProfile) -> Result<()> {
        if let Some(existing) = self.terms.get_mut(&class) {
            *existing = &*existing + &mult;
            return Ok(());
        }
        // with generic bases only keys on the same base can be undecided, and
        // those are contiguous in the key order
        let candidates: Box<dyn Iterator<Item = &MeasureClass>> = if profile.generic_bases {
            let start = MeasureClass::singular(class.base.clone()).at_level(0).tagged(BigUint::zero());
            Box::new(self.terms.range(start..).map(|(k, _)| k).take_while(|k| k.base == class.base))
        } else {
            Box::new(self.terms.keys())
        };
        // verdicts between distinct keys ignore phases, so one key per
        // (level, tag) shape settles the rest
        let mut shapes: Vec<(u32, &BigUint)> = Vec::new();
        for other in candidates {
            let shape = (other.level, &other.power_tag);
            if other.base == class.base && other.regularity == class.regularity {
                if shapes.contains(&shape) {
                    continue;
                }
                shapes.push(shape);
            }
            match relate_canonical(&class, other, profile) {
                RelationVerdict::Disjoint => {}
                // canonical keys are equal exactly when equivalent
                RelationVerdict::Equivalent => unreachable!("equivalent classes share a canonical key"),
                RelationVerdict::Unknown => {
                    return Err(Error::UnknownRelation { a: class.to_string(), b: other.to_string() })
                }
            }
        }
        self.terms.insert(class, mult);
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spectral types always serialize")
    }

    /// Parses the record format without validating against a profile.
    pub fn parse_raw(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses the record format and canonicalizes under `profile`.
    pub fn from_toml(text: &str, profile: &AxiomProfile) -> Result<Self> {
        let raw = Self::parse_raw(text)?;
        Self::from_terms(raw.terms, profile)
    }
}

impl fmt::Display for SpectralType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(c, m)| format!("{c}:{m}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    base: String,
    level: u32,
    phase: Phase,
    regularity: Regularity,
    power_tag: u64,
    multiplicity: Multiplicity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeRecord {
    #[serde(default)]
    term: Vec<TermRecord>,
}

impl Serialize for SpectralType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let term = self
            .terms
            .iter()
            .map(|(c, m)| {
                let power_tag = u64::try_from(&c.power_tag)
                    .map_err(|_| serde::ser::Error::custom("power tag exceeds u64"))?;
                Ok(TermRecord {
                    base: c.base.clone(),
                    level: c.level,
                    phase: c.phase.clone(),
                    regularity: c.regularity,
                    power_tag,
                    multiplicity: m.clone(),
                })
            })
            .collect::<std::result::Result<Vec<_>, S::Error>>()?;
        TypeRecord { term }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = TypeRecord::deserialize(deserializer)?;
        let mut terms = BTreeMap::new();
        for t in record.term {
            if t.level == 0 || t.power_tag == 0 {
                return Err(serde::de::Error::custom("level and power_tag must be positive"));
            }
            let class = MeasureClass {
                base: t.base,
                level: t.level,
                phase: t.phase,
                regularity: t.regularity,
                power_tag: BigUint::from(t.power_tag),
            };
            if terms.insert(class, t.multiplicity).is_some() {
                return Err(serde::de::Error::custom("duplicate term"));
            }
        }
        Ok(SpectralType { terms })
    }
}

/// Normal form of a class under `profile`.
pub fn canonicalize_class(class: MeasureClass, profile: &AxiomProfile) -> MeasureClass {
    match class.regularity {
        Regularity::Lebesgue => MeasureClass::lebesgue(),
        Regularity::Singular => profile.regime().canonicalize(class),
    }
}

/// Re-canonicalizes every term of `x` under `profile`.
pub fn canonicalize(x: &SpectralType, profile: &AxiomProfile) -> Result<SpectralType> {
    SpectralType::from_terms(x.terms.clone(), profile)
}

pub fn relate(a: &MeasureClass, b: &MeasureClass, profile: &AxiomProfile) -> RelationVerdict {
    let a = canonicalize_class(a.clone(), profile);
    let b = canonicalize_class(b.clone(), profile);
    relate_canonical(&a, &b, profile)
}

pub(crate) fn relate_canonical(a: &MeasureClass, b: &MeasureClass, profile: &AxiomProfile) -> RelationVerdict {
    use RelationVerdict::*;
    if a == b {
        return Equivalent;
    }
    match (a.regularity, b.regularity) {
        (Regularity::Lebesgue, Regularity::Lebesgue) => return Equivalent,
        (Regularity::Lebesgue, _) | (_, Regularity::Lebesgue) => return Disjoint,
        _ => {}
    }
    // generic bases take precedence over the regime
    if a.base != b.base && profile.generic_bases {
        return Disjoint;
    }
    if let Some(v) = profile.regime().relate_singular(a, b) {
        return v;
    }
    if a.base != b.base {
        return Unknown;
    }
    if a.power_tag != b.power_tag {
        return if profile.power_tags_disjoint { Disjoint } else { Unknown };
    }
    if a.level != b.level {
        return Unknown;
    }
    // same base, tag and level: only the phases differ
    if profile.generic_rotations {
        Disjoint
    } else {
        Unknown
    }
}

/// `x ⊕ y`.
pub fn direct_sum(x: &SpectralType, y: &SpectralType, profile: &AxiomProfile) -> Result<SpectralType> {
    let mut out = x.clone();
    for (c, m) in &y.terms {
        out.absorb(c.clone(), m.clone(), profile)?;
    }
    Ok(out)
}

fn base_label(c: &MeasureClass) -> String {
    if c.power_tag.is_one() {
        c.base.clone()
    } else {
        format!("{}[{}]", c.base, c.power_tag)
    }
}

/// Fresh symbol for a cross-base convolution; flattened and sorted so that
/// the naming is associative and commutative.
fn fresh_base(a: &MeasureClass, b: &MeasureClass) -> String {
    let la = base_label(a);
    let lb = base_label(b);
    if !la.contains('*') && !lb.contains('*') {
        return if la <= lb { format!("{la}*{lb}") } else { format!("{lb}*{la}") };
    }
    la.split('*').chain(lb.split('*')).sorted().join("*")
}

/// Convolution of two canonical classes carrying the product multiplicity.
fn convolve(
    a: &MeasureClass,
    b: &MeasureClass,
    mult: Multiplicity,
    profile: &AxiomProfile,
) -> Result<(MeasureClass, Multiplicity)> {
    if a.is_lebesgue() || b.is_lebesgue() {
        return Ok((MeasureClass::lebesgue(), Multiplicity::Infinite));
    }
    let phase = a.phase.checked_mul(&b.phase)?;
    let level = a
        .level
        .checked_add(b.level)
        .ok_or_else(|| Error::Overflow("convolution level".into()))?;
    let same_base = a.base == b.base && a.power_tag == b.power_tag;
    let class = if same_base {
        MeasureClass::singular(a.base.clone())
            .rotated(phase)
            .at_level(level)
            .tagged(a.power_tag.clone())
    } else {
        match profile.cross_rule(&a.base, &b.base) {
            Some(ConvolutionRewrite::Lebesgue) => {
                return Ok((MeasureClass::lebesgue(), Multiplicity::Infinite))
            }
            Some(ConvolutionRewrite::Fresh) => {}
            None if profile.symbolic_cross_base => {}
            None => {
                return Err(Error::UnknownConvolution { a: base_label(a), b: base_label(b) })
            }
        }
        MeasureClass::singular(fresh_base(a, b)).rotated(phase).at_level(level)
    };
    let (class, mult) = profile.regime().convolution_rule(class, mult, same_base)?;
    Ok((canonicalize_class(class, profile), mult))
}

/// `x ⊗ y`: classwise convolution with product multiplicities.
pub fn tensor_product(x: &SpectralType, y: &SpectralType, profile: &AxiomProfile) -> Result<SpectralType> {
    let mut out = SpectralType::zero();
    for (a, ma) in &x.terms {
        for (b, mb) in &y.terms {
            let (c, m) = convolve(a, b, ma * mb, profile)?;
            out.absorb(c, m, profile)?;
        }
    }
    Ok(out)
}

/// Dimension of `Sym^k(C^m)`: `C(m + k - 1, k)`.
fn multiset_count(m: &Multiplicity, k: u32) -> Multiplicity {
    match m {
        Multiplicity::Infinite => Multiplicity::Infinite,
        Multiplicity::Finite(m) => {
            let mut num = BigUint::one();
            let mut den = BigUint::one();
            for i in 0..k {
                num *= m + BigUint::from(i);
                den *= BigUint::from(i + 1);
            }
            Multiplicity::Finite(num.div_floor(&den))
        }
    }
}

/// `Sym^k` of `m` copies of one canonical class.
fn sym_single(
    class: &MeasureClass,
    mult: &Multiplicity,
    k: u32,
    profile: &AxiomProfile,
) -> Result<(MeasureClass, Multiplicity)> {
    if k == 1 {
        return Ok((class.clone(), mult.clone()));
    }
    if class.is_lebesgue() {
        return Ok((MeasureClass::lebesgue(), Multiplicity::Infinite));
    }
    let level = class
        .level
        .checked_mul(k)
        .ok_or_else(|| Error::Overflow("symmetric power level".into()))?;
    let raised = MeasureClass::singular(class.base.clone())
        .rotated(class.phase.pow(&BigUint::from(k))?)
        .at_level(level)
        .tagged(class.power_tag.clone());
    let (c, m) = profile.regime().convolution_rule(raised, multiset_count(mult, k), true)?;
    Ok((canonicalize_class(c, profile), m))
}

fn check_sym_preconditions(x: &SpectralType, n: u32, profile: &AxiomProfile) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("symmetric power order must be >= 1".into()));
    }
    if n >= 2 && !profile.regime().absorbs_infinite() {
        if let Some((c, _)) = x.terms.iter().find(|(_, m)| m.is_infinite()) {
            return Err(Error::InfiniteExpansion { class: c.to_string() });
        }
    }
    Ok(())
}

/// All ways of writing `n` as an ordered sum of `parts` nonnegative integers.
/// Calls `f` on every way of writing `n` as an ordered sum of `parts`
/// nonnegative terms, sparse: only the nonzero `(index, count)` pairs.
fn for_each_composition(
    n: u32,
    parts: usize,
    f: &mut dyn FnMut(&[(usize, u32)]) -> Result<()>,
) -> Result<()> {
    fn rec(
        start: usize,
        left: u32,
        parts: usize,
        current: &mut Vec<(usize, u32)>,
        f: &mut dyn FnMut(&[(usize, u32)]) -> Result<()>,
    ) -> Result<()> {
        if left == 0 {
            return f(current);
        }
        for i in start..parts {
            for k in (1..=left).rev() {
                current.push((i, k));
                rec(i + 1, left - k, parts, current, f)?;
                current.pop();
            }
        }
        Ok(())
    }
    rec(0, n, parts, &mut Vec::new(), f)
}

/// `Sym^n(x)`: the `n`-th symmetric tensor power.
///
/// Computed per composition of `n` over the classes of `x`: a class of
/// multiplicity `m` used `k` times contributes `C(m+k-1, k)` copies of its
/// `k`-fold self-convolution, and distinct classes are then convolved.
pub fn sym_power(x: &SpectralType, n: u32, profile: &AxiomProfile) -> Result<SpectralType> {
    check_sym_preconditions(x, n, profile)?;
    if n == 1 {
        return Ok(x.clone());
    }
    let classes: Vec<(&MeasureClass, &Multiplicity)> = x.terms.iter().collect();
    let mut out = SpectralType::zero();
    for_each_composition(n, classes.len(), &mut |comp| {
        let mut acc: Option<(MeasureClass, Multiplicity)> = None;
        for &(i, k) in comp {
            let (c, m) = classes[i];
            let factor = sym_single(c, m, k, profile)?;
            acc = Some(match acc {
                None => factor,
                Some((ac, am)) => convolve(&ac, &factor.0, &am * &factor.1, profile)?,
            });
        }
        if let Some((c, m)) = acc {
            out.absorb(c, m, profile)?;
        }
        Ok(())
    })?;
    Ok(out)
}

/// `Sym^n(x)` by explicit enumeration of multisets of simple components,
/// returned unmerged: one entry per multiset.
///
/// Independent of [`sym_power`]'s composition formula; classes of infinite
/// multiplicity cannot be expanded and are refused.
pub fn sym_power_terms(
    x: &SpectralType,
    n: u32,
    profile: &AxiomProfile,
) -> Result<Vec<(MeasureClass, Multiplicity)>> {
    check_sym_preconditions(x, n, profile)?;
    let mut copies: Vec<&MeasureClass> = Vec::new();
    for (c, m) in &x.terms {
        let count = m
            .to_u64()
            .ok_or_else(|| Error::InfiniteExpansion { class: c.to_string() })?;
        for _ in 0..count {
            copies.push(c);
        }
    }
    let mut out = Vec::new();
    for multiset in (0..copies.len()).combinations_with_replacement(n as usize) {
        let mut acc: Option<(MeasureClass, Multiplicity)> = None;
        for (idx, group) in &multiset.iter().chunk_by(|&&i| i) {
            let k = group.count() as u32;
            let factor = sym_single(copies[idx], &Multiplicity::one(), k, profile)?;
            acc = Some(match acc {
                None => factor,
                Some((ac, am)) => convolve(&ac, &factor.0, &am * &factor.1, profile)?,
            });
        }
        out.extend(acc);
    }
    Ok(out)
}

/// Splits `k = q^d * r` with `q ∤ r`.
fn split_power(k: &BigUint, q: u64) -> (u32, BigUint) {
    let q = BigUint::from(q);
    let mut r = k.clone();
    let mut d = 0u32;
    while !r.is_zero() && (&r % &q).is_zero() {
        r /= &q;
        d += 1;
    }
    (d, r)
}

/// `x^k`, the spectral type of `U^k`.
pub fn operator_power(x: &SpectralType, k: &BigUint, profile: &AxiomProfile) -> Result<SpectralType> {
    if k.is_zero() {
        return Err(Error::InvalidParameter("operator power must be >= 1".into()));
    }
    if k.is_one() {
        return Ok(x.clone());
    }
    let k_mult = Multiplicity::Finite(k.clone());
    let mut out = SpectralType::zero();
    for (c, m) in &x.terms {
        if c.is_lebesgue() {
            out.absorb(MeasureClass::lebesgue(), m * &k_mult, profile)?;
            continue;
        }
        let phase = c.phase.pow(k)?;
        let (class, mult) = if !profile.regime().power_moves_base() {
            (c.clone().rotated(phase), m.clone())
        } else if let Some(q) = profile.self_similar() {
            let (d, r) = split_power(k, q);
            if !r.is_one() && !profile.power_tags_disjoint {
                return Err(Error::UnknownPowerRule { base: c.base.clone(), k: k.to_string() });
            }
            let copies = BigUint::from(q).pow(d * c.level);
            let mult = m * &Multiplicity::Finite(copies);
            (c.clone().rotated(phase).tagged(&c.power_tag * r), mult)
        } else {
            if !profile.power_tags_disjoint {
                return Err(Error::UnknownPowerRule { base: c.base.clone(), k: k.to_string() });
            }
            (c.clone().rotated(phase).tagged(&c.power_tag * k), m.clone())
        };
        out.absorb(canonicalize_class(class, profile), mult, profile)?;
    }
    Ok(out)
}

/// Distinct multiplicity values, finite ones ascending and then `∞`.
pub fn multiplicity_set(x: &SpectralType) -> Result<BTreeSet<Multiplicity>> {
    if x.is_empty() {
        return Err(Error::EmptyType);
    }
    Ok(x.terms.values().cloned().collect())
}
