//! Gaussian flows over finitely many rational frequencies.
//!
//! A flow is `⊕ z_f^t U` over components with frequency `f`; at time `t` the
//! component phase is `f·t mod 1`, so which components merge is a question
//! of exact congruences.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::class::MeasureClass;
use crate::error::{Error, Result};
use crate::gaussian::exp_multiplicity_set;
use crate::multiplicity::{format_set, Multiplicity};
use crate::phase::{format_rational, parse_rational, Phase};
use crate::profile::{chacon_profile, named_profile, self_similar_profile, AxiomProfile, ProfileFile, SIGMA};
use crate::regime::builtin_regimes;
use crate::spectral::{operator_power, SpectralType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowComponent {
    pub frequency: BigRational,
    pub copies: u64,
    pub base: String,
}

impl FlowComponent {
    pub fn new(frequency: BigRational, copies: u64, base: impl Into<String>) -> Self {
        FlowComponent { frequency, copies, base: base.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    components: Vec<FlowComponent>,
    profile: AxiomProfile,
}

impl FlowSpec {
    pub fn new(components: Vec<FlowComponent>, profile: AxiomProfile) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("a flow needs at least one component".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &components {
            if c.copies == 0 {
                return Err(Error::InvalidParameter("component copies must be >= 1".into()));
            }
            if !seen.insert((c.frequency.clone(), c.base.clone())) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate component {} on {}",
                    format_rational(&c.frequency),
                    c.base
                )));
            }
        }
        Ok(FlowSpec { components, profile })
    }

    pub fn components(&self) -> &[FlowComponent] {
        &self.components
    }

    pub fn profile(&self) -> &AxiomProfile {
        &self.profile
    }

    /// Primes dividing some frequency denominator.
    pub fn primes(&self) -> BTreeSet<u64> {
        self.components
            .iter()
            .filter_map(|c| c.frequency.denom().to_u64())
            .flat_map(prime_factors)
            .collect()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: FlowFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let profile = match file.profile {
            ProfileRef::Named(name) => named_profile(&name)?,
            ProfileRef::Inline(p) => p.resolve(builtin_regimes())?,
        };
        let components = file
            .component
            .into_iter()
            .map(|c| Ok(FlowComponent::new(parse_rational(&c.frequency)?, c.copies, c.base)))
            .collect::<Result<Vec<_>>>()?;
        FlowSpec::new(components, profile)
    }

    pub fn to_toml(&self) -> String {
        let file = FlowFile {
            profile: ProfileRef::Inline(self.profile.to_file()),
            component: self
                .components
                .iter()
                .map(|c| ComponentRecord {
                    frequency: format_rational(&c.frequency),
                    copies: c.copies,
                    base: c.base.clone(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("flow specs always serialize")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProfileRef {
    Named(String),
    Inline(ProfileFile),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentRecord {
    frequency: String,
    copies: u64,
    base: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowFile {
    profile: ProfileRef,
    component: Vec<ComponentRecord>,
}

fn check_time(t: &BigRational) -> Result<()> {
    if t.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time must be positive, got {}", format_rational(t))))
    }
}

/// Spectral type of the time-`t` map of the flow's base operator.
pub fn time_t_type(flow: &FlowSpec, t: &BigRational) -> Result<SpectralType> {
    check_time(t)?;
    let label = format_rational(t);
    let terms = flow.components.iter().map(|c| {
        let class = MeasureClass::singular(format!("{}@{label}", c.base))
            .rotated(Phase::from_turns(&c.frequency * t));
        (class, Multiplicity::of(c.copies))
    });
    SpectralType::from_terms(terms, &flow.profile)
}

/// `M(G_t)` for the Gaussian flow over `flow`.
pub fn gaussian_time_t_multiplicity(flow: &FlowSpec, t: &BigRational) -> Result<BTreeSet<Multiplicity>> {
    exp_multiplicity_set(&time_t_type(flow, t)?, &flow.profile)
}

/// The almost-everywhere value: distinct phases keep every component apart.
pub fn generic_multiplicity(flow: &FlowSpec) -> BTreeSet<Multiplicity> {
    flow.components
        .iter()
        .map(|c| Multiplicity::of(c.copies))
        .chain([Multiplicity::Infinite])
        .collect()
}

/// `U = V ⊕ (−V)`: frequencies 0 and 1/2 on one base.
pub fn theorem2_flow() -> FlowSpec {
    FlowSpec::new(
        vec![
            FlowComponent::new(BigRational::zero(), 1, SIGMA),
            FlowComponent::new(BigRational::new(1.into(), 2.into()), 1, SIGMA),
        ],
        chacon_profile(),
    )
    .expect("fixed flow is valid")
}

/// `M(G(U^{3^k}))` for a base with `U^3 ≅ 3U`.
pub fn theorem3_multiplicity(k: u32) -> Result<BTreeSet<Multiplicity>> {
    let profile = self_similar_profile(3)?;
    let u = SpectralType::single(MeasureClass::singular(SIGMA), Multiplicity::one());
    let power = operator_power(&u, &BigUint::from(3u32).pow(k), &profile)?;
    exp_multiplicity_set(&power, &profile)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Base symbol for the components of prime `p`.
pub fn prime_base(p: u64) -> String {
    format!("{SIGMA}_p{p}")
}

/// For each prime `p`, `m(p)` components at frequencies `j/p`, `j < m(p)`,
/// on a base of its own.
pub fn theorem4_flow(m: &BTreeMap<u64, u64>) -> Result<FlowSpec> {
    if m.is_empty() {
        return Err(Error::InvalidMultiplicityFunction("no primes given".into()));
    }
    let mut components = Vec::new();
    for (&p, &mp) in m {
        if !is_prime(p) {
            return Err(Error::InvalidMultiplicityFunction(format!("{p} is not prime")));
        }
        if mp == 0 || mp > p {
            return Err(Error::InvalidMultiplicityFunction(format!("m({p}) = {mp} is outside 1..={p}")));
        }
        for j in 0..mp {
            components.push(FlowComponent::new(BigRational::new(j.into(), p.into()), 1, prime_base(p)));
        }
    }
    let profile = chacon_profile()
        .named("chacon-primes")
        .with_generic_bases(true)
        .with_symbolic_cross_base(true);
    FlowSpec::new(components, profile)
}

/// `{∞} ∪ {m(p) : p | n} ∪ {1 if some listed prime does not divide n}`.
pub fn theorem4_formula(m: &BTreeMap<u64, u64>, n: u64) -> BTreeSet<Multiplicity> {
    let mut out: BTreeSet<Multiplicity> = [Multiplicity::Infinite].into();
    for (&p, &mp) in m {
        if n.is_multiple_of(p) {
            out.insert(Multiplicity::of(mp));
        } else {
            out.insert(Multiplicity::one());
        }
    }
    out
}

/// Positive rationals in `(lo, hi]` with denominator at most `max_den`,
/// ascending.
pub fn rationals_in(lo: &BigRational, hi: &BigRational, max_den: u64) -> Result<Vec<BigRational>> {
    if lo >= hi {
        return Err(Error::EmptyInterval { lo: format_rational(lo), hi: format_rational(hi) });
    }
    if max_den == 0 {
        return Err(Error::InvalidParameter("max denominator must be >= 1".into()));
    }
    let zero = BigRational::zero();
    let lo = if lo < &zero { &zero } else { lo };
    let mut out = BTreeSet::new();
    for q in 1..=max_den {
        let qb = BigInt::from(q);
        let first: BigInt = (lo * BigRational::from_integer(qb.clone())).floor().to_integer() + 1;
        let last = (hi * BigRational::from_integer(qb.clone())).floor().to_integer();
        let mut p = first;
        while p <= last {
            if p.gcd(&qb).is_one() {
                out.insert(BigRational::new(p.clone(), qb.clone()));
            }
            p += 1;
        }
    }
    Ok(out.into_iter().collect())
}

/// Whether two components on the same base share a phase at time `t`.
pub fn is_exceptional(flow: &FlowSpec, t: &BigRational) -> bool {
    let cs = &flow.components;
    cs.iter().enumerate().any(|(i, a)| {
        cs[i + 1..]
            .iter()
            .any(|b| a.base == b.base && ((&a.frequency - &b.frequency) * t).is_integer())
    })
}

/// Times in `(lo, hi]` of denominator at most `max_den` where components merge.
pub fn exceptional_times(
    flow: &FlowSpec,
    lo: &BigRational,
    hi: &BigRational,
    max_den: u64,
) -> Result<Vec<BigRational>> {
    Ok(rationals_in(lo, hi, max_den)?
        .into_iter()
        .filter(|t| is_exceptional(flow, t))
        .collect())
}

/// One line of a time scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanRecord {
    pub t: String,
    pub multiplicities: String,
    pub exceptional: bool,
    /// Classes of multiplicity above one at level 1.
    pub merged: Vec<String>,
}

pub fn scan_times(flow: &FlowSpec, times: &[BigRational]) -> Result<Vec<ScanRecord>> {
    let mut sorted: Vec<&BigRational> = times.iter().collect();
    sorted.sort();
    sorted.dedup();
    sorted
        .into_iter()
        .map(|t| {
            let ty = time_t_type(flow, t)?;
            let set = exp_multiplicity_set(&ty, &flow.profile)?;
            let merged = ty
                .iter()
                .filter(|(_, m)| **m != Multiplicity::one())
                .map(|(c, m)| format!("{c}:{m}"))
                .collect();
            Ok(ScanRecord {
                t: format_rational(t),
                multiplicities: format_set(&set),
                exceptional: is_exceptional(flow, t),
                merged,
            })
        })
        .collect()
}

/// Default upper bound on candidate times for [`theorem4_scan`].
pub const DEFAULT_SCAN_BOUND: u64 = 1_000_000;

/// Smallest integer time `n` with `M(G_n) = {1,∞} ∪ target`.
///
/// Only the set of flow primes dividing `n` matters, so the candidates are
/// the squarefree products of flow primes. `Ok(None)` means every candidate
/// was checked; candidates above `bound` make an unsuccessful search an
/// error instead.
pub fn theorem4_scan(flow: &FlowSpec, target: &BTreeSet<u64>, bound: u64) -> Result<Option<u64>> {
    let want: BTreeSet<Multiplicity> = target
        .iter()
        .map(|&m| Multiplicity::finite(m).ok_or_else(|| Error::InvalidParameter("target values must be >= 1".into())))
        .chain([Ok(Multiplicity::one()), Ok(Multiplicity::Infinite)])
        .collect::<Result<_>>()?;
    let primes: Vec<u64> = flow.primes().into_iter().collect();
    if primes.len() > 24 {
        return Err(Error::InvalidParameter("too many flow primes to enumerate".into()));
    }
    let mut candidates = Vec::new();
    let mut unchecked = 0usize;
    for mask in 0u32..(1 << primes.len()) {
        let product = primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .try_fold(1u64, |acc, (_, &p)| acc.checked_mul(p));
        match product {
            Some(n) if n <= bound => candidates.push(n),
            _ => unchecked += 1,
        }
    }
    candidates.sort_unstable();
    for n in candidates {
        let t = BigRational::from_integer(n.into());
        if gaussian_time_t_multiplicity(flow, &t)? == want {
            return Ok(Some(n));
        }
    }
    if unchecked > 0 {
        return Err(Error::SearchBoundExceeded { bound: bound.to_string(), unchecked });
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn set(xs: &[Option<u64>]) -> BTreeSet<Multiplicity> {
        xs.iter()
            .map(|x| x.map(Multiplicity::of).unwrap_or(Multiplicity::Infinite))
            .collect()
    }

    /// Direct count of coinciding phases `e^{2πi f t}` per base, in floating point.
    fn brute_force(flow: &FlowSpec, t: f64) -> BTreeSet<Multiplicity> {
        let mut groups: Vec<(String, f64, u64)> = Vec::new();
        for c in flow.components() {
            let f = c.frequency.to_f64().unwrap();
            let angle = 2.0 * std::f64::consts::PI * f * t;
            match groups.iter_mut().find(|(b, a, _)| {
                *b == c.base && ((a.cos() - angle.cos()).powi(2) + (a.sin() - angle.sin()).powi(2)).sqrt() < 1e-9
            }) {
                Some(g) => g.2 += c.copies,
                None => groups.push((c.base.clone(), angle, c.copies)),
            }
        }
        groups
            .into_iter()
            .map(|g| Multiplicity::of(g.2))
            .chain([Multiplicity::Infinite])
            .collect()
    }

    #[test]
    fn theorem2_time_types() {
        let flow = theorem2_flow();
        let one = time_t_type(&flow, &int(1)).unwrap();
        assert_eq!(one.len(), 2);
        assert_eq!(crate::spectral::multiplicity_set(&one).unwrap(), set(&[Some(1)]));
        let two = time_t_type(&flow, &int(2)).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two.iter().next().unwrap().1, &Multiplicity::of(2));

        assert_eq!(gaussian_time_t_multiplicity(&flow, &int(1)).unwrap(), set(&[Some(1), None]));
        assert_eq!(gaussian_time_t_multiplicity(&flow, &int(2)).unwrap(), set(&[Some(2), None]));
        assert_eq!(gaussian_time_t_multiplicity(&flow, &int(3)).unwrap(), set(&[Some(1), None]));
        assert_eq!(gaussian_time_t_multiplicity(&flow, &rat(1, 3)).unwrap(), generic_multiplicity(&flow));
    }

    #[test]
    fn theorem3_values() {
        assert_eq!(theorem3_multiplicity(0).unwrap(), set(&[Some(1), None]));
        assert_eq!(theorem3_multiplicity(2).unwrap(), set(&[Some(9), None]));
        assert_eq!(theorem3_multiplicity(4).unwrap(), set(&[Some(81), None]));
    }

    #[test]
    fn theorem4_examples() {
        let m: BTreeMap<u64, u64> = [(2, 1), (3, 2)].into();
        let flow = theorem4_flow(&m).unwrap();
        assert_eq!(gaussian_time_t_multiplicity(&flow, &int(12)).unwrap(), set(&[None, Some(1), Some(2)]));

        let m: BTreeMap<u64, u64> = [(5, 4)].into();
        let flow = theorem4_flow(&m).unwrap();
        assert_eq!(gaussian_time_t_multiplicity(&flow, &int(5)).unwrap(), set(&[Some(4), None]));
        assert_eq!(gaussian_time_t_multiplicity(&flow, &int(1)).unwrap(), set(&[Some(1), None]));

        let m: BTreeMap<u64, u64> = [(2, 2), (5, 3)].into();
        let flow = theorem4_flow(&m).unwrap();
        let got = gaussian_time_t_multiplicity(&flow, &int(4)).unwrap();
        assert_eq!(got, set(&[Some(2), Some(1), None]));
        assert_eq!(got, brute_force(&flow, 4.0));
    }

    #[test]
    fn theorem4_validation() {
        let bad = |m: &[(u64, u64)]| theorem4_flow(&m.iter().copied().collect());
        assert!(matches!(bad(&[(4, 1)]), Err(Error::InvalidMultiplicityFunction(_))));
        assert!(matches!(bad(&[(3, 4)]), Err(Error::InvalidMultiplicityFunction(_))));
        assert!(matches!(bad(&[(3, 0)]), Err(Error::InvalidMultiplicityFunction(_))));
        assert!(bad(&[(3, 3)]).is_ok());
    }

    #[test]
    fn exceptional_examples() {
        let flow = theorem2_flow();
        assert_eq!(exceptional_times(&flow, &int(0), &int(5), 1).unwrap(), vec![int(2), int(4)]);

        let single = FlowSpec::new(vec![FlowComponent::new(rat(1, 3), 2, "tau")], chacon_profile()).unwrap();
        assert!(exceptional_times(&single, &int(0), &int(5), 6).unwrap().is_empty());

        let m: BTreeMap<u64, u64> = [(2, 2), (3, 3)].into();
        let flow = theorem4_flow(&m).unwrap();
        // differences 1/2, 1/3 and 2/3: t must make one of them an integer,
        // which never happens inside (0, 1]
        assert!(exceptional_times(&flow, &int(0), &int(1), 6).unwrap().is_empty());
        let times = exceptional_times(&flow, &int(0), &int(6), 6).unwrap();
        assert_eq!(times, vec![rat(3, 2), int(2), int(3), int(4), rat(9, 2), int(6)]);
        assert!(matches!(exceptional_times(&flow, &int(2), &int(2), 3), Err(Error::EmptyInterval { .. })));
    }

    #[test]
    fn scan_examples() {
        let m: BTreeMap<u64, u64> = [(3, 2), (5, 4), (7, 6)].into();
        let flow = theorem4_flow(&m).unwrap();
        assert_eq!(theorem4_scan(&flow, &[2, 4].into(), DEFAULT_SCAN_BOUND).unwrap(), Some(15));
        assert_eq!(theorem4_scan(&flow, &BTreeSet::new(), DEFAULT_SCAN_BOUND).unwrap(), Some(1));
        assert_eq!(theorem4_scan(&flow, &[99].into(), DEFAULT_SCAN_BOUND).unwrap(), None);
        assert!(matches!(
            theorem4_scan(&flow, &[99].into(), 20),
            Err(Error::SearchBoundExceeded { unchecked: 3, .. })
        ));
        // a hit below the bound is reported even when larger candidates remain
        assert_eq!(theorem4_scan(&flow, &[2].into(), 20).unwrap(), Some(3));
    }

    #[test]
    fn rationals_in_interval() {
        let ts = rationals_in(&int(0), &int(1), 3).unwrap();
        assert_eq!(ts, vec![rat(1, 3), rat(1, 2), rat(2, 3), int(1)]);
        let ts = rationals_in(&int(-2), &int(1), 1).unwrap();
        assert_eq!(ts, vec![int(1)]);
    }

    #[test]
    fn flow_file_round_trip() {
        let flow = theorem4_flow(&[(2, 2), (3, 1)].into()).unwrap();
        assert_eq!(FlowSpec::from_toml(&flow.to_toml()).unwrap(), flow);
        let text = "profile = \"chacon\"\n[[component]]\nfrequency = \"0\"\ncopies = 1\nbase = \"sigma\"\n\
                    [[component]]\nfrequency = \"1/2\"\ncopies = 1\nbase = \"sigma\"\n";
        assert_eq!(FlowSpec::from_toml(text).unwrap(), theorem2_flow());
        assert!(FlowSpec::from_toml("profile = \"chacon\"\ncomponent = []\n").is_err());
    }

    #[test]
    fn primes_helpers() {
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
        assert_eq!(prime_factors(1), Vec::<u64>::new());
        assert!(is_prime(13) && !is_prime(1) && !is_prime(91));
        let flow = theorem4_flow(&[(2, 1), (3, 2), (7, 3)].into()).unwrap();
        // m(2) = 1 leaves only frequency 0 for the prime 2
        assert_eq!(flow.primes(), [3, 7].into());
    }

    fn arb_m() -> impl Strategy<Value = BTreeMap<u64, u64>> {
        proptest::collection::btree_map(
            proptest::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
            1u64..=13,
            1..5,
        )
        .prop_map(|m| m.into_iter().map(|(p, v)| (p, 1 + (v - 1) % p)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn formula_matches_engine_and_brute_force(m in arb_m(), n in 1u64..3000) {
            let flow = theorem4_flow(&m).unwrap();
            let got = gaussian_time_t_multiplicity(&flow, &BigRational::from_integer(n.into())).unwrap();
            prop_assert_eq!(&got, &theorem4_formula(&m, n));
            prop_assert_eq!(&got, &brute_force(&flow, n as f64));
        }

        #[test]
        fn off_exceptional_times_the_set_is_generic(m in arb_m(), p in 1i64..60, q in 1i64..13) {
            let flow = theorem4_flow(&m).unwrap();
            let t = rat(p, q);
            let got = gaussian_time_t_multiplicity(&flow, &t).unwrap();
            if !is_exceptional(&flow, &t) {
                prop_assert_eq!(got, generic_multiplicity(&flow));
            } else {
                prop_assert_ne!(got, generic_multiplicity(&flow));
            }
        }
    }

    #[test]
    fn even_times_give_even_finite_values() {
        let flow = theorem2_flow();
        for n in (2..=40).step_by(2) {
            let got = gaussian_time_t_multiplicity(&flow, &int(n)).unwrap();
            assert!(got.iter().filter_map(Multiplicity::to_u64).all(|v| v % 2 == 0));
            assert_eq!(got, brute_force(&flow, n as f64));
        }
    }

    #[test]
    fn brute_force_handles_rational_times() {
        let flow = theorem4_flow(&[(3, 3), (5, 2)].into()).unwrap();
        for t in rationals_in(&int(0), &int(4), 7).unwrap() {
            let got = gaussian_time_t_multiplicity(&flow, &t).unwrap();
            assert_eq!(got, brute_force(&flow, t.to_f64().unwrap()), "t = {t}");
        }
    }

    #[test]
    fn time_must_be_positive() {
        assert!(time_t_type(&theorem2_flow(), &int(0)).is_err());
    }
}
