//! Lacunary Riesz products `∏_k (1 + a_k cos(n_k θ + φ_k))`.
//!
//! With `n_{k+1} >= 3 n_k` every integer has at most one representation
//! `Σ ε_k n_k`, `ε_k ∈ {−1, 0, 1}`, which gives the Fourier coefficients in
//! closed form. Quadrature is only used to cross-check them.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest spec accepted by the ε-enumeration routines.
pub const MAX_ENUMERATION_DEPTH: usize = 20;

const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszSpec {
    pub frequencies: Vec<u64>,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub phases: Vec<f64>,
}

impl RieszSpec {
    pub fn new(frequencies: Vec<u64>, coefficients: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        let spec = RieszSpec { frequencies, coefficients, phases };
        spec.validate()?;
        Ok(spec)
    }

    /// `n_k = 3^k`, `a_k = 1`, `φ_k = 0` for `k = 1..=depth`.
    pub fn triadic(depth: usize) -> Self {
        RieszSpec {
            frequencies: (1..=depth as u32).map(|k| 3u64.pow(k)).collect(),
            coefficients: vec![1.0; depth],
            phases: vec![0.0; depth],
        }
    }

    /// The default exemplar, depth 14.
    pub fn default_exemplar() -> Self {
        Self::triadic(14)
    }

    pub fn with_coefficients(mut self, a: impl Fn(usize) -> f64) -> Result<Self> {
        self.coefficients = (1..=self.depth()).map(a).collect();
        self.validate()?;
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.frequencies.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let k = self.frequencies.len();
        if self.coefficients.len() != k || (self.phases.len() != k && !self.phases.is_empty()) {
            return bad("frequencies, coefficients and phases must have equal lengths".into());
        }
        if self.frequencies.first() == Some(&0) {
            return bad("frequencies must be positive".into());
        }
        for w in self.frequencies.windows(2) {
            if w[1] < w[0].saturating_mul(3) {
                return bad(format!("lacunarity fails: {} < 3·{}", w[1], w[0]));
            }
        }
        if self.frequencies.iter().map(|&n| u128::from(n)).sum::<u128>() > i64::MAX as u128 {
            return bad("frequencies too large".into());
        }
        if let Some(a) = self.coefficients.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return bad(format!("coefficient {a} is outside (0, 1]"));
        }
        if let Some(p) = self.phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return bad(format!("phase {p} is outside [0, 2π)"));
        }
        Ok(())
    }

    fn phase(&self, k: usize) -> f64 {
        self.phases.get(k).copied().unwrap_or(0.0)
    }

    /// Highest frequency present in the depth-`k` density.
    pub fn degree(&self, k: usize) -> u64 {
        self.frequencies[..k].iter().sum()
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k > self.depth() {
            return Err(Error::InvalidParameter(format!("depth {k} exceeds spec depth {}", self.depth())));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: RieszSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("riesz specs always serialize")
    }
}

/// The unique `ε` with `n = Σ ε_k n_k`, if any.
pub fn representation(spec: &RieszSpec, n: i64) -> Option<Vec<i8>> {
    let freqs = &spec.frequencies;
    let mut below: Vec<i128> = Vec::with_capacity(freqs.len());
    let mut acc = 0i128;
    for &f in freqs {
        below.push(acc);
        acc += i128::from(f);
    }
    let mut rest = i128::from(n);
    let mut eps = vec![0i8; freqs.len()];
    for k in (0..freqs.len()).rev() {
        // lower frequencies cannot cover more than `below[k]`
        if rest.abs() > below[k] {
            let s = rest.signum();
            eps[k] = s as i8;
            rest -= s * i128::from(freqs[k]);
        }
    }
    (rest == 0).then_some(eps)
}

/// `μ̂(n) = ∏_{ε_k ≠ 0} (a_k/2) e^{i ε_k φ_k}`, or 0 without a representation.
pub fn fourier_coefficient(spec: &RieszSpec, n: i64) -> Complex<f64> {
    match representation(spec, n) {
        None => Complex::new(0.0, 0.0),
        Some(eps) => eps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .fold(Complex::new(1.0, 0.0), |acc, (k, &e)| {
                acc * Complex::from_polar(spec.coefficients[k] / 2.0, f64::from(e) * spec.phase(k))
            }),
    }
}

pub fn partial_density(spec: &RieszSpec, theta: f64, k: usize) -> Result<f64> {
    spec.check_depth(k)?;
    Ok((0..k)
        .map(|j| 1.0 + spec.coefficients[j] * (spec.frequencies[j] as f64 * theta + spec.phase(j)).cos())
        .product())
}

/// `n·θ_j` for `θ_j = 2πj/grid`, reduced exactly before scaling.
fn grid_angle(n: u64, j: usize, grid: usize) -> f64 {
    let idx = (u128::from(n) * j as u128 % grid as u128) as f64;
    TAU * idx / grid as f64
}

fn density_at_index(spec: &RieszSpec, k: usize, j: usize, grid: usize) -> f64 {
    (0..k)
        .map(|i| 1.0 + spec.coefficients[i] * (grid_angle(spec.frequencies[i], j, grid) + spec.phase(i)).cos())
        .product()
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sum over `0..len` in fixed chunks: each chunk is compensated, and the
/// chunk totals are combined in index order, so the result does not depend
/// on scheduling.
fn chunked_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let parts: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Kahan::default();
            for j in c * CHUNK..((c + 1) * CHUNK).min(len) {
                acc.add(f(j));
            }
            acc.sum
        })
        .collect();
    let mut total = Kahan::default();
    for p in parts {
        total.add(p);
    }
    total.sum
}

fn check_grid(grid: usize, min: usize) -> Result<()> {
    if grid < min {
        return Err(Error::InvalidParameter(format!("grid must be >= {min}, got {grid}")));
    }
    Ok(())
}

/// `∫ f_K dθ/2π` by the rectangle rule on `grid` points; exact up to
/// rounding when `grid` exceeds the degree.
pub fn density_mass(spec: &RieszSpec, k: usize, grid: usize) -> Result<f64> {
    spec.check_depth(k)?;
    check_grid(grid, 1)?;
    Ok(chunked_sum(grid, |j| density_at_index(spec, k, j, grid)) / grid as f64)
}

/// Smallest value of `f_K` on the grid.
pub fn density_min(spec: &RieszSpec, k: usize, grid: usize) -> Result<f64> {
    spec.check_depth(k)?;
    check_grid(grid, 1)?;
    Ok((0..grid)
        .into_par_iter()
        .map(|j| density_at_index(spec, k, j, grid))
        .reduce(|| f64::INFINITY, f64::min))
}

/// Power-of-two grid large enough to resolve coefficients up to `max_n`
/// without aliasing.
pub fn quadrature_grid(spec: &RieszSpec, k: usize, max_n: u64) -> usize {
    ((spec.degree(k) + max_n + 1) as usize).next_power_of_two().max(2)
}

/// Coefficients `n = −max_n..=max_n` of `f_K`, by FFT of grid samples.
pub fn quadrature_coefficients(spec: &RieszSpec, k: usize, max_n: u64, grid: usize) -> Result<Vec<Complex<f64>>> {
    spec.check_depth(k)?;
    let need = spec.degree(k) + max_n;
    if (grid as u64) <= need {
        return Err(Error::InvalidParameter(format!("grid {grid} aliases coefficients; need more than {need} points")));
    }
    let mut buf: Vec<Complex<f64>> = (0..grid)
        .into_par_iter()
        .map(|j| Complex::new(density_at_index(spec, k, j, grid), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let scale = 1.0 / grid as f64;
    let max_n = max_n as i64;
    Ok((-max_n..=max_n)
        .map(|n| buf[n.rem_euclid(grid as i64) as usize] * scale)
        .collect())
}

/// `Σ |μ̂(n)|^p` over representable `n` with `|n| > above` (every `n` when
/// `above` is `None`), using the first `k` factors.
///
/// The ε-tree is walked from the top frequency down. A subtree whose sums
/// all lie above the cutoff is closed by the product formula, and one whose
/// sums all lie at or below it is dropped.
pub fn power_tail(spec: &RieszSpec, k: usize, above: Option<u64>, p: i32) -> Result<f64> {
    spec.check_depth(k)?;
    if k > MAX_ENUMERATION_DEPTH {
        return Err(Error::DepthTooLarge { depth: k, max: MAX_ENUMERATION_DEPTH });
    }
    let weights: Vec<f64> = spec.coefficients[..k].iter().map(|a| (a / 2.0).powi(p)).collect();
    let freqs: Vec<i128> = spec.frequencies[..k].iter().map(|&f| i128::from(f)).collect();
    // below[i]: sum of frequencies 0..i; closed[i]: ∏_{j<i} (1 + 2 w_j)
    let mut below = vec![0i128; k + 1];
    let mut closed = vec![1.0f64; k + 1];
    for i in 0..k {
        below[i + 1] = below[i] + freqs[i];
        closed[i + 1] = closed[i] * (1.0 + 2.0 * weights[i]);
    }
    let Some(cut) = above else {
        return Ok(closed[k]);
    };
    let cut = i128::from(cut);

    fn walk(i: usize, s: i128, w: f64, cut: i128, f: &[i128], wt: &[f64], below: &[i128], closed: &[f64]) -> f64 {
        let reach = below[i];
        if s.abs() - reach > cut {
            return w * closed[i];
        }
        if s.abs() + reach <= cut {
            return 0.0;
        }
        let j = i - 1;
        walk(j, s, w, cut, f, wt, below, closed)
            + walk(j, s + f[j], w * wt[j], cut, f, wt, below, closed)
            + walk(j, s - f[j], w * wt[j], cut, f, wt, below, closed)
    }
    Ok(walk(k, 0, 1.0, cut, &freqs, &weights, &below, &closed))
}

/// `Σ_{|n|>N} |μ̂(n)|⁴`, the ℓ² tail of the coefficients of `σ∗σ`.
pub fn convolution_square_tail(spec: &RieszSpec, n: u64) -> Result<f64> {
    power_tail(spec, spec.depth(), Some(n), 4)
}

/// [`convolution_square_tail`] by visiting all `3^depth` vectors; for tests.
pub fn convolution_square_tail_enumerated(spec: &RieszSpec, n: u64) -> Result<f64> {
    let k = spec.depth();
    if k > 14 {
        return Err(Error::DepthTooLarge { depth: k, max: 14 });
    }
    let total = 3usize.pow(k as u32);
    let mut sum = Kahan::default();
    for code in 0..total {
        let mut c = code;
        let mut s = 0i128;
        let mut w = 1.0f64;
        for i in 0..k {
            let e = (c % 3) as i128 - 1;
            c /= 3;
            if e != 0 {
                s += e * i128::from(spec.frequencies[i]);
                w *= (spec.coefficients[i] / 2.0).powi(4);
            }
        }
        if s.unsigned_abs() > u128::from(n) {
            sum.add(w);
        }
    }
    Ok(sum.sum)
}

/// Hellinger affinity `∫ √(f_K(θ) f_K(θ − z)) dθ/2π` for each `K` in `ks`,
/// from one pass over the grid.
pub fn affinity_by_depth(spec: &RieszSpec, z: f64, ks: &[usize], grid: usize) -> Result<Vec<f64>> {
    check_grid(grid, 1 << 10)?;
    let Some(&kmax) = ks.iter().max() else {
        return Ok(Vec::new());
    };
    spec.check_depth(kmax)?;
    if (z / TAU).fract() == 0.0 {
        // the two measures coincide: ∫ f_K = μ̂(0)
        return Ok(vec![1.0; ks.len()]);
    }
    let shifts: Vec<f64> = spec.frequencies[..kmax]
        .iter()
        .map(|&n| (n as f64 * z).rem_euclid(TAU))
        .collect();
    let chunks: Vec<Vec<f64>> = (0..grid.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Kahan::default(); ks.len()];
            for j in c * CHUNK..((c + 1) * CHUNK).min(grid) {
                let (mut f, mut g) = (1.0f64, 1.0f64);
                for (slot, &k) in ks.iter().enumerate() {
                    if k == 0 {
                        acc[slot].add(1.0);
                    }
                }
                for i in 0..kmax {
                    let x = grid_angle(spec.frequencies[i], j, grid) + spec.phase(i);
                    let a = spec.coefficients[i];
                    f *= 1.0 + a * x.cos();
                    g *= 1.0 + a * (x - shifts[i]).cos();
                    for (slot, &k) in ks.iter().enumerate() {
                        if k == i + 1 {
                            acc[slot].add((f * g).max(0.0).sqrt());
                        }
                    }
                }
            }
            acc.into_iter().map(|a| a.sum).collect()
        })
        .collect();
    let mut totals = vec![Kahan::default(); ks.len()];
    for part in chunks {
        for (t, v) in totals.iter_mut().zip(part) {
            t.add(v);
        }
    }
    // rectangle-rule values can overshoot 1 by the aliasing of f_K itself
    Ok(totals.into_iter().map(|t| (t.sum / grid as f64).clamp(0.0, 1.0)).collect())
}

pub fn rotation_affinity(spec: &RieszSpec, z: f64, k: usize, grid: usize) -> Result<f64> {
    Ok(affinity_by_depth(spec, z, &[k], grid)?[0])
}

/// `2π·frac(φ)` for the golden ratio `φ`.
pub fn golden_angle() -> f64 {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    TAU * phi.fract()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffinityTrend {
    pub z: f64,
    pub grid: usize,
    pub depths: Vec<usize>,
    pub affinity: Vec<f64>,
    /// Strictly decreasing over the listed depths.
    pub monotone: bool,
}

impl AffinityTrend {
    pub fn final_value(&self) -> f64 {
        self.affinity.last().copied().unwrap_or(1.0)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
        w.write_record(["K", "affinity"]).map_err(io)?;
        for (k, a) in self.depths.iter().zip(&self.affinity) {
            w.write_record([k.to_string(), a.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))
    }
}

pub fn affinity_trend(spec: &RieszSpec, z: f64, depths: &[usize], grid: usize) -> Result<AffinityTrend> {
    let affinity = affinity_by_depth(spec, z, depths, grid)?;
    let monotone = affinity.windows(2).all(|w| w[1] < w[0]);
    Ok(AffinityTrend { z, grid, depths: depths.to_vec(), affinity, monotone })
}

/// Exact coefficients `n = −max_n..=max_n` as CSV `n,re,im`.
pub fn write_coefficient_csv(spec: &RieszSpec, max_n: i64, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
    w.write_record(["n", "re", "im"]).map_err(io)?;
    for n in -max_n..=max_n {
        let c = fourier_coefficient(spec, n);
        w.write_record([n.to_string(), c.re.to_string(), c.im.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficient_examples() {
        let spec = RieszSpec::triadic(5);
        assert_eq!(fourier_coefficient(&spec, 0), Complex::new(1.0, 0.0));
        assert_eq!(fourier_coefficient(&spec, 9), Complex::new(0.5, 0.0));
        assert_eq!(fourier_coefficient(&spec, 2), Complex::new(0.0, 0.0));
        assert_eq!(fourier_coefficient(&spec, 9 - 3), Complex::new(0.25, 0.0));
        assert_eq!(representation(&spec, -24), Some(vec![1, 0, -1, 0, 0]));
        assert_eq!(representation(&spec, 364), None);
    }

    #[test]
    fn density_examples() {
        let spec = RieszSpec::triadic(3);
        assert_eq!(partial_density(&spec, 1.234, 0).unwrap(), 1.0);
        assert_eq!(partial_density(&spec, 0.0, 1).unwrap(), 2.0);
        assert!(partial_density(&spec, 0.0, 4).is_err());
    }

    #[test]
    fn quadrature_matches_exact_coefficients() {
        let spec = RieszSpec::new(vec![2, 7, 25, 80], vec![0.9, 0.4, 1.0, 0.7], vec![0.3, 2.0, 5.0, 1.1]).unwrap();
        let grid = quadrature_grid(&spec, 4, 50);
        let q = quadrature_coefficients(&spec, 4, 50, grid).unwrap();
        for (i, n) in (-50i64..=50).enumerate() {
            assert!((q[i] - fourier_coefficient(&spec, n)).norm() < 1e-12, "n = {n}");
        }
        assert!(quadrature_coefficients(&spec, 4, 50, 64).is_err());
    }

    #[test]
    fn tails() {
        let spec = RieszSpec::triadic(0);
        assert_eq!(convolution_square_tail(&spec, 0).unwrap(), 0.0);

        let spec = RieszSpec::triadic(12).with_coefficients(|k| 1.0 / (k as f64).sqrt()).unwrap();
        let closed: f64 = spec.coefficients.iter().map(|a| 1.0 + 2.0 * (a / 2.0).powi(4)).product::<f64>() - 1.0;
        let pruned = convolution_square_tail(&spec, 0).unwrap();
        let full = convolution_square_tail_enumerated(&spec, 0).unwrap();
        assert!((pruned - closed).abs() < 1e-14);
        assert!((full - closed).abs() < 1e-13);

        let ones = RieszSpec::triadic(12);
        assert!(convolution_square_tail(&ones, 0).unwrap() > pruned);
        assert!(matches!(
            convolution_square_tail(&RieszSpec::triadic(21), 0),
            Err(Error::DepthTooLarge { depth: 21, max: 20 })
        ));
    }

    #[test]
    fn l2_sums_grow_with_depth() {
        let spec = RieszSpec::triadic(16);
        let sums: Vec<f64> = (4..=16).map(|k| power_tail(&spec, k, None, 2).unwrap()).collect();
        assert!(sums.windows(2).all(|w| w[1] > w[0]));
        assert!((sums[0] - 1.5f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn affinity_basics() {
        let spec = RieszSpec::triadic(8);
        assert_eq!(rotation_affinity(&spec, 0.0, 8, 1 << 12).unwrap(), 1.0);
        let a = rotation_affinity(&spec, golden_angle(), 8, 1 << 14).unwrap();
        assert!((0.0..1.0).contains(&a));
        assert!(rotation_affinity(&spec, 1.0, 8, 512).is_err());
        let by_depth = affinity_by_depth(&spec, golden_angle(), &[0, 4, 8], 1 << 14).unwrap();
        assert_eq!(by_depth[0], 1.0);
        assert_eq!(by_depth[2], a);
    }

    #[test]
    fn spec_validation_and_files() {
        assert!(RieszSpec::new(vec![3, 8], vec![1.0, 1.0], vec![]).is_err());
        assert!(RieszSpec::new(vec![3, 9], vec![1.0, 1.5], vec![]).is_err());
        assert!(RieszSpec::new(vec![3, 9], vec![1.0, 1.0], vec![0.0, 7.0]).is_err());
        let spec = RieszSpec::triadic(4);
        assert_eq!(RieszSpec::from_toml(&spec.to_toml()).unwrap(), spec);
        let bare = RieszSpec::from_toml("frequencies = [1, 3]\ncoefficients = [0.5, 0.5]\n").unwrap();
        assert_eq!(fourier_coefficient(&bare, 4), Complex::new(0.0625, 0.0));
    }

    fn arb_spec() -> impl Strategy<Value = RieszSpec> {
        proptest::collection::vec((0u64..3, 0.05f64..=1.0, 0.0f64..std::f64::consts::TAU), 1..5).prop_map(|fs| {
            let mut n = 1u64;
            let (mut freqs, mut a, mut ph) = (vec![], vec![], vec![]);
            for (step, c, p) in fs {
                freqs.push(n);
                a.push(c);
                ph.push(p);
                n = n * 3 + step;
            }
            RieszSpec::new(freqs, a, ph).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_specs_integrate_to_one(spec in arb_spec()) {
            let k = spec.depth();
            let mass = density_mass(&spec, k, 1 << 16).unwrap();
            prop_assert!((mass - 1.0).abs() < 1e-8);
            prop_assert!(density_min(&spec, k, 1 << 12).unwrap() >= 0.0);
        }

        #[test]
        fn pruned_tail_matches_enumeration(spec in arb_spec(), cut in 0u64..200) {
            let a = convolution_square_tail(&spec, cut).unwrap();
            let b = convolution_square_tail_enumerated(&spec, cut).unwrap();
            prop_assert!((a - b).abs() < 1e-13);
        }

        #[test]
        fn representation_round_trips(spec in arb_spec(), n in -400i64..400) {
            if let Some(eps) = representation(&spec, n) {
                let back: i64 = eps.iter().zip(&spec.frequencies).map(|(&e, &f)| i64::from(e) * f as i64).sum();
                prop_assert_eq!(back, n);
            }
        }
    }
}
