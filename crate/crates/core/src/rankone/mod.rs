//! Cutting-and-stacking rank-one transformations as symbolic words.
//!
//! `r_k` estimates `μ(T^k B ∩ B)/μ(B)` for the base `B` of the stage-0
//! tower. Values stay exact rationals until they are reported.

mod schedule;
mod word;

use std::io::Write;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

pub use schedule::{presets, ClassicChacon, CutSchedule, Explicit, RankOneRecipe, ScheduleRegistry, StageCut, TwoAdicChacon};
pub use word::{build_word, build_word_within, heights, TowerWord, DEFAULT_BUDGET};

use crate::error::{Error, Result};

/// `r_0, …, r_K` on one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSeq {
    pub values: Vec<Ratio<u64>>,
}

impl CorrelationSeq {
    pub fn from_word(word: &TowerWord, max_lag: u64) -> Result<Self> {
        if max_lag >= word.len() {
            return Err(Error::OutOfRange { k: max_lag, len: word.len() });
        }
        let values = (0..=max_lag)
            .into_par_iter()
            .map(|k| word.autocorrelation(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(CorrelationSeq { values })
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(ratio_f64).collect()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
        w.write_record(["k", "r_k"]).map_err(io)?;
        for (k, r) in self.values.iter().enumerate() {
            w.write_record([k.to_string(), ratio_f64(r).to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))
    }
}

pub fn ratio_f64(r: &Ratio<u64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn correlation_sequence(recipe: &RankOneRecipe, stage: u32, max_lag: u64) -> Result<CorrelationSeq> {
    CorrelationSeq::from_word(&build_word(recipe, stage)?, max_lag)
}

/// Extra stages between the last tested height and the word it is read on.
/// `r_{h_n}` on a word only a couple of stages longer than `h_n` is biased by
/// the missing overlaps near the end of the word.
pub const DEFAULT_MARGIN: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakLimitRow {
    pub stage: u32,
    pub height: u64,
    pub r_exact: String,
    pub r: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakLimitReport {
    pub recipe: String,
    pub evaluation_stage: u32,
    pub target: f64,
    pub tol: f64,
    pub rows: Vec<WeakLimitRow>,
    /// Last deviation within `tol`.
    pub pass: bool,
    /// Deviations strictly decreasing over the listed stages.
    pub decreasing: bool,
    /// `max r - min r` over the listed stages.
    pub spread: f64,
}

impl WeakLimitReport {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
        w.write_record(["stage", "height", "r_h", "deviation"]).map_err(io)?;
        for row in &self.rows {
            w.write_record([row.stage.to_string(), row.height.to_string(), row.r.to_string(), row.deviation.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))
    }
}

pub fn weak_limit_check(
    recipe: &RankOneRecipe,
    stages: &[u32],
    target: Ratio<u64>,
    tol: f64,
) -> Result<WeakLimitReport> {
    weak_limit_check_with(recipe, stages, target, tol, DEFAULT_MARGIN, DEFAULT_BUDGET)
}

/// `|r_{h_n} − target|` for each listed stage `n`, read on the word of stage
/// `max(stages) + margin`.
pub fn weak_limit_check_with(
    recipe: &RankOneRecipe,
    stages: &[u32],
    target: Ratio<u64>,
    tol: f64,
    margin: u32,
    budget: u64,
) -> Result<WeakLimitReport> {
    let Some(&last) = stages.last() else {
        return Err(Error::InvalidParameter("no stages requested".into()));
    };
    if stages.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("stages must be strictly ascending".into()));
    }
    let evaluation_stage = last
        .checked_add(margin)
        .ok_or_else(|| Error::InvalidParameter("stage out of range".into()))?;
    let word = word::build_word_within(recipe, evaluation_stage, budget)?;
    let target_f = ratio_f64(&target);
    let rows = stages
        .par_iter()
        .map(|&n| {
            let height = word.heights()[n as usize];
            let r = word.autocorrelation(height)?;
            let rf = ratio_f64(&r);
            Ok(WeakLimitRow { stage: n, height, r_exact: r.to_string(), r: rf, deviation: (rf - target_f).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let last_dev = rows.last().map(|r| r.deviation).unwrap_or(f64::INFINITY);
    let decreasing = rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.r), hi.max(r.r)));
    Ok(WeakLimitReport {
        recipe: recipe.name().to_string(),
        evaluation_stage,
        target: target_f,
        tol,
        pass: last_dev <= tol,
        decreasing,
        spread: hi - lo,
        rows,
    })
}

/// `max_{k <= max_lag} |r_k(W_n) − r_k(W_{n+1})|`.
pub fn stage_consistency(recipe: &RankOneRecipe, n: u32, max_lag: u64) -> Result<f64> {
    let next = build_word(recipe, n + 1)?;
    let word = build_word(recipe, n)?;
    if max_lag >= word.len() {
        return Err(Error::OutOfRange { k: max_lag, len: word.len() });
    }
    let worst = (0..=max_lag)
        .into_par_iter()
        .map(|k| {
            let a = ratio_f64(&word.autocorrelation(k)?);
            let b = ratio_f64(&next.autocorrelation(k)?);
            Ok((a - b).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Fejér-windowed spectral density on `resolution` equally spaced angles.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub theta: Vec<f64>,
    pub density: Vec<f64>,
}

impl DensityTable {
    /// Mean over the grid, i.e. the integral against `dθ/2π`.
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len() as f64
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
        w.write_record(["theta", "density"]).map_err(io)?;
        for (t, d) in self.theta.iter().zip(&self.density) {
            w.write_record([t.to_string(), d.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))
    }
}

/// `Σ_{|k|<L} (1 − |k|/L) r_{|k|} e^{−ikθ}` at `θ_j = 2πj/L`, `L = resolution`.
///
/// The window is positive and `r` is positive definite, so the estimate is
/// nonnegative up to rounding (clamped) and has mean `r_0`.
pub fn spectral_estimate(seq: &CorrelationSeq, resolution: usize) -> Result<DensityTable> {
    if resolution < 16 {
        return Err(Error::InvalidParameter("resolution must be >= 16".into()));
    }
    if seq.values.len() < resolution {
        return Err(Error::InsufficientData { have: seq.values.len(), need: resolution });
    }
    let r = seq.to_f64();
    let l = resolution as f64;
    let mut buf: Vec<Complex<f64>> = (0..resolution)
        .map(|k| {
            let v = if k == 0 {
                r[0]
            } else {
                let w = k as f64 / l;
                (1.0 - w) * r[k] + w * r[resolution - k]
            };
            Complex::new(v, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(resolution).process(&mut buf);
    let theta = (0..resolution)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / l)
        .collect();
    let density = buf.iter().map(|c| c.re.max(0.0)).collect();
    Ok(DensityTable { theta, density })
}
