//! Cut-and-stack schedules, selectable by name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One stage of cutting: the tower is cut into `cuts` columns and
/// `spacers[j]` spacer levels go on top of column `j` before stacking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCut {
    pub cuts: u32,
    pub spacers: Vec<u64>,
}

impl StageCut {
    pub fn new(cuts: u32, spacers: Vec<u64>) -> Result<Self> {
        let cut = StageCut { cuts, spacers };
        cut.validate()?;
        Ok(cut)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cuts < 2 {
            return Err(Error::InvalidParameter(format!("cuts must be >= 2, got {}", self.cuts)));
        }
        if self.spacers.len() != self.cuts as usize {
            return Err(Error::InvalidParameter(format!(
                "{} spacer counts given for {} cuts",
                self.spacers.len(),
                self.cuts
            )));
        }
        Ok(())
    }
}

pub trait CutSchedule: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Cut applied to the stage-`n` tower of height `height` to build stage `n + 1`.
    fn stage(&self, n: u32, height: u64) -> StageCut;
}

/// Three columns, one spacer on the middle one: `h_{n+1} = 3h_n + 1`.
#[derive(Debug, Default)]
pub struct ClassicChacon;

impl CutSchedule for ClassicChacon {
    fn name(&self) -> &str {
        "classic-chacon"
    }

    fn stage(&self, _n: u32, _height: u64) -> StageCut {
        StageCut { cuts: 3, spacers: vec![0, 1, 0] }
    }
}

/// Two columns with `⌊ρ·h_n⌋` spacers on the second one.
///
/// A column followed by its copy shifted by `h_n` gives `r_{h_n} >= 1/2`; the
/// long spacer block keeps later overlaps rare, so `r_{h_n} -> 1/2`.
#[derive(Debug, Clone)]
pub struct TwoAdicChacon {
    rho: Ratio<u64>,
}

impl TwoAdicChacon {
    pub const DEFAULT_RHO: (u64, u64) = (51, 100);

    pub fn new(rho: Ratio<u64>) -> Result<Self> {
        if *rho.denom() == 0 {
            return Err(Error::InvalidParameter("spacer ratio has zero denominator".into()));
        }
        Ok(TwoAdicChacon { rho })
    }

    pub fn rho(&self) -> Ratio<u64> {
        self.rho
    }
}

impl Default for TwoAdicChacon {
    fn default() -> Self {
        let (n, d) = Self::DEFAULT_RHO;
        TwoAdicChacon { rho: Ratio::new(n, d) }
    }
}

impl CutSchedule for TwoAdicChacon {
    fn name(&self) -> &str {
        "two-adic-chacon"
    }

    fn stage(&self, _n: u32, height: u64) -> StageCut {
        let top = u128::from(height) * u128::from(*self.rho.numer()) / u128::from(*self.rho.denom());
        StageCut { cuts: 2, spacers: vec![0, u64::try_from(top).unwrap_or(u64::MAX)] }
    }
}

/// A user-supplied list of stages; the last entry repeats past the end.
#[derive(Debug, Clone)]
pub struct Explicit {
    stages: Vec<StageCut>,
}

impl Explicit {
    pub fn new(stages: Vec<StageCut>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidParameter("a recipe needs at least one stage".into()));
        }
        for s in &stages {
            s.validate()?;
        }
        Ok(Explicit { stages })
    }
}

impl CutSchedule for Explicit {
    fn name(&self) -> &str {
        "explicit"
    }

    fn stage(&self, n: u32, _height: u64) -> StageCut {
        let i = (n as usize).min(self.stages.len() - 1);
        self.stages[i].clone()
    }
}

#[derive(Clone, Default)]
pub struct ScheduleRegistry {
    schedules: BTreeMap<String, Arc<dyn CutSchedule>>,
}

impl ScheduleRegistry {
    pub fn with_presets() -> Self {
        let mut reg = ScheduleRegistry::default();
        reg.register(Arc::new(ClassicChacon));
        reg.register(Arc::new(TwoAdicChacon::default()));
        reg
    }

    pub fn register(&mut self, schedule: Arc<dyn CutSchedule>) {
        self.schedules.insert(schedule.name().to_string(), schedule);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn CutSchedule>> {
        self.schedules
            .get(name)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset `{name}`")))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schedules.keys().map(String::as_str)
    }
}

impl fmt::Debug for ScheduleRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.schedules.keys()).finish()
    }
}

static PRESETS: Lazy<ScheduleRegistry> = Lazy::new(ScheduleRegistry::with_presets);

pub fn presets() -> &'static ScheduleRegistry {
    &PRESETS
}

/// A cut schedule plus the file form it came from.
#[derive(Debug, Clone)]
pub struct RankOneRecipe {
    schedule: Arc<dyn CutSchedule>,
}

impl RankOneRecipe {
    pub fn new(schedule: Arc<dyn CutSchedule>) -> Self {
        RankOneRecipe { schedule }
    }

    pub fn preset(name: &str) -> Result<Self> {
        Ok(RankOneRecipe::new(presets().get(name)?))
    }

    pub fn classic_chacon() -> Self {
        RankOneRecipe::new(Arc::new(ClassicChacon))
    }

    pub fn two_adic_chacon() -> Self {
        RankOneRecipe::new(Arc::new(TwoAdicChacon::default()))
    }

    pub fn explicit(stages: Vec<StageCut>) -> Result<Self> {
        Ok(RankOneRecipe::new(Arc::new(Explicit::new(stages)?)))
    }

    pub fn name(&self) -> &str {
        self.schedule.name()
    }

    pub fn stage(&self, n: u32, height: u64) -> StageCut {
        self.schedule.stage(n, height)
    }

    /// Parses `preset = "..."` (with an optional `rho = "p/q"` for the
    /// two-adic preset) or a list of `[[stage]]` tables.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: RecipeFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match (file.preset, file.stage.is_empty()) {
            (Some(name), true) => match file.rho {
                None => RankOneRecipe::preset(&name),
                Some(rho) if name == "two-adic-chacon" => {
                    let r = crate::phase::parse_rational(&rho)?;
                    let (n, d) = (r.numer().try_into(), r.denom().try_into());
                    match (n, d) {
                        (Ok(n), Ok(d)) => Ok(RankOneRecipe::new(Arc::new(TwoAdicChacon::new(Ratio::new(n, d))?))),
                        _ => Err(Error::InvalidParameter(format!("bad spacer ratio `{rho}`"))),
                    }
                }
                Some(_) => Err(Error::InvalidParameter("`rho` only applies to two-adic-chacon".into())),
            },
            (None, false) if file.rho.is_none() => RankOneRecipe::explicit(file.stage),
            _ => Err(Error::Parse("a recipe is either a preset or a list of stages".into())),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecipeFile {
    preset: Option<String>,
    rho: Option<String>,
    #[serde(default)]
    stage: Vec<StageCut>,
}
