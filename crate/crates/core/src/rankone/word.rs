//! Bit-packed tower words: bit `i` is set when position `i` is a level of
//! the stage-0 tower and clear when it is a spacer.

use num_rational::Ratio;

use super::schedule::RankOneRecipe;
use crate::error::{Error, Result};

/// Largest word, in symbols, built without an explicit budget (128 MiB).
pub const DEFAULT_BUDGET: u64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerWord {
    bits: Vec<u64>,
    len: u64,
    level_count: u64,
    stage: u32,
    heights: Vec<u64>,
}

impl TowerWord {
    /// Word from explicit symbols, `true` for a level.
    pub fn from_symbols(symbols: &[bool]) -> Self {
        let mut bits = vec![0u64; symbols.len().div_ceil(64)];
        for (i, _) in symbols.iter().enumerate().filter(|(_, &s)| s) {
            bits[i / 64] |= 1 << (i % 64);
        }
        let len = symbols.len() as u64;
        TowerWord { bits, len, level_count: symbols.iter().filter(|&&s| s).count() as u64, stage: 0, heights: vec![len] }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Tower height: spacers count as levels of the next tower, so this is
    /// the word length.
    pub fn height(&self) -> u64 {
        self.len
    }

    /// Number of stage-0 levels in the word.
    pub fn level_count(&self) -> u64 {
        self.level_count
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    /// Heights `h_0, …, h_stage` of the towers that produced this word.
    pub fn heights(&self) -> &[u64] {
        &self.heights
    }

    pub fn symbol(&self, i: u64) -> bool {
        i < self.len && self.bits[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn symbols(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.symbol(i)).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut w = TowerWord::from_symbols(&self.symbols().into_iter().rev().collect::<Vec<_>>());
        w.stage = self.stage;
        w.heights = self.heights.clone();
        w
    }

    /// 64 bits starting at bit `pos`; zero past the end.
    fn window(&self, pos: u64) -> u64 {
        let q = (pos / 64) as usize;
        let r = pos % 64;
        let lo = self.bits.get(q).copied().unwrap_or(0);
        if r == 0 {
            lo
        } else {
            let hi = self.bits.get(q + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        }
    }

    /// Number of `i` with `symbol(i)` and `symbol(i + k)` both levels.
    pub fn overlap_count(&self, k: u64) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .map(|(j, &w)| u64::from((w & self.window(j as u64 * 64 + k)).count_ones()))
            .sum()
    }

    /// `r_k`: overlaps at lag `k` over the number of levels.
    pub fn autocorrelation(&self, k: u64) -> Result<Ratio<u64>> {
        if k >= self.len {
            return Err(Error::OutOfRange { k, len: self.len });
        }
        Ok(Ratio::new(self.overlap_count(k), self.level_count))
    }
}

/// ORs `src` (of `nbits` bits) into `dst` at bit offset `at`.
fn or_at(dst: &mut [u64], src: &[u64], nbits: u64, at: u64) {
    let q = (at / 64) as usize;
    let r = at % 64;
    let words = nbits.div_ceil(64) as usize;
    for (i, &w) in src[..words].iter().enumerate() {
        dst[q + i] |= w << r;
        if r != 0 {
            if let Some(next) = dst.get_mut(q + i + 1) {
                *next |= w >> (64 - r);
            }
        }
    }
}

/// Heights `h_0..=h_stage` and the stage cuts, refusing words over `budget`.
fn plan(recipe: &RankOneRecipe, stage: u32, budget: u64) -> Result<Vec<u64>> {
    let mut heights = vec![1u64];
    for n in 0..stage {
        let h = *heights.last().expect("nonempty");
        let cut = recipe.stage(n, h);
        cut.validate()?;
        let next = u128::from(h) * u128::from(cut.cuts) + cut.spacers.iter().map(|&s| u128::from(s)).sum::<u128>();
        if next > u128::from(budget) {
            return Err(Error::BudgetExceeded {
                requested: format!("the stage-{} word needs {next}", n + 1),
                budget,
            });
        }
        heights.push(next as u64);
    }
    Ok(heights)
}

/// Tower heights `h_0..=h_stage` without building the word.
pub fn heights(recipe: &RankOneRecipe, stage: u32, budget: u64) -> Result<Vec<u64>> {
    plan(recipe, stage, budget)
}

/// The stage-`stage` word, `W_{n+1} = W_n s^{a_0} W_n s^{a_1} …`.
pub fn build_word(recipe: &RankOneRecipe, stage: u32) -> Result<TowerWord> {
    build_word_within(recipe, stage, DEFAULT_BUDGET)
}

pub fn build_word_within(recipe: &RankOneRecipe, stage: u32, budget: u64) -> Result<TowerWord> {
    let heights = plan(recipe, stage, budget)?;
    let mut bits = vec![1u64];
    let mut len = 1u64;
    let mut levels = 1u64;
    for n in 0..stage {
        let cut = recipe.stage(n, len);
        let next_len = heights[n as usize + 1];
        let mut next = vec![0u64; next_len.div_ceil(64) as usize];
        let mut at = 0u64;
        for &spacers in &cut.spacers {
            or_at(&mut next, &bits, len, at);
            at += len + spacers;
        }
        bits = next;
        len = next_len;
        levels *= u64::from(cut.cuts);
    }
    Ok(TowerWord { bits, len, level_count: levels, stage, heights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankone::schedule::StageCut;
    use proptest::prelude::*;

    fn show(w: &TowerWord) -> String {
        w.symbols().iter().map(|&s| if s { 'l' } else { 's' }).collect()
    }

    #[test]
    fn classic_words() {
        let r = RankOneRecipe::classic_chacon();
        assert_eq!(show(&build_word(&r, 1).unwrap()), "llsl");
        let hs: Vec<u64> = (0..4).map(|n| build_word(&r, n).unwrap().height()).collect();
        assert_eq!(hs, [1, 4, 13, 40]);
        assert_eq!(build_word(&r, 1).unwrap().level_count(), 3);
    }

    #[test]
    fn explicit_two_cut_word() {
        let r = RankOneRecipe::explicit(vec![StageCut::new(2, vec![0, 1]).unwrap()]).unwrap();
        assert_eq!(show(&build_word(&r, 1).unwrap()), "lls");
        assert_eq!(show(&build_word(&r, 2).unwrap()), "llsllss");
    }

    #[test]
    fn autocorrelation_examples() {
        let w = build_word(&RankOneRecipe::classic_chacon(), 1).unwrap();
        assert_eq!(w.autocorrelation(0).unwrap(), Ratio::from_integer(1));
        assert_eq!(w.autocorrelation(1).unwrap(), Ratio::new(1, 3));
        let last = w.autocorrelation(w.len() - 1).unwrap();
        assert!(last <= Ratio::new(1, w.level_count()));
        assert!(matches!(w.autocorrelation(4), Err(Error::OutOfRange { k: 4, len: 4 })));
    }

    #[test]
    fn budget_is_enforced() {
        let r = RankOneRecipe::classic_chacon();
        assert!(matches!(build_word(&r, 99), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(build_word_within(&r, 5, 100), Err(Error::BudgetExceeded { .. })));
        assert!(build_word_within(&r, 4, 121).is_ok());
    }

    fn naive_word(cuts: &[StageCut], stage: u32) -> Vec<bool> {
        let mut w = vec![true];
        for n in 0..stage as usize {
            let cut = &cuts[n.min(cuts.len() - 1)];
            let mut next = Vec::new();
            for &s in &cut.spacers {
                next.extend_from_slice(&w);
                next.extend(std::iter::repeat_n(false, s as usize));
            }
            w = next;
        }
        w
    }

    fn arb_cuts() -> impl Strategy<Value = Vec<StageCut>> {
        proptest::collection::vec(
            (2u32..5).prop_flat_map(|c| {
                proptest::collection::vec(0u64..4, c as usize).prop_map(move |s| StageCut { cuts: c, spacers: s })
            }),
            1..4,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn recurrences_hold(cuts in arb_cuts(), stage in 0u32..=8) {
            let r = RankOneRecipe::explicit(cuts.clone()).unwrap();
            let Ok(w) = build_word_within(&r, stage, 1 << 22) else { return Ok(()) };
            let naive = naive_word(&cuts, stage);
            prop_assert_eq!(w.symbols(), naive.clone());
            prop_assert_eq!(w.level_count(), naive.iter().filter(|&&s| s).count() as u64);
            for n in 0..stage as usize {
                let cut = &cuts[n.min(cuts.len() - 1)];
                let h = w.heights()[n];
                prop_assert_eq!(w.heights()[n + 1], h * u64::from(cut.cuts) + cut.spacers.iter().sum::<u64>());
            }
        }

        #[test]
        fn autocorrelation_matches_direct_count(cuts in arb_cuts(), stage in 0u32..=6, seed in 0u64..1000) {
            let r = RankOneRecipe::explicit(cuts).unwrap();
            let Ok(w) = build_word_within(&r, stage, 1 << 16) else { return Ok(()) };
            let k = seed % w.len();
            let s = w.symbols();
            let direct = (0..s.len() - k as usize).filter(|&i| s[i] && s[i + k as usize]).count() as u64;
            prop_assert_eq!(w.overlap_count(k), direct);
            prop_assert_eq!(w.reversed().autocorrelation(k).unwrap(), w.autocorrelation(k).unwrap());
        }
    }
}
