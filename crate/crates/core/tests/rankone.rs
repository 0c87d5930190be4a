//! Rank-one words from recipe files through to correlation and density tables.

use num_rational::Ratio;
use specmult::rankone::{
    build_word, correlation_sequence, spectral_estimate, stage_consistency, weak_limit_check, RankOneRecipe,
};

#[test]
fn recipe_file_matches_the_preset() {
    let from_file = RankOneRecipe::from_toml("preset = \"classic-chacon\"\n").unwrap();
    let preset = RankOneRecipe::classic_chacon();
    for stage in 0..=6 {
        let a = build_word(&from_file, stage).unwrap();
        let b = build_word(&preset, stage).unwrap();
        assert_eq!(a.symbols(), b.symbols(), "stage {stage}");
    }
}

#[test]
fn explicit_stages_from_a_file() {
    let text = "[[stage]]\ncuts = 2\nspacers = [0, 1]\n";
    let recipe = RankOneRecipe::from_toml(text).unwrap();
    let w = build_word(&recipe, 2).unwrap();
    assert_eq!(w.heights(), [1, 3, 7]);
    assert_eq!(w.level_count(), 4);
}

// k <= h_{n-3} is far enough inside the tower that the next stage only adds
// boundary terms of order 1/h_n
#[test]
fn stage_consistency_deep_inside_the_tower() {
    for recipe in [RankOneRecipe::classic_chacon(), RankOneRecipe::two_adic_chacon()] {
        for n in 8..=11u32 {
            let h = build_word(&recipe, n).unwrap().heights()[n as usize - 3];
            let d = stage_consistency(&recipe, n, h).unwrap();
            assert!(d < 0.05, "{} n={n}: {d}", recipe.name());
        }
    }
}

#[test]
fn lag_zero_is_exactly_one() {
    for recipe in [RankOneRecipe::classic_chacon(), RankOneRecipe::two_adic_chacon()] {
        let seq = correlation_sequence(&recipe, 5, 10).unwrap();
        assert_eq!(seq.values[0], Ratio::new(1, 1));
    }
}

#[test]
fn classic_weak_limit_settles() {
    let report = weak_limit_check(&RankOneRecipe::classic_chacon(), &[8, 9, 10], Ratio::new(3, 4), 0.01).unwrap();
    assert!(report.pass, "{report:?}");
    assert!(report.spread < 0.01);
}

#[test]
fn tables_have_fixed_headers() {
    let seq = correlation_sequence(&RankOneRecipe::classic_chacon(), 6, 200).unwrap();
    let mut out = Vec::new();
    seq.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("k,r_k\n0,1\n"), "{text}");
    assert_eq!(text.lines().count(), 202);

    let table = spectral_estimate(&seq, 64).unwrap();
    assert!((table.mass() - 1.0).abs() < 1e-6);
    assert!(table.density.iter().all(|&d| d >= 0.0));
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("theta,density\n"));
}
