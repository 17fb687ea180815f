use forensic_bias::odds::OddsRatio;
use forensic_bias::propagation::{
    monte_carlo_chains, run_chain, run_paired, tilde_peer, BiasProfile, ChainMode, ChainParams, MissingShare,
    ChainProfile, PeerSignal, UnbiasedProfile,
};
use forensic_bias::rng::substream;
use proptest::prelude::*;

fn profile() -> ChainProfile {
    ChainProfile::new(0.15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn modes_share_every_draw(seed in any::<u64>(), k in 1usize..8) {
        let params = ChainParams { k, ..ChainParams::default() };
        let run = run_paired(&params, &profile(), seed, 0).unwrap();
        prop_assert_eq!(run.cascade.case_trait, run.snowball.case_trait);
        for (c, s) in run.cascade.reports.iter().zip(&run.snowball.reports) {
            prop_assert_eq!(c.matched, s.matched);
            prop_assert_eq!(c.missing_share.to_bits(), s.missing_share.to_bits());
            prop_assert_eq!(c.neutral_odds, s.neutral_odds);
            prop_assert_eq!(c.intermediate_odds, s.intermediate_odds);
        }
    }

    #[test]
    fn snowball_never_below_cascade(seed in any::<u64>()) {
        let run = run_paired(&ChainParams::default(), &profile(), seed, 0).unwrap();
        let c = run.cascade.cumulative_bias();
        let s = run.snowball.cumulative_bias();
        for i in 0..c.len() {
            prop_assert!(run.snowball.reports[i].bias_ratio() >= run.cascade.reports[i].bias_ratio());
            prop_assert!(s[i] >= c[i] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn ledgers_are_sound(seed in any::<u64>(), snowball in any::<bool>()) {
        let mode = if snowball { ChainMode::Snowball } else { ChainMode::Cascade };
        let chain = run_chain(mode, &ChainParams::default(), &profile(), &mut substream(seed, "p", 0)).unwrap();
        for r in &chain.reports {
            let rebuilt = r.neutral_odds.value() * r.ledger.total().unwrap().value();
            prop_assert!((rebuilt - r.reported_odds.value()).abs() <= 1e-10 * r.reported_odds.value());
            // The first three entries are the cascade terms.
            let cascade: f64 = r.ledger.entries()[..3].iter().map(|f| f.log_value()).sum();
            prop_assert!((r.neutral_odds.log_value() + cascade - r.intermediate_odds.log_value()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_analyst_is_mode_free(seed in any::<u64>()) {
        let params = ChainParams { k: 1, ..ChainParams::default() };
        let run = run_paired(&params, &profile(), seed, 3).unwrap();
        prop_assert!(run.cascade.same_outcome(&run.snowball));
    }

    #[test]
    fn tilde_peer_counts_favouring_reports(logs in prop::collection::vec(-5.0f64..5.0, 0..20)) {
        let history: Vec<OddsRatio> = logs.iter().map(|&l| OddsRatio::from_log(l).unwrap()).collect();
        // "At least 1" is decided on the log: exp(-1e-17) rounds to 1 but is below it.
        let expected = 1 + logs.iter().filter(|&&l| l >= 0.0).count();
        prop_assert!((tilde_peer(&history).value() - expected as f64).abs() <= 1e-12 * expected as f64);
    }
}

#[test]
fn unbiased_profile_leaves_odds_neutral() {
    let mc = monte_carlo_chains(50, &ChainParams::default(), &UnbiasedProfile, 5).unwrap();
    for mode in [ChainMode::Cascade, ChainMode::Snowball] {
        assert!(mc.mean_cumulative_bias(mode).iter().all(|&b| b == 1.0));
    }
}

#[test]
fn posterior_odds_signal_never_fires_under_defaults() {
    // Reported posterior odds stay below 1 for a pool of 10 (at most
    // 0.1 · 2 · 2 · 2), so the literal indicator never counts a predecessor.
    let params = ChainParams {
        peer_signal: PeerSignal::PosteriorOdds,
        ..ChainParams::default()
    };
    for seed in 0..200 {
        let run = run_paired(&params, &profile(), seed, 0).unwrap();
        assert!(run.cascade.same_outcome(&run.snowball), "seed {seed}");
        assert!(run.snowball.reports.iter().all(|r| r.reported_odds.value() < 1.0));
    }
}

#[test]
fn trait_absent_with_nothing_missing_deflates() {
    let params = ChainParams {
        missing: MissingShare::Constant(0.0),
        ..ChainParams::default()
    };
    let p = profile();
    for seed in 0..50 {
        let chain = run_chain(ChainMode::Cascade, &params, &p, &mut substream(seed, "p", 0)).unwrap();
        if !chain.case_trait {
            for r in &chain.reports {
                assert!((r.bias_ratio() - p.delta_context(false).unwrap().value()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn monte_carlo_independent_of_thread_count() {
    let params = ChainParams::default();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_chains(300, &params, &profile(), 99).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn mean_bias_ordering_over_runs() {
    let mc = monte_carlo_chains(1000, &ChainParams::default(), &profile(), 2024).unwrap();
    let c = mc.mean_cumulative_bias(ChainMode::Cascade);
    let s = mc.mean_cumulative_bias(ChainMode::Snowball);
    assert_eq!(c[0], s[0]);
    for i in 1..c.len() {
        assert!(s[i] > c[i]);
        assert!(s[i] >= s[i - 1]);
    }
    let q = &mc.snowball.per_index[4];
    assert!(q.q025 <= q.q50 && q.q50 <= q.q975);
}
