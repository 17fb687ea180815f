//! Acceptance gate: one line per criterion, then a single assertion that
//! every criterion passed.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::{exhaustive_delta_impute, impute, likelihood, nodes, oracle_irrelevant};
use forensic_bias::contextual::{average_bias, mayfield_deltas, race_example_delta, BiasFactor, BiasLedger, Provenance};
use forensic_bias::feedback::{paired_gaps, FeedbackExperiment};
use forensic_bias::fingerprint::{
    count_matches, decide_source, estimate_delta_impute, grid_fixture_mayfield_style, impute_from_reference,
    ImputeSimParams, LatentVector, MinutiaVector, SourceDecision, Thresholds,
};
use forensic_bias::harness::{run_preset, Parameters, Preset};
use forensic_bias::odds::{
    compose_lr, odds_to_probability, posterior_odds, probability_to_odds, uniform_prior_odds, LikelihoodRatio,
    OddsRatio, Probability, SuspectPool,
};
use forensic_bias::propagation::{monte_carlo_chains, run_paired, ChainMode, ChainParams, ChainProfile};
use forensic_bias::relevance::{classify_relevance, DagFixture, Relevance, BUILTIN_FIXTURES, DEFAULT_TOLERANCE};
use forensic_bias::rng::stream;
use forensic_bias::trier::{biased_guilt_odds, neutral_guilt_odds, systemic_bias_ratio, EvidenceBundle, StreamBias};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c1_mayfield() -> Outcome {
    let avg = average_bias(&mayfield_deltas::<f64>()).unwrap().value();
    outcome(avg == 1.7, format!("average_bias = {avg:?}"))
}

fn c2_race() -> Outcome {
    let p = Probability::new(0.15).unwrap();
    let present = race_example_delta(p, true).unwrap().value();
    let absent = race_example_delta(p, false).unwrap().value();
    let pool = SuspectPool::new(10).unwrap();
    let neutral = posterior_odds(uniform_prior_odds::<f64>(pool), LikelihoodRatio::one()).unwrap();
    let biased = neutral.value() * present;
    let pass = present == 2.0
        && (biased - 2.0 / 10.0).abs() < 1e-12
        && (biased / neutral.value() - 2.0).abs() < 1e-12
        && (absent - (2.0 - 1.0 / 0.85)).abs() < 1e-12;
    outcome(pass, format!("delta present {present}, absent {absent:.12}, biased odds {biased}"))
}

fn c3_tables() -> Outcome {
    let x: MinutiaVector = "000111".parse().unwrap();
    let t1 = count_matches(&x, &"010110".parse::<LatentVector>().unwrap()).unwrap();
    let imputed = impute_from_reference(&"??0?10".parse().unwrap(), &x).unwrap();
    let t3 = count_matches(&x, &imputed.to_latent()).unwrap();
    let pass = (t1.n_correspond, t1.n_minutiae_matches) == (4, 2)
        && imputed == "000110".parse().unwrap()
        && t3.n_correspond == 5;
    outcome(
        pass,
        format!(
            "table 1 ({}, {}), table 3 {:?}, imputed n_correspond {}",
            t1.n_correspond,
            t1.n_minutiae_matches,
            imputed.cells().iter().map(|&b| if b { '1' } else { '0' }).collect::<String>(),
            t3.n_correspond
        ),
    )
}

fn c4_grid() -> Outcome {
    let f = grid_fixture_mayfield_style();
    let t = Thresholds::default();
    let before = decide_source(&f.observed_summary, &t);
    let after = decide_source(&f.imputed_summary, &t);
    let counts = (
        f.true_summary.n_minutiae_matches,
        f.observed_summary.n_minutiae_matches,
        f.imputed_summary.n_minutiae_matches,
    );
    let pass = (f.exemplar.rows(), f.exemplar.cols()) == (10, 5)
        && counts == (5, 3, 8)
        && before == SourceDecision::Inconclusive
        && after == SourceDecision::SupportSameSource;
    outcome(pass, format!("matches true/observed/imputed {counts:?}, {before:?} -> {after:?}"))
}

fn c5_imputation() -> Outcome {
    let (p_same, p_diff) = (0.5, 0.25);
    let holds = |x: u32, y: u32, m: u32, n: u32| {
        let ys = impute(x, y, m);
        likelihood(x, ys, n, p_same) >= likelihood(x, y, n, p_same) - 1e-15
            && likelihood(x, ys, n, p_diff) <= likelihood(x, y, n, p_diff) + 1e-15
    };
    let mut checked = 0u64;
    let mut violations = 0u64;
    for n in 1..=6u32 {
        for x in 0..1u32 << n {
            for y in 0..1u32 << n {
                for m in 0..1u32 << n {
                    checked += 1;
                    violations += u64::from(!holds(x, y, m, n));
                }
            }
        }
    }
    let x12 = 0b1010_0110_0101;
    for y in 0..1u32 << 12 {
        for m in 0..1u32 << 12 {
            checked += 1;
            violations += u64::from(!holds(x12, y, m, 12));
        }
    }

    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (same_source, a) in [(true, p_same), (false, p_diff)] {
        let sim = ImputeSimParams {
            rows: 2,
            cols: 3,
            expected_minutiae: 1.8,
            same_source,
            ..ImputeSimParams::default()
        };
        let estimate = estimate_delta_impute(&sim, 0.25, 10_000, 5).unwrap().value();
        let oracle = exhaustive_delta_impute(6, 2, 0.3, a, p_same, p_diff);
        let rel = (estimate - oracle).abs() / oracle;
        worst = worst.max(rel);
        details.push(format!("{estimate:.4} vs {oracle:.4}"));
    }
    outcome(
        violations == 0 && worst <= 0.02,
        format!(
            "{violations} violations in {checked} cases; Monte Carlo vs oracle {} (worst rel. err {:.3}%)",
            details.join(", "),
            worst * 100.0
        ),
    )
}

fn c6_feedback() -> Outcome {
    let start = Instant::now();
    let short = paired_gaps(&FeedbackExperiment::default(), 1000, 6).unwrap();
    let long = paired_gaps(
        &FeedbackExperiment {
            n_obs: 1000,
            ..FeedbackExperiment::default()
        },
        1000,
        6,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pass = short.mean_gap_biased > short.mean_gap_truthful
        && long.mean_gap_biased < short.mean_gap_biased
        && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "gap truthful {:.4}, biased {:.4} at n=100; biased {:.4} at n=1000; {:.2?}",
            short.mean_gap_truthful, short.mean_gap_biased, long.mean_gap_biased, elapsed
        ),
    )
}

fn c7_propagation() -> Outcome {
    let start = Instant::now();
    let params = ChainParams::default();
    let profile = ChainProfile::new(params.trait_prob);
    let mc = monte_carlo_chains(1000, &params, &profile, 7).unwrap();
    let c = mc.mean_cumulative_bias(ChainMode::Cascade);
    let s = mc.mean_cumulative_bias(ChainMode::Snowball);
    let a = (0..c.len()).all(|i| if i >= 1 { s[i] > c[i] } else { s[i] >= c[i] });
    let b = s.windows(2).all(|w| w[1] >= w[0]);
    let single = ChainParams { k: 1, ..params };
    let c_ok = (0..1000).all(|run| {
        let r = run_paired(&single, &profile, 7, run).unwrap();
        r.cascade.same_outcome(&r.snowball)
    });
    let elapsed = start.elapsed();
    outcome(
        a && b && c_ok && elapsed < Duration::from_secs(30),
        format!(
            "(a) {a} (b) {b} (c) {c_ok}; mean cumulative bias cascade {:?} snowball {:?}; {:.2?}",
            c.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>(),
            s.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>(),
            elapsed
        ),
    )
}

fn c8_trier() -> Outcome {
    let mut rng = stream(8, "acceptance-trier");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(1..12);
        let lrs = (0..k).map(|_| LikelihoodRatio::new(rng.random_range(0.01..100.0)).unwrap()).collect();
        let betas: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..5.0)).collect();
        let bundle = EvidenceBundle::new(
            lrs,
            LikelihoodRatio::new(rng.random_range(0.1..10.0)).unwrap(),
            SuspectPool::new(rng.random_range(1..100_000)).unwrap(),
        )
        .unwrap();
        let bias = StreamBias::new(betas.iter().map(|&b| BiasFactor::new(b, Provenance::Composite).unwrap()).collect());
        let ratio = systemic_bias_ratio(
            biased_guilt_odds(&bundle, &bias).unwrap(),
            neutral_guilt_odds(&bundle).unwrap(),
        )
        .unwrap()
        .value();
        let product: f64 = betas.iter().product();
        worst = worst.max((ratio - product).abs() / product);
    }
    let fixed = EvidenceBundle::<f64>::new(
        [2.0, 3.0, 5.0].iter().map(|&v| LikelihoodRatio::new(v).unwrap()).collect(),
        LikelihoodRatio::one(),
        SuspectPool::new(10).unwrap(),
    )
    .unwrap();
    let neutral = neutral_guilt_odds(&fixed).unwrap().value();
    outcome(
        worst <= 1e-10 && (neutral - 3.0).abs() <= 1e-12,
        format!("worst relative gap to product of betas {worst:.2e}; neutral odds {neutral}"),
    )
}

fn c9_odds_algebra() -> Outcome {
    const CASES: usize = 10_000;
    let mut rng = stream(9, "acceptance-odds");
    let close = |a: f64, b: f64, rel: f64| (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0);
    let lr = |l: f64| LikelihoodRatio::from_log(l).unwrap();
    let mut failures = [0usize; 4];

    for _ in 0..CASES {
        let (a, b, c): (f64, f64, f64) =
            (rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
        let left = compose_lr(&[compose_lr(&[lr(a), lr(b)]).unwrap(), lr(c)]).unwrap();
        let right = compose_lr(&[lr(a), compose_lr(&[lr(b), lr(c)]).unwrap()]).unwrap();
        failures[0] += usize::from(!close(left.log_value(), right.log_value(), 1e-12));
    }
    for _ in 0..CASES {
        let p: f64 = rng.random_range(1e-9..1.0 - 1e-9);
        let back = odds_to_probability(probability_to_odds(Probability::new(p).unwrap()).unwrap()).value();
        failures[1] += usize::from((back - p).abs() > 1e-12 * p.max(1e-3));
    }
    for _ in 0..CASES {
        let n = rng.random_range(1..12);
        let mut logs: Vec<f64> = (0..n).map(|_| rng.random_range(-30.0..30.0)).collect();
        let before = compose_lr(&logs.iter().map(|&l| lr(l)).collect::<Vec<_>>()).unwrap();
        logs.shuffle(&mut rng);
        let after = compose_lr(&logs.iter().map(|&l| lr(l)).collect::<Vec<_>>()).unwrap();
        failures[2] += usize::from(!close(before.log_value(), after.log_value(), 1e-12));
    }
    for _ in 0..CASES {
        let mut ledger = BiasLedger::<f64>::new();
        for _ in 0..rng.random_range(0..10) {
            ledger.push(BiasFactor::from_log(rng.random_range(-3.0..3.0), Provenance::Contextual).unwrap());
        }
        let neutral = OddsRatio::from_log(rng.random_range(-20.0..20.0)).unwrap();
        let reported = posterior_odds(neutral, lr(ledger.log_total())).unwrap().value();
        let rebuilt = neutral.value() * ledger.log_total().exp();
        failures[3] += usize::from((rebuilt - reported).abs() > 1e-10 * reported);
    }
    outcome(
        failures.iter().all(|&f| f == 0),
        format!(
            "{CASES} cases each; failures associativity {} round-trip {} permutation {} ledger {}",
            failures[0], failures[1], failures[2], failures[3]
        ),
    )
}

fn c10_relevance() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, expected, text) in BUILTIN_FIXTURES {
        let oracle = if oracle_irrelevant(&nodes(text)) {
            Relevance::TaskIrrelevant
        } else {
            Relevance::TaskRelevant
        };
        let joint = DagFixture::<f64>::parse(text).unwrap().joint().unwrap();
        let verdict = classify_relevance(&joint, DEFAULT_TOLERANCE).unwrap().verdict;
        pass &= verdict == expected && oracle == expected;
        details.push(format!("{name}={verdict:?}"));
    }
    outcome(pass, details.join(", "))
}

fn c11_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let params = Parameters::default();
    let mut mismatches = Vec::new();
    for preset in Preset::ALL {
        let a = tmp.path().join(format!("{preset}-1"));
        let b = tmp.path().join(format!("{preset}-3"));
        let ma = run_preset(preset, 11, &params, &a, Some(1)).unwrap();
        let mb = run_preset(preset, 11, &params, &b, Some(3)).unwrap();
        let mut same = ma == mb;
        for entry in fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            same &= fs::read(a.join(&name)).unwrap() == fs::read(b.join(&name)).unwrap();
        }
        if !same {
            mismatches.push(preset.name());
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{} presets at 1 vs 3 threads; mismatched: {mismatches:?}", Preset::ALL.len()),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Mayfield aggregation", c1_mayfield),
        ("race example", c2_race),
        ("imputation tables", c3_tables),
        ("grid fixture", c4_grid),
        ("imputation inequalities", c5_imputation),
        ("feedback loop", c6_feedback),
        ("propagation", c7_propagation),
        ("trier identities", c8_trier),
        ("odds algebra", c9_odds_algebra),
        ("relevance classifier", c10_relevance),
        ("determinism", c11_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("criterion {:>2} {:<24} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
