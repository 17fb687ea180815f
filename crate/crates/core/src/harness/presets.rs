//! What each preset computes and which files it emits.
//!
//! Plot-data files are named `plot_<panel>.csv` and hold one row per point;
//! the first column is the x axis and the remaining columns are series.

use rayon::prelude::*;
use serde::Serialize;

use super::{runtime, Artifact, HarnessError, Parameters, Preset};
use crate::contextual::{average_bias, average_bias_with, mayfield_deltas, race_example_delta, Averaging};
use crate::feedback::{convergence_gap, paired_gaps, paired_trajectories, BetaPrior, FeedbackExperiment};
use crate::fingerprint::{
    count_matches, decide_source, estimate_delta_impute, expected_delta_impute, grid_fixture_mayfield_style,
    impute_from_reference, CellAgreementModel, ImputeSimParams, LatentVector, MinutiaVector, Thresholds,
};
use crate::odds::{posterior_odds, uniform_prior_odds, LikelihoodRatio, Probability, SuspectPool};
use crate::propagation::{
    monte_carlo_chains, ChainMode, ChainParams, EvidenceModel, MissingShare, ChainProfile,
};
use crate::relevance::{classify_relevance, DagFixture, BUILTIN_FIXTURES};
use crate::trier::CaseReport;

fn json<S: Serialize>(name: &str, value: &S) -> Result<Artifact, HarnessError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| HarnessError::Output(format!("{name}: {e}")))?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

fn csv<S: Serialize>(name: &str, rows: &[S]) -> Result<Artifact, HarnessError> {
    let err = |e: csv::Error| HarnessError::Output(format!("{name}: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Output(format!("{name}: {e}")))?;
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

/// Computes every artifact of `preset`; nothing is written here.
pub fn build_artifacts(preset: Preset, seed: u64, p: &Parameters) -> Result<Vec<Artifact>, HarnessError> {
    match preset {
        Preset::Mayfield => mayfield(),
        Preset::Race => race(p),
        Preset::Relevance => relevance(p),
        Preset::ImputationTable => imputation_table(),
        Preset::ImputationGrid => imputation_grid(p),
        Preset::DeltaImpute => delta_impute(p, seed),
        Preset::Feedback => feedback(p, seed),
        Preset::Propagation => propagation(p, seed),
        Preset::Trier => trier(p, seed),
    }
}

fn mayfield() -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Results {
        deltas: Vec<f64>,
        average_bias: f64,
        geometric_average_bias: f64,
    }
    #[derive(Serialize)]
    struct Point {
        examiner: usize,
        delta: f64,
    }
    let m = runtime("contextual");
    let deltas = mayfield_deltas::<f64>();
    let results = Results {
        deltas: deltas.iter().map(|d| d.value()).collect(),
        average_bias: average_bias(&deltas).map_err(&m)?.value(),
        geometric_average_bias: average_bias_with(&deltas, Averaging::Geometric).map_err(&m)?.value(),
    };
    let points: Vec<Point> = results
        .deltas
        .iter()
        .enumerate()
        .map(|(i, &delta)| Point { examiner: i + 1, delta })
        .collect();
    Ok(vec![json("results.json", &results)?, csv("plot_mayfield.csv", &points)?])
}

fn race(p: &Parameters) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Results {
        pool: u64,
        trait_prob: f64,
        delta_trait_present: f64,
        delta_trait_absent: f64,
        true_lr: f64,
        neutral_posterior_odds: f64,
        biased_posterior_odds_trait_present: f64,
        biased_posterior_odds_trait_absent: f64,
    }
    #[derive(Serialize)]
    struct Point {
        trait_prob: f64,
        delta_trait_present: f64,
        delta_trait_absent: f64,
    }
    let m = runtime("contextual");
    let pool = SuspectPool::new(p.pool).map_err(runtime("odds"))?;
    let pt = Probability::new(p.trait_prob).map_err(&m)?;
    let present = race_example_delta(pt, true).map_err(&m)?;
    let absent = race_example_delta(pt, false).map_err(&m)?;
    let neutral = posterior_odds(uniform_prior_odds(pool), LikelihoodRatio::one()).map_err(runtime("odds"))?;
    let results = Results {
        pool: p.pool,
        trait_prob: p.trait_prob,
        delta_trait_present: present.value(),
        delta_trait_absent: absent.value(),
        true_lr: 1.0,
        neutral_posterior_odds: neutral.value(),
        biased_posterior_odds_trait_present: neutral.value() * present.value(),
        biased_posterior_odds_trait_absent: neutral.value() * absent.value(),
    };
    let points = (1..50)
        .map(|i| {
            let q = Probability::new(i as f64 / 100.0).map_err(&m)?;
            Ok(Point {
                trait_prob: q.value(),
                delta_trait_present: race_example_delta(q, true).map_err(&m)?.value(),
                delta_trait_absent: race_example_delta(q, false).map_err(&m)?.value(),
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(vec![json("results.json", &results)?, csv("plot_race_delta.csv", &points)?])
}

fn relevance(p: &Parameters) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Row {
        fixture: &'static str,
        expected: &'static str,
        verdict: &'static str,
        max_discrepancy: f64,
        tolerance: f64,
    }
    let label = |r| match r {
        crate::relevance::Relevance::TaskRelevant => "task_relevant",
        crate::relevance::Relevance::TaskIrrelevant => "task_irrelevant",
    };
    let m = runtime("relevance");
    let rows = BUILTIN_FIXTURES
        .iter()
        .map(|&(name, expected, text)| {
            let joint = DagFixture::<f64>::parse(text).map_err(&m)?.joint().map_err(&m)?;
            let v = classify_relevance(&joint, p.relevance_tolerance).map_err(&m)?;
            Ok(Row {
                fixture: name,
                expected: label(expected),
                verdict: label(v.verdict),
                max_discrepancy: v.max_discrepancy,
                tolerance: v.tolerance,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(vec![csv("results.csv", &rows)?])
}

/// The six-cell exemplar and latents of the imputation tables.
pub const TABLE_EXEMPLAR: &str = "000111";
pub const TABLE_LATENT: &str = "010110";
pub const TABLE_LATENT_MISSING: &str = "??0?10";

fn imputation_table() -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Cell {
        table: u8,
        cell: usize,
        x: char,
        y: char,
    }
    #[derive(Serialize)]
    struct Summary {
        table: u8,
        n_correspond: usize,
        n_minutiae_matches: usize,
        n_missing: usize,
    }
    let m = runtime("fingerprint");
    let parse_err = |e: crate::Error| HarnessError::Runtime {
        module: "fingerprint",
        source: e,
    };
    let x: MinutiaVector = TABLE_EXEMPLAR.parse().map_err(parse_err)?;
    let y: LatentVector = TABLE_LATENT.parse().map_err(parse_err)?;
    let missing: LatentVector = TABLE_LATENT_MISSING.parse().map_err(parse_err)?;
    let imputed = impute_from_reference(&missing, &x).map_err(&m)?.to_latent();
    let bit = |b: bool| if b { '1' } else { '0' };

    let mut cells = Vec::new();
    let mut summaries = Vec::new();
    for (table, latent) in [(1u8, &y), (2, &missing), (3, &imputed)] {
        for (i, (&xc, yc)) in x.cells().iter().zip(latent.cells()).enumerate() {
            let y = match yc.symbol() {
                'm' => '1',
                '.' => '0',
                other => other,
            };
            cells.push(Cell { table, cell: i + 1, x: bit(xc), y });
        }
        let s = count_matches(&x, latent).map_err(&m)?;
        summaries.push(Summary {
            table,
            n_correspond: s.n_correspond,
            n_minutiae_matches: s.n_minutiae_matches,
            n_missing: s.n_missing,
        });
    }
    Ok(vec![csv("tables.csv", &cells)?, csv("summary.csv", &summaries)?])
}

fn thresholds(p: &Parameters) -> Result<Thresholds, HarnessError> {
    Thresholds::new(p.threshold_identification, p.threshold_support, p.threshold_inconclusive)
        .map_err(runtime("fingerprint"))
}

fn imputation_grid(p: &Parameters) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Stage {
        stage: &'static str,
        n_correspond: usize,
        n_minutiae_matches: usize,
        n_missing: usize,
        decision: &'static str,
    }
    #[derive(Serialize)]
    struct GridCell {
        row: usize,
        col: usize,
        exemplar: char,
        latent_true: char,
        latent_observed: char,
        imputed: char,
    }
    let t = thresholds(p)?;
    let f = grid_fixture_mayfield_style();
    let stages: Vec<Stage> = [
        ("true", f.true_summary),
        ("observed", f.observed_summary),
        ("imputed", f.imputed_summary),
    ]
    .into_iter()
    .map(|(stage, s)| Stage {
        stage,
        n_correspond: s.n_correspond,
        n_minutiae_matches: s.n_minutiae_matches,
        n_missing: s.n_missing,
        decision: decide_source(&s, &t).label(),
    })
    .collect();
    let mut cells = Vec::new();
    for row in 0..f.exemplar.rows() {
        for col in 0..f.exemplar.cols() {
            cells.push(GridCell {
                row,
                col,
                exemplar: f.exemplar.get(row, col).symbol(),
                latent_true: f.latent_true.get(row, col).symbol(),
                latent_observed: f.latent_observed.get(row, col).symbol(),
                imputed: f.imputed.get(row, col).symbol(),
            });
        }
    }
    Ok(vec![csv("results.csv", &stages)?, csv("grids.csv", &cells)?])
}

fn delta_impute(p: &Parameters, seed: u64) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Point {
        missing_share: f64,
        source: &'static str,
        estimate: f64,
        closed_form: f64,
        n_reps: usize,
    }
    let m = runtime("fingerprint");
    let model = CellAgreementModel::new(p.p_same, p.p_diff).map_err(&m)?;
    let mut points = Vec::new();
    for (source, same_source) in [("same", true), ("different", false)] {
        let sim = ImputeSimParams {
            rows: p.rows,
            cols: p.cols,
            expected_minutiae: p.expected_minutiae,
            model,
            same_source,
            mask_mode: p.mask_mode,
        };
        for &share in &p.missing_shares {
            points.push(Point {
                missing_share: share,
                source,
                estimate: estimate_delta_impute(&sim, share, p.n_reps, seed).map_err(&m)?.value(),
                closed_form: expected_delta_impute(&sim, share),
                n_reps: p.n_reps,
            });
        }
    }
    Ok(vec![csv("plot_delta_impute.csv", &points)?])
}

fn feedback_experiment(p: &Parameters, n_obs: usize) -> Result<FeedbackExperiment, HarnessError> {
    Ok(FeedbackExperiment {
        prior: BetaPrior::new(p.prior_a, p.prior_b).map_err(runtime("feedback"))?,
        alpha_true: p.alpha_true,
        n_obs,
        wrongful_rate: p.wrongful_rate,
        trait_skew: p.trait_skew,
    })
}

fn feedback(p: &Parameters, seed: u64) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Point {
        step: usize,
        truthful_mean: f64,
        biased_mean: f64,
    }
    #[derive(Serialize)]
    struct Gap {
        replicate: usize,
        gap_truthful: f64,
        gap_biased: f64,
    }
    let m = runtime("feedback");
    let exp = feedback_experiment(p, p.n_obs)?;
    let long = feedback_experiment(p, p.n_obs * 10)?;
    let summary = paired_gaps(&exp, p.n_seeds, seed).map_err(&m)?;
    let long_summary = paired_gaps(&long, p.n_seeds, seed).map_err(&m)?;

    let alpha = Probability::new(p.alpha_true).map_err(&m)?;
    let pairs = (0..p.n_seeds as u64)
        .into_par_iter()
        .map(|i| paired_trajectories(&exp, seed, i))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(&m)?;
    let mut truthful = vec![0.0; p.n_obs];
    let mut biased = vec![0.0; p.n_obs];
    for (t, b) in &pairs {
        for s in 0..p.n_obs {
            truthful[s] += t.posterior_means[s];
            biased[s] += b.posterior_means[s];
        }
    }
    let n = p.n_seeds as f64;
    let points: Vec<Point> = (0..p.n_obs)
        .map(|s| Point {
            step: s + 1,
            truthful_mean: truthful[s] / n,
            biased_mean: biased[s] / n,
        })
        .collect();
    let gaps: Vec<Gap> = pairs
        .iter()
        .enumerate()
        .map(|(i, (t, b))| Gap {
            replicate: i,
            gap_truthful: convergence_gap(t, alpha),
            gap_biased: convergence_gap(b, alpha),
        })
        .collect();

    #[derive(Serialize)]
    struct Results {
        at_n_obs: crate::feedback::PairedGaps,
        at_ten_times_n_obs: crate::feedback::PairedGaps,
    }
    let results = Results {
        at_n_obs: summary,
        at_ten_times_n_obs: long_summary,
    };
    Ok(vec![
        json("results.json", &results)?,
        csv("gaps.csv", &gaps)?,
        csv("plot_posterior_mean.csv", &points)?,
    ])
}

fn chain_params(p: &Parameters) -> Result<ChainParams, HarnessError> {
    Ok(ChainParams {
        k: p.k,
        pool: SuspectPool::new(p.pool).map_err(runtime("odds"))?,
        trait_prob: p.trait_prob,
        model: EvidenceModel::new(p.p_match_same, p.p_match_diff).map_err(runtime("propagation"))?,
        missing: MissingShare::Uniform {
            low: p.missing_low,
            high: p.missing_high,
        },
        same_source_truth: p.same_source_truth,
        peer_signal: p.peer_signal,
    })
}

fn profile(p: &Parameters) -> ChainProfile {
    ChainProfile {
        trait_prob: p.trait_prob,
        indicator: p.peer_indicator,
    }
}

fn propagation(p: &Parameters, seed: u64) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Row {
        mode: &'static str,
        run_id: usize,
        analyst_index: usize,
        matched: bool,
        case_trait: bool,
        missing_share: f64,
        neutral_odds: f64,
        intermediate_odds: f64,
        reported_odds: f64,
        bias_ratio: f64,
        cumulative_bias: f64,
    }
    #[derive(Serialize)]
    struct Stat {
        mode: &'static str,
        analyst_index: usize,
        mean: f64,
        q025: f64,
        q50: f64,
        q975: f64,
    }
    let params = chain_params(p)?;
    let mc = monte_carlo_chains(p.n_runs, &params, &profile(p), seed).map_err(runtime("propagation"))?;
    let mut rows = Vec::with_capacity(2 * p.n_runs * p.k);
    for mode in [ChainMode::Cascade, ChainMode::Snowball] {
        for run in &mc.runs {
            let chain = run.chain(mode);
            for (r, cum) in chain.reports.iter().zip(chain.cumulative_bias()) {
                rows.push(Row {
                    mode: mode.label(),
                    run_id: run.run_id,
                    analyst_index: r.index,
                    matched: r.matched,
                    case_trait: chain.case_trait,
                    missing_share: r.missing_share,
                    neutral_odds: r.neutral_odds.value(),
                    intermediate_odds: r.intermediate_odds.value(),
                    reported_odds: r.reported_odds.value(),
                    bias_ratio: r.bias_ratio(),
                    cumulative_bias: cum,
                });
            }
        }
    }
    let stats: Vec<Stat> = [ChainMode::Cascade, ChainMode::Snowball]
        .into_iter()
        .flat_map(|mode| {
            mc.mode(mode).per_index.iter().map(move |s| Stat {
                mode: mode.label(),
                analyst_index: s.analyst_index,
                mean: s.mean,
                q025: s.q025,
                q50: s.q50,
                q975: s.q975,
            })
        })
        .collect();
    Ok(vec![csv("results.csv", &rows)?, csv("plot_cumulative_bias.csv", &stats)?])
}

fn trier(p: &Parameters, seed: u64) -> Result<Vec<Artifact>, HarnessError> {
    #[derive(Serialize)]
    struct Row {
        run_id: usize,
        case_trait: bool,
        neutral_odds: f64,
        cascade_biased_odds: f64,
        cascade_systemic_ratio: f64,
        snowball_biased_odds: f64,
        snowball_systemic_ratio: f64,
    }
    #[derive(Serialize)]
    struct CaseReports {
        run_id: usize,
        cascade: CaseReport,
        snowball: CaseReport,
    }
    let m = runtime("trier");
    let params = chain_params(p)?;
    let context = LikelihoodRatio::new(p.context_lr).map_err(&m)?;
    let mc = monte_carlo_chains(p.n_runs, &params, &profile(p), seed).map_err(runtime("propagation"))?;
    let reports = mc
        .runs
        .par_iter()
        .map(|run| {
            Ok(CaseReports {
                run_id: run.run_id,
                cascade: CaseReport::from_chain(&run.cascade, context, params.pool)?,
                snowball: CaseReport::from_chain(&run.snowball, context, params.pool)?,
            })
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(&m)?;
    let rows: Vec<Row> = reports
        .iter()
        .zip(&mc.runs)
        .map(|(r, run)| Row {
            run_id: r.run_id,
            case_trait: run.cascade.case_trait,
            neutral_odds: r.cascade.neutral_odds,
            cascade_biased_odds: r.cascade.biased_odds,
            cascade_systemic_ratio: r.cascade.systemic_ratio,
            snowball_biased_odds: r.snowball.biased_odds,
            snowball_systemic_ratio: r.snowball.systemic_ratio,
        })
        .collect();
    Ok(vec![
        json("case_report.json", &reports[0])?,
        csv("results.csv", &rows)?,
    ])
}
