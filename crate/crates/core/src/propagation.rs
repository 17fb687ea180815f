//! Bias propagation along a chain of analysts.
//!
//! Each analyst examines one independent piece of evidence. The neutral
//! posterior odds of analyst `i` are `M_i = (1/N) · LR_i`. Task-irrelevant
//! context and imputation turn them into `M̃_i = δ_Impute · δ_I · δ_Peer · M_i`
//! (cascade: the same context reaches every analyst, who do not talk to each
//! other). In snowball mode analyst `i` also sees what analysts `1..i` reported
//! and over-weights it, giving `M̂_i = δ̃_Impute · δ̃_I · δ̃_Peer · M̃_i`, where
//! the tilde factors are functions of the reported history.
//!
//! Every factor is recorded in the report's [`BiasLedger`], so the reported
//! odds can always be taken apart again.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contextual::{race_example_delta, BiasFactor, BiasLedger, Provenance};
use crate::error::{Error, Result};
use crate::odds::{posterior_odds, uniform_prior_odds, LikelihoodRatio, OddsRatio, Probability, SuspectPool};
use crate::rng::{substream, SimRng};
use crate::stats;

/// Chance that one piece of evidence is declared a match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceModel {
    p_match_same: f64,
    p_match_diff: f64,
}

impl Default for EvidenceModel {
    fn default() -> Self {
        Self {
            p_match_same: 0.5,
            p_match_diff: 0.25,
        }
    }
}

impl EvidenceModel {
    pub fn new(p_match_same: f64, p_match_diff: f64) -> Result<Self> {
        if !(p_match_diff > 0.0 && p_match_same > p_match_diff && p_match_same < 1.0) {
            return Err(Error::Domain {
                what: "evidence model (requires 0 < p_match_diff < p_match_same < 1)",
                value: p_match_same,
                bound: "(p_match_diff, 1)",
            });
        }
        Ok(Self {
            p_match_same,
            p_match_diff,
        })
    }

    pub fn p_match_same(&self) -> f64 {
        self.p_match_same
    }

    pub fn p_match_diff(&self) -> f64 {
        self.p_match_diff
    }

    pub fn p_match(&self, same_source: bool) -> f64 {
        if same_source {
            self.p_match_same
        } else {
            self.p_match_diff
        }
    }

    /// Neutral likelihood ratio of the observed outcome.
    pub fn likelihood_ratio(&self, matched: bool) -> Result<LikelihoodRatio> {
        if matched {
            LikelihoodRatio::from_likelihoods(self.p_match_same, self.p_match_diff)
        } else {
            LikelihoodRatio::from_likelihoods(1.0 - self.p_match_same, 1.0 - self.p_match_diff)
        }
    }
}

/// The bias terms acting on each analyst.
///
/// `history` holds one peer signal per predecessor, in order (see
/// [`PeerSignal`]).
pub trait BiasProfile: Sync {
    fn delta_impute(&self, missing_share: f64, trait_present: bool) -> Result<BiasFactor>;
    fn delta_context(&self, trait_present: bool) -> Result<BiasFactor>;
    fn delta_peer(&self) -> Result<BiasFactor>;
    fn tilde_impute(&self, history: &[OddsRatio]) -> Result<BiasFactor>;
    fn tilde_context(&self, history: &[OddsRatio]) -> Result<BiasFactor>;
    fn tilde_peer(&self, history: &[OddsRatio]) -> Result<BiasFactor>;
}

/// `δ̃_Peer = 1 + #{predecessors whose reported signal is ≥ 1}`.
pub fn tilde_peer(history: &[OddsRatio]) -> BiasFactor {
    let favouring = history.iter().filter(|o| o.log_value() >= 0.0).count();
    BiasFactor::new(1.0 + favouring as f64, Provenance::TildePeer).expect("count is positive")
}

/// Which predecessors the peer indicator inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeerIndicator {
    /// `1 + Σ_j 1{M̂_j ≥ 1}` over every predecessor.
    #[default]
    EachPredecessor,
    /// `1 + Σ_j 1{M̂_1 ≥ 1}`: the first analyst's signal counted once per
    /// predecessor, read literally.
    FirstAnalystOnly,
}

/// The bias terms of the five-analyst simulation:
///
/// ```text
/// δ_Impute = share_missing + 0.5·I + 1     δ̃_Impute = 1
/// δ_I      = 2 − (1 − I)/(1 − P(I=1))      δ̃_I      = 1
/// δ_Peer   = 1                              δ̃_Peer   = Σ 1{M̂ ≥ 1} + 1
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainProfile {
    pub trait_prob: f64,
    pub indicator: PeerIndicator,
}

impl ChainProfile {
    pub fn new(trait_prob: f64) -> Self {
        Self {
            trait_prob,
            indicator: PeerIndicator::EachPredecessor,
        }
    }
}

impl BiasProfile for ChainProfile {
    fn delta_impute(&self, missing_share: f64, trait_present: bool) -> Result<BiasFactor> {
        let i = if trait_present { 1.0 } else { 0.0 };
        BiasFactor::new(missing_share + 0.5 * i + 1.0, Provenance::Impute)
    }

    fn delta_context(&self, trait_present: bool) -> Result<BiasFactor> {
        race_example_delta(Probability::new(self.trait_prob)?, trait_present)
    }

    fn delta_peer(&self) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::Peer))
    }

    fn tilde_impute(&self, _history: &[OddsRatio]) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::TildeImpute))
    }

    fn tilde_context(&self, _history: &[OddsRatio]) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::TildeContextual))
    }

    fn tilde_peer(&self, history: &[OddsRatio]) -> Result<BiasFactor> {
        match self.indicator {
            PeerIndicator::EachPredecessor => Ok(tilde_peer(history)),
            PeerIndicator::FirstAnalystOnly => {
                let first = history.first().is_some_and(|o| o.log_value() >= 0.0);
                let n = if first { history.len() } else { 0 };
                BiasFactor::new(1.0 + n as f64, Provenance::TildePeer)
            }
        }
    }
}

/// Every term equal to 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UnbiasedProfile;

impl BiasProfile for UnbiasedProfile {
    fn delta_impute(&self, _: f64, _: bool) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::Impute))
    }
    fn delta_context(&self, _: bool) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::Contextual))
    }
    fn delta_peer(&self) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::Peer))
    }
    fn tilde_impute(&self, _: &[OddsRatio]) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::TildeImpute))
    }
    fn tilde_context(&self, _: &[OddsRatio]) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::TildeContextual))
    }
    fn tilde_peer(&self, _: &[OddsRatio]) -> Result<BiasFactor> {
        Ok(BiasFactor::unbiased(Provenance::TildePeer))
    }
}

/// Cascade factor: imputation times contextual bias on one analyst.
pub fn cascade_delta(delta_impute: BiasFactor, delta_context: BiasFactor) -> Result<BiasFactor> {
    BiasFactor::from_log(
        delta_impute.log_value() + delta_context.log_value(),
        Provenance::Cascade,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainMode {
    Cascade,
    Snowball,
}

impl ChainMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::Cascade => "cascade",
            Self::Snowball => "snowball",
        }
    }
}

/// What a later analyst reads off a predecessor's report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeerSignal {
    /// The reported odds with the `1/N` prior divided out, i.e. the
    /// likelihood ratio the predecessor effectively passed on.
    #[default]
    LikelihoodRatio,
    /// The reported posterior odds themselves.
    PosteriorOdds,
}

/// Share of each piece of evidence that is unreadable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingShare {
    Uniform { low: f64, high: f64 },
    Constant(f64),
}

impl Default for MissingShare {
    fn default() -> Self {
        Self::Uniform {
            low: 0.0,
            high: 0.5,
        }
    }
}

impl MissingShare {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { low, high } => (0.0..=1.0).contains(&low) && (low..=1.0).contains(&high),
            Self::Constant(s) => (0.0..=1.0).contains(&s),
        };
        if !ok {
            return Err(Error::Domain {
                what: "missing share",
                value: match *self {
                    Self::Uniform { low, .. } => low,
                    Self::Constant(s) => s,
                },
                bound: "[0, 1] with low <= high",
            });
        }
        Ok(())
    }

    /// Maps one uniform draw in [0, 1) to a share.
    fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform { low, high } => low + (high - low) * u,
            Self::Constant(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Number of analysts (pieces of evidence).
    pub k: usize,
    pub pool: SuspectPool,
    /// `P(I=1)`, drawn once per case and shared by every analyst.
    pub trait_prob: f64,
    pub model: EvidenceModel,
    pub missing: MissingShare,
    pub same_source_truth: bool,
    pub peer_signal: PeerSignal,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            k: 5,
            pool: SuspectPool::new(10).expect("non-empty"),
            trait_prob: 0.15,
            model: EvidenceModel::default(),
            missing: MissingShare::default(),
            same_source_truth: true,
            peer_signal: PeerSignal::default(),
        }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain {
                what: "k",
                value: 0.0,
                bound: ">= 1",
            });
        }
        Probability::new(self.trait_prob)?;
        self.missing.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalystReport {
    /// 1-based position in the chain.
    pub index: usize,
    pub matched: bool,
    pub missing_share: f64,
    /// `M_i`: what an unbiased analyst would report.
    pub neutral_odds: OddsRatio,
    /// `M̃_i`: biased by true but task-irrelevant information only.
    pub intermediate_odds: OddsRatio,
    /// `M̂_i`: what the analyst actually reports.
    pub reported_odds: OddsRatio,
    pub ledger: BiasLedger,
}

impl AnalystReport {
    /// `M̂_i / M_i`.
    pub fn bias_ratio(&self) -> f64 {
        self.ledger.log_total().exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub mode: ChainMode,
    pub case_trait: bool,
    pub same_source_truth: bool,
    pub reports: Vec<AnalystReport>,
}

impl ChainResult {
    /// Running product of the per-analyst bias ratios: entry `i` is the
    /// systemic factor carried by the first `i + 1` reports.
    pub fn cumulative_bias(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.reports
            .iter()
            .map(|r| {
                acc += r.ledger.log_total();
                acc.exp()
            })
            .collect()
    }

    /// Same draws and same odds for every analyst, bit for bit; ledgers may
    /// differ by unit entries.
    pub fn same_outcome(&self, other: &ChainResult) -> bool {
        self.case_trait == other.case_trait
            && self.reports.len() == other.reports.len()
            && self.reports.iter().zip(&other.reports).all(|(a, b)| {
                a.matched == b.matched
                    && a.missing_share.to_bits() == b.missing_share.to_bits()
                    && a.neutral_odds.log_value().to_bits() == b.neutral_odds.log_value().to_bits()
                    && a.intermediate_odds.log_value().to_bits()
                        == b.intermediate_odds.log_value().to_bits()
                    && a.reported_odds.log_value().to_bits() == b.reported_odds.log_value().to_bits()
            })
    }
}

/// Simulates one case examined by `params.k` analysts.
///
/// Random draws, in order: the case trait, then per analyst the match
/// outcome and the missing share. Both modes consume the same draws, so a
/// cascade and a snowball run from the same generator state are paired.
pub fn run_chain<P: BiasProfile + ?Sized, R: Rng + ?Sized>(
    mode: ChainMode,
    params: &ChainParams,
    profile: &P,
    rng: &mut R,
) -> Result<ChainResult> {
    params.validate()?;
    let prior = uniform_prior_odds::<f64>(params.pool);
    let case_trait = rng.random::<f64>() < params.trait_prob;
    let p_match = params.model.p_match(params.same_source_truth);

    let mut history: Vec<OddsRatio> = Vec::with_capacity(params.k);
    let mut reports = Vec::with_capacity(params.k);
    for index in 1..=params.k {
        let matched = rng.random::<f64>() < p_match;
        let missing_share = params.missing.from_uniform(rng.random::<f64>());
        let neutral = posterior_odds(prior, params.model.likelihood_ratio(matched)?)?;

        let mut ledger = BiasLedger::new();
        ledger.push(profile.delta_impute(missing_share, case_trait)?);
        ledger.push(profile.delta_context(case_trait)?);
        ledger.push(profile.delta_peer()?);
        let intermediate = OddsRatio::from_log(neutral.log_value() + ledger.log_total())?;
        if mode == ChainMode::Snowball {
            ledger.push(profile.tilde_impute(&history)?);
            ledger.push(profile.tilde_context(&history)?);
            ledger.push(profile.tilde_peer(&history)?);
        }
        let reported = OddsRatio::from_log(neutral.log_value() + ledger.log_total())?;

        history.push(match params.peer_signal {
            PeerSignal::PosteriorOdds => reported,
            PeerSignal::LikelihoodRatio => {
                OddsRatio::from_log(reported.log_value() - prior.log_value())?
            }
        });
        reports.push(AnalystReport {
            index,
            matched,
            missing_share,
            neutral_odds: neutral,
            intermediate_odds: intermediate,
            reported_odds: reported,
            ledger,
        });
    }
    Ok(ChainResult {
        mode,
        case_trait,
        same_source_truth: params.same_source_truth,
        reports,
    })
}

pub const PROPAGATION_DOMAIN: &str = "propagation";

/// Cascade and snowball chains of one run, drawn from the same substream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRun {
    pub run_id: usize,
    pub cascade: ChainResult,
    pub snowball: ChainResult,
}

impl PairedRun {
    pub fn chain(&self, mode: ChainMode) -> &ChainResult {
        match mode {
            ChainMode::Cascade => &self.cascade,
            ChainMode::Snowball => &self.snowball,
        }
    }
}

pub fn run_paired<P: BiasProfile + ?Sized>(
    params: &ChainParams,
    profile: &P,
    seed: u64,
    run_id: usize,
) -> Result<PairedRun> {
    let rng = || -> SimRng { substream(seed, PROPAGATION_DOMAIN, run_id as u64) };
    Ok(PairedRun {
        run_id,
        cascade: run_chain(ChainMode::Cascade, params, profile, &mut rng())?,
        snowball: run_chain(ChainMode::Snowball, params, profile, &mut rng())?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub analyst_index: usize,
    pub mean: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: ChainMode,
    /// Cumulative bias statistics by analyst index.
    pub per_index: Vec<IndexStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_runs: usize,
    pub k: usize,
    pub cascade: ModeSummary,
    pub snowball: ModeSummary,
    pub runs: Vec<PairedRun>,
}

impl MonteCarloSummary {
    pub fn mode(&self, mode: ChainMode) -> &ModeSummary {
        match mode {
            ChainMode::Cascade => &self.cascade,
            ChainMode::Snowball => &self.snowball,
        }
    }

    pub fn mean_cumulative_bias(&self, mode: ChainMode) -> Vec<f64> {
        self.mode(mode).per_index.iter().map(|s| s.mean).collect()
    }
}

fn summarize(runs: &[PairedRun], mode: ChainMode, k: usize) -> ModeSummary {
    let cumulative: Vec<Vec<f64>> = runs.iter().map(|r| r.chain(mode).cumulative_bias()).collect();
    let per_index = (0..k)
        .map(|i| {
            let column: Vec<f64> = cumulative.iter().map(|c| c[i]).collect();
            IndexStats {
                analyst_index: i + 1,
                mean: stats::mean(&column),
                q025: stats::quantile(&column, 0.025),
                q50: stats::quantile(&column, 0.5),
                q975: stats::quantile(&column, 0.975),
            }
        })
        .collect();
    ModeSummary { mode, per_index }
}

/// Paired cascade/snowball Monte Carlo over `n_runs` cases.
pub fn monte_carlo_chains<P: BiasProfile + ?Sized>(
    n_runs: usize,
    params: &ChainParams,
    profile: &P,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if n_runs == 0 {
        return Err(Error::Domain {
            what: "n_runs",
            value: 0.0,
            bound: ">= 1",
        });
    }
    params.validate()?;
    let runs = (0..n_runs)
        .into_par_iter()
        .map(|r| run_paired(params, profile, seed, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloSummary {
        n_runs,
        k: params.k,
        cascade: summarize(&runs, ChainMode::Cascade, params.k),
        snowball: summarize(&runs, ChainMode::Snowball, params.k),
        runs,
    })
}
