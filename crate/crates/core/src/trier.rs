//! The trier of fact's odds of guilt.
//!
//! Evidence streams are conditionally independent given guilt, so the
//! neutral posterior is `(1/N) · ∏_k LR_k · LR_I`. When each stream carries a
//! bias factor `β_j`, the biased posterior is the same product with every
//! `LR_j` replaced by `β_j · LR_j`, and the two differ by exactly `∏ β_j`.
//! The trier itself adds no bias.

use serde::{Deserialize, Serialize};

use crate::contextual::{BiasFactor, Provenance};
use crate::error::{Error, Result};
use crate::odds::{uniform_prior_odds, LikelihoodRatio, OddsRatio, SuspectPool};
use crate::propagation::ChainResult;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct EvidenceBundle<T = f64> {
    stream_lrs: Vec<LikelihoodRatio<T>>,
    context_lr: LikelihoodRatio<T>,
    pool: SuspectPool,
}

impl<T: Scalar> EvidenceBundle<T> {
    pub fn new(
        stream_lrs: Vec<LikelihoodRatio<T>>,
        context_lr: LikelihoodRatio<T>,
        pool: SuspectPool,
    ) -> Result<Self> {
        if stream_lrs.is_empty() {
            return Err(Error::EmptySequence {
                what: "evidence streams",
            });
        }
        Ok(Self {
            stream_lrs,
            context_lr,
            pool,
        })
    }

    pub fn stream_lrs(&self) -> &[LikelihoodRatio<T>] {
        &self.stream_lrs
    }

    pub fn context_lr(&self) -> LikelihoodRatio<T> {
        self.context_lr
    }

    pub fn pool(&self) -> SuspectPool {
        self.pool
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct StreamBias<T = f64> {
    betas: Vec<BiasFactor<T>>,
}

impl<T: Scalar> StreamBias<T> {
    pub fn new(betas: Vec<BiasFactor<T>>) -> Self {
        Self { betas }
    }

    pub fn unbiased(n: usize) -> Self {
        Self {
            betas: vec![BiasFactor::unbiased(Provenance::Composite); n],
        }
    }

    pub fn betas(&self) -> &[BiasFactor<T>] {
        &self.betas
    }

    /// `∏ β_j`.
    pub fn product(&self) -> Result<BiasFactor<T>> {
        BiasFactor::product(&self.betas, Provenance::Composite)
    }
}

/// `(1/N) · ∏ LR_k · LR_I`.
pub fn neutral_guilt_odds<T: Scalar>(bundle: &EvidenceBundle<T>) -> Result<OddsRatio<T>> {
    let streams = bundle
        .stream_lrs
        .iter()
        .fold(T::zero(), |acc, lr| acc + lr.log_value());
    OddsRatio::from_log(
        uniform_prior_odds::<T>(bundle.pool).log_value() + streams + bundle.context_lr.log_value(),
    )
}

/// Neutral odds with every stream LR multiplied by its `β_j`.
pub fn biased_guilt_odds<T: Scalar>(
    bundle: &EvidenceBundle<T>,
    bias: &StreamBias<T>,
) -> Result<OddsRatio<T>> {
    weighted_guilt_odds(bundle, bias, None)
}

/// Biased odds with each stream raised to an exponent before multiplying.
/// `None` means every exponent is 1, which is what [`biased_guilt_odds`]
/// uses.
pub fn weighted_guilt_odds<T: Scalar>(
    bundle: &EvidenceBundle<T>,
    bias: &StreamBias<T>,
    exponents: Option<&[T]>,
) -> Result<OddsRatio<T>> {
    let n = bundle.stream_lrs.len();
    if bias.betas.len() != n {
        return Err(Error::LengthMismatch {
            what: "stream biases",
            expected: n,
            found: bias.betas.len(),
        });
    }
    if let Some(w) = exponents {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                what: "stream exponents",
                expected: n,
                found: w.len(),
            });
        }
    }
    let streams = bundle
        .stream_lrs
        .iter()
        .zip(&bias.betas)
        .enumerate()
        .fold(T::zero(), |acc, (k, (lr, beta))| {
            let term = lr.log_value() + beta.log_value();
            acc + exponents.map_or(term, |w| w[k] * term)
        });
    OddsRatio::from_log(
        uniform_prior_odds::<T>(bundle.pool).log_value() + streams + bundle.context_lr.log_value(),
    )
}

/// `biased / neutral`.
pub fn systemic_bias_ratio<T: Scalar>(
    biased: OddsRatio<T>,
    neutral: OddsRatio<T>,
) -> Result<BiasFactor<T>> {
    BiasFactor::from_log(biased.log_value() - neutral.log_value(), Provenance::Composite)
}

/// Streams and biases taken from a chain of analysts: stream `i` is the
/// neutral LR of analyst `i` (the `1/N` prior divided out) and `β_i` the
/// total of that analyst's ledger.
pub fn from_chain(
    chain: &ChainResult,
    context_lr: LikelihoodRatio,
    pool: SuspectPool,
) -> Result<(EvidenceBundle, StreamBias)> {
    let prior = uniform_prior_odds::<f64>(pool).log_value();
    let streams = chain
        .reports
        .iter()
        .map(|r| LikelihoodRatio::from_log(r.neutral_odds.log_value() - prior))
        .collect::<Result<Vec<_>>>()?;
    let betas = chain
        .reports
        .iter()
        .map(|r| r.ledger.total())
        .collect::<Result<Vec<_>>>()?;
    Ok((EvidenceBundle::new(streams, context_lr, pool)?, StreamBias::new(betas)))
}

/// One stream's bias broken down by source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEntry {
    pub stream: usize,
    pub beta: f64,
    pub factors: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub pool: u64,
    pub stream_lrs: Vec<f64>,
    pub context_lr: f64,
    pub neutral_odds: f64,
    pub biased_odds: f64,
    pub systemic_ratio: f64,
    pub betas: Vec<BetaEntry>,
}

impl CaseReport {
    /// Report for a chain; `β` provenance comes from each analyst's ledger.
    pub fn from_chain(chain: &ChainResult, context_lr: LikelihoodRatio, pool: SuspectPool) -> Result<Self> {
        let (bundle, bias) = from_chain(chain, context_lr, pool)?;
        let neutral = neutral_guilt_odds(&bundle)?;
        let biased = biased_guilt_odds(&bundle, &bias)?;
        let betas = chain
            .reports
            .iter()
            .zip(bias.betas())
            .map(|(r, b)| BetaEntry {
                stream: r.index,
                beta: b.value(),
                factors: r
                    .ledger
                    .entries()
                    .iter()
                    .map(|f| (f.provenance().label().to_string(), f.value()))
                    .collect(),
            })
            .collect();
        Ok(Self {
            pool: pool.size(),
            stream_lrs: bundle.stream_lrs().iter().map(|l| l.value()).collect(),
            context_lr: context_lr.value(),
            neutral_odds: neutral.value(),
            biased_odds: biased.value(),
            systemic_ratio: systemic_bias_ratio(biased, neutral)?.value(),
            betas,
        })
    }
}
