//! Contextual bias: the multiplicative factor an analyst's misbeliefs about
//! trait prevalence introduce into the likelihood ratio.
//!
//! With true prevalences `α = P(I=1|E0)`, `β = P(I=1|E0^c)` and believed
//! prevalences `α*`, `β*`, the analyst's Part II ratio is the true one times
//!
//! ```text
//! δ_I = (α*/β*)·(β/α)                     if I = 1
//! δ_I = ((1-α*)/(1-β*))·((1-β)/(1-α))     if I = 0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odds::{LikelihoodRatio, Probability};
use crate::scalar::Scalar;

/// Where a bias factor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Contextual,
    Impute,
    Peer,
    Cascade,
    /// Imputation bias induced by a predecessor's reported conclusion.
    TildeImpute,
    /// Contextual bias induced by a predecessor's reported conclusion.
    TildeContextual,
    /// Over-weighting of predecessors' reported conclusions.
    TildePeer,
    Composite,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Self::Contextual => "contextual",
            Self::Impute => "impute",
            Self::Peer => "peer",
            Self::Cascade => "cascade",
            Self::TildeImpute => "tilde_impute",
            Self::TildeContextual => "tilde_contextual",
            Self::TildePeer => "tilde_peer",
            Self::Composite => "composite",
        }
    }
}

/// A positive multiplicative distortion, stored as its natural log.
/// A factor of exactly 1 means no bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasFactor<T = f64> {
    log_value: T,
    provenance: Provenance,
}

impl<T: Scalar> BiasFactor<T> {
    pub fn new(value: T, provenance: Provenance) -> Result<Self> {
        if !(value.is_finite() && value > T::zero()) {
            return Err(Error::NotPositiveFinite {
                what: "bias factor",
                value: value.to_f64_lossy(),
            });
        }
        Self::from_log(value.ln(), provenance)
    }

    pub fn from_log(log_value: T, provenance: Provenance) -> Result<Self> {
        if !log_value.is_finite() {
            return Err(Error::Overflow {
                what: "bias factor",
            });
        }
        Ok(Self {
            log_value,
            provenance,
        })
    }

    pub fn unbiased(provenance: Provenance) -> Self {
        Self {
            log_value: T::zero(),
            provenance,
        }
    }

    pub fn log_value(self) -> T {
        self.log_value
    }

    pub fn value(self) -> T {
        self.log_value.exp()
    }

    pub fn provenance(self) -> Provenance {
        self.provenance
    }

    pub fn is_unbiased(self) -> bool {
        self.log_value == T::zero()
    }

    pub fn with_provenance(self, provenance: Provenance) -> Self {
        Self {
            log_value: self.log_value,
            provenance,
        }
    }

    /// Product of two factors, labelled `Composite`.
    pub fn compose(self, other: Self) -> Result<Self> {
        Self::from_log(self.log_value + other.log_value, Provenance::Composite)
    }

    /// Product of many factors with the given label; the empty product is 1.
    pub fn product(factors: &[Self], provenance: Provenance) -> Result<Self> {
        let sum = factors.iter().fold(T::zero(), |acc, f| acc + f.log_value);
        Self::from_log(sum, provenance)
    }
}

/// Ordered record of the factors separating a neutral quantity from a
/// reported one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasLedger<T = f64> {
    entries: Vec<BiasFactor<T>>,
}

impl<T: Scalar> Default for BiasLedger<T> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
        }
    }
}

impl<T: Scalar> BiasLedger<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, factor: BiasFactor<T>) {
        self.entries.push(factor);
    }

    pub fn entries(&self) -> &[BiasFactor<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the log factors, accumulated in entry order.
    pub fn log_total(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, f| acc + f.log_value)
    }

    pub fn total(&self) -> Result<BiasFactor<T>> {
        BiasFactor::from_log(self.log_total(), Provenance::Composite)
    }

    /// Product of the entries carrying `provenance`.
    pub fn total_for(&self, provenance: Provenance) -> Result<BiasFactor<T>> {
        let sum = self
            .entries
            .iter()
            .filter(|f| f.provenance == provenance)
            .fold(T::zero(), |acc, f| acc + f.log_value);
        BiasFactor::from_log(sum, provenance)
    }

    /// The ledger with the entry at `index` removed: the counterfactual where
    /// that single source of bias had been absent.
    pub fn without(&self, index: usize) -> Self {
        let mut entries = self.entries.clone();
        if index < entries.len() {
            entries.remove(index);
        }
        Self { entries }
    }
}

/// True prevalence of a trait among true sources (`alpha`) and among
/// non-sources (`beta`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitPrevalence<T = f64> {
    alpha: Probability<T>,
    beta: Probability<T>,
}

/// The analyst's beliefs about the same two prevalences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalystBelief<T = f64> {
    alpha_star: Probability<T>,
    beta_star: Probability<T>,
}

fn interior<T: Scalar>(what: &'static str, value: T) -> Result<Probability<T>> {
    let p = Probability::new(value)?;
    if !p.is_interior() {
        return Err(Error::Domain {
            what,
            value: value.to_f64_lossy(),
            bound: "(0, 1)",
        });
    }
    Ok(p)
}

impl<T: Scalar> TraitPrevalence<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        Ok(Self {
            alpha: interior("alpha", alpha)?,
            beta: interior("beta", beta)?,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha.value()
    }

    pub fn beta(&self) -> T {
        self.beta.value()
    }

    /// Part II of the true likelihood ratio, `P(I|E0) / P(I|E0^c)`.
    pub fn part_two(&self, trait_present: bool) -> Result<LikelihoodRatio<T>> {
        if trait_present {
            LikelihoodRatio::from_likelihoods(self.alpha(), self.beta())
        } else {
            LikelihoodRatio::from_likelihoods(
                T::one() - self.alpha(),
                T::one() - self.beta(),
            )
        }
    }
}

impl<T: Scalar> AnalystBelief<T> {
    pub fn new(alpha_star: T, beta_star: T) -> Result<Self> {
        Ok(Self {
            alpha_star: interior("alpha_star", alpha_star)?,
            beta_star: interior("beta_star", beta_star)?,
        })
    }

    pub fn alpha_star(&self) -> T {
        self.alpha_star.value()
    }

    pub fn beta_star(&self) -> T {
        self.beta_star.value()
    }

    /// A belief that matches the truth exactly.
    pub fn accurate(truth: &TraitPrevalence<T>) -> Self {
        Self {
            alpha_star: truth.alpha,
            beta_star: truth.beta,
        }
    }
}

/// Contextual bias factor `δ_I` for the observed trait indicator.
pub fn delta_contextual<T: Scalar>(
    truth: &TraitPrevalence<T>,
    belief: &AnalystBelief<T>,
    trait_present: bool,
) -> Result<BiasFactor<T>> {
    let (a, b) = (truth.alpha(), truth.beta());
    let (a_s, b_s) = (belief.alpha_star(), belief.beta_star());
    let log = if trait_present {
        a_s.ln() - b_s.ln() + b.ln() - a.ln()
    } else {
        (-a_s).ln_1p() - (-b_s).ln_1p() + (-b).ln_1p() - (-a).ln_1p()
    };
    BiasFactor::from_log(log, Provenance::Contextual)
}

/// Closed form of `δ_I` for the race example: true `α = β = p`, believed
/// `α* = 2p`, `β* = p`. Gives 2 when the trait is present and
/// `2 - 1/(1-p)` otherwise.
pub fn race_example_delta<T: Scalar>(
    p_trait: Probability<T>,
    trait_present: bool,
) -> Result<BiasFactor<T>> {
    let p = p_trait.value();
    let half = T::lit(0.5);
    if !(p > T::zero() && p < half) {
        return Err(Error::Domain {
            what: "race example P(I=1) (requires P(I=1) < 1/2 so that 2P(I=1) is a probability)",
            value: p.to_f64_lossy(),
            bound: "(0, 0.5)",
        });
    }
    let two = T::lit(2.0);
    let value = if trait_present {
        two
    } else {
        two - T::one() / (T::one() - p)
    };
    BiasFactor::new(value, Provenance::Contextual)
}

/// Biased likelihood ratio: `δ × LR`.
pub fn apply_bias<T: Scalar>(
    lr: LikelihoodRatio<T>,
    delta: BiasFactor<T>,
) -> Result<LikelihoodRatio<T>> {
    LikelihoodRatio::from_log(lr.log_value() + delta.log_value())
}

/// How a group's individual bias factors are summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Mean of the linear-scale factors.
    #[default]
    Arithmetic,
    /// Mean of the log factors, exponentiated.
    Geometric,
}

/// Arithmetic mean of linear-scale factors, as used for a group of examiners.
pub fn average_bias<T: Scalar>(deltas: &[BiasFactor<T>]) -> Result<BiasFactor<T>> {
    average_bias_with(deltas, Averaging::Arithmetic)
}

pub fn average_bias_with<T: Scalar>(
    deltas: &[BiasFactor<T>],
    averaging: Averaging,
) -> Result<BiasFactor<T>> {
    if deltas.is_empty() {
        return Err(Error::EmptySequence {
            what: "average_bias",
        });
    }
    let n = T::from_usize(deltas.len()).expect("count representable");
    match averaging {
        Averaging::Arithmetic => {
            let sum = deltas.iter().fold(T::zero(), |acc, d| acc + d.value());
            BiasFactor::new(sum / n, Provenance::Composite)
        }
        Averaging::Geometric => {
            let sum = deltas.iter().fold(T::zero(), |acc, d| acc + d.log_value());
            BiasFactor::from_log(sum / n, Provenance::Composite)
        }
    }
}

/// Plausible per-examiner factors for the five-examiner re-review
/// experiment: three switched to exclusion (2), one to "can't decide" (1.5),
/// one did not change (1).
pub const MAYFIELD_DELTAS: [f64; 5] = [2.0, 2.0, 2.0, 1.5, 1.0];

pub fn mayfield_deltas<T: Scalar>() -> Vec<BiasFactor<T>> {
    MAYFIELD_DELTAS
        .iter()
        .map(|&d| BiasFactor::new(T::lit(d), Provenance::Contextual).expect("positive fixture"))
        .collect()
}
