//! Probability, odds and likelihood-ratio arithmetic.
//!
//! Odds and likelihood ratios are carried as natural logarithms so that long
//! products of inflated ratios stay representable. A Bayes update is a single
//! log-space addition: `ln(posterior) = ln(prior) + ln(LR)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A probability in the closed interval [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability<T = f64>(T);

impl<T: Scalar> Probability<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_nan() || value < T::zero() || value > T::one() {
            return Err(Error::ProbabilityOutOfRange {
                value: value.to_f64_lossy(),
            });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(T::one() - self.0)
    }

    /// `true` for values strictly inside (0, 1).
    pub fn is_interior(self) -> bool {
        self.0 > T::zero() && self.0 < T::one()
    }

    /// Odds `p / (1 - p)`. Certainty in either direction has no odds.
    pub fn to_odds(self) -> Result<OddsRatio<T>> {
        if !self.is_interior() {
            return Err(Error::HardlineProbability {
                value: self.0.to_f64_lossy(),
            });
        }
        OddsRatio::from_log(self.0.ln() - (-self.0).ln_1p())
    }
}

fn checked_log<T: Scalar>(what: &'static str, value: T) -> Result<T> {
    if !(value.is_finite() && value > T::zero()) {
        return Err(Error::NotPositiveFinite {
            what,
            value: value.to_f64_lossy(),
        });
    }
    let log = value.ln();
    if !log.is_finite() {
        return Err(Error::Overflow { what });
    }
    Ok(log)
}

fn finite_log<T: Scalar>(what: &'static str, log: T) -> Result<T> {
    if log.is_finite() {
        Ok(log)
    } else {
        Err(Error::Overflow { what })
    }
}

/// Odds `P(H) / P(H^c)`, stored as `ln(odds)`. Always strictly positive and
/// finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct OddsRatio<T = f64> {
    log_value: T,
}

impl<T: Scalar> OddsRatio<T> {
    pub fn new(odds: T) -> Result<Self> {
        Ok(Self {
            log_value: checked_log("odds", odds)?,
        })
    }

    pub fn from_log(log_value: T) -> Result<Self> {
        Ok(Self {
            log_value: finite_log("odds", log_value)?,
        })
    }

    /// Even odds.
    pub fn one() -> Self {
        Self {
            log_value: T::zero(),
        }
    }

    pub fn log_value(self) -> T {
        self.log_value
    }

    pub fn value(self) -> T {
        self.log_value.exp()
    }

    pub fn to_probability(self) -> Probability<T> {
        odds_to_probability(self)
    }

    /// Scales the odds by a likelihood ratio (see [`posterior_odds`]).
    pub fn update(self, lr: LikelihoodRatio<T>) -> Result<Self> {
        posterior_odds(self, lr)
    }

    /// The ratio `self / other` as a likelihood ratio.
    pub fn ratio_to(self, other: Self) -> Result<LikelihoodRatio<T>> {
        LikelihoodRatio::from_log(self.log_value - other.log_value)
    }
}

/// Likelihood ratio `P(data | H) / P(data | H^c)`, stored as `ln(LR)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LikelihoodRatio<T = f64> {
    log_value: T,
}

impl<T: Scalar> LikelihoodRatio<T> {
    pub fn new(lr: T) -> Result<Self> {
        Ok(Self {
            log_value: checked_log("likelihood ratio", lr)?,
        })
    }

    pub fn from_log(log_value: T) -> Result<Self> {
        Ok(Self {
            log_value: finite_log("likelihood ratio", log_value)?,
        })
    }

    /// Ratio of two likelihoods, each strictly positive.
    pub fn from_likelihoods(same: T, different: T) -> Result<Self> {
        let num = checked_log("likelihood", same)?;
        let den = checked_log("likelihood", different)?;
        Self::from_log(num - den)
    }

    pub fn one() -> Self {
        Self {
            log_value: T::zero(),
        }
    }

    pub fn log_value(self) -> T {
        self.log_value
    }

    pub fn value(self) -> T {
        self.log_value.exp()
    }
}

/// The set of equally likely candidate sources for the questioned sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct SuspectPool(u64);

impl SuspectPool {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPool);
        }
        Ok(Self(n))
    }

    pub fn size(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for SuspectPool {
    type Error = Error;

    fn try_from(n: u64) -> Result<Self> {
        Self::new(n)
    }
}

impl From<SuspectPool> for u64 {
    fn from(pool: SuspectPool) -> u64 {
        pool.0
    }
}

/// Odds form of Bayes' rule: posterior odds = prior odds × LR.
pub fn posterior_odds<T: Scalar>(
    prior: OddsRatio<T>,
    lr: LikelihoodRatio<T>,
) -> Result<OddsRatio<T>> {
    OddsRatio::from_log(prior.log_value + lr.log_value)
}

/// Indifference prior `1/n` over a pool of `n` suspects.
///
/// The suspect under examination is weighed
/// against `n` alternatives. The other convention (`1/(n-1)` for a pool of
/// `n` including the suspect) is `uniform_prior_odds(n - 1)`.
pub fn uniform_prior_odds<T: Scalar>(pool: SuspectPool) -> OddsRatio<T> {
    let n = T::from_u64(pool.size()).expect("pool size representable");
    OddsRatio {
        log_value: -n.ln(),
    }
}

pub fn odds_to_probability<T: Scalar>(odds: OddsRatio<T>) -> Probability<T> {
    // o/(1+o) = 1/(1+exp(-log o)), evaluated without overflow on either side.
    let l = odds.log_value;
    let p = if l >= T::zero() {
        T::one() / (T::one() + (-l).exp())
    } else {
        let e = l.exp();
        e / (T::one() + e)
    };
    Probability(p)
}

pub fn probability_to_odds<T: Scalar>(p: Probability<T>) -> Result<OddsRatio<T>> {
    p.to_odds()
}

/// Product of likelihood-ratio factors (e.g. the Part I.1 × Part I.2 ×
/// Part II factorization of an analyst's LR).
pub fn compose_lr<T: Scalar>(parts: &[LikelihoodRatio<T>]) -> Result<LikelihoodRatio<T>> {
    if parts.is_empty() {
        return Err(Error::EmptySequence { what: "compose_lr" });
    }
    let sum = parts
        .iter()
        .fold(T::zero(), |acc, lr| acc + lr.log_value);
    LikelihoodRatio::from_log(sum)
}
