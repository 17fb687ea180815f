//! Long-run drift of an analyst's belief about trait prevalence among true
//! sources, when each conviction is taken as ground truth.
//!
//! The analyst holds a Beta prior on `α` and updates it after every
//! conviction with whether the convicted person carries the trait. Under
//! truthful feedback every conviction is of a true source. Under biased
//! feedback a share of convictions are wrongful, and wrongful convictions
//! over-represent trait carriers.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odds::Probability;
use crate::rng::{substream, SimRng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior<T = f64> {
    a: T,
    b: T,
}

impl<T: Scalar> BetaPrior<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        for (what, v) in [("beta prior a", a), ("beta prior b", b)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::NotPositiveFinite {
                    what,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn mean(&self) -> T {
        self.a / (self.a + self.b)
    }
}

impl Default for BetaPrior<f64> {
    /// A strong prior with mean 0.6 worth 20 pseudo-observations.
    fn default() -> Self {
        Self { a: 12.0, b: 8.0 }
    }
}

/// Beta–Bernoulli update on one observed conviction.
pub fn conjugate_update<T: Scalar>(prior: BetaPrior<T>, trait_observed: bool) -> BetaPrior<T> {
    if trait_observed {
        BetaPrior {
            a: prior.a + T::one(),
            b: prior.b,
        }
    } else {
        BetaPrior {
            a: prior.a,
            b: prior.b + T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Truthful,
    Biased,
}

impl RegimeKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Truthful => "truthful",
            Self::Biased => "biased",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRegime {
    kind: RegimeKind,
    wrongful_rate: f64,
    trait_skew: f64,
}

impl FeedbackRegime {
    pub fn truthful() -> Self {
        Self {
            kind: RegimeKind::Truthful,
            wrongful_rate: 0.0,
            trait_skew: 1.0,
        }
    }

    /// `wrongful_rate` in [0, 1), `trait_skew` ≥ 1: a wrongful conviction
    /// carries the trait with probability `min(1, trait_skew · α)`.
    pub fn biased(wrongful_rate: f64, trait_skew: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&wrongful_rate) {
            return Err(Error::Domain {
                what: "wrongful_rate",
                value: wrongful_rate,
                bound: "[0, 1)",
            });
        }
        if !(trait_skew.is_finite() && trait_skew >= 1.0) {
            return Err(Error::Domain {
                what: "trait_skew",
                value: trait_skew,
                bound: ">= 1",
            });
        }
        Ok(Self {
            kind: RegimeKind::Biased,
            wrongful_rate,
            trait_skew,
        })
    }

    pub fn kind(&self) -> RegimeKind {
        self.kind
    }

    pub fn wrongful_rate(&self) -> f64 {
        self.wrongful_rate
    }

    pub fn trait_skew(&self) -> f64 {
        self.trait_skew
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Posterior mean of `α` after each observation.
    pub posterior_means: Vec<f64>,
    pub final_prior: BetaPrior,
    /// Set when `trait_skew · α` exceeded 1 and was clamped.
    pub skew_clamped: bool,
}

impl Trajectory {
    pub fn final_mean(&self) -> f64 {
        self.final_prior.mean()
    }
}

/// Runs `n_obs` convictions through the analyst's updating.
///
/// Every step consumes two uniforms, the wrongful-conviction check and the
/// trait draw, whatever the regime. A biased regime with zero wrongful rate
/// therefore reproduces the truthful trajectory exactly, and the two regimes
/// run from one seed are coupled step by step.
pub fn simulate_feedback<R: Rng + ?Sized>(
    regime: &FeedbackRegime,
    alpha_true: Probability,
    n_obs: usize,
    prior: BetaPrior,
    rng: &mut R,
) -> Result<Trajectory> {
    if n_obs == 0 {
        return Err(Error::Domain {
            what: "n_obs",
            value: 0.0,
            bound: ">= 1",
        });
    }
    let alpha = alpha_true.value();
    let skewed = regime.trait_skew * alpha;
    let skew_clamped = regime.kind == RegimeKind::Biased && skewed > 1.0;
    let wrongful_trait_p = skewed.min(1.0);

    let mut post = prior;
    let mut posterior_means = Vec::with_capacity(n_obs);
    for _ in 0..n_obs {
        let wrongful_u: f64 = rng.random();
        let trait_u: f64 = rng.random();
        let wrongful = regime.kind == RegimeKind::Biased && wrongful_u < regime.wrongful_rate;
        let p = if wrongful { wrongful_trait_p } else { alpha };
        post = conjugate_update(post, trait_u < p);
        posterior_means.push(post.mean());
    }
    Ok(Trajectory {
        posterior_means,
        final_prior: post,
        skew_clamped,
    })
}

/// `|final posterior mean − α|`.
pub fn convergence_gap(traj: &Trajectory, alpha_true: Probability) -> f64 {
    (traj.final_mean() - alpha_true.value()).abs()
}

/// Parameters for a paired truthful-vs-biased comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackExperiment {
    pub prior: BetaPrior,
    pub alpha_true: f64,
    pub n_obs: usize,
    pub wrongful_rate: f64,
    pub trait_skew: f64,
}

impl Default for FeedbackExperiment {
    fn default() -> Self {
        Self {
            prior: BetaPrior::default(),
            alpha_true: 0.5,
            n_obs: 100,
            wrongful_rate: 0.06,
            trait_skew: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedGaps {
    pub n_seeds: usize,
    pub n_obs: usize,
    pub mean_gap_truthful: f64,
    pub mean_gap_biased: f64,
    /// Share of seeds where the biased gap strictly exceeds the truthful one.
    pub share_biased_larger: f64,
}

pub const FEEDBACK_DOMAIN: &str = "feedback";

/// Both trajectories for replicate `index` of `seed`.
pub fn paired_trajectories(
    exp: &FeedbackExperiment,
    seed: u64,
    index: u64,
) -> Result<(Trajectory, Trajectory)> {
    let alpha = Probability::new(exp.alpha_true)?;
    let biased = FeedbackRegime::biased(exp.wrongful_rate, exp.trait_skew)?;
    let rng = || -> SimRng { substream(seed, FEEDBACK_DOMAIN, index) };
    let t = simulate_feedback(&FeedbackRegime::truthful(), alpha, exp.n_obs, exp.prior, &mut rng())?;
    let b = simulate_feedback(&biased, alpha, exp.n_obs, exp.prior, &mut rng())?;
    Ok((t, b))
}

/// Runs `n_seeds` coupled replicate pairs and summarizes their gaps.
pub fn paired_gaps(exp: &FeedbackExperiment, n_seeds: usize, seed: u64) -> Result<PairedGaps> {
    if n_seeds == 0 {
        return Err(Error::Domain {
            what: "n_seeds",
            value: 0.0,
            bound: ">= 1",
        });
    }
    let alpha = Probability::new(exp.alpha_true)?;
    let gaps = (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let (t, b) = paired_trajectories(exp, seed, i)?;
            Ok((convergence_gap(&t, alpha), convergence_gap(&b, alpha)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let n = n_seeds as f64;
    Ok(PairedGaps {
        n_seeds,
        n_obs: exp.n_obs,
        mean_gap_truthful: gaps.iter().map(|g| g.0).sum::<f64>() / n,
        mean_gap_biased: gaps.iter().map(|g| g.1).sum::<f64>() / n,
        share_biased_larger: gaps.iter().filter(|g| g.1 > g.0).count() as f64 / n,
    })
}
