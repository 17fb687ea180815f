//! Imputation bias under a per-cell agreement model.
//!
//! Each cell of the latent agrees with the exemplar with probability
//! `p_same` when both come from the suspect (E0) and `p_diff` otherwise.
//! The unbiased Part I.1 ratio is evaluated on the true latent `y`; the
//! analyst's ratio on the imputed `y*`. Their quotient is `δ_Impute`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{
    exact_mask_count, generate_print, impute_from_reference, mask_missing, LatentVector,
    MaskMode, MinutiaVector, PrintGrid,
};
use crate::contextual::{BiasFactor, Provenance};
use crate::error::{Error, Result};
use crate::odds::LikelihoodRatio;
use crate::rng::{substream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellAgreementModel {
    p_same: f64,
    p_diff: f64,
}

impl Default for CellAgreementModel {
    fn default() -> Self {
        Self {
            p_same: 0.5,
            p_diff: 0.25,
        }
    }
}

impl CellAgreementModel {
    pub fn new(p_same: f64, p_diff: f64) -> Result<Self> {
        for (what, p) in [("p_same", p_same), ("p_diff", p_diff)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain {
                    what,
                    value: p,
                    bound: "(0, 1)",
                });
            }
        }
        Ok(Self { p_same, p_diff })
    }

    pub fn p_same(&self) -> f64 {
        self.p_same
    }

    pub fn p_diff(&self) -> f64 {
        self.p_diff
    }

    fn agreement(&self, same_source: bool) -> f64 {
        if same_source {
            self.p_same
        } else {
            self.p_diff
        }
    }

    /// `ln P(y | x, E)` with `E` the same-source event when `same_source`.
    pub fn log_likelihood(
        &self,
        x: &MinutiaVector,
        y: &MinutiaVector,
        same_source: bool,
    ) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                what: "log_likelihood",
                expected: x.len(),
                found: y.len(),
            });
        }
        let p = self.agreement(same_source);
        let (agree, disagree) = (p.ln(), (-p).ln_1p());
        Ok(x.cells()
            .iter()
            .zip(y.cells())
            .map(|(a, b)| if a == b { agree } else { disagree })
            .sum())
    }

    pub fn likelihood(&self, x: &MinutiaVector, y: &MinutiaVector, same_source: bool) -> Result<f64> {
        Ok(self.log_likelihood(x, y, same_source)?.exp())
    }

    /// `P(y | x, E0) / P(y | x, E0^c)`.
    pub fn likelihood_ratio(&self, x: &MinutiaVector, y: &MinutiaVector) -> Result<LikelihoodRatio> {
        LikelihoodRatio::from_log(
            self.log_likelihood(x, y, true)? - self.log_likelihood(x, y, false)?,
        )
    }

    /// Factor by which imputing one disagreeing cell inflates the ratio.
    pub fn per_cell_inflation(&self) -> f64 {
        (self.p_same / self.p_diff) / ((1.0 - self.p_same) / (1.0 - self.p_diff))
    }
}

/// `δ_Impute` for one case: LR of the imputed latent over LR of the true one.
pub fn delta_impute_for(
    model: &CellAgreementModel,
    exemplar: &MinutiaVector,
    latent_true: &MinutiaVector,
    latent_observed: &LatentVector,
) -> Result<BiasFactor> {
    let imputed = impute_from_reference(latent_observed, exemplar)?;
    let biased = model.likelihood_ratio(exemplar, &imputed)?;
    let truth = model.likelihood_ratio(exemplar, latent_true)?;
    BiasFactor::from_log(biased.log_value() - truth.log_value(), Provenance::Impute)
}

/// Generator settings for the Monte Carlo estimate of `δ_Impute`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImputeSimParams {
    pub rows: usize,
    pub cols: usize,
    pub expected_minutiae: f64,
    pub model: CellAgreementModel,
    /// Which hypothesis generates the latent.
    pub same_source: bool,
    pub mask_mode: MaskMode,
}

impl Default for ImputeSimParams {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 5,
            expected_minutiae: 15.0,
            model: CellAgreementModel::default(),
            same_source: true,
            mask_mode: MaskMode::ExactCount,
        }
    }
}

impl ImputeSimParams {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

/// Draws one latent from the agreement model given the exemplar.
fn draw_latent<R: Rng + ?Sized>(
    rng: &mut R,
    exemplar: &MinutiaVector,
    agreement: f64,
) -> Result<MinutiaVector> {
    MinutiaVector::new(
        exemplar
            .cells()
            .iter()
            .map(|&x| if rng.random::<f64>() < agreement { x } else { !x })
            .collect(),
    )
}

/// One simulated case: exemplar, true latent, masked latent, `δ_Impute`.
pub fn simulate_impute_case(
    params: &ImputeSimParams,
    missing_share: f64,
    rng: &mut SimRng,
) -> Result<(MinutiaVector, MinutiaVector, LatentVector, BiasFactor)> {
    let exemplar = generate_print(rng, params.rows, params.cols, params.expected_minutiae)?.minutiae()?;
    let agreement = params.model.agreement(params.same_source);
    let latent_true = draw_latent(rng, &exemplar, agreement)?;
    let grid = PrintGrid::from_minutiae(params.rows, params.cols, &latent_true)?;
    let observed = mask_missing(&grid, missing_share, params.mask_mode, rng)?
        .cells()
        .clone();
    let delta = delta_impute_for(&params.model, &exemplar, &latent_true, &observed)?;
    Ok((exemplar, latent_true, observed, delta))
}

pub const IMPUTE_DOMAIN: &str = "delta-impute";

/// Monte Carlo mean of `δ_Impute` over `n_reps` simulated cases. Replicate
/// `r` draws from its own substream of `seed`, so the estimate does not
/// depend on the thread count.
pub fn estimate_delta_impute(
    params: &ImputeSimParams,
    missing_share: f64,
    n_reps: usize,
    seed: u64,
) -> Result<BiasFactor> {
    if n_reps == 0 {
        return Err(Error::Domain {
            what: "n_reps",
            value: 0.0,
            bound: ">= 1",
        });
    }
    let deltas = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, IMPUTE_DOMAIN, r as u64);
            simulate_impute_case(params, missing_share, &mut rng).map(|c| c.3.value())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = deltas.iter().sum::<f64>() / n_reps as f64;
    BiasFactor::new(mean, Provenance::Impute)
}

/// Closed-form expectation of `δ_Impute` under the same generator:
/// each masked cell disagrees with probability `1 - a` (with `a` the
/// generating agreement) and then inflates the ratio by
/// [`CellAgreementModel::per_cell_inflation`].
pub fn expected_delta_impute(params: &ImputeSimParams, missing_share: f64) -> f64 {
    let a = params.model.agreement(params.same_source);
    let per_masked = a + (1.0 - a) * params.model.per_cell_inflation();
    let n = params.cells();
    match params.mask_mode {
        MaskMode::ExactCount => per_masked.powi(exact_mask_count(missing_share, n) as i32),
        MaskMode::PerCell => (1.0 - missing_share + missing_share * per_masked).powi(n as i32),
    }
}
