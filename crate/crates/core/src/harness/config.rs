//! Flat key/value experiment configuration.
//!
//! A config file is TOML with top-level keys only. `preset` and `seed` are
//! optional in the file; every other key is a [`Parameters`] field and falls
//! back to its documented default. Unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::HarnessError;
use crate::fingerprint::MaskMode;
use crate::propagation::{PeerIndicator, PeerSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Mayfield,
    Race,
    Relevance,
    ImputationTable,
    ImputationGrid,
    DeltaImpute,
    Feedback,
    Propagation,
    Trier,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Mayfield,
        Preset::Race,
        Preset::Relevance,
        Preset::ImputationTable,
        Preset::ImputationGrid,
        Preset::DeltaImpute,
        Preset::Feedback,
        Preset::Propagation,
        Preset::Trier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mayfield => "mayfield",
            Self::Race => "race",
            Self::Relevance => "relevance",
            Self::ImputationTable => "imputation-table",
            Self::ImputationGrid => "imputation-grid",
            Self::DeltaImpute => "delta-impute",
            Self::Feedback => "feedback",
            Self::Propagation => "propagation",
            Self::Trier => "trier",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Mayfield => "average contextual bias over five analysts",
            Self::Race => "bias from a trait the analyst over-associates with guilt",
            Self::Relevance => "task-relevance of context on the shipped DAG fixtures",
            Self::ImputationTable => "match counts before and after imputing a six-cell latent",
            Self::ImputationGrid => "10x5 grid whose decision flips after imputation",
            Self::DeltaImpute => "Monte Carlo imputation bias against its closed form",
            Self::Feedback => "truthful vs biased feedback into an analyst's trait belief",
            Self::Propagation => "cascade vs snowball bias along a chain of analysts",
            Self::Trier => "guilt odds and systemic bias seen by the trier of fact",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown preset `{s}`")))
    }
}

/// Every tunable value. Presets read the subset they need; the whole set is
/// echoed into each manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Parameters {
    /// Suspect pool size `N`.
    pub pool: u64,
    /// `P(I=1)`.
    pub trait_prob: f64,

    pub k: usize,
    pub n_runs: usize,
    pub p_match_same: f64,
    pub p_match_diff: f64,
    pub missing_low: f64,
    pub missing_high: f64,
    pub same_source_truth: bool,
    pub peer_signal: PeerSignal,
    pub peer_indicator: PeerIndicator,
    /// LR of the context itself, used by the trier.
    pub context_lr: f64,

    pub prior_a: f64,
    pub prior_b: f64,
    pub alpha_true: f64,
    pub n_obs: usize,
    pub wrongful_rate: f64,
    pub trait_skew: f64,
    pub n_seeds: usize,

    pub rows: usize,
    pub cols: usize,
    pub expected_minutiae: f64,
    pub p_same: f64,
    pub p_diff: f64,
    pub n_reps: usize,
    pub missing_shares: Vec<f64>,
    pub mask_mode: MaskMode,

    pub threshold_identification: u32,
    pub threshold_support: u32,
    pub threshold_inconclusive: u32,
    pub relevance_tolerance: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            pool: 10,
            trait_prob: 0.15,
            k: 5,
            n_runs: 1000,
            p_match_same: 0.5,
            p_match_diff: 0.25,
            missing_low: 0.0,
            missing_high: 0.5,
            same_source_truth: true,
            peer_signal: PeerSignal::LikelihoodRatio,
            peer_indicator: PeerIndicator::EachPredecessor,
            context_lr: 1.0,
            prior_a: 12.0,
            prior_b: 8.0,
            alpha_true: 0.5,
            n_obs: 100,
            wrongful_rate: 0.06,
            trait_skew: 2.0,
            n_seeds: 1000,
            rows: 10,
            cols: 5,
            expected_minutiae: 15.0,
            p_same: 0.5,
            p_diff: 0.25,
            n_reps: 10_000,
            missing_shares: vec![0.0, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5],
            mask_mode: MaskMode::ExactCount,
            threshold_identification: 12,
            threshold_support: 7,
            threshold_inconclusive: 3,
            relevance_tolerance: crate::relevance::DEFAULT_TOLERANCE,
        }
    }
}

fn invalid(field: &str, value: impl fmt::Display, bound: &str) -> HarnessError {
    HarnessError::Config(format!("{field} = {value} is out of range: must be {bound}"))
}

fn open_unit(field: &str, v: f64) -> Result<(), HarnessError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(field, v, "in (0, 1)"))
    }
}

fn closed_unit(field: &str, v: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, v, "in [0, 1]"))
    }
}

fn positive_count(field: &str, v: usize) -> Result<(), HarnessError> {
    if v >= 1 {
        Ok(())
    } else {
        Err(invalid(field, v, ">= 1"))
    }
}

fn positive_finite(field: &str, v: f64) -> Result<(), HarnessError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, v, "finite and > 0"))
    }
}

impl Parameters {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.pool == 0 {
            return Err(invalid("pool", 0, ">= 1"));
        }
        open_unit("trait_prob", self.trait_prob)?;
        positive_count("k", self.k)?;
        positive_count("n_runs", self.n_runs)?;
        open_unit("p_match_same", self.p_match_same)?;
        open_unit("p_match_diff", self.p_match_diff)?;
        if self.p_match_diff >= self.p_match_same {
            return Err(invalid("p_match_diff", self.p_match_diff, "< p_match_same"));
        }
        closed_unit("missing_low", self.missing_low)?;
        closed_unit("missing_high", self.missing_high)?;
        if self.missing_high < self.missing_low {
            return Err(invalid("missing_high", self.missing_high, ">= missing_low"));
        }
        positive_finite("context_lr", self.context_lr)?;
        positive_finite("prior_a", self.prior_a)?;
        positive_finite("prior_b", self.prior_b)?;
        closed_unit("alpha_true", self.alpha_true)?;
        positive_count("n_obs", self.n_obs)?;
        if !(0.0..1.0).contains(&self.wrongful_rate) {
            return Err(invalid("wrongful_rate", self.wrongful_rate, "in [0, 1)"));
        }
        if !(self.trait_skew.is_finite() && self.trait_skew >= 1.0) {
            return Err(invalid("trait_skew", self.trait_skew, "finite and >= 1"));
        }
        positive_count("n_seeds", self.n_seeds)?;
        positive_count("rows", self.rows)?;
        positive_count("cols", self.cols)?;
        if !(self.expected_minutiae >= 0.0 && self.expected_minutiae <= (self.rows * self.cols) as f64) {
            return Err(invalid("expected_minutiae", self.expected_minutiae, "in [0, rows * cols]"));
        }
        open_unit("p_same", self.p_same)?;
        open_unit("p_diff", self.p_diff)?;
        positive_count("n_reps", self.n_reps)?;
        if self.missing_shares.is_empty() {
            return Err(invalid("missing_shares", "[]", "non-empty"));
        }
        for &s in &self.missing_shares {
            closed_unit("missing_shares", s)?;
        }
        let (i, s, c) = (
            self.threshold_identification,
            self.threshold_support,
            self.threshold_inconclusive,
        );
        if !(i > s && s > c) {
            return Err(invalid(
                "threshold_support",
                s,
                "strictly between threshold_inconclusive and threshold_identification",
            ));
        }
        positive_finite("relevance_tolerance", self.relevance_tolerance)?;
        Ok(())
    }
}

/// A fully defaulted and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub parameters: Parameters,
}

/// Parses one `key=value` override. The value is read as a TOML value and
/// falls back to a bare string, so `peer_signal=posterior_odds` works
/// without quotes.
pub fn parse_override(raw: &str) -> Result<(String, Value), HarnessError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| HarnessError::Usage(format!("override `{raw}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(HarnessError::Usage(format!("override `{raw}` has an empty key")));
    }
    let value = value.trim();
    let parsed = toml::from_str::<Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

/// Builds a config from file text (may be empty) and ordered overrides;
/// later overrides win.
pub fn validate_config(raw: &str, overrides: &[(String, Value)]) -> Result<ExperimentConfig, HarnessError> {
    let mut table: Table = toml::from_str(raw).map_err(|e| HarnessError::Config(format!("config: {e}")))?;
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    let preset = match table.remove("preset") {
        None => None,
        Some(Value::String(s)) => Some(s.parse()?),
        Some(other) => {
            return Err(HarnessError::Config(format!(
                "preset: expected a string, found {}",
                other.type_str()
            )))
        }
    };
    let seed = match table.remove("seed") {
        None => None,
        Some(Value::Integer(s)) if s >= 0 => Some(s as u64),
        Some(other) => {
            return Err(HarnessError::Config(format!(
                "seed: expected a non-negative integer, found {other}"
            )))
        }
    };
    let parameters: Parameters = Value::Table(table.clone()).try_into().map_err(|e: toml::de::Error| {
        // Re-check one key at a time so the message names the offending field.
        let culprit = table.iter().find(|(k, v)| {
            let single: Table = [((*k).clone(), (*v).clone())].into_iter().collect();
            Value::Table(single).try_into::<Parameters>().is_err()
        });
        match culprit {
            Some((k, v)) => HarnessError::Config(format!("{k} = {v}: {}", e.message())),
            None => HarnessError::Config(format!("config: {}", e.message())),
        }
    })?;
    parameters.validate()?;
    Ok(ExperimentConfig {
        preset,
        seed,
        parameters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let c = validate_config("", &[]).unwrap();
        assert_eq!(c.parameters, Parameters::default());
        assert_eq!((c.preset, c.seed), (None, None));
    }

    #[test]
    fn range_error_names_field_and_bound() {
        let err = validate_config("trait_prob = 1.5", &[]).unwrap_err().to_string();
        assert!(err.contains("trait_prob") && err.contains("(0, 1)"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = validate_config("n_rnus = 3", &[]).unwrap_err().to_string();
        assert!(err.contains("n_rnus"), "{err}");
    }

    #[test]
    fn type_mismatch_named() {
        let err = validate_config("k = \"five\"", &[]).unwrap_err().to_string();
        assert!(err.contains("k = \"five\"") && err.contains("usize"), "{err}");
    }

    #[test]
    fn overrides_win_and_parse_bare_strings() {
        let o = vec![
            parse_override("n_runs=1000").unwrap(),
            parse_override("peer_signal=posterior_odds").unwrap(),
            parse_override("missing_shares=[0.25]").unwrap(),
        ];
        let c = validate_config("n_runs = 7\npreset = \"propagation\"\nseed = 3", &o).unwrap();
        assert_eq!(c.parameters.n_runs, 1000);
        assert_eq!(c.parameters.peer_signal, PeerSignal::PosteriorOdds);
        assert_eq!(c.parameters.missing_shares, vec![0.25]);
        assert_eq!(c.preset, Some(Preset::Propagation));
        assert_eq!(c.seed, Some(3));
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("nope".parse::<Preset>().is_err());
    }
}
