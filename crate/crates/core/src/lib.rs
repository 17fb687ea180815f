//! Probabilistic calculus of contextual bias in forensic decision-making.
//!
//! The crate follows evidence from a single analyst's likelihood ratio,
//! through chains of analysts who may see each other's conclusions, to the
//! trier of fact's odds of guilt, and measures at each stage the
//! multiplicative bias introduced by task-irrelevant information.
//!
//! Analytic types are generic over a [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` case.

pub mod contextual;
pub mod error;
pub mod feedback;
pub mod fingerprint;
pub mod harness;
pub mod odds;
pub mod propagation;
pub mod relevance;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod trier;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Probability64 = odds::Probability<f64>;
pub type Odds64 = odds::OddsRatio<f64>;
pub type Lr64 = odds::LikelihoodRatio<f64>;
pub type Bias64 = contextual::BiasFactor<f64>;
pub type Ledger64 = contextual::BiasLedger<f64>;
pub type Joint64 = relevance::FiniteJoint<f64>;

pub type Probability32 = odds::Probability<f32>;
pub type Odds32 = odds::OddsRatio<f32>;
pub type Lr32 = odds::LikelihoodRatio<f32>;
pub type Bias32 = contextual::BiasFactor<f32>;
pub type Ledger32 = contextual::BiasLedger<f32>;
pub type Joint32 = relevance::FiniteJoint<f32>;
