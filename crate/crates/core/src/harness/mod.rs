//! Experiment presets, configuration and run manifests.
//!
//! A run computes every artifact in memory, then writes them and a
//! `manifest.json` listing each file with its SHA-256. Replicates are drawn
//! from per-index substreams and reduced in index order, so the bytes do not
//! depend on the thread count.

pub mod config;
pub mod manifest;
pub mod presets;

use std::path::Path;

pub use config::{parse_override, validate_config, ExperimentConfig, Parameters, Preset};
pub use manifest::{Artifact, ArtifactEntry, RunManifest};
pub use presets::build_artifacts;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{module}: {source}")]
    Runtime {
        module: &'static str,
        #[source]
        source: crate::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl HarnessError {
    /// 2 for usage and validation errors, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Runtime { .. } | Self::Output(_) => 1,
        }
    }
}

pub(crate) fn runtime(module: &'static str) -> impl Fn(crate::Error) -> HarnessError {
    move |source| HarnessError::Runtime { module, source }
}

/// Runs `preset` and writes its artifacts and manifest into `out`.
///
/// `threads` sizes the worker pool (`None` uses the global default); it does
/// not affect any output byte.
pub fn run_preset(
    preset: Preset,
    seed: u64,
    parameters: &Parameters,
    out: &Path,
    threads: Option<usize>,
) -> Result<RunManifest, HarnessError> {
    parameters.validate()?;
    let artifacts = match threads {
        None => build_artifacts(preset, seed, parameters)?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Output(format!("thread pool: {e}")))?
            .install(|| build_artifacts(preset, seed, parameters))?,
    };
    let manifest = RunManifest::new(preset, seed, parameters, &artifacts);
    manifest.write(out, &artifacts)?;
    Ok(manifest)
}
