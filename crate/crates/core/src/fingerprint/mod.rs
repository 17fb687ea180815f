//! Toy minutiae-comparison model: prints as grids of present / absent /
//! missing cells, imputation of missing cells from the exemplar, categorical
//! source decisions and the resulting imputation bias.

mod grid;
mod impute;

pub use grid::{
    count_grid_matches, count_matches, decide_source, exact_mask_count, generate_print,
    grid_fixture_mayfield_style, impute_from_reference, impute_grid, mask_missing, Cell,
    GridFixture, LatentVector, MaskMode, MatchSummary, MinutiaVector, PrintGrid, SourceDecision,
    Thresholds,
};
pub use impute::{
    delta_impute_for, estimate_delta_impute, expected_delta_impute, simulate_impute_case,
    CellAgreementModel, ImputeSimParams, IMPUTE_DOMAIN,
};
