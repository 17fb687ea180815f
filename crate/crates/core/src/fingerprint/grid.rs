use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One position of a print: a minutia, no minutia, or unreadable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Present,
    Absent,
    Missing,
}

impl Cell {
    pub fn symbol(self) -> char {
        match self {
            Cell::Present => 'm',
            Cell::Absent => '.',
            Cell::Missing => '?',
        }
    }

    /// Accepts the grid symbols `m . ?` and the table digits `1 0`.
    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'm' | '1' => Some(Cell::Present),
            '.' | '0' => Some(Cell::Absent),
            '?' => Some(Cell::Missing),
            _ => None,
        }
    }

    pub fn from_bit(present: bool) -> Self {
        if present {
            Cell::Present
        } else {
            Cell::Absent
        }
    }
}

/// A fully observed 0/1 minutia encoding (an exemplar, or the true latent).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinutiaVector(Vec<bool>);

impl MinutiaVector {
    pub fn new(cells: Vec<bool>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Grid("minutia vector must have at least one cell".into()));
        }
        Ok(Self(cells))
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn cells(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_present(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn to_latent(&self) -> LatentVector {
        LatentVector(self.0.iter().map(|&b| Cell::from_bit(b)).collect())
    }
}

/// An observed latent print, possibly with unreadable cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatentVector(Vec<Cell>);

impl LatentVector {
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Grid("latent vector must have at least one cell".into()));
        }
        Ok(Self(cells))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_missing(&self) -> usize {
        self.0.iter().filter(|&&c| c == Cell::Missing).count()
    }

    /// The fully observed vector, if no cell is missing.
    pub fn to_minutiae(&self) -> Option<MinutiaVector> {
        self.0
            .iter()
            .map(|c| match c {
                Cell::Present => Some(true),
                Cell::Absent => Some(false),
                Cell::Missing => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(MinutiaVector)
    }
}

impl FromStr for LatentVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cells = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Cell::from_symbol(c).ok_or_else(|| Error::Grid(format!("unknown cell symbol {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cells)
    }
}

impl FromStr for MinutiaVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LatentVector::from_str(s)?
            .to_minutiae()
            .ok_or_else(|| Error::Grid("complete vector contains a missing cell".into()))
    }
}

/// A rectangular print, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrintGrid {
    rows: usize,
    cols: usize,
    cells: LatentVector,
}

impl PrintGrid {
    pub fn new(rows: usize, cols: usize, cells: Vec<Cell>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Grid("grid dimensions must be positive".into()));
        }
        if rows * cols != cells.len() {
            return Err(Error::LengthMismatch {
                what: "grid cells",
                expected: rows * cols,
                found: cells.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            cells: LatentVector(cells),
        })
    }

    pub fn from_minutiae(rows: usize, cols: usize, v: &MinutiaVector) -> Result<Self> {
        Self::new(rows, cols, v.to_latent().0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &LatentVector {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Cell {
        self.cells.0[row * self.cols + col]
    }

    /// The grid as a complete minutia vector; fails if any cell is missing.
    pub fn minutiae(&self) -> Result<MinutiaVector> {
        self.cells
            .to_minutiae()
            .ok_or_else(|| Error::Grid("grid has missing cells".into()))
    }

    fn same_shape(&self, other: &PrintGrid) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Grid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl FromStr for PrintGrid {
    type Err = Error;

    /// One row per line using `m` (minutia), `.` (none) and `?` (missing).
    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let cols = lines.first().map_or(0, |l| l.chars().count());
        let mut cells = Vec::with_capacity(lines.len() * cols);
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(Error::Grid(format!("row {r} has a different width")));
            }
            for c in line.chars() {
                cells.push(
                    Cell::from_symbol(c)
                        .filter(|_| c != '0' && c != '1')
                        .ok_or_else(|| Error::Grid(format!("unknown grid symbol {c:?}")))?,
                );
            }
        }
        Self::new(lines.len(), cols, cells)
    }
}

impl fmt::Display for PrintGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.0.chunks(self.cols) {
            let line: String = row.iter().map(|c| c.symbol()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Draws a complete print: each cell independently holds a minutia with
/// probability `expected_minutiae / (rows * cols)`.
pub fn generate_print<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    expected_minutiae: f64,
) -> Result<PrintGrid> {
    let n = rows * cols;
    if !(expected_minutiae >= 0.0 && expected_minutiae <= n as f64) {
        return Err(Error::Domain {
            what: "expected_minutiae",
            value: expected_minutiae,
            bound: "[0, rows*cols]",
        });
    }
    let rate = expected_minutiae / n as f64;
    let cells = (0..n)
        .map(|_| Cell::from_bit(rng.random::<f64>() < rate))
        .collect();
    PrintGrid::new(rows, cols, cells)
}

/// How cells are chosen to be unreadable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Exactly `round(share * n)` cells (half rounds up), chosen uniformly
    /// without replacement.
    #[default]
    ExactCount,
    /// Each cell independently missing with probability `share`.
    PerCell,
}

/// Number of cells masked by [`MaskMode::ExactCount`].
pub fn exact_mask_count(missing_share: f64, n: usize) -> usize {
    ((missing_share * n as f64 + 0.5).floor() as usize).min(n)
}

pub fn mask_missing<R: Rng + ?Sized>(
    grid: &PrintGrid,
    missing_share: f64,
    mode: MaskMode,
    rng: &mut R,
) -> Result<PrintGrid> {
    if !(0.0..=1.0).contains(&missing_share) {
        return Err(Error::Domain {
            what: "missing_share",
            value: missing_share,
            bound: "[0, 1]",
        });
    }
    let n = grid.cells.len();
    let mut cells = grid.cells.0.clone();
    match mode {
        MaskMode::ExactCount => {
            let k = exact_mask_count(missing_share, n);
            for i in index::sample(rng, n, k) {
                cells[i] = Cell::Missing;
            }
        }
        MaskMode::PerCell => {
            for c in &mut cells {
                if rng.random::<f64>() < missing_share {
                    *c = Cell::Missing;
                }
            }
        }
    }
    PrintGrid::new(grid.rows, grid.cols, cells)
}

/// Fills each missing cell of the latent with the reference's cell.
pub fn impute_from_reference(
    latent: &LatentVector,
    reference: &MinutiaVector,
) -> Result<MinutiaVector> {
    if latent.len() != reference.len() {
        return Err(Error::LengthMismatch {
            what: "impute_from_reference",
            expected: reference.len(),
            found: latent.len(),
        });
    }
    let cells = latent
        .0
        .iter()
        .zip(&reference.0)
        .map(|(c, &r)| match c {
            Cell::Present => true,
            Cell::Absent => false,
            Cell::Missing => r,
        })
        .collect();
    MinutiaVector::new(cells)
}

pub fn impute_grid(latent: &PrintGrid, reference: &PrintGrid) -> Result<PrintGrid> {
    latent.same_shape(reference)?;
    let filled = impute_from_reference(&latent.cells, &reference.minutiae()?)?;
    PrintGrid::from_minutiae(latent.rows, latent.cols, &filled)
}

/// Correspondence counts between an exemplar and a (possibly partial)
/// latent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSummary {
    /// Positions where both are observed and equal.
    pub n_correspond: usize,
    /// Positions with a minutia in both.
    pub n_minutiae_matches: usize,
    /// Unreadable positions in the latent.
    pub n_missing: usize,
}

pub fn count_matches(x: &MinutiaVector, y: &LatentVector) -> Result<MatchSummary> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "count_matches",
            expected: x.len(),
            found: y.len(),
        });
    }
    let mut s = MatchSummary {
        n_correspond: 0,
        n_minutiae_matches: 0,
        n_missing: 0,
    };
    for (&xi, &yi) in x.0.iter().zip(&y.0) {
        match yi {
            Cell::Missing => s.n_missing += 1,
            _ if Cell::from_bit(xi) == yi => {
                s.n_correspond += 1;
                if xi {
                    s.n_minutiae_matches += 1;
                }
            }
            _ => {}
        }
    }
    Ok(s)
}

pub fn count_grid_matches(x: &PrintGrid, y: &PrintGrid) -> Result<MatchSummary> {
    x.same_shape(y)?;
    count_matches(&x.minutiae()?, &y.cells)
}

/// Categorical source conclusion from the number of matching minutiae.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDecision {
    Exclusion,
    Inconclusive,
    SupportSameSource,
    Identification,
}

impl SourceDecision {
    pub fn label(self) -> &'static str {
        match self {
            Self::Exclusion => "exclusion",
            Self::Inconclusive => "inconclusive",
            Self::SupportSameSource => "support_same_source",
            Self::Identification => "identification",
        }
    }
}

/// Lower bounds (inclusive) on matching minutiae for identification,
/// support for same source, and inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    identification: u32,
    support: u32,
    inconclusive: u32,
}

impl Thresholds {
    pub fn new(identification: u32, support: u32, inconclusive: u32) -> Result<Self> {
        if !(identification > support && support > inconclusive && inconclusive > 0) {
            return Err(Error::Thresholds((identification, support, inconclusive)));
        }
        Ok(Self {
            identification,
            support,
            inconclusive,
        })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            identification: 12,
            support: 7,
            inconclusive: 3,
        }
    }
}

pub fn decide_source(summary: &MatchSummary, thresholds: &Thresholds) -> SourceDecision {
    let m = summary.n_minutiae_matches as u64;
    if m >= u64::from(thresholds.identification) {
        SourceDecision::Identification
    } else if m >= u64::from(thresholds.support) {
        SourceDecision::SupportSameSource
    } else if m >= u64::from(thresholds.inconclusive) {
        SourceDecision::Inconclusive
    } else {
        SourceDecision::Exclusion
    }
}

/// A hand-built 10×5 pair from different sources where a quarter of the
/// latent is unreadable and imputation from the exemplar turns an
/// inconclusive into support for same source.
#[derive(Debug, Clone)]
pub struct GridFixture {
    pub exemplar: PrintGrid,
    pub latent_true: PrintGrid,
    pub latent_observed: PrintGrid,
    pub imputed: PrintGrid,
    pub true_summary: MatchSummary,
    pub observed_summary: MatchSummary,
    pub imputed_summary: MatchSummary,
}

pub const FIXTURE_EXEMPLAR: &str = include_str!("../../fixtures/grids/exemplar.txt");
pub const FIXTURE_LATENT_TRUE: &str = include_str!("../../fixtures/grids/latent_true.txt");
pub const FIXTURE_LATENT_OBSERVED: &str = include_str!("../../fixtures/grids/latent_observed.txt");

pub fn grid_fixture_mayfield_style() -> GridFixture {
    let exemplar: PrintGrid = FIXTURE_EXEMPLAR.parse().expect("exemplar fixture");
    let latent_true: PrintGrid = FIXTURE_LATENT_TRUE.parse().expect("latent fixture");
    let latent_observed: PrintGrid = FIXTURE_LATENT_OBSERVED.parse().expect("masked fixture");
    let imputed = impute_grid(&latent_observed, &exemplar).expect("fixture shapes agree");
    let summary = |y: &PrintGrid| count_grid_matches(&exemplar, y).expect("fixture shapes agree");
    GridFixture {
        true_summary: summary(&latent_true),
        observed_summary: summary(&latent_observed),
        imputed_summary: summary(&imputed),
        exemplar,
        latent_true,
        latent_observed,
        imputed,
    }
}
