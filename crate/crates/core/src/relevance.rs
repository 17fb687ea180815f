//! Task relevance of contextual information, decided by enumeration.
//!
//! Information `I` is task-irrelevant when `(X, Y)` is independent of `I`
//! given the source event `E`, i.e. `P(x,y | e) = P(x,y | i,e)` for every
//! cell, and task-relevant otherwise. The check is run for every value of
//! `E` (same source and different source).
//!
//! Joints are built from conditional tables listed in topological order, the
//! way a small DAG is written down. Fixture files use TOML:
//!
//! ```toml
//! [[factor]]
//! variable = "E"
//! values = ["same", "different"]
//! parents = ["I"]
//! # one row per parent assignment, last parent varying fastest
//! table = [["1/5", "4/5"], ["2/5", "3/5"]]
//! ```
//!
//! Probabilities are strings holding a decimal (`"0.25"`) or a ratio of
//! decimals (`"1/3"`). The classifier needs variables `E`, `I` and either
//! `X` and `Y` or a single composite `XY`; any other variable is summed out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance used when checking that tables and joints are normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Default tolerance for the independence comparison.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn new(name: &str, values: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }
}

/// A conditional probability table `P(variable | parents)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<T = f64> {
    pub variable: Variable,
    pub parents: Vec<String>,
    /// One row per parent assignment (row-major, last parent fastest);
    /// each row is a distribution over `variable.values`.
    pub table: Vec<Vec<T>>,
}

/// A probability mass function over the product of finite domains, stored
/// densely in row-major order (last variable fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJoint<T = f64> {
    variables: Vec<Variable>,
    pmf: Vec<T>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl<T: Scalar> FiniteJoint<T> {
    pub fn new(variables: Vec<Variable>, pmf: Vec<T>) -> Result<Self> {
        let mut names: Vec<&str> = variables.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Schema("duplicate variable name".into()));
        }
        if let Some(v) = variables.iter().find(|v| v.values.is_empty()) {
            return Err(Error::Schema(format!("variable {} has an empty domain", v.name)));
        }
        let cells: usize = variables.iter().map(Variable::cardinality).product();
        if pmf.len() != cells {
            return Err(Error::LengthMismatch {
                what: "joint pmf",
                expected: cells,
                found: pmf.len(),
            });
        }
        if let Some(m) = pmf.iter().find(|m| !(m.is_finite() && **m >= T::zero())) {
            return Err(Error::Schema(format!("negative or non-finite mass {m}")));
        }
        let total = pmf.iter().fold(T::zero(), |acc, &m| acc + m);
        if (total - T::one()).abs() > T::lit(NORMALIZATION_TOLERANCE) {
            return Err(Error::Schema(format!("joint sums to {total}, not 1")));
        }
        Ok(Self { variables, pmf })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Mass of a full assignment given as value indices in variable order.
    pub fn mass(&self, assignment: &[usize]) -> T {
        let cards: Vec<usize> = self.variables.iter().map(Variable::cardinality).collect();
        let idx: usize = strides(&cards)
            .iter()
            .zip(assignment)
            .map(|(s, a)| s * a)
            .sum();
        self.pmf[idx]
    }

    /// Decodes a flat cell index into per-variable value indices.
    fn decode(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, var) in out.iter_mut().zip(&self.variables).rev() {
            let c = var.cardinality();
            *slot = flat % c;
            flat /= c;
        }
    }

    /// Reorders the values of one variable: new value `j` is old value
    /// `permutation[j]`. The distribution is unchanged up to labels.
    pub fn relabel(&self, name: &str, permutation: &[usize]) -> Result<Self> {
        let vi = self
            .variable_index(name)
            .ok_or_else(|| Error::MissingVariable { name: name.into() })?;
        let card = self.variables[vi].cardinality();
        let mut seen = vec![false; card];
        if permutation.len() != card
            || permutation.iter().any(|&p| p >= card || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Schema(format!("invalid permutation for {name}")));
        }
        let mut variables = self.variables.clone();
        variables[vi].values = permutation
            .iter()
            .map(|&p| self.variables[vi].values[p].clone())
            .collect();
        let mut pmf = vec![T::zero(); self.pmf.len()];
        let mut assign = vec![0; self.variables.len()];
        for (flat, slot) in pmf.iter_mut().enumerate() {
            self.decode(flat, &mut assign);
            assign[vi] = permutation[assign[vi]];
            *slot = self.mass(&assign);
        }
        Ok(Self { variables, pmf })
    }
}

/// Multiplies conditional tables, given in topological order, into a joint.
pub fn joint_from_dag_factors<T: Scalar>(factors: &[Factor<T>]) -> Result<FiniteJoint<T>> {
    if factors.is_empty() {
        return Err(Error::EmptySequence {
            what: "joint_from_dag_factors",
        });
    }
    let tol = T::lit(NORMALIZATION_TOLERANCE);
    let mut variables: Vec<Variable> = Vec::with_capacity(factors.len());
    // For each factor: positions of its parents among the variables so far.
    let mut parent_pos: Vec<Vec<usize>> = Vec::with_capacity(factors.len());
    for f in factors {
        if variables.iter().any(|v| v.name == f.variable.name) {
            return Err(Error::Schema(format!("variable {} defined twice", f.variable.name)));
        }
        if f.variable.values.is_empty() {
            return Err(Error::Schema(format!(
                "variable {} has an empty domain",
                f.variable.name
            )));
        }
        let pos = f
            .parents
            .iter()
            .map(|p| {
                variables.iter().position(|v| &v.name == p).ok_or_else(|| {
                    Error::Schema(format!(
                        "parent {p} of {} is not defined earlier",
                        f.variable.name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: usize = pos.iter().map(|&i| variables[i].cardinality()).product();
        if f.table.len() != rows {
            return Err(Error::Schema(format!(
                "table for {} has {} rows, parents need {rows}",
                f.variable.name,
                f.table.len()
            )));
        }
        for (r, row) in f.table.iter().enumerate() {
            if row.len() != f.variable.cardinality() {
                return Err(Error::Schema(format!(
                    "row {r} of {} has {} entries, domain has {}",
                    f.variable.name,
                    row.len(),
                    f.variable.cardinality()
                )));
            }
            if row.iter().any(|m| !(m.is_finite() && *m >= T::zero())) {
                return Err(Error::Schema(format!(
                    "row {r} of {} has a negative entry",
                    f.variable.name
                )));
            }
            let s = row.iter().fold(T::zero(), |acc, &m| acc + m);
            if (s - T::one()).abs() > tol {
                return Err(Error::Schema(format!(
                    "row {r} of {} sums to {s}, not 1",
                    f.variable.name
                )));
            }
        }
        variables.push(f.variable.clone());
        parent_pos.push(pos);
    }

    let cards: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
    let cells: usize = cards.iter().product();
    let mut pmf = Vec::with_capacity(cells);
    let mut assign = vec![0usize; variables.len()];
    for flat in 0..cells {
        let mut rem = flat;
        for (slot, &c) in assign.iter_mut().zip(&cards).rev() {
            *slot = rem % c;
            rem /= c;
        }
        let mut mass = T::one();
        for (k, f) in factors.iter().enumerate() {
            let row = parent_pos[k]
                .iter()
                .fold(0, |acc, &p| acc * cards[p] + assign[p]);
            mass = mass * f.table[row][assign[k]];
        }
        pmf.push(mass);
    }
    FiniteJoint::new(variables, pmf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relevance {
    TaskRelevant,
    TaskIrrelevant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceVerdict<T = f64> {
    pub verdict: Relevance,
    /// Largest `|P(x,y|e) - P(x,y|i,e)|` over all cells.
    pub max_discrepancy: T,
    pub tolerance: T,
}

/// Classifies `I` as task-relevant or task-irrelevant for the comparison of
/// `(X, Y)` under every value of `E`.
pub fn classify_relevance<T: Scalar>(
    joint: &FiniteJoint<T>,
    tolerance: T,
) -> Result<RelevanceVerdict<T>> {
    let find = |name: &str| {
        joint
            .variable_index(name)
            .ok_or_else(|| Error::MissingVariable { name: name.into() })
    };
    let e = find("E")?;
    let i = find("I")?;
    let evidence: Vec<usize> = match joint.variable_index("XY") {
        Some(xy) => vec![xy],
        None => vec![find("X")?, find("Y")?],
    };
    let vars = joint.variables();
    let ne = vars[e].cardinality();
    let ni = vars[i].cardinality();
    let nxy: usize = evidence.iter().map(|&v| vars[v].cardinality()).product();

    // Marginal over (E, I, XY).
    let mut m = vec![T::zero(); ne * ni * nxy];
    let mut assign = vec![0usize; vars.len()];
    for (flat, &mass) in joint.pmf().iter().enumerate() {
        joint.decode(flat, &mut assign);
        let xy = evidence
            .iter()
            .fold(0, |acc, &v| acc * vars[v].cardinality() + assign[v]);
        m[(assign[e] * ni + assign[i]) * nxy + xy] =
            m[(assign[e] * ni + assign[i]) * nxy + xy] + mass;
    }
    let at = |ev: usize, iv: usize, xy: usize| m[(ev * ni + iv) * nxy + xy];

    let mut worst = T::zero();
    for ev in 0..ne {
        let p_e = (0..ni)
            .flat_map(|iv| (0..nxy).map(move |xy| (iv, xy)))
            .fold(T::zero(), |acc, (iv, xy)| acc + at(ev, iv, xy));
        if p_e <= T::zero() {
            return Err(Error::ZeroMassEvent {
                event: format!("E={}", vars[e].values[ev]),
            });
        }
        for iv in 0..ni {
            let p_ie = (0..nxy).fold(T::zero(), |acc, xy| acc + at(ev, iv, xy));
            if p_ie <= T::zero() {
                return Err(Error::ZeroMassEvent {
                    event: format!("I={}, E={}", vars[i].values[iv], vars[e].values[ev]),
                });
            }
            for xy in 0..nxy {
                let p_xy_e = (0..ni).fold(T::zero(), |acc, j| acc + at(ev, j, xy)) / p_e;
                let p_xy_ie = at(ev, iv, xy) / p_ie;
                worst = worst.max((p_xy_e - p_xy_ie).abs());
            }
        }
    }
    let verdict = if worst <= tolerance {
        Relevance::TaskIrrelevant
    } else {
        Relevance::TaskRelevant
    };
    Ok(RelevanceVerdict {
        verdict,
        max_discrepancy: worst,
        tolerance,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFile {
    #[serde(default)]
    description: Option<String>,
    factor: Vec<FixtureFactor>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureFactor {
    variable: String,
    values: Vec<String>,
    #[serde(default)]
    parents: Vec<String>,
    table: Vec<Vec<String>>,
}

/// Parses `"0.25"` or `"1/4"` into a scalar.
pub fn parse_probability<T: Scalar>(s: &str) -> Result<T> {
    let num = |part: &str| {
        T::from_str_radix(part.trim(), 10)
            .map_err(|_| Error::Schema(format!("cannot parse probability {s:?}")))
    };
    match s.split_once('/') {
        Some((a, b)) => {
            let d = num(b)?;
            if d == T::zero() {
                return Err(Error::Schema(format!("zero denominator in {s:?}")));
            }
            Ok(num(a)? / d)
        }
        None => num(s),
    }
}

/// A parsed fixture: its description and conditional tables.
#[derive(Debug, Clone)]
pub struct DagFixture<T = f64> {
    pub description: Option<String>,
    pub factors: Vec<Factor<T>>,
}

impl<T: Scalar> DagFixture<T> {
    pub fn parse(text: &str) -> Result<Self> {
        let file: FixtureFile =
            toml::from_str(text).map_err(|e| Error::Schema(format!("fixture: {e}")))?;
        let factors = file
            .factor
            .into_iter()
            .map(|f| {
                let table = f
                    .table
                    .iter()
                    .map(|row| row.iter().map(|s| parse_probability(s)).collect())
                    .collect::<Result<Vec<Vec<T>>>>()?;
                Ok(Factor {
                    variable: Variable {
                        name: f.variable,
                        values: f.values,
                    },
                    parents: f.parents,
                    table,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            description: file.description,
            factors,
        })
    }

    pub fn joint(&self) -> Result<FiniteJoint<T>> {
        joint_from_dag_factors(&self.factors)
    }
}

/// The DAG examples shipped with the crate: `(name, expected verdict, text)`.
pub const BUILTIN_FIXTURES: [(&str, Relevance, &str); 4] = [
    (
        "curved_surface",
        Relevance::TaskRelevant,
        include_str!("../fixtures/relevance/curved_surface.toml"),
    ),
    (
        "curved_surface_no_source_edge",
        Relevance::TaskRelevant,
        include_str!("../fixtures/relevance/curved_surface_no_source_edge.toml"),
    ),
    (
        "criminal_history",
        Relevance::TaskIrrelevant,
        include_str!("../fixtures/relevance/criminal_history.toml"),
    ),
    (
        "criminal_history_no_source_edge",
        Relevance::TaskIrrelevant,
        include_str!("../fixtures/relevance/criminal_history_no_source_edge.toml"),
    ),
];
