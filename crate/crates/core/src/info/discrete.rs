//! Exact information measures of explicit finite joint distributions.
//!
//! These are plain sums over states and serve as ground truth for the
//! continuous estimators and for the identities relating TC, DTC and O.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{InfoSummary, Units};
use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;

/// Logarithm base for discrete results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LogBase {
    /// Bits.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    fn log(self, p: f64) -> f64 {
        match self {
            LogBase::Two => p.log2(),
            LogBase::E => p.ln(),
        }
    }

    pub fn units(self) -> Units {
        match self {
            LogBase::Two => Units::Bits,
            LogBase::E => Units::Nats,
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "bits" => Ok(LogBase::Two),
            "e" | "nats" => Ok(LogBase::E),
            other => Err(Error::invalid(format!("unknown log base {other:?} (expected 2 or e)"))),
        }
    }
}

/// A finite joint distribution over integer-valued tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    arity: usize,
    states: Vec<(Vec<i64>, f64)>,
}

impl DiscreteDistribution {
    /// Validates masses (non-negative, summing to one) and tuple arity.
    /// Repeated tuples are allowed; their masses add.
    pub fn new(states: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        let arity = states
            .first()
            .map(|(v, _)| v.len())
            .ok_or_else(|| Error::invalid("distribution has no states"))?;
        if arity == 0 {
            return Err(Error::invalid("states must have at least one variable"));
        }
        let mut total = 0.0;
        for (v, p) in &states {
            if v.len() != arity {
                return Err(Error::invalid(format!(
                    "state {v:?} has {} variables, expected {arity}",
                    v.len()
                )));
            }
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::invalid(format!("mass {p} of state {v:?} is not a probability")));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { arity, states })
    }

    /// Equal mass on each listed state.
    pub fn uniform(states: Vec<Vec<i64>>) -> Result<Self> {
        let m = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|v| (v, m)).collect())
    }

    /// The stochastic XOR gate: X1, X2 fair coins and X3 = X1 xor X2.
    pub fn xor() -> Self {
        Self::uniform(vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])
            .expect("xor table is valid")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn states(&self) -> &[(Vec<i64>, f64)] {
        &self.states
    }

    /// Marginal masses over `dims`, keyed by the projected tuple.
    pub fn marginal(&self, dims: &[usize]) -> Result<BTreeMap<Vec<i64>, f64>> {
        if let Some(&bad) = dims.iter().find(|&&j| j >= self.arity) {
            return Err(Error::invalid(format!(
                "variable {bad} out of range for arity {}",
                self.arity
            )));
        }
        let mut out = BTreeMap::new();
        for (v, p) in &self.states {
            let key: Vec<i64> = dims.iter().map(|&j| v[j]).collect();
            *out.entry(key).or_insert(0.0) += p;
        }
        Ok(out)
    }

    /// Shannon entropy of the marginal over `dims`; zero for an empty set.
    pub fn entropy(&self, dims: &[usize], base: LogBase) -> Result<f64> {
        let h = self
            .marginal(dims)?
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * base.log(p))
            .sum::<f64>();
        // -0.0 from a single certain state reads badly in reports
        Ok(h + 0.0)
    }

    /// I(A; B) = H(A) + H(B) - H(A, B).
    pub fn mutual_information(&self, a: &[usize], b: &[usize], base: LogBase) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("mutual information needs two nonempty blocks"));
        }
        let joint: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.entropy(a, base)? + self.entropy(b, base)? - self.entropy(&joint, base)?)
    }
}

/// Exact TC, DTC, O, S and normalized O of a discrete distribution.
///
/// `k` is reported as 0 and `n` as the number of listed states.
pub fn discrete_summary(dist: &DiscreteDistribution, base: LogBase) -> Result<InfoSummary> {
    let d = dist.arity();
    let all: Vec<usize> = (0..d).collect();
    let h = dist.entropy(&all, base)?;
    let mut singles = 0.0;
    let mut residuals = 0.0;
    for i in 0..d {
        singles += dist.entropy(&[i], base)?;
        let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
        residuals += dist.entropy(&rest, base)?;
    }
    let tc = singles - h;
    let dtc = residuals - (d as f64 - 1.0) * h;
    Ok(InfoSummary::from_parts(tc, dtc, 0, dist.states().len(), base.units(), 0))
}
