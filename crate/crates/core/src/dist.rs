//! Univariate distributions under the mid-point CDF convention
//! F(x) = P(Z < x) + ½ P(Z = x).

use std::fmt;
use std::str::FromStr;

use libm::erfc;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::{Error, Result};

/// Step indicator: 1 if `x < y`, ½ if equal, 0 if `x > y`.
pub fn gamma_ind(x: f64, y: f64) -> f64 {
    if x < y {
        1.0
    } else if x == y {
        0.5
    } else {
        0.0
    }
}

/// Mid-point empirical CDF of `values` at `x`.
pub fn mid_cdf(values: &[f64], x: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let (below, equal) = values.iter().fold((0usize, 0usize), |(b, e), &v| {
        if v < x {
            (b + 1, e)
        } else if v == x {
            (b, e + 1)
        } else {
            (b, e)
        }
    });
    Ok((below as f64 + 0.5 * equal as f64) / values.len() as f64)
}

/// Sorted copy of a sample, evaluating the mid-point empirical CDF in O(log n).
#[derive(Clone, Debug)]
pub struct MidCdf {
    sorted: Vec<f64>,
}

impl MidCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < x);
        let not_above = self.sorted.partition_point(|&v| v <= x);
        (below as f64 + 0.5 * (not_above - below) as f64) / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// Finite-support distribution with strictly increasing atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDist {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySample);
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if support.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite support point".into()));
        }
        for w in support.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateSupport(w[0]));
            }
            if w[0] > w[1] {
                return Err(Error::InvalidDistribution("support not increasing".into()));
            }
        }
        if probs.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::InvalidDistribution("probabilities must be positive".into()));
        }
        let total = crate::sum::exact_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { support, probs })
    }

    /// Empirical distribution of a sample, ties merged into single atoms.
    pub fn empirical(values: &[f64]) -> Result<Self> {
        let (support, counts, _) = atoms(values)?;
        let n = values.len() as f64;
        let probs = counts.iter().map(|&c| c as f64 / n).collect();
        Self::new_unchecked_sum(support, probs)
    }

    /// Two-point distribution on {0, 1} with P(Z = 0) = p.
    pub fn dichotomous(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("dichotomous p = {p} outside (0, 1)")));
        }
        Self::new(vec![0.0, 1.0], vec![p, 1.0 - p])
    }

    /// Equal weights on the given strictly increasing support.
    pub fn equiprobable(support: Vec<f64>) -> Result<Self> {
        let k = support.len();
        if k == 0 {
            return Err(Error::EmptySample);
        }
        Self::new(support, vec![1.0 / k as f64; k])
    }

    // Counts over n can miss 1 by a few ulps for large n; the atoms are valid by construction.
    fn new_unchecked_sum(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::sum::exact_sum(self.support.iter().zip(&self.probs).map(|(z, p)| z * p))
    }

    /// Mid-point CDF at an arbitrary real.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = crate::sum::ExactSum::new();
        for (&z, &p) in self.support.iter().zip(&self.probs) {
            if z < x {
                acc.add(p);
            } else if z == x {
                acc.add(0.5 * p);
            } else {
                break;
            }
        }
        acc.value()
    }

    /// Mid-point CDF evaluated at every atom: Σ_{j<i} p_j + ½ p_i.
    pub fn mid_cdf_at_atoms(&self) -> Vec<f64> {
        let mut below = 0.0;
        self.probs
            .iter()
            .map(|&p| {
                let v = below + 0.5 * p;
                below += p;
                v
            })
            .collect()
    }
}

/// Distinct sorted values of a sample, their counts and, for each
/// observation, the index of its atom.
pub fn atoms(values: &[f64]) -> Result<(Vec<f64>, Vec<usize>, Vec<usize>)> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut support = Vec::new();
    let mut counts = Vec::new();
    let mut index = vec![0usize; values.len()];
    for &i in &order {
        let v = values[i];
        // -0.0 and 0.0 share an atom.
        if support.last().is_none_or(|&last: &f64| last != v) {
            support.push(v);
            counts.push(0);
        }
        *counts.last_mut().unwrap() += 1;
        index[i] = support.len() - 1;
    }
    Ok((support, counts, index))
}

/// Bivariate distribution on a rectangular grid of row and column atoms.
///
/// Cells may carry zero mass; every row and column margin must be positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDist {
    rows: Vec<f64>,
    cols: Vec<f64>,
    probs: Vec<f64>,
}

impl JointDist {
    /// `probs` is row-major with `rows.len() * cols.len()` entries.
    pub fn new(rows: Vec<f64>, cols: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptySample);
        }
        if probs.len() != rows.len() * cols.len() {
            return Err(Error::InvalidDistribution("table shape mismatch".into()));
        }
        if probs.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidDistribution("negative cell probability".into()));
        }
        let j = cols.len();
        let row_m: Vec<f64> = probs.chunks(j).map(|r| crate::sum::exact_sum(r.iter().copied())).collect();
        let col_m: Vec<f64> = (0..j).map(|b| crate::sum::exact_sum(probs.iter().skip(b).step_by(j).copied())).collect();
        // Validates ordering, positivity of margins and total mass.
        DiscreteDist::new(rows.clone(), row_m)?;
        DiscreteDist::new(cols.clone(), col_m)?;
        Ok(Self { rows, cols, probs })
    }

    /// Table of nonnegative counts, normalized to probabilities.
    pub fn from_counts(rows: Vec<f64>, cols: Vec<f64>, counts: &[f64]) -> Result<Self> {
        let total = crate::sum::exact_sum(counts.iter().copied());
        if total.is_nan() || total <= 0.0 {
            return Err(Error::EmptySample);
        }
        Self::new(rows, cols, counts.iter().map(|c| c / total).collect())
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.cols.len() + b]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn row_margin(&self) -> DiscreteDist {
        let j = self.cols.len();
        let p = self.probs.chunks(j).map(|r| crate::sum::exact_sum(r.iter().copied())).collect();
        DiscreteDist { support: self.rows.clone(), probs: p }
    }

    pub fn col_margin(&self) -> DiscreteDist {
        let j = self.cols.len();
        let p = (0..j).map(|b| crate::sum::exact_sum(self.probs.iter().skip(b).step_by(j).copied())).collect();
        DiscreteDist { support: self.cols.clone(), probs: p }
    }
}

/// The five continuous reference families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Logistic,
    Normal,
    Exponential,
    Laplace,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Uniform, Family::Logistic, Family::Normal, Family::Exponential, Family::Laplace];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Logistic => "logistic",
            Family::Normal => "normal",
            Family::Exponential => "exponential",
            Family::Laplace => "laplace",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Family::Uniform),
            "logistic" => Ok(Family::Logistic),
            "normal" | "gaussian" => Ok(Family::Normal),
            "exponential" => Ok(Family::Exponential),
            "laplace" => Ok(Family::Laplace),
            other => Err(Error::UnsupportedFamily(other.to_string())),
        }
    }
}

/// A member of one of the reference families with location and scale.
///
/// Defaults are uniform[0,1], logistic(0,1), N(0,1), exponential with rate 1
/// and Laplace(0,1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedDist {
    pub family: Family,
    pub location: f64,
    pub scale: f64,
}

impl NamedDist {
    pub fn standard(family: Family) -> Self {
        Self { family, location: 0.0, scale: 1.0 }
    }

    pub fn new(family: Family, location: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) || !location.is_finite() {
            return Err(Error::InvalidArgument(format!("location {location} / scale {scale} invalid")));
        }
        Ok(Self { family, location, scale })
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        match self.family {
            Family::Uniform => z.clamp(0.0, 1.0),
            Family::Logistic => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            Family::Normal => 0.5 * erfc(-z / std::f64::consts::SQRT_2),
            Family::Exponential => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-z).exp_m1()
                }
            }
            Family::Laplace => {
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        let d = match self.family {
            Family::Uniform => {
                if (0.0..=1.0).contains(&z) {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Logistic => {
                let e = (-z.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Family::Normal => (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            Family::Exponential => {
                if z < 0.0 {
                    0.0
                } else {
                    (-z).exp()
                }
            }
            Family::Laplace => 0.5 * (-z.abs()).exp(),
        };
        d / self.scale
    }

    /// Inverse CDF on (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        let z = match self.family {
            Family::Uniform => u,
            Family::Logistic => (u / (1.0 - u)).ln(),
            Family::Normal => -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u),
            Family::Exponential => -(-u).ln_1p(),
            Family::Laplace => {
                if u < 0.5 {
                    (2.0 * u).ln()
                } else {
                    -(2.0 * (1.0 - u)).ln()
                }
            }
        };
        self.location + self.scale * z
    }

    pub fn mean(&self) -> f64 {
        let m = match self.family {
            Family::Uniform => 0.5,
            Family::Exponential => 1.0,
            _ => 0.0,
        };
        self.location + self.scale * m
    }

    /// ∫ F(x)[1 − F(x)] dx, half of Gini's mean difference.
    pub fn half_gini(&self) -> f64 {
        let g = match self.family {
            Family::Uniform => 1.0 / 6.0,
            Family::Logistic => 1.0,
            Family::Normal => 1.0 / std::f64::consts::PI.sqrt(),
            Family::Exponential => 0.5,
            Family::Laplace => 0.75,
        };
        g * self.scale
    }
}

/// Equal-probability grid: atoms F⁻¹((i − ½)/t), each with mass 1/t.
pub fn discretize(dist: &NamedDist, t: usize) -> Result<DiscreteDist> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("discretization size t = {t} must be at least 2")));
    }
    let tf = t as f64;
    let support: Vec<f64> = (1..=t).map(|i| dist.quantile((i as f64 - 0.5) / tf)).collect();
    DiscreteDist::new(support, vec![1.0 / tf; t])
}
