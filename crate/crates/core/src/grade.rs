//! Grade (rank) versions of κ and ρ*, K-sample Cramér–von Mises type
//! statistics and the φ-weight functions.
//!
//! A grade version replaces each margin by K⁻¹(F̂(x)) for a target
//! distribution K and then applies the ordinary estimators.

use serde::Serialize;

use crate::dist::{atoms, DiscreteDist, Family, MidCdf, NamedDist};
use crate::estimate::PairedSample;
use crate::kernel::population_kernel;
use crate::sum::ExactSum;
use crate::{Error, Result};

/// Target scale K for a grade transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradeScale {
    pub dist: NamedDist,
}

impl GradeScale {
    pub fn new(family: Family) -> Self {
        Self { dist: NamedDist::standard(family) }
    }

    pub fn uniform() -> Self {
        Self::new(Family::Uniform)
    }

    pub fn family(&self) -> Family {
        self.dist.family
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.dist.quantile(u)
    }

    /// k(K⁻¹(u)), the density at the u-quantile.
    pub fn density_at_quantile(&self, u: f64) -> f64 {
        self.dist.pdf(self.dist.quantile(u))
    }
}

/// K⁻¹ ∘ F̂ applied to each value, F̂ the mid-point empirical CDF.
pub fn grade_values(values: &[f64], scale: &GradeScale) -> Result<Vec<f64>> {
    let cdf = MidCdf::new(values)?;
    Ok(values.iter().map(|&v| scale.quantile(cdf.eval(v))).collect())
}

/// Grade transform of both margins; category labels are kept.
pub fn grade_transform(s: &PairedSample, k1: &GradeScale, k2: &GradeScale) -> Result<PairedSample> {
    s.with_values(grade_values(s.x(), k1)?, grade_values(s.y(), k2)?)
}

/// Observations in K groups, group k carrying the score c_k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KSampleData {
    scores: Vec<f64>,
    groups: Vec<Vec<f64>>,
}

impl KSampleData {
    pub fn new(scores: Vec<f64>, groups: Vec<Vec<f64>>) -> Result<Self> {
        if scores.len() != groups.len() {
            return Err(Error::InvalidArgument("one score per group required".into()));
        }
        let occupied = groups.iter().filter(|g| !g.is_empty()).count();
        if occupied < 2 {
            return Err(Error::InvalidArgument("at least two nonempty groups required".into()));
        }
        if groups.iter().flatten().chain(&scores).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite value".into()));
        }
        let used: Vec<f64> = scores.iter().zip(&groups).filter(|(_, g)| !g.is_empty()).map(|(s, _)| *s).collect();
        if used.iter().all(|&s| s == used[0]) {
            return Err(Error::DegenerateMargin("group scores are constant".into()));
        }
        Ok(Self { scores, groups })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn groups(&self) -> &[Vec<f64>] {
        &self.groups
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// The same data as (score, observation) pairs.
    pub fn to_sample(&self) -> Result<PairedSample> {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (s, g) in self.scores.iter().zip(&self.groups) {
            for &v in g {
                x.push(*s);
                y.push(v);
            }
        }
        PairedSample::new(x, y)
    }
}

/// κ = Σ_{i,j} p_i p_j h_F(c_i, c_j) ∫[G_i − F₂][G_j − F₂] dy with exact
/// step-function integrals. With a grade scale the integral is taken in
/// the coordinate K⁻¹(F̂₂(y)).
pub fn ksample_kappa(d: &KSampleData, grade: Option<&GradeScale>) -> Result<f64> {
    let groups: Vec<(f64, &Vec<f64>)> =
        d.scores.iter().copied().zip(&d.groups).filter(|(_, g)| !g.is_empty()).collect();
    let total = d.total();
    let nf = total as f64;
    let p: Vec<f64> = groups.iter().map(|(_, g)| g.len() as f64 / nf).collect();

    // Kernel of the score distribution, evaluated between groups.
    let score_values: Vec<f64> = groups.iter().flat_map(|(s, g)| std::iter::repeat_n(*s, g.len())).collect();
    let score_dist = DiscreteDist::empirical(&score_values)?;
    let m = population_kernel(&score_dist);
    let atom_of = |s: f64| score_dist.support().iter().position(|&z| z == s).unwrap();
    let gi: Vec<usize> = groups.iter().map(|(s, _)| atom_of(*s)).collect();

    // Pooled response atoms and cumulative counts per group.
    let pooled: Vec<f64> = groups.iter().flat_map(|(_, g)| g.iter().copied()).collect();
    let (ys, _, _) = atoms(&pooled)?;
    let coord: Vec<f64> = match grade {
        None => ys.clone(),
        Some(k) => {
            let cdf = MidCdf::new(&pooled)?;
            ys.iter().map(|&y| k.quantile(cdf.eval(y))).collect()
        }
    };
    let mut cum: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
    for (_, g) in &groups {
        let mut counts = vec![0usize; ys.len()];
        for v in g.iter() {
            let a = ys.partition_point(|&z| z < *v);
            counts[a] += 1;
        }
        let mut run = 0;
        cum.push(
            counts
                .iter()
                .map(|c| {
                    run += c;
                    run
                })
                .collect(),
        );
    }

    let mut acc = ExactSum::new();
    for interval in 0..ys.len().saturating_sub(1) {
        let width = coord[interval + 1] - coord[interval];
        let pooled_cum: usize = cum.iter().map(|c| c[interval]).sum();
        let f2 = pooled_cum as f64 / nf;
        let dev: Vec<f64> =
            groups.iter().enumerate().map(|(i, (_, g))| cum[i][interval] as f64 / g.len() as f64 - f2).collect();
        for i in 0..groups.len() {
            for j in 0..groups.len() {
                acc.add(p[i] * p[j] * m.get(gi[i], gi[j]) * dev[i] * dev[j] * width);
            }
        }
    }
    Ok(acc.value())
}

/// The φ-weight w(u) = u(1 − u)/k(K⁻¹(u)) and its normalization by ∫₀¹ w.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiWeight {
    pub w: f64,
    pub normalized: f64,
}

pub fn phi_weight(k: &GradeScale, u: f64) -> Result<PhiWeight> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!("u = {u} outside (0, 1)")));
    }
    let w = u * (1.0 - u) / k.density_at_quantile(u);
    // ∫₀¹ w(u) du = ∫ K(x)[1 − K(x)] dx.
    Ok(PhiWeight { w, normalized: w / k.dist.half_gini() })
}

/// φ(x, y): the absolute correlation of the 2×2 table obtained by cutting
/// the sample at (x, y), with mid-point empirical CDFs.
pub fn phi_at_cut(s: &PairedSample, x: f64, y: f64) -> Result<f64> {
    let n = s.len() as f64;
    let gamma = crate::dist::gamma_ind;
    let mut f12 = ExactSum::new();
    let mut f1 = ExactSum::new();
    let mut f2 = ExactSum::new();
    for (&xi, &yi) in s.x().iter().zip(s.y()) {
        let a = gamma(xi, x);
        let b = gamma(yi, y);
        f12.add(a * b);
        f1.add(a);
        f2.add(b);
    }
    let (f12, f1, f2) = (f12.value() / n, f1.value() / n, f2.value() / n);
    if !(f1 > 0.0 && f1 < 1.0 && f2 > 0.0 && f2 < 1.0) {
        return Err(Error::DegenerateCollapse { x, y });
    }
    Ok((f12 - f1 * f2).abs() / (f1 * (1.0 - f1) * f2 * (1.0 - f2)).sqrt())
}
