//! Estimators of κ and ρ*, empirical component correlations, and table
//! reconstruction from components.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{DiscreteDist, JointDist};
use crate::eigen::{eigensystem_dense, EigenSystem};
use crate::kernel::{atom_kernel, AtomKernel, Centering};
use crate::sum::ExactSum;
use crate::{Error, Result};

/// Paired observations (x_i, y_i), optionally with category labels for the
/// distinct values of a margin (in increasing order of value).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
    x_categories: Option<Vec<String>>,
    y_categories: Option<Vec<String>>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!("margins have different lengths {} and {}", x.len(), y.len())));
        }
        if x.len() < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 pairs, got {}", x.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite observation".into()));
        }
        Ok(Self { x, y, x_categories: None, y_categories: None })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }

    pub fn with_categories(mut self, x: Option<Vec<String>>, y: Option<Vec<String>>) -> Self {
        self.x_categories = x;
        self.y_categories = y;
        self
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_categories(&self) -> Option<&[String]> {
        self.x_categories.as_deref()
    }

    pub fn y_categories(&self) -> Option<&[String]> {
        self.y_categories.as_deref()
    }

    pub fn is_categorical(&self) -> bool {
        self.x_categories.is_some() && self.y_categories.is_some()
    }

    pub fn swap(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
            x_categories: self.y_categories.clone(),
            y_categories: self.x_categories.clone(),
        }
    }

    /// Same sample with margins replaced, keeping category labels.
    pub fn with_values(&self, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Ok(Self::new(x, y)?.with_categories(self.x_categories.clone(), self.y_categories.clone()))
    }
}

/// V-statistic (plug-in) or U-statistic estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    V,
    U,
}

impl Mode {
    pub fn centering(self) -> Centering {
        match self {
            Mode::V => Centering::VCentered,
            Mode::U => Centering::UCentered,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v" => Ok(Mode::V),
            "u" => Ok(Mode::U),
            other => Err(Error::InvalidArgument(format!("unknown estimator mode {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaEstimate {
    pub value: f64,
    /// A margin is constant; `value` is then 0.
    pub degenerate: bool,
}

/// Occupied cells (atom of x, atom of y, count) of a pairing.
pub(crate) fn cells(ix: &[usize], iy: &[usize], kx: usize, ky: usize) -> Vec<(usize, usize, f64)> {
    if kx.saturating_mul(ky) <= 4 * ix.len().max(1024) {
        let mut counts = vec![0u32; kx * ky];
        for (&a, &b) in ix.iter().zip(iy) {
            counts[a * ky + b] += 1;
        }
        counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i / ky, i % ky, c as f64)).collect()
    } else {
        let mut pairs: Vec<(usize, usize)> = ix.iter().copied().zip(iy.iter().copied()).collect();
        pairs.sort_unstable();
        let mut out: Vec<(usize, usize, f64)> = Vec::new();
        for (a, b) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += 1.0,
                _ => out.push((a, b, 1.0)),
            }
        }
        out
    }
}

/// Σ over ordered observation pairs of H1·H2 (excluding i = j in U mode),
/// divided by n² (V) or n(n − 1) (U). Exact summation makes the result
/// independent of observation order.
pub(crate) fn kappa_from_cells(h1: &AtomKernel, h2: &AtomKernel, cells: &[(usize, usize, f64)], mode: Mode) -> f64 {
    let n = h1.n() as f64;
    let partials: Vec<ExactSum> = cells
        .par_iter()
        .map(|&(a, b, c)| {
            let r1 = h1.row(a);
            let r2 = h2.row(b);
            let mut acc = ExactSum::new();
            for &(a2, b2, c2) in cells {
                let mut coef = c * c2;
                if mode == Mode::U && a2 == a && b2 == b {
                    coef = c * (c - 1.0);
                    if coef == 0.0 {
                        continue;
                    }
                }
                acc.add_multiple(coef, r1[a2] * r2[b2]);
            }
            acc
        })
        .collect();
    let mut total = ExactSum::new();
    for p in &partials {
        total.merge(p);
    }
    let denom = match mode {
        Mode::V => n * n,
        Mode::U => n * (n - 1.0),
    };
    total.value() / denom
}

/// κ estimate from precomputed margin kernels and the pairing of atoms.
pub fn kappa_from_kernels(h1: &AtomKernel, h2: &AtomKernel, mode: Mode) -> KappaEstimate {
    if h1.is_degenerate() || h2.is_degenerate() {
        return KappaEstimate { value: 0.0, degenerate: true };
    }
    let c = cells(h1.index(), h2.index(), h1.n_atoms(), h2.n_atoms());
    KappaEstimate { value: kappa_from_cells(h1, h2, &c, mode), degenerate: false }
}

/// κ̂ (mode V) or κ̃ (mode U).
pub fn estimate_kappa(s: &PairedSample, mode: Mode) -> Result<KappaEstimate> {
    let h1 = atom_kernel(s.x(), mode.centering())?;
    let h2 = atom_kernel(s.y(), mode.centering())?;
    Ok(kappa_from_kernels(&h1, &h2, mode))
}

/// ρ* from the three κ estimates; V results are clamped to [0, 1] for round-off.
pub fn rho_from_kappas(kxy: f64, kxx: f64, kyy: f64, mode: Mode) -> Result<f64> {
    let denom = (kxx * kyy).sqrt();
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::constant_margin());
    }
    let r = kxy / denom;
    Ok(match mode {
        Mode::V => r.clamp(0.0, 1.0),
        Mode::U => r,
    })
}

/// Margin kernels plus the three κ values needed for ρ*.
pub(crate) struct KappaTriple {
    pub h1: AtomKernel,
    pub h2: AtomKernel,
    pub kxy: f64,
    pub kxx: f64,
    pub kyy: f64,
}

pub(crate) fn kappa_triple(s: &PairedSample, mode: Mode) -> Result<KappaTriple> {
    let h1 = atom_kernel(s.x(), mode.centering())?;
    let h2 = atom_kernel(s.y(), mode.centering())?;
    if h1.is_degenerate() || h2.is_degenerate() {
        return Err(Error::constant_margin());
    }
    let kxy = kappa_from_kernels(&h1, &h2, mode).value;
    let kxx = kappa_from_kernels(&h1, &h1, mode).value;
    let kyy = kappa_from_kernels(&h2, &h2, mode).value;
    Ok(KappaTriple { h1, h2, kxy, kxx, kyy })
}

/// ρ̂* (mode V) or ρ̃* (mode U).
pub fn rho_star(s: &PairedSample, mode: Mode) -> Result<f64> {
    let t = kappa_triple(s, mode)?;
    rho_from_kappas(t.kxy, t.kxx, t.kyy, mode)
}

/// One component correlation ρ̂_kl with its eigenvalues (k, l are 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Component {
    pub k: usize,
    pub l: usize,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
}

/// Marginal empirical eigensystems with the component correlations.
#[derive(Clone, Debug, Serialize)]
pub struct ComponentAnalysis {
    pub x_system: EigenSystem,
    pub y_system: EigenSystem,
    /// Atom index of each observation in the x and y systems.
    #[serde(skip)]
    pub x_index: Vec<usize>,
    #[serde(skip)]
    pub y_index: Vec<usize>,
    pub components: Vec<Component>,
    pub warnings: Vec<String>,
}

impl ComponentAnalysis {
    pub fn component(&self, k: usize, l: usize) -> Option<&Component> {
        self.components.iter().find(|c| c.k == k && c.l == l)
    }

    /// ĝ_{1k}(x_i) for every observation (k is 1-based).
    pub fn x_scores(&self, k: usize) -> Vec<f64> {
        let g = self.x_system.eigenfunction(k - 1);
        self.x_index.iter().map(|&a| g[a]).collect()
    }

    pub fn y_scores(&self, l: usize) -> Vec<f64> {
        let g = self.y_system.eigenfunction(l - 1);
        self.y_index.iter().map(|&b| g[b]).collect()
    }
}

/// Empirical eigensystem of one margin with the atom index of each observation.
pub fn marginal_system(values: &[f64]) -> Result<(EigenSystem, Vec<usize>)> {
    let (_, _, index) = crate::dist::atoms(values)?;
    let d = DiscreteDist::empirical(values)?;
    if d.len() < 2 {
        return Err(Error::constant_margin());
    }
    Ok((eigensystem_dense(&d)?, index))
}

/// ρ̂_kl = n⁻¹ Σ_i ĝ_{1k}(x_i) ĝ_{2l}(y_i) for k ≤ max_k, l ≤ max_l
/// (`None` = full spectrum).
pub fn component_correlations(
    s: &PairedSample,
    max_k: Option<usize>,
    max_l: Option<usize>,
) -> Result<ComponentAnalysis> {
    let (xs, xi) = marginal_system(s.x())?;
    let (ys, yi) = marginal_system(s.y())?;
    let mut warnings = Vec::new();
    let mut limit = |req: Option<usize>, avail: usize, name: &str| match req {
        Some(r) if r > avail => {
            warnings.push(format!("{name} truncated from {r} to the {avail} available eigenvalues"));
            avail
        }
        Some(r) => r,
        None => avail,
    };
    let kk = limit(max_k, xs.len(), "max_k");
    let ll = limit(max_l, ys.len(), "max_l");
    let cells = cells(&xi, &yi, xs.dist().len(), ys.dist().len());
    let n = s.len() as f64;
    let (xr, yr, cr) = (&xs, &ys, &cells);
    let components = (1..=kk)
        .into_par_iter()
        .flat_map_iter(move |k| {
            let (xs, ys, cells) = (xr, yr, cr);
            let g1 = xs.eigenfunction(k - 1);
            (1..=ll).map(move |l| {
                let g2 = ys.eigenfunction(l - 1);
                let mut acc = ExactSum::new();
                for &(a, b, c) in cells {
                    acc.add_multiple(c, g1[a] * g2[b]);
                }
                Component { k, l, lambda: xs.eigenvalues()[k - 1], mu: ys.eigenvalues()[l - 1], rho: acc.value() / n }
            })
        })
        .collect();
    Ok(ComponentAnalysis { x_system: xs, y_system: ys, x_index: xi, y_index: yi, components, warnings })
}

/// Summary of dependence in a paired sample.
#[derive(Clone, Debug, Serialize)]
pub struct DependenceReport {
    pub n: usize,
    pub kappa_v: f64,
    pub kappa_u: f64,
    pub rho_star_v: f64,
    pub rho_star_u: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub components: Vec<Component>,
    pub warnings: Vec<String>,
}

pub fn dependence_report(s: &PairedSample, max_k: Option<usize>, max_l: Option<usize>) -> Result<DependenceReport> {
    let v = kappa_triple(s, Mode::V)?;
    let u = kappa_triple(s, Mode::U)?;
    let ca = component_correlations(s, max_k, max_l)?;
    Ok(DependenceReport {
        n: s.len(),
        kappa_v: v.kxy,
        kappa_u: u.kxy,
        rho_star_v: rho_from_kappas(v.kxy, v.kxx, v.kyy, Mode::V)?,
        rho_star_u: rho_from_kappas(u.kxy, u.kxx, u.kyy, Mode::U)?,
        lambda: ca.x_system.eigenvalues().to_vec(),
        mu: ca.y_system.eigenvalues().to_vec(),
        components: ca.components,
        warnings: ca.warnings,
    })
}

/// Cross-classification of counts with ordinal scores and labels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContingencyTable {
    pub row_scores: Vec<f64>,
    pub col_scores: Vec<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Row-major counts.
    pub counts: Vec<u64>,
}

impl ContingencyTable {
    /// Table with scores 1..I and 1..J.
    pub fn new(n_rows: usize, n_cols: usize, counts: Vec<u64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 || counts.len() != n_rows * n_cols {
            return Err(Error::InvalidArgument("table shape mismatch".into()));
        }
        Ok(Self {
            row_scores: (1..=n_rows).map(|i| i as f64).collect(),
            col_scores: (1..=n_cols).map(|j| j as f64).collect(),
            row_labels: (1..=n_rows).map(|i| i.to_string()).collect(),
            col_labels: (1..=n_cols).map(|j| j.to_string()).collect(),
            counts,
        })
    }

    pub fn with_labels(mut self, rows: Vec<String>, cols: Vec<String>) -> Result<Self> {
        if rows.len() != self.row_scores.len() || cols.len() != self.col_scores.len() {
            return Err(Error::InvalidArgument("label count mismatch".into()));
        }
        self.row_labels = rows;
        self.col_labels = cols;
        Ok(self)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_scores.len(), self.col_scores.len())
    }

    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.col_scores.len() + b]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// One observation per counted unit, in row-major cell order. Rows or
    /// columns with zero total do not appear in the sample.
    pub fn to_sample(&self) -> Result<PairedSample> {
        let (ni, nj) = self.shape();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for a in 0..ni {
            for b in 0..nj {
                for _ in 0..self.count(a, b) {
                    x.push(self.row_scores[a]);
                    y.push(self.col_scores[b]);
                }
            }
        }
        let occupied = |scores: &[f64], labels: &[String], vals: &[f64]| -> Vec<String> {
            scores.iter().zip(labels).filter(|(s, _)| vals.contains(s)).map(|(_, l)| l.clone()).collect()
        };
        let xl = occupied(&self.row_scores, &self.row_labels, &x);
        let yl = occupied(&self.col_scores, &self.col_labels, &y);
        Ok(PairedSample::new(x, y)?.with_categories(Some(xl), Some(yl)))
    }

    pub fn to_joint(&self) -> Result<JointDist> {
        let c: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        JointDist::from_counts(self.row_scores.clone(), self.col_scores.clone(), &c)
    }
}

/// A probability table rebuilt from marginals and component correlations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructedTable {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row-major cell probabilities.
    pub probs: Vec<f64>,
    /// False when some entry is below −1e−9.
    pub is_distribution: bool,
}

/// p_ab = p_a q_b (1 + Σ ρ_kl g_{1k}(a) g_{2l}(b)); components are (k, l, ρ)
/// with 1-based indices.
pub fn reconstruct_table(
    marg1: &DiscreteDist,
    marg2: &DiscreteDist,
    components: &[(usize, usize, f64)],
) -> Result<ReconstructedTable> {
    let sx = if marg1.len() >= 2 { Some(eigensystem_dense(marg1)?) } else { None };
    let sy = if marg2.len() >= 2 { Some(eigensystem_dense(marg2)?) } else { None };
    for &(k, l, rho) in components {
        let kx = sx.as_ref().map_or(0, |s| s.len());
        let ly = sy.as_ref().map_or(0, |s| s.len());
        if k == 0 || l == 0 || k > kx || l > ly {
            return Err(Error::ComponentOutOfRange { k, l });
        }
        if !rho.is_finite() {
            return Err(Error::InvalidArgument("non-finite component correlation".into()));
        }
    }
    let (ni, nj) = (marg1.len(), marg2.len());
    let mut probs = Vec::with_capacity(ni * nj);
    for a in 0..ni {
        for b in 0..nj {
            let mut acc = ExactSum::new();
            acc.add(1.0);
            for &(k, l, rho) in components {
                let g1 = sx.as_ref().unwrap().eigenfunction(k - 1)[a];
                let g2 = sy.as_ref().unwrap().eigenfunction(l - 1)[b];
                acc.add(rho * g1 * g2);
            }
            probs.push(marg1.probs()[a] * marg2.probs()[b] * acc.value());
        }
    }
    let is_distribution = probs.iter().all(|&p| p >= -1e-9);
    Ok(ReconstructedTable { n_rows: ni, n_cols: nj, probs, is_distribution })
}
