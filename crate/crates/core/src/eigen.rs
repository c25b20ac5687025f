//! Spectral decomposition of h_F on a discrete distribution.
//!
//! Two independent routes: a dense symmetric eigensolve of the weighted
//! kernel matrix, and the tridiagonal difference-equation system
//! D_p g = λ L g with L the weighted path Laplacian of the support.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::dist::DiscreteDist;
use crate::kernel::population_kernel;
use crate::{Error, Result};

mod tql;

/// Relative cutoff separating the structural zero eigenvalue from the spectrum.
pub const TOL_ZERO: f64 = 1e-12;

/// Nonzero eigenvalues in nonincreasing order with their eigenfunctions
/// evaluated on the support, orthonormal under the distribution's weights.
#[derive(Clone, Debug, Serialize)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Vec<f64>>,
    dist: DiscreteDist,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Values g_k(z_i) for 0-based component index `k`.
    pub fn eigenfunction(&self, k: usize) -> &[f64] {
        &self.eigenfunctions[k]
    }

    pub fn eigenfunctions(&self) -> &[Vec<f64>] {
        &self.eigenfunctions
    }

    pub fn dist(&self) -> &DiscreteDist {
        &self.dist
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trace(&self) -> f64 {
        crate::sum::exact_sum(self.eigenvalues.iter().copied())
    }

    pub fn sum_sq(&self) -> f64 {
        crate::sum::exact_sum(self.eigenvalues.iter().map(|l| l * l))
    }

    /// Σ_k λ_k g_k(z_i) g_k(z_j).
    pub fn reconstruct(&self, i: usize, j: usize) -> f64 {
        crate::sum::exact_sum(self.eigenvalues.iter().zip(&self.eigenfunctions).map(|(l, g)| l * g[i] * g[j]))
    }

    /// Max over atoms of |λ(Lg)_i − p_i g_i| for each eigenpair, where L is
    /// the weighted path Laplacian of the support.
    pub fn difference_residuals(&self) -> Vec<f64> {
        let z = self.dist.support();
        let p = self.dist.probs();
        let k = z.len();
        let c: Vec<f64> = (1..k).map(|i| 1.0 / (z[i] - z[i - 1])).collect();
        self.eigenvalues
            .iter()
            .zip(&self.eigenfunctions)
            .map(|(&lambda, g)| {
                (0..k)
                    .map(|i| {
                        let mut lg = 0.0;
                        if i > 0 {
                            lg += c[i - 1] * (g[i] - g[i - 1]);
                        }
                        if i + 1 < k {
                            lg += c[i] * (g[i] - g[i + 1]);
                        }
                        (lambda * lg - p[i] * g[i]).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Support positions where g_k changes sign, by linear interpolation
    /// between neighbouring atoms.
    pub fn zero_crossings(&self, k: usize) -> Vec<f64> {
        let z = self.dist.support();
        let g = &self.eigenfunctions[k];
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = 1e-9 * scale;
        let mut out = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for (&zi, &gi) in z.iter().zip(g) {
            if gi.abs() <= tiny {
                continue;
            }
            if let Some((zp, gp)) = last {
                if gp.signum() != gi.signum() {
                    out.push(zp + (zi - zp) * gp / (gp - gi));
                }
            }
            last = Some((zi, gi));
        }
        out
    }

    /// Number of sign changes of g_k along the support.
    pub fn sign_changes(&self, k: usize) -> usize {
        self.zero_crossings(k).len()
    }
}

fn require_two_atoms(d: &DiscreteDist) -> Result<()> {
    if d.len() < 2 {
        return Err(Error::InvalidArgument(format!("eigensystem needs at least 2 support points, got {}", d.len())));
    }
    Ok(())
}

/// Sort pairs by eigenvalue (ties by first value of the canonical
/// eigenfunction), then package.
fn assemble(mut pairs: Vec<(f64, Vec<f64>)>, d: &DiscreteDist) -> Result<EigenSystem> {
    for (i, (_, g)) in pairs.iter_mut().enumerate() {
        canonicalize(g).ok_or(Error::ZeroEigenfunction(i))?;
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1[0].total_cmp(&a.1[0])));
    let (eigenvalues, eigenfunctions) = pairs.into_iter().unzip();
    Ok(EigenSystem { eigenvalues, eigenfunctions, dist: d.clone() })
}

/// Dense route: eigendecomposition of S = D_p^{1/2} M D_p^{1/2}.
pub fn eigensystem_dense(d: &DiscreteDist) -> Result<EigenSystem> {
    require_two_atoms(d)?;
    let k = d.len();
    let m = population_kernel(d);
    let sqrt_p: Vec<f64> = d.probs().iter().map(|p| p.sqrt()).collect();
    let s = DMatrix::from_fn(k, k, |i, j| {
        // Symmetrize exactly so the solver sees a symmetric input.
        let v = 0.5 * (m.get(i, j) + m.get(j, i));
        sqrt_p[i] * v * sqrt_p[j]
    });
    let eig = SymmetricEigen::new(s);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let pairs = (0..k)
        .filter(|&i| eig.eigenvalues[i] > TOL_ZERO * top)
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            (eig.eigenvalues[i], (0..k).map(|r| v[r] / sqrt_p[r]).collect())
        })
        .collect();
    assemble(pairs, d)
}

/// The symmetric tridiagonal matrix T = D_p^{-1/2} L D_p^{-1/2}, whose
/// nonzero eigenvalues are the reciprocals of the kernel eigenvalues.
fn scaled_laplacian(d: &DiscreteDist) -> Result<(Vec<f64>, Vec<f64>)> {
    let z = d.support();
    let p = d.probs();
    let k = z.len();
    let c: Vec<f64> = (1..k)
        .map(|i| {
            let gap = z[i] - z[i - 1];
            if gap > 0.0 {
                Ok(1.0 / gap)
            } else {
                Err(Error::DuplicateSupport(z[i]))
            }
        })
        .collect::<Result<_>>()?;
    let diag = (0..k)
        .map(|i| {
            let left = if i > 0 { c[i - 1] } else { 0.0 };
            let right = if i + 1 < k { c[i] } else { 0.0 };
            (left + right) / p[i]
        })
        .collect();
    let off = (0..k - 1).map(|i| -c[i] / (p[i] * p[i + 1]).sqrt()).collect();
    Ok((diag, off))
}

/// Index of the null eigenvalue (constant function) in an ascending spectrum.
fn null_index(theta: &[f64]) -> usize {
    (0..theta.len()).min_by(|&a, &b| theta[a].abs().total_cmp(&theta[b].abs())).unwrap_or(0)
}

/// Tridiagonal route: solve D_p g = λ L g by implicit QL on T.
pub fn eigensystem_tridiag(d: &DiscreteDist) -> Result<EigenSystem> {
    require_two_atoms(d)?;
    let (diag, off) = scaled_laplacian(d)?;
    let k = diag.len();
    let (theta, vectors) = tql::eigen(diag, off, true)?;
    let skip = null_index(&theta);
    let sqrt_p: Vec<f64> = d.probs().iter().map(|p| p.sqrt()).collect();
    let pairs = (0..k)
        .filter(|&i| i != skip)
        .map(|i| {
            let v = &vectors[i * k..(i + 1) * k];
            (1.0 / theta[i], v.iter().zip(&sqrt_p).map(|(a, s)| a / s).collect())
        })
        .collect();
    assemble(pairs, d)
}

/// Eigenvalues only, by the tridiagonal route in O(K²).
pub fn eigenvalues_tridiag(d: &DiscreteDist) -> Result<Vec<f64>> {
    require_two_atoms(d)?;
    let (diag, off) = scaled_laplacian(d)?;
    let (theta, _) = tql::eigen(diag, off, false)?;
    let skip = null_index(&theta);
    let mut lambda: Vec<f64> = theta.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, t)| 1.0 / t).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok(lambda)
}

/// Flip `g` so it is positive at its first entry exceeding 1e−9·max|g|.
/// Returns `None` for an all-zero vector.
fn canonicalize(g: &mut [f64]) -> Option<()> {
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale.is_nan() || scale <= 0.0 {
        return None;
    }
    let first = g.iter().find(|v| v.abs() > 1e-9 * scale)?;
    if *first < 0.0 {
        g.iter_mut().for_each(|v| *v = -*v);
    }
    Some(())
}

/// Apply the sign convention to every eigenfunction. Idempotent.
pub fn canonicalize_signs(mut sys: EigenSystem) -> Result<EigenSystem> {
    for (i, g) in sys.eigenfunctions.iter_mut().enumerate() {
        canonicalize(g).ok_or(Error::ZeroEigenfunction(i))?;
    }
    Ok(sys)
}

impl EigenSystem {
    /// Build a system from raw parts without re-solving; signs are not touched.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenfunctions: Vec<Vec<f64>>, dist: DiscreteDist) -> Result<Self> {
        if eigenvalues.len() != eigenfunctions.len() || eigenfunctions.iter().any(|g| g.len() != dist.len()) {
            return Err(Error::InvalidArgument("eigensystem shape mismatch".into()));
        }
        Ok(Self { eigenvalues, eigenfunctions, dist })
    }
}

/// Families with known eigensystems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedFormFamily {
    Uniform,
    Logistic,
    /// P(Z = 0) = p, P(Z = 1) = 1 − p.
    Dichotomous(f64),
}

/// A closed-form eigenpair. Uniform and logistic eigenfunctions are
/// expressed on the probability scale u = F(z); the dichotomous one on z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormPair {
    pub family: ClosedFormFamily,
    pub k: usize,
    pub eigenvalue: f64,
}

impl ClosedFormPair {
    pub fn eval(&self, arg: f64) -> f64 {
        match self.family {
            ClosedFormFamily::Uniform => std::f64::consts::SQRT_2 * (self.k as f64 * std::f64::consts::PI * arg).cos(),
            ClosedFormFamily::Logistic => ((2 * self.k + 1) as f64).sqrt() * legendre(self.k, 2.0 * arg - 1.0),
            ClosedFormFamily::Dichotomous(p) => (arg - (1.0 - p)) / (p * (1.0 - p)).sqrt(),
        }
    }
}

/// Closed-form k-th eigenpair (k ≥ 1).
pub fn closed_form(family: ClosedFormFamily, k: usize) -> Result<ClosedFormPair> {
    if k == 0 {
        return Err(Error::InvalidArgument("eigen index starts at 1".into()));
    }
    let kf = k as f64;
    let eigenvalue = match family {
        ClosedFormFamily::Uniform => 1.0 / (kf * kf * std::f64::consts::PI * std::f64::consts::PI),
        ClosedFormFamily::Logistic => 1.0 / (kf * (kf + 1.0)),
        ClosedFormFamily::Dichotomous(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!("dichotomous p = {p} outside (0, 1)")));
            }
            if k > 1 {
                return Err(Error::ComponentOutOfRange { k, l: 0 });
            }
            p * (1.0 - p)
        }
    };
    Ok(ClosedFormPair { family, k, eigenvalue })
}

/// Legendre polynomial P_k(x) by the three-term recurrence.
pub fn legendre(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
