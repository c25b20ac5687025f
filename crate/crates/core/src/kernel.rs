//! The kernel h_F: absolute differences doubly centered under a distribution.
//!
//! For a distribution F,
//! h_F(x, y) = −½ E(|x − y| − |x − Z₂| − |Z₁ − y| + |Z₁ − Z₂|),
//! equivalently ∫[γ(x,w) − F(w)][γ(y,w) − F(w)] dw.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDist, JointDist};
use crate::sum::{exact_sum, ExactSum};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Centered under the probabilities of a discrete distribution.
    Population,
    /// Centered under the empirical distribution (V-statistic).
    VCentered,
    /// Centering terms inflated by n/(n − 1) (U-statistic).
    UCentered,
}

/// Symmetric matrix of kernel values, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CenteredKernel {
    n: usize,
    centering: Centering,
    data: Vec<f64>,
}

impl CenteredKernel {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// True when every entry is exactly zero (a constant margin).
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}

/// Build the doubly centered matrix from points, centering weights and an
/// inflation factor on the centering terms.
fn double_center(points: &[f64], weights: &[f64], factor: f64, centering: Centering) -> CenteredKernel {
    let n = points.len();
    let row_mean: Vec<f64> = points
        .par_iter()
        .map(|&zi| exact_sum(points.iter().zip(weights).map(|(&zj, &w)| w * (zi - zj).abs())))
        .collect();
    let grand = exact_sum(row_mean.iter().zip(weights).map(|(a, w)| a * w));
    let fb = factor * grand;
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let ai = row_mean[i];
        for (j, out) in row.iter_mut().enumerate() {
            // Written so that (i, j) and (j, i) round identically.
            let d = (points[i] - points[j]).abs();
            *out = -0.5 * ((d + fb) - factor * (ai + row_mean[j]));
        }
    });
    CenteredKernel { n, centering, data }
}

/// h_F on the atoms of a discrete distribution.
pub fn population_kernel(d: &DiscreteDist) -> CenteredKernel {
    double_center(d.support(), d.probs(), 1.0, Centering::Population)
}

/// Sample kernel stored on the distinct values of the sample.
///
/// Entry (a, b) is the kernel value for any pair of observations equal to
/// atoms a and b; `index[i]` is the atom of observation i.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomKernel {
    atoms: Vec<f64>,
    counts: Vec<usize>,
    index: Vec<usize>,
    centering: Centering,
    matrix: Vec<f64>,
}

impl AtomKernel {
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.atoms.len() + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        let k = self.atoms.len();
        &self.matrix[a * k..(a + 1) * k]
    }

    /// A constant sample has a single atom and an identically zero kernel.
    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() < 2
    }

    /// Full n × n kernel over observations.
    pub fn expand(&self) -> CenteredKernel {
        let n = self.n();
        let mut data = Vec::with_capacity(n * n);
        for &a in &self.index {
            let row = self.row(a);
            data.extend(self.index.iter().map(|&b| row[b]));
        }
        CenteredKernel { n, centering: self.centering, data }
    }
}

/// Kernel of a sample on its distinct values; see [`sample_kernel`].
pub fn atom_kernel(values: &[f64], centering: Centering) -> Result<AtomKernel> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sample kernel needs n >= 2, got {n}")));
    }
    let factor = match centering {
        Centering::VCentered => 1.0,
        Centering::UCentered => n as f64 / (n as f64 - 1.0),
        Centering::Population => return Err(Error::InvalidArgument("sample kernels are V- or U-centered".into())),
    };
    let (atoms, counts, index) = crate::dist::atoms(values)?;
    let k = atoms.len();
    let w = 1.0 / n as f64;
    // Row means over observations, summed exactly as n separate terms.
    let row_mean: Vec<f64> = atoms
        .par_iter()
        .map(|&za| {
            let mut acc = ExactSum::new();
            for (&zb, &c) in atoms.iter().zip(&counts) {
                acc.add_multiple(c as f64, w * (za - zb).abs());
            }
            acc.value()
        })
        .collect();
    let mut grand = ExactSum::new();
    for (&a, &c) in row_mean.iter().zip(&counts) {
        grand.add_multiple(c as f64, a * w);
    }
    let fb = factor * grand.value();
    let mut matrix = vec![0.0; k * k];
    matrix.par_chunks_mut(k).enumerate().for_each(|(a, row)| {
        for (b, out) in row.iter_mut().enumerate() {
            let d = (atoms[a] - atoms[b]).abs();
            *out = -0.5 * ((d + fb) - factor * (row_mean[a] + row_mean[b]));
        }
    });
    Ok(AtomKernel { atoms, counts, index, centering, matrix })
}

/// h_F̂ on a sample, centered under the empirical distribution.
///
/// `UCentered` multiplies the row, column and grand means by n/(n − 1).
pub fn sample_kernel(values: &[f64], centering: Centering) -> Result<CenteredKernel> {
    Ok(atom_kernel(values, centering)?.expand())
}

/// h_F(x, y) for arbitrary reals by exact integration of
/// [γ(x,w) − F(w)][γ(y,w) − F(w)] over the steps of F.
pub fn kernel_at(d: &DiscreteDist, x: f64, y: f64) -> f64 {
    let mut knots: Vec<f64> = d.support().to_vec();
    knots.push(x);
    knots.push(y);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut acc = ExactSum::new();
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let f = d.cdf(mid);
        let gx = if x < mid { 1.0 } else { 0.0 };
        let gy = if y < mid { 1.0 } else { 0.0 };
        acc.add((gx - f) * (gy - f) * (hi - lo));
    }
    acc.value()
}

/// Scalar summaries of h_F for a discrete distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    /// E h_F(Z, Z) = ½ E|Z₁ − Z₂|.
    pub trace: f64,
    /// E h_F(Z₁, Z₂)².
    pub sq_norm: f64,
    /// h_F(0, 0).
    pub h00: f64,
}

pub fn diagnostics(d: &DiscreteDist) -> KernelDiagnostics {
    let m = population_kernel(d);
    let p = d.probs();
    let trace = exact_sum((0..d.len()).map(|i| p[i] * m.get(i, i)));
    let rows: Vec<ExactSum> = (0..d.len())
        .into_par_iter()
        .map(|i| m.row(i).iter().zip(p).map(|(v, pj)| p[i] * pj * v * v).collect())
        .collect();
    let mut sq = ExactSum::new();
    for r in &rows {
        sq.merge(r);
    }
    KernelDiagnostics { trace, sq_norm: sq.value(), h00: kernel_at(d, 0.0, 0.0) }
}

/// κ = ∫∫ [F₁₂(x,y) − F₁(x)F₂(y)]² dx dy by exact integration over the grid
/// cells of a joint table.
pub fn kappa_bruteforce(joint: &JointDist) -> f64 {
    let (ni, nj) = joint.shape();
    if ni < 2 || nj < 2 {
        return 0.0;
    }
    let rows = joint.rows();
    let cols = joint.cols();
    // cum[a][b] = P(X <= x_a, Y <= y_b)
    let mut cum = vec![0.0; ni * nj];
    for a in 0..ni {
        for b in 0..nj {
            let mut s = joint.prob(a, b);
            if a > 0 {
                s += cum[(a - 1) * nj + b];
            }
            if b > 0 {
                s += cum[a * nj + b - 1];
            }
            if a > 0 && b > 0 {
                s -= cum[(a - 1) * nj + b - 1];
            }
            cum[a * nj + b] = s;
        }
    }
    let f1: Vec<f64> = (0..ni).map(|a| cum[a * nj + nj - 1]).collect();
    let f2: Vec<f64> = (0..nj).map(|b| cum[(ni - 1) * nj + b]).collect();
    let mut acc = ExactSum::new();
    for a in 0..ni - 1 {
        let dx = rows[a + 1] - rows[a];
        for b in 0..nj - 1 {
            let dy = cols[b + 1] - cols[b];
            let dev = cum[a * nj + b] - f1[a] * f2[b];
            acc.add(dev * dev * dx * dy);
        }
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{discretize, Family, NamedDist};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_matrix(m: &CenteredKernel, expected: &[&[f64]], tol: f64) {
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_abs_diff_eq!(m.get(i, j), v, epsilon = tol);
            }
        }
    }

    // Independent oracle: midpoint quadrature of ∫[γ(x,w)−F(w)][γ(y,w)−F(w)]dw.
    fn integral_oracle(d: &DiscreteDist, x: f64, y: f64) -> f64 {
        let lo = d.support()[0].min(x).min(y) - 1.0;
        let hi = d.support()[d.len() - 1].max(x).max(y) + 1.0;
        let steps = 200_000;
        let h = (hi - lo) / steps as f64;
        let mut s = 0.0;
        for k in 0..steps {
            let w = lo + (k as f64 + 0.5) * h;
            let f: f64 = d.support().iter().zip(d.probs()).filter(|(z, _)| **z < w).map(|(_, p)| p).sum();
            let gx = if x < w { 1.0 } else { 0.0 };
            let gy = if y < w { 1.0 } else { 0.0 };
            s += (gx - f) * (gy - f) * h;
        }
        s
    }

    #[test]
    fn dichotomous_population_kernel() {
        let m = population_kernel(&DiscreteDist::dichotomous(0.3).unwrap());
        assert_matrix(&m, &[&[0.49, -0.21], &[-0.21, 0.09]], 1e-15);

        let half = population_kernel(&DiscreteDist::dichotomous(0.5).unwrap());
        assert_matrix(&half, &[&[0.25, -0.25], &[-0.25, 0.25]], 1e-15);
    }

    #[test]
    fn three_point_kernel_matches_integral() {
        let d = DiscreteDist::equiprobable(vec![0.0, 1.0, 2.0]).unwrap();
        let m = population_kernel(&d);
        for i in 0..3 {
            for j in 0..3 {
                let z = d.support();
                assert_abs_diff_eq!(m.get(i, j), integral_oracle(&d, z[i], z[j]), epsilon = 1e-8);
                assert_abs_diff_eq!(m.get(i, j), kernel_at(&d, z[i], z[j]), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn sample_kernel_examples() {
        let m = sample_kernel(&[0.0, 1.0], Centering::VCentered).unwrap();
        assert_matrix(&m, &[&[0.25, -0.25], &[-0.25, 0.25]], 1e-15);

        let m4 = sample_kernel(&[0.0, 0.0, 1.0, 1.0], Centering::VCentered).unwrap();
        let pop = population_kernel(&DiscreteDist::dichotomous(0.5).unwrap());
        let idx = [0, 0, 1, 1];
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(m4.get(i, j), pop.get(idx[i], idx[j]), epsilon = 1e-15);
            }
        }
        assert!(sample_kernel(&[1.0], Centering::VCentered).is_err());
        assert!(sample_kernel(&[1.0, 2.0], Centering::Population).is_err());
    }

    #[test]
    fn atom_kernel_matches_direct_construction() {
        let x = [3.0, 1.0, 3.0, 0.5, 1.0, 3.0, 7.25];
        let n = x.len();
        let direct = double_center(&x, &vec![1.0 / n as f64; n], 1.0, Centering::VCentered);
        assert_eq!(sample_kernel(&x, Centering::VCentered).unwrap().as_slice(), direct.as_slice());
        let ak = atom_kernel(&x, Centering::VCentered).unwrap();
        assert_eq!(ak.atoms(), &[0.5, 1.0, 3.0, 7.25]);
        assert_eq!(ak.counts(), &[1, 2, 3, 1]);
        assert!(!ak.is_degenerate());
        assert!(atom_kernel(&[2.0, 2.0, 2.0], Centering::VCentered).unwrap().is_degenerate());
    }

    #[test]
    fn u_centering_formula() {
        let x = [0.3, -1.2, 2.5, 0.0, 4.1];
        let n = x.len() as f64;
        let m = sample_kernel(&x, Centering::UCentered).unwrap();
        let a: Vec<f64> = x.iter().map(|xi| x.iter().map(|xj| (xi - xj).abs()).sum::<f64>() / n).collect();
        let b = a.iter().sum::<f64>() / n;
        let f = n / (n - 1.0);
        for k in 0..5 {
            for l in 0..5 {
                let want = -0.5 * ((x[k] - x[l]).abs() - f * a[k] - f * a[l] + f * b);
                assert_abs_diff_eq!(m.get(k, l), want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn diagnostics_examples() {
        let dich = diagnostics(&DiscreteDist::dichotomous(0.3).unwrap());
        assert_abs_diff_eq!(dich.trace, 0.21, epsilon = 1e-15);
        assert_abs_diff_eq!(dich.sq_norm, 0.0441, epsilon = 1e-15);

        let logi = diagnostics(&discretize(&NamedDist::standard(Family::Logistic), 1001).unwrap());
        assert_abs_diff_eq!(logi.trace, 0.99931, epsilon = 1e-5);
        assert_abs_diff_eq!(logi.sq_norm, 0.28988, epsilon = 1e-5);

        let uni = diagnostics(&discretize(&NamedDist::standard(Family::Uniform), 1001).unwrap());
        assert_abs_diff_eq!(uni.trace, 1.0 / 6.0, epsilon = 1e-3);
        assert_abs_diff_eq!(uni.sq_norm, 1.0 / 90.0, epsilon = 1e-3);
    }

    #[test]
    fn h00_representations_agree() {
        // ½E(|Z₁| + |Z₂| − |Z₁ − Z₂|) against the integral form.
        let d = DiscreteDist::new(vec![-2.0, -0.5, 1.0, 3.0], vec![0.1, 0.4, 0.3, 0.2]).unwrap();
        let (z, p) = (d.support(), d.probs());
        let mut direct = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                direct += 0.5 * p[i] * p[j] * (z[i].abs() + z[j].abs() - (z[i] - z[j]).abs());
            }
        }
        assert_abs_diff_eq!(diagnostics(&d).h00, direct, epsilon = 1e-14);
    }

    #[test]
    fn squared_norm_matches_order_statistic_integral() {
        // 2∫∫_{z1<z2} F(z1)²[1−F(z2)]² dz1 dz2 for the continuous uniform is 1/90;
        // the discretized kernel converges to it.
        let uni = diagnostics(&discretize(&NamedDist::standard(Family::Uniform), 2000).unwrap());
        assert_abs_diff_eq!(uni.sq_norm, 1.0 / 90.0, epsilon = 1e-5);
        // Same integral for the logistic, by quadrature on the probability scale.
        let m = 2000;
        let mut s = 0.0;
        for i in 0..m {
            let u = (i as f64 + 0.5) / m as f64;
            for j in (i + 1)..m {
                let v = (j as f64 + 0.5) / m as f64;
                // dz = du / f(F⁻¹(u)) = du / (u(1−u)) for the logistic.
                s += u * u * (1.0 - v) * (1.0 - v) / (u * (1.0 - u) * v * (1.0 - v));
            }
        }
        s *= 2.0 / (m * m) as f64;
        assert_abs_diff_eq!(s, (std::f64::consts::PI.powi(2) - 9.0) / 3.0, epsilon = 2e-3);
    }

    #[test]
    fn bruteforce_examples() {
        let indep = JointDist::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0], {
            let r = [0.2, 0.5, 0.3];
            let c = [0.4, 0.6];
            r.iter().flat_map(|a| c.iter().map(move |b| a * b)).collect()
        })
        .unwrap();
        assert_abs_diff_eq!(kappa_bruteforce(&indep), 0.0, epsilon = 1e-16);

        let diag = JointDist::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(kappa_bruteforce(&diag), 1.0 / 16.0, epsilon = 1e-16);

        let t = JointDist::new(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.1, 0.25, 0.3, 0.35]).unwrap();
        let cov = 0.35 - (0.3 + 0.35) * (0.25 + 0.35);
        assert_abs_diff_eq!(kappa_bruteforce(&t), cov * cov, epsilon = 1e-15);

        let single = JointDist::new(vec![1.0], vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(kappa_bruteforce(&single), 0.0);
    }

    fn arb_dist() -> impl Strategy<Value = DiscreteDist> {
        proptest::collection::vec((-1000i32..1000, 1u32..20), 2..15).prop_filter_map("need 2 atoms", |raw| {
            let mut pts: Vec<(f64, f64)> = raw.iter().map(|&(z, w)| (z as f64 / 10.0, w as f64)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| a.0 == b.0);
            if pts.len() < 2 {
                return None;
            }
            let total: f64 = pts.iter().map(|p| p.1).sum();
            DiscreteDist::new(pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1 / total).collect()).ok()
        })
    }

    proptest! {
        #[test]
        fn population_kernel_is_doubly_centered(d in arb_dist()) {
            let m = population_kernel(&d);
            let k = d.len();
            for i in 0..k {
                let s: f64 = (0..k).map(|j| d.probs()[j] * m.get(i, j)).sum();
                prop_assert!(s.abs() < 1e-10);
                for j in 0..k {
                    prop_assert!((m.get(i, j) - m.get(j, i)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn kernel_is_positive(d in arb_dist(), raw in proptest::collection::vec(-1.0f64..1.0, 15)) {
            let k = d.len();
            let p = d.probs();
            let mut g = raw[..k].to_vec();
            let mean: f64 = g.iter().zip(p).map(|(a, b)| a * b).sum();
            for v in &mut g { *v -= mean; }
            let m = population_kernel(&d);
            let mut q = 0.0;
            for i in 0..k { for j in 0..k { q += p[i] * p[j] * g[i] * g[j] * m.get(i, j); } }
            prop_assert!(q >= -1e-12);
        }

        #[test]
        fn kernel_shape(d in arb_dist()) {
            let m = population_kernel(&d);
            let k = d.len();
            let tol = 1e-12;
            for i in 0..k {
                for j in i..k - 1 {
                    prop_assert!(m.get(i, j + 1) <= m.get(i, j) + tol);
                }
                for j in 1..=i {
                    prop_assert!(m.get(i, j - 1) <= m.get(i, j) + tol);
                }
            }
            // Diagonal decreases while the mid-CDF is below ½ and increases after.
            let f = d.mid_cdf_at_atoms();
            for j in 0..k - 1 {
                if f[j + 1] <= 0.5 {
                    prop_assert!(m.get(j + 1, j + 1) < m.get(j, j) + tol);
                }
                if f[j] >= 0.5 {
                    prop_assert!(m.get(j + 1, j + 1) > m.get(j, j) - tol);
                }
            }
        }

        #[test]
        fn trace_is_half_mean_difference(d in arb_dist()) {
            let (z, p) = (d.support(), d.probs());
            let mut g = 0.0;
            for i in 0..d.len() { for j in 0..d.len() { g += p[i] * p[j] * (z[i] - z[j]).abs(); } }
            let diag = diagnostics(&d);
            prop_assert!((diag.trace - 0.5 * g).abs() < 1e-12 * (1.0 + g));
            prop_assert!(diag.trace >= 0.0 && diag.sq_norm >= 0.0);
            prop_assert!(diag.sq_norm <= diag.trace * diag.trace * (1.0 + 1e-12));
        }

        #[test]
        fn sample_kernel_translation_and_scale(
            raw in proptest::collection::vec(-1000i32..1000, 2..30),
            shift in -1000i32..1000,
            pow in -3i32..4,
        ) {
            let x: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let base = sample_kernel(&x, Centering::VCentered).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + shift as f64).collect();
            prop_assert_eq!(&sample_kernel(&shifted, Centering::VCentered).unwrap(), &base);
            let a = -(2f64.powi(pow));
            let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
            let s = sample_kernel(&scaled, Centering::VCentered).unwrap();
            for (u, v) in s.as_slice().iter().zip(base.as_slice()) {
                prop_assert_eq!(*u, a.abs() * v);
            }
            for i in 0..x.len() {
                prop_assert!(base.row(i).iter().sum::<f64>().abs() < 1e-10 * (1.0 + x.len() as f64 * 1000.0));
            }
        }
    }
}
