//! Independence tests: permutation p-values, the weighted chi-square
//! mixture null of n·κ̂, and per-component normal tests.

use libm::erfc;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::estimate::{cells, kappa_from_cells, kappa_triple, Component, ComponentAnalysis, Mode, PairedSample};
use crate::kernel::AtomKernel;
use crate::{Error, Result};

/// Statistic used by the permutation test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    KappaV,
    KappaU,
    RhoStarV,
}

impl Statistic {
    fn mode(self) -> Mode {
        match self {
            Statistic::KappaU => Mode::U,
            _ => Mode::V,
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa_v" => Ok(Statistic::KappaV),
            "kappa_u" => Ok(Statistic::KappaU),
            "rho_star_v" | "rho_star" => Ok(Statistic::RhoStarV),
            other => Err(Error::InvalidArgument(format!("unknown statistic {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Permutation,
    Asymptotic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub replicates: u64,
    pub seed: u64,
    /// All n! pairings were enumerated; `p_value` is the exact conditional p.
    pub exhaustive: bool,
}

/// Draws per RNG stream in the mixture simulation.
const BLOCK: usize = 1024;

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

struct PermutationSetup {
    h1: AtomKernel,
    h2: AtomKernel,
    mode: Mode,
    divisor: f64,
    tie_tol: f64,
}

impl PermutationSetup {
    fn statistic(&self, iy: &[usize]) -> f64 {
        let c = cells(self.h1.index(), iy, self.h1.n_atoms(), self.h2.n_atoms());
        kappa_from_cells(&self.h1, &self.h2, &c, self.mode) / self.divisor
    }
}

/// Permutation test of independence: the y column is permuted, margin
/// kernels are reused. When `replicates` ≥ n! every pairing is enumerated
/// and the exact conditional p-value #{T(σ) ≥ T_obs}/n! is returned;
/// otherwise p = (1 + #{T* ≥ T_obs})/(B + 1) over seeded random permutations.
pub fn permutation_test(s: &PairedSample, statistic: Statistic, replicates: u64, seed: u64) -> Result<TestResult> {
    let n = s.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("permutation test needs n >= 3, got {n}")));
    }
    if replicates < 1 {
        return Err(Error::InvalidArgument("at least one replicate required".into()));
    }
    let mode = statistic.mode();
    let t = kappa_triple(s, mode)?;
    let divisor = match statistic {
        Statistic::RhoStarV => (t.kxx * t.kyy).sqrt(),
        _ => 1.0,
    };
    // Cauchy–Schwarz bound on |statistic| sets the scale for ties.
    let sq = |h: &AtomKernel| {
        let mut acc = crate::sum::ExactSum::new();
        for a in 0..h.n_atoms() {
            for b in 0..h.n_atoms() {
                acc.add_multiple((h.counts()[a] * h.counts()[b]) as f64, h.get(a, b) * h.get(a, b));
            }
        }
        acc.value()
    };
    let nf = n as f64;
    let scale = (sq(&t.h1) * sq(&t.h2)).sqrt() / (nf * nf) / divisor;
    let setup = PermutationSetup { h1: t.h1, h2: t.h2, mode, divisor, tie_tol: 1e-9 * scale };
    let observed = setup.statistic(setup.h2.index());
    let threshold = observed - setup.tie_tol;

    if let Some(total) = factorial(n).filter(|&f| replicates >= f) {
        let count = exhaustive_count(&setup, threshold);
        return Ok(TestResult {
            statistic: observed,
            p_value: count as f64 / total as f64,
            method: Method::Permutation,
            replicates: total,
            seed,
            exhaustive: true,
        });
    }

    let base = setup.h2.index().to_vec();
    let count: u64 = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let mut iy = base.clone();
            iy.shuffle(&mut rng);
            u64::from(setup.statistic(&iy) >= threshold)
        })
        .sum();
    Ok(TestResult {
        statistic: observed,
        p_value: (1 + count) as f64 / (replicates + 1) as f64,
        method: Method::Permutation,
        replicates,
        seed,
        exhaustive: false,
    })
}

/// Count of all n! pairings whose statistic reaches the threshold
/// (Heap's algorithm, split over the choice of the last position).
fn exhaustive_count(setup: &PermutationSetup, threshold: f64) -> u64 {
    let base = setup.h2.index().to_vec();
    let n = base.len();
    (0..n)
        .into_par_iter()
        .map(|last| {
            let mut arr = base.clone();
            arr.swap(last, n - 1);
            let m = n - 1;
            let mut count = u64::from(setup.statistic(&arr) >= threshold);
            let mut c = vec![0usize; m];
            let mut i = 0;
            while i < m {
                if c[i] < i {
                    if i % 2 == 0 {
                        arr.swap(0, i);
                    } else {
                        arr.swap(c[i], i);
                    }
                    count += u64::from(setup.statistic(&arr) >= threshold);
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
            count
        })
        .sum()
}

/// Draws from Σ_ij λ_i μ_j Z_ij² (mode V) or Σ_ij λ_i μ_j (Z_ij² − 1) (mode U).
pub fn mixture_draws(lambda: &[f64], mu: &[f64], mode: Mode, draws: usize, seed: u64) -> Vec<f64> {
    let weights: Vec<f64> = lambda.iter().flat_map(|l| mu.iter().map(move |m| l * m)).collect();
    let shift = match mode {
        Mode::V => 0.0,
        Mode::U => 1.0,
    };
    let blocks = draws.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = BLOCK.min(draws - b * BLOCK);
            let weights = &weights;
            (0..len)
                .map(move |_| {
                    weights
                        .iter()
                        .map(|w| {
                            let z: f64 = rng.sample(StandardNormal);
                            w * (z * z - shift)
                        })
                        .sum::<f64>()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Monte Carlo p-value of n·κ̂ under the asymptotic null mixture.
pub fn asymptotic_pvalue(
    n: usize,
    kappa_hat: f64,
    lambda: &[f64],
    mu: &[f64],
    mode: Mode,
    draws: usize,
    seed: u64,
) -> Result<TestResult> {
    if lambda.is_empty() || mu.is_empty() {
        return Err(Error::InvalidArgument("eigenvalue lists must be nonempty".into()));
    }
    if draws < 1 {
        return Err(Error::InvalidArgument("at least one draw required".into()));
    }
    let observed = n as f64 * kappa_hat;
    let count = mixture_draws(lambda, mu, mode, draws, seed).iter().filter(|&&v| v >= observed).count();
    Ok(TestResult {
        statistic: observed,
        p_value: (1 + count) as f64 / (draws + 1) as f64,
        method: Method::Asymptotic,
        replicates: draws as u64,
        seed,
        exhaustive: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentTest {
    pub k: usize,
    pub l: usize,
    pub rho: f64,
    pub raw_p: f64,
    pub adjusted_p: f64,
    pub significant: bool,
}

/// Normal test of one component; the raw p is scaled by Σλ·Σμ/(λ_k μ_l).
pub fn component_test(c: &Component, n: usize, sum_lambda: f64, sum_mu: f64, alpha: f64) -> ComponentTest {
    let z = (n as f64).sqrt() * c.rho.abs();
    let raw_p = erfc(z / std::f64::consts::SQRT_2).min(1.0);
    let factor = sum_lambda * sum_mu / (c.lambda * c.mu);
    let adjusted_p = (raw_p * factor).min(1.0);
    ComponentTest { k: c.k, l: c.l, rho: c.rho, raw_p, adjusted_p, significant: adjusted_p < alpha }
}

/// Tests of every component in an analysis, normalized by the full traces.
pub fn component_tests(analysis: &ComponentAnalysis, n: usize, alpha: f64) -> Result<Vec<ComponentTest>> {
    if analysis.components.is_empty() {
        return Err(Error::InvalidArgument("no components to test".into()));
    }
    let (sl, sm) = (analysis.x_system.trace(), analysis.y_system.trace());
    Ok(analysis.components.iter().map(|c| component_test(c, n, sl, sm, alpha)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{estimate_kappa, rho_star};
    use approx::assert_abs_diff_eq;

    fn small_sample() -> PairedSample {
        PairedSample::from_pairs(&[(0.1, 1.0), (0.7, 0.2), (0.3, 0.9), (1.5, 2.0), (0.9, 0.4), (2.2, 1.7)]).unwrap()
    }

    // Oracle: enumerate all pairings with explicitly permuted samples.
    fn exact_conditional_p(s: &PairedSample, mode: Mode) -> f64 {
        let n = s.len();
        let obs = estimate_kappa(s, mode).unwrap().value;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut count = 0;
        let mut total = 0;
        loop {
            let t = PairedSample::new(s.x().to_vec(), perm.iter().map(|&i| s.y()[i]).collect()).unwrap();
            if estimate_kappa(&t, mode).unwrap().value >= obs - 1e-12 {
                count += 1;
            }
            total += 1;
            // next lexicographic permutation
            let Some(i) = (0..n - 1).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        assert_eq!(total, 720);
        count as f64 / total as f64
    }

    #[test]
    fn exhaustive_matches_enumeration() {
        let s = small_sample();
        for (stat, mode) in [(Statistic::KappaV, Mode::V), (Statistic::KappaU, Mode::U)] {
            let r = permutation_test(&s, stat, 720, 0).unwrap();
            assert!(r.exhaustive);
            assert_eq!(r.replicates, 720);
            assert_eq!(r.p_value, exact_conditional_p(&s, mode));
        }
        let rho = permutation_test(&s, Statistic::RhoStarV, 5000, 0).unwrap();
        assert_eq!(rho.p_value, exact_conditional_p(&s, Mode::V));
        assert_abs_diff_eq!(rho.statistic, rho_star(&s, Mode::V).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn identity_pairing_is_unique_maximum() {
        let x = vec![0.3, 1.1, 2.0, 2.4, 3.9, 4.0];
        let s = PairedSample::new(x.clone(), x).unwrap();
        let r = permutation_test(&s, Statistic::KappaV, 720, 1).unwrap();
        assert_eq!(r.p_value, 1.0 / 720.0);

        let x: Vec<f64> = vec![0.5, 1.0, 1.7, 2.2, 3.0, 3.1, 4.6, 5.0];
        let s = PairedSample::new(x.clone(), x).unwrap();
        let r = permutation_test(&s, Statistic::KappaV, 999, 1).unwrap();
        assert_eq!(r.p_value, 1.0 / 1000.0);
        assert!(!r.exhaustive);
    }

    #[test]
    fn seeded_runs_reproduce_across_pools() {
        let s = PairedSample::new(
            (0..40).map(|i| (i * 7 % 13) as f64).collect(),
            (0..40).map(|i| (i * 5 % 11) as f64).collect(),
        )
        .unwrap();
        let a = permutation_test(&s, Statistic::KappaV, 199, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| permutation_test(&s, Statistic::KappaV, 199, 42).unwrap());
        assert_eq!(a, b);
        assert!(a.p_value >= 1.0 / 200.0 && a.p_value <= 1.0);
    }

    #[test]
    fn permutation_errors() {
        let s = PairedSample::from_pairs(&[(1.0, 0.0), (1.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!(permutation_test(&s, Statistic::KappaV, 99, 0).is_err());
        let two = PairedSample::from_pairs(&[(1.0, 0.0), (2.0, 1.0)]).unwrap();
        assert!(permutation_test(&two, Statistic::KappaV, 99, 0).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let r = asymptotic_pvalue(100, 0.0, &[0.5, 0.2], &[0.3], Mode::V, 2000, 1).unwrap();
        assert_eq!(r.p_value, 1.0);
        let chi = asymptotic_pvalue(1, 3.841458820694124, &[1.0], &[1.0], Mode::V, 1_000_000, 7).unwrap();
        assert!((chi.p_value - 0.05).abs() < 0.005, "{}", chi.p_value);
        let u = mixture_draws(&[1.0], &[1.0], Mode::U, 200_000, 3);
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        assert!(mean.abs() < 0.02);
        assert_eq!(
            mixture_draws(&[0.4, 0.1], &[0.2], Mode::V, 3000, 9),
            mixture_draws(&[0.4, 0.1], &[0.2], Mode::V, 3000, 9)
        );
    }

    #[test]
    fn pvalue_is_monotone_in_statistic() {
        let l = [0.5, 0.1, 0.05];
        let m = [0.3, 0.2];
        let mut last = 1.0;
        for step in 0..20 {
            let p = asymptotic_pvalue(50, step as f64 * 0.002, &l, &m, Mode::V, 5000, 4).unwrap().p_value;
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn component_test_examples() {
        let c = Component { k: 1, l: 1, lambda: 0.5, mu: 0.25, rho: 0.1 };
        let t = component_test(&c, 100, 1.0, 0.5, 0.05);
        assert_abs_diff_eq!(t.raw_p, 0.31731050786291415, epsilon = 1e-12);
        assert_eq!(t.adjusted_p, 1.0);
        let strong = component_test(&Component { rho: 0.3, ..c }, 100, 1.0, 0.5, 0.05);
        assert_abs_diff_eq!(strong.raw_p, 0.0026997960632601866, epsilon = 1e-15);
        assert_abs_diff_eq!(strong.adjusted_p, 4.0 * strong.raw_p, epsilon = 1e-15);
        assert!(strong.significant);
        let zero = component_test(&Component { rho: 0.0, ..c }, 100, 1.0, 0.5, 0.05);
        assert_eq!(zero.raw_p, 1.0);
        assert_eq!(zero.adjusted_p, 1.0);
        assert!(!zero.significant);
    }
}
