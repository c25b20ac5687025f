use serde::Serialize;

use crate::dist::atoms;
use crate::estimate::{cells, kappa_triple, marginal_system, Mode, PairedSample};
use crate::kernel::AtomKernel;
use crate::sum::{exact_sum, ExactSum};
use crate::{Error, Result};

use super::plot::Gridlines;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightKind {
    Overall,
    Component { k: usize, l: usize },
}

/// Per-observation contributions whose mean is ρ̂* (overall) or ρ̂_kl (component).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationWeights {
    pub kind: WeightKind,
    pub values: Vec<f64>,
    /// √(κ̂(X,X) κ̂(Y,Y)) for overall weights, 1 for component weights.
    pub normalizer: f64,
}

impl AssociationWeights {
    pub fn mean(&self) -> f64 {
        exact_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Per-cell contributions of a categorical sample; they sum to ρ̂* or ρ̂_kl.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellWeights {
    pub kind: WeightKind,
    pub row_values: Vec<f64>,
    pub col_values: Vec<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Row-major, zero for empty cells.
    pub values: Vec<f64>,
    pub normalizer: f64,
}

impl CellWeights {
    pub fn total(&self) -> f64 {
        exact_sum(self.values.iter().copied())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_values.len(), self.col_values.len())
    }
}

/// n⁻¹ Σ_j H1(a, ·) H2(b, ·) over observations, for each occupied cell.
fn cell_means(h1: &AtomKernel, h2: &AtomKernel, occupied: &[(usize, usize, f64)]) -> Vec<f64> {
    let n = h1.n() as f64;
    occupied
        .iter()
        .map(|&(a, b, _)| {
            let mut acc = ExactSum::new();
            for &(a2, b2, c2) in occupied {
                acc.add_multiple(c2, h1.get(a, a2) * h2.get(b, b2));
            }
            acc.value() / n
        })
        .collect()
}

/// W_i = n⁻¹ Σ_j H1_ij H2_ij / √(κ̂(X,X) κ̂(Y,Y)).
pub fn weights_overall(s: &PairedSample) -> Result<AssociationWeights> {
    let t = kappa_triple(s, Mode::V)?;
    let norm = (t.kxx * t.kyy).sqrt();
    let occupied = cells(t.h1.index(), t.h2.index(), t.h1.n_atoms(), t.h2.n_atoms());
    let means = cell_means(&t.h1, &t.h2, &occupied);
    let ky = t.h2.n_atoms();
    let mut by_cell = std::collections::HashMap::with_capacity(occupied.len());
    for (&(a, b, _), m) in occupied.iter().zip(&means) {
        by_cell.insert(a * ky + b, m / norm);
    }
    let values = t.h1.index().iter().zip(t.h2.index()).map(|(&a, &b)| by_cell[&(a * ky + b)]).collect();
    Ok(AssociationWeights { kind: WeightKind::Overall, values, normalizer: norm })
}

/// W_i^(k,l) = ĝ_{1k}(x_i) ĝ_{2l}(y_i), k and l 1-based.
pub fn weights_component(s: &PairedSample, k: usize, l: usize) -> Result<AssociationWeights> {
    let (xs, xi) = marginal_system(s.x())?;
    let (ys, yi) = marginal_system(s.y())?;
    if k == 0 || l == 0 || k > xs.len() || l > ys.len() {
        return Err(Error::ComponentOutOfRange { k, l });
    }
    let (g1, g2) = (xs.eigenfunction(k - 1), ys.eigenfunction(l - 1));
    let values = xi.iter().zip(&yi).map(|(&a, &b)| g1[a] * g2[b]).collect();
    Ok(AssociationWeights { kind: WeightKind::Component { k, l }, values, normalizer: 1.0 })
}

/// Zero crossings of ĝ_{1k} and ĝ_{2l}, for gridlines on component plots.
pub fn component_gridlines(s: &PairedSample, k: usize, l: usize) -> Result<Gridlines> {
    let (xs, _) = marginal_system(s.x())?;
    let (ys, _) = marginal_system(s.y())?;
    if k == 0 || l == 0 || k > xs.len() || l > ys.len() {
        return Err(Error::ComponentOutOfRange { k, l });
    }
    Ok(Gridlines { x: xs.zero_crossings(k - 1), y: ys.zero_crossings(l - 1) })
}

fn labels(values: &[f64], given: Option<&[String]>) -> Vec<String> {
    match given {
        Some(l) if l.len() == values.len() => l.to_vec(),
        _ => values.iter().map(|v| format!("{v}")).collect(),
    }
}

fn cell_frame(
    s: &PairedSample,
    kind: WeightKind,
    normalizer: f64,
    fill: impl Fn(usize, usize, f64) -> f64,
) -> Result<CellWeights> {
    let (xa, _, xi) = atoms(s.x())?;
    let (ya, _, yi) = atoms(s.y())?;
    let occupied = cells(&xi, &yi, xa.len(), ya.len());
    let n = s.len() as f64;
    let mut values = vec![0.0; xa.len() * ya.len()];
    for &(a, b, c) in &occupied {
        values[a * ya.len() + b] = fill(a, b, c / n);
    }
    Ok(CellWeights {
        kind,
        row_labels: labels(&xa, s.x_categories()),
        col_labels: labels(&ya, s.y_categories()),
        row_values: xa,
        col_values: ya,
        values,
        normalizer,
    })
}

/// W_ab = p_ab Σ_ij p_ij h1(i, a) h2(j, b) / √(κ̂(X,X) κ̂(Y,Y)).
pub fn cell_weights_overall(s: &PairedSample) -> Result<CellWeights> {
    let t = kappa_triple(s, Mode::V)?;
    let norm = (t.kxx * t.kyy).sqrt();
    let occupied = cells(t.h1.index(), t.h2.index(), t.h1.n_atoms(), t.h2.n_atoms());
    let means = cell_means(&t.h1, &t.h2, &occupied);
    let ky = t.h2.n_atoms();
    let mut by_cell = vec![0.0; t.h1.n_atoms() * ky];
    for (&(a, b, _), m) in occupied.iter().zip(&means) {
        by_cell[a * ky + b] = *m;
    }
    cell_frame(s, WeightKind::Overall, norm, |a, b, p| p * by_cell[a * ky + b] / norm)
}

/// W_ab^(k,l) = p_ab ĝ_{1k}(a) ĝ_{2l}(b).
pub fn cell_weights_component(s: &PairedSample, k: usize, l: usize) -> Result<CellWeights> {
    let (xs, _) = marginal_system(s.x())?;
    let (ys, _) = marginal_system(s.y())?;
    if k == 0 || l == 0 || k > xs.len() || l > ys.len() {
        return Err(Error::ComponentOutOfRange { k, l });
    }
    let (g1, g2) = (xs.eigenfunction(k - 1), ys.eigenfunction(l - 1));
    cell_frame(s, WeightKind::Component { k, l }, 1.0, |a, b, p| p * g1[a] * g2[b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::mental_health_table;
    use crate::estimate::{component_correlations, rho_star, ContingencyTable};
    use proptest::prelude::*;

    #[test]
    fn identity_sample_mean_is_one() {
        let x = vec![0.2, 1.4, 0.9, 3.3, 2.0];
        let s = PairedSample::new(x.clone(), x).unwrap();
        assert!((weights_overall(&s).unwrap().mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mental_health_cells() {
        let s = mental_health_table().to_sample().unwrap();
        let w = cell_weights_overall(&s).unwrap();
        assert_eq!(w.shape(), (6, 4));
        assert_eq!(w.row_labels[0], "A");
        assert!((w.total() - rho_star(&s, Mode::V).unwrap()).abs() < 1e-10);
        assert!((w.total() - 0.02).abs() < 0.005);
        let ca = component_correlations(&s, None, None).unwrap();
        let c13 = cell_weights_component(&s, 1, 3).unwrap();
        assert!((c13.total() - ca.component(1, 3).unwrap().rho).abs() < 1e-10);
        assert!(cell_weights_component(&s, 6, 1).is_err());
    }

    #[test]
    fn independent_table_has_zero_component_means() {
        let s = ContingencyTable::new(2, 3, vec![1, 2, 3, 2, 4, 6]).unwrap().to_sample().unwrap();
        for k in 1..=1 {
            for l in 1..=2 {
                assert!(weights_component(&s, k, l).unwrap().mean().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn component_signs_are_constant_between_gridlines() {
        let s = crate::analyze::gen_demo_data(crate::analyze::DemoKind::B, 150, 3).unwrap();
        let grid = component_gridlines(&s, 2, 3).unwrap();
        let w = weights_component(&s, 2, 3).unwrap();
        let cell =
            |x: f64, y: f64| (grid.x.iter().filter(|&&g| g < x).count(), grid.y.iter().filter(|&&g| g < y).count());
        let mut sign_of = std::collections::HashMap::new();
        for ((&x, &y), &v) in s.x().iter().zip(s.y()).zip(&w.values) {
            if v == 0.0 {
                continue;
            }
            let prev = sign_of.insert(cell(x, y), v > 0.0);
            assert!(prev.is_none_or(|p| p == (v > 0.0)));
        }
    }

    fn arb_sample() -> impl Strategy<Value = PairedSample> {
        (3usize..200).prop_flat_map(|n| {
            (proptest::collection::vec(-30i32..30, n), proptest::collection::vec(-30i32..30, n)).prop_filter_map(
                "nonconstant",
                |(x, y)| {
                    let x: Vec<f64> = x.iter().map(|&v| v as f64 / 3.0).collect();
                    let y: Vec<f64> = y.iter().map(|&v| (v as f64).powi(2) / 7.0).collect();
                    let nc = |v: &[f64]| v.iter().any(|a| *a != v[0]);
                    (nc(&x) && nc(&y)).then(|| PairedSample::new(x, y).unwrap())
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weight_means_reproduce_coefficients(s in arb_sample()) {
            let w = weights_overall(&s).unwrap();
            prop_assert!((w.mean() - rho_star(&s, Mode::V).unwrap()).abs() < 1e-10);
            let ca = component_correlations(&s, Some(3), Some(3)).unwrap();
            for c in &ca.components {
                let wc = weights_component(&s, c.k, c.l).unwrap();
                prop_assert!((wc.mean() - c.rho).abs() < 1e-10);
            }
            let cw = cell_weights_overall(&s).unwrap();
            prop_assert!((cw.total() - w.mean()).abs() < 1e-10);
        }
    }
}
