use crate::estimate::{ContingencyTable, PairedSample};
use crate::Result;

/// Parents' socioeconomic status (rows A high … G low) by child's mental
/// health status for a sample of Manhattan residents (Goodman, 1985).
pub fn mental_health_table() -> ContingencyTable {
    let counts = vec![
        64, 94, 58, 46, //
        57, 94, 64, 40, //
        57, 105, 65, 60, //
        72, 141, 77, 94, //
        36, 97, 54, 78, //
        21, 71, 54, 71,
    ];
    ContingencyTable::new(6, 4, counts)
        .and_then(|t| {
            t.with_labels(
                ["A", "B", "C", "D", "F", "G"].map(String::from).to_vec(),
                ["Well", "Mild", "Moderate", "Impaired"].map(String::from).to_vec(),
            )
        })
        .expect("bundled table is well formed")
}

/// Consecutive transformed increments (asinh(y_t − y_{t−1}), asinh(y_{t+1} − y_t))
/// of a time series, for lag-one dependence analysis.
pub fn lag_pairs(series: &[f64]) -> Result<PairedSample> {
    let inc: Vec<f64> = series.windows(2).map(|w| (w[1] - w[0]).asinh()).collect();
    let x = inc[..inc.len().saturating_sub(1)].to_vec();
    let y = inc.iter().skip(1).copied().collect();
    PairedSample::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_totals() {
        let t = mental_health_table();
        assert_eq!(t.shape(), (6, 4));
        assert_eq!(t.total(), 1670);
        assert_eq!(t.count(1, 2), 64);
        assert_eq!(t.row_labels[4], "F");
    }

    #[test]
    fn lag_pair_recipe() {
        let s = lag_pairs(&[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(s.x(), &[1f64.asinh(), 2f64.asinh()]);
        assert_eq!(s.y(), &[2f64.asinh(), (-1f64).asinh()]);
        assert!(lag_pairs(&[1.0, 2.0, 3.0]).is_err());
    }
}
