//! Symmetric tridiagonal eigensolver: implicit QL with Wilkinson shifts
//! (the EISPACK tql2 procedure of Bowdler, Martin, Reinsch and Wilkinson).

use crate::{Error, Result};

const MAX_SWEEPS_PER_VALUE: usize = 60;

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off`. With `vectors`, also returns the
/// orthonormal eigenvectors column-major: vector `i` is `z[i*n..(i+1)*n]`.
pub fn eigen(mut d: Vec<f64>, off: Vec<f64>, vectors: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    if off.len() + 1 != n {
        return Err(Error::InvalidArgument("off-diagonal length must be n - 1".into()));
    }
    let mut e = off;
    e.push(0.0);
    let mut z = if vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    } else {
        Vec::new()
    };

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n && e[m].abs() > f64::EPSILON * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS_PER_VALUE {
                    return Err(Error::InvalidArgument("tridiagonal QL failed to converge".into()));
                }
                // Implicit shift.
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                // QL sweep from the bottom of the unreduced block.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        let (left, right) = z.split_at_mut((i + 1) * n);
                        let zi = &mut left[i * n..];
                        let zi1 = &mut right[..n];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= f64::EPSILON * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Ascending order, vectors carried along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vecs =
        if vectors { order.iter().flat_map(|&i| z[i * n..(i + 1) * n].iter().copied()).collect() } else { Vec::new() };
    Ok((values, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let (v, z) = eigen(vec![2.0, 2.0], vec![1.0], true).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] - 3.0).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!((z[0].abs() - s).abs() < 1e-15 && (z[0] + z[1]).abs() < 1e-15);
    }

    #[test]
    fn second_difference_matrix() {
        // Eigenvalues of tridiag(-1, 2, -1) are 2 − 2cos(kπ/(n+1)).
        let n = 40;
        let (v, z) = eigen(vec![2.0; n], vec![-1.0; n - 1], true).unwrap();
        for k in 1..=n {
            let want = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v[k - 1] - want).abs() < 1e-13);
        }
        for a in 0..n {
            for b in 0..n {
                let ip: f64 = (0..n).map(|i| z[a * n + i] * z[b * n + i]).sum();
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let (w, _) = eigen(vec![2.0; n], vec![-1.0; n - 1], false).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn diagonal_input() {
        let (v, _) = eigen(vec![3.0, -1.0, 2.0], vec![0.0, 0.0], false).unwrap();
        assert_eq!(v, vec![-1.0, 2.0, 3.0]);
    }
}
