use serde::Serialize;

/// Which support set: cos(kπx) = cos(lπy) (`Plus`) or = −cos(lπy) (`Minus`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CurveSign {
    Plus,
    Minus,
}

impl std::str::FromStr for CurveSign {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "+" | "plus" => Ok(CurveSign::Plus),
            "-" | "minus" => Ok(CurveSign::Minus),
            other => Err(crate::Error::InvalidArgument(format!("unknown sign {other}"))),
        }
    }
}

/// Line segment from (x0, y0) to (x1, y1), with x0 < x1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Segment {
    /// Euclidean distance from a point to the segment.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (self.x1 - self.x0, self.y1 - self.y0);
        let t = (((x - self.x0) * dx + (y - self.y0) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        ((self.x0 + t * dx - x).powi(2) + (self.y0 + t * dy - y).powi(2)).sqrt()
    }

    pub fn length(&self) -> f64 {
        ((self.x1 - self.x0).powi(2) + (self.y1 - self.y0).powi(2)).sqrt()
    }
}

/// Clip the line k·x + s·l·y = c to the unit square.
fn clip(k: f64, sl: f64, c: f64) -> Option<Segment> {
    // y as a function of x: y = (c − kx)/sl; x-range where 0 ≤ y ≤ 1.
    let xa = c / k;
    let xb = (c - sl) / k;
    let lo = xa.min(xb).max(0.0);
    let hi = xa.max(xb).min(1.0);
    if hi - lo <= 1e-15 {
        return None;
    }
    let y = |x: f64| ((c - k * x) / sl).clamp(0.0, 1.0);
    Some(Segment { x0: lo, y0: y(lo), x1: hi, y1: y(hi) })
}

/// Solutions of cos(kπx) = ±cos(lπy) in [0,1]² as maximal segments.
///
/// The `Plus` set is the union of the lines kx ∓ ly ∈ 2ℤ; the `Minus` set
/// the lines kx ∓ ly ∈ 2ℤ + 1.
pub fn frechet_curves(k: usize, l: usize, sign: CurveSign) -> Vec<Segment> {
    if k == 0 || l == 0 {
        return Vec::new();
    }
    let (kf, lf) = (k as f64, l as f64);
    let parity = match sign {
        CurveSign::Plus => 0,
        CurveSign::Minus => 1,
    };
    let mut out = Vec::new();
    for s in [-1.0, 1.0] {
        // Range of kx + s·ly over the square.
        let (cmin, cmax) = if s > 0.0 { (0, (k + l) as i64) } else { (-(l as i64), k as i64) };
        for c in cmin..=cmax {
            if c.rem_euclid(2) != parity {
                continue;
            }
            if let Some(seg) = clip(kf, s * lf, c as f64) {
                out.push(seg);
            }
        }
    }
    out.sort_by(|a, b| a.x0.total_cmp(&b.x0).then(a.y0.total_cmp(&b.y0)).then(a.y1.total_cmp(&b.y1)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(s: &Segment, x0: f64, y0: f64, x1: f64, y1: f64) -> bool {
        (s.x0 - x0).abs() < 1e-12 && (s.y0 - y0).abs() < 1e-12 && (s.x1 - x1).abs() < 1e-12 && (s.y1 - y1).abs() < 1e-12
    }

    #[test]
    fn simple_cases() {
        let p = frechet_curves(1, 1, CurveSign::Plus);
        assert_eq!(p.len(), 1);
        assert!(close(&p[0], 0.0, 0.0, 1.0, 1.0));
        let m = frechet_curves(1, 1, CurveSign::Minus);
        assert_eq!(m.len(), 1);
        assert!(close(&m[0], 0.0, 1.0, 1.0, 0.0));
        let q = frechet_curves(1, 2, CurveSign::Plus);
        assert_eq!(q.len(), 2);
        assert!(close(&q[0], 0.0, 0.0, 1.0, 0.5));
        assert!(close(&q[1], 0.0, 1.0, 1.0, 0.5));
    }

    // Refined zeros of f(x, y) = cos(kπx) ∓ cos(lπy) along vertical grid lines.
    fn grid_zeros(k: usize, l: usize, sign: CurveSign, m: usize) -> Vec<Vec<f64>> {
        let s = if sign == CurveSign::Plus { -1.0 } else { 1.0 };
        let f = |x: f64, y: f64| (k as f64 * PI * x).cos() + s * (l as f64 * PI * y).cos();
        let mut out = Vec::new();
        for i in 0..=m {
            let x = i as f64 / m as f64;
            let mut line = Vec::new();
            for j in 0..m {
                let (mut a, mut b) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
                let (fa, fb) = (f(x, a), f(x, b));
                if fa == 0.0 {
                    line.push(a);
                    continue;
                }
                if fa.signum() == fb.signum() {
                    continue;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if f(x, mid).signum() == fa.signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                line.push(0.5 * (a + b));
            }
            out.push(line);
        }
        out
    }

    #[test]
    fn matches_grid_sign_changes() {
        let m = 2000;
        for (k, l) in [(1, 2), (2, 3), (3, 1)] {
            for sign in [CurveSign::Plus, CurveSign::Minus] {
                let segs = frechet_curves(k, l, sign);
                let zeros = grid_zeros(k, l, sign, m);
                assert!(zeros.iter().any(|l| !l.is_empty()));
                for (x, y) in
                    zeros.iter().enumerate().flat_map(|(i, l)| l.iter().map(move |&y| (i as f64 / m as f64, y)))
                {
                    let d = segs.iter().map(|s| s.distance(x, y)).fold(f64::INFINITY, f64::min);
                    assert!(d < 1e-6, "k={k} l={l} zero ({x},{y}) off curve by {d}");
                }
                // Every segment point on a grid line, away from crossings and the boundary, is detected.
                for (si, seg) in segs.iter().enumerate() {
                    for (i, line) in zeros.iter().enumerate() {
                        let x = i as f64 / m as f64;
                        if x < seg.x0 || x > seg.x1 {
                            continue;
                        }
                        let y = seg.y0 + (seg.y1 - seg.y0) * (x - seg.x0) / (seg.x1 - seg.x0);
                        let near_other = segs.iter().enumerate().any(|(o, s)| o != si && s.distance(x, y) < 1e-3);
                        if near_other || !(1e-3..=1.0 - 1e-3).contains(&y) || !(1e-3..=1.0 - 1e-3).contains(&x) {
                            continue;
                        }
                        let found = line.iter().any(|&zy| (zy - y).abs() < 1e-6);
                        assert!(found, "k={k} l={l} segment point ({x},{y}) not detected");
                    }
                }
            }
        }
    }

    #[test]
    fn points_on_support_curves_have_unit_component_correlation() {
        use crate::estimate::{component_correlations, PairedSample};
        use crate::grade::{grade_transform, GradeScale};
        use rand::{Rng, SeedableRng};

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for (k, l) in [(1, 1), (1, 2), (2, 3)] {
            let segs = frechet_curves(k, l, CurveSign::Plus);
            let total: f64 = segs.iter().map(Segment::length).sum();
            let (mut x, mut y) = (Vec::new(), Vec::new());
            while x.len() < 400 {
                let mut pick = rng.random::<f64>() * total;
                let seg = segs.iter().find(|s| {
                    pick -= s.length();
                    pick <= 0.0
                });
                let seg = seg.unwrap_or(segs.last().unwrap());
                let t: f64 = rng.random();
                x.push(seg.x0 + t * (seg.x1 - seg.x0));
                y.push(seg.y0 + t * (seg.y1 - seg.y0));
            }
            let s = PairedSample::new(x, y).unwrap();
            let g = grade_transform(&s, &GradeScale::uniform(), &GradeScale::uniform()).unwrap();
            let rho = component_correlations(&g, Some(k), Some(l)).unwrap().component(k, l).unwrap().rho;
            assert!(rho.abs() >= 0.95, "k={k} l={l} rho={rho}");
        }
    }
}
