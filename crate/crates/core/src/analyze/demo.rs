use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::estimate::PairedSample;
use crate::{Error, Result};

/// The four artificial dependence patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoKind {
    /// Bivariate normal with correlation 2/3.
    A,
    /// (U, (U − ½)²) plus independent N(0, 1/100) noise on both coordinates.
    B,
    /// (U, Z·(1/5 + U)): spread increasing in U.
    C,
    /// (U, Z·(1/5 + min(U, 1 − U))): spread largest in the middle.
    D,
}

impl std::str::FromStr for DemoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(DemoKind::A),
            "b" => Ok(DemoKind::B),
            "c" => Ok(DemoKind::C),
            "d" => Ok(DemoKind::D),
            other => Err(Error::InvalidArgument(format!("unknown demo kind {other}"))),
        }
    }
}

/// n iid pairs of the given kind from a seeded generator (n ≥ 2).
pub fn gen_demo_data(kind: DemoKind, n: usize, seed: u64) -> Result<PairedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let rho: f64 = 2.0 / 3.0;
    for _ in 0..n {
        let (a, b) = match kind {
            DemoKind::A => {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
            }
            DemoKind::B => {
                let u: f64 = rng.random();
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                (u + z1 / 10.0, (u - 0.5) * (u - 0.5) + z2 / 10.0)
            }
            DemoKind::C => {
                let u: f64 = rng.random();
                let z: f64 = rng.sample(StandardNormal);
                (u, z * (0.2 + u))
            }
            DemoKind::D => {
                let u: f64 = rng.random();
                let z: f64 = rng.sample(StandardNormal);
                (u, z * (0.2 + u.min(1.0 - u)))
            }
        };
        x.push(a);
        y.push(b);
    }
    PairedSample::new(x, y)
}
