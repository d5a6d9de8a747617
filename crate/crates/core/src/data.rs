//! Named initial-data families sampled on uniform grids.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::problem::{reduce_to_first_order, InitialData};

/// Number of Fourier modes in the random family.
pub const RANDOM_MODES: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub enum DataFamily {
    Zero,
    /// `sin(k pi x)`
    Sine { k: u32 },
    /// Unit tent of the given half width centred at `center`.
    Hat { center: f64, half_width: f64 },
    /// `0` left of `edge`, `1` right of it, `1/2` at a node sitting on it.
    Step { edge: f64 },
    /// Truncated Fourier series `sum_k (a_k cos(k pi x) + b_k sin(k pi x)) / k^s`
    /// with standard normal `a_k, b_k` drawn from a ChaCha8 stream.
    Random { seed: u64, smoothness: f64 },
}

impl DataFamily {
    pub fn hat(center: f64) -> Self {
        DataFamily::Hat { center, half_width: 0.25 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DataFamily::Hat { center, half_width } => center.is_finite() && *half_width > 0.0,
            DataFamily::Step { edge } => edge.is_finite(),
            DataFamily::Random { smoothness, .. } => smoothness.is_finite(),
            DataFamily::Zero | DataFamily::Sine { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Spec(format!("invalid data family parameters: {self:?}")))
        }
    }

    /// Samples on `n + 1` nodes of `[0,1]`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let xs = (0..=n).map(|j| j as f64 / n as f64);
        match self {
            DataFamily::Zero => vec![0.0; n + 1],
            DataFamily::Sine { k } => xs.map(|x| (*k as f64 * PI * x).sin()).collect(),
            DataFamily::Hat { center, half_width } => xs
                .map(|x| (1.0 - (x - center).abs() / half_width).max(0.0))
                .collect(),
            DataFamily::Step { edge } => (0..=n)
                .map(|j| {
                    // compare on the integer lattice so the jump node is exact
                    let pos = edge * n as f64;
                    let j = j as f64;
                    if (j - pos).abs() < 1e-9 {
                        0.5
                    } else if j > pos {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            DataFamily::Random { seed, smoothness } => {
                let (a, b) = random_coefficients(*seed, *smoothness);
                xs.map(|x| {
                    (0..RANDOM_MODES)
                        .map(|i| {
                            let arg = (i + 1) as f64 * PI * x;
                            a[i] * arg.cos() + b[i] * arg.sin()
                        })
                        .sum()
                })
                .collect()
            }
        }
    }
}

fn random_coefficients(seed: u64, smoothness: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(RANDOM_MODES);
    let mut b = Vec::with_capacity(RANDOM_MODES);
    for k in 1..=RANDOM_MODES {
        let scale = (k as f64).powf(-smoothness);
        let x: f64 = StandardNormal.sample(&mut rng);
        let y: f64 = StandardNormal.sample(&mut rng);
        a.push(scale * x);
        b.push(scale * y);
    }
    (a, b)
}

/// A `(w0, w1)` pair of families.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSource {
    pub w0: DataFamily,
    pub w1: DataFamily,
}

impl DataSource {
    pub fn new(w0: DataFamily, w1: DataFamily) -> Self {
        DataSource { w0, w1 }
    }

    /// `w0 = random(seed, 2)`, `w1 = random(seed + 1_000_003, 1)`: an `H^1 x L^2`
    /// draw with generic (incompatible) boundary values.
    pub fn random(seed: u64) -> Self {
        DataSource {
            w0: DataFamily::Random { seed, smoothness: 2.0 },
            w1: DataFamily::Random { seed: seed.wrapping_add(1_000_003), smoothness: 1.0 },
        }
    }

    pub fn initial_data(&self, n: usize, a: f64) -> Result<InitialData> {
        self.w0.validate()?;
        self.w1.validate()?;
        reduce_to_first_order(&self.w0.sample(n), &self.w1.sample(n), a)
    }
}
