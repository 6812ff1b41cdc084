//! Seeded nonnegative test functions defined in continuum coordinates, so
//! the same case can be sampled on grids of different resolution.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Domain, GridFunction};

/// One term of a [`Mixture`]. Extents are absolute lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Component {
    /// `weight` on an axis-aligned box of the given half-widths.
    Plateau { weight: f64, center: [f64; 2], half: [f64; 2] },
    /// `weight * max(0, 1 - |x - center| / radius)^power`.
    Radial { weight: f64, center: [f64; 2], radius: f64, power: f64 },
}

impl Component {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Component::Plateau { weight, center, half } => {
                let inside = x.iter().enumerate().all(|(i, &v)| (v - center[i]).abs() <= half[i]);
                if inside {
                    weight
                } else {
                    0.0
                }
            }
            Component::Radial {
                weight,
                center,
                radius,
                power,
            } => {
                let r = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v - center[i]) * (v - center[i]))
                    .sum::<f64>()
                    .sqrt();
                weight * (1.0 - r / radius).max(0.0).powf(power)
            }
        }
    }
}

/// A finite sum of plateaus and radial profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub components: Vec<Component>,
}

impl Mixture {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum()
    }

    pub fn sample(&self, domain: &Arc<Domain>) -> Result<GridFunction> {
        GridFunction::from_fn(domain, |x| self.eval(x))
    }
}

/// Draws case `i` of a seeded family of mixtures: one to four terms mixing
/// narrow plateaus (cell-scale indicators), wide plateaus and radial bumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureGenerator {
    pub seed: u64,
}

impl MixtureGenerator {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Independent stream for `case`, stable across runs and platforms.
    pub fn rng(&self, case: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(case);
        rng
    }

    pub fn mixture(&self, bounds: &[(f64, f64)], case: u64) -> Mixture {
        let mut rng = self.rng(case);
        let dim = bounds.len();
        let size = bounds.iter().map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
        let terms = rng.gen_range(1..=4);
        let components = (0..terms)
            .map(|_| {
                let mut center = [0.0; 2];
                for (axis, &(a, b)) in bounds.iter().enumerate() {
                    center[axis] = rng.gen_range(a..b);
                }
                let weight = rng.gen_range(0.25..2.0);
                match rng.gen_range(0..3) {
                    0 => {
                        let mut half = [0.0; 2];
                        for h in half.iter_mut().take(dim) {
                            *h = size * rng.gen_range(0.04..0.08);
                        }
                        Component::Plateau { weight, center, half }
                    }
                    1 => {
                        let mut half = [0.0; 2];
                        for h in half.iter_mut().take(dim) {
                            *h = size * rng.gen_range(0.1..0.35);
                        }
                        Component::Plateau { weight, center, half }
                    }
                    _ => Component::Radial {
                        weight,
                        center,
                        radius: size * rng.gen_range(0.1..0.5),
                        power: rng.gen_range(1.0..3.0),
                    },
                }
            })
            .collect();
        Mixture { components }
    }

    pub fn sample(&self, domain: &Arc<Domain>, case: u64) -> Result<GridFunction> {
        self.mixture(domain.bounds(), case).sample(domain)
    }
}
