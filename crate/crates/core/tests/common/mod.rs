#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use varlex_core::exponent::ExponentFamily;
use varlex_core::grid::{build_domain, Domain};
use varlex_core::lab::generate::MixtureGenerator;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    MixtureGenerator::new(seed).rng(stream)
}

/// Box `[lo, lo + m h]` per axis with a common spacing, optionally masked
/// to the inscribed disk (the full box when the disk holds no cell center).
pub fn random_domain(rng: &mut ChaCha8Rng, shape: &[usize], disk: bool) -> Arc<Domain> {
    let h = [0.25, 0.5, 1.0, 2.0][rng.gen_range(0..4)] / *shape.iter().max().unwrap() as f64;
    let lo: f64 = [0.0, -0.5, -1.0][rng.gen_range(0..3)];
    let bounds: Vec<(f64, f64)> = shape.iter().map(|&m| (lo, lo + m as f64 * h)).collect();
    if disk {
        let center: Vec<f64> = bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let radius = bounds.iter().map(|(a, b)| 0.5 * (b - a)).fold(f64::INFINITY, f64::min);
        let masked = build_domain(&bounds, shape, |x| {
            x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() < radius
        });
        masked.or_else(|_| build_domain(&bounds, shape, |_| true)).unwrap()
    } else {
        build_domain(&bounds, shape, |_| true).unwrap()
    }
}

/// An exponent family with `1 < p` and `p_max < cap`.
pub fn random_exponent(rng: &mut ChaCha8Rng, cap: f64) -> ExponentFamily {
    let cap = cap.min(3.5);
    match rng.gen_range(0..3) {
        0 => ExponentFamily::Constant {
            p0: rng.gen_range(1.1..cap),
        },
        1 => {
            let clamp_lo = rng.gen_range(1.05..(1.0 + cap) / 2.0);
            let clamp_hi = rng.gen_range(clamp_lo..cap);
            ExponentFamily::Affine {
                p0: rng.gen_range(clamp_lo..=clamp_hi),
                slope: rng.gen_range(-2.0..2.0),
                clamp_lo,
                clamp_hi,
            }
        }
        _ => {
            let p_inf = rng.gen_range(1.05..cap - 0.05);
            ExponentFamily::LogDecay {
                p_inf,
                a: 0.99 * rng.gen_range(0.0..cap - p_inf),
            }
        }
    }
}

/// Largest value of the family on any domain (the affine clamp or the
/// log-decay value at the origin).
pub fn family_max(family: &ExponentFamily) -> f64 {
    match *family {
        ExponentFamily::Constant { p0 } => p0,
        ExponentFamily::Affine { clamp_hi, .. } => clamp_hi,
        ExponentFamily::LogDecay { p_inf, a } => p_inf + a.max(0.0),
    }
}

pub fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
