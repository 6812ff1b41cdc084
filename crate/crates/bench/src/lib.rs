//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use varlex_core::lab::generate::MixtureGenerator;
use varlex_core::{build_domain, derive_q, Domain, ExponentFamily, ExponentPair, GridFunction};

pub const SEED: u64 = 42;

/// Full box `[-1, 1]^n` with `cells` per axis.
pub fn cube(dim: usize, cells: usize) -> Arc<Domain> {
    build_domain(&vec![(-1.0, 1.0); dim], &vec![cells; dim], |_| true).expect("valid box")
}

pub fn mixture(domain: &Arc<Domain>) -> GridFunction {
    MixtureGenerator::new(SEED).sample(domain, 0).expect("samples")
}

/// `log_decay(1.6, 0.5)` paired at `alpha = 0.25 n`.
pub fn pair(domain: &Arc<Domain>) -> ExponentPair {
    let p = ExponentFamily::LogDecay { p_inf: 1.6, a: 0.5 }
        .sample(domain)
        .expect("admissible exponent");
    derive_q(&p, 0.25 * domain.dim() as f64).expect("alpha in range")
}
