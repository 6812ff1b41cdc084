//! The modular `∫ |f|^p(x) dx` and the Luxemburg norm
//! `inf { λ > 0 : ∫ (|f|/λ)^p(x) dx <= 1 }`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarlexError};
use crate::exponent::ExponentField;
use crate::grid::GridFunction;

/// Default relative bracket width for [`luxemburg_norm`].
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

pub const MAX_BISECTION_STEPS: usize = 200;

/// Bisection also continues until `|modular(f/λ) - 1|` drops below this.
const RESIDUAL_TARGET: f64 = 1e-10;

/// Doubling/halving cap; f64 spans fewer than 2100 binary orders of magnitude.
const MAX_BRACKET_STEPS: usize = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuxemburgResult {
    pub norm: f64,
    /// `(λ_lo, λ_hi)` with `modular(f/λ_lo) > 1 >= modular(f/λ_hi)`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `modular(f/norm) - 1`.
    pub residual: f64,
}

fn check_domains(f: &GridFunction, p: &ExponentField) -> Result<()> {
    if f.domain_matches(p.domain()) {
        Ok(())
    } else {
        Err(VarlexError::DomainMismatch)
    }
}

/// `sum |f(c)/λ|^p(c) h^n` over active cells, in lexicographic order.
fn scaled_modular(f: &GridFunction, p: &ExponentField, lambda: f64) -> f64 {
    let sum: f64 = f
        .domain()
        .active_cells()
        .iter()
        .map(|&c| {
            let v = f.get(c).abs();
            if v == 0.0 {
                0.0
            } else {
                (v / lambda).powf(p.get(c))
            }
        })
        .sum();
    sum * f.domain().cell_measure()
}

/// `∫ |f(x)|^p(x) dx` by midpoint quadrature.
pub fn modular(f: &GridFunction, p: &ExponentField) -> Result<f64> {
    check_domains(f, p)?;
    Ok(scaled_modular(f, p, 1.0))
}

/// Luxemburg norm by bracketing and bisection on `λ ↦ modular(f/λ) - 1`.
///
/// The identically zero function has norm 0 and takes no iterations.
pub fn luxemburg_norm(f: &GridFunction, p: &ExponentField, tol: f64) -> Result<LuxemburgResult> {
    check_domains(f, p)?;
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(VarlexError::InvalidTolerance(tol));
    }
    if f.is_zero() {
        return Ok(LuxemburgResult {
            norm: 0.0,
            bracket: (0.0, 0.0),
            iterations: 0,
            residual: -1.0,
        });
    }
    let g = |lambda: f64| scaled_modular(f, p, lambda);

    let start = f.max_abs() * f.domain().active_measure();
    let (mut lo, mut hi) = if g(start) > 1.0 {
        let mut lo = start;
        let mut hi = 2.0 * start;
        let mut steps = 0;
        while g(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(VarlexError::ToleranceNotReached(steps));
            }
        }
        (lo, hi)
    } else {
        let mut hi = start;
        let mut lo = 0.5 * start;
        let mut steps = 0;
        while g(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo == 0.0 {
                return Err(VarlexError::ToleranceNotReached(steps));
            }
        }
        (lo, hi)
    };

    for iterations in 1..=MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        let residual = gm - 1.0;
        if (hi - lo) <= tol * mid && residual.abs() <= RESIDUAL_TARGET {
            return Ok(LuxemburgResult {
                norm: mid,
                bracket: (lo, hi),
                iterations,
                residual,
            });
        }
        if mid <= lo || mid >= hi {
            // bracket collapsed to adjacent floats
            return Ok(LuxemburgResult {
                norm: mid,
                bracket: (lo, hi),
                iterations,
                residual,
            });
        }
        if gm > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(VarlexError::ToleranceNotReached(MAX_BISECTION_STEPS))
}

/// Rescales `f` onto the unit sphere of the norm.
pub fn normalize(f: &GridFunction, p: &ExponentField) -> Result<GridFunction> {
    let result = luxemburg_norm(f, p, DEFAULT_TOLERANCE)?;
    if result.norm == 0.0 {
        return Err(VarlexError::ZeroFunction);
    }
    f.scale(1.0 / result.norm)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::{build_domain, Domain};

    fn unit(m: usize) -> Arc<Domain> {
        build_domain(&[(0.0, 1.0)], &[m], |_| true).unwrap()
    }

    #[test]
    fn modular_examples() {
        let d = unit(10);
        let p = ExponentField::from_fn(&d, |x| 1.5 + x[0]).unwrap();
        let one = GridFunction::constant(&d, 1.0).unwrap();
        assert!((modular(&one, &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(modular(&GridFunction::zeros(&d), &p).unwrap(), 0.0);
        let two = GridFunction::constant(&d, 2.0).unwrap();
        let p3 = ExponentField::constant(&d, 3.0).unwrap();
        assert!((modular(&two, &p3).unwrap() - 8.0).abs() < 1e-13);
    }

    #[test]
    fn modular_rejects_domain_mismatch() {
        let f = GridFunction::zeros(&unit(3));
        let p = ExponentField::constant(&unit(4), 2.0).unwrap();
        assert_eq!(modular(&f, &p).unwrap_err(), VarlexError::DomainMismatch);
    }

    #[test]
    fn constant_function_closed_form() {
        let d = unit(16);
        let f = GridFunction::constant(&d, 2.0).unwrap();
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let r = luxemburg_norm(&f, &p, DEFAULT_TOLERANCE).unwrap();
        assert!((r.norm - 2.0).abs() < 1e-9);
        assert!(r.residual.abs() <= 1e-9);
        assert!(r.bracket.0 <= r.norm && r.norm <= r.bracket.1);
        assert!((r.bracket.1 - r.bracket.0) / r.norm <= 1e-10);

        // measure 1/2 domain: c * mu^(1/p0)
        let half = build_domain(&[(0.0, 1.0)], &[16], |x| x[0] < 0.5).unwrap();
        let f = GridFunction::constant(&half, 3.0).unwrap();
        let p = ExponentField::constant(&half, 2.5).unwrap();
        let r = luxemburg_norm(&f, &p, DEFAULT_TOLERANCE).unwrap();
        assert!((r.norm - 3.0 * 0.5f64.powf(1.0 / 2.5)).abs() < 1e-9);
    }

    #[test]
    fn indicator_has_unit_norm() {
        let d = unit(8);
        let f = GridFunction::constant(&d, 1.0).unwrap();
        let p = ExponentField::constant(&d, 2.0).unwrap();
        assert!((luxemburg_norm(&f, &p, 1e-10).unwrap().norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let d = unit(8);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let r = luxemburg_norm(&GridFunction::zeros(&d), &p, 1e-10).unwrap();
        assert_eq!(r.norm, 0.0);
        assert_eq!(r.iterations, 0);
        assert_eq!(
            normalize(&GridFunction::zeros(&d), &p).unwrap_err(),
            VarlexError::ZeroFunction
        );
    }

    #[test]
    fn tolerance_range_is_checked() {
        let d = unit(2);
        let f = GridFunction::constant(&d, 1.0).unwrap();
        let p = ExponentField::constant(&d, 2.0).unwrap();
        for tol in [0.0, -1.0, 1e-3, f64::NAN] {
            assert!(matches!(luxemburg_norm(&f, &p, tol), Err(VarlexError::InvalidTolerance(_))));
        }
    }

    #[test]
    fn normalize_examples() {
        let d = unit(16);
        let p = ExponentField::constant(&d, 2.0).unwrap();
        let f = GridFunction::constant(&d, 2.0).unwrap();
        let g = normalize(&f, &p).unwrap();
        assert!(g.values().iter().all(|&v| (v - 1.0).abs() < 1e-9));
        let again = normalize(&g, &p).unwrap();
        for (a, b) in again.values().iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn tiny_and_huge_values_bracket() {
        let d = unit(4);
        let p = ExponentField::from_fn(&d, |x| 1.2 + 2.0 * x[0]).unwrap();
        for scale in [1e-200, 1e-20, 1.0, 1e20, 1e200] {
            let f = GridFunction::new(&d, vec![scale, 0.0, 3.0 * scale, scale]).unwrap();
            let r = luxemburg_norm(&f, &p, DEFAULT_TOLERANCE).unwrap();
            assert!(r.residual.abs() <= 1e-9, "scale {scale}: {r:?}");
        }
    }
}
