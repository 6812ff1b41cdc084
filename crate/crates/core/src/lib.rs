//! Variable-exponent Lebesgue norms and fractional maximal operators on
//! cell grids, with checkers for the pointwise inequalities relating them.
//!
//! The pieces, bottom up:
//!
//! * [`grid`]: domains with an activity mask and piecewise-constant functions.
//! * [`exponent`]: exponent fields, the derived exponent `q`, log-Hölder constants.
//! * [`norm`]: the modular and the Luxemburg norm.
//! * [`maximal`]: Hardy–Littlewood and fractional maximal operators.
//! * [`lab`]: inequality verification, empirical constants, boundedness sweeps.
//! * [`config`] and [`io`]: JSON run configurations and CSV field files.

pub mod config;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod io;
pub mod lab;
pub mod maximal;
pub mod norm;
pub mod window;

pub use error::{Result, VarlexError};
pub use exponent::{
    decay_log_holder_constant, derive_q, local_log_holder_constant, tail_sup, ExponentFamily, ExponentField,
    ExponentPair,
};
pub use grid::{build_domain, integrate, Domain, GridFunction};
pub use maximal::{fractional_maximal, hl_maximal, naive_maximal, CubeFamily};
pub use norm::{luxemburg_norm, modular, normalize, LuxemburgResult, DEFAULT_TOLERANCE};
