//! Exponent fields `p(.)`, the derived exponent `q` with `1/q = 1/p - alpha/n`,
//! the tail supremum `I_q`, and the two log-Hölder constants.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VarlexError};
use crate::grid::{Domain, GridFunction};

/// Above this many unordered pairs the local log-Hölder scan switches to
/// seeded subsampling.
pub const MAX_EXHAUSTIVE_PAIRS: u64 = 10_000_000;

/// Seed used by [`local_log_holder_constant`] when subsampling.
pub const DEFAULT_PAIR_SEED: u64 = 0x0005_eed0_f1a7;

/// A grid function with `1 < p_min <= p <= p_max < inf` on active cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    field: GridFunction,
    min: f64,
    max: f64,
}

impl ExponentField {
    pub fn new(field: GridFunction) -> Result<Self> {
        let domain = Arc::clone(field.domain());
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &c in domain.active_cells() {
            let p = field.get(c);
            if p <= 1.0 {
                return Err(VarlexError::ExponentRange {
                    cell: c,
                    value: p,
                    requirement: "p > 1".into(),
                });
            }
            min = min.min(p);
            max = max.max(p);
        }
        Ok(Self { field, min, max })
    }

    pub fn from_fn<F>(domain: &Arc<Domain>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::new(GridFunction::from_fn(domain, f)?)
    }

    pub fn constant(domain: &Arc<Domain>, p0: f64) -> Result<Self> {
        Self::from_fn(domain, |_| p0)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.field.domain()
    }

    pub fn as_function(&self) -> &GridFunction {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.field.get(cell)
    }

    /// Infimum over active cells.
    pub fn min(&self) -> f64 {
        self.min
    }

    /// Supremum over active cells.
    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn is_constant(&self) -> bool {
        self.min == self.max
    }
}

/// Closed-form exponent families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ExponentFamily {
    Constant {
        p0: f64,
    },
    /// `clamp(p0 + slope * x_1, clamp_lo, clamp_hi)`, varying along the first axis.
    Affine {
        p0: f64,
        slope: f64,
        clamp_lo: f64,
        clamp_hi: f64,
    },
    /// `p_inf + a / log(e + |x|)`.
    LogDecay {
        p_inf: f64,
        a: f64,
    },
}

impl ExponentFamily {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            ExponentFamily::Constant { p0 } => p0,
            ExponentFamily::Affine {
                p0,
                slope,
                clamp_lo,
                clamp_hi,
            } => (p0 + slope * x[0]).max(clamp_lo).min(clamp_hi),
            ExponentFamily::LogDecay { p_inf, a } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                p_inf + a / (E + r).ln()
            }
        }
    }

    pub fn sample(&self, domain: &Arc<Domain>) -> Result<ExponentField> {
        ExponentField::from_fn(domain, |x| self.eval(x))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExponentFamily::Constant { .. } => "constant",
            ExponentFamily::Affine { .. } => "affine",
            ExponentFamily::LogDecay { .. } => "log_decay",
        }
    }
}

impl fmt::Display for ExponentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ExponentFamily::Constant { p0 } => write!(f, "constant(p0={p0})"),
            ExponentFamily::Affine {
                p0,
                slope,
                clamp_lo,
                clamp_hi,
            } => write!(f, "affine(p0={p0}, slope={slope}, clamp_lo={clamp_lo}, clamp_hi={clamp_hi})"),
            ExponentFamily::LogDecay { p_inf, a } => write!(f, "log_decay(p_inf={p_inf}, a={a})"),
        }
    }
}

/// The exponent `p`, the order `alpha` and the derived `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentPair {
    p: ExponentField,
    q: ExponentField,
    alpha: f64,
}

impl ExponentPair {
    pub fn p(&self) -> &ExponentField {
        &self.p
    }

    pub fn q(&self) -> &ExponentField {
        &self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.p.domain().dim()
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.p.domain()
    }

    /// `max |p/q + alpha p/n - 1|` over active cells.
    pub fn conjugacy_residual(&self) -> f64 {
        let n = self.dim() as f64;
        self.domain()
            .active_cells()
            .iter()
            .map(|&c| {
                let (p, q) = (self.p.get(c), self.q.get(c));
                (p / q + self.alpha * p / n - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |1/q - (1/p - alpha/n)|` over active cells.
    pub fn reciprocal_residual(&self) -> f64 {
        let n = self.dim() as f64;
        self.domain()
            .active_cells()
            .iter()
            .map(|&c| {
                let (p, q) = (self.p.get(c), self.q.get(c));
                (1.0 / q - (1.0 / p - self.alpha / n)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Derives `q = n p / (n - alpha p)`, requiring `0 < alpha < n` and
/// `p_max < n / alpha`.
pub fn derive_q(p: &ExponentField, alpha: f64) -> Result<ExponentPair> {
    let dim = p.domain().dim();
    let n = dim as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(VarlexError::InvalidAlpha {
            alpha,
            n: dim,
            range: "(0, n)",
        });
    }
    let bound = n / alpha;
    if let Some(&cell) = p.domain().active_cells().iter().find(|&&c| p.get(c) >= bound) {
        return Err(VarlexError::ExponentRange {
            cell,
            value: p.get(cell),
            requirement: format!("p < n/alpha = {bound}"),
        });
    }
    let q = p.as_function().map(|v| n * v / (n - alpha * v))?;
    Ok(ExponentPair {
        p: p.clone(),
        q: ExponentField::new(q)?,
        alpha,
    })
}

/// Smallest `C` with `|p(x) - p(y)| <= C / (-log |x - y|)` over active
/// center pairs with `0 < |x - y| < 1/2`; zero when no pair qualifies.
pub fn local_log_holder_constant(p: &ExponentField) -> f64 {
    local_log_holder_constant_seeded(p, DEFAULT_PAIR_SEED)
}

/// As [`local_log_holder_constant`], with an explicit seed for the
/// subsampled regime.
pub fn local_log_holder_constant_seeded(p: &ExponentField, seed: u64) -> f64 {
    let domain = p.domain();
    let n = domain.active_count() as u64;
    if n < 2 {
        return 0.0;
    }
    if n * (n - 1) / 2 <= MAX_EXHAUSTIVE_PAIRS {
        local_exhaustive(p)
    } else {
        local_subsampled(p, seed, (MAX_EXHAUSTIVE_PAIRS / n).max(1) as usize)
    }
}

fn local_pair_value(p: &ExponentField, a: usize, b: usize) -> f64 {
    let diff = (p.get(a) - p.get(b)).abs();
    if diff == 0.0 {
        return 0.0;
    }
    let d = p.domain().distance(a, b);
    if d > 0.0 && d < 0.5 {
        diff * -d.ln()
    } else {
        0.0
    }
}

fn local_exhaustive(p: &ExponentField) -> f64 {
    let active = p.domain().active_cells();
    (0..active.len())
        .into_par_iter()
        .map(|i| {
            active[i + 1..]
                .iter()
                .map(|&b| local_pair_value(p, active[i], b))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Each active cell is a stratum; its partners are drawn from the offset
/// box that can reach distance below 1/2, with a per-cell RNG stream.
fn local_subsampled(p: &ExponentField, seed: u64, per_cell: usize) -> f64 {
    let domain = p.domain();
    let dim = domain.dim();
    let shape = domain.shape();
    let reach = (0.5 / domain.spacing()).ceil() as i64;
    let side = (2 * reach + 1) as usize;
    let offsets = if dim == 1 { side } else { side * side };

    let partner = |cell: usize, k: usize| -> Option<usize> {
        let idx = domain.cell_index(cell);
        let (o0, o1) = if dim == 1 { (k, reach as usize) } else { (k / side, k % side) };
        let j0 = idx[0] as i64 + o0 as i64 - reach;
        let j1 = idx[1] as i64 + o1 as i64 - reach;
        let m1 = if dim == 1 { 1 } else { shape[1] as i64 };
        if j0 < 0 || j0 >= shape[0] as i64 || j1 < 0 || j1 >= m1 {
            return None;
        }
        let other = (j0 * m1 + j1) as usize;
        (other != cell && domain.is_active(other)).then_some(other)
    };

    domain
        .active_cells()
        .par_iter()
        .map(|&cell| {
            let eval = |k: usize| partner(cell, k).map_or(0.0, |b| local_pair_value(p, cell, b));
            if offsets <= per_cell {
                (0..offsets).map(eval).fold(0.0, f64::max)
            } else {
                let stream = seed ^ (cell as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
                let mut rng = ChaCha8Rng::seed_from_u64(stream);
                (0..per_cell)
                    .map(|_| eval(rng.gen_range(0..offsets)))
                    .fold(0.0, f64::max)
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Active cells sorted by `|x|`, ties broken by cell index, together with
/// the start of each cell's equal-radius group.
fn radial_order(domain: &Domain) -> (Vec<usize>, Vec<usize>) {
    let radii = domain.radii();
    let mut order = domain.active_cells().to_vec();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let mut group_start = vec![0; order.len()];
    for i in 1..order.len() {
        group_start[i] = if radii[order[i]] == radii[order[i - 1]] {
            group_start[i - 1]
        } else {
            i
        };
    }
    (order, group_start)
}

fn suffix_fold(values: impl DoubleEndedIterator<Item = f64>, len: usize, op: fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut acc: Option<f64> = None;
    for (i, v) in values.rev().enumerate() {
        let next = acc.map_or(v, |a| op(a, v));
        out[len - 1 - i] = next;
        acc = Some(next);
    }
    out
}

/// Smallest `C` with `|p(x) - p(y)| <= C / log(e + |x|)` over ordered
/// active pairs with `|y| >= |x|`. Computed exactly from radial suffix
/// extrema.
pub fn decay_log_holder_constant(p: &ExponentField) -> f64 {
    let domain = p.domain();
    if domain.active_count() < 2 {
        return 0.0;
    }
    let (order, group_start) = radial_order(domain);
    let len = order.len();
    let hi = suffix_fold(order.iter().map(|&c| p.get(c)), len, f64::max);
    let lo = suffix_fold(order.iter().map(|&c| p.get(c)), len, f64::min);
    let radii = domain.radii();
    order
        .iter()
        .zip(&group_start)
        .map(|(&c, &g)| {
            let v = p.get(c);
            let spread = (hi[g] - v).max(v - lo[g]);
            spread * (E + radii[c]).ln()
        })
        .fold(0.0, f64::max)
}

/// `I_q(x) = sup { q(y) : |y| >= |x| }` over active cells, with all cells
/// at equal radius included.
pub fn tail_sup(q: &ExponentField) -> GridFunction {
    let domain = q.domain();
    let (order, group_start) = radial_order(domain);
    let hi = suffix_fold(order.iter().map(|&c| q.get(c)), order.len(), f64::max);
    let mut values = vec![0.0; domain.cell_count()];
    for (&c, &g) in order.iter().zip(&group_start) {
        values[c] = hi[g];
    }
    GridFunction::new(domain, values).expect("suffix maxima of finite values are finite")
}
