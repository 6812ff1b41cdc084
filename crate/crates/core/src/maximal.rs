//! Hardy–Littlewood and fractional maximal operators over cell-aligned cubes.
//!
//! For an active cell `x` the fractional maximal function is
//!
//! ```text
//! M_α f(x) = max { |Q|^(α/n - 1) Σ_{active y ∈ Q} |f(y)| h^n : Q ∋ x }
//! ```
//!
//! where `Q` ranges over axis-aligned cubes made of `k × ... × k` whole
//! cells, `k = 1..=K`, at every integer offset. Cubes may leave the box;
//! cells outside contribute nothing while `|Q| = (k h)^n` stays the full
//! measure. `α = 0` gives the uncentered Hardy–Littlewood operator.
//!
//! In one dimension see [`line_maximal`]. In two dimensions the fast path
//! works one side length at a time. A cube that sticks out
//! of the box along an axis covers a subset of the cells covered by a cube
//! of the same side shifted back inside (or, when `k` exceeds the axis
//! length, of the full axis), so only clipped window lengths
//! `min(k, m_axis)` at in-range offsets are needed. Window sums are then a
//! separable pass of [`window_sums`], and the maximum over the windows
//! containing each cell is a separable sliding-maximum pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VarlexError};
use crate::grid::{Domain, GridFunction};
use crate::window::{covering_max, window_sums, MaxScratch, SumScratch};

/// Cubes of side `k h` for `k = 1..=max_side`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeFamily {
    max_side: usize,
}

impl CubeFamily {
    pub fn new(max_side: usize) -> Result<Self> {
        if max_side == 0 {
            return Err(VarlexError::InvalidCubeFamily);
        }
        Ok(Self { max_side })
    }

    /// Side lengths up to the largest axis cell count.
    pub fn for_domain(domain: &Domain) -> Self {
        Self {
            max_side: domain.shape().iter().copied().max().unwrap_or(1),
        }
    }

    /// Uses `max_side` when given, otherwise [`CubeFamily::for_domain`].
    pub fn resolve(domain: &Domain, max_side: Option<usize>) -> Result<Self> {
        max_side.map_or_else(|| Ok(Self::for_domain(domain)), Self::new)
    }

    pub fn max_side(&self) -> usize {
        self.max_side
    }

    pub fn sides(&self) -> impl Iterator<Item = usize> {
        1..=self.max_side
    }

    /// `|Q|^(α/n - 1)` for the cube of side `k` cells.
    pub fn weight(k: usize, spacing: f64, dim: usize, alpha: f64) -> f64 {
        let measure = (k as f64 * spacing).powi(dim as i32);
        measure.powf(alpha / dim as f64 - 1.0)
    }

    /// `|Q|^(α/n - 1) h^n = (kh)^α / k^n`, the factor applied to a plain sum
    /// of cell values. Exact for `α = 0`.
    pub fn cell_sum_weight(k: usize, spacing: f64, dim: usize, alpha: f64) -> f64 {
        (k as f64 * spacing).powf(alpha) / (k as f64).powi(dim as i32)
    }
}

fn check_alpha(alpha: f64, dim: usize) -> Result<()> {
    if alpha >= 0.0 && alpha < dim as f64 {
        Ok(())
    } else {
        Err(VarlexError::InvalidAlpha {
            alpha,
            n: dim,
            range: "[0, n)",
        })
    }
}

/// Fast fractional maximal operator. Output is bit-identical for any
/// rayon pool size.
pub fn fractional_maximal(f: &GridFunction, alpha: f64, family: &CubeFamily) -> Result<GridFunction> {
    let domain = f.domain();
    check_alpha(alpha, domain.dim())?;
    let magnitudes: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();

    let spacing = domain.spacing();
    let dim = domain.dim();
    let weight = |k: usize| CubeFamily::cell_sum_weight(k, spacing, dim, alpha);
    let best = if dim == 1 {
        line_maximal(&magnitudes, family.max_side(), weight)
    } else {
        (1..=family.max_side())
            .into_par_iter()
            .fold(
                || Sweep::new(domain),
                |mut sweep, k| {
                    sweep.side(&magnitudes, k, weight(k));
                    sweep
                },
            )
            .map(|sweep| sweep.best)
            .reduce(|| vec![0.0; domain.cell_count()], elementwise_max)
    };
    GridFunction::new(domain, best)
}

/// Uncentered Hardy–Littlewood maximal operator, `fractional_maximal` at `α = 0`.
pub fn hl_maximal(f: &GridFunction, family: &CubeFamily) -> Result<GridFunction> {
    fractional_maximal(f, 0.0, family)
}

fn elementwise_max(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.max(y);
    }
    a
}

/// Window starts handled by one task of [`line_maximal`]. Fixed so the
/// split does not depend on the pool size.
const LINE_CHUNK: usize = 256;

/// Sums of `2^j` consecutive values: `levels[j][s] = values[s] + ... + values[s + 2^j - 1]`.
fn dyadic_sums(values: &[f64]) -> Vec<Vec<f64>> {
    let mut levels = vec![values.to_vec()];
    let mut width = 1;
    while 2 * width <= values.len() {
        let prev = levels.last().expect("level 0 exists");
        let next = (0..prev.len() - width).map(|s| prev[s] + prev[s + width]).collect();
        levels.push(next);
        width *= 2;
    }
    levels
}

/// One-dimensional fast path.
///
/// Sides are visited from longest to shortest while `running[s]` keeps the
/// best weighted sum of the windows starting at `s` seen so far. A window
/// starting at `s` contains cell `s + k - 1` exactly when its length is at
/// least `k`, so after folding in side `k` that cell receives
/// `running[s]`. Window sums are assembled from dyadic block sums.
fn line_maximal(magnitudes: &[f64], max_side: usize, weight: impl Fn(usize) -> f64 + Sync) -> Vec<f64> {
    let m = magnitudes.len();
    let top = max_side.min(m);
    let levels = dyadic_sums(magnitudes);
    (0..m.div_ceil(LINE_CHUNK))
        .into_par_iter()
        .fold(
            || vec![0.0; m],
            |mut best, chunk| {
                let a = chunk * LINE_CHUNK;
                let b = (a + LINE_CHUNK).min(m);
                let mut running = vec![0.0f64; b - a];
                let mut sums = vec![0.0f64; b - a];
                for k in (1..=top).rev() {
                    let end = b.min(m + 1 - k);
                    if end <= a {
                        continue;
                    }
                    let width = end - a;
                    let sums = &mut sums[..width];
                    sums.fill(0.0);
                    let mut offset = 0;
                    for (j, level) in levels.iter().enumerate().rev() {
                        if k & (1 << j) != 0 {
                            for (acc, &v) in sums.iter_mut().zip(&level[a + offset..a + offset + width]) {
                                *acc += v;
                            }
                            offset += 1 << j;
                        }
                    }
                    let w = weight(k);
                    let cells = &mut best[a + k - 1..end + k - 1];
                    for ((run, &sum), cell) in running.iter_mut().zip(sums.iter()).zip(cells) {
                        let value = w * sum;
                        if value > *run {
                            *run = value;
                        }
                        if *run > *cell {
                            *cell = *run;
                        }
                    }
                }
                best
            },
        )
        .reduce(|| vec![0.0; m], elementwise_max)
}

/// Per-worker state for the two-dimensional fast path: the running maximum plus scratch.
struct Sweep {
    shape: [usize; 2],
    best: Vec<f64>,
    scratch: SumScratch,
    maxima: MaxScratch,
    sums: Vec<f64>,
    rows: Vec<f64>,
    column: Vec<f64>,
    column_max: Vec<f64>,
    covered: Vec<f64>,
}

impl Sweep {
    fn new(domain: &Domain) -> Self {
        let shape = [domain.shape()[0], domain.shape()[1]];
        Self {
            shape,
            best: vec![0.0; domain.cell_count()],
            scratch: SumScratch::default(),
            maxima: MaxScratch::new(),
            sums: Vec::new(),
            rows: Vec::new(),
            column: Vec::new(),
            column_max: Vec::new(),
            covered: Vec::new(),
        }
    }

    /// Folds cubes of side `k` into `best`, each window sum multiplied by `scale`.
    fn side(&mut self, magnitudes: &[f64], k: usize, scale: f64) {
        let [m0, m1] = self.shape;
        let len0 = k.min(m0);
        let len1 = k.min(m1);
        let starts0 = m0 - len0 + 1;
        let starts1 = m1 - len1 + 1;

        // window sums along axis 1, row by row: rows[i0 * starts1 + s1]
        self.rows.clear();
        for row in magnitudes.chunks_exact(m1) {
            window_sums(row, len1, &mut self.scratch, &mut self.sums);
            self.rows.extend_from_slice(&self.sums);
        }

        // along axis 0: window sums, then the max over windows covering each i0
        self.covered.clear();
        self.covered.resize(m0 * starts1, 0.0);
        self.column_max.resize(m0, 0.0);
        for s1 in 0..starts1 {
            self.column.clear();
            self.column.extend((0..m0).map(|i0| self.rows[i0 * starts1 + s1]));
            window_sums(&self.column, len0, &mut self.scratch, &mut self.sums);
            debug_assert_eq!(self.sums.len(), starts0);
            covering_max(&self.sums, len0, m0, &mut self.maxima, &mut self.column_max);
            for (i0, &v) in self.column_max.iter().enumerate() {
                self.covered[i0 * starts1 + s1] = v;
            }
        }

        // along axis 1: max over windows covering each i1
        let mut cell_max = std::mem::take(&mut self.column_max);
        cell_max.resize(m1, 0.0);
        for (i0, windows) in self.covered.chunks_exact(starts1).enumerate() {
            covering_max(windows, len1, m1, &mut self.maxima, &mut cell_max);
            for (slot, &v) in self.best[i0 * m1..(i0 + 1) * m1].iter_mut().zip(&cell_max) {
                *slot = slot.max(scale * v);
            }
        }
        self.column_max = cell_max;
    }
}

/// Reference implementation: enumerates every cube placement, sums its
/// cells directly and pushes the value to every cell it contains.
pub fn naive_maximal(f: &GridFunction, alpha: f64, family: &CubeFamily) -> Result<GridFunction> {
    let domain = f.domain();
    let dim = domain.dim();
    check_alpha(alpha, dim)?;
    let (m0, m1) = match domain.shape() {
        [m] => (*m as i64, 1i64),
        s => (s[0] as i64, s[1] as i64),
    };
    let h_n = domain.cell_measure();
    let mut best = vec![0.0f64; domain.cell_count()];

    for k in family.sides() {
        let weight = CubeFamily::weight(k, domain.spacing(), dim, alpha);
        let side = k as i64;
        let (reach1, side1) = if dim == 1 { (0, 1) } else { (side - 1, side) };
        for s0 in -(side - 1)..m0 {
            for s1 in -reach1..m1 {
                let (a0, b0) = (s0.max(0), (s0 + side).min(m0));
                let (a1, b1) = (s1.max(0), (s1 + side1).min(m1));
                let mut mass = 0.0;
                for i0 in a0..b0 {
                    for i1 in a1..b1 {
                        let c = (i0 * m1 + i1) as usize;
                        if domain.is_active(c) {
                            mass += f.get(c).abs() * h_n;
                        }
                    }
                }
                let value = weight * mass;
                for i0 in a0..b0 {
                    for i1 in a1..b1 {
                        let c = (i0 * m1 + i1) as usize;
                        if domain.is_active(c) && value > best[c] {
                            best[c] = value;
                        }
                    }
                }
            }
        }
    }
    GridFunction::new(domain, best)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid::build_domain;

    fn line(m: usize) -> Arc<Domain> {
        build_domain(&[(0.0, 1.0)], &[m], |_| true).unwrap()
    }

    fn spike(d: &Arc<Domain>) -> GridFunction {
        GridFunction::from_fn(d, |x| if x[0] < d.spacing() { 1.0 } else { 0.0 }).unwrap()
    }

    fn close(a: &GridFunction, b: &GridFunction, rtol: f64) -> bool {
        a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| (x - y).abs() <= rtol * x.abs().max(y.abs()))
    }

    #[test]
    fn constant_function_is_fixed_by_m() {
        let d = build_domain(&[(0.0, 1.0), (0.0, 1.0)], &[6, 6], |_| true).unwrap();
        let f = GridFunction::constant(&d, 2.5).unwrap();
        let mf = hl_maximal(&f, &CubeFamily::for_domain(&d)).unwrap();
        assert!(mf.values().iter().all(|&v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn single_cell_source_hardy_littlewood() {
        let d = line(4);
        let mf = hl_maximal(&spike(&d), &CubeFamily::for_domain(&d)).unwrap();
        for j in 0..4 {
            assert!((mf.get(j) - 1.0 / (j as f64 + 1.0)).abs() < 1e-15, "cell {j}");
        }
    }

    #[test]
    fn single_cell_source_fractional() {
        let d = line(4);
        let out = fractional_maximal(&spike(&d), 0.5, &CubeFamily::for_domain(&d)).unwrap();
        for j in 0..4 {
            let want = 0.25f64.sqrt() / (j as f64 + 1.0).sqrt();
            assert!((out.get(j) - want).abs() < 1e-15, "cell {j}");
        }
    }

    #[test]
    fn unit_family_returns_magnitude() {
        let d = line(5);
        let f = GridFunction::new(&d, vec![1.0, -2.0, 0.0, 3.5, -0.25]).unwrap();
        let family = CubeFamily::new(1).unwrap();
        let abs = f.abs();
        assert!(close(&hl_maximal(&f, &family).unwrap(), &abs, 1e-15));
        assert!(close(&naive_maximal(&f, 0.0, &family).unwrap(), &abs, 1e-15));
    }

    #[test]
    fn zero_function() {
        let d = line(7);
        let family = CubeFamily::for_domain(&d);
        let zero = GridFunction::zeros(&d);
        assert!(fractional_maximal(&zero, 0.3, &family).unwrap().is_zero());
        assert!(naive_maximal(&zero, 0.3, &family).unwrap().is_zero());
    }

    #[test]
    fn alpha_range_is_checked() {
        let d = line(3);
        let f = GridFunction::zeros(&d);
        let family = CubeFamily::for_domain(&d);
        for alpha in [-0.1, 1.0, 2.0, f64::NAN] {
            assert!(matches!(
                fractional_maximal(&f, alpha, &family),
                Err(VarlexError::InvalidAlpha { .. })
            ));
        }
        assert_eq!(CubeFamily::new(0).unwrap_err(), VarlexError::InvalidCubeFamily);
    }

    #[test]
    fn fast_matches_naive_on_masked_rectangle() {
        let d = build_domain(&[(0.0, 1.4), (0.0, 0.6)], &[7, 3], |x| x[0] + x[1] < 1.5).unwrap();
        let f = GridFunction::from_fn(&d, |x| (7.0 * x[0]).sin() + 2.0 * x[1]).unwrap();
        for k in [1, 2, 5, 7, 9] {
            let family = CubeFamily::new(k).unwrap();
            for alpha in [0.0, 0.5, 1.5] {
                let fast = fractional_maximal(&f, alpha, &family).unwrap();
                let slow = naive_maximal(&f, alpha, &family).unwrap();
                assert!(close(&fast, &slow, 1e-13), "k {k} alpha {alpha}");
            }
        }
    }

    #[test]
    fn inactive_cells_are_zero() {
        let d = build_domain(&[(0.0, 1.0)], &[6], |x| x[0] < 0.4 || x[0] > 0.8).unwrap();
        let f = GridFunction::constant(&d, 1.0).unwrap();
        let mf = hl_maximal(&f, &CubeFamily::for_domain(&d)).unwrap();
        assert_eq!(mf.values()[2..5], [0.0, 0.0, 0.0]);
        assert_eq!(mf.get(0), 1.0);
    }
}
