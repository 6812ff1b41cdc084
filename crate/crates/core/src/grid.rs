//! Cell grids approximating an open set from inside, and piecewise-constant
//! functions sampled at cell centers.
//!
//! Cells are stored in lexicographic order with axis 0 as the slowest index,
//! so in two dimensions cell `(i0, i1)` lives at `i0 * m1 + i1`.

use std::sync::Arc;

use crate::error::{Result, VarlexError};

/// Relative tolerance used when checking that all axes share one spacing.
const SPACING_RTOL: f64 = 1e-12;

/// A cell-centered point. One-dimensional domains leave the second
/// coordinate at zero.
pub type Point = [f64; 2];

/// Axis-aligned box grid with an activity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
    shape: Vec<usize>,
    spacing: f64,
    mask: Vec<bool>,
    active: Vec<usize>,
    centers: Vec<Point>,
    radii: Vec<f64>,
}

/// Builds a domain over `bounds` with `resolution` cells per axis, keeping
/// the cells whose center satisfies `rule`.
pub fn build_domain<F>(bounds: &[(f64, f64)], resolution: &[usize], rule: F) -> Result<Arc<Domain>>
where
    F: Fn(&[f64]) -> bool,
{
    Domain::build(bounds, resolution, rule).map(Arc::new)
}

impl Domain {
    pub fn build<F>(bounds: &[(f64, f64)], resolution: &[usize], rule: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool,
    {
        let (spacing, centers) = Self::layout(bounds, resolution)?;
        let dim = bounds.len();
        let mask = centers.iter().map(|c| rule(&c[..dim])).collect();
        Self::assemble(bounds, resolution, spacing, centers, mask)
    }

    /// Builds a domain from an explicit per-cell mask in lexicographic order.
    pub fn with_mask(bounds: &[(f64, f64)], resolution: &[usize], mask: Vec<bool>) -> Result<Self> {
        let (spacing, centers) = Self::layout(bounds, resolution)?;
        if mask.len() != centers.len() {
            return Err(VarlexError::LengthMismatch {
                expected: centers.len(),
                got: mask.len(),
            });
        }
        Self::assemble(bounds, resolution, spacing, centers, mask)
    }

    fn layout(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<(f64, Vec<Point>)> {
        let dim = bounds.len();
        if !(1..=2).contains(&dim) {
            return Err(VarlexError::UnsupportedDimension(dim));
        }
        if resolution.len() != dim {
            return Err(VarlexError::LengthMismatch {
                expected: dim,
                got: resolution.len(),
            });
        }
        let mut steps = Vec::with_capacity(dim);
        for (axis, (&(lo, hi), &m)) in bounds.iter().zip(resolution).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(VarlexError::InvalidBox { axis, lo, hi });
            }
            if m == 0 {
                return Err(VarlexError::InvalidResolution { axis });
            }
            steps.push((hi - lo) / m as f64);
        }
        let h0 = steps[0];
        for (axis, &h) in steps.iter().enumerate().skip(1) {
            if (h - h0).abs() > SPACING_RTOL * h0 {
                return Err(VarlexError::NonUniformSpacing { axis, h0, h });
            }
        }

        let center = |axis: usize, i: usize| bounds[axis].0 + (i as f64 + 0.5) * h0;
        let centers = match dim {
            1 => (0..resolution[0]).map(|i| [center(0, i), 0.0]).collect(),
            _ => {
                let mut out = Vec::with_capacity(resolution[0] * resolution[1]);
                for i0 in 0..resolution[0] {
                    for i1 in 0..resolution[1] {
                        out.push([center(0, i0), center(1, i1)]);
                    }
                }
                out
            }
        };
        Ok((h0, centers))
    }

    fn assemble(
        bounds: &[(f64, f64)],
        resolution: &[usize],
        spacing: f64,
        centers: Vec<Point>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        let active: Vec<usize> = (0..mask.len()).filter(|&c| mask[c]).collect();
        if active.is_empty() {
            return Err(VarlexError::EmptyDomain);
        }
        let radii = centers.iter().map(norm).collect();
        Ok(Self {
            bounds: bounds.to_vec(),
            shape: resolution.to_vec(),
            spacing,
            mask,
            active,
            centers,
            radii,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Cells per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Uniform cell side length `h`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Measure of one cell, `h^n`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.mask.len()
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Measure of the union of active cells.
    pub fn active_measure(&self) -> f64 {
        self.cell_measure() * self.active.len() as f64
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_active(&self, cell: usize) -> bool {
        self.mask[cell]
    }

    /// Indices of active cells in lexicographic order.
    pub fn active_cells(&self) -> &[usize] {
        &self.active
    }

    pub fn center(&self, cell: usize) -> Point {
        self.centers[cell]
    }

    /// Euclidean norm `|x|` of each cell center.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Euclidean distance between two cell centers.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.centers[a], self.centers[b]);
        norm(&[x[0] - y[0], x[1] - y[1]])
    }

    /// Multi-index of a cell; unused trailing axes are zero.
    pub fn cell_index(&self, cell: usize) -> [usize; 2] {
        match self.dim() {
            1 => [cell, 0],
            _ => [cell / self.shape[1], cell % self.shape[1]],
        }
    }
}

fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// One real value per cell. Values on inactive cells are always zero.
#[derive(Debug, Clone)]
pub struct GridFunction {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.same_domain(other) && self.values == other.values
    }
}

impl GridFunction {
    /// Wraps raw values, zeroing inactive cells. Non-finite values on active
    /// cells are rejected.
    pub fn new(domain: &Arc<Domain>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.cell_count() {
            return Err(VarlexError::LengthMismatch {
                expected: domain.cell_count(),
                got: values.len(),
            });
        }
        for (cell, v) in values.iter_mut().enumerate() {
            if !domain.is_active(cell) {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(VarlexError::NonFinite { cell, value: *v });
            }
        }
        Ok(Self {
            domain: Arc::clone(domain),
            values,
        })
    }

    /// Samples `f` at every active cell center.
    pub fn from_fn<F>(domain: &Arc<Domain>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let dim = domain.dim();
        let values = (0..domain.cell_count())
            .map(|c| {
                if domain.is_active(c) {
                    f(&domain.center(c)[..dim])
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: &Arc<Domain>, value: f64) -> Result<Self> {
        Self::from_fn(domain, |_| value)
    }

    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self {
            domain: Arc::clone(domain),
            values: vec![0.0; domain.cell_count()],
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn same_domain(&self, other: &GridFunction) -> bool {
        self.domain_matches(&other.domain)
    }

    pub fn domain_matches(&self, domain: &Arc<Domain>) -> bool {
        Arc::ptr_eq(&self.domain, domain) || *self.domain == **domain
    }

    pub(crate) fn ensure_same_domain(&self, other: &GridFunction) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(VarlexError::DomainMismatch)
        }
    }

    /// Applies `op` to every active value.
    pub fn map<F>(&self, op: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        self.map_cells(|_, v| op(v))
    }

    /// Applies `op(cell, value)` to every active value.
    pub fn map_cells<F>(&self, op: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64,
    {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(c, &v)| if self.domain.is_active(c) { op(c, v) } else { 0.0 })
            .collect();
        Self::new(&self.domain, values)
    }

    pub fn zip_with<F>(&self, other: &GridFunction, op: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        self.ensure_same_domain(other)?;
        self.map_cells(|c, v| op(v, other.values[c]))
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        self.map(|v| factor * v)
    }

    pub fn abs(&self) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Midpoint quadrature over the active cells, `sum f(c) h^n`.
    pub fn integrate(&self) -> f64 {
        integrate(self)
    }
}

/// Midpoint quadrature over the active cells, accumulated in lexicographic
/// cell order.
pub fn integrate(f: &GridFunction) -> f64 {
    let sum: f64 = f.domain.active_cells().iter().map(|&c| f.values[c]).sum();
    sum * f.domain.cell_measure()
}
