use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::exponent::ExponentPair;
use crate::grid::{Domain, GridFunction};
use crate::lab::generate::MixtureGenerator;
use crate::maximal::{fractional_maximal, CubeFamily};
use crate::norm::luxemburg_norm;

/// A deterministic family of test functions indexed by case number.
pub trait FunctionSource: Sync {
    fn generate(&self, domain: &Arc<Domain>, case: u64) -> Result<GridFunction>;
}

impl FunctionSource for MixtureGenerator {
    fn generate(&self, domain: &Arc<Domain>, case: u64) -> Result<GridFunction> {
        self.sample(domain, case)
    }
}

impl<F> FunctionSource for F
where
    F: Fn(&Arc<Domain>, u64) -> Result<GridFunction> + Sync,
{
    fn generate(&self, domain: &Arc<Domain>, case: u64) -> Result<GridFunction> {
        self(domain, case)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCase {
    pub id: u64,
    /// `‖M_α f‖_q / ‖f‖_p`.
    pub ratio: f64,
    pub norm_f: f64,
    pub norm_maximal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub alpha: f64,
    pub grid: Vec<usize>,
    pub max_side: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub argmax: Option<u64>,
    /// Cases whose function vanished on the grid.
    pub skipped: Vec<u64>,
    pub cases: Vec<SweepCase>,
}

/// Ratio `‖M_α f‖_{q(.)} / ‖f‖_{p(.)}` over cases `0..cases` of `source`.
/// No bound is asserted; the operator norm is not known in closed form.
pub fn bound_sweep<S: FunctionSource>(
    source: &S,
    pair: &ExponentPair,
    family: &CubeFamily,
    cases: u64,
    tol: f64,
) -> Result<SweepReport> {
    let domain = pair.domain();
    let results: Vec<Result<Option<SweepCase>>> = (0..cases)
        .into_par_iter()
        .map(|id| {
            let f = source.generate(domain, id)?;
            let norm_f = luxemburg_norm(&f, pair.p(), tol)?.norm;
            if norm_f == 0.0 {
                return Ok(None);
            }
            let maximal = fractional_maximal(&f, pair.alpha(), family)?;
            let norm_maximal = luxemburg_norm(&maximal, pair.q(), tol)?.norm;
            Ok(Some(SweepCase {
                id,
                ratio: norm_maximal / norm_f,
                norm_f,
                norm_maximal,
            }))
        })
        .collect();

    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for (id, r) in (0..cases).zip(results) {
        match r? {
            Some(case) => kept.push(case),
            None => skipped.push(id),
        }
    }

    let argmax = kept
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio).then(b.id.cmp(&a.id)))
        .map(|c| c.id);
    let mut ratios: Vec<f64> = kept.iter().map(|c| c.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median_ratio = match ratios.len() {
        0 => 0.0,
        k if k % 2 == 1 => ratios[k / 2],
        k => 0.5 * (ratios[k / 2 - 1] + ratios[k / 2]),
    };
    Ok(SweepReport {
        alpha: pair.alpha(),
        grid: domain.shape().to_vec(),
        max_side: family.max_side(),
        max_ratio: ratios.last().copied().unwrap_or(0.0),
        median_ratio,
        argmax,
        skipped,
        cases: kept,
    })
}
