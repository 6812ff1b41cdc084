//! Pointwise inequalities between `M_α` and `M`.
//!
//! * [`verify_lemma`] checks, cell by cell,
//!   `M_α f ≤ (M |f|^{(p/q)(n/(n-α))})^{1-α/n} (∫ |f|^p)^{α/n}`. On the grid this
//!   is exact: for every cube the discrete Hölder inequality applies with
//!   exponents `n/(n-α)` and `n/α`, because `p/q + αp/n = 1`.
//! * [`PropositionCheck`] measures the smallest constant `C` with
//!   `M_α f ≤ C (Mf)^{p/q}` (values 0 or ≥ 1) or `M_α f ≤ C (Mf)^{p/I_q}`
//!   (values in `[0, 1)`). The result is an observed lower bound for the
//!   true constant, never the constant itself.
//! * [`composite_modular_identity`] and [`bound_sweep`] cover the
//!   modular identity and the numerical boundedness ratio.

pub mod generate;
mod sweep;

use serde::Serialize;

pub use sweep::{bound_sweep, FunctionSource, SweepCase, SweepReport};

use crate::error::{Result, VarlexError};
use crate::exponent::{decay_log_holder_constant, local_log_holder_constant, tail_sup, ExponentField, ExponentPair};
use crate::grid::{Domain, GridFunction};
use crate::maximal::{fractional_maximal, hl_maximal, CubeFamily};
use crate::norm::{luxemburg_norm, modular, normalize, DEFAULT_TOLERANCE};

/// Allowed excess of the lemma ratio over 1; covers `powf` and summation
/// rounding at 64x64 scale.
pub const LEMMA_TOLERANCE: f64 = 1e-9;

/// Slack on `‖f‖ ≤ 1` when checking proposition hypotheses.
pub const NORM_SLACK: f64 = 1e-9;

/// Values are clamped to this when building inputs for the `[0, 1)` check.
pub const SUB_UNIT_CLAMP: f64 = 0.999;

const AT_LEAST_ONE_OR_ZERO: &str = "f(x)≥1 or f(x)=0";
const BELOW_ONE: &str = "0≤f(x)<1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Lemma,
    Prop1,
    Prop2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub alpha: f64,
    pub n: usize,
    pub grid: Vec<usize>,
    pub active_cells: usize,
    pub max_side: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Per-active-cell sides of the inequality, in lexicographic cell order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFields {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub case_id: String,
    pub check: Check,
    /// `max lhs/rhs` over active cells with `0/0 = 0`.
    pub worst_ratio: f64,
    /// Observed `C` for the proposition checks; a lower bound for the true
    /// constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_constant: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Local (prop1) or decay (prop2) log-Hölder constant of `p`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_holder_constant: Option<f64>,
    pub metadata: ReportMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<ReportFields>,
}

impl VerificationReport {
    pub fn with_case_id(mut self, id: impl Into<String>) -> Self {
        self.case_id = id.into();
        self
    }

    pub fn with_exponent(mut self, name: impl Into<String>) -> Self {
        self.metadata.exponent = Some(name.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.metadata.seed = Some(seed);
        self
    }

    /// Drops the per-cell arrays.
    pub fn without_fields(mut self) -> Self {
        self.fields = None;
        self
    }

    /// Recomputes the worst ratio from the stored per-cell arrays.
    pub fn recomputed_ratio(&self) -> Option<f64> {
        self.fields.as_ref().map(|f| worst_ratio(&f.lhs, &f.rhs))
    }
}

/// `lhs / rhs` with `0/0 = 0`; a positive left side over a zero right side
/// is infinite.
pub fn pointwise_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn worst_ratio(lhs: &[f64], rhs: &[f64]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(&l, &r)| pointwise_ratio(l, r))
        .fold(0.0, f64::max)
}

fn metadata(domain: &Domain, alpha: f64, family: &CubeFamily) -> ReportMetadata {
    ReportMetadata {
        alpha,
        n: domain.dim(),
        grid: domain.shape().to_vec(),
        active_cells: domain.active_count(),
        max_side: family.max_side(),
        exponent: None,
        seed: None,
    }
}

fn active_values(domain: &Domain, f: &GridFunction) -> Vec<f64> {
    domain.active_cells().iter().map(|&c| f.get(c)).collect()
}

fn check_pair(f: &GridFunction, pair: &ExponentPair) -> Result<()> {
    if f.domain_matches(pair.domain()) {
        Ok(())
    } else {
        Err(VarlexError::DomainMismatch)
    }
}

/// `|f|^{(p/q)(n/(n-α))}` cell by cell.
pub fn composite_power(f: &GridFunction, pair: &ExponentPair) -> Result<GridFunction> {
    check_pair(f, pair)?;
    let n = pair.dim() as f64;
    let stretch = n / (n - pair.alpha());
    let (p, q) = (pair.p(), pair.q());
    f.map_cells(|c, v| v.abs().powf(p.get(c) / q.get(c) * stretch))
}

/// Checks the pointwise lemma with the default tolerance.
pub fn verify_lemma(f: &GridFunction, pair: &ExponentPair, family: &CubeFamily) -> Result<VerificationReport> {
    verify_lemma_with_tolerance(f, pair, family, LEMMA_TOLERANCE)
}

pub fn verify_lemma_with_tolerance(
    f: &GridFunction,
    pair: &ExponentPair,
    family: &CubeFamily,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_pair(f, pair)?;
    let domain = f.domain();
    let alpha = pair.alpha();
    let n = pair.dim() as f64;

    let lhs = fractional_maximal(f, alpha, family)?;
    let averaged = hl_maximal(&composite_power(f, pair)?, family)?;
    let mass = modular(f, pair.p())?.powf(alpha / n);
    let rhs = averaged.map(|v| v.powf(1.0 - alpha / n) * mass)?;

    let lhs = active_values(domain, &lhs);
    let rhs = active_values(domain, &rhs);
    let worst = worst_ratio(&lhs, &rhs);
    Ok(VerificationReport {
        case_id: String::new(),
        check: Check::Lemma,
        worst_ratio: worst,
        empirical_constant: None,
        pass: worst <= 1.0 + tolerance,
        tolerance: Some(tolerance),
        log_holder_constant: None,
        metadata: metadata(domain, alpha, family),
        fields: Some(ReportFields { lhs, rhs }),
    })
}

/// Measures the empirical constant of one of the two proposition
/// inequalities for a fixed exponent pair and cube family. The exponent
/// ratio and the log-Hölder constant are computed once and reused for every
/// checked function.
#[derive(Debug, Clone)]
pub struct PropositionCheck<'a> {
    pair: &'a ExponentPair,
    family: CubeFamily,
    check: Check,
    exponent: GridFunction,
    log_holder: f64,
}

impl<'a> PropositionCheck<'a> {
    /// `M_α f ≤ C (Mf)^{p/q}` for `f` with values 0 or ≥ 1.
    pub fn prop1(pair: &'a ExponentPair, family: CubeFamily) -> Result<Self> {
        let exponent = pair.p().as_function().zip_with(pair.q().as_function(), |p, q| p / q)?;
        Ok(Self {
            pair,
            family,
            check: Check::Prop1,
            exponent,
            log_holder: local_log_holder_constant(pair.p()),
        })
    }

    /// `M_α f ≤ C (Mf)^{p/I_q}` for `f` with values in `[0, 1)`.
    pub fn prop2(pair: &'a ExponentPair, family: CubeFamily) -> Result<Self> {
        let tail = tail_sup(pair.q());
        let exponent = pair.p().as_function().zip_with(&tail, |p, iq| p / iq)?;
        Ok(Self {
            pair,
            family,
            check: Check::Prop2,
            exponent,
            log_holder: decay_log_holder_constant(pair.p()),
        })
    }

    pub fn log_holder_constant(&self) -> f64 {
        self.log_holder
    }

    fn check_hypotheses(&self, f: &GridFunction) -> Result<()> {
        let domain = f.domain();
        let (condition, admissible): (&'static str, fn(f64) -> bool) = match self.check {
            Check::Prop2 => (BELOW_ONE, |v| (0.0..1.0).contains(&v)),
            _ => (AT_LEAST_ONE_OR_ZERO, |v| v == 0.0 || v >= 1.0),
        };
        if let Some(&cell) = domain.active_cells().iter().find(|&&c| !admissible(f.get(c))) {
            return Err(VarlexError::Hypothesis {
                cell,
                value: f.get(cell),
                condition,
            });
        }
        let norm = luxemburg_norm(f, self.pair.p(), DEFAULT_TOLERANCE)?.norm;
        if norm > 1.0 + NORM_SLACK {
            return Err(VarlexError::NormTooLarge { norm });
        }
        Ok(())
    }

    pub fn check(&self, f: &GridFunction) -> Result<VerificationReport> {
        check_pair(f, self.pair)?;
        self.check_hypotheses(f)?;
        let domain = f.domain();
        let alpha = self.pair.alpha();

        let lhs = fractional_maximal(f, alpha, &self.family)?;
        let mf = hl_maximal(f, &self.family)?;
        let rhs = mf.zip_with(&self.exponent, f64::powf)?;

        let lhs = active_values(domain, &lhs);
        let rhs = active_values(domain, &rhs);
        let constant = worst_ratio(&lhs, &rhs);
        Ok(VerificationReport {
            case_id: String::new(),
            check: self.check,
            worst_ratio: constant,
            empirical_constant: Some(constant),
            pass: constant.is_finite(),
            tolerance: None,
            log_holder_constant: Some(self.log_holder),
            metadata: metadata(domain, alpha, &self.family),
            fields: Some(ReportFields { lhs, rhs }),
        })
    }
}

pub fn verify_prop1(f: &GridFunction, pair: &ExponentPair, family: &CubeFamily) -> Result<VerificationReport> {
    PropositionCheck::prop1(pair, *family)?.check(f)
}

pub fn verify_prop2(f: &GridFunction, pair: &ExponentPair, family: &CubeFamily) -> Result<VerificationReport> {
    PropositionCheck::prop2(pair, *family)?.check(f)
}

/// Normalizes `g` to unit norm and zeroes values below 1, which keeps the
/// norm at most 1 and leaves values that are 0 or ≥ 1.
pub fn admissible_at_least_one(g: &GridFunction, p: &ExponentField) -> Result<GridFunction> {
    normalize(&g.abs(), p)?.map(|v| if v >= 1.0 { v } else { 0.0 })
}

/// Normalizes `g` to unit norm and clamps values to [`SUB_UNIT_CLAMP`].
pub fn admissible_below_one(g: &GridFunction, p: &ExponentField) -> Result<GridFunction> {
    normalize(&g.abs(), p)?.map(|v| v.min(SUB_UNIT_CLAMP))
}

/// `|ρ_{q(1-α/n)}(|f|^{(p/q)(n/(n-α))}) - ρ_p(f)|`, where `ρ` is the
/// modular. The two are equal because the exponents multiply back to `p`.
pub fn composite_modular_identity(f: &GridFunction, pair: &ExponentPair) -> Result<f64> {
    let n = pair.dim() as f64;
    let shrink = 1.0 - pair.alpha() / n;
    let reduced = ExponentField::new(pair.q().as_function().map(|q| q * shrink)?)?;
    let composite = composite_power(f, pair)?;
    Ok((modular(&composite, &reduced)? - modular(f, pair.p())?).abs())
}
