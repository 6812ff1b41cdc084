//! JSON run configurations: domain, exponent, order `alpha`, cube family,
//! tolerances, seed and output paths.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VarlexError};
use crate::exponent::{ExponentFamily, ExponentField};
use crate::grid::{Domain, GridFunction};
use crate::io;
use crate::lab::generate::MixtureGenerator;
use crate::norm::DEFAULT_TOLERANCE;

fn invalid(field: &str, message: impl Into<String>) -> VarlexError {
    VarlexError::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// `{n, box, resolution, mask}`. `mask` is `"all"`, `"disk"` (the disk
/// inscribed in the box), `"disk:R"` (`|x| < R`) or `"csv:<path>"` (cells
/// listed with a nonzero value are active).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub n: usize,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
    #[serde(default = "default_mask")]
    pub mask: String,
}

fn default_mask() -> String {
    "all".into()
}

impl DomainSpec {
    pub fn unit_box(n: usize, cells: usize) -> Self {
        Self {
            n,
            bounds: vec![[0.0, 1.0]; n],
            resolution: vec![cells; n],
            mask: default_mask(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n) {
            return Err(invalid("domain.n", format!("{} is not 1 or 2", self.n)));
        }
        if self.bounds.len() != self.n {
            return Err(invalid("domain.box", format!("expected {} intervals", self.n)));
        }
        if self.resolution.len() != self.n {
            return Err(invalid("domain.resolution", format!("expected {} counts", self.n)));
        }
        if let Some([lo, hi]) = self.bounds.iter().find(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(invalid("domain.box", format!("[{lo}, {hi}] is not a proper interval")));
        }
        if self.resolution.contains(&0) {
            return Err(invalid("domain.resolution", "counts must be at least 1"));
        }
        self.mask_rule()?;
        Ok(())
    }

    fn mask_rule(&self) -> Result<MaskRule> {
        let m = self.mask.as_str();
        if m == "all" {
            Ok(MaskRule::All)
        } else if m == "disk" {
            let center: Vec<f64> = self.bounds.iter().map(|[a, b]| 0.5 * (a + b)).collect();
            let radius = self.bounds.iter().map(|[a, b]| 0.5 * (b - a)).fold(f64::INFINITY, f64::min);
            Ok(MaskRule::Disk { center, radius })
        } else if let Some(r) = m.strip_prefix("disk:") {
            let radius: f64 = r
                .parse()
                .map_err(|_| invalid("domain.mask", format!("bad radius `{r}`")))?;
            Ok(MaskRule::Disk {
                center: vec![0.0; self.n],
                radius,
            })
        } else if let Some(path) = m.strip_prefix("csv:") {
            Ok(MaskRule::Csv(path.to_owned()))
        } else {
            Err(invalid("domain.mask", format!("unknown mask `{m}`")))
        }
    }

    /// Builds the domain; relative mask paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Arc<Domain>> {
        self.validate()?;
        let bounds: Vec<(f64, f64)> = self.bounds.iter().map(|&[a, b]| (a, b)).collect();
        let domain = match self.mask_rule()? {
            MaskRule::All => Domain::build(&bounds, &self.resolution, |_| true)?,
            MaskRule::Disk { center, radius } => Domain::build(&bounds, &self.resolution, |x| {
                x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() < radius
            })?,
            MaskRule::Csv(path) => {
                let full = Arc::new(Domain::build(&bounds, &self.resolution, |_| true)?);
                let file = std::fs::File::open(resolve(base, &path))?;
                let marks = io::rows_to_function(&io::read_rows(file)?, &full)?;
                Domain::with_mask(&bounds, &self.resolution, marks.values().iter().map(|&v| v != 0.0).collect())?
            }
        };
        Ok(Arc::new(domain))
    }

    /// The same box and mask at `factor` times the resolution.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            resolution: self.resolution.iter().map(|m| m * factor).collect(),
            ..self.clone()
        }
    }
}

enum MaskRule {
    All,
    Disk { center: Vec<f64>, radius: f64 },
    Csv(String),
}

/// An exponent family or a field file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Family(ExponentFamily),
    File { csv: String },
}

impl ExponentSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExponentSpec::Family(ExponentFamily::Constant { p0 }) => {
                if !(p0 > 1.0 && p0.is_finite()) {
                    return Err(invalid("exponent.p0", "must be finite and > 1"));
                }
            }
            ExponentSpec::Family(ExponentFamily::Affine {
                p0,
                slope,
                clamp_lo,
                clamp_hi,
            }) => {
                if !(p0.is_finite() && slope.is_finite()) {
                    return Err(invalid("exponent.p0", "p0 and slope must be finite"));
                }
                if clamp_lo.is_nan() || clamp_lo <= 1.0 {
                    return Err(invalid("exponent.clamp_lo", "must be > 1"));
                }
                if !(clamp_hi >= clamp_lo && clamp_hi.is_finite()) {
                    return Err(invalid("exponent.clamp_hi", "must be finite and >= clamp_lo"));
                }
            }
            ExponentSpec::Family(ExponentFamily::LogDecay { p_inf, a }) => {
                if !(p_inf.is_finite() && a.is_finite()) {
                    return Err(invalid("exponent.p_inf", "p_inf and a must be finite"));
                }
                // p ranges over [p_inf, p_inf + a] (a > 0) or [p_inf + a, p_inf] (a < 0)
                if p_inf.min(p_inf + a) <= 1.0 {
                    return Err(invalid("exponent.p_inf", "p_inf + min(a, 0) must be > 1"));
                }
            }
            ExponentSpec::File { ref csv } => {
                if csv.is_empty() {
                    return Err(invalid("exponent.csv", "empty path"));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, domain: &Arc<Domain>, base: &Path) -> Result<ExponentField> {
        self.validate()?;
        match self {
            ExponentSpec::Family(family) => family.sample(domain),
            ExponentSpec::File { csv } => {
                let f = io::read_function_file(&resolve(base, csv), Some(domain))?;
                ExponentField::new(f)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExponentSpec::Family(f) => f.name(),
            ExponentSpec::File { .. } => "csv",
        }
    }
}

/// Shorthand used on the command line: `const:2`, `constant:2`,
/// `affine:p0,slope,lo,hi`, `log_decay:p_inf,a`, `csv:<path>`.
impl FromStr for ExponentSpec {
    type Err = VarlexError;

    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = s
            .split_once(':')
            .ok_or_else(|| invalid("exponent", format!("`{s}` is not family:args")))?;
        if head == "csv" {
            return Ok(ExponentSpec::File { csv: args.to_owned() });
        }
        let nums: Vec<f64> = args
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| invalid("exponent", format!("`{t}` is not a number")))
            })
            .collect::<Result<_>>()?;
        let family = match (head, nums.as_slice()) {
            ("const" | "constant", &[p0]) => ExponentFamily::Constant { p0 },
            ("affine", &[p0, slope, clamp_lo, clamp_hi]) => ExponentFamily::Affine {
                p0,
                slope,
                clamp_lo,
                clamp_hi,
            },
            ("log_decay", &[p_inf, a]) => ExponentFamily::LogDecay { p_inf, a },
            _ => return Err(invalid("exponent", format!("cannot parse `{s}`"))),
        };
        let spec = ExponentSpec::Family(family);
        spec.validate()?;
        Ok(spec)
    }
}

/// Where the function under test comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: f64 },
    Csv { path: String },
    /// A seeded mixture of bumps; falls back to the run seed.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        case: u64,
    },
}

impl FunctionSpec {
    pub fn build(&self, domain: &Arc<Domain>, base: &Path, run_seed: u64) -> Result<GridFunction> {
        match self {
            FunctionSpec::Constant { value } => GridFunction::constant(domain, *value),
            FunctionSpec::Csv { path } => io::read_function_file(&resolve(base, path), Some(domain)),
            FunctionSpec::Random { seed, case } => {
                MixtureGenerator::new(seed.unwrap_or(run_seed)).sample(domain, *case)
            }
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, FunctionSpec::Random { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed excess of the pointwise lemma ratio over 1.
    #[serde(default = "default_lemma_tol")]
    pub lemma: f64,
    /// Relative bracket width for Luxemburg norms.
    #[serde(default = "default_norm_tol")]
    pub luxemburg: f64,
}

fn default_lemma_tol() -> f64 {
    crate::lab::LEMMA_TOLERANCE
}

fn default_norm_tol() -> f64 {
    DEFAULT_TOLERANCE
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lemma: default_lemma_tol(),
            luxemburg: default_norm_tol(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub exponent: ExponentSpec,
    pub alpha: f64,
    #[serde(default)]
    pub max_side: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cases: Option<usize>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.exponent.validate()?;
        let n = self.domain.n as f64;
        if !(self.alpha > 0.0 && self.alpha < n) {
            return Err(invalid("alpha", format!("{} outside (0, {n})", self.alpha)));
        }
        if self.max_side == Some(0) {
            return Err(invalid("max_side", "must be at least 1"));
        }
        if !(self.tolerances.lemma >= 0.0 && self.tolerances.lemma.is_finite()) {
            return Err(invalid("tolerances.lemma", "must be finite and >= 0"));
        }
        let t = self.tolerances.luxemburg;
        if !(t > 0.0 && t <= 1e-4) {
            return Err(invalid("tolerances.luxemburg", "must lie in (0, 1e-4]"));
        }
        if self.cases == Some(0) {
            return Err(invalid("cases", "must be at least 1"));
        }
        if let Some(FunctionSpec::Constant { value }) = self.function {
            if !value.is_finite() {
                return Err(invalid("function.value", "must be finite"));
            }
        }
        Ok(())
    }

    /// A 64x64 unit square with a log-decaying exponent and `alpha = 1/2`.
    pub fn demo() -> Self {
        Self {
            domain: DomainSpec::unit_box(2, 64),
            exponent: ExponentSpec::Family(ExponentFamily::LogDecay { p_inf: 1.6, a: 0.5 }),
            alpha: 0.5,
            max_side: None,
            tolerances: Tolerances::default(),
            seed: 7,
            cases: None,
            function: Some(FunctionSpec::Random { seed: None, case: 0 }),
            outputs: Outputs::default(),
        }
    }
}
