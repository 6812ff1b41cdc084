use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use varlex_core::config::{DomainSpec, ExponentSpec, RunConfig};
use varlex_core::io::{read_function_file, write_function_csv};
use varlex_core::lab::generate::MixtureGenerator;
use varlex_core::lab::{
    admissible_at_least_one, admissible_below_one, bound_sweep, verify_lemma_with_tolerance, PropositionCheck,
    SweepReport, VerificationReport,
};
use varlex_core::{
    decay_log_holder_constant, derive_q, fractional_maximal, local_log_holder_constant, luxemburg_norm, modular,
    naive_maximal, CubeFamily, Domain, ExponentField, GridFunction, VarlexError,
};

use crate::args::{
    BenchArgs, CheckKind, Cli, Command, DomainArg, MaximalArgs, NormArgs, SweepArgs, ValidateExponentArgs, VerifyArgs,
};
use crate::output::{sink, write_json};

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The mathematical check ran and failed.
    Failed,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Ok
        } else {
            Status::Failed
        }
    }
}

const DEFAULT_SWEEP_CASES: u64 = 100;

/// Largest grid on which `bench` also times the naive operator.
const NAIVE_BENCH_CELLS: usize = 1024;

pub fn run(cli: Cli) -> Result<Status> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::ValidateExponent(args) => validate_exponent(args, out),
        Command::Norm(args) => norm(args, out),
        Command::Maximal(args) => maximal(args, out),
        Command::Verify(args) => verify(args, out),
        Command::Sweep(args) => sweep(args, out),
        Command::Bench(args) => bench(args, out),
    }
}

/// Directory that relative paths inside `file` resolve against.
fn base_of(file: &Path) -> PathBuf {
    file.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| VarlexError::Io(format!("{}: {e}", path.display())).into())
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = read_text(path)?;
    RunConfig::from_json(&text).with_context(|| format!("config {}", path.display()))
}

fn load_domain(path: &Path) -> Result<Arc<Domain>> {
    let spec: DomainSpec = serde_json::from_str(&read_text(path)?).map_err(VarlexError::from)?;
    Ok(spec.build(&base_of(path))?)
}

fn optional_domain(arg: &DomainArg) -> Result<Option<Arc<Domain>>> {
    arg.domain.as_deref().map(load_domain).transpose()
}

/// Parses exponent shorthand, or reads a JSON file holding an exponent
/// spec. Returns the spec with the directory its paths resolve against.
fn parse_exponent(text: &str) -> Result<(ExponentSpec, PathBuf)> {
    let path = Path::new(text);
    if text.ends_with(".json") && path.is_file() {
        let spec: ExponentSpec = serde_json::from_str(&read_text(path)?).map_err(VarlexError::from)?;
        spec.validate()?;
        Ok((spec, base_of(path)))
    } else {
        Ok((text.parse()?, PathBuf::new()))
    }
}

fn exponent_label(spec: &ExponentSpec) -> String {
    match spec {
        ExponentSpec::Family(family) => family.to_string(),
        ExponentSpec::File { csv } => format!("csv:{csv}"),
    }
}

#[derive(Debug, Serialize)]
struct PairSummary {
    alpha: f64,
    /// `n / alpha`, the bound `p_max` must stay below.
    limit: f64,
    q_min: f64,
    q_max: f64,
    conjugacy_residual: f64,
    reciprocal_residual: f64,
}

#[derive(Debug, Serialize)]
struct ExponentSummary {
    exponent: String,
    grid: Vec<usize>,
    active_cells: usize,
    p_min: f64,
    p_max: f64,
    local_log_holder: f64,
    decay_log_holder: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<PairSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_c: Option<f64>,
    pass: bool,
}

fn validate_exponent(args: ValidateExponentArgs, out: Option<&Path>) -> Result<Status> {
    let (spec, base) = parse_exponent(&args.exponent)?;
    let mut alpha = args.alpha;
    let domain = if let Some(path) = &args.config {
        let config = load_config(path)?;
        alpha = alpha.or(Some(config.alpha));
        config.domain.build(&base_of(path))?
    } else if let Some(domain) = optional_domain(&args.domain)? {
        domain
    } else if let ExponentSpec::File { csv } = &spec {
        read_function_file(&base.join(csv), None)?.domain().clone()
    } else {
        return Err(VarlexError::Config {
            field: "domain".into(),
            message: "family exponents need --domain or --config".into(),
        }
        .into());
    };

    let p = spec.build(&domain, &base)?;
    let pair = alpha.map(|a| derive_q(&p, a)).transpose()?;
    let local = local_log_holder_constant(&p);
    let decay = decay_log_holder_constant(&p);
    let pass = args.max_c.is_none_or(|c| local <= c && decay <= c);
    let summary = ExponentSummary {
        exponent: exponent_label(&spec),
        grid: domain.shape().to_vec(),
        active_cells: domain.active_count(),
        p_min: p.min(),
        p_max: p.max(),
        local_log_holder: local,
        decay_log_holder: decay,
        pair: pair.map(|pair| PairSummary {
            alpha: pair.alpha(),
            limit: domain.dim() as f64 / pair.alpha(),
            q_min: pair.q().min(),
            q_max: pair.q().max(),
            conjugacy_residual: pair.conjugacy_residual(),
            reciprocal_residual: pair.reciprocal_residual(),
        }),
        max_c: args.max_c,
        pass,
    };
    write_json(&summary, out)?;
    Ok(Status::from_pass(pass))
}

#[derive(Debug, Serialize)]
struct NormSummary {
    exponent: String,
    grid: Vec<usize>,
    active_cells: usize,
    norm: f64,
    bracket: (f64, f64),
    iterations: usize,
    residual: f64,
    modular: f64,
}

fn norm(args: NormArgs, out: Option<&Path>) -> Result<Status> {
    let domain = optional_domain(&args.domain)?;
    let f = read_function_file(&args.function, domain.as_ref())?;
    let (spec, base) = parse_exponent(&args.exponent)?;
    let p = spec.build(f.domain(), &base)?;
    let result = luxemburg_norm(&f, &p, args.tol)?;
    let summary = NormSummary {
        exponent: exponent_label(&spec),
        grid: f.domain().shape().to_vec(),
        active_cells: f.domain().active_count(),
        norm: result.norm,
        bracket: result.bracket,
        iterations: result.iterations,
        residual: result.residual,
        modular: modular(&f, &p)?,
    };
    write_json(&summary, out)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct MaximalBench {
    cells: usize,
    max_side: usize,
    alpha: f64,
    fast_seconds: f64,
    naive_seconds: f64,
    fast_cells_per_second: f64,
    naive_cells_per_second: f64,
    max_relative_deviation: f64,
}

fn timed<T>(op: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = op();
    (value, start.elapsed().as_secs_f64())
}

fn relative_deviation(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| {
            if x == y {
                0.0
            } else {
                (x - y).abs() / x.abs().max(y.abs())
            }
        })
        .fold(0.0, f64::max)
}

fn maximal(args: MaximalArgs, out: Option<&Path>) -> Result<Status> {
    let domain = optional_domain(&args.domain)?;
    let f = read_function_file(&args.function, domain.as_ref())?;
    let family = CubeFamily::resolve(f.domain(), args.max_side)?;

    if args.bench {
        let (fast, fast_seconds) = timed(|| fractional_maximal(&f, args.alpha, &family));
        let (naive, naive_seconds) = timed(|| naive_maximal(&f, args.alpha, &family));
        let (fast, naive) = (fast?, naive?);
        let cells = f.domain().active_count();
        let summary = MaximalBench {
            cells,
            max_side: family.max_side(),
            alpha: args.alpha,
            fast_seconds,
            naive_seconds,
            fast_cells_per_second: cells as f64 / fast_seconds,
            naive_cells_per_second: cells as f64 / naive_seconds,
            max_relative_deviation: relative_deviation(&fast, &naive),
        };
        write_json(&summary, out)?;
        return Ok(Status::Ok);
    }

    let result = if args.oracle {
        naive_maximal(&f, args.alpha, &family)?
    } else {
        fractional_maximal(&f, args.alpha, &family)?
    };
    let mut sink = sink(out)?;
    write_function_csv(&result, &mut sink)?;
    sink.flush()?;
    Ok(Status::Ok)
}

fn check_name(check: CheckKind) -> &'static str {
    match check {
        CheckKind::Lemma => "lemma",
        CheckKind::Prop1 => "prop1",
        CheckKind::Prop2 => "prop2",
    }
}

/// `x1[,x2],lhs,rhs` for every active cell.
fn write_fields_csv(domain: &Domain, report: &VerificationReport, path: &Path) -> Result<()> {
    let fields = report.fields.as_ref().expect("checks return their fields");
    let mut writer = csv::Writer::from_writer(sink(Some(path))?);
    let mut header = vec!["x1"];
    if domain.dim() == 2 {
        header.push("x2");
    }
    header.extend(["lhs", "rhs"]);
    writer.write_record(&header)?;
    for ((&cell, lhs), rhs) in domain.active_cells().iter().zip(&fields.lhs).zip(&fields.rhs) {
        let x = domain.center(cell);
        let mut row: Vec<String> = x[..domain.dim()].iter().map(f64::to_string).collect();
        row.push(lhs.to_string());
        row.push(rhs.to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

fn verify(args: VerifyArgs, out: Option<&Path>) -> Result<Status> {
    let config = load_config(&args.config)?;
    let base = base_of(&args.config);
    let domain = config.domain.build(&base)?;
    let p = config.exponent.build(&domain, &base)?;
    let pair = derive_q(&p, config.alpha)?;
    let family = CubeFamily::resolve(&domain, config.max_side)?;

    let (f, random) = match (&args.function, &config.function) {
        (Some(path), _) => (read_function_file(path, Some(&domain))?, false),
        (None, Some(spec)) => (spec.build(&domain, &base, config.seed)?, spec.is_random()),
        (None, None) => bail!(VarlexError::Config {
            field: "function".into(),
            message: "no function in the config and no --function given".into(),
        }),
    };
    // seeded functions are filtered into the hypothesis class; given data is checked as is
    let f = match (args.check, random) {
        (CheckKind::Prop1, true) => admissible_at_least_one(&f, &p)?,
        (CheckKind::Prop2, true) => admissible_below_one(&f, &p)?,
        _ => f,
    };

    let report = match args.check {
        CheckKind::Lemma => verify_lemma_with_tolerance(&f, &pair, &family, config.tolerances.lemma)?,
        CheckKind::Prop1 => PropositionCheck::prop1(&pair, family)?.check(&f)?,
        CheckKind::Prop2 => PropositionCheck::prop2(&pair, family)?.check(&f)?,
    };
    let case_id = args
        .config
        .file_stem()
        .map(|s| format!("{}:{}", s.to_string_lossy(), check_name(args.check)))
        .unwrap_or_else(|| check_name(args.check).to_owned());
    let mut report = report.with_case_id(case_id).with_exponent(exponent_label(&config.exponent));
    if random {
        report = report.with_seed(config.seed);
    }

    let csv_path = args
        .csv
        .clone()
        .or_else(|| config.outputs.csv.as_ref().map(|c| base.join(c)));
    if let Some(path) = csv_path {
        write_fields_csv(&domain, &report, &path)?;
    }
    if !args.dump_fields {
        report = report.without_fields();
    }
    let report_path = out
        .map(Path::to_path_buf)
        .or_else(|| config.outputs.report.as_ref().map(|r| base.join(r)));
    write_json(&report, report_path.as_deref())?;
    Ok(Status::from_pass(report.pass))
}

#[derive(Debug, Serialize)]
struct SweepOutput {
    exponent: String,
    seed: u64,
    #[serde(flatten)]
    report: SweepReport,
}

fn sweep_config(path: Option<&Path>) -> Result<(RunConfig, PathBuf)> {
    match path {
        Some(p) => Ok((load_config(p)?, base_of(p))),
        None => Ok((RunConfig::demo(), PathBuf::new())),
    }
}

fn sweep(args: SweepArgs, out: Option<&Path>) -> Result<Status> {
    let (config, base) = sweep_config(args.config.as_deref())?;
    let domain = config.domain.build(&base)?;
    let pair = derive_q(&config.exponent.build(&domain, &base)?, config.alpha)?;
    let family = CubeFamily::resolve(&domain, config.max_side)?;
    let seed = args.seed.unwrap_or(config.seed);
    let cases = args.cases.or(config.cases.map(|c| c as u64)).unwrap_or(DEFAULT_SWEEP_CASES);
    if cases == 0 {
        bail!(VarlexError::Config {
            field: "cases".into(),
            message: "must be at least 1".into(),
        });
    }

    let report = bound_sweep(
        &MixtureGenerator::new(seed),
        &pair,
        &family,
        cases,
        config.tolerances.luxemburg,
    )?;
    let csv_path = args
        .csv
        .clone()
        .or_else(|| config.outputs.csv.as_ref().map(|c| base.join(c)));
    if let Some(path) = csv_path {
        let mut writer = csv::Writer::from_writer(sink(Some(&path))?);
        writer.write_record(["id", "ratio", "norm_f", "norm_maximal"])?;
        for case in &report.cases {
            writer.write_record([
                case.id.to_string(),
                case.ratio.to_string(),
                case.norm_f.to_string(),
                case.norm_maximal.to_string(),
            ])?;
        }
        writer.flush()?;
    }

    let pass = report.max_ratio.is_finite();
    let output = SweepOutput {
        exponent: exponent_label(&config.exponent),
        seed,
        report,
    };
    let report_path = out
        .map(Path::to_path_buf)
        .or_else(|| config.outputs.report.as_ref().map(|r| base.join(r)));
    write_json(&output, report_path.as_deref())?;
    Ok(Status::from_pass(pass))
}

#[derive(Debug, Serialize)]
struct KernelTiming {
    kernel: &'static str,
    /// Fastest of the repetitions.
    seconds: f64,
    cells_per_second: f64,
}

#[derive(Debug, Serialize)]
struct BenchOutput {
    grid: Vec<usize>,
    active_cells: usize,
    max_side: usize,
    alpha: f64,
    threads: usize,
    repeat: u32,
    kernels: Vec<KernelTiming>,
}

fn bench(args: BenchArgs, out: Option<&Path>) -> Result<Status> {
    let (config, base) = sweep_config(args.config.as_deref())?;
    let domain = config.domain.build(&base)?;
    let p: ExponentField = config.exponent.build(&domain, &base)?;
    let pair = derive_q(&p, config.alpha)?;
    let family = CubeFamily::resolve(&domain, config.max_side)?;
    let f = match &config.function {
        Some(spec) => spec.build(&domain, &base, config.seed)?,
        None => MixtureGenerator::new(config.seed).sample(&domain, 0)?,
    };
    let repeat = args.repeat.max(1);
    let cells = domain.active_count();

    let mut kernels = Vec::new();
    let mut time = |kernel: &'static str, op: &dyn Fn() -> Result<()>| -> Result<()> {
        let mut best = f64::INFINITY;
        for _ in 0..repeat {
            let (result, seconds) = timed(op);
            result?;
            best = best.min(seconds);
        }
        kernels.push(KernelTiming {
            kernel,
            seconds: best,
            cells_per_second: cells as f64 / best,
        });
        Ok(())
    };
    time("maximal_fast", &|| fractional_maximal(&f, config.alpha, &family).map(drop).map_err(Into::into))?;
    if domain.cell_count() <= NAIVE_BENCH_CELLS {
        time("maximal_naive", &|| naive_maximal(&f, config.alpha, &family).map(drop).map_err(Into::into))?;
    }
    time("luxemburg_norm", &|| {
        luxemburg_norm(&f, &p, config.tolerances.luxemburg).map(drop).map_err(Into::into)
    })?;
    time("verify_lemma", &|| {
        verify_lemma_with_tolerance(&f, &pair, &family, config.tolerances.lemma)
            .map(drop)
            .map_err(Into::into)
    })?;

    let output = BenchOutput {
        grid: domain.shape().to_vec(),
        active_cells: cells,
        max_side: family.max_side(),
        alpha: config.alpha,
        threads: rayon::current_num_threads(),
        repeat,
        kernels,
    };
    write_json(&output, out)?;
    Ok(Status::Ok)
}
