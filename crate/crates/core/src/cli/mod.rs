//! `flatlab` command-line frontend.

mod output;
mod range;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{compute_report, verdict, DiagnosticsReport, NecessaryConditionVerdict};
use crate::error::{FlatError, Result};
use crate::families::{
    cover_certificate, difference_profile, dirichlet_kernel_min, erdos_turan_bound, is_sidon, lambda_cover_set,
    lambda_exact, sidon_greedy, two_block_set, CoverCertificate, DifferenceProfile, LambdaResult,
};
use crate::montecarlo::{sweep, Endpoints, ExperimentConfig, IntervalKind};
use crate::riesz::{convergence_track, partial_density, schedule, write_density, FlatnessReport};
use crate::scalar::{parse_rational, ArithmeticMode};
use crate::spectrum::{AnalyticPolynomial, PolynomialJson, DEFAULT_WORK_BUDGET, OVERSAMPLING};

pub use range::{parse_f64_list, parse_range};

use output::{emit, to_json, PlotDir};

/// Largest evaluation grid the CLI will allocate.
const MAX_GRID: usize = 1 << 26;

#[derive(Debug, Parser)]
#[command(name = "flatlab", version, about = "Diagnostics for flat analytic trigonometric polynomials")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    #[arg(long, value_enum, default_value_t = Mode::Exact, global = true)]
    pub mode: Mode,

    /// Grid points per unit of degree (at least 4).
    #[arg(long, default_value_t = OVERSAMPLING, global = true)]
    pub grid_factor: usize,

    /// Work budget: pair budget for polynomials, node budget for `lambda`.
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for two-column plot series.
    #[arg(long, global = true)]
    pub plot_dir: Option<PathBuf>,

    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Dirichlet,
    TwoBlock,
    LambdaCover,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    #[arg(long, value_enum, conflicts_with = "file")]
    pub family: Option<Family>,

    /// Dirichlet length range.
    #[arg(long)]
    pub m: Option<String>,

    /// Two-block parameter range.
    #[arg(long)]
    pub j: Option<String>,

    /// Lambda-cover parameter range.
    #[arg(long = "R")]
    pub r: Option<String>,

    /// JSON polynomial, or an array of them.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Diagnostics report per polynomial.
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Screen the family against the necessary condition.
        #[arg(long)]
        verdict: bool,
        #[arg(long, default_value_t = 1.0)]
        l_floor: f64,
    },
    /// Exponent sets, difference profiles and cover certificates.
    Family {
        #[command(flatten)]
        source: Source,
        /// Include full difference profiles in JSON output.
        #[arg(long)]
        profile: bool,
        /// Minimum of the Dirichlet kernel of this degree instead.
        #[arg(long, conflicts_with_all = ["family", "file"])]
        kernel: Option<u64>,
    },
    /// Greedy Sidon set, or a check of a given set.
    Sidon {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        start: u64,
        /// Comma-separated set to test instead.
        #[arg(long)]
        check: Option<String>,
    },
    /// Exact minimal difference-cover size.
    Lambda {
        #[arg(long = "R")]
        r: String,
    },
    /// Dissociation schedule and convergence of a generalized Riesz product.
    Riesz {
        #[command(flatten)]
        source: Source,
        /// Explicit grid size.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        verify: bool,
        /// Binary dump of the full partial density.
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Grid flatness metrics.
    Flatness {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Monte-Carlo estimate of E(eps, R).
    Montecarlo {
        #[arg(long = "R")]
        r: String,
        #[arg(long, default_value = "0.5")]
        epsilon: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long, value_enum, default_value_t = Interval::Hoeffding)]
        interval: Interval,
        /// Fix `0` and `R` instead of `0` and `R^2`.
        #[arg(long)]
        literal_endpoints: bool,
    },
    /// Verdict over a JSON file of reports.
    Verdict {
        #[arg(long)]
        reports: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        l_floor: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Interval {
    Hoeffding,
    Wilson,
}

struct Item {
    /// Family parameter, or the index within a file.
    param: u64,
    poly: AnalyticPolynomial,
}

struct Loaded {
    param_name: &'static str,
    items: Vec<Item>,
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| FlatError::InvalidInput(format!("{}: {e}", path.display())))
}

fn json_parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FlatError::Parse {
        position: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

fn polynomial_from_json(js: PolynomialJson, budget: usize) -> Result<AnalyticPolynomial> {
    match js.weights {
        None => AnalyticPolynomial::uniform_with_budget(js.exponents, budget),
        Some(ws) => {
            let weights = ws.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>>>()?;
            AnalyticPolynomial::with_budget(js.exponents, weights, budget)
        }
    }
}

impl Source {
    fn load(&self, budget: usize) -> Result<Loaded> {
        if let Some(path) = &self.file {
            let text = read_file(path)?;
            let list: Vec<PolynomialJson> = if text.trim_start().starts_with('[') {
                json_parse(path, &text)?
            } else {
                vec![json_parse(path, &text)?]
            };
            let items = list
                .into_iter()
                .enumerate()
                .map(|(i, js)| {
                    let poly = polynomial_from_json(js, budget).map_err(|e| match e {
                        FlatError::InvalidPolynomial(msg) => FlatError::Parse {
                            position: format!("{} item {i}", path.display()),
                            message: msg,
                        },
                        other => other,
                    })?;
                    Ok(Item { param: i as u64, poly })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Loaded {
                param_name: "index",
                items,
            });
        }
        let Some(family) = self.family else {
            return Err(FlatError::InvalidInput("give --family or --file".into()));
        };
        let (param_name, flag, spec) = match family {
            Family::Dirichlet => ("m", "--m", &self.m),
            Family::TwoBlock => ("j", "--j", &self.j),
            Family::LambdaCover => ("R", "--R", &self.r),
        };
        let spec = spec
            .as_deref()
            .ok_or_else(|| FlatError::InvalidInput(format!("{flag} is required for this family")))?;
        let items = parse_range(flag, spec)?
            .into_iter()
            .map(|v| {
                let set = match family {
                    Family::Dirichlet => {
                        if v < 1 {
                            return Err(FlatError::InvalidInput("dirichlet needs m >= 1".into()));
                        }
                        (0..v).collect()
                    }
                    Family::TwoBlock => two_block_set(v)?,
                    Family::LambdaCover => lambda_cover_set(v)?,
                };
                Ok(Item {
                    param: v,
                    poly: AnalyticPolynomial::uniform_with_budget(set, budget)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Loaded { param_name, items })
    }
}

impl GlobalOpts {
    fn arithmetic(&self) -> ArithmeticMode {
        match self.mode {
            Mode::Exact => ArithmeticMode::Exact,
            Mode::Float => ArithmeticMode::float(),
        }
    }

    fn work_budget(&self) -> usize {
        self.budget.map(|b| b as usize).unwrap_or(DEFAULT_WORK_BUDGET)
    }

    fn grid_for(&self, degree: u64, explicit: Option<usize>) -> Result<usize> {
        let g = match explicit {
            Some(g) => g,
            None => {
                if self.grid_factor < OVERSAMPLING {
                    return Err(FlatError::InvalidConfig {
                        field: "grid_factor",
                        reason: format!("must be at least {OVERSAMPLING}"),
                    });
                }
                (degree as usize + 1)
                    .checked_mul(self.grid_factor)
                    .ok_or(FlatError::Budget("grid size overflows".into()))?
            }
        };
        if g > MAX_GRID {
            return Err(FlatError::Budget(format!("grid of {g} points exceeds the limit {MAX_GRID}")));
        }
        Ok(g)
    }

    fn plot(&self) -> Result<Option<PlotDir>> {
        self.plot_dir.as_deref().map(PlotDir::create).transpose()
    }
}

#[derive(Serialize, Deserialize)]
struct AnalyzeOutput {
    #[serde(default)]
    param: Vec<u64>,
    reports: Vec<DiagnosticsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verdict: Option<NecessaryConditionVerdict>,
}

fn verdict_csv(v: &NecessaryConditionVerdict) -> String {
    let slope = v.growth_slope.map(|s| s.to_string()).unwrap_or_default();
    format!(
        "flag,min_l,l_bounded_away,growth_slope,unbounded\n{},{},{},{},{}\n",
        serde_json::to_value(v.flag).ok().and_then(|x| x.as_str().map(String::from)).unwrap_or_default(),
        v.min_l,
        v.l_bounded_away,
        slope,
        v.unbounded
    )
}

fn analyze(g: &GlobalOpts, source: &Source, with_verdict: bool, l_floor: f64) -> Result<String> {
    let loaded = source.load(g.work_budget())?;
    let mode = g.arithmetic();
    let mut param = Vec::with_capacity(loaded.items.len());
    let mut reports = Vec::with_capacity(loaded.items.len());
    for item in &loaded.items {
        log::info!("analyzing {} = {} (m = {})", loaded.param_name, item.param, item.poly.m());
        param.push(item.param);
        reports.push(compute_report(&item.poly, mode));
    }
    let v = if with_verdict { Some(verdict(&reports, l_floor)?) } else { None };

    if let Some(plot) = g.plot()? {
        let c: Vec<(usize, f64)> = reports.iter().map(|r| (r.m, r.ratio_c_over_m2.to_f64())).collect();
        plot.series("c_over_m2", ("m", "C_over_m2"), &c)?;
        let l: Vec<(u64, f64)> = param
            .iter()
            .zip(&reports)
            .map(|(&p, r)| (p, r.ratio_l2_over_c.to_f64()))
            .collect();
        plot.series("l2_over_c", (loaded.param_name, "L2_over_C"), &l)?;
    }

    match g.format {
        Format::Json => to_json(&AnalyzeOutput {
            param,
            reports,
            verdict: v,
        }),
        Format::Csv => {
            let mut s = format!("{}\n", DiagnosticsReport::CSV_HEADER);
            for r in &reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            if let Some(v) = &v {
                s.push('\n');
                s.push_str(&verdict_csv(v));
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct FamilyEntry {
    param: u64,
    m: usize,
    degree: u64,
    exponents: Vec<u64>,
    support_size: usize,
    max_count: u64,
    certificate: CoverCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<DifferenceProfile>,
}

fn family(g: &GlobalOpts, source: &Source, with_profile: bool, kernel: Option<u64>) -> Result<String> {
    if let Some(d) = kernel {
        let grid = g.grid_for(d, None)?.max(8 * d as usize).max(1);
        let k = dirichlet_kernel_min(d, grid)?;
        return match g.format {
            Format::Json => to_json(&k),
            Format::Csv => Ok(format!(
                "degree,min_value,argmin,test_point,test_value\n{d},{},{},{},{}\n",
                k.min_value, k.argmin, k.test_point, k.test_value
            )),
        };
    }
    let loaded = source.load(g.work_budget())?;
    let mut entries = Vec::with_capacity(loaded.items.len());
    for item in loaded.items {
        let exps = item.poly.exponents().to_vec();
        let prof = difference_profile(&exps);
        let certificate = cover_certificate(&exps, item.poly.degree())?;
        entries.push(FamilyEntry {
            param: item.param,
            m: item.poly.m(),
            degree: item.poly.degree(),
            support_size: prof.counts.len(),
            max_count: prof.max_count(),
            certificate,
            profile: with_profile.then_some(prof),
            exponents: exps,
        });
    }
    match g.format {
        Format::Json => to_json(&entries),
        Format::Csv => {
            let mut s = format!("{},m,degree,support_size,max_count,is_cover\n", loaded.param_name);
            for e in &entries {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    e.param, e.m, e.degree, e.support_size, e.max_count, e.certificate.is_cover
                ));
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct SidonOutput {
    set: Vec<u64>,
    is_sidon: bool,
    size: usize,
    erdos_turan_bound: f64,
}

fn sidon(g: &GlobalOpts, count: usize, start: u64, check: Option<&str>) -> Result<String> {
    let set = match check {
        Some(spec) => parse_range("--check", spec)?,
        None => sidon_greedy(count, start),
    };
    let top = set.iter().copied().max().unwrap_or(0);
    let out = SidonOutput {
        is_sidon: is_sidon(&set),
        size: set.len(),
        erdos_turan_bound: erdos_turan_bound(top),
        set,
    };
    match g.format {
        Format::Json => to_json(&out),
        Format::Csv => {
            let mut s = String::from("index,value\n");
            for (i, v) in out.set.iter().enumerate() {
                s.push_str(&format!("{i},{v}\n"));
            }
            Ok(s)
        }
    }
}

fn lambda(g: &GlobalOpts, spec: &str) -> Result<String> {
    let results = parse_range("--R", spec)?
        .into_iter()
        .map(|r| lambda_exact(r, g.budget))
        .collect::<Result<Vec<LambdaResult>>>()?;
    match g.format {
        Format::Json => to_json(&results),
        Format::Csv => {
            let mut s = String::from("R,lambda,lower,upper,complete,nodes,witness\n");
            for l in &results {
                let w: Vec<String> = l.witness.iter().map(u64::to_string).collect();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    l.r,
                    l.lambda.map(|v| v.to_string()).unwrap_or_default(),
                    l.lower,
                    l.upper,
                    l.complete,
                    l.nodes,
                    w.join(" ")
                ));
            }
            Ok(s)
        }
    }
}

#[derive(Serialize)]
struct RieszOutput {
    exponents: Vec<u64>,
    degrees: Vec<u64>,
    grid_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    dissociated: Option<bool>,
    track: Vec<crate::riesz::PrefixSummary>,
}

fn riesz(g: &GlobalOpts, source: &Source, grid: Option<usize>, verify: bool, density_out: Option<&Path>) -> Result<String> {
    let loaded = source.load(g.work_budget())?;
    let factors: Vec<AnalyticPolynomial> = loaded.items.into_iter().map(|i| i.poly).collect();
    let s = schedule(factors)?;
    let total = *s.degrees().last().unwrap_or(&0);
    let grid_size = g.grid_for(total, grid)?;
    let dissociated = if verify { Some(s.verify_dissociated(s.len())?) } else { None };
    let track = convergence_track(&s, grid_size)?;
    if let Some(path) = density_out {
        let d = partial_density(&s, s.len(), grid_size)?;
        let f = fs::File::create(path).map_err(|e| FlatError::InvalidInput(format!("{}: {e}", path.display())))?;
        write_density(std::io::BufWriter::new(f), &d).map_err(|e| FlatError::Internal(e.to_string()))?;
    }
    if let Some(plot) = g.plot()? {
        let pts: Vec<(usize, f64)> = track.iter().map(|t| (t.prefix, t.frac_in_band)).collect();
        plot.series("frac_in_band", ("prefix", "frac_in_band"), &pts)?;
    }
    match g.format {
        Format::Json => to_json(&RieszOutput {
            exponents: s.exponents().to_vec(),
            degrees: s.degrees().to_vec(),
            grid_size,
            dissociated,
            track,
        }),
        Format::Csv => {
            let mut out = format!("{}\n", crate::riesz::PrefixSummary::CSV_HEADER);
            for t in &track {
                out.push_str(&t.csv_row());
                out.push('\n');
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct FlatnessEntry {
    param: u64,
    #[serde(flatten)]
    report: FlatnessReport,
}

fn flatness(g: &GlobalOpts, source: &Source, grid: Option<usize>) -> Result<String> {
    let loaded = source.load(g.work_budget())?;
    let mut entries = Vec::with_capacity(loaded.items.len());
    for item in &loaded.items {
        let size = g.grid_for(item.poly.degree(), grid)?;
        entries.push(FlatnessEntry {
            param: item.param,
            report: crate::riesz::flatness(&item.poly, size)?,
        });
    }
    match g.format {
        Format::Json => to_json(&entries),
        Format::Csv => {
            let mut s = format!("{},{}\n", loaded.param_name, FlatnessReport::CSV_HEADER);
            for e in &entries {
                s.push_str(&format!("{},{}\n", e.param, e.report.csv_row()));
            }
            Ok(s)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn montecarlo(
    g: &GlobalOpts,
    r_spec: &str,
    eps_spec: &str,
    samples: usize,
    confidence: f64,
    interval: Interval,
    literal: bool,
) -> Result<String> {
    let rs = parse_range("--R", r_spec)?;
    let eps = parse_f64_list("--epsilon", eps_spec)?;
    let mut base = ExperimentConfig::new(2, 0.5, samples, g.seed);
    base.grid_factor = g.grid_factor;
    base.confidence = confidence;
    base.interval = match interval {
        Interval::Hoeffding => IntervalKind::Hoeffding,
        Interval::Wilson => IntervalKind::Wilson,
    };
    base.endpoints = if literal { Endpoints::ZeroAndR } else { Endpoints::ZeroAndRSquared };
    // a bad shared setting fails the whole sweep rather than every cell
    ExperimentConfig {
        r: rs.first().copied().unwrap_or(2).max(2),
        epsilon: eps.first().copied().unwrap_or(0.5),
        ..base.clone()
    }
    .validate()?;
    let table = sweep(&rs, &eps, samples, g.seed, &base)?;
    if let Some(plot) = g.plot()? {
        for (i, t) in table.trends.iter().enumerate() {
            let pts: Vec<(u64, f64)> = t.r.iter().copied().zip(t.estimate.iter().copied()).collect();
            let name = if table.trends.len() == 1 { "estimate".to_string() } else { format!("estimate_eps{i}") };
            plot.series(&name, ("R", "estimate"), &pts)?;
        }
    }
    match g.format {
        Format::Json => to_json(&table),
        Format::Csv => Ok(table.to_csv()),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReportsFile {
    List(Vec<DiagnosticsReport>),
    Wrapped(AnalyzeOutput),
}

fn verdict_cmd(g: &GlobalOpts, path: &Path, l_floor: f64) -> Result<String> {
    let text = read_file(path)?;
    let reports = if text.trim_start().starts_with('[') {
        json_parse::<Vec<DiagnosticsReport>>(path, &text)?
    } else {
        match json_parse::<ReportsFile>(path, &text)? {
            ReportsFile::List(r) => r,
            ReportsFile::Wrapped(w) => w.reports,
        }
    };
    let v = verdict(&reports, l_floor)?;
    match g.format {
        Format::Json => to_json(&v),
        Format::Csv => Ok(verdict_csv(&v)),
    }
}

/// Runs a parsed command and returns its rendered output.
pub fn run(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze {
            source,
            verdict,
            l_floor,
        } => analyze(g, source, *verdict, *l_floor),
        Command::Family {
            source,
            profile,
            kernel,
        } => family(g, source, *profile, *kernel),
        Command::Sidon { count, start, check } => sidon(g, *count, *start, check.as_deref()),
        Command::Lambda { r } => lambda(g, r),
        Command::Riesz {
            source,
            grid,
            verify,
            density_out,
        } => riesz(g, source, *grid, *verify, density_out.as_deref()),
        Command::Flatness { source, grid } => flatness(g, source, *grid),
        Command::Montecarlo {
            r,
            epsilon,
            samples,
            confidence,
            interval,
            literal_endpoints,
        } => montecarlo(g, r, epsilon, *samples, *confidence, *interval, *literal_endpoints),
        Command::Verdict { reports, l_floor } => verdict_cmd(g, reports, *l_floor),
    }
}

fn init_threads() {
    let Ok(v) = std::env::var("FLATLAB_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("FLATLAB_THREADS ignored: {e}");
            }
        }
        _ => log::warn!("FLATLAB_THREADS must be a positive integer, got `{v}`"),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    init_threads();
    match run(&cli).and_then(|text| emit(cli.global.out.as_deref(), &text)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("flatlab: {e}");
            e.exit_code()
        }
    }
}
