//! Command-line front end.
//!
//! Commands: `gap`, `kernel`, `series`, `verify`, `mc`. CSV goes to `--out`
//! or stdout; the effective configuration is echoed as JSON to
//! `<out>.meta.json`, or to stderr when writing to stdout.

pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dynamics::{conserved_quantities, initial_state_numeric, integrate_through, trajectory_seed, IntegrateOptions};
use crate::error::GapError;
use crate::fredholm::{gap_at_order, gap_probability, FredholmOptions, IntervalUnion};
use crate::kernel::KernelEvaluator;
use crate::montecarlo::{empirical_gap_from_samples, normalization_check, sample_min_sq_singular_value, SamplerConfig, PRNG_NAME};
use crate::sigma::{gap_series, gap_series_error_estimate, sigma_boundary_series, SeriesExpansion};
use crate::specialfns::{EnsembleSpec, QRoute};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const GAP_HEADER: &str = "s,E,method,est_error";
pub const KERNEL_HEADER: &str = "x,y,K_sum,K_integrable,diff";
pub const SERIES_HEADER: &str = "exponent,coefficient";

#[derive(Debug, Parser)]
#[command(name = "ginibre-gap", version, about = "Gap probabilities for products of complex Ginibre matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Gap,
    Kernel,
    Series,
    Verify,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// E(0; J) on a grid by one or more methods
    Gap(Flags),
    /// kernel in both forms on a grid of (x, y)
    Kernel(Flags),
    /// small-s expansion coefficients
    Series(Flags),
    /// run the verification suites and print a JSON report
    Verify(Flags),
    /// Monte Carlo estimate of E(0; (0, s))
    Mc(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fredholm,
    Dynamics,
    ChiSeries,
    Mc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fredholm => "fredholm",
            Method::Dynamics => "dynamics",
            Method::ChiSeries => "chi-series",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// comma-separated ν₁, …, ν_M
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub nu: Option<Vec<f64>>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// comma-separated, increasing; may be empty
    #[arg(long = "s-grid", value_delimiter = ',', num_args = 0..)]
    pub s_grid: Option<Vec<f64>>,
    /// interval endpoints a₁,a₂,…
    #[arg(long = "J", value_delimiter = ',')]
    pub j: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub method: Option<Vec<Method>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub nu: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub s: Option<f64>,
    pub s_grid: Option<Vec<f64>>,
    #[serde(rename = "J")]
    pub j: Option<Vec<f64>>,
    pub method: Option<Vec<Method>>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub suite: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

/// Effective configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    pub nu: Vec<f64>,
    pub lambda: f64,
    pub s_grid: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Option<Vec<f64>>,
    pub method: Vec<Method>,
    pub tol: f64,
    pub order: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub suite: Vec<String>,
    pub out: Option<PathBuf>,
    pub prng: &'static str,
}

/// Error of a run with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_CONFIG, kind: "configuration", message: message.into() }
}

impl From<GapError> for Failure {
    fn from(e: GapError) -> Self {
        let config = matches!(e, GapError::InvalidParameter(_) | GapError::Unsupported(_) | GapError::NearResonance(_) | GapError::SeedTooLarge(_));
        if config {
            Failure { code: EXIT_CONFIG, kind: "configuration", message: e.to_string() }
        } else {
            Failure { code: EXIT_NUMERIC, kind: "numerical", message: e.to_string() }
        }
    }
}

impl RunConfig {
    /// Merges flags over the config file over defaults and validates.
    pub fn resolve(command: CommandKind, flags: &Flags) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<ConfigFile>(&text).map_err(|e| config_error(format!("{}: {e}", p.display())))?
            }
            None => ConfigFile::default(),
        };
        let m = flags.m.or(file.m).unwrap_or(1);
        let nu = flags.nu.clone().or(file.nu).unwrap_or_else(|| vec![0.0; m]);
        let s = flags.s.or(file.s);
        let grid = flags.s_grid.clone().or(file.s_grid);
        let s_grid = match (s, grid) {
            (Some(_), Some(_)) => return Err(config_error("give either --s or --s-grid")),
            (Some(v), None) => vec![v],
            (None, Some(g)) => g,
            (None, None) => Vec::new(),
        };
        if s_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(config_error("s grid must be strictly increasing"));
        }
        if s_grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(config_error("s values must be finite and nonnegative"));
        }
        let method = flags.method.clone().or(file.method).unwrap_or_else(|| vec![if command == CommandKind::Mc { Method::Mc } else { Method::Fredholm }]);
        let cfg = RunConfig {
            command,
            m,
            n: flags.n.or(file.n).unwrap_or(1),
            nu,
            lambda: flags.lambda.or(file.lambda).unwrap_or(1.0),
            s_grid,
            j: flags.j.clone().or(file.j),
            method,
            tol: flags.tol.or(file.tol).unwrap_or(1e-10),
            order: flags.order.or(file.order),
            samples: flags.samples.or(file.samples).unwrap_or(100_000),
            seed: flags.seed.or(file.seed).unwrap_or(verify::Profile::default().seed),
            suite: flags.suite.clone().or(file.suite).unwrap_or_default(),
            out: flags.out.clone().or(file.out),
            prng: PRNG_NAME,
        };
        if !(cfg.tol > 0.0) {
            return Err(config_error("tol must be positive"));
        }
        if cfg.j.is_some() && (command != CommandKind::Gap || cfg.method.iter().any(|m| *m != Method::Fredholm)) {
            return Err(config_error("--J is supported by gap with the fredholm method only"));
        }
        if command == CommandKind::Mc && cfg.method.iter().any(|m| *m != Method::Mc) {
            return Err(config_error("mc runs the mc method only"));
        }
        if let Some(bad) = cfg.suite.iter().find(|s| !verify::SUITES.contains(&s.as_str())) {
            return Err(config_error(format!("unknown suite {bad}; known: {}", verify::SUITES.join(", "))));
        }
        if command != CommandKind::Verify {
            cfg.spec()?;
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<EnsembleSpec, Failure> {
        Ok(EnsembleSpec::new(self.m, self.n, &self.nu, self.lambda)?)
    }

    fn fredholm_options(&self) -> FredholmOptions {
        FredholmOptions { tol: self.tol.max(1e-13), ..Default::default() }
    }
}

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

fn fredholm_rows(cfg: &RunConfig, spec: &EnsembleSpec, out: &mut String) -> Result<(), Failure> {
    let opts = cfg.fredholm_options();
    let sets: Vec<(f64, Option<IntervalUnion>)> = match &cfg.j {
        Some(e) => {
            let ju = IntervalUnion::from_endpoints(e)?;
            vec![(*e.last().expect("endpoints"), Some(ju))]
        }
        None => cfg.s_grid.iter().map(|s| (*s, None)).collect(),
    };
    for (s, ju) in sets {
        let (e, err) = if ju.is_none() && s == 0.0 {
            (1.0, 0.0)
        } else {
            let ju = match ju {
                Some(j) => j,
                None => IntervalUnion::hard_edge(s)?,
            };
            match cfg.order {
                Some(p) => {
                    let hi = gap_at_order(spec, &ju, p, &opts)?;
                    let lo = gap_at_order(spec, &ju, (p / 2).max(2), &opts)?;
                    (hi, (hi - lo).abs())
                }
                None => {
                    let r = gap_probability(spec, &ju, &opts)?;
                    (r.value, r.est_error)
                }
            }
        };
        push_row(out, &[s.to_string(), e.to_string(), "fredholm".into(), err.to_string()]);
    }
    Ok(())
}

fn dynamics_rows(cfg: &RunConfig, spec: &EnsembleSpec, out: &mut String) -> Result<(), Failure> {
    let positive: Vec<f64> = cfg.s_grid.iter().copied().filter(|s| *s > 0.0).collect();
    for _ in cfg.s_grid.iter().filter(|s| **s == 0.0) {
        push_row(out, &["0".into(), "1".into(), "dynamics".into(), "0".into()]);
    }
    if positive.is_empty() {
        return Ok(());
    }
    let seed = if positive[0] > 2e-2 {
        trajectory_seed(spec)?
    } else {
        initial_state_numeric(spec, 0.5 * positive[0], &cfg.fredholm_options())?
    };
    let opts = IntegrateOptions { tol: cfg.tol, ..Default::default() };
    let c0 = conserved_quantities(&seed, spec);
    let with_spectrum = spec.nu_min() > 0.0;
    let mut drift = 0.0_f64;
    for st in integrate_through(&seed, spec, &positive, &opts)? {
        let c = conserved_quantities(&st, spec);
        drift = drift.max((c.orthogonality - c0.orthogonality).abs()).max((c.hamiltonian_gap - c0.hamiltonian_gap).abs());
        if let (Some(a), Some(b)) = (c.first_integral, c0.first_integral) {
            drift = drift.max((a - b).abs());
        }
        if with_spectrum {
            drift = c.char_poly.iter().zip(&c0.char_poly).fold(drift, |w, (a, b)| w.max((a - b).abs()));
        }
        push_row(out, &[st.s.to_string(), st.tau().to_string(), "dynamics".into(), drift.to_string()]);
    }
    Ok(())
}

fn series_rows(cfg: &RunConfig, spec: &EnsembleSpec, out: &mut String) -> Result<(), Failure> {
    let g = gap_series(spec)?;
    for &s in &cfg.s_grid {
        push_row(out, &[s.to_string(), g.eval(s).to_string(), "chi-series".into(), gap_series_error_estimate(spec, s)?.to_string()]);
    }
    Ok(())
}

fn require_normalization(seed: u64) -> Result<(), Failure> {
    let lock = normalization_check(20_000, seed)?;
    if !lock.pass {
        return Err(Failure { code: EXIT_NUMERIC, kind: "numerical", message: format!("exponential-law normalization check failed: {lock:?}") });
    }
    Ok(())
}

fn mc_rows(cfg: &RunConfig, spec: &EnsembleSpec, out: &mut String) -> Result<(), Failure> {
    if spec.lambda != 1.0 {
        return Err(config_error("Monte Carlo estimates E at lambda = 1 only"));
    }
    let sc = SamplerConfig::new(spec.clone(), cfg.samples, cfg.seed)?;
    require_normalization(cfg.seed)?;
    let g = empirical_gap_from_samples(&sample_min_sq_singular_value(&sc), &cfg.s_grid);
    for k in 0..g.s.len() {
        push_row(out, &[g.s[k].to_string(), g.estimates[k].to_string(), "mc".into(), g.standard_errors[k].to_string()]);
    }
    Ok(())
}

/// CSV for the gap command.
pub fn cmd_gap(cfg: &RunConfig) -> Result<String, Failure> {
    let spec = cfg.spec()?;
    let mut out = String::new();
    writeln!(out, "{GAP_HEADER}").expect("string write");
    for &m in &cfg.method {
        match m {
            Method::Fredholm => fredholm_rows(cfg, &spec, &mut out)?,
            Method::Dynamics => dynamics_rows(cfg, &spec, &mut out)?,
            Method::ChiSeries => series_rows(cfg, &spec, &mut out)?,
            Method::Mc => mc_rows(cfg, &spec, &mut out)?,
        }
    }
    Ok(out)
}

/// CSV of K_n(x, y) in both forms for all pairs of grid points.
pub fn cmd_kernel(cfg: &RunConfig) -> Result<String, Failure> {
    let spec = cfg.spec()?;
    let mut out = format!("{KERNEL_HEADER}\n");
    if cfg.s_grid.is_empty() {
        return Ok(out);
    }
    let ev = KernelEvaluator::new(&spec, QRoute::Auto)?;
    for &x in &cfg.s_grid {
        for &y in &cfg.s_grid {
            let a = ev.eval_sum(x, y)?;
            let b = ev.eval(x, y)?;
            push_row(&mut out, &[x.to_string(), y.to_string(), a.to_string(), b.to_string(), (a - b).abs().to_string()]);
        }
    }
    Ok(out)
}

/// CSV of the gap expansion (M = 2) or the σ boundary expansion (M = 1).
pub fn cmd_series(cfg: &RunConfig) -> Result<String, Failure> {
    let spec = cfg.spec()?;
    let ser: SeriesExpansion = match spec.m {
        1 => sigma_boundary_series(spec.n, spec.nu[1], spec.lambda)?,
        2 => gap_series(&spec)?,
        m => return Err(config_error(format!("series are available for M = 1, 2 (M = {m})"))),
    };
    let mut out = format!("{SERIES_HEADER}\n");
    for (e, c) in &ser.terms {
        push_row(&mut out, &[e.to_string(), c.to_string()]);
    }
    Ok(out)
}

/// JSON report of the verification suites; the flag is true when all pass.
pub fn cmd_verify(cfg: &RunConfig) -> (String, bool) {
    let profile = verify::Profile { samples: cfg.samples, seed: cfg.seed };
    let reports = verify::run_suites(&cfg.suite, &profile);
    let pass = reports.iter().all(|r| r.pass);
    let doc = json!({ "schema": 1, "config": cfg, "suites": reports });
    (serde_json::to_string_pretty(&doc).expect("report serialises") + "\n", pass)
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), Failure> {
    let meta = serde_json::to_string(&json!({ "config": cfg })).expect("config serialises");
    match &cfg.out {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| config_error(format!("{}: {e}", p.display())))?;
            let mut mp = p.clone().into_os_string();
            mp.push(".meta.json");
            std::fs::write(PathBuf::from(mp), meta + "\n").map_err(|e| config_error(e.to_string()))?;
        }
        None => {
            print!("{body}");
            eprintln!("{meta}");
        }
    }
    Ok(())
}

fn execute(command: &Command) -> Result<i32, Failure> {
    let (kind, flags) = match command {
        Command::Gap(f) => (CommandKind::Gap, f),
        Command::Kernel(f) => (CommandKind::Kernel, f),
        Command::Series(f) => (CommandKind::Series, f),
        Command::Verify(f) => (CommandKind::Verify, f),
        Command::Mc(f) => (CommandKind::Mc, f),
    };
    let cfg = RunConfig::resolve(kind, flags)?;
    let (body, code) = match kind {
        CommandKind::Gap | CommandKind::Mc => (cmd_gap(&cfg)?, EXIT_OK),
        CommandKind::Kernel => (cmd_kernel(&cfg)?, EXIT_OK),
        CommandKind::Series => (cmd_series(&cfg)?, EXIT_OK),
        CommandKind::Verify => {
            let (b, pass) = cmd_verify(&cfg);
            (b, if pass { EXIT_OK } else { EXIT_VERIFY })
        }
    };
    emit(&cfg, &body)?;
    Ok(code)
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", json!({ "error": { "kind": f.kind, "message": f.message } }));
            f.code
        }
    }
}
