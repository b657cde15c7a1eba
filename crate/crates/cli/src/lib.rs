//! Library side of the `podles` command-line tool: configuration, the three
//! commands and their output formats.

pub mod verify;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use podles::dirac::seminorm_l;
use podles::metric::{interval_metric_table, IntervalRow};
use podles::model::{from_qpoly, Q_GUARD};
use podles::qsymb::parse_expression;
use podles::{ModelConstants, SolverConfig};

/// Exit status when every check passed.
pub const EXIT_OK: i32 = 0;
/// Exit status when a verification check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit status for invalid configuration or input.
pub const EXIT_INVALID: i32 = 2;
/// Exit status when a distance solve did not converge.
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] podles::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INVALID
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "podles", version, about = "Spectral metric computations on the truncated Podles sphere")]
pub struct Cli {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by all commands. Unset options fall back to the config
/// file, then to the defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct Options {
    /// Deformation parameter in (0, 1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Truncation order.
    #[arg(long = "N", global = true)]
    pub order: Option<usize>,
    /// Solver tolerance in (0, 1e-2].
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of angles in the representation-norm check.
    #[arg(long, global = true)]
    pub theta_grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` file with any of the options above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Accept q outside the guarded range.
    #[arg(long, global = true)]
    pub allow_extreme_q: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Run the invariant suite.
    Verify,
    /// Norms of a sphere element given as an expression.
    Seminorm {
        expression: String,
    },
    /// Distances between the vector states along the spectrum of A.
    Interval {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
    },
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub order: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub theta_grid: usize,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub allow_extreme_q: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 0.5,
            order: 32,
            tolerance: 1e-8,
            seed: 0,
            theta_grid: 20,
            format: None,
            output: None,
            allow_extreme_q: false,
        }
    }
}

impl RunConfig {
    /// Merges flags over the config file over the defaults, then validates.
    pub fn resolve(options: &Options) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        if let Some(path) = &options.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = options.q {
            cfg.q = v;
        }
        if let Some(v) = options.order {
            cfg.order = v;
        }
        if let Some(v) = options.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = options.seed {
            cfg.seed = v;
        }
        if let Some(v) = options.theta_grid {
            cfg.theta_grid = v;
        }
        if options.format.is_some() {
            cfg.format = options.format;
        }
        if options.output.is_some() {
            cfg.output.clone_from(&options.output);
        }
        cfg.allow_extreme_q |= options.allow_extreme_q;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        for (key, value) in parse_config(&text)? {
            let bad = |what: &str| CliError::Config(format!("config key {key}: invalid {what} '{value}'"));
            match key.as_str() {
                "q" => self.q = value.parse().map_err(|_| bad("number"))?,
                "N" => self.order = value.parse().map_err(|_| bad("integer"))?,
                "tolerance" => self.tolerance = value.parse().map_err(|_| bad("number"))?,
                "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
                "theta_grid" => self.theta_grid = value.parse().map_err(|_| bad("integer"))?,
                "format" => {
                    self.format = Some(Format::from_str(&value, true).map_err(|_| bad("format"))?)
                }
                "output" => self.output = Some(PathBuf::from(value)),
                "allow_extreme_q" => self.allow_extreme_q = value.parse().map_err(|_| bad("boolean"))?,
                _ => return Err(CliError::Config(format!("unknown config key '{key}'"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(CliError::Config(format!("q out of range: {} is not in (0, 1)", self.q)));
        }
        if !self.allow_extreme_q && !(Q_GUARD.0..=Q_GUARD.1).contains(&self.q) {
            return Err(CliError::Config(format!(
                "q out of range: {} is outside [{}, {}]; pass --allow-extreme-q to accept it",
                self.q, Q_GUARD.0, Q_GUARD.1
            )));
        }
        if self.order < 4 {
            return Err(CliError::Config(format!("N too small: {} < 4", self.order)));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-2) {
            return Err(CliError::Config(format!(
                "tolerance out of range: {} is not in (0, 1e-2]",
                self.tolerance
            )));
        }
        Ok(())
    }

    pub fn constants(&self) -> podles::Result<ModelConstants> {
        ModelConstants::with_guard(self.q, self.order, self.allow_extreme_q)
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.tolerance,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    pub exit_code: i32,
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let report = match command {
        Command::Verify => cmd_verify(cfg)?,
        Command::Seminorm { expression } => cmd_seminorm(cfg, expression)?,
        Command::Interval { kmax } => cmd_interval(cfg, *kmax)?,
    };
    if let Some(path) = &cfg.output {
        std::fs::write(path, &report.text)?;
    }
    Ok(report)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let records = verify::run_suite(cfg)?;
    let all = records.iter().all(|r| r.pass);
    let text = match cfg.format {
        Some(Format::Json) => serde_json::to_string_pretty(&records).expect("plain records") + "\n",
        Some(Format::Csv) => to_csv(&records)?,
        None => {
            let mut s = String::new();
            for r in &records {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                writeln!(
                    s,
                    "[{tag}] {:<22} {}: measured {:.3e}, bound {:.3e}",
                    r.lemma_key, r.check, r.measured, r.bound
                )
                .expect("string write");
            }
            let passed = records.iter().filter(|r| r.pass).count();
            writeln!(s, "{passed} of {} checks passed (q = {}, N = {})", records.len(), cfg.q, cfg.order)
                .expect("string write");
            s
        }
    };
    Ok(Report {
        text,
        exit_code: if all { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

#[derive(Serialize)]
struct SeminormReport {
    expression: String,
    q: f64,
    #[serde(rename = "N")]
    order: usize,
    cstar_norm: f64,
    seminorm_l: f64,
    psi_infty: f64,
}

pub fn cmd_seminorm(cfg: &RunConfig, expression: &str) -> Result<Report, CliError> {
    let p = parse_expression(expression).map_err(|e| CliError::Input(e.to_string()))?;
    if !p.is_sphere_element() {
        return Err(CliError::Input(format!("'{expression}' is not in the sphere algebra")));
    }
    let x = from_qpoly(&p, &cfg.constants()?)?;
    let r = SeminormReport {
        expression: expression.to_string(),
        q: cfg.q,
        order: cfg.order,
        cstar_norm: x.cstar_norm(),
        seminorm_l: seminorm_l(&x),
        psi_infty: x.psi_infty().re + 0.0,
    };
    let text = match cfg.format {
        Some(Format::Json) => serde_json::to_string_pretty(&r).expect("plain record") + "\n",
        Some(Format::Csv) => to_csv(std::slice::from_ref(&r))?,
        None => format!(
            "cstar_norm = {}\nL = {}\npsi_infty = {}\n",
            r.cstar_norm, r.seminorm_l, r.psi_infty
        ),
    };
    Ok(Report {
        text,
        exit_code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct CsvRow {
    q: f64,
    #[serde(rename = "N")]
    order: usize,
    k: usize,
    d_consecutive: f64,
    d_from_zero: f64,
    d_from_psi_infty: f64,
    gap_estimate: Option<f64>,
    iterations: usize,
}

impl From<&IntervalRow> for CsvRow {
    fn from(r: &IntervalRow) -> Self {
        Self {
            q: r.q,
            order: r.order,
            k: r.k,
            d_consecutive: r.d_consecutive,
            d_from_zero: r.d_from_zero,
            d_from_psi_infty: r.d_from_psi_infty,
            gap_estimate: r.gap_estimate,
            iterations: r.iterations,
        }
    }
}

pub fn cmd_interval(cfg: &RunConfig, kmax: usize) -> Result<Report, CliError> {
    if kmax > cfg.order / 2 {
        return Err(CliError::Config(format!(
            "kmax {kmax} exceeds N/2 = {}",
            cfg.order / 2
        )));
    }
    let rows = interval_metric_table(&cfg.constants()?, kmax, &cfg.solver())?;
    let text = match cfg.format {
        Some(Format::Json) => serde_json::to_string_pretty(&rows).expect("plain rows") + "\n",
        _ => to_csv(&rows.iter().map(CsvRow::from).collect::<Vec<_>>())?,
    };
    let converged = rows.iter().all(|r| r.converged);
    Ok(Report {
        text,
        exit_code: if converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
    })
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
