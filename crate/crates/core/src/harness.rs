//! Monte Carlo replicability experiments.
//!
//! A trial draws a target `i*`, a shared key and two independent samples
//! `S₁, S₂` from per-trial substreams of a master seed, runs the learner on
//! both with the same key, and records whether the two output tuples agree
//! and their exact errors. Trials run on the rayon pool; results are
//! collected in trial order so reports are bit-identical across thread
//! counts.
//!
//! Sweeps write one CSV row per grid point with the header
//!
//! ```text
//! d,k,epsilon,rho_target,delta,n,radius,trials,rho_hat,rho_lo,rho_hi,err_rate,mean_err,median_err,ball_cap_hits,master_seed
//! ```
//!
//! Floats are printed with 17 significant digits. Rows are flushed one at a
//! time, and a rerun against an existing file skips the grid points it
//! already holds.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{choose_prime_k, exact_error, sample_training_set, HypothesisIndex, Params};
use crate::error::{Error, Result};
use crate::learner::{Learner, SharedKey};
use crate::prf::{derive_key, substream, StreamRole};
use crate::stats::{isotonic_nonincreasing, wilson_interval};

pub const CSV_HEADER: &str = "d,k,epsilon,rho_target,delta,n,radius,trials,rho_hat,rho_lo,rho_hi,err_rate,mean_err,median_err,ball_cap_hits,master_seed";

/// Formats like C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{x:.*}", (16 - exp) as usize))
    }
}

/// Experiment grid and run settings. Every list is a sweep axis; the grid is
/// their Cartesian product with `n` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub d: Vec<usize>,
    /// Targets for `k`; each is rounded up to the next prime.
    pub k: Vec<u32>,
    pub epsilon: Vec<f64>,
    pub rho: Vec<f64>,
    /// Explicit sample sizes. Empty means "use `n_constant`".
    pub n: Vec<usize>,
    pub delta: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub radius_fraction: f64,
    pub beta_constant: f64,
    pub ball_cap: u64,
    /// `c_n` in `n = ⌈c_n β⁻¹ d ln(d/ρ)⌉`, used when `n` is empty.
    pub n_constant: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: vec![4],
            k: vec![29],
            epsilon: vec![0.3],
            rho: vec![0.1],
            n: Vec::new(),
            delta: 0.1,
            trials: 1000,
            master_seed: 0,
            radius_fraction: crate::domain::DEFAULT_RADIUS_FRACTION,
            beta_constant: crate::domain::DEFAULT_BETA_CONSTANT,
            ball_cap: crate::domain::DEFAULT_BALL_CAP,
            n_constant: None,
            output: None,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::usage(format!("bad value {:?} for key {key}", s.trim())))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::usage(format!("bad value {value:?} for key {key}")))
}

impl ExperimentConfig {
    /// A one-point grid.
    pub fn single(params: &Params, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            d: vec![params.d()],
            k: vec![params.k()],
            epsilon: vec![params.epsilon()],
            rho: vec![params.rho()],
            n: vec![params.n()],
            delta: params.delta(),
            trials,
            master_seed,
            radius_fraction: params.radius_fraction(),
            beta_constant: params.beta_constant(),
            ball_cap: params.ball_cap(),
            n_constant: None,
            output: None,
        }
    }

    /// Parses flat `key = value` text. `#` starts a comment; lists are
    /// comma-separated. Unknown and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::usage(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            match key {
                "d" => cfg.d = parse_list(key, value)?,
                "k" => cfg.k = parse_list(key, value)?,
                "epsilon" => cfg.epsilon = parse_list(key, value)?,
                "rho" => cfg.rho = parse_list(key, value)?,
                "n" => cfg.n = parse_list(key, value)?,
                "delta" => cfg.delta = parse_one(key, value)?,
                "trials" => cfg.trials = parse_one(key, value)?,
                "master_seed" => cfg.master_seed = parse_one(key, value)?,
                "radius_fraction" => cfg.radius_fraction = parse_one(key, value)?,
                "beta_constant" => cfg.beta_constant = parse_one(key, value)?,
                "ball_cap" => cfg.ball_cap = parse_one(key, value)?,
                "n_constant" => cfg.n_constant = Some(parse_one(key, value)?),
                "output" => cfg.output = Some(PathBuf::from(value)),
                other => return Err(Error::usage(format!("line {}: unknown key {other}", lineno + 1))),
            }
        }
        cfg.grid()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The grid points in sweep order.
    pub fn grid(&self) -> Result<Vec<Params>> {
        if self.trials == 0 {
            return Err(Error::usage("trials must be at least 1"));
        }
        if self.d.is_empty() || self.k.is_empty() || self.epsilon.is_empty() || self.rho.is_empty() {
            return Err(Error::usage("sweep axes must be nonempty"));
        }
        if self.n.is_empty() && self.n_constant.is_none() {
            return Err(Error::usage("give either n or n_constant"));
        }
        let mut out = Vec::new();
        for &d in &self.d {
            for &k in &self.k {
                let k = u32::try_from(choose_prime_k(k as u64))
                    .map_err(|_| Error::usage(format!("no prime k >= {k} fits in 32 bits")))?;
                for &epsilon in &self.epsilon {
                    for &rho in &self.rho {
                        let base = Params::new(d, k, epsilon, rho, self.delta, 0)?
                            .with_radius_fraction(self.radius_fraction)?
                            .with_beta_constant(self.beta_constant)?
                            .with_ball_cap(self.ball_cap)?;
                        if self.n.is_empty() {
                            let c = self.n_constant.expect("checked above");
                            out.push(base.clone().with_n(sample_size_formula(&base, c)));
                        } else {
                            out.extend(self.n.iter().map(|&n| base.clone().with_n(n)));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `n = ⌈c_n · β⁻¹ · d · ln(d/ρ)⌉`, at least 1.
pub fn sample_size_formula(params: &Params, c_n: f64) -> usize {
    let d = params.d() as f64;
    let n = c_n / params.beta() * d * (d / params.rho()).ln();
    n.ceil().max(1.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub target: HypothesisIndex,
    pub outputs: [HypothesisIndex; 2],
    pub agree: bool,
    pub errors: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationReport {
    pub params: Params,
    pub radius: u64,
    pub trials: usize,
    pub master_seed: u64,
    /// Fraction of trials whose two outputs differ.
    pub rho_hat: f64,
    pub rho_ci: (f64, f64),
    /// Fraction of runs (two per trial) with error above `ε`.
    pub error_rate: f64,
    pub mean_error: f64,
    pub median_error: f64,
    /// Trials that could not run because the acceptance ball exceeds the cap.
    pub ball_cap_hits: usize,
    pub records: Vec<TrialRecord>,
}

impl ReplicationReport {
    fn capped(params: &Params, trials: usize, master_seed: u64) -> Self {
        ReplicationReport {
            params: params.clone(),
            radius: params.radius(),
            trials,
            master_seed,
            rho_hat: f64::NAN,
            rho_ci: (f64::NAN, f64::NAN),
            error_rate: f64::NAN,
            mean_error: f64::NAN,
            median_error: f64::NAN,
            ball_cap_hits: trials,
            records: Vec::new(),
        }
    }

    /// One CSV data row (no newline) matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let p = &self.params;
        let g = fmt_g17;
        [
            p.d().to_string(),
            p.k().to_string(),
            g(p.epsilon()),
            g(p.rho()),
            g(p.delta()),
            p.n().to_string(),
            self.radius.to_string(),
            self.trials.to_string(),
            g(self.rho_hat),
            g(self.rho_ci.0),
            g(self.rho_ci.1),
            g(self.error_rate),
            g(self.mean_error),
            g(self.median_error),
            self.ball_cap_hits.to_string(),
            self.master_seed.to_string(),
        ]
        .join(",")
    }
}

fn run_trial(learner: &Learner, params: &Params, master: u64, trial: u64) -> Result<TrialRecord> {
    let target = HypothesisIndex::random(params.d(), params.k(), &mut substream(master, trial, StreamRole::Target));
    let key = SharedKey(derive_key(master, trial));
    let s1 = sample_training_set(params, &target, &mut substream(master, trial, StreamRole::Sample1));
    let s2 = sample_training_set(params, &target, &mut substream(master, trial, StreamRole::Sample2));
    let a = learner.learn(&s1, &key)?;
    let b = learner.learn(&s2, &key)?;
    let errors = [exact_error(&target, &a)?, exact_error(&target, &b)?];
    Ok(TrialRecord { trial, target, agree: a == b, outputs: [a, b], errors })
}

/// Runs `trials` paired trials at `params`.
pub fn run_replication(params: &Params, trials: usize, master_seed: u64) -> Result<ReplicationReport> {
    if trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let learner = Learner::new(params)?;
    let records: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(&learner, params, master_seed, t))
        .collect::<Result<_>>()?;
    let disagree = records.iter().filter(|r| !r.agree).count();
    let mut errs: Vec<f64> = records.iter().flat_map(|r| r.errors).collect();
    let runs = errs.len();
    let above = errs.iter().filter(|&&e| e > params.epsilon()).count();
    let mean = crate::stats::pairwise_sum(&errs) / runs as f64;
    errs.sort_by(f64::total_cmp);
    let median = if runs % 2 == 1 {
        errs[runs / 2]
    } else {
        0.5 * (errs[runs / 2 - 1] + errs[runs / 2])
    };
    Ok(ReplicationReport {
        params: params.clone(),
        radius: learner.radius(),
        trials,
        master_seed,
        rho_hat: disagree as f64 / trials as f64,
        rho_ci: wilson_interval(disagree as u64, trials as u64),
        error_rate: above as f64 / runs as f64,
        mean_error: mean,
        median_error: median,
        ball_cap_hits: 0,
        records,
    })
}

/// Runs a one-point configuration.
pub fn run_replication_experiment(config: &ExperimentConfig) -> Result<ReplicationReport> {
    let grid = config.grid()?;
    match grid.as_slice() {
        [params] => run_replication(params, config.trials, config.master_seed),
        _ => Err(Error::usage(format!("expected a single grid point, got {}", grid.len()))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    /// All data rows in grid order, including resumed ones.
    pub rows: Vec<String>,
    /// Rows taken from an existing output file.
    pub resumed: usize,
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

/// Leading columns that identify a grid point.
fn row_key(params: &Params) -> String {
    format!(
        "{},{},{},{},{},{}",
        params.d(),
        params.k(),
        fmt_g17(params.epsilon()),
        fmt_g17(params.rho()),
        fmt_g17(params.delta()),
        params.n()
    )
}

fn existing_rows(path: &Path, grid: &[Params]) -> Result<Vec<String>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut lines = BufReader::new(File::open(path)?).lines();
    match lines.next().transpose()? {
        None => return Ok(Vec::new()),
        Some(h) if h == CSV_HEADER => {}
        Some(_) => return Err(Error::usage(format!("{} exists with a different header", path.display()))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let Some(params) = grid.get(rows.len()) else {
            return Err(Error::usage(format!("{} has more rows than the grid", path.display())));
        };
        if !line.starts_with(&format!("{},", row_key(params))) {
            return Err(Error::usage(format!(
                "{} row {} does not match grid point {}",
                path.display(),
                rows.len() + 1,
                row_key(params)
            )));
        }
        rows.push(line);
    }
    Ok(rows)
}

/// Runs every grid point, appending rows to `config.output` (when set) as
/// they finish. Grid points already present in the output are skipped.
pub fn sweep_experiments(config: &ExperimentConfig) -> Result<SweepSummary> {
    let grid = config.grid()?;
    let mut rows = match &config.output {
        Some(p) => existing_rows(p, &grid)?,
        None => Vec::new(),
    };
    let resumed = rows.len();
    let mut sink = match &config.output {
        Some(p) => {
            let mut f = OpenOptions::new().create(true).append(true).open(p)?;
            if resumed == 0 && f.metadata()?.len() == 0 {
                writeln!(f, "{CSV_HEADER}")?;
            }
            Some(f)
        }
        None => None,
    };
    for params in &grid[resumed..] {
        let report = match run_replication(params, config.trials, config.master_seed) {
            Err(Error::Resource { .. }) => ReplicationReport::capped(params, config.trials, config.master_seed),
            other => other?,
        };
        let row = report.csv_row();
        if let Some(f) = sink.as_mut() {
            writeln!(f, "{row}")?;
            f.flush()?;
        }
        rows.push(row);
    }
    Ok(SweepSummary { rows, resumed })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendCheck {
    pub fitted: Vec<f64>,
    /// `|ρ̂_i − fit_i|` in units of the CI width at point `i`.
    pub deviations: Vec<f64>,
    pub worst: f64,
    pub holds: bool,
}

/// Fits a non-increasing sequence to `ρ̂` (weighted by trials) and checks
/// every point lies within `tolerance` CI widths of the fit.
pub fn trend_check(reports: &[ReplicationReport], tolerance: f64) -> TrendCheck {
    let values: Vec<f64> = reports.iter().map(|r| r.rho_hat).collect();
    let weights: Vec<f64> = reports.iter().map(|r| r.trials as f64).collect();
    let fitted = isotonic_nonincreasing(&values, &weights);
    let deviations: Vec<f64> = reports
        .iter()
        .zip(&fitted)
        .map(|(r, f)| (r.rho_hat - f).abs() / (r.rho_ci.1 - r.rho_ci.0))
        .collect();
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    TrendCheck { fitted, deviations, worst, holds: worst <= tolerance }
}
