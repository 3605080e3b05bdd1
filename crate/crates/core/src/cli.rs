//! Command line front end.
//!
//! Every subcommand writes CSV to `--out` (or standard output) unless
//! `--json` is given, in which case a single JSON document is written
//! instead. Human-readable summaries go to standard error.
//!
//! | Subcommand | CSV columns |
//! |------------|-------------|
//! | `learn` | `target,center,output,error` |
//! | `replicate`, `sweep` | the harness schema ([`crate::harness::CSV_HEADER`]) |
//! | `mode` | `target,mode,mode_labeling,mode_probability,mode_error,retained` |
//! | `spectrum` | `rank,eigenvalue,dense` |
//! | `expansion` | `d,k,radius,size,internal_edges,ratio` |
//! | `tail` | `d,k,r,trials,p_hat,p_lo,p_hi,mean,central_moment,violations,large_eigenvalues` |
//! | `coupling` | `i,j,p` |
//! | `step-verify` | see [`crate::coupling::StepReport::to_csv`] |
//! | `balls` | `t,count,cumulative` |
//! | `lo-check` | `s,k,target,estimate,sigma,exact,bound,within_bound` |
//!
//! Exit codes: 0 success, 1 usage error, 2 resource limit, 3 failed
//! verification.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::balls::{BallSpec, BallTable};
use crate::coupling::{majorization_coupling, verify_step_distribution, StepPlan, DEFAULT_PREPASS};
use crate::domain::{exact_error, sample_training_set, HypothesisIndex, Params};
use crate::error::{Error, Result};
use crate::harness::{fmt_g17, run_replication, sweep_experiments, ExperimentConfig, CSV_HEADER};
use crate::learner::{build_mode_classes, estimate_transitions, Learner, SharedKey};
use crate::prf::derive_key;
use crate::spectral::{eigen_check, expansion_ratio, internal_edge_count, littlewood_offord_estimate, tail_and_moment_estimate};

#[derive(Debug, Parser)]
#[command(name = "replicable", version, about = "Replicable learning of wrap-around intervals and supporting machinery")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file (flat key = value)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit one JSON document instead of CSV
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Args, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 29)]
    k: u32,
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long)]
    radius_fraction: Option<f64>,
    #[arg(long)]
    ball_cap: Option<u64>,
}

impl ParamArgs {
    fn params(&self) -> Result<Params> {
        let mut p = Params::new(self.d, self.k, self.epsilon, self.rho, self.delta, self.n)?;
        if let Some(f) = self.radius_fraction {
            p = p.with_radius_fraction(f)?;
        }
        if let Some(c) = self.ball_cap {
            p = p.with_ball_cap(c)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the learner once on a random target
    Learn {
        #[command(flatten)]
        p: ParamArgs,
        /// Target tuple, comma separated (default: random)
        #[arg(long)]
        target: Option<String>,
    },
    /// Estimate replicability and error at one parameter point
    Replicate {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Run a parameter sweep from --config
    Sweep,
    /// Exact modes and mode classes at micro scale
    Mode {
        #[command(flatten)]
        p: ParamArgs,
    },
    /// Cayley graph spectrum against a dense eigendecomposition
    Spectrum {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: u32,
    },
    /// Internal edge fraction of a wrap-around ball around the origin
    Expansion {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        radius: u64,
    },
    /// Tail probability, central moment and eigenvalue implication for X_z
    Tail {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Majorization coupling between two laws
    Coupling {
        /// Dominating law, comma separated
        #[arg(long)]
        x: String,
        /// Dominated law, comma separated
        #[arg(long)]
        y: String,
    },
    /// Distribution checks for the label-preserving random step
    StepVerify {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_PREPASS)]
        prepass: usize,
    },
    /// Exact l1 / wrap-around ball shell counts
    Balls {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: u64,
        /// Modulus for wrap-around balls (default: unbounded)
        #[arg(long)]
        k: Option<u32>,
    },
    /// Littlewood-Offord probability against its bound
    LoCheck {
        /// Coefficients, comma separated (default: s random nonzero residues)
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 12)]
        s: usize,
        #[arg(long, default_value_t = 0)]
        y: u32,
        #[arg(long, default_value_t = 101)]
        k: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
}

fn parse_csv_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::usage(format!("bad {what} entry {t:?}"))))
        .collect()
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Verification(format!("JSON encoding failed: {e}")))
}

struct Output {
    body: String,
    summary: String,
    /// A verification failure to report after writing the body.
    failure: Option<String>,
}

impl Output {
    fn new(body: String, summary: String) -> Self {
        Output { body, summary, failure: None }
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match &cli.command {
        Command::Learn { p, target } => {
            let params = p.params()?;
            let target = match target {
                Some(t) => HypothesisIndex::new(parse_csv_list("target", t)?, params.k())?,
                None => HypothesisIndex::random(params.d(), params.k(), &mut rng),
            };
            if target.d() != params.d() {
                return Err(Error::usage("target length must equal d"));
            }
            let sample = sample_training_set(&params, &target, &mut rng);
            let key = SharedKey(derive_key(cli.seed, 0));
            let center = estimate_transitions(&sample, &params)?;
            let learner = Learner::new(&params)?;
            let output = learner.select(&center, &key);
            let error = exact_error(&target, &output)?;
            let body = if cli.json {
                json(&serde_json::json!({
                    "target": target, "center": center, "output": output,
                    "error": error, "radius": learner.radius(), "ball_size": learner.ball_size(),
                }))?
            } else {
                format!("target,center,output,error\n\"{target}\",\"{center}\",\"{output}\",{}\n", fmt_g17(error))
            };
            Ok(Output::new(body, format!("output {output} with error {error:.6} (ball of {} hypotheses)", learner.ball_size())))
        }
        Command::Replicate { p, trials } => {
            let config = match &cli.config {
                Some(path) => ExperimentConfig::from_file(path)?,
                None => ExperimentConfig::single(&p.params()?, *trials, cli.seed),
            };
            let grid = config.grid()?;
            let [params] = grid.as_slice() else {
                return Err(Error::usage(format!("replicate needs a single grid point, got {}; use sweep", grid.len())));
            };
            let report = run_replication(params, config.trials, config.master_seed)?;
            let body = if cli.json {
                json(&report)?
            } else {
                format!("{CSV_HEADER}\n{}\n", report.csv_row())
            };
            let summary = format!(
                "rho_hat {:.4} [{:.4}, {:.4}], error rate {:.4}",
                report.rho_hat, report.rho_ci.0, report.rho_ci.1, report.error_rate
            );
            Ok(Output::new(body, summary))
        }
        Command::Sweep => {
            let path = cli.config.as_ref().ok_or_else(|| Error::usage("sweep needs --config"))?;
            let mut config = ExperimentConfig::from_file(path)?;
            if cli.out.is_some() {
                config.output = cli.out.clone();
            }
            let summary = sweep_experiments(&config)?;
            let note = format!("{} rows ({} resumed)", summary.rows.len(), summary.resumed);
            // the sweep already wrote its own file
            let body = if config.output.is_some() && !cli.json {
                String::new()
            } else if cli.json {
                json(&summary)?
            } else {
                summary.to_csv()
            };
            Ok(Output::new(body, note))
        }
        Command::Mode { p } => {
            let params = p.params()?;
            let key = SharedKey(derive_key(cli.seed, 0));
            let report = build_mode_classes(&params, &key)?;
            let partition = report.is_partition(&params);
            let body = if cli.json {
                let classes: Vec<_> = report
                    .classes
                    .iter()
                    .map(|(f, members)| serde_json::json!({ "labeling": f.to_bit_string(), "members": members }))
                    .collect();
                json(&serde_json::json!({
                    "entries": report.entries, "classes": classes,
                    "partition": partition, "class_size": report.class_size_check(&params),
                }))?
            } else {
                let mut s = String::from("target,mode,mode_labeling,mode_probability,mode_error,retained\n");
                for e in &report.entries {
                    s.push_str(&format!(
                        "\"{}\",\"{}\",{},{},{},{}\n",
                        e.target,
                        e.mode,
                        e.mode_labeling.to_bit_string(),
                        fmt_g17(e.mode_probability),
                        fmt_g17(e.mode_error),
                        e.mode_error <= params.epsilon()
                    ));
                }
                s
            };
            let mut out = Output::new(
                body,
                format!("{} classes over {} retained hypotheses, partition: {partition}", report.classes.len(), report.retained()),
            );
            if !partition {
                out.failure = Some("mode classes do not partition the retained hypotheses".into());
            }
            Ok(out)
        }
        Command::Spectrum { d, k } => {
            let report = eigen_check(*d, *k)?;
            let body = if cli.json { json(&report)? } else { report.to_csv() };
            let mut out = Output::new(
                body,
                format!(
                    "{} eigenvalues, max deviation from dense {:.3e}, trace {}",
                    report.eigenvalues.len(),
                    report.max_deviation,
                    fmt_g17(report.trace)
                ),
            );
            if report.max_deviation > 1e-9 {
                out.failure = Some(format!("analytic spectrum deviates by {:.3e}", report.max_deviation));
            }
            Ok(out)
        }
        Command::Expansion { d, k, radius } => {
            let origin = HypothesisIndex::zero(*d, *k);
            let params_free: Vec<HypothesisIndex> = crate::domain::all_hypotheses(*d, *k)
                .filter(|h| crate::domain::tuple_distance_unchecked(h.coords(), origin.coords(), *k) <= *radius)
                .collect();
            let internal = internal_edge_count(&params_free, *d, *k)?;
            let ratio = expansion_ratio(&params_free, *d, *k)?;
            let body = if cli.json {
                json(&serde_json::json!({ "d": d, "k": k, "radius": radius, "size": params_free.len(), "internal_edges": internal, "ratio": ratio }))?
            } else {
                format!("d,k,radius,size,internal_edges,ratio\n{d},{k},{radius},{},{internal},{}\n", params_free.len(), fmt_g17(ratio))
            };
            Ok(Output::new(body, format!("internal fraction {ratio:.6}")))
        }
        Command::Tail { d, k, r, trials } => {
            let report = tail_and_moment_estimate(*d, *k, *r, *trials, &mut rng)?;
            let body = if cli.json { json(&report)? } else { report.to_csv() };
            let mut out = Output::new(body, format!("p_hat {:.6}, {} implication violations", report.p_hat, report.violations));
            if report.violations > 0 {
                out.failure = Some(format!("{} eigenvalue/tail implication violations", report.violations));
            }
            Ok(out)
        }
        Command::Coupling { x, y } => {
            let x: Vec<f64> = parse_csv_list("x", x)?;
            let y: Vec<f64> = parse_csv_list("y", y)?;
            let c = majorization_coupling(&x, &y)?;
            let violation = c.max_violation(&x, &y);
            let body = if cli.json {
                json(&serde_json::json!({ "coupling": c, "max_violation": violation }))?
            } else {
                let mut s = String::from("i,j,p\n");
                for i in 0..=c.d() {
                    for (j, p) in c.row(i).iter().enumerate() {
                        s.push_str(&format!("{i},{j},{}\n", fmt_g17(*p)));
                    }
                }
                s
            };
            let mut out = Output::new(body, format!("max property violation {violation:.3e}"));
            if violation > 1e-9 {
                out.failure = Some(format!("coupling properties violated by {violation:.3e}"));
            }
            Ok(out)
        }
        Command::StepVerify { p, trials, prepass } => {
            let params = p.params()?;
            let report = if *prepass == DEFAULT_PREPASS {
                verify_step_distribution(&params, *trials, &mut rng)?
            } else {
                let plan = StepPlan::estimate(&params, *prepass, &mut rng)?;
                crate::coupling::verify_with_plan(&params, &plan, *trials, &mut rng)?
            };
            let body = if cli.json { json(&report)? } else { report.to_csv() };
            let mut out = Output::new(
                body,
                format!(
                    "TV(v-u, uniform) {:.5}, label violations {}, regime holds: {}",
                    report.direction_tv, report.label_violations, report.regime_holds
                ),
            );
            if report.label_violations > 0 {
                out.failure = Some(format!("{} steps changed a label", report.label_violations));
            }
            Ok(out)
        }
        Command::Balls { d, r, k } => {
            let spec = match k {
                Some(k) => BallSpec::wrapped(*d, *r, *k),
                None => BallSpec::unbounded(*d, *r),
            };
            let table = BallTable::new(spec);
            let body = if cli.json {
                let counts: Vec<String> = table.counts.iter().map(ToString::to_string).collect();
                json(&serde_json::json!({ "d": d, "r": r, "k": k, "counts": counts, "volume": table.volume().to_string() }))?
            } else {
                table.to_csv()
            };
            Ok(Output::new(body, format!("volume {}", table.volume())))
        }
        Command::LoCheck { x, s, y, k, trials } => {
            let coeffs: Vec<u32> = match x {
                Some(x) => parse_csv_list("x", x)?,
                None => {
                    use rand::Rng;
                    if *k < 2 {
                        return Err(Error::usage("k must be at least 2"));
                    }
                    (0..*s).map(|_| rng.random_range(1..*k)).collect()
                }
            };
            let report = littlewood_offord_estimate(&coeffs, *y, *k, *trials, &mut rng)?;
            let body = if cli.json {
                json(&report)?
            } else {
                format!(
                    "s,k,target,estimate,sigma,exact,bound,within_bound\n{},{},{},{},{},{},{},{}\n",
                    report.s,
                    report.k,
                    report.target,
                    fmt_g17(report.estimate),
                    fmt_g17(report.sigma),
                    report.exact,
                    fmt_g17(report.bound),
                    report.within_bound
                )
            };
            let mut out = Output::new(body, format!("estimate {:.6} vs bound {:.6}", report.estimate, report.bound));
            if !report.within_bound {
                out.failure = Some("estimate exceeds the Littlewood-Offord bound".into());
            }
            Ok(out)
        }
    }
}

fn emit(cli: &Cli, output: &Output, out: &mut dyn Write) -> Result<()> {
    if output.body.is_empty() {
        return Ok(());
    }
    match &cli.out {
        Some(path) => std::fs::write(path, &output.body)?,
        None => out.write_all(output.body.as_bytes())?,
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the subcommand, and
/// returns the process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                1
            } else {
                let _ = write!(out, "{rendered}");
                0
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::usage("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::usage(format!("cannot build thread pool: {e}")))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    let result = result.and_then(|o| emit(&cli, &o, out).map(|_| o));
    match result {
        Ok(o) => {
            let _ = writeln!(err, "{}", o.summary);
            match o.failure {
                Some(f) => {
                    let _ = writeln!(err, "verification failed: {f}");
                    3
                }
                None => 0,
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
