//! `chainbound` command-line interface.
//!
//! Exit codes: 0 when every verdict passes, 2 on a verdict failure, 1 on a
//! usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use chainbound::chaining::{gamma_bruteforce, gamma_upper, FiniteMetricSpace, BRUTEFORCE_MAX_POINTS};
use chainbound::dist::{Dist, DistKind};
use chainbound::lambda::{lambda_bruteforce, lambda_upper, ClassEnsemble, LinearClass};
use chainbound::orderstats::{
    cutoff_j0, decay_slope, decompose, exceedance_csv, tail_check, TailParams, EXCEEDANCE_CSV_HEADER,
};
use chainbound::projection::{
    check_assumption_a, check_assumption_b, ell2_radius_bound, projection_complexity, BaseSeminorm, ProjectedClass,
};

use chainbound_harness::classes::read_csv_matrix;
use chainbound_harness::config::ExperimentConfig;
use chainbound_harness::experiments::{preset, simulate};
use chainbound_harness::record::{load_records, write_atomic, write_json, JsonlAppender};
use chainbound_harness::suites::{self, Verdict, ALL, DEFAULT_SEED, DETERMINISTIC};
use chainbound_harness::HarnessError;

const DEFAULT_OUT: &str = "chainbound-out";

#[derive(Parser)]
#[command(name = "chainbound", version, about = "Chaining functionals and empirical-process experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Flat TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "CHAINBOUND_OUT", default_value = DEFAULT_OUT)]
    out: PathBuf,
    /// Experiment name (overrides the config).
    #[arg(long, global = true)]
    experiment: Option<String>,
    /// Trials per phase (overrides the config).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// gamma_2 of a metric given as a CSV distance matrix.
    Gamma {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        s0: usize,
    },
    /// Lambda and Lambda~ of a class given as CSV rows.
    Lambda {
        class: PathBuf,
        /// gaussian, exponential, laplace or rademacher.
        #[arg(long, default_value = "gaussian")]
        ensemble: String,
        #[arg(long, default_value_t = 4.0)]
        u: f64,
        #[arg(long, default_value_t = 0)]
        s0: usize,
    },
    /// Head/tail split of a vector (CSV, one row) at the cutoff j0.
    Decompose {
        vector: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 8.0)]
        p: f64,
    },
    /// Exceedance table of the decomposition bounds for a symmetric Pareto sample.
    Tails {
        /// Tail index of the standardized symmetric Pareto variable.
        #[arg(long, default_value_t = 5.0)]
        tail: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// Moment order used by the bounds; must be below the tail index.
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 8.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
    },
    /// Structural checks on an equality-defined projection of CSV rows.
    ProjectionCheck {
        vectors: PathBuf,
        #[arg(long, default_value_t = 0)]
        s0: usize,
        /// Cutoffs j_{s0}, j_{s0+1}, ...; the top level is forced to N + 1.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        js: Vec<usize>,
    },
    /// Run a named experiment and write its trials and record.
    Simulate,
    /// Run acceptance suites.
    Verify {
        /// deterministic, all, or a comma-separated list of criterion numbers.
        #[arg(long, default_value = "deterministic")]
        suite: String,
    },
    /// Summarize every record in the output directory as CSV.
    Report,
}

fn config_from(g: &Global) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match (&g.config, &g.experiment) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(name)) => preset(name),
        (None, None) => return Err(HarnessError::Config("simulate needs --config or --experiment".into())),
    };
    if let Some(name) = &g.experiment {
        cfg.experiment = name.clone();
    }
    if let Some(seed) = g.seed {
        cfg.seed = Some(seed);
    }
    if let Some(t) = g.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `--out` (or its environment default) unless the config names a directory
/// and `--out` was left at its default.
fn out_dir(g: &Global, cfg: &ExperimentConfig) -> PathBuf {
    match &cfg.out_dir {
        Some(d) if g.out.as_os_str() == DEFAULT_OUT => d.clone(),
        _ => g.out.clone(),
    }
}

fn ensemble_tag(name: &str) -> Result<ClassEnsemble, HarnessError> {
    Ok(match name {
        "gaussian" => ClassEnsemble::Gaussian,
        "exponential" => ClassEnsemble::Exponential,
        "laplace" => ClassEnsemble::Laplace,
        "rademacher" => ClassEnsemble::Rademacher,
        other => return Err(HarnessError::Config(format!("unknown ensemble {other:?}"))),
    })
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn verdict_code(verdicts: &[Verdict]) -> u8 {
    if verdicts.iter().all(|v| v.pass) {
        0
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<u8, HarnessError> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("threads: {e}")))?;
    }
    match &cli.command {
        Command::Gamma { matrix, alpha, s0 } => {
            let space = FiniteMetricSpace::from_rows(&read_csv_matrix(matrix)?)?;
            let upper = gamma_upper(&space, *alpha, *s0);
            let brute = if space.len() <= BRUTEFORCE_MAX_POINTS { Some(gamma_bruteforce(&space, *alpha, *s0)?) } else { None };
            print_json(&json!({"points": space.len(), "alpha": alpha, "s0": s0, "gamma_upper": upper, "gamma_bruteforce": brute}));
            Ok(0)
        }
        Command::Lambda { class, ensemble, u, s0 } => {
            let lc = LinearClass::new(read_csv_matrix(class)?, ensemble_tag(ensemble)?)?;
            let v = lambda_upper(&lc, *s0, *u)?;
            let brute = if lc.len() <= BRUTEFORCE_MAX_POINTS { Some(lambda_bruteforce(&lc, *s0, *u)?) } else { None };
            print_json(&json!({
                "lambda": v.lambda,
                "lambda_tilde": v.lambda_tilde,
                "start_norm": v.start_norm,
                "lambda_bruteforce": brute,
            }));
            Ok(0)
        }
        Command::Decompose { vector, q, r, p } => {
            let rows = read_csv_matrix(vector)?;
            let z: Vec<f64> = rows.concat();
            let params = TailParams::new(*q, *r, *p)?;
            let j0 = cutoff_j0(&params, z.len());
            let d = decompose(&z, j0);
            print_json(&json!({
                "N": z.len(),
                "j0": j0,
                "head_support": d.head_support,
                "head_l2": d.head_l2(),
                "tail_lr": d.tail_lr(*r),
            }));
            Ok(0)
        }
        Command::Tails { tail, n, q, r, p, c1 } => {
            let seed = g.seed.unwrap_or(DEFAULT_SEED);
            let trials = g.trials.unwrap_or(10_000);
            let dist = Dist::new(DistKind::SymmetricPareto { tail: *tail })?.standardized()?;
            let params = TailParams::new(*q, *r, *p)?;
            let grid: Vec<f64> = (0..25).map(|k| 2.0 * 4f64.powf(k as f64 / 24.0)).collect();
            let rows = tail_check(&dist, &params, *n, trials, &grid, *c1, seed)?;
            let dir = &g.out;
            let mut csv = String::from(EXCEEDANCE_CSV_HEADER);
            csv.push('\n');
            csv.push_str(&exceedance_csv(&rows));
            write_atomic(&dir.join("tails.csv"), csv.as_bytes())?;
            let tail_rows: Vec<_> = rows.iter().filter(|r| r.bound_name == "tail_lr").cloned().collect();
            print_json(&json!({"rows": rows.len(), "tail_slope": decay_slope(&tail_rows), "csv": dir.join("tails.csv")}));
            Ok(0)
        }
        Command::ProjectionCheck { vectors, s0, js } => {
            let pc = ProjectedClass::greedy_equality(read_csv_matrix(vectors)?, *s0, js, BaseSeminorm::NormalizedL2L4)?;
            let a1 = check_assumption_a(&pc, 1.0);
            let a2 = check_assumption_a(&pc, 2.0);
            let b = check_assumption_b(&pc);
            let radius = ell2_radius_bound(&pc);
            print_json(&json!({
                "complexity": projection_complexity(&pc),
                "assumption_a_p1": a1,
                "assumption_a_p2": a2,
                "assumption_b": b,
                "radius_bound": radius,
            }));
            Ok(if a1.pass && a2.pass && b.pass && radius.pass { 0 } else { 2 })
        }
        Command::Simulate => {
            let cfg = config_from(g)?;
            let sim = simulate(&cfg)?;
            let dir = out_dir(g, &cfg);
            let name = &cfg.experiment;
            let mut app = JsonlAppender::create(&dir.join(format!("{name}.trials.jsonl")))?;
            for line in &sim.lines {
                app.push(line)?;
            }
            app.finish()?;
            write_json(&dir.join(format!("{name}.record.json")), &sim.record)?;
            for v in &sim.record.verdicts {
                println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
            Ok(if sim.record.passed() { 0 } else { 2 })
        }
        Command::Verify { suite } => {
            let ids: Vec<u8> = match suite.as_str() {
                "deterministic" => DETERMINISTIC.to_vec(),
                "all" => ALL.to_vec(),
                list => list
                    .split(',')
                    .map(|s| s.trim().parse::<u8>().ok().filter(|id| ALL.contains(id)))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| HarnessError::Config(format!("unknown suite {list:?}")))?,
            };
            let seed = g.seed.unwrap_or(DEFAULT_SEED);
            let verdicts: Vec<Verdict> = ids
                .iter()
                .map(|&id| {
                    let v = suites::run(id, seed);
                    println!("{v}");
                    v
                })
                .collect();
            write_json(&g.out.join("verify.json"), &verdicts)?;
            Ok(verdict_code(&verdicts))
        }
        Command::Report => {
            let dir = &g.out;
            let records = load_records(dir)?;
            let mut csv = String::from("experiment,complete,verdict,name,pass,detail\n");
            for (stem, rec) in &records {
                for v in &rec.verdicts {
                    csv.push_str(&format!(
                        "{stem},{},{},{},{},\"{}\"\n",
                        rec.complete,
                        if rec.passed() { "pass" } else { "fail" },
                        v.name,
                        v.pass,
                        v.detail.replace('"', "'")
                    ));
                }
            }
            write_atomic(&dir.join("summary.csv"), csv.as_bytes())?;
            let summaries: serde_json::Map<String, serde_json::Value> =
                records.iter().map(|(s, r)| (s.clone(), r.summary.clone())).collect();
            write_json(&dir.join("summary.json"), &summaries)?;
            print!("{csv}");
            let all: Vec<Verdict> = records.iter().flat_map(|(_, r)| r.verdicts.clone()).collect();
            let incomplete = records.iter().any(|(_, r)| !r.complete);
            Ok(if incomplete { 2 } else { verdict_code(&all) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
