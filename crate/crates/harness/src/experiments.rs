//! Named experiments run by `chainbound simulate`.

use serde_json::{json, Value};

use chainbound::dist::{Dist, DistKind};
use chainbound::norms::l2_norm;
use chainbound::processes::{
    multiplier_theorem_experiment, psi2_multiplier_experiment, quadratic_theorem_experiment,
    subgaussian_corollary_experiment, symmetrization_check, EnsembleKind, EnsembleSpec, Experiment,
    MultiplierParams, MultiplierSpec, Protocol, QuadraticForm, QuadraticParams,
};
use chainbound::rng::child_seed;

use crate::classes::{gaussian_class, read_csv_matrix};
use crate::config::ExperimentConfig;
use crate::record::{ExperimentRecord, VERSION};
use crate::suites::Verdict;
use crate::HarnessError;

/// Defaults for a named experiment; `seed` stays unset.
pub fn preset(name: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig { experiment: name.to_string(), ..ExperimentConfig::default() };
    match name {
        "multiplier_coordinate" => {
            c.multiplier = "coordinate".into();
            c.q = 8.0;
        }
        "multiplier_q_sweep" => c.trials = 200,
        "quadratic" => c.q = 8.0,
        "quadratic_log_concave" => {
            c.ensemble = "laplace".into();
            c.q = 8.0;
        }
        "psi2_multiplier" => {
            c.multiplier = "gaussian".into();
            c.u = 8.0;
            c.w = 8.0;
        }
        "subgaussian_scaling" => {
            c.n = 256;
            c.trials = 200;
        }
        "symmetrization" => {
            c.n = 64;
            c.trials = 10_000;
            c.dim = 8;
            c.class_size = 16;
        }
        _ => {}
    }
    c
}

/// Outcome of one `simulate` run before it is written out.
pub struct Simulation {
    pub record: ExperimentRecord,
    /// One JSON value per trial or table row, in a fixed order.
    pub lines: Vec<Value>,
}

pub fn class_of(cfg: &ExperimentConfig) -> Result<Vec<Vec<f64>>, HarnessError> {
    let class = match &cfg.class_file {
        Some(p) => read_csv_matrix(p)?,
        None => gaussian_class(cfg.class_size, cfg.dim, child_seed(cfg.seed()?, "class", 0)),
    };
    if class[0].len() != cfg.dim {
        return Err(HarnessError::Config(format!(
            "class vectors have dimension {}, config dim is {}",
            class[0].len(),
            cfg.dim
        )));
    }
    Ok(class)
}

fn coverage_verdict(name: &str, ex: &Experiment) -> Verdict {
    let r = &ex.report;
    let pass = r.coverage >= 0.95 && r.wilson_low >= 0.90;
    Verdict::new(
        0,
        name,
        pass,
        format!(
            "coverage {:.4} ({}/{}) wilson [{:.4}, {:.4}] constant {:.6e}",
            r.coverage, r.covered, r.fresh_trials, r.wilson_low, r.wilson_high, r.constant
        ),
    )
}

fn summary_of(ex: &Experiment) -> Value {
    json!({
        "name": ex.name,
        "report": ex.report,
        "diagnostics": ex.diagnostics.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
    })
}

fn protocol(cfg: &ExperimentConfig, seed: u64) -> Protocol {
    Protocol { calibration: cfg.trials, fresh: cfg.trials, target: cfg.target, seed }
}

fn coupled(cfg: &ExperimentConfig, class: &[Vec<f64>]) -> Result<MultiplierSpec, HarnessError> {
    Ok(match cfg.multiplier_spec()? {
        MultiplierSpec::Coordinate { .. } => {
            let t = &class[0];
            let norm = l2_norm(t);
            let theta = if norm > 0.0 { t.iter().map(|x| x / norm).collect() } else { t.clone() };
            MultiplierSpec::Coordinate { theta }
        }
        m => m,
    })
}

fn trial_lines(ex: &Experiment) -> Result<Vec<Value>, HarnessError> {
    ex.trials.iter().map(|t| Ok(serde_json::to_value(t)?)).collect()
}

/// Runs the experiment named in `cfg`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation, HarnessError> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    let class = class_of(cfg)?;
    let ens = cfg.ensemble_spec()?;
    let mut verdicts = Vec::new();
    let mut lines = Vec::new();
    let summary = match cfg.experiment.as_str() {
        "multiplier" | "multiplier_coordinate" => {
            let mult = coupled(cfg, &class)?;
            let params = MultiplierParams { s0: cfg.s0, u: cfg.u, w: cfg.w, q: cfg.q, n: cfg.n };
            let ex = multiplier_theorem_experiment(&class, &ens, &mult, &params, &protocol(cfg, seed))?;
            verdicts.push(coverage_verdict(&cfg.experiment, &ex));
            lines = trial_lines(&ex)?;
            summary_of(&ex)
        }
        "multiplier_q_sweep" => {
            let mut rows = Vec::new();
            for (k, q) in [3.0, 4.0, 6.0, 8.0].into_iter().enumerate() {
                // Student t with q + 1/2 degrees of freedom has a finite L_q norm.
                let dist = Dist::new(DistKind::StudentT { dof: q + 0.5 })?.standardized()?;
                let mult = MultiplierSpec::Independent { dist };
                let params = MultiplierParams { s0: cfg.s0, u: cfg.u, w: cfg.w, q, n: cfg.n };
                let ex = multiplier_theorem_experiment(
                    &class,
                    &ens,
                    &mult,
                    &params,
                    &protocol(cfg, child_seed(seed, "q-sweep", k as u64)),
                )?;
                verdicts.push(coverage_verdict(&format!("multiplier q={q}"), &ex));
                lines.extend(trial_lines(&ex)?);
                rows.push(json!({"q": q, "c3": ex.report.constant, "summary": summary_of(&ex)}));
            }
            Value::Array(rows)
        }
        "quadratic" | "quadratic_log_concave" => {
            let form = if cfg.experiment == "quadratic" { QuadraticForm::General } else { QuadraticForm::LogConcave };
            let params = QuadraticParams {
                s0: cfg.s0,
                u: cfg.u,
                q: cfg.q,
                n: cfg.n,
                form,
                width_samples: cfg.width_samples,
            };
            let ex = quadratic_theorem_experiment(&class, &class, &ens, &params, &protocol(cfg, seed))?;
            verdicts.push(coverage_verdict(&cfg.experiment, &ex));
            lines = trial_lines(&ex)?;
            summary_of(&ex)
        }
        "psi2_multiplier" => {
            let params = MultiplierParams { s0: cfg.s0, u: cfg.u, w: cfg.w, q: cfg.q, n: cfg.n };
            let ex = psi2_multiplier_experiment(&class, &ens, Dist::gaussian(), &params, &protocol(cfg, seed))?;
            verdicts.push(coverage_verdict(&cfg.experiment, &ex));
            lines = trial_lines(&ex)?;
            summary_of(&ex)
        }
        "subgaussian_scaling" => {
            if ens.kind != EnsembleKind::Gaussian {
                return Err(HarnessError::Config("subgaussian_scaling needs the gaussian ensemble".into()));
            }
            let rep = subgaussian_corollary_experiment(&class, cfg.u, cfg.n, cfg.trials, &[1.0, 2.0, 4.0, 8.0], seed)?;
            let pass = (0.9..=1.1).contains(&rep.sup_slope) && (rep.lambda_tilde_slope - 1.0).abs() <= 1e-12;
            verdicts.push(Verdict::new(
                0,
                "subgaussian_scaling",
                pass,
                format!("median slope {:.4}, lambda~ slope {:.15}", rep.sup_slope, rep.lambda_tilde_slope),
            ));
            for row in &rep.rows {
                lines.push(serde_json::to_value(row)?);
            }
            serde_json::to_value(&rep)?
        }
        "symmetrization" => {
            let (grid, rows) = symmetrization_rows(&class, &ens, cfg.n, cfg.trials, seed)?;
            let violated = rows.iter().filter(|r| !r.pass).count();
            verdicts.push(Verdict::new(
                0,
                "symmetrization",
                violated == 0,
                format!("{violated} violated rows out of {}", rows.len()),
            ));
            for row in &rows {
                lines.push(serde_json::to_value(row)?);
            }
            json!({"x_grid": grid, "rows": rows})
        }
        other => return Err(HarnessError::Config(format!("unknown experiment {other:?}"))),
    };
    Ok(Simulation {
        record: ExperimentRecord {
            version: VERSION.to_string(),
            config: cfg.clone(),
            complete: true,
            summary,
            trials_file: Some(format!("{}.trials.jsonl", cfg.experiment)),
            verdicts,
        },
        lines,
    })
}

/// The eight-point x-grid `sqrt(N) d (1, 1.5, ..., 4.5)` with `d` the largest
/// standard deviation in the class, and the symmetrization table on it.
pub fn symmetrization_rows(
    class: &[Vec<f64>],
    ens: &EnsembleSpec,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<chainbound::processes::SymmetrizationRow>), HarnessError> {
    let d = class.iter().map(|t| l2_norm(t)).fold(0.0, f64::max);
    let grid: Vec<f64> = (0..8).map(|k| (n as f64).sqrt() * d * (1.0 + 0.5 * k as f64)).collect();
    let rows = symmetrization_check(class, ens, n, &grid, trials, seed)?;
    Ok((grid, rows))
}
