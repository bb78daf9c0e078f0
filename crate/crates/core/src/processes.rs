//! Monte Carlo simulators for empirical, multiplier, product and quadratic
//! processes over finite linear classes, the Bernoulli multiplier process,
//! a symmetrization check and fit-then-validate coverage experiments.
//!
//! Every simulator is a pure function of its inputs and a seed. A trial seed
//! feeds two ChaCha streams, one for the design `X_1..X_N` and one for the
//! multipliers, so the two never share randomness.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{gaussian_abs_moment, Dist, DistKind};
use crate::error::{config, invalid, Error, Result};
use crate::lambda::{exp_mean_width, gaussian_width, lambda_upper, ClassEnsemble, LinearClass};
use crate::norms::{l2_norm, psi_alpha_estimate, GradedNormProfile, QGrid};
use crate::orderstats::{cutoff_formula, lp_norm, rearrange};
use crate::rng::{child_seed, stream};
use crate::stats::{conformal_quantile, kahan_sum, ls_slope, median, quantile_sorted, sorted, wilson_interval};

/// Law of each coordinate of `X`; all kinds are centred with unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Gaussian,
    Rademacher,
    /// `Exp(1) - 1`.
    Exponential,
    /// Laplace scaled to unit variance.
    Laplace,
    /// Symmetric Pareto with tail index `q`, standardized.
    Pareto { q: f64 },
    /// Student t with `q` degrees of freedom, standardized.
    Student { q: f64 },
}

/// `X = (x_1, ..., x_n)` with i.i.d. coordinates of the given kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub dim: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dim: usize) -> Result<Self> {
        let e = EnsembleSpec { kind, dim };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return invalid("ensemble dimension must be positive");
        }
        match self.kind {
            EnsembleKind::Pareto { q } | EnsembleKind::Student { q } if !(q > 2.0 && q.is_finite()) => {
                config(format!("heavy-tailed ensembles need q > 2, got {q}"))
            }
            _ => Ok(()),
        }
    }

    /// The standardized coordinate law.
    pub fn coordinate_dist(&self) -> Result<Dist> {
        self.validate()?;
        let kind = match self.kind {
            EnsembleKind::Gaussian => DistKind::Gaussian,
            EnsembleKind::Rademacher => DistKind::Rademacher,
            EnsembleKind::Exponential => DistKind::CenteredExponential,
            EnsembleKind::Laplace => DistKind::Laplace,
            EnsembleKind::Pareto { q } => DistKind::SymmetricPareto { tail: q },
            EnsembleKind::Student { q } => DistKind::StudentT { dof: q },
        };
        Dist::new(kind)?.standardized()
    }

    /// Ensemble tag for the complexity functionals; heavy-tailed kinds have no
    /// analytic graded norm.
    pub fn class_ensemble(&self) -> Result<ClassEnsemble> {
        match self.kind {
            EnsembleKind::Gaussian => Ok(ClassEnsemble::Gaussian),
            EnsembleKind::Rademacher => Ok(ClassEnsemble::Rademacher),
            EnsembleKind::Exponential => Ok(ClassEnsemble::Exponential),
            EnsembleKind::Laplace => Ok(ClassEnsemble::Laplace),
            _ => config("heavy-tailed ensembles have no analytic graded norm; use an empirical class"),
        }
    }
}

/// Multiplier `xi`: independent of `X`, or the linear form `<X, theta>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierSpec {
    Independent { dist: Dist },
    Coordinate { theta: Vec<f64> },
}

impl MultiplierSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            MultiplierSpec::Independent { dist } => dist.validate(),
            MultiplierSpec::Coordinate { theta } if theta.len() != dim => {
                invalid(format!("theta has length {}, ensemble dimension is {dim}", theta.len()))
            }
            MultiplierSpec::Coordinate { .. } => Ok(()),
        }
    }

    /// `E xi f` for `f = <t, .>`: the independent kind has mean `E xi * E f = 0`
    /// (centred ensembles) and the coordinate kind gives `<theta, t>`.
    pub fn mean_product(&self, t: &[f64]) -> f64 {
        match self {
            MultiplierSpec::Independent { .. } => 0.0,
            MultiplierSpec::Coordinate { theta } => dot(theta, t),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_class(class: &[Vec<f64>], dim: usize) -> Result<()> {
    if class.is_empty() {
        return invalid("the class must contain at least one vector");
    }
    if class.iter().any(|t| t.len() != dim) {
        return invalid(format!("class vectors must have dimension {dim}"));
    }
    Ok(())
}

/// `N` draws of `X`, row-major.
pub fn sample_design(ens: &EnsembleSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = ens.coordinate_dist()?.sampler();
    let mut rng = stream(seed, "design", 0);
    let mut x = vec![0.0; n * ens.dim];
    sampler.fill(&mut rng, &mut x);
    Ok(x)
}

/// `V = { (f(X_i))_{i <= N} : f in F }`: one row per class member.
pub fn sample_projection(class: &[Vec<f64>], ens: &EnsembleSpec, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_class(class, ens.dim)?;
    let x = sample_design(ens, n, seed)?;
    Ok(project(class, &x, ens.dim))
}

fn project(class: &[Vec<f64>], x: &[f64], dim: usize) -> Vec<Vec<f64>> {
    class.iter().map(|t| x.chunks_exact(dim).map(|row| dot(row, t)).collect()).collect()
}

fn mean(xs: &[f64]) -> f64 {
    kahan_sum(xs) / xs.len() as f64
}

/// `sup_f |(1/N) sum_i f(X_i) - E f|`; every ensemble is centred so `E f = 0`.
pub fn empirical_sup(class: &[Vec<f64>], ens: &EnsembleSpec, n: usize, seed: u64) -> Result<f64> {
    let v = sample_projection(class, ens, n, seed)?;
    Ok(v.iter().map(|row| mean(row).abs()).fold(0.0, f64::max))
}

/// Multipliers `xi_1..xi_N` for a design drawn with the same seed.
pub fn sample_multipliers(mult: &MultiplierSpec, x: &[f64], dim: usize, seed: u64) -> Vec<f64> {
    match mult {
        MultiplierSpec::Independent { dist } => {
            let mut rng = stream(seed, "multiplier", 0);
            let s = dist.sampler();
            (0..x.len() / dim).map(|_| s.sample(&mut rng)).collect()
        }
        MultiplierSpec::Coordinate { theta } => x.chunks_exact(dim).map(|row| dot(row, theta)).collect(),
    }
}

/// Per-trial outcome of a multiplier simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierDraw {
    /// `sup_f |(1/N) sum_i xi_i f(X_i) - E xi f|`.
    pub sup: f64,
    pub xi: Vec<f64>,
}

pub fn multiplier_draw(
    class: &[Vec<f64>],
    ens: &EnsembleSpec,
    mult: &MultiplierSpec,
    n: usize,
    seed: u64,
) -> Result<MultiplierDraw> {
    check_class(class, ens.dim)?;
    mult.validate(ens.dim)?;
    let x = sample_design(ens, n, seed)?;
    let xi = sample_multipliers(mult, &x, ens.dim, seed);
    let v = project(class, &x, ens.dim);
    let sup = class
        .iter()
        .zip(&v)
        .map(|(t, row)| {
            let prods: Vec<f64> = row.iter().zip(&xi).map(|(f, z)| z * f).collect();
            (mean(&prods) - mult.mean_product(t)).abs()
        })
        .fold(0.0, f64::max);
    Ok(MultiplierDraw { sup, xi })
}

/// `sup_f |(1/N) sum_i xi_i f(X_i) - E xi f|`.
pub fn multiplier_sup(
    class: &[Vec<f64>],
    ens: &EnsembleSpec,
    mult: &MultiplierSpec,
    n: usize,
    seed: u64,
) -> Result<f64> {
    Ok(multiplier_draw(class, ens, mult, n, seed)?.sup)
}

fn product_sup_on(f: &[Vec<f64>], h: &[Vec<f64>], vf: &[Vec<f64>], vh: &[Vec<f64>], diagonal: bool) -> f64 {
    let mut best = 0.0f64;
    for a in 0..f.len() {
        let range: Vec<usize> = if diagonal { vec![a] } else { (0..h.len()).collect() };
        for b in range {
            let prods: Vec<f64> = vf[a].iter().zip(&vh[b]).map(|(x, y)| x * y).collect();
            best = best.max((mean(&prods) - dot(&f[a], &h[b])).abs());
        }
    }
    best
}

/// `sup_{f, h} |(1/N) sum_i f(X_i) h(X_i) - E fh|` with `E fh = <t_f, t_h>`.
pub fn product_sup(f: &[Vec<f64>], h: &[Vec<f64>], ens: &EnsembleSpec, n: usize, seed: u64) -> Result<f64> {
    check_class(f, ens.dim)?;
    check_class(h, ens.dim)?;
    let x = sample_design(ens, n, seed)?;
    Ok(product_sup_on(f, h, &project(f, &x, ens.dim), &project(h, &x, ens.dim), false))
}

/// `sup_f |(1/N) sum_i f(X_i)^2 - E f^2|`.
pub fn quadratic_sup(class: &[Vec<f64>], ens: &EnsembleSpec, n: usize, seed: u64) -> Result<f64> {
    check_class(class, ens.dim)?;
    let x = sample_design(ens, n, seed)?;
    let v = project(class, &x, ens.dim);
    Ok(product_sup_on(class, class, &v, &v, true))
}

/// `sup_v |sum_i eps_i z_i v_i|`.
pub fn bernoulli_multiplier_sup(vs: &[Vec<f64>], z: &[f64], eps: &[f64]) -> f64 {
    vs.iter()
        .map(|v| v.iter().zip(z).zip(eps).map(|((a, b), e)| e * a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Largest `N` accepted by [`exhaustive_bernoulli_law`].
pub const EXHAUSTIVE_MAX_N: usize = 12;

/// Exact law of the Bernoulli multiplier sup over all `2^N` sign vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliLaw {
    sorted: Vec<f64>,
}

impl BernoulliLaw {
    /// `P(S <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `P(S < x)`.
    pub fn cdf_below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }

    /// Lower quantile `inf { x : P(S <= x) >= level }`.
    pub fn quantile(&self, level: f64) -> f64 {
        quantile_sorted(&self.sorted, level)
    }
}

pub fn exhaustive_bernoulli_law(vs: &[Vec<f64>], z: &[f64]) -> Result<BernoulliLaw> {
    let n = z.len();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge(format!("exhaustive enumeration needs N <= {EXHAUSTIVE_MAX_N}, got {n}")));
    }
    if vs.iter().any(|v| v.len() != n) {
        return invalid("every v must have the length of z");
    }
    let mut eps = vec![0.0; n];
    let values: Vec<f64> = (0u32..(1 << n))
        .map(|mask| {
            for (i, e) in eps.iter_mut().enumerate() {
                *e = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            }
            bernoulli_multiplier_sup(vs, z, &eps)
        })
        .collect();
    Ok(BernoulliLaw { sorted: sorted(&values) })
}

pub fn exhaustive_bernoulli_quantiles(vs: &[Vec<f64>], z: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    let law = exhaustive_bernoulli_law(vs, z)?;
    Ok(levels.iter().map(|&l| law.quantile(l)).collect())
}

/// Monte Carlo quantiles from `draws` random sign vectors.
pub fn mc_bernoulli_quantiles(vs: &[Vec<f64>], z: &[f64], draws: usize, levels: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, "signs", 0);
    let mut eps = vec![0.0; z.len()];
    let values: Vec<f64> = (0..draws)
        .map(|_| {
            for e in eps.iter_mut() {
                *e = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            bernoulli_multiplier_sup(vs, z, &eps)
        })
        .collect();
    let s = sorted(&values);
    levels.iter().map(|&l| quantile_sorted(&s, l)).collect()
}

/// One x-value of the symmetrization check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationRow {
    pub x: f64,
    pub variance_factor: f64,
    pub lhs_probability: f64,
    /// `variance_factor * lhs_probability`.
    pub lhs: f64,
    /// `2 P(sup |sum eps_i Z_f(i)| > x/4)`, capped at 1.
    pub rhs: f64,
    pub joint_stderr: f64,
    pub skipped: bool,
    pub pass: bool,
}

/// Compares `(1 - 4N sup var / x^2) P(sup_f |sum_i Z_f(i)| > x)` with
/// `2 P(sup_f |sum_i eps_i Z_f(i)| > x/4)` for `Z_f = f(X) - E f`.
pub fn symmetrization_check(
    class: &[Vec<f64>],
    ens: &EnsembleSpec,
    n: usize,
    x_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SymmetrizationRow>> {
    check_class(class, ens.dim)?;
    if trials == 0 {
        return invalid("trials must be positive");
    }
    let sups: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let ts = child_seed(seed, "symmetrization", k as u64);
            let v = sample_projection(class, ens, n, ts).expect("validated inputs");
            let mut rng = stream(ts, "signs", 0);
            let eps: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let plain = v.iter().map(|row| kahan_sum(row).abs()).fold(0.0, f64::max);
            let signed = v
                .iter()
                .map(|row| {
                    let s: Vec<f64> = row.iter().zip(&eps).map(|(a, e)| a * e).collect();
                    kahan_sum(&s).abs()
                })
                .fold(0.0, f64::max);
            (plain, signed)
        })
        .collect();
    let var = class.iter().map(|t| dot(t, t)).fold(0.0, f64::max);
    let tf = trials as f64;
    Ok(x_grid
        .iter()
        .map(|&x| {
            let factor = 1.0 - 4.0 * n as f64 * var / (x * x);
            let pl = sups.iter().filter(|s| s.0 > x).count() as f64 / tf;
            let ps = sups.iter().filter(|s| s.1 > x / 4.0).count() as f64 / tf;
            let lhs = factor * pl;
            let rhs = (2.0 * ps).min(1.0);
            let se = ((factor.max(0.0).powi(2) * pl * (1.0 - pl) + 4.0 * ps * (1.0 - ps)) / tf).sqrt();
            let skipped = factor <= 0.0;
            SymmetrizationRow {
                x,
                variance_factor: factor,
                lhs_probability: pl,
                lhs,
                rhs,
                joint_stderr: se,
                skipped,
                pass: skipped || lhs <= rhs + 3.0 * se,
            }
        })
        .collect())
}

/// One Monte Carlo trial of a coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub experiment: String,
    pub phase: String,
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    /// Process supremum in the normalization of the bound.
    pub sup: f64,
    /// Bound without its fitted constant.
    pub bound: f64,
    /// `sup / bound` (0 when both vanish).
    pub score: f64,
    /// `||(xi_i)||_2`, for multiplier experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_l2: Option<f64>,
    /// `(sum_{i >= j_{s0}} (xi_i^*)^{2r})^{1/2r}`, for multiplier experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_tail: Option<f64>,
}

fn score(sup: f64, bound: f64) -> f64 {
    if sup == 0.0 {
        0.0
    } else if bound > 0.0 {
        sup / bound
    } else {
        f64::INFINITY
    }
}

/// Fit-then-validate summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub target: f64,
    pub calibration_trials: usize,
    pub fresh_trials: usize,
    /// Constant fitted on calibration trials.
    pub constant: f64,
    pub covered: usize,
    pub coverage: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const Z95: f64 = 1.959963984540054;

/// Fits the constant as the split-conformal `target` quantile of calibration
/// scores and counts fresh scores at or below it.
pub fn coverage_report(calibration: &[f64], fresh: &[f64], target: f64) -> Result<CoverageReport> {
    if calibration.is_empty() || fresh.is_empty() {
        return invalid("calibration and fresh sets must be nonempty");
    }
    if !(target > 0.0 && target < 1.0) {
        return invalid(format!("coverage target must lie in (0, 1), got {target}"));
    }
    let constant = conformal_quantile(calibration, target);
    let covered = fresh.iter().filter(|&&s| s <= constant).count();
    let (lo, hi) = wilson_interval(covered, fresh.len(), Z95);
    Ok(CoverageReport {
        target,
        calibration_trials: calibration.len(),
        fresh_trials: fresh.len(),
        constant,
        covered,
        coverage: covered as f64 / fresh.len() as f64,
        wilson_low: lo,
        wilson_high: hi,
    })
}

/// Calibration and fresh trial counts, coverage target and master seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub calibration: usize,
    pub fresh: usize,
    pub target: f64,
    pub seed: u64,
}

impl Protocol {
    fn trial_seeds(&self) -> Vec<(&'static str, usize, u64)> {
        let cal = (0..self.calibration).map(|k| ("calibration", k, child_seed(self.seed, "calibration", k as u64)));
        let fresh = (0..self.fresh).map(|k| ("fresh", k, child_seed(self.seed, "fresh", k as u64)));
        cal.chain(fresh).collect()
    }
}

/// Output of a coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub report: CoverageReport,
    pub trials: Vec<TrialResult>,
    /// Named scalars needed to recompute the bound offline.
    pub diagnostics: Vec<(String, f64)>,
}

fn run_protocol<F>(name: &str, proto: &Protocol, diagnostics: Vec<(String, f64)>, trial: F) -> Result<Experiment>
where
    F: Fn(u64) -> Result<(f64, f64, Option<f64>, Option<f64>)> + Sync,
{
    let n_diag = diagnostics.iter().find(|d| d.0 == "N").map(|d| d.1 as usize).unwrap_or(0);
    let trials = proto
        .trial_seeds()
        .into_par_iter()
        .map(|(phase, index, seed)| {
            let (sup, bound, xi_l2, xi_tail) = trial(seed)?;
            Ok(TrialResult {
                experiment: name.to_string(),
                phase: phase.to_string(),
                index,
                seed,
                n: n_diag,
                sup,
                bound,
                score: score(sup, bound),
                xi_l2,
                xi_tail,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cal: Vec<f64> = trials.iter().filter(|t| t.phase == "calibration").map(|t| t.score).collect();
    let fresh: Vec<f64> = trials.iter().filter(|t| t.phase == "fresh").map(|t| t.score).collect();
    let report = coverage_report(&cal, &fresh, proto.target)?;
    Ok(Experiment { name: name.to_string(), report, trials, diagnostics })
}

/// `r = min(1/2 + q/4, 2)`.
pub fn multiplier_r(q: f64) -> f64 {
    (0.5 + q / 4.0).min(2.0)
}

fn lambda_tilde_of(class: &[Vec<f64>], ens: &EnsembleSpec, s0: usize, u: f64) -> Result<f64> {
    let lc = LinearClass::new(class.to_vec(), ens.class_ensemble()?)?;
    Ok(lambda_upper(&lc, s0, u)?.lambda_tilde)
}

/// Parameters shared by the multiplier experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierParams {
    pub s0: usize,
    pub u: f64,
    pub w: f64,
    /// Moment order used for `||xi||_{L_q}` and `r`.
    pub q: f64,
    pub n: usize,
}

/// Coverage of `sup_f |N^{-1/2} sum_i (xi_i f(X_i) - E xi f)| <= c3 w u ||xi||_{L_q} Lambda~_{s0,u}(F)`.
pub fn multiplier_theorem_experiment(
    class: &[Vec<f64>],
    ens: &EnsembleSpec,
    mult: &MultiplierSpec,
    params: &MultiplierParams,
    proto: &Protocol,
) -> Result<Experiment> {
    let MultiplierParams { s0, u, w, q, n } = *params;
    if !(q > 2.0) {
        return config(format!("multiplier moment order must exceed 2, got {q}"));
    }
    mult.validate(ens.dim)?;
    let xi_lq = match mult {
        MultiplierSpec::Independent { dist } => dist
            .abs_moment(q)
            .ok_or_else(|| Error::Config(format!("the multiplier has no finite moment of order {q}")))?,
        MultiplierSpec::Coordinate { theta } => ensemble_lq(ens, theta, q, proto.seed, n)?,
    };
    let lt = lambda_tilde_of(class, ens, s0, u)?;
    let bound = w * u * xi_lq * lt;
    let r = multiplier_r(q);
    let r1 = 2.0 * r / (r - 1.0);
    let j_s0 = cutoff_formula(1.0, u * u * 2f64.powi(s0 as i32), 2.0 * r1, r1, n);
    let diagnostics = vec![
        ("N".into(), n as f64),
        ("q".into(), q),
        ("r".into(), r),
        ("u".into(), u),
        ("w".into(), w),
        ("s0".into(), s0 as f64),
        ("xi_lq".into(), xi_lq),
        ("lambda_tilde".into(), lt),
        ("j_s0".into(), j_s0 as f64),
    ];
    run_protocol("multiplier", proto, diagnostics, |seed| {
        let d = multiplier_draw(class, ens, mult, n, seed)?;
        let tail = lp_norm(&rearrange(&d.xi)[(j_s0 - 1).min(n)..], 2.0 * r);
        Ok(((n as f64).sqrt() * d.sup, bound, Some(l2_norm(&d.xi)), Some(tail)))
    })
}

/// Coverage of `sup_f |sum_i (xi_i f(X_i) - E xi f)| <= c2 u w sqrt(N) ||xi||_psi2 Lambda~_{s0,u}(F)`
/// for a gaussian multiplier (`r = r' = 2`, `q1 = 8`).
pub fn psi2_multiplier_experiment(
    class: &[Vec<f64>],
    ens: &EnsembleSpec,
    xi: Dist,
    params: &MultiplierParams,
    proto: &Protocol,
) -> Result<Experiment> {
    let MultiplierParams { s0, u, w, n, .. } = *params;
    let grid = QGrid::geometric(64.0, &[])?;
    let d = xi;
    let prof = GradedNormProfile::analytic(move |q| d.abs_moment(q).unwrap_or(f64::INFINITY), grid)?;
    let psi2 = psi_alpha_estimate(&prof, 2.0)?;
    let lt = lambda_tilde_of(class, ens, s0, u)?;
    let bound = u * w * (n as f64).sqrt() * psi2 * lt;
    let j_s0 = cutoff_formula(1.0, u * u * 2f64.powi(s0 as i32), 8.0, 4.0, n);
    let mult = MultiplierSpec::Independent { dist: xi };
    let diagnostics = vec![
        ("N".into(), n as f64),
        ("r".into(), 2.0),
        ("q1".into(), 8.0),
        ("u".into(), u),
        ("w".into(), w),
        ("s0".into(), s0 as f64),
        ("xi_psi2".into(), psi2),
        ("lambda_tilde".into(), lt),
        ("j_s0".into(), j_s0 as f64),
    ];
    run_protocol("psi2_multiplier", proto, diagnostics, |seed| {
        let dr = multiplier_draw(class, ens, &mult, n, seed)?;
        let tail = lp_norm(&rearrange(&dr.xi)[(j_s0 - 1).min(n)..], 4.0);
        Ok((n as f64 * dr.sup, bound, Some(l2_norm(&dr.xi)), Some(tail)))
    })
}

/// `||<t, X>||_{L_q}`: exact for the gaussian ensemble, otherwise estimated
/// from an independent pilot design of `100 N` rows.
pub fn ensemble_lq(ens: &EnsembleSpec, t: &[f64], q: f64, seed: u64, n: usize) -> Result<f64> {
    if t.len() != ens.dim {
        return invalid("vector dimension does not match the ensemble");
    }
    match ens.kind {
        EnsembleKind::Gaussian => Ok(l2_norm(t) * gaussian_abs_moment(q)),
        _ => {
            let rows = 100 * n.max(1);
            let x = sample_design(ens, rows, child_seed(seed, "pilot", 0))?;
            let v: Vec<f64> = x.chunks_exact(ens.dim).map(|row| dot(row, t).abs().powf(q)).collect();
            Ok(mean(&v).powf(1.0 / q))
        }
    }
}

/// Which right-hand side the quadratic experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadraticForm {
    /// `u^2 Lambda~(F)^2 + u sqrt(N) d_q(F) Lambda~(F)` against `|sum_i (f^2 - E f^2)|`.
    General,
    /// `u^2 d_2(T) E(T) / sqrt(N) + u^4 E(T)^2 / N` against the `1/N`-normalized
    /// process, with `E(T)` the exponential mean width.
    LogConcave,
}

/// Parameters of [`quadratic_theorem_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticParams {
    pub s0: usize,
    pub u: f64,
    pub q: f64,
    pub n: usize,
    pub form: QuadraticForm,
    /// Monte Carlo samples for the mean width in the log-concave form.
    pub width_samples: usize,
}

pub fn quadratic_theorem_experiment(
    f: &[Vec<f64>],
    h: &[Vec<f64>],
    ens: &EnsembleSpec,
    params: &QuadraticParams,
    proto: &Protocol,
) -> Result<Experiment> {
    let QuadraticParams { s0, u, q, n, form, width_samples } = *params;
    check_class(f, ens.dim)?;
    check_class(h, ens.dim)?;
    let nf = n as f64;
    let (bound, mut diagnostics, normalize) = match form {
        QuadraticForm::General => {
            if !(q > 4.0) {
                return config(format!("the quadratic bound needs q > 4, got {q}"));
            }
            let lf = lambda_tilde_of(f, ens, s0, u)?;
            let lh = lambda_tilde_of(h, ens, s0, u)?;
            let dq = |class: &[Vec<f64>]| -> Result<f64> {
                Ok(class
                    .iter()
                    .map(|t| ensemble_lq(ens, t, q, proto.seed, n))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max))
            };
            let (dqf, dqh) = (dq(f)?, dq(h)?);
            let b = u * u * lf * lh + u * nf.sqrt() * (dqf * lh + dqh * lf);
            let diag = vec![
                ("lambda_tilde_f".to_string(), lf),
                ("lambda_tilde_h".to_string(), lh),
                ("d_q_f".to_string(), dqf),
                ("d_q_h".to_string(), dqh),
                ("q".to_string(), q),
            ];
            (b, diag, nf)
        }
        QuadraticForm::LogConcave => {
            if f != h {
                return config("the log-concave form applies to the quadratic process F = H only");
            }
            let (e, se) = exp_mean_width(f, width_samples.max(1), child_seed(proto.seed, "width", 0))?;
            let d2 = f.iter().map(|t| l2_norm(t)).fold(0.0, f64::max);
            let b = u * u * d2 * e / nf.sqrt() + u.powi(4) * e * e / nf;
            let diag = vec![("exp_width".to_string(), e), ("exp_width_stderr".to_string(), se), ("d_2".to_string(), d2)];
            (b, diag, 1.0)
        }
    };
    diagnostics.extend([("N".to_string(), nf), ("u".to_string(), u), ("s0".to_string(), s0 as f64)]);
    let diagonal = f == h;
    run_protocol("quadratic", proto, diagnostics, |seed| {
        let sup = if diagonal { quadratic_sup(f, ens, n, seed)? } else { product_sup(f, h, ens, n, seed)? };
        Ok((normalize * sup, bound, None, None))
    })
}

/// One class scale of the scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub scale: f64,
    pub median_sup: f64,
    pub gaussian_width: f64,
    pub lambda_tilde: f64,
    /// `median_sup / (u E||G||_{scale F})`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScaleRow>,
    pub sup_slope: f64,
    pub lambda_tilde_slope: f64,
    pub width_slope: f64,
    /// Largest `ratio`, the fitted constant.
    pub constant: f64,
}

/// Medians of `sup_f |N^{-1/2} sum_i f(X_i)|` over classes `scale * F`, each
/// scale with its own seeds, compared with `u E||G||_F`.
pub fn subgaussian_corollary_experiment(
    class: &[Vec<f64>],
    u: f64,
    n: usize,
    trials: usize,
    scales: &[f64],
    seed: u64,
) -> Result<ScalingReport> {
    if scales.len() < 2 || scales.iter().any(|s| !(*s > 0.0)) {
        return invalid("at least two positive scales are required");
    }
    let dim = class.first().map(|t| t.len()).unwrap_or(0);
    let ens = EnsembleSpec::new(EnsembleKind::Gaussian, dim)?;
    check_class(class, dim)?;
    let lc = LinearClass::new(class.to_vec(), ClassEnsemble::Gaussian)?;
    let width_seed = child_seed(seed, "width", 0);
    let s0 = crate::lambda::s0_from_ratio(gaussian_width(class, 20_000, width_seed)?.0, lc.l2_diameter());
    let mut rows = Vec::new();
    for (k, &lam) in scales.iter().enumerate() {
        let scaled: Vec<Vec<f64>> = class.iter().map(|t| t.iter().map(|x| x * lam).collect()).collect();
        let arm = child_seed(seed, "scale", k as u64);
        let sups = (0..trials)
            .into_par_iter()
            .map(|i| empirical_sup(&scaled, &ens, n, child_seed(arm, "trial", i as u64)).map(|s| s * (n as f64).sqrt()))
            .collect::<Result<Vec<_>>>()?;
        let med = median(&sups);
        let (gw, _) = gaussian_width(&scaled, 20_000, width_seed)?;
        let lt = lambda_upper(&lc.scaled(lam), s0, u)?.lambda_tilde;
        rows.push(ScaleRow { scale: lam, median_sup: med, gaussian_width: gw, lambda_tilde: lt, ratio: med / (u * gw) });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.scale.ln()).collect();
    let slope = |f: &dyn Fn(&ScaleRow) -> f64| ls_slope(&lx, &rows.iter().map(|r| f(r).ln()).collect::<Vec<_>>());
    Ok(ScalingReport {
        sup_slope: slope(&|r| r.median_sup),
        lambda_tilde_slope: slope(&|r| r.lambda_tilde),
        width_slope: slope(&|r| r.gaussian_width),
        constant: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        rows,
    })
}
