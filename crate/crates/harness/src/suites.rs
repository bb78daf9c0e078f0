//! Verification suites, one per acceptance criterion.
//!
//! Each suite is a deterministic function of a master seed and returns a
//! [`Verdict`]. Suites 1-3 check proved inequalities and oracle agreement
//! exactly; the rest are Monte Carlo checks at fixed seeds.

use std::fmt;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use chainbound::chaining::{gamma_bruteforce, gamma_upper, FiniteMetricSpace};
use chainbound::dist::{Dist, DistKind};
use chainbound::lambda::{exp_mean_width, lambda_bruteforce, lambda_upper, ClassEnsemble, LinearClass};
use chainbound::norms::{gk_moment, l2_norm, mc_linear_form_lq};
use chainbound::orderstats::{
    decay_slope, decomposition_bases, decomposition_statistics, latala_rhs, latala_sum_norms, tail_check, TailParams,
};
use chainbound::processes::{
    exhaustive_bernoulli_law, mc_bernoulli_quantiles, EnsembleKind, EnsembleSpec,
};
use chainbound::projection::{
    check_assumption_a, check_assumption_b, ell2_radius_bound, holder_split, BaseSeminorm, ProjectedClass, CHECK_RTOL,
};
use chainbound::rng::{child_seed, stream};
use chainbound::stats::median;

use crate::classes::{gaussian_class, random_polytope};
use crate::experiments::{preset, simulate, symmetrization_rows};
use crate::HarnessError;

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Criteria checked by `verify --suite deterministic`.
pub const DETERMINISTIC: &[u8] = &[1, 2, 3];
pub const ALL: &[u8] = &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Verdict {
    pub fn new(id: u8, name: &str, pass: bool, detail: String) -> Self {
        Verdict { id, name: name.to_string(), pass, detail, seconds: 0.0 }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {} ({:.1}s): {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

pub fn name_of(id: u8) -> &'static str {
    match id {
        1 => "deterministic-inequalities",
        2 => "chaining-oracle",
        3 => "lambda-oracle",
        4 => "moment-brackets",
        5 => "exhaustive-bernoulli",
        6 => "order-statistics-tails",
        7 => "coverage",
        8 => "scaling-laws",
        9 => "exp-control-boundedness",
        10 => "symmetrization",
        11 => "reproducibility",
        _ => "unknown",
    }
}

/// Runs criterion `id`; errors become failing verdicts.
pub fn run(id: u8, seed: u64) -> Verdict {
    let start = Instant::now();
    let result = match id {
        1 => deterministic_inequalities(seed),
        2 => chaining_oracle(seed),
        3 => lambda_oracle(seed),
        4 => moment_brackets(seed),
        5 => exhaustive_bernoulli(seed),
        6 => order_statistics_tails(seed),
        7 => coverage(seed),
        8 => scaling_laws(seed),
        9 => exp_control(seed),
        10 => symmetrization(seed),
        11 => reproducibility(seed),
        _ => Err(HarnessError::Config(format!("no criterion {id}"))),
    };
    let (pass, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Verdict { id, name: name_of(id).to_string(), pass, detail, seconds: start.elapsed().as_secs_f64() }
}

type Outcome = Result<(bool, String), HarnessError>;

fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let s = Dist::gaussian().sampler();
    (0..n).map(|_| s.sample(rng)).collect()
}

/// Gaussian entries with about a third of them zeroed and some repeated
/// magnitudes, so ties and empty tails are exercised.
fn rough_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v = gaussian_vec(rng, n);
    for x in v.iter_mut() {
        match rng.random_range(0..6) {
            0 | 1 => *x = 0.0,
            2 => *x = x.signum(),
            _ => {}
        }
    }
    v
}

fn le(a: f64, b: f64) -> bool {
    a <= b * (1.0 + CHECK_RTOL) + 1e-300
}

fn deterministic_inequalities(seed: u64) -> Outcome {
    let mut rng = stream(seed, "holder", 0);
    let mut holder_bad = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=40);
        let w = rough_vec(&mut rng, n);
        let v = rough_vec(&mut rng, n);
        let k = rng.random_range(0..=n);
        let r = [4.0 / 3.0, 2.0, 4.0][rng.random_range(0..3)];
        let h = holder_split(&w, &v, k, r)?;
        if !le(h.head_exact, h.head_bound) || !le(h.tail_exact, h.tail_bound) {
            holder_bad += 1;
        }
    }
    let instances: Vec<u64> = (0..1000).collect();
    let results: Vec<Result<(bool, bool), HarnessError>> = instances
        .par_iter()
        .map(|&k| {
            let mut rng = stream(seed, "radius", k);
            let m = rng.random_range(1..=8);
            let n = rng.random_range(1..=24);
            let vs: Vec<Vec<f64>> = (0..m).map(|_| rough_vec(&mut rng, n)).collect();
            let s0 = rng.random_range(0..3);
            let js: Vec<usize> = (0..4).map(|_| rng.random_range(1..=n + 1)).collect();
            let base = if rng.random::<bool>() { BaseSeminorm::NormalizedL2L4 } else { BaseSeminorm::Sup };
            let pc = ProjectedClass::greedy_equality(vs, s0, &js, base)?;
            let radius = ell2_radius_bound(&pc).pass;
            let assumptions =
                check_assumption_a(&pc, 1.0).pass && check_assumption_a(&pc, 2.0).pass && check_assumption_b(&pc).pass;
            Ok((radius, assumptions))
        })
        .collect();
    let mut radius_bad = 0;
    let mut assumption_bad = 0;
    for r in results {
        let (a, b) = r?;
        radius_bad += usize::from(!a);
        assumption_bad += usize::from(!b);
    }
    let pass = holder_bad == 0 && radius_bad == 0 && assumption_bad == 0;
    Ok((
        pass,
        format!(
            "holder violations {holder_bad}/10000, radius violations {radius_bad}/1000, assumption rejections {assumption_bad}"
        ),
    ))
}

fn random_space<R: Rng>(rng: &mut R, m: usize) -> Result<FiniteMetricSpace, HarnessError> {
    let dim = rng.random_range(1..=3);
    let pts: Vec<Vec<f64>> = (0..m).map(|_| gaussian_vec(rng, dim)).collect();
    Ok(FiniteMetricSpace::from_points(&pts, |a, b| l2_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()))?)
}

fn chaining_oracle(seed: u64) -> Outcome {
    let mut rng = stream(seed, "chaining-oracle", 0);
    let mut worst_small = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(1..=3);
        let sp = random_space(&mut rng, m)?;
        let s0 = rng.random_range(0..3);
        let up = gamma_upper(&sp, 2.0, s0);
        let bf = gamma_bruteforce(&sp, 2.0, s0)?;
        worst_small = worst_small.max((up - bf).abs() / bf.max(1.0));
    }
    let mut dominance_bad = 0;
    for _ in 0..100 {
        let sp = random_space(&mut rng, 5)?;
        let s0 = rng.random_range(0..3);
        if gamma_upper(&sp, 2.0, s0) < gamma_bruteforce(&sp, 2.0, s0)? * (1.0 - 1e-12) {
            dominance_bad += 1;
        }
    }
    let mut two_point_bad = 0;
    for _ in 0..100 {
        let d = rng.random_range(0.0..100.0) * 10f64.powi(rng.random_range(-6..6));
        let sp = FiniteMetricSpace::from_rows(&[vec![0.0, d], vec![d, 0.0]])?;
        if gamma_upper(&sp, 2.0, 0) != d || gamma_bruteforce(&sp, 2.0, 0)? != d {
            two_point_bad += 1;
        }
    }
    let pass = worst_small <= 1e-12 && dominance_bad == 0 && two_point_bad == 0;
    Ok((
        pass,
        format!(
            "max |upper - brute| on <=3 points {worst_small:.2e}, 5-point dominance failures {dominance_bad}/100, 2-point mismatches {two_point_bad}/100"
        ),
    ))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn lambda_oracle(seed: u64) -> Outcome {
    let results: Vec<Result<(bool, bool, f64), HarnessError>> = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, "lambda-oracle", k);
            let dim = rng.random_range(1..=6);
            let vs: Vec<Vec<f64>> = (0..5).map(|_| rough_vec(&mut rng, dim)).collect();
            let class = LinearClass::new(vs, ClassEnsemble::Exponential)?;
            let s0 = rng.random_range(0..2);
            let u = 4.0;
            let up = lambda_upper(&class, s0, u)?;
            let bf = lambda_bruteforce(&class, s0, u)?;
            let dominates = up.lambda >= bf * (1.0 - 1e-12);
            let mut linear = true;
            for lam in [2.0, 10.0] {
                let sc = class.scaled(lam);
                let up2 = lambda_upper(&sc, s0, u)?;
                let bf2 = lambda_bruteforce(&sc, s0, u)?;
                linear &= rel_close(up2.lambda, lam * up.lambda, 1e-12)
                    && rel_close(up2.lambda_tilde, lam * up.lambda_tilde, 1e-12)
                    && rel_close(bf2, lam * bf, 1e-12);
            }
            Ok((dominates, linear, up.lambda / bf.max(f64::MIN_POSITIVE)))
        })
        .collect();
    let mut dom_bad = 0;
    let mut lin_bad = 0;
    let mut worst_ratio = 1.0f64;
    for r in results {
        let (d, l, ratio) = r?;
        dom_bad += usize::from(!d);
        lin_bad += usize::from(!l);
        if ratio.is_finite() {
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    Ok((
        dom_bad == 0 && lin_bad == 0,
        format!("dominance failures {dom_bad}/50, scaling failures {lin_bad}/50, max upper/brute {worst_ratio:.3}"),
    ))
}

fn moment_brackets(seed: u64) -> Outcome {
    let ps = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let (mut gk_lo, mut gk_hi) = (f64::INFINITY, 0.0f64);
    for (k, n) in [2usize, 8, 32].into_iter().enumerate() {
        let mut rng = stream(seed, "gk-directions", k as u64);
        let ts: Vec<Vec<f64>> = (0..20).map(|_| gaussian_vec(&mut rng, n)).collect();
        let emp = mc_linear_form_lq(&ts, &Dist::exponential(), &ps, 1_000_000, child_seed(seed, "gk", k as u64))?;
        for (t, row) in ts.iter().zip(&emp) {
            for (p, e) in ps.iter().zip(row) {
                let ratio = gk_moment(t, *p) / e;
                gk_lo = gk_lo.min(ratio);
                gk_hi = gk_hi.max(ratio);
            }
        }
    }
    let (mut la_lo, mut la_hi) = (f64::INFINITY, 0.0f64);
    let rs_all = [1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    for (k, kind) in [DistKind::ExponentialSquared, DistKind::GaussianSquared, DistKind::Pareto { tail: 5.0 }]
        .into_iter()
        .enumerate()
    {
        let dist = Dist::new(kind)?;
        let rs: Vec<f64> = rs_all.iter().copied().filter(|&r| dist.abs_moment(r).is_some()).collect();
        for (j, m) in [1usize, 2, 4, 8, 16, 32, 64].into_iter().enumerate() {
            let mc = latala_sum_norms(&dist, m, &rs, 200_000, child_seed(seed, "latala", (k * 16 + j) as u64))?;
            for (r, e) in rs.iter().zip(mc) {
                let rhs = latala_rhs(m, *r, |s| dist.abs_moment(s).unwrap_or(f64::INFINITY))?;
                let ratio = e / rhs;
                la_lo = la_lo.min(ratio);
                la_hi = la_hi.max(ratio);
            }
        }
    }
    let inside = |lo: f64, hi: f64| lo >= 0.125 && hi <= 8.0;
    Ok((
        inside(gk_lo, gk_hi) && inside(la_lo, la_hi),
        format!("Gluskin-Kwapien ratio in [{gk_lo:.3}, {gk_hi:.3}], Latala ratio in [{la_lo:.3}, {la_hi:.3}]"),
    ))
}

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489004;

fn exhaustive_bernoulli(seed: u64) -> Outcome {
    let levels = [0.5, 0.9, 0.99];
    let draws = 100_000;
    let mut misses = Vec::new();
    for k in 0..10u64 {
        let mut rng = stream(seed, "bernoulli-instance", k);
        let m = rng.random_range(1..=6);
        let vs: Vec<Vec<f64>> = (0..m).map(|_| gaussian_vec(&mut rng, 10)).collect();
        let z = gaussian_vec(&mut rng, 10);
        let law = exhaustive_bernoulli_law(&vs, &z)?;
        let qs = mc_bernoulli_quantiles(&vs, &z, draws, &levels, child_seed(seed, "bernoulli-mc", k));
        for (a, q) in levels.iter().zip(qs) {
            let delta = Z99 * (a * (1.0 - a) / draws as f64).sqrt();
            if law.cdf(q) < a - delta || law.cdf_below(q) > a + delta {
                misses.push(format!("instance {k} level {a}"));
            }
        }
    }
    Ok((misses.is_empty(), format!("{} of 30 quantiles outside their band {:?}", misses.len(), misses)))
}

fn order_statistics_tails(seed: u64) -> Outcome {
    let dist = Dist::new(DistKind::SymmetricPareto { tail: 5.0 })?.standardized()?;
    let params = TailParams::new(4.0, 2.0, 8.0)?;
    let n = 1 << 10;
    let cal = decomposition_statistics(&dist, &params, n, 2_000, seed, "tail-calibration")?;
    let (_, tail_base) = decomposition_bases(&dist, &params, n)?;
    let med = median(&cal.iter().map(|s| s.1).collect::<Vec<_>>());
    // c1 puts the t = 2 threshold at the calibration median.
    let c1 = med / (2.0 * tail_base);
    let grid: Vec<f64> = (0..25).map(|k| 2.0 * 4f64.powf(k as f64 / 24.0)).collect();
    let rows = tail_check(&dist, &params, n, 10_000, &grid, c1, seed)?;
    let tail_rows: Vec<_> = rows.iter().filter(|r| r.bound_name == "tail_lr").cloned().collect();
    let monotone = ["head_l2", "tail_lr"].iter().all(|name| {
        let f: Vec<f64> = rows.iter().filter(|r| r.bound_name == *name).map(|r| r.frequency).collect();
        f.windows(2).all(|w| w[1] <= w[0])
    });
    let slope = decay_slope(&tail_rows);
    let threshold = -0.7 * 5.0;
    let pass = monotone && slope.is_some_and(|s| s <= threshold);
    let observed = tail_rows.iter().filter(|r| r.exceedances > 0).count();
    Ok((
        pass,
        format!(
            "c1 {c1:.4}, tail slope {:?} (need <= {threshold}), {observed} of 25 grid points observed, monotone {monotone}",
            slope
        ),
    ))
}

fn coverage(seed: u64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, name) in ["multiplier", "multiplier_coordinate", "quadratic", "quadratic_log_concave", "psi2_multiplier"]
        .into_iter()
        .enumerate()
    {
        let mut cfg = preset(name);
        cfg.seed = Some(child_seed(seed, "coverage", k as u64));
        let sim = simulate(&cfg)?;
        for v in &sim.record.verdicts {
            pass &= v.pass;
            parts.push(format!("{}: {}", name, v.detail));
        }
    }
    Ok((pass, parts.join("; ")))
}

fn scaling_laws(seed: u64) -> Outcome {
    let mut cfg = preset("subgaussian_scaling");
    cfg.seed = Some(child_seed(seed, "scaling", 0));
    let sim = simulate(&cfg)?;
    let v = &sim.record.verdicts[0];
    Ok((v.pass, v.detail.clone()))
}

fn exp_control(seed: u64) -> Outcome {
    let u = 4.0;
    let ratios = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let t = random_polytope(32, 16, child_seed(seed, "polytope", k));
            let class = LinearClass::new(t.clone(), ClassEnsemble::Exponential)?;
            let lt = lambda_upper(&class, 0, u)?.lambda_tilde;
            let (e, _) = exp_mean_width(&t, 20_000, child_seed(seed, "polytope-width", k))?;
            Ok(lt / (u * e))
        })
        .collect::<Result<Vec<f64>, HarnessError>>()?;
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((hi / lo <= 20.0, format!("C = {hi:.4}, ratio range [{lo:.4}, {hi:.4}], spread {:.3}", hi / lo)))
}

fn symmetrization(seed: u64) -> Outcome {
    let ens = EnsembleSpec::new(EnsembleKind::Gaussian, 8)?;
    let class = gaussian_class(16, 8, child_seed(seed, "symmetrization-class", 0));
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [64usize, 256] {
        let (_, rows) = symmetrization_rows(&class, &ens, n, 10_000, child_seed(seed, "symmetrization", n as u64))?;
        let checked = rows.iter().filter(|r| !r.skipped).count();
        let violated = rows.iter().filter(|r| !r.pass).count();
        pass &= violated == 0;
        parts.push(format!("N={n}: {violated} violated of {checked} checked rows"));
    }
    Ok((pass, parts.join(", ")))
}

/// Serializes a small `simulate` run twice and compares the bytes.
fn reproducibility(seed: u64) -> Outcome {
    let mut cfg = preset("multiplier");
    cfg.seed = Some(seed);
    cfg.trials = 25;
    let render = |c: &crate::config::ExperimentConfig| -> Result<Vec<u8>, HarnessError> {
        let sim = simulate(c)?;
        let mut out = Vec::new();
        for line in &sim.lines {
            out.extend(serde_json::to_vec(line)?);
            out.push(b'\n');
        }
        Ok(out)
    };
    let a = render(&cfg)?;
    let b = render(&cfg)?;
    Ok((a == b, format!("{} bytes, identical {}", a.len(), a == b)))
}
