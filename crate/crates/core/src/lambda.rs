//! Graded chaining functionals `Lambda_{s0,u}` and `Lambda~_{s0,u}` for finite
//! classes of linear functionals, gaussian and exponential mean widths, and
//! the `s0` heuristic.
//!
//! Level `s` measures differences `<t - t', X>` in the graded norm of order
//! `p_s = u^2 2^s`. Per ensemble the norm is:
//!
//! | ensemble    | `||<t, X>||_(p)`                                   |
//! |-------------|----------------------------------------------------|
//! | gaussian    | `||t||_2 * max_{q <= p} ||g||_q / sqrt(q)`          |
//! | exponential | `sqrt(p) ||t||_inf + ||t||_2`                      |
//! | laplace     | `(sqrt(p) ||t||_inf + ||t||_2) / sqrt(2)`          |
//! | rademacher  | `||t||_2`                                          |
//! | empirical   | sampled graded norm, `p` saturating at the cap      |

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaining::{
    bruteforce_infimum, evaluate_chain, greedy_admissible, s_max_for, AdmissibleSequence,
    FiniteMetricSpace, PerLevelMetric,
};
use crate::dist::Dist;
use crate::error::{config, invalid, Result};
use crate::norms::{
    gaussian_graded_factor, graded_norm, graded_norm_exponential, l2_norm, GradedNormProfile,
    QGrid, ScalarSample, DEFAULT_MOMENT_CAP,
};
use crate::rng::stream;
use crate::stats::mean_stderr;

/// An `M x n` matrix of draws of the random vector `X`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Largest moment order estimated from the sample.
    #[serde(default = "default_cap")]
    pub moment_cap: f64,
}

fn default_cap() -> f64 {
    DEFAULT_MOMENT_CAP
}

impl SampleMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let m = SampleMatrix { rows, cols, data, moment_cap: DEFAULT_MOMENT_CAP };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return invalid("sample matrix needs at least one row");
        }
        if self.data.len() != self.rows * self.cols {
            return invalid("sample matrix data has the wrong length");
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return invalid("sample matrix has non-finite entries");
        }
        if !(self.moment_cap >= 2.0) {
            return invalid("moment cap must be at least 2");
        }
        Ok(())
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    /// `<t, X_k>` for every row.
    pub fn evaluate(&self, t: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|k| dot(self.row(k), t)).collect()
    }
}

/// Law of the random vector `X` the functionals are evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassEnsemble {
    Gaussian,
    Exponential,
    Laplace,
    Rademacher,
    Empirical(SampleMatrix),
}

/// `F_T = { <t, .> : t in T }` for a finite `T` in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClass {
    vectors: Vec<Vec<f64>>,
    ensemble: ClassEnsemble,
}

impl LinearClass {
    pub fn new(vectors: Vec<Vec<f64>>, ensemble: ClassEnsemble) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return invalid("a class needs at least one vector");
        };
        let n = first.len();
        if vectors.iter().any(|v| v.len() != n) {
            return invalid("all class vectors must have the same dimension");
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return invalid("class vectors must be finite");
        }
        if let ClassEnsemble::Empirical(s) = &ensemble {
            s.validate()?;
            if s.cols != n {
                return invalid(format!("sample matrix has {} columns, class dimension is {n}", s.cols));
            }
        }
        Ok(LinearClass { vectors, ensemble })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn ensemble(&self) -> &ClassEnsemble {
        &self.ensemble
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Every vector multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        LinearClass {
            vectors: self.vectors.iter().map(|v| v.iter().map(|x| x * lambda).collect()).collect(),
            ensemble: self.ensemble.clone(),
        }
    }

    /// `||<t, X>||_(p)` under the class ensemble.
    pub fn graded(&self, t: &[f64], p: f64) -> Result<f64> {
        match &self.ensemble {
            ClassEnsemble::Gaussian => Ok(l2_norm(t) * gaussian_graded_factor(p)),
            ClassEnsemble::Exponential => Ok(graded_norm_exponential(t, p)),
            ClassEnsemble::Laplace => Ok(graded_norm_exponential(t, p) / std::f64::consts::SQRT_2),
            ClassEnsemble::Rademacher => Ok(l2_norm(t)),
            ClassEnsemble::Empirical(s) => {
                let p = p.min(s.moment_cap);
                let vals = s.evaluate(t);
                if vals.iter().all(|&v| v == 0.0) {
                    return Ok(0.0);
                }
                let grid = QGrid::geometric(p.max(2.0), &[])?;
                let prof = GradedNormProfile::from_sample_capped(ScalarSample::new(vals)?, grid, s.moment_cap)?;
                graded_norm(&prof, p)
            }
        }
    }

    /// `||<t, X>||_{L_2}`; the isotropic ensembles give `||t||_2`.
    pub fn l2(&self, t: &[f64]) -> f64 {
        match &self.ensemble {
            ClassEnsemble::Empirical(s) => {
                let v = s.evaluate(t);
                (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
            }
            _ => l2_norm(t),
        }
    }

    /// `sup_f ||f||_{L_2}`.
    pub fn l2_diameter(&self) -> f64 {
        self.vectors.iter().map(|t| self.l2(t)).fold(0.0, f64::max)
    }

    /// Distance matrices `||<t_i - t_j, X>||_(u^2 2^s)` for `s = 0..=levels`.
    pub fn level_metric(&self, u: f64, levels: usize) -> Result<PerLevelMetric> {
        if !(u >= 1.0) {
            return config(format!("u must be at least 1, got {u}"));
        }
        let spaces = (0..=levels)
            .map(|s| {
                let p = scale_order(u, s);
                let mut err = None;
                let sp = FiniteMetricSpace::from_points(&self.vectors, |a, b| {
                    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                    self.graded(&diff, p).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
                });
                match err {
                    Some(e) => Err(e),
                    None => sp,
                }
            })
            .collect::<Result<Vec<_>>>()?;
        PerLevelMetric::new(spaces)
    }
}

/// `u^2 2^s`, the graded-norm order used at level `s`.
pub fn scale_order(u: f64, s: usize) -> f64 {
    u * u * 2f64.powi(s as i32)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Output of [`lambda_upper`].
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaValue {
    pub lambda: f64,
    pub lambda_tilde: f64,
    /// `sup_f ||pi_{s0} f||_(u^2 2^{s0})`.
    pub start_norm: f64,
    pub sequence: AdmissibleSequence,
    pub s0_beyond_levels: bool,
}

/// Greedy upper bound on `Lambda_{s0,u}` together with `Lambda~_{s0,u}`
/// evaluated on the same sequence.
pub fn lambda_upper(class: &LinearClass, s0: usize, u: f64) -> Result<LambdaValue> {
    let s_max = s_max_for(class.len());
    let metric = class.level_metric(u, s_max.max(s0))?;
    let sequence = greedy_admissible(&metric);
    let chain = evaluate_chain(&metric, &sequence, 2.0, s0);
    let p0 = scale_order(u, s0);
    let mut start_norm = 0.0f64;
    for t in 0..class.len() {
        let c = sequence.pi(s0, t);
        start_norm = start_norm.max(class.graded(&class.vectors[c], p0)?);
    }
    let lambda_tilde = chain.value + 2f64.powf(s0 as f64 / 2.0) * start_norm;
    Ok(LambdaValue {
        lambda: chain.value,
        lambda_tilde,
        start_norm,
        sequence,
        s0_beyond_levels: chain.s0_beyond_levels,
    })
}

pub fn lambda_tilde(class: &LinearClass, s0: usize, u: f64) -> Result<f64> {
    Ok(lambda_upper(class, s0, u)?.lambda_tilde)
}

/// Exact `Lambda_{s0,u}` by enumeration; at most six vectors.
pub fn lambda_bruteforce(class: &LinearClass, s0: usize, u: f64) -> Result<f64> {
    let metric = class.level_metric(u, s_max_for(class.len()))?;
    bruteforce_infimum(&metric, 2.0, s0)
}

fn mc_width(t: &[Vec<f64>], mc_samples: usize, seed: u64, tag: &str, dist: Dist) -> Result<(f64, f64)> {
    if t.is_empty() {
        return invalid("index set must be nonempty");
    }
    if mc_samples == 0 {
        return invalid("at least one Monte Carlo sample is required");
    }
    let n = t[0].len();
    let sampler = dist.sampler();
    // Replica k always uses stream k, and `collect` keeps replica order, so
    // the compensated sum below is independent of the thread schedule.
    let sups: Vec<f64> = (0..mc_samples)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |x, k| {
                let mut rng = stream(seed, tag, k as u64);
                sampler.fill(&mut rng, x);
                t.iter().map(|v| dot(v, x)).fold(f64::NEG_INFINITY, f64::max)
            },
        )
        .collect();
    Ok(mean_stderr(&sups))
}

/// Monte Carlo `E sup_{t in T} <t, G>` with standard gaussian `G`, returning
/// `(estimate, stderr)`.
pub fn gaussian_width(t: &[Vec<f64>], mc_samples: usize, seed: u64) -> Result<(f64, f64)> {
    mc_width(t, mc_samples, seed, "gaussian-width", Dist::gaussian())
}

/// Monte Carlo `E sup_{t in T} <t, Y>` with `Y` a vector of independent
/// standard exponentials.
pub fn exp_mean_width(t: &[Vec<f64>], mc_samples: usize, seed: u64) -> Result<(f64, f64)> {
    mc_width(t, mc_samples, seed, "exp-width", Dist::exponential())
}

/// Largest `s0 >= 0` with `E sup G_f >= 2^{s0/2} sup_f ||f||_{L_2}`, or 0.
pub fn s0_heuristic(class: &LinearClass, mc_samples: usize, seed: u64) -> Result<usize> {
    let (width, _) = gaussian_width(class.vectors(), mc_samples, seed)?;
    Ok(s0_from_ratio(width, class.l2_diameter()))
}

/// Largest `s >= 0` with `width >= 2^{s/2} diameter`, or 0.
pub fn s0_from_ratio(width: f64, diameter: f64) -> usize {
    if !(diameter > 0.0) || !(width >= diameter) {
        return 0;
    }
    let mut s = 0;
    while s < 128 && width >= 2f64.powf((s + 1) as f64 / 2.0) * diameter {
        s += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaining::gamma_bruteforce;
    use proptest::prelude::*;

    fn exp_class(vs: Vec<Vec<f64>>) -> LinearClass {
        LinearClass::new(vs, ClassEnsemble::Exponential).unwrap()
    }

    #[test]
    fn singleton_class() {
        let c = exp_class(vec![vec![1.0, -2.0]]);
        let v = lambda_upper(&c, 1, 2.0).unwrap();
        assert_eq!(v.lambda, 0.0);
        // 2^{1/2} (sqrt(8) * 2 + sqrt(5))
        let expect = 2f64.sqrt() * (8f64.sqrt() * 2.0 + 5f64.sqrt());
        assert!((v.lambda_tilde - expect).abs() < 1e-12);
        assert_eq!(lambda_bruteforce(&c, 0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn two_point_exponential_class() {
        // {0, t}: only level 0 contributes, with p = u^2.
        let t = vec![0.5, -1.5, 1.0];
        let c = exp_class(vec![vec![0.0; 3], t.clone()]);
        let u = 3.0;
        let one_term = u * 1.5 + l2_norm(&t);
        let v = lambda_upper(&c, 0, u).unwrap();
        assert!((v.lambda - one_term).abs() < 1e-12);
        assert!((lambda_bruteforce(&c, 0, u).unwrap() - one_term).abs() < 1e-12);
        // s0 = 1 is already the last level
        assert_eq!(lambda_upper(&c, 1, u).unwrap().lambda, 0.0);
    }

    #[test]
    fn max_of_two_gaussians() {
        let t = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (est, se) = gaussian_width(&t, 200_000, 11).unwrap();
        let exact = 1.0 / std::f64::consts::PI.sqrt();
        assert!((est - exact).abs() < 3.0 * se, "{est} +- {se}");
    }

    #[test]
    fn widths_of_trivial_sets() {
        let zero = vec![vec![0.0; 3]];
        assert_eq!(gaussian_width(&zero, 100, 1).unwrap().0, 0.0);
        assert_eq!(exp_mean_width(&zero, 100, 1).unwrap().0, 0.0);
        let (est, se) = exp_mean_width(&[vec![1.0, 0.0]], 100_000, 2).unwrap();
        assert!((est - 1.0).abs() < 3.0 * se);
    }

    #[test]
    fn widths_are_deterministic() {
        let t = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        assert_eq!(gaussian_width(&t, 5000, 9).unwrap(), gaussian_width(&t, 5000, 9).unwrap());
    }

    #[test]
    fn s0_heuristic_cases() {
        assert_eq!(s0_from_ratio(0.5, 1.0), 0);
        assert_eq!(s0_from_ratio(1.0, 1.0), 0);
        assert_eq!(s0_from_ratio(2.0, 1.0), 2);
        assert_eq!(s0_from_ratio(2.9, 1.0), 3);
        let single = LinearClass::new(vec![vec![1.0, 1.0]], ClassEnsemble::Gaussian).unwrap();
        assert_eq!(s0_heuristic(&single, 1000, 3).unwrap(), 0);
    }

    #[test]
    fn empirical_class_uses_sample_moments() {
        // Rademacher-like sample: every graded norm of e_1 is 1.
        let data: Vec<f64> = (0..8).flat_map(|k| [if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0]).collect();
        let s = SampleMatrix::new(8, 2, data).unwrap();
        let c = LinearClass::new(vec![vec![1.0, 0.0]], ClassEnsemble::Empirical(s)).unwrap();
        assert!((c.graded(&[1.0, 0.0], 500.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(c.graded(&[0.0, 3.0], 4.0).unwrap(), 0.0);
    }

    fn arb_vectors(max_m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 1..=max_m)
    }

    proptest! {
        #[test]
        fn upper_dominates_bruteforce(vs in arb_vectors(6), s0 in 0usize..3) {
            let c = exp_class(vs);
            let up = lambda_upper(&c, s0, 2.0).unwrap();
            let bf = lambda_bruteforce(&c, s0, 2.0).unwrap();
            prop_assert!(up.lambda >= bf - 1e-12);
            prop_assert!(up.lambda_tilde >= up.lambda);
        }

        #[test]
        fn exact_linear_scaling(vs in arb_vectors(20), k in 1u32..4) {
            let lambda = 2f64.powi(k as i32);
            let c = exp_class(vs);
            let a = lambda_upper(&c, 0, 2.0).unwrap();
            let b = lambda_upper(&c.scaled(lambda), 0, 2.0).unwrap();
            prop_assert_eq!(b.lambda, lambda * a.lambda);
            prop_assert_eq!(b.lambda_tilde, lambda * a.lambda_tilde);
        }

        #[test]
        fn l2_evaluation_is_dominated(vs in arb_vectors(20), which in 0usize..4) {
            let ens = [ClassEnsemble::Gaussian, ClassEnsemble::Exponential, ClassEnsemble::Laplace, ClassEnsemble::Rademacher][which].clone();
            let c = LinearClass::new(vs, ens).unwrap();
            let lam = lambda_upper(&c, 0, 2.0).unwrap();
            let l2 = FiniteMetricSpace::from_points(c.vectors(), |a, b| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                l2_norm(&d) / std::f64::consts::SQRT_2
            }).unwrap();
            let g = evaluate_chain(&l2, &lam.sequence, 2.0, 0).value;
            prop_assert!(g <= lam.lambda + 1e-12);
        }

        #[test]
        fn gaussian_lambda_tracks_gamma(vs in arb_vectors(6)) {
            let c = LinearClass::new(vs, ClassEnsemble::Gaussian).unwrap();
            let lam = lambda_bruteforce(&c, 0, 2.0).unwrap();
            let sp = FiniteMetricSpace::from_points(c.vectors(), |a, b| {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                l2_norm(&d)
            }).unwrap();
            let gam = gamma_bruteforce(&sp, 2.0, 0).unwrap();
            prop_assert!(lam <= 4.0 * gam + 1e-12);
            prop_assert!(gam <= 4.0 * lam + 1e-12);
        }
    }
}
