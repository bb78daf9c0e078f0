//! Moment norms of scalar random variables.
//!
//! Everything here works from either a sample (empirical `L_q` norms) or an
//! analytic moment function. The graded norm
//!
//! ```text
//! ||Z||_(p) = sup_{1 <= q <= p} ||Z||_{L_q} / sqrt(q)
//! ```
//!
//! is approximated by a maximum over a geometric q-grid (ratio at most 1.1)
//! that always contains 1, 2 and the requested order `p`. The `psi_alpha`
//! estimate uses the moment characterisation `sup_q ||Z||_{L_q} / q^{1/alpha}`,
//! which is equivalent to the Orlicz norm only up to absolute constants.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dist::Dist;
use crate::error::{config, invalid, Error, Result};
use crate::rng::stream;
use crate::stats::kahan_sum;

/// Largest moment order the empirical estimator accepts unless told otherwise.
pub const DEFAULT_MOMENT_CAP: f64 = 64.0;

/// Default ratio between consecutive grid points.
pub const GRID_RATIO: f64 = 1.1;

/// `N >= 1` finite draws of one scalar random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSample {
    values: Vec<f64>,
}

impl ScalarSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("sample must contain at least one value");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample entry {i} is not finite"));
        }
        Ok(ScalarSample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Empirical `((1/N) sum |x_i|^q)^{1/q}` with the default cap on `q`.
pub fn empirical_lq(sample: &ScalarSample, q: f64) -> Result<f64> {
    empirical_lq_capped(sample, q, DEFAULT_MOMENT_CAP)
}

/// Empirical `L_q` norm refusing `q > cap`.
///
/// The sum is computed on values rescaled by the largest magnitude, so large
/// `q` does not overflow unless the result itself is out of range.
pub fn empirical_lq_capped(sample: &ScalarSample, q: f64, cap: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return invalid(format!("moment order must be >= 1, got {q}"));
    }
    if q > cap {
        return config(format!("moment order {q} exceeds the empirical cap {cap}"));
    }
    let m = sample.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    let n = sample.len() as f64;
    let acc: f64 = sample.values.iter().map(|v| (v.abs() / m).powf(q)).sum();
    let out = m * (acc / n).powf(1.0 / q);
    if !out.is_finite() {
        return Err(Error::Range(format!("L_{q} norm is not finite")));
    }
    Ok(out)
}

/// Ordered list of moment orders in `[1, p_max]`, containing 1 and 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    qs: Vec<f64>,
}

impl QGrid {
    /// Geometric grid with ratio [`GRID_RATIO`] on `[1, p_max]`, plus 1, 2,
    /// `p_max` and any `extra` points inside the range.
    pub fn geometric(p_max: f64, extra: &[f64]) -> Result<Self> {
        Self::geometric_with_ratio(p_max, GRID_RATIO, extra)
    }

    pub fn geometric_with_ratio(p_max: f64, ratio: f64, extra: &[f64]) -> Result<Self> {
        if !(p_max >= 2.0) || !p_max.is_finite() {
            return invalid(format!("grid needs finite p_max >= 2, got {p_max}"));
        }
        if !(ratio > 1.0 && ratio <= GRID_RATIO) {
            return invalid(format!("grid ratio must lie in (1, {GRID_RATIO}], got {ratio}"));
        }
        let mut qs = vec![1.0, 2.0, p_max];
        let mut q = 1.0;
        while q < p_max {
            qs.push(q);
            q *= ratio;
        }
        qs.extend(extra.iter().copied().filter(|&e| (1.0..=p_max).contains(&e)));
        Self::from_points(qs)
    }

    /// Builds a grid from arbitrary points; sorts and deduplicates.
    pub fn from_points(mut qs: Vec<f64>) -> Result<Self> {
        if qs.iter().any(|q| !q.is_finite() || *q < 1.0) {
            return invalid("grid points must be finite and >= 1");
        }
        qs.sort_by(f64::total_cmp);
        qs.dedup();
        if qs.first() != Some(&1.0) || !qs.contains(&2.0) {
            return invalid("grid must contain 1 and 2");
        }
        Ok(QGrid { qs })
    }

    pub fn points(&self) -> &[f64] {
        &self.qs
    }

    pub fn p_max(&self) -> f64 {
        *self.qs.last().expect("grid is non-empty")
    }
}

/// Where the `L_q` values of a profile come from.
#[derive(Clone)]
pub enum MomentSource {
    /// Empirical norms of a retained sample, with the given cap on `q`.
    Sample { sample: ScalarSample, cap: f64 },
    /// An exact moment function `q -> ||Z||_{L_q}`.
    Analytic(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for MomentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentSource::Sample { sample, cap } => f
                .debug_struct("Sample")
                .field("len", &sample.len())
                .field("cap", cap)
                .finish(),
            MomentSource::Analytic(_) => f.write_str("Analytic(..)"),
        }
    }
}

impl MomentSource {
    fn lq(&self, q: f64) -> Result<f64> {
        match self {
            MomentSource::Sample { sample, cap } => empirical_lq_capped(sample, q, *cap),
            MomentSource::Analytic(f) => {
                let v = f(q);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Range(format!("analytic L_{q} norm is {v}")));
                }
                Ok(v)
            }
        }
    }
}

/// `L_q` values of one random variable on a q-grid.
#[derive(Debug, Clone)]
pub struct GradedNormProfile {
    grid: QGrid,
    lq: Vec<f64>,
    source: MomentSource,
}

impl GradedNormProfile {
    pub fn from_sample(sample: ScalarSample, grid: QGrid) -> Result<Self> {
        Self::build(MomentSource::Sample { sample, cap: DEFAULT_MOMENT_CAP }, grid)
    }

    pub fn from_sample_capped(sample: ScalarSample, grid: QGrid, cap: f64) -> Result<Self> {
        Self::build(MomentSource::Sample { sample, cap }, grid)
    }

    pub fn analytic<F>(moment: F, grid: QGrid) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(MomentSource::Analytic(Arc::new(moment)), grid)
    }

    fn build(source: MomentSource, grid: QGrid) -> Result<Self> {
        let lq = grid.points().iter().map(|&q| source.lq(q)).collect::<Result<Vec<_>>>()?;
        Ok(GradedNormProfile { grid, lq, source })
    }

    pub fn grid(&self) -> &QGrid {
        &self.grid
    }

    /// `(q, ||Z||_{L_q})` pairs on the grid.
    pub fn values(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().iter().copied().zip(self.lq.iter().copied())
    }

    pub fn lq_at(&self, q: f64) -> Result<f64> {
        match self.grid.points().iter().position(|&g| g == q) {
            Some(i) => Ok(self.lq[i]),
            None => self.source.lq(q),
        }
    }
}

/// `||Z||_(p)`: maximum of `L_q / sqrt(q)` over grid points `q <= p` and `q = p`.
pub fn graded_norm(profile: &GradedNormProfile, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("graded norm order must be >= 1, got {p}"));
    }
    if p > profile.grid.p_max() {
        return config(format!(
            "order {p} exceeds the grid coverage {}",
            profile.grid.p_max()
        ));
    }
    let mut best = profile.lq_at(p)? / p.sqrt();
    for (q, l) in profile.values().take_while(|(q, _)| *q <= p) {
        best = best.max(l / q.sqrt());
    }
    Ok(best)
}

/// `sup_q ||Z||_{L_q} / q^{1/alpha}` over the whole grid; needs `p_max >= 16`.
pub fn psi_alpha_estimate(profile: &GradedNormProfile, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return invalid(format!("alpha must be >= 1, got {alpha}"));
    }
    if profile.grid.p_max() < 16.0 {
        return config("psi_alpha estimate needs a grid reaching at least q = 16");
    }
    Ok(profile.values().fold(0.0f64, |best, (q, l)| best.max(l / q.powf(1.0 / alpha))))
}

pub fn l2_norm(t: &[f64]) -> f64 {
    t.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn linf_norm(t: &[f64]) -> f64 {
    t.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Two-sided surrogate `p ||t||_inf + sqrt(p) ||t||_2` for `||<t, Y>||_{L_p}`
/// with `Y` a vector of independent standard exponentials.
pub fn gk_moment(t: &[f64], p: f64) -> f64 {
    p * linf_norm(t) + p.sqrt() * l2_norm(t)
}

/// Monte Carlo `||<t, Y>||_{L_p}` for every `t` in `ts` and `p` in `ps`, where
/// `Y` has i.i.d. coordinates drawn from `dist`. Returns `out[t][p]`.
pub fn mc_linear_form_lq(ts: &[Vec<f64>], dist: &Dist, ps: &[f64], draws: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    dist.validate()?;
    let n = match ts.first() {
        Some(t) => t.len(),
        None => return Ok(Vec::new()),
    };
    if draws == 0 || ts.iter().any(|t| t.len() != n) || ps.iter().any(|p| !(*p >= 1.0)) {
        return invalid("mc_linear_form_lq needs draws >= 1, equal dimensions and p >= 1");
    }
    // Each t is scaled to unit l_1 norm so that |<t, Y>|^p stays in range.
    let l1: Vec<f64> = ts.iter().map(|t| t.iter().map(|x| x.abs()).sum::<f64>()).collect();
    let sampler = dist.sampler();
    const CHUNK: usize = 4096;
    let chunks = draws.div_ceil(CHUNK);
    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, "linear-form", c as u64);
            let mut y = vec![0.0; n];
            let mut acc = vec![0.0; ts.len() * ps.len()];
            for _ in (c * CHUNK)..((c + 1) * CHUNK).min(draws) {
                sampler.fill(&mut rng, &mut y);
                for (a, t) in ts.iter().enumerate() {
                    if l1[a] == 0.0 {
                        continue;
                    }
                    let x = (t.iter().zip(&y).map(|(u, v)| u * v).sum::<f64>() / l1[a]).abs();
                    for (b, p) in ps.iter().enumerate() {
                        acc[a * ps.len() + b] += x.powf(*p);
                    }
                }
            }
            acc
        })
        .collect();
    Ok((0..ts.len())
        .map(|a| {
            (0..ps.len())
                .map(|b| {
                    let col: Vec<f64> = partial.iter().map(|acc| acc[a * ps.len() + b]).collect();
                    l1[a] * (kahan_sum(&col) / draws as f64).powf(1.0 / ps[b])
                })
                .collect()
        })
        .collect())
}

/// Surrogate `sqrt(p) ||t||_inf + ||t||_2` for `||<t, Y>||_(p)` (exponential `Y`).
pub fn graded_norm_exponential(t: &[f64], p: f64) -> f64 {
    p.sqrt() * linf_norm(t) + l2_norm(t)
}

/// `||<t, G>||_(p) / ||t||_2` for a standard gaussian vector `G`: the maximum of
/// `||g||_{L_q} / sqrt(q)` over the default grid on `[1, p]`.
pub fn gaussian_graded_factor(p: f64) -> f64 {
    let p = p.max(2.0);
    let grid = QGrid::geometric(p, &[]).expect("p >= 2");
    grid.points()
        .iter()
        .map(|&q| crate::dist::gaussian_abs_moment(q) / q.sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{exponential_abs_moment, gaussian_abs_moment, Dist};
    use crate::rng::stream;
    use proptest::prelude::*;
    use statrs::function::gamma::ln_gamma;

    fn sample(v: &[f64]) -> ScalarSample {
        ScalarSample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lq_examples() {
        assert_eq!(empirical_lq(&sample(&[1.0, 1.0, 1.0, 1.0]), 2.0).unwrap(), 1.0);
        let v = empirical_lq(&sample(&[0.0, 2.0]), 2.0).unwrap();
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(empirical_lq(&sample(&[0.0, 0.0]), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn lq_rejects_bad_orders() {
        let s = sample(&[1.0, 2.0]);
        assert!(matches!(empirical_lq(&s, 0.5), Err(Error::InvalidInput(_))));
        assert!(matches!(empirical_lq(&s, 65.0), Err(Error::Config(_))));
        assert!(empirical_lq_capped(&s, 128.0, 256.0).is_ok());
        assert!(ScalarSample::new(vec![]).is_err());
        assert!(ScalarSample::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn lq_survives_huge_values() {
        let s = sample(&[1e200, 1e199]);
        let v = empirical_lq(&s, 60.0).unwrap();
        assert!(v.is_finite() && v > 1e199);
    }

    #[test]
    fn grid_contains_mandatory_points() {
        let g = QGrid::geometric(16.0, &[5.5]).unwrap();
        for q in [1.0, 2.0, 5.5, 16.0] {
            assert!(g.points().contains(&q));
        }
        for w in g.points().windows(2) {
            assert!(w[1] > w[0] && w[1] / w[0] <= GRID_RATIO + 1e-12);
        }
        assert!(QGrid::geometric(1.5, &[]).is_err());
        assert!(QGrid::from_points(vec![1.0, 3.0]).is_err());
    }

    #[test]
    fn graded_norm_examples() {
        let grid = QGrid::geometric(64.0, &[]).unwrap();
        let c = GradedNormProfile::from_sample(sample(&[-3.0; 10]), grid.clone()).unwrap();
        assert!((graded_norm(&c, 16.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((psi_alpha_estimate(&c, 2.0).unwrap() - 3.0).abs() < 1e-12);
        let r = GradedNormProfile::from_sample(sample(&[1.0, -1.0, -1.0, 1.0]), grid).unwrap();
        assert!((graded_norm(&r, 40.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(graded_norm(&r, 65.0), Err(Error::Config(_))));
    }

    #[test]
    fn graded_norm_uses_off_grid_order() {
        // p = 3 is not a grid point; the value at q = 3 must still be included.
        let grid = QGrid::from_points(vec![1.0, 2.0, 8.0]).unwrap();
        let prof = GradedNormProfile::analytic(|q| q, grid).unwrap();
        let v = graded_norm(&prof, 3.0).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_graded_norm_matches_gamma_formula() {
        // Oracle: sup over q <= p of Gamma(q+1)^{1/q} / sqrt(q) on a fine grid.
        let oracle = |p: f64| {
            (0..=1500)
                .map(|k| 1.0 + (p - 1.0) * k as f64 / 1500.0)
                .map(|q| exponential_abs_moment(q) / q.sqrt())
                .fold(0.0, f64::max)
        };
        let n = 400_000;
        let mut rng = stream(3, "norms-exp", 0);
        let s = Dist::exponential().sampler();
        let vals: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let prof =
            GradedNormProfile::from_sample(sample(&vals), QGrid::geometric(16.0, &[]).unwrap())
                .unwrap();
        let est4 = graded_norm(&prof, 4.0).unwrap();
        assert!((est4 / oracle(4.0) - 1.0).abs() < 0.02, "{est4} vs {}", oracle(4.0));
        // At p = 16 the maximiser is q = 16, whose moment estimator has a
        // delta-method standard error of L_q/q * sqrt((Gamma(2q+1)/Gamma(q+1)^2 - 1)/n).
        let q: f64 = 16.0;
        let rel_var = (ln_gamma(2.0 * q + 1.0) - 2.0 * ln_gamma(q + 1.0)).exp() - 1.0;
        let se = oracle(16.0) / q * (rel_var / n as f64).sqrt();
        let est16 = graded_norm(&prof, 16.0).unwrap();
        assert!((est16 - oracle(16.0)).abs() <= 3.0 * se, "{est16} vs {}", oracle(16.0));
    }

    #[test]
    fn gaussian_psi2_is_stable_in_pmax() {
        let mut rng = stream(5, "norms-gauss", 0);
        let s = Dist::gaussian().sampler();
        let vals: Vec<f64> = (0..200_000).map(|_| s.sample(&mut rng)).collect();
        let a = psi_alpha_estimate(
            &GradedNormProfile::from_sample(sample(&vals), QGrid::geometric(16.0, &[]).unwrap())
                .unwrap(),
            2.0,
        )
        .unwrap();
        let b = psi_alpha_estimate(
            &GradedNormProfile::from_sample(sample(&vals), QGrid::geometric(32.0, &[]).unwrap())
                .unwrap(),
            2.0,
        )
        .unwrap();
        assert!((b / a - 1.0).abs() <= 0.10, "{a} vs {b}");
    }

    #[test]
    fn gk_examples() {
        let e1 = [1.0, 0.0, 0.0];
        assert_eq!(gk_moment(&e1, 4.0), 6.0);
        assert_eq!(gk_moment(&[0.0, 0.0], 7.0), 0.0);
        assert_eq!(graded_norm_exponential(&e1, 16.0), 5.0);
        assert_eq!(graded_norm_exponential(&[0.0], 16.0), 0.0);
    }

    #[test]
    fn gaussian_graded_factor_is_the_first_moment() {
        // ||g||_q / sqrt(q) is maximised at q = 1 where it equals sqrt(2/pi).
        let f = gaussian_graded_factor(256.0);
        assert!((f - gaussian_abs_moment(1.0)).abs() < 1e-12);
    }

    fn arb_sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 1..40)
    }

    proptest! {
        #[test]
        fn lq_is_monotone_in_q(v in arb_sample(), q1 in 1.0f64..30.0, dq in 0.0f64..30.0) {
            let s = ScalarSample::new(v).unwrap();
            let a = empirical_lq(&s, q1).unwrap();
            let b = empirical_lq(&s, q1 + dq).unwrap();
            prop_assert!(a <= b + 1e-12 * b.max(1.0));
        }

        #[test]
        fn norms_are_homogeneous(v in arb_sample(), c in 0.0f64..20.0, p in 2.0f64..32.0) {
            let grid = QGrid::geometric(32.0, &[]).unwrap();
            let base = GradedNormProfile::from_sample(ScalarSample::new(v.clone()).unwrap(), grid.clone()).unwrap();
            let scaled = GradedNormProfile::from_sample(
                ScalarSample::new(v.iter().map(|x| c * x).collect()).unwrap(), grid).unwrap();
            let g0 = graded_norm(&base, p).unwrap();
            let g1 = graded_norm(&scaled, p).unwrap();
            prop_assert!((g1 - c * g0).abs() <= 1e-10 * (c * g0).max(1.0));
            let s0 = psi_alpha_estimate(&base, 2.0).unwrap();
            let s1 = psi_alpha_estimate(&scaled, 2.0).unwrap();
            prop_assert!((s1 - c * s0).abs() <= 1e-10 * (c * s0).max(1.0));
        }

        #[test]
        fn graded_norm_sandwich(v in arb_sample(), p1 in 2.0f64..32.0, dp in 0.0f64..32.0) {
            let s = ScalarSample::new(v).unwrap();
            let l2 = empirical_lq(&s, 2.0).unwrap();
            let p2 = (p1 + dp).min(64.0);
            let grid = QGrid::geometric(64.0, &[p1, p2]).unwrap();
            let prof = GradedNormProfile::from_sample(s, grid).unwrap();
            let a = graded_norm(&prof, p1).unwrap();
            let b = graded_norm(&prof, p2).unwrap();
            prop_assert!(a <= b);
            prop_assert!(a >= l2 / 2f64.sqrt() - 1e-12);
            prop_assert!(b <= psi_alpha_estimate(&prof, 2.0).unwrap() + 1e-12);
        }
    }
}
