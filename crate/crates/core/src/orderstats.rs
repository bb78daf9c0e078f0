//! Monotone rearrangements, the cutoffs `j_0` and `j_s`, the head/tail split
//! of a vector, moment formulas for sums of nonnegative variables and Monte
//! Carlo exceedance tables.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{config, invalid, Result};
use crate::norms::{graded_norm, GradedNormProfile, QGrid};
use crate::rng::stream;
use crate::stats::kahan_sum;

/// Parameters of the order-statistics estimates.
///
/// `q` is the moment order of the variable, `r < q` the norm taken of the
/// tail, `p` the probability level and `c0` the constant in the cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub q: f64,
    pub r: f64,
    pub p: f64,
    pub beta: f64,
    pub u: f64,
    pub c0: f64,
}

impl TailParams {
    /// `beta = 1/2`, `u = 4`, `c0 = 1`.
    pub fn new(q: f64, r: f64, p: f64) -> Result<Self> {
        let t = TailParams { q, r, p, beta: 0.5, u: 4.0, c0: 1.0 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let TailParams { q, r, p, beta, u, c0 } = *self;
        if !(q > 2.0 && q.is_finite()) {
            return config(format!("q must be a finite number > 2, got {q}"));
        }
        if !(r >= 1.0 && r < q) {
            return config(format!("r must satisfy 1 <= r < q, got r = {r}, q = {q}"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return config(format!("p must be >= 1, got {p}"));
        }
        if !(beta > 0.0 && beta <= q / r - 1.0) {
            return config(format!("beta must lie in (0, q/r - 1], got {beta}"));
        }
        if !(u >= 4.0) {
            return config(format!("u must be >= 4, got {u}"));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return config(format!("c0 must be positive, got {c0}"));
        }
        Ok(())
    }

    /// `rho = 1 + (q/r - 1)/2`.
    pub fn rho(&self) -> f64 {
        1.0 + (self.q / self.r - 1.0) / 2.0
    }

    /// `alpha = rho r / q`, always below 1.
    pub fn alpha(&self) -> f64 {
        self.rho() * self.r / self.q
    }

    /// `(beta + 1) r / q`, the exponent of the small-coordinate profile.
    pub fn beta_alpha(&self) -> f64 {
        (self.beta + 1.0) * self.r / self.q
    }
}

/// Indices sorted by nonincreasing `|z_i|`, ties by lowest index.
pub fn magnitude_order(z: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()));
    idx
}

/// `(|z|^*_i)`: absolute values sorted nonincreasing.
pub fn rearrange(z: &[f64]) -> Vec<f64> {
    magnitude_order(z).into_iter().map(|i| z[i].abs()).collect()
}

/// `min{ ceil(c0 p / ((q/r - 1) log(4 + e N / p))), N + 1 }`, evaluated in
/// double precision.
pub fn cutoff_formula(c0: f64, p: f64, q: f64, r: f64, n: usize) -> usize {
    let x = c0 * p / ((q / r - 1.0) * (4.0 + E * n as f64 / p).ln());
    let cap = n + 1;
    if !(x < cap as f64) {
        return cap;
    }
    (x.ceil() as usize).clamp(1, cap)
}

pub fn cutoff_j0(params: &TailParams, n: usize) -> usize {
    cutoff_formula(params.c0, params.p, params.q, params.r, n)
}

/// `j_s` for `s = s0..=s_max` with `p = u^2 2^s`, made nondecreasing by a
/// running maximum.
pub fn j_s_sequence(u: f64, s0: usize, s_max: usize, r: f64, q: f64, n: usize, c0: f64) -> Vec<usize> {
    let mut out = Vec::with_capacity(s_max.saturating_sub(s0) + 1);
    let mut run = 0;
    for s in s0..=s_max {
        let p = u * u * 2f64.powi(s as i32);
        run = run.max(cutoff_formula(c0, p, q, r, n));
        out.push(run);
    }
    out
}

/// `z = U + V` with `U` holding the `j - 1` largest magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub head: Vec<f64>,
    pub tail: Vec<f64>,
    pub j: usize,
    /// Indices where the head is nonzero, in magnitude order.
    pub head_support: Vec<usize>,
}

impl Decomposition {
    pub fn head_l2(&self) -> f64 {
        lp_norm(&self.head, 2.0)
    }

    pub fn tail_lr(&self, r: f64) -> f64 {
        lp_norm(&self.tail, r)
    }
}

pub fn decompose(z: &[f64], j: usize) -> Decomposition {
    let mut head = vec![0.0; z.len()];
    let mut tail = z.to_vec();
    let mut head_support = Vec::new();
    for &i in magnitude_order(z).iter().take(j.saturating_sub(1)) {
        if z[i] != 0.0 {
            head[i] = z[i];
            tail[i] = 0.0;
            head_support.push(i);
        }
    }
    Decomposition { head, tail, j, head_support }
}

/// `(sum |x_i|^r)^{1/r}`, scaled by the largest entry to avoid overflow.
pub fn lp_norm(x: &[f64], r: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(r)).sum::<f64>().powf(1.0 / r)
}

/// One line of an exceedance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub t_or_w: f64,
    pub bound_name: String,
    pub frequency: f64,
    pub exceedances: usize,
    pub trials: usize,
    pub n: usize,
    pub params: String,
}

pub const EXCEEDANCE_CSV_HEADER: &str = "t_or_w,bound_name,frequency,exceedances,trials,N,params";

pub fn exceedance_csv(rows: &[ExceedanceRow]) -> String {
    let mut s = String::from(EXCEEDANCE_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},\"{}\"\n",
            r.t_or_w, r.bound_name, r.frequency, r.exceedances, r.trials, r.n, r.params
        ));
    }
    s
}

/// Sorted copy of a threshold grid; rejects empty or non-finite grids.
fn sorted_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return invalid("threshold grid must be a nonempty list of finite numbers");
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    Ok(g)
}

/// Counts of `stat > scale * t` for every `t` in an ascending grid. Counts
/// are nonincreasing in `t` by construction.
fn exceedance_counts(stats: &[f64], scale: f64, grid: &[f64]) -> Vec<usize> {
    grid.iter().map(|t| stats.iter().filter(|&&x| x > scale * t).count()).collect()
}

/// Per-trial `||U||_2` and `||V||_r` of an i.i.d. sample of `dist` split at `j0`.
pub fn decomposition_statistics(
    dist: &Dist,
    params: &TailParams,
    n: usize,
    trials: usize,
    seed: u64,
    tag: &str,
) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    dist.validate()?;
    if n == 0 || trials == 0 {
        return invalid("N and trials must be positive");
    }
    let j0 = cutoff_j0(params, n);
    let sampler = dist.sampler();
    Ok((0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |z, k| {
                let mut rng = stream(seed, tag, k as u64);
                sampler.fill(&mut rng, z);
                let d = decompose(z, j0);
                (d.head_l2(), d.tail_lr(params.r))
            },
        )
        .collect())
}

/// Thresholds at `t = 1` (before the constant `c1`) of the two decomposition
/// bounds: `sqrt(2p) ||Z||_(2p)` for the head and
/// `(q/(q-r))^{1/r} ||Z||_{L_q} N^{1/r}` for the tail. An infinite moment
/// makes the corresponding bound vacuous (`inf`).
pub fn decomposition_bases(dist: &Dist, params: &TailParams, n: usize) -> Result<(f64, f64)> {
    let two_p = 2.0 * params.p;
    let head = if dist.abs_moment(two_p).is_some() {
        let d = *dist;
        let prof = GradedNormProfile::analytic(
            move |q| d.abs_moment(q).unwrap_or(f64::INFINITY),
            QGrid::geometric(two_p.max(2.0), &[])?,
        )?;
        two_p.sqrt() * graded_norm(&prof, two_p)?
    } else {
        f64::INFINITY
    };
    let (q, r) = (params.q, params.r);
    let tail = match dist.abs_moment(q) {
        Some(lq) => (q / (q - r)).powf(1.0 / r) * lq * (n as f64).powf(1.0 / r),
        None => return config(format!("the distribution has no finite moment of order {q}")),
    };
    Ok((head, tail))
}

/// Exceedance frequencies of `||U||_2 > c1 t sqrt(2p) ||Z||_(2p)` and
/// `||V||_r > c1 t (q/(q-r))^{1/r} ||Z||_{L_q} N^{1/r}` over a common trial set.
#[allow(clippy::too_many_arguments)]
pub fn tail_check(
    dist: &Dist,
    params: &TailParams,
    n: usize,
    trials: usize,
    t_grid: &[f64],
    c1: f64,
    seed: u64,
) -> Result<Vec<ExceedanceRow>> {
    let grid = sorted_grid(t_grid)?;
    let stats = decomposition_statistics(dist, params, n, trials, seed, "tail-check")?;
    let (head_base, tail_base) = decomposition_bases(dist, params, n)?;
    let heads: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let tails: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let desc = format!(
        "q={} r={} p={} c0={} c1={} j0={} dist={:?}",
        params.q,
        params.r,
        params.p,
        params.c0,
        c1,
        cutoff_j0(params, n),
        dist.kind
    );
    let mut rows = Vec::new();
    for (name, values, base) in [("head_l2", &heads, head_base), ("tail_lr", &tails, tail_base)] {
        for (t, count) in grid.iter().zip(exceedance_counts(values, c1 * base, &grid)) {
            rows.push(ExceedanceRow {
                t_or_w: *t,
                bound_name: name.to_string(),
                frequency: count as f64 / trials as f64,
                exceedances: count,
                trials,
                n,
                params: desc.clone(),
            });
        }
    }
    Ok(rows)
}

/// Log-log decay slope of an exceedance curve.
///
/// Uses the least-squares slope over points with nonzero frequency. When
/// fewer than two such points exist, the curve drops below the detection
/// limit `1/trials` right after the last observed point, and the slope from
/// that point to the next grid point at the detection limit is returned (an
/// upper bound on the true slope up to Monte Carlo error). `None` if nothing
/// was observed.
pub fn decay_slope(rows: &[ExceedanceRow]) -> Option<f64> {
    let seen: Vec<&ExceedanceRow> = rows.iter().filter(|r| r.exceedances > 0).collect();
    if seen.len() >= 2 {
        let x: Vec<f64> = seen.iter().map(|r| r.t_or_w.ln()).collect();
        let y: Vec<f64> = seen.iter().map(|r| r.frequency.ln()).collect();
        return Some(crate::stats::ls_slope(&x, &y));
    }
    let last = *seen.first()?;
    let next = rows.iter().find(|r| r.t_or_w > last.t_or_w)?;
    let floor = 1.0 / last.trials as f64;
    Some((floor.ln() - last.frequency.ln()) / (next.t_or_w.ln() - last.t_or_w.ln()))
}

/// `sup { (r/s) (m/r)^{1/s} ||W||_{L_s} : max(1, r/m) <= s <= r }` on a fine
/// geometric `s`-grid that includes both endpoints.
pub fn latala_rhs<F>(m: usize, r: f64, w_moment: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if m == 0 || !(r >= 1.0) {
        return invalid("latala_rhs needs m >= 1 and r >= 1");
    }
    let lo = (r / m as f64).max(1.0);
    let mut grid = vec![lo];
    let mut s = lo;
    while s * 1.01 < r {
        s *= 1.01;
        grid.push(s);
    }
    grid.push(r);
    let mut best = 0.0f64;
    for s in grid {
        let w = w_moment(s);
        if !w.is_finite() {
            return config(format!("||W||_{{L_{s}}} is not finite"));
        }
        best = best.max((r / s) * (m as f64 / r).powf(1.0 / s) * w);
    }
    Ok(best)
}

/// Monte Carlo `||W_1 + ... + W_m||_{L_r}` for every `r` in `rs`, from `sums`
/// independent sums of i.i.d. copies of `dist`.
pub fn latala_sum_norms(dist: &Dist, m: usize, rs: &[f64], sums: usize, seed: u64) -> Result<Vec<f64>> {
    dist.validate()?;
    if m == 0 || sums == 0 || rs.iter().any(|r| !(*r >= 1.0)) {
        return invalid("latala_sum_norms needs m >= 1, sums >= 1 and r >= 1");
    }
    let sampler = dist.sampler();
    let totals: Vec<f64> = (0..sums)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |w, k| {
                let mut rng = stream(seed, "latala", k as u64);
                sampler.fill(&mut rng, w);
                w.iter().sum::<f64>()
            },
        )
        .collect();
    let scale = totals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Ok(vec![0.0; rs.len()]);
    }
    Ok(rs
        .iter()
        .map(|&r| {
            let powers: Vec<f64> = totals.iter().map(|x| (x.abs() / scale).powf(r)).collect();
            scale * (kahan_sum(&powers) / sums as f64).powf(1.0 / r)
        })
        .collect())
}

/// The blocks `nu_s` and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuSummary {
    pub nu: Vec<f64>,
    pub sum: f64,
    /// `sum / sqrt(N)`.
    pub ratio: f64,
}

/// `nu_s = (sum_{i = j_s}^{j_{s+1} - 1} (eN/i)^alpha)^{1/2}` for consecutive
/// pairs of `j_list`; requires `alpha < 3/4`.
pub fn nu_sequence(j_list: &[usize], n: usize, alpha: f64) -> Result<NuSummary> {
    if !(alpha > 0.0 && alpha < 0.75) {
        return config(format!("alpha must lie in (0, 3/4), got {alpha}"));
    }
    if j_list.windows(2).any(|w| w[0] > w[1]) || j_list.iter().any(|&j| j == 0 || j > n + 1) {
        return invalid("j list must be nondecreasing within [1, N + 1]");
    }
    let nf = n as f64;
    let nu: Vec<f64> = j_list
        .windows(2)
        .map(|w| (w[0]..w[1]).map(|i| (E * nf / i as f64).powf(alpha)).sum::<f64>().sqrt())
        .collect();
    let sum = nu.iter().sum::<f64>();
    Ok(NuSummary { ratio: sum / nf.sqrt(), nu, sum })
}

/// Exceedance frequencies of `||z||_2 > w ||xi||_{L_q} sqrt(N)` for i.i.d.
/// `z_i ~ dist`.
pub fn lq_vector_norm_check(
    dist: &Dist,
    q: f64,
    n: usize,
    trials: usize,
    w_grid: &[f64],
    seed: u64,
) -> Result<Vec<ExceedanceRow>> {
    let grid = sorted_grid(w_grid)?;
    let Some(lq) = dist.abs_moment(q) else {
        return config(format!("the distribution has no finite moment of order {q}"));
    };
    if n == 0 || trials == 0 {
        return invalid("N and trials must be positive");
    }
    let sampler = dist.sampler();
    let norms: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |z, k| {
                let mut rng = stream(seed, "lq-vector", k as u64);
                sampler.fill(&mut rng, z);
                lp_norm(z, 2.0)
            },
        )
        .collect();
    let counts = exceedance_counts(&norms, lq * (n as f64).sqrt(), &grid);
    Ok(grid
        .iter()
        .zip(counts)
        .map(|(w, c)| ExceedanceRow {
            t_or_w: *w,
            bound_name: "l2_vector".into(),
            frequency: c as f64 / trials as f64,
            exceedances: c,
            trials,
            n,
            params: format!("q={q} dist={:?}", dist.kind),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistKind;
    use proptest::prelude::*;

    #[test]
    fn rearrange_examples() {
        assert_eq!(rearrange(&[3.0, -1.0, 2.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(rearrange(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(rearrange(&[3.0, 2.0, 2.0, 1.0]), vec![3.0, 2.0, 2.0, 1.0]);
        assert_eq!(magnitude_order(&[1.0, -2.0, 2.0]), vec![1, 2, 0]);
    }

    #[test]
    fn cutoff_examples() {
        let mut t = TailParams::new(8.0, 2.0, 8.0).unwrap();
        assert_eq!(cutoff_j0(&t, 1024), 1);
        t.p = 512.0;
        assert_eq!(cutoff_j0(&t, 1024), 77);
        t.p = 1e9;
        assert_eq!(cutoff_j0(&t, 1024), 1025);
    }

    #[test]
    fn j_sequence_behaviour() {
        let j = j_s_sequence(4.0, 0, 12, 2.0, 8.0, 1024, 1.0);
        assert!(j.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*j.last().unwrap(), 1025);
        // u^2 2^s <= 1 with large N gives 1
        assert_eq!(j_s_sequence(1.0, 0, 0, 2.0, 8.0, 1 << 20, 1.0), vec![1]);
        // roughly doubles in the unclamped regime
        let big = j_s_sequence(4.0, 0, 6, 2.0, 8.0, 1 << 24, 1.0);
        for w in big.windows(2).skip(2) {
            let ratio = w[1] as f64 / w[0] as f64;
            assert!((1.5..=2.5).contains(&ratio), "{big:?}");
        }
    }

    #[test]
    fn decompose_examples() {
        let z = [3.0, -1.0, 2.0];
        let d = decompose(&z, 2);
        assert_eq!(d.head, vec![3.0, 0.0, 0.0]);
        assert_eq!(d.tail, vec![0.0, -1.0, 2.0]);
        assert_eq!(decompose(&z, 1).tail, z.to_vec());
        assert_eq!(decompose(&z, 4).tail, vec![0.0; 3]);
        // zeros never enter the head support
        let d = decompose(&[0.0, 5.0, 0.0], 3);
        assert_eq!(d.head_support, vec![1]);
    }

    #[test]
    fn nu_examples() {
        let s = nu_sequence(&[5, 5], 100, 0.5).unwrap();
        assert_eq!(s.nu, vec![0.0]);
        // single block: sum_{i <= N} (eN/i)^{1/2} ~ 2 sqrt(e) N
        let n = 4096;
        let s = nu_sequence(&[1, n + 1], n, 0.5).unwrap();
        let approx = (2.0 * E.sqrt() * n as f64).sqrt();
        assert!((s.nu[0] / approx - 1.0).abs() < 0.02);
        assert!(s.ratio <= 2.0);
        assert!(nu_sequence(&[1, 2], 10, 0.8).is_err());
    }

    #[test]
    fn nu_sum_is_order_sqrt_n() {
        let t = TailParams::new(8.0, 2.0, 1.0).unwrap();
        for k in 8..=14 {
            let n = 1usize << k;
            let j = j_s_sequence(t.u, 0, 40, t.r, t.q, n, t.c0);
            let s = nu_sequence(&j, n, t.beta_alpha()).unwrap();
            assert!(s.ratio <= 10.0, "N = {n}: {}", s.ratio);
        }
    }

    #[test]
    fn latala_examples() {
        // W = 1, m = r: sup is r at s = 1, matching ||sum 1||_r = m.
        for m in [1usize, 2, 4, 8] {
            let v = latala_rhs(m, m as f64, |_| 1.0).unwrap();
            assert!((v - m as f64).abs() < 1e-12);
        }
        let d = Dist::new(DistKind::Exponential).unwrap();
        let a = latala_rhs(3, 4.0, |s| d.abs_moment(s).unwrap()).unwrap();
        let b = latala_rhs(3, 4.0, |s| 2.5 * d.abs_moment(s).unwrap()).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12 * b);
        // m = 1, r = 2 with W = Y^2 exponential: within 8 of ||W||_2
        let w = Dist::new(DistKind::ExponentialSquared).unwrap();
        let v = latala_rhs(1, 2.0, |s| w.abs_moment(s).unwrap()).unwrap();
        let l2 = w.abs_moment(2.0).unwrap();
        assert!(v / l2 <= 8.0 && l2 / v <= 8.0);
    }

    #[test]
    fn tail_frequencies_are_monotone() {
        let d = Dist::gaussian();
        let t = TailParams::new(8.0, 2.0, 4.0).unwrap();
        let rows = tail_check(&d, &t, 256, 500, &[4.0, 0.5, 1.0, 2.0], 0.5, 3).unwrap();
        for name in ["head_l2", "tail_lr"] {
            let f: Vec<f64> = rows.iter().filter(|r| r.bound_name == name).map(|r| r.frequency).collect();
            assert!(f.windows(2).all(|w| w[0] >= w[1]), "{name}: {f:?}");
        }
        assert!(exceedance_csv(&rows).starts_with(EXCEEDANCE_CSV_HEADER));
    }

    #[test]
    fn gaussian_head_bound_is_rare_at_t4() {
        let t = TailParams::new(8.0, 2.0, 32.0).unwrap();
        let rows = tail_check(&Dist::gaussian(), &t, 1024, 2000, &[4.0], 1.0, 5).unwrap();
        assert!(rows[0].frequency < 1e-2);
    }

    #[test]
    fn gaussian_vector_norm_concentrates() {
        let rows = lq_vector_norm_check(&Dist::gaussian(), 4.0, 1024, 2000, &[0.5, 2.0], 4).unwrap();
        assert!(rows[0].frequency > 0.99);
        assert!(rows[1].frequency < 1e-3);
    }

    #[test]
    fn infinite_moments_are_rejected() {
        let d = Dist::new(DistKind::SymmetricPareto { tail: 3.0 }).unwrap();
        assert!(lq_vector_norm_check(&d, 3.0, 10, 10, &[1.0], 1).is_err());
        let t = TailParams::new(4.0, 2.0, 8.0).unwrap();
        assert!(decomposition_bases(&d, &t, 10).is_err());
    }

    #[test]
    fn decay_slope_detection_limit() {
        let row = |t: f64, c: usize| ExceedanceRow {
            t_or_w: t,
            bound_name: "x".into(),
            frequency: c as f64 / 100.0,
            exceedances: c,
            trials: 100,
            n: 1,
            params: String::new(),
        };
        let rows = vec![row(1.0, 50), row(2.0, 0)];
        let s = decay_slope(&rows).unwrap();
        assert!((s - (0.01f64.ln() - 0.5f64.ln()) / 2f64.ln()).abs() < 1e-12);
        assert!(decay_slope(&[row(1.0, 0)]).is_none());
    }

    proptest! {
        #[test]
        fn decompose_is_exact(z in prop::collection::vec(-5.0f64..5.0, 1..40), j in 1usize..45) {
            let d = decompose(&z, j);
            for i in 0..z.len() {
                prop_assert_eq!(d.head[i] + d.tail[i], z[i]);
                prop_assert!(d.head[i] == 0.0 || d.tail[i] == 0.0);
            }
            let nonzero = z.iter().filter(|x| **x != 0.0).count();
            prop_assert_eq!(d.head_support.len(), (j - 1).min(nonzero));
            let next = decompose(&z, j + 1);
            prop_assert!(next.head_l2() >= d.head_l2());
            prop_assert!(next.tail_lr(3.0) <= d.tail_lr(3.0));
        }

        #[test]
        fn rearrange_is_a_permutation(z in prop::collection::vec(-5.0f64..5.0, 0..40)) {
            let r = rearrange(&z);
            let mut a: Vec<f64> = z.iter().map(|x| x.abs()).collect();
            a.sort_by(|x, y| y.total_cmp(x));
            prop_assert_eq!(r, a);
        }

        #[test]
        fn cutoff_is_within_range(p in 1.0f64..1e6, n in 1usize..100_000) {
            let j = cutoff_formula(1.0, p, 8.0, 2.0, n);
            prop_assert!((1..=n + 1).contains(&j));
        }
    }
}
