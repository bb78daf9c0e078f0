//! Deterministic chaining machinery on a finite set `V` of vectors in `R^N`.
//!
//! A [`ProjectedClass`] stores `V`, nearest-point maps `pi_s` for levels
//! `s0..=s_top` (the top level is the identity), cutoffs `j_s`, weights
//! `nu_s` and tabulated seminorm values. The checkers compare the monotone
//! sums of `Delta_s v = pi_{s+1} v - pi_s v` and `pi_s v` with those tables.

use serde::{Deserialize, Serialize};

use crate::chaining::{greedy_admissible, FiniteMetricSpace};
use crate::error::{invalid, Result};
use crate::orderstats::{lp_norm, magnitude_order, rearrange};

/// Relative slack allowed when comparing a monotone sum with a seminorm value.
pub const CHECK_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedClass {
    pub n: usize,
    pub vectors: Vec<Vec<f64>>,
    pub s0: usize,
    /// `maps[k][v]` is the index of `pi_{s0+k} v`.
    pub maps: Vec<Vec<usize>>,
    /// `j[k] = j_{s0+k}`.
    pub j: Vec<usize>,
    /// `nu[k] = nu_{s0+k}`.
    pub nu: Vec<f64>,
    /// `delta_block[k][v] = ||Delta_{s0+k} v||_[s0+k]`, `k < levels - 1`.
    pub delta_block: Vec<Vec<f64>>,
    /// `pi_block[k][v] = ||pi_{s0+k} v||_[s0+k]`.
    pub pi_block: Vec<Vec<f64>>,
    /// `delta_base[k][v] = ||Delta_{s0+k} v||`.
    pub delta_base: Vec<Vec<f64>>,
    /// `pi_base[k][v] = ||pi_{s0+k} v||`.
    pub pi_base: Vec<Vec<f64>>,
    /// `vector_base[v] = ||v||`.
    pub vector_base: Vec<f64>,
}

/// Base seminorm used by [`ProjectedClass::equality_defined`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseSeminorm {
    /// `max_{p in {1, 2}} ||x||_{2p} / N^{1/2p}`.
    NormalizedL2L4,
    /// `||x||_inf`.
    Sup,
}

impl BaseSeminorm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = x.len().max(1) as f64;
        match self {
            BaseSeminorm::NormalizedL2L4 => {
                (lp_norm(x, 2.0) / n.sqrt()).max(lp_norm(x, 4.0) / n.powf(0.25))
            }
            BaseSeminorm::Sup => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }
}

/// `(sum_{lo <= i < hi} (x_i^*)^2)^{1/2}` with 1-based `i`.
fn block_l2(sorted: &[f64], lo: usize, hi: usize) -> f64 {
    let lo = lo.max(1);
    let hi = hi.min(sorted.len() + 1);
    if lo >= hi {
        return 0.0;
    }
    lp_norm(&sorted[lo - 1..hi - 1], 2.0)
}

/// `(sum_{i >= from} (x_i^*)^{2p})^{1/2p}` with 1-based `i`.
fn tail_norm(sorted: &[f64], from: usize, p: f64) -> f64 {
    let from = from.max(1);
    if from > sorted.len() {
        return 0.0;
    }
    lp_norm(&sorted[from - 1..], 2.0 * p)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl ProjectedClass {
    /// Builds a class whose seminorms are computed from callbacks.
    ///
    /// `block(s, x)` gives `||x||_[s]` and `base(x)` gives `||x||`; both are
    /// called on differences and on members in whatever space `coords` lives
    /// in, and `project` maps such a vector to `R^N`. This lets seminorms be
    /// defined on an underlying class while the checks run on projections.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts<B, D, P>(
        coords: &[Vec<f64>],
        s0: usize,
        maps: Vec<Vec<usize>>,
        j: Vec<usize>,
        nu: Vec<f64>,
        block: B,
        base: D,
        project: P,
    ) -> Result<Self>
    where
        B: Fn(usize, &[f64]) -> f64,
        D: Fn(&[f64]) -> f64,
        P: Fn(&[f64]) -> Vec<f64>,
    {
        let m = coords.len();
        let levels = maps.len();
        if m == 0 || levels == 0 {
            return invalid("a projected class needs vectors and at least one level");
        }
        let vectors: Vec<Vec<f64>> = coords.iter().map(|c| project(c)).collect();
        let n = vectors[0].len();
        let delta = |k: usize, v: usize| sub(&coords[maps[k + 1][v]], &coords[maps[k][v]]);
        let delta_block = (0..levels - 1)
            .map(|k| (0..m).map(|v| block(s0 + k, &delta(k, v))).collect())
            .collect();
        let delta_base = (0..levels - 1).map(|k| (0..m).map(|v| base(&delta(k, v))).collect()).collect();
        let pi_block = (0..levels)
            .map(|k| (0..m).map(|v| block(s0 + k, &coords[maps[k][v]])).collect())
            .collect();
        let pi_base = (0..levels).map(|k| (0..m).map(|v| base(&coords[maps[k][v]])).collect()).collect();
        let vector_base = coords.iter().map(|c| base(c)).collect();
        let pc = ProjectedClass {
            n,
            vectors,
            s0,
            maps,
            j,
            nu,
            delta_block,
            pi_block,
            delta_base,
            pi_base,
            vector_base,
        };
        pc.validate()?;
        Ok(pc)
    }

    /// Seminorms defined as the monotone sums themselves:
    /// `||x||_[s]` is the `l_2` norm of the `j_s - 1` largest coordinates,
    /// `||.||` is `base`, and `nu_s = sup_v (sum_{i=j_{s-1}}^{j_s-1} ((pi_s v)_i^*)^2)^{1/2} / d(V)`.
    pub fn equality_defined(
        vectors: Vec<Vec<f64>>,
        s0: usize,
        maps: Vec<Vec<usize>>,
        j: Vec<usize>,
        base: BaseSeminorm,
    ) -> Result<Self> {
        if j.len() != maps.len() {
            return invalid("one cutoff per level is required");
        }
        let levels = maps.len();
        let mut pc = Self::from_parts(
            &vectors,
            s0,
            maps,
            j.clone(),
            vec![0.0; levels],
            |s, x| block_l2(&rearrange(x), 1, j[s - s0]),
            |x| base.eval(x),
            |x| x.to_vec(),
        )?;
        let d = pc.vector_base.iter().fold(0.0f64, |a, b| a.max(*b));
        if d > 0.0 {
            for k in 0..levels {
                let lo = if k == 0 { pc.j[0] } else { pc.j[k - 1] };
                let sup = (0..pc.vectors.len())
                    .map(|v| block_l2(&rearrange(&pc.vectors[pc.maps[k][v]]), lo, pc.j[k]))
                    .fold(0.0f64, f64::max);
                pc.nu[k] = sup / d;
            }
        }
        Ok(pc)
    }

    /// Equality-defined instance with nearest-point maps from the greedy
    /// admissible sequence under the `l_2` distance. `js` gives `j_{s0+k}`
    /// (the last entry repeats), made nondecreasing, with the top level forced
    /// to `N + 1`.
    pub fn greedy_equality(vectors: Vec<Vec<f64>>, s0: usize, js: &[usize], base: BaseSeminorm) -> Result<Self> {
        if vectors.is_empty() || js.is_empty() {
            return invalid("vectors and cutoffs must be nonempty");
        }
        let n = vectors[0].len();
        if vectors.iter().any(|v| v.len() != n) {
            return invalid("all vectors must have the same length");
        }
        let sp = FiniteMetricSpace::from_points(&vectors, |a, b| lp_norm(&sub(a, b), 2.0))?;
        let seq = greedy_admissible(&sp);
        let top = seq.s_max().max(s0);
        let maps: Vec<Vec<usize>> = (s0..=top).map(|s| (0..vectors.len()).map(|t| seq.pi(s, t)).collect()).collect();
        let mut j: Vec<usize> = (0..maps.len()).map(|k| js[k.min(js.len() - 1)].clamp(1, n + 1)).collect();
        for k in 1..j.len() {
            j[k] = j[k].max(j[k - 1]);
        }
        *j.last_mut().expect("at least one level") = n + 1;
        Self::equality_defined(vectors, s0, maps, j, base)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.vectors.len();
        let levels = self.maps.len();
        if self.vectors.iter().any(|v| v.len() != self.n) {
            return invalid("all vectors must have length N");
        }
        if self.vectors.iter().flatten().any(|x| !x.is_finite()) {
            return invalid("vectors must be finite");
        }
        if self.maps.iter().any(|mp| mp.len() != m || mp.iter().any(|&i| i >= m)) {
            return invalid("every map must send each vector to a member of V");
        }
        if self.maps[levels - 1].iter().enumerate().any(|(i, &c)| i != c) {
            return invalid("the top level map must be the identity");
        }
        if self.j.len() != levels || self.nu.len() != levels {
            return invalid("j and nu need one entry per level");
        }
        if self.j.windows(2).any(|w| w[0] > w[1]) || self.j.iter().any(|&x| x == 0 || x > self.n + 1) {
            return invalid("j_s must be nondecreasing within [1, N + 1]");
        }
        let tables_ok = self.delta_block.len() == levels - 1
            && self.delta_base.len() == levels - 1
            && self.pi_block.len() == levels
            && self.pi_base.len() == levels
            && self.vector_base.len() == m
            && self
                .delta_block
                .iter()
                .chain(&self.delta_base)
                .chain(&self.pi_block)
                .chain(&self.pi_base)
                .all(|row| row.len() == m);
        if !tables_ok {
            return invalid("seminorm tables have the wrong shape");
        }
        let all = self
            .delta_block
            .iter()
            .chain(&self.delta_base)
            .chain(&self.pi_block)
            .chain(&self.pi_base)
            .flatten()
            .chain(&self.vector_base)
            .chain(&self.nu);
        for x in all {
            if !(x.is_finite() && *x >= 0.0) {
                return invalid("seminorm values and nu must be finite and nonnegative");
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        self.maps.len()
    }

    pub fn pi(&self, k: usize, v: usize) -> &[f64] {
        &self.vectors[self.maps[k][v]]
    }

    pub fn delta(&self, k: usize, v: usize) -> Vec<f64> {
        sub(self.pi(k + 1, v), self.pi(k, v))
    }

    /// Every seminorm value and `nu` multiplied by `factor`.
    pub fn with_scaled_seminorms(&self, factor: f64) -> Self {
        let scale = |t: &Vec<Vec<f64>>| t.iter().map(|r| r.iter().map(|x| x * factor).collect()).collect();
        ProjectedClass {
            delta_block: scale(&self.delta_block),
            pi_block: scale(&self.pi_block),
            delta_base: scale(&self.delta_base),
            pi_base: scale(&self.pi_base),
            vector_base: self.vector_base.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionComplexity {
    pub lambda: f64,
    pub theta: f64,
    pub d: f64,
    pub s1: usize,
}

pub fn projection_complexity(pc: &ProjectedClass) -> ProjectionComplexity {
    let m = pc.vectors.len();
    let levels = pc.levels();
    let mut lambda = 0.0f64;
    let mut theta = 0.0f64;
    for v in 0..m {
        let mut l = pc.pi_block[0][v];
        let mut t = 2f64.powf(pc.s0 as f64 / 2.0) * pc.pi_base[0][v];
        for k in 0..levels - 1 {
            l += pc.delta_block[k][v];
            t += 2f64.powf((pc.s0 + k) as f64 / 2.0) * pc.delta_base[k][v];
        }
        lambda = lambda.max(l);
        theta = theta.max(t);
    }
    let d = pc.vector_base.iter().fold(0.0f64, |a, b| a.max(*b));
    let s1 = (1..levels)
        .find(|&k| pc.j[k] == pc.n + 1)
        .map(|k| pc.s0 + k)
        .unwrap_or(pc.s0 + 1);
    ProjectionComplexity { lambda, theta, d, s1 }
}

/// A violated inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub bullet: String,
    pub s: usize,
    pub v: usize,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub pass: bool,
    pub checked: usize,
    pub first_violation: Option<Violation>,
}

struct Checker {
    checked: usize,
    first: Option<Violation>,
}

impl Checker {
    fn new() -> Self {
        Checker { checked: 0, first: None }
    }

    fn check(&mut self, bullet: &str, s: usize, v: usize, p: f64, lhs: f64, rhs: f64) {
        self.checked += 1;
        if self.first.is_none() && lhs > rhs * (1.0 + CHECK_RTOL) {
            self.first = Some(Violation { bullet: bullet.into(), s, v, p, lhs, rhs });
        }
    }

    fn report(self) -> AssumptionReport {
        AssumptionReport { pass: self.first.is_none(), checked: self.checked, first_violation: self.first }
    }
}

/// Head sums below `j_s` and `2p`-tails from `j_s` for every `Delta_s v`
/// and `pi_s v`.
pub fn check_assumption_a(pc: &ProjectedClass, p: f64) -> AssumptionReport {
    check_structure(pc, &[p], false)
}

/// The `p = 1` and `p = 2` bullets with tails from `j_{s-1}`
/// (`j_{s0-1} = j_{s0}`), plus the `nu_s` bullet.
pub fn check_assumption_b(pc: &ProjectedClass) -> AssumptionReport {
    check_structure(pc, &[1.0, 2.0], true)
}

fn check_structure(pc: &ProjectedClass, ps: &[f64], overlap: bool) -> AssumptionReport {
    let mut c = Checker::new();
    let nf = pc.n as f64;
    let d = projection_complexity(pc).d;
    for k in 0..pc.levels() {
        let s = pc.s0 + k;
        let js = pc.j[k];
        let tail_from = if overlap && k > 0 { pc.j[k - 1] } else { js };
        for v in 0..pc.vectors.len() {
            let pi_sorted = rearrange(pc.pi(k, v));
            c.check("pi_head", s, v, 2.0, block_l2(&pi_sorted, 1, js), pc.pi_block[k][v]);
            for &p in ps {
                let rhs = pc.pi_base[k][v] * nf.powf(1.0 / (2.0 * p));
                c.check("pi_tail", s, v, p, tail_norm(&pi_sorted, tail_from, p), rhs);
            }
            if overlap {
                let lo = if k > 0 { pc.j[k - 1] } else { js };
                c.check("pi_block_nu", s, v, 2.0, block_l2(&pi_sorted, lo, js), d * pc.nu[k]);
            }
            if k + 1 < pc.levels() {
                let dl = rearrange(&pc.delta(k, v));
                c.check("delta_head", s, v, 2.0, block_l2(&dl, 1, js), pc.delta_block[k][v]);
                for &p in ps {
                    let rhs = pc.delta_base[k][v] * nf.powf(1.0 / (2.0 * p));
                    c.check("delta_tail", s, v, p, tail_norm(&dl, tail_from, p), rhs);
                }
            }
        }
    }
    c.report()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBound {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `sup_v ||v||_2 <= Lambda(V) + d(V) (sqrt(N) + sum_{s=s0}^{s1-1} nu_s)`.
pub fn ell2_radius_bound(pc: &ProjectedClass) -> RadiusBound {
    let cx = projection_complexity(pc);
    let lhs = pc.vectors.iter().map(|v| lp_norm(v, 2.0)).fold(0.0, f64::max);
    let nu_sum: f64 = pc.nu[..cx.s1 - pc.s0].iter().sum();
    let rhs = cx.lambda + cx.d * ((pc.n as f64).sqrt() + nu_sum);
    RadiusBound { lhs, rhs, pass: lhs <= rhs * (1.0 + CHECK_RTOL) }
}

/// The two lines of the split of `sum_i eps_i w_i v_i` into large and small
/// coordinates, with the exact quantities they bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderSplit {
    /// `2 (sum_{i<=k} (w_i^*)^2)^{1/2} (sum_{i<=k} (v_i^*)^2)^{1/2}`.
    pub head_bound: f64,
    /// `(sum_{i>k} (w_i^*)^{2r})^{1/2r} (sum_{i>k} (v_i^*)^{2r'})^{1/2r'}`.
    pub tail_bound: f64,
    /// `sum_{i in I} |w_i v_i|`.
    pub head_exact: f64,
    /// `(sum_{i notin I} (w_i v_i)^2)^{1/2}`.
    pub tail_exact: f64,
    /// `I`: the union of the top-`k` index sets of `|w|` and `|v|`, ascending.
    pub index_set: Vec<usize>,
}

pub fn holder_split(w: &[f64], v: &[f64], k: usize, r: f64) -> Result<HolderSplit> {
    if w.len() != v.len() {
        return invalid("w and v must have the same length");
    }
    if !(r > 1.0 && r.is_finite()) {
        return invalid(format!("r must be a finite number > 1, got {r}"));
    }
    let n = w.len();
    let rp = r / (r - 1.0);
    let k = k.min(n);
    let mut in_i = vec![false; n];
    for &i in magnitude_order(w).iter().take(k).chain(magnitude_order(v).iter().take(k)) {
        in_i[i] = true;
    }
    let index_set: Vec<usize> = (0..n).filter(|&i| in_i[i]).collect();
    let ws = rearrange(w);
    let vs = rearrange(v);
    let head_bound = 2.0 * lp_norm(&ws[..k], 2.0) * lp_norm(&vs[..k], 2.0);
    let tail_bound = lp_norm(&ws[k..], 2.0 * r) * lp_norm(&vs[k..], 2.0 * rp);
    let head_exact = index_set.iter().map(|&i| (w[i] * v[i]).abs()).sum();
    let outside: Vec<f64> = (0..n).filter(|&i| !in_i[i]).map(|i| w[i] * v[i]).collect();
    let tail_exact = lp_norm(&outside, 2.0);
    Ok(HolderSplit { head_bound, tail_bound, head_exact, tail_exact, index_set })
}

/// `2 ||z||_2 Lambda + t Theta N^{1/2r'} (sum_{i >= j_{s0}} (z_i^*)^{2r})^{1/2r}`.
pub fn multiplier_bound_rhs(z: &[f64], lambda: f64, theta: f64, j_s0: usize, r: f64, t: f64) -> Result<f64> {
    if !(r > 1.0) {
        return invalid(format!("r must be > 1, got {r}"));
    }
    let rp = r / (r - 1.0);
    let n = z.len() as f64;
    let zs = rearrange(z);
    let tail = tail_norm(&zs, j_s0, r);
    Ok(2.0 * lp_norm(z, 2.0) * lambda + t * theta * n.powf(1.0 / (2.0 * rp)) * tail)
}

/// Complexities of one set for [`product_bound_rhs`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetComplexity {
    pub lambda: f64,
    pub theta: f64,
    pub d: f64,
}

impl From<ProjectionComplexity> for SetComplexity {
    fn from(c: ProjectionComplexity) -> Self {
        SetComplexity { lambda: c.lambda, theta: c.theta, d: c.d }
    }
}

/// `c2 (L_V L_W + sqrt(N)(d_W L_V + d_V L_W)) + c2 t sqrt(N) (d_W Th_V + d_V Th_W)`.
pub fn product_bound_rhs(v: SetComplexity, w: SetComplexity, n: usize, t: f64, c2: f64) -> f64 {
    let sn = (n as f64).sqrt();
    c2 * (v.lambda * w.lambda + sn * (w.d * v.lambda + v.d * w.lambda))
        + c2 * t * sn * (w.d * v.theta + v.d * w.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn instance(vs: Vec<Vec<f64>>, s0: usize, js: &[usize]) -> ProjectedClass {
        ProjectedClass::greedy_equality(vs, s0, js, BaseSeminorm::NormalizedL2L4).unwrap()
    }

    #[test]
    fn singleton_class() {
        let v = vec![3.0, -4.0, 0.0];
        let pc = instance(vec![v.clone()], 0, &[2]);
        let cx = projection_complexity(&pc);
        assert_eq!(pc.levels(), 1);
        assert!((cx.lambda - 5.0).abs() < 1e-12);
        assert!((cx.theta - BaseSeminorm::NormalizedL2L4.eval(&v)).abs() < 1e-12);
        let rb = ell2_radius_bound(&pc);
        assert!((rb.lhs - 5.0).abs() < 1e-12);
        assert!(rb.pass);
    }

    #[test]
    fn zero_class() {
        let pc = instance(vec![vec![0.0; 4], vec![0.0; 4]], 0, &[1]);
        let cx = projection_complexity(&pc);
        assert_eq!((cx.lambda, cx.theta, cx.d), (0.0, 0.0, 0.0));
        let rb = ell2_radius_bound(&pc);
        assert_eq!((rb.lhs, rb.rhs), (0.0, 0.0));
        assert!(rb.pass);
    }

    #[test]
    fn equality_instances_pass_and_halving_fails() {
        let vs: Vec<Vec<f64>> = (0..7)
            .map(|a| (0..9).map(|b| ((a * 7 + b * 3) % 11) as f64 - 5.0).collect())
            .collect();
        let pc = instance(vs, 0, &[2, 4, 6]);
        assert!(check_assumption_b(&pc).pass);
        for p in [1.0, 2.0] {
            assert!(check_assumption_a(&pc, p).pass);
        }
        let half = pc.with_scaled_seminorms(0.5);
        let rep = check_assumption_b(&half);
        assert!(!rep.pass);
        let w = rep.first_violation.unwrap();
        assert!(w.lhs > w.rhs);
    }

    #[test]
    fn doubling_seminorms_doubles_complexity() {
        let vs = vec![vec![1.0, 2.0, -1.0], vec![0.5, 0.0, 3.0], vec![-2.0, 1.0, 1.0]];
        let pc = instance(vs, 0, &[2]);
        let a = projection_complexity(&pc);
        let b = projection_complexity(&pc.with_scaled_seminorms(2.0));
        assert_eq!(b.lambda, 2.0 * a.lambda);
        assert_eq!(b.theta, 2.0 * a.theta);
        assert_eq!(b.d, 2.0 * a.d);
    }

    #[test]
    fn holder_examples() {
        let w = [1.0, 0.0, 2.0, 0.0];
        let v = [0.0, 3.0, 0.0, 1.0];
        let h = holder_split(&w, &v, 1, 2.0).unwrap();
        assert_eq!(h.head_exact, 0.0);
        let ones = vec![1.0; 8];
        let h = holder_split(&ones, &ones, 4, 2.0).unwrap();
        assert_eq!(h.index_set, vec![0, 1, 2, 3]);
        assert_eq!(h.head_bound, 8.0);
        assert_eq!(h.head_exact, 4.0);
        let h = holder_split(&ones, &ones, 20, 2.0).unwrap();
        assert_eq!(h.tail_bound, 0.0);
        assert_eq!(h.tail_exact, 0.0);
        assert!(holder_split(&ones, &ones, 1, 1.0).is_err());
    }

    #[test]
    fn multiplier_rhs_examples() {
        assert_eq!(multiplier_bound_rhs(&[0.0; 5], 2.0, 3.0, 1, 2.0, 4.0).unwrap(), 0.0);
        let z = [3.0, -4.0];
        assert_eq!(multiplier_bound_rhs(&z, 2.0, 0.0, 1, 2.0, 4.0).unwrap(), 20.0);
        // j = 2 keeps only z^*_2 = 3: tail = 3, N^{1/4} = 2^{1/4}
        let v = multiplier_bound_rhs(&z, 0.0, 1.0, 2, 2.0, 1.0).unwrap();
        assert!((v - 3.0 * 2f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn product_rhs_examples() {
        let zero = SetComplexity { lambda: 0.0, theta: 0.0, d: 0.0 };
        assert_eq!(product_bound_rhs(zero, zero, 100, 5.0, 1.0), 0.0);
        let a = SetComplexity { lambda: 2.0, theta: 3.0, d: 0.5 };
        let n = 16;
        let expect = 4.0 + 2.0 * 4.0 * 0.5 * 2.0 + 2.0 * 5.0 * 4.0 * 0.5 * 3.0;
        assert!((product_bound_rhs(a, a, n, 5.0, 1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let pc = instance(vec![vec![1.0, 2.0], vec![0.0, -1.0]], 0, &[2]);
        let s = serde_json::to_string(&pc).unwrap();
        let back: ProjectedClass = serde_json::from_str(&s).unwrap();
        assert_eq!(back, pc);
    }

    fn arb_class() -> impl Strategy<Value = (Vec<Vec<f64>>, usize, Vec<usize>)> {
        (1usize..24, 1usize..12).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(prop::collection::vec(-4.0f64..4.0, n), m),
                0usize..3,
                prop::collection::vec(1usize..=n + 1, 1..5),
            )
        })
    }

    proptest! {
        #[test]
        fn radius_lemma_holds((vs, s0, js) in arb_class()) {
            let pc = instance(vs, s0, &js);
            prop_assert!(check_assumption_b(&pc).pass);
            let rb = ell2_radius_bound(&pc);
            prop_assert!(rb.pass, "{:?}", rb);
        }

        #[test]
        fn holder_inequalities(
            wv in (1usize..40).prop_flat_map(|n| (
                prop::collection::vec(-5.0f64..5.0, n),
                prop::collection::vec(-5.0f64..5.0, n),
                0usize..=n,
            )),
            ri in 0usize..3,
        ) {
            let (w, v, k) = wv;
            let r = [4.0 / 3.0, 2.0, 4.0][ri];
            let h = holder_split(&w, &v, k, r).unwrap();
            prop_assert!(h.index_set.len() <= 2 * k);
            prop_assert!(h.head_exact <= h.head_bound * (1.0 + 1e-9));
            prop_assert!(h.tail_exact <= h.tail_bound * (1.0 + 1e-9));
        }

        #[test]
        fn complexity_is_monotone_in_seminorms((vs, s0, js) in arb_class(), f in 1.0f64..3.0) {
            let pc = instance(vs, s0, &js);
            let a = projection_complexity(&pc);
            let b = projection_complexity(&pc.with_scaled_seminorms(f));
            prop_assert!(b.lambda >= a.lambda && b.theta >= a.theta && b.d >= a.d);
        }

        #[test]
        fn product_rhs_scaling(lv in 0.0f64..5.0, lw in 0.0f64..5.0, a in 0.5f64..4.0, b in 0.5f64..4.0) {
            let v = SetComplexity { lambda: lv, theta: 0.0, d: 0.0 };
            let w = SetComplexity { lambda: lw, theta: 0.0, d: 0.0 };
            let vs = SetComplexity { lambda: a * lv, ..v };
            let ws = SetComplexity { lambda: b * lw, ..w };
            let base = product_bound_rhs(v, w, 10, 5.0, 1.0);
            let scaled = product_bound_rhs(vs, ws, 10, 5.0, 1.0);
            prop_assert!((scaled - a * b * base).abs() <= 1e-12 * scaled.max(1.0));
        }
    }
}
