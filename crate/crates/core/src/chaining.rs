//! Admissible sequences and the `gamma_{s0,alpha}` functionals on finite
//! (semi)metric spaces.
//!
//! An admissible sequence holds one subset per level `s` with `|T_0| = 1` and
//! `|T_s| <= 2^{2^s}`. Levels are built independently (no nesting), each by
//! farthest-first traversal under that level's distance. The last level
//! `s_max` is the least `s` whose budget covers every point, so it equals the
//! whole space and every later term of a chaining sum vanishes.
//!
//! All tie-breaks go to the lowest point index, which makes every output a
//! deterministic function of the distance matrix.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest space accepted by the exhaustive enumerations.
pub const BRUTEFORCE_MAX_POINTS: usize = 6;

/// Cardinality budget of level `s`: 1 for `s = 0`, `2^{2^s}` afterwards
/// (saturating at `usize::MAX`).
pub fn level_budget(s: usize) -> usize {
    if s == 0 {
        return 1;
    }
    if s >= 6 {
        return usize::MAX;
    }
    1usize << (1u32 << s)
}

/// Least `s` with `level_budget(s) >= m`.
pub fn s_max_for(m: usize) -> usize {
    (0..).find(|&s| level_budget(s) >= m).expect("budgets are unbounded")
}

/// `m` points with a symmetric, nonnegative distance matrix and zero diagonal.
/// The triangle inequality is not required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    m: usize,
    d: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Builds from a row-major `m x m` matrix.
    pub fn new(m: usize, d: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return invalid("a metric space needs at least one point");
        }
        if d.len() != m * m {
            return invalid(format!("distance matrix has {} entries, expected {}", d.len(), m * m));
        }
        for i in 0..m {
            if d[i * m + i] != 0.0 {
                return invalid(format!("d({i},{i}) = {} is not zero", d[i * m + i]));
            }
            for j in 0..m {
                let x = d[i * m + j];
                if !x.is_finite() || x < 0.0 {
                    return invalid(format!("d({i},{j}) = {x} is not a finite nonnegative number"));
                }
                if x != d[j * m + i] {
                    return invalid(format!("distance matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(FiniteMetricSpace { m, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return invalid("distance matrix must be square");
        }
        Self::new(m, rows.concat())
    }

    /// Pairwise distances `dist(points[i], points[j])`; the diagonal is forced
    /// to zero and only the upper triangle is evaluated, so the result is
    /// exactly symmetric.
    pub fn from_points<P, F>(points: &[P], mut dist: F) -> Result<Self>
    where
        F: FnMut(&P, &P) -> f64,
    {
        let m = points.len();
        let mut d = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let x = dist(&points[i], &points[j]);
                d[i * m + j] = x;
                d[j * m + i] = x;
            }
        }
        Self::new(m, d)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.m + j]
    }

    /// Every distance multiplied by `lambda >= 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.m, self.d.iter().map(|x| x * lambda).collect())
    }

    /// The subspace on the given point indices.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let k = idx.len();
        let mut d = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                d.push(self.dist(i, j));
            }
        }
        Self::new(k, d)
    }
}

/// A family of distances indexed by the level `s`.
pub trait LevelMetric {
    fn len(&self) -> usize;
    fn dist(&self, s: usize, i: usize, j: usize) -> f64;
}

impl LevelMetric for FiniteMetricSpace {
    fn len(&self) -> usize {
        self.m
    }

    fn dist(&self, _s: usize, i: usize, j: usize) -> f64 {
        FiniteMetricSpace::dist(self, i, j)
    }
}

/// One distance matrix per level; levels past the end reuse the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct PerLevelMetric {
    levels: Vec<FiniteMetricSpace>,
}

impl PerLevelMetric {
    pub fn new(levels: Vec<FiniteMetricSpace>) -> Result<Self> {
        let Some(first) = levels.first() else {
            return invalid("at least one level is required");
        };
        if levels.iter().any(|l| l.len() != first.len()) {
            return invalid("all levels must have the same number of points");
        }
        Ok(PerLevelMetric { levels })
    }

    pub fn level(&self, s: usize) -> &FiniteMetricSpace {
        &self.levels[s.min(self.levels.len() - 1)]
    }
}

impl LevelMetric for PerLevelMetric {
    fn len(&self) -> usize {
        self.levels[0].len()
    }

    fn dist(&self, s: usize, i: usize, j: usize) -> f64 {
        self.level(s).dist(i, j)
    }
}

/// One level of an admissible sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    /// Point indices in `T_s`, ascending.
    pub members: Vec<usize>,
    /// `nearest[t]` is `pi_s(t)`, a member of `T_s`; members map to themselves.
    pub nearest: Vec<usize>,
}

/// Levels `0..=s_max` of an admissible sequence over `m` points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleSequence {
    m: usize,
    levels: Vec<Level>,
}

impl AdmissibleSequence {
    /// Validates cardinality budgets, membership of the maps and that the
    /// final level is the whole space with identity maps.
    pub fn new(m: usize, levels: Vec<Level>) -> Result<Self> {
        let s_max = s_max_for(m);
        if levels.len() != s_max + 1 {
            return invalid(format!("expected {} levels for {m} points, got {}", s_max + 1, levels.len()));
        }
        for (s, level) in levels.iter().enumerate() {
            if level.members.is_empty() || level.members.len() > level_budget(s) {
                return invalid(format!("level {s} has {} members (budget {})", level.members.len(), level_budget(s)));
            }
            if level.members.windows(2).any(|w| w[0] >= w[1]) || level.members.iter().any(|&c| c >= m) {
                return invalid(format!("level {s} members must be distinct ascending indices < {m}"));
            }
            if level.nearest.len() != m || level.nearest.iter().any(|c| level.members.binary_search(c).is_err()) {
                return invalid(format!("level {s} maps points outside T_{s}"));
            }
        }
        let last = &levels[s_max];
        if last.members.len() != m || last.nearest.iter().enumerate().any(|(i, &c)| i != c) {
            return invalid("the last level must be the whole space with identity maps");
        }
        Ok(AdmissibleSequence { m, levels })
    }

    /// Builds levels from member sets, mapping each point to its nearest member
    /// under the level distance.
    pub fn from_members<M: LevelMetric + ?Sized>(metric: &M, members: Vec<Vec<usize>>) -> Result<Self> {
        let levels = members
            .into_iter()
            .enumerate()
            .map(|(s, mut mem)| {
                mem.sort_unstable();
                mem.dedup();
                let nearest = nearest_map(metric, s, &mem);
                Level { members: mem, nearest }
            })
            .collect();
        Self::new(metric.len(), levels)
    }

    pub fn len_points(&self) -> usize {
        self.m
    }

    pub fn s_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// `pi_s(t)`; levels past `s_max` are the identity.
    pub fn pi(&self, s: usize, t: usize) -> usize {
        match self.levels.get(s) {
            Some(level) => level.nearest[t],
            None => t,
        }
    }
}

fn nearest_map<M: LevelMetric + ?Sized>(metric: &M, s: usize, members: &[usize]) -> Vec<usize> {
    (0..metric.len())
        .map(|t| {
            // Members map to themselves even when another member is at
            // distance zero.
            if members.binary_search(&t).is_ok() {
                return t;
            }
            let mut best = members[0];
            let mut best_d = metric.dist(s, t, best);
            for &c in &members[1..] {
                let d = metric.dist(s, t, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// The point minimising the sum of level-`s` distances (lowest index on ties).
fn one_median<M: LevelMetric + ?Sized>(metric: &M, s: usize) -> usize {
    let m = metric.len();
    let mut best = 0;
    let mut best_sum = f64::INFINITY;
    for i in 0..m {
        let sum: f64 = (0..m).map(|j| metric.dist(s, i, j)).sum();
        if sum < best_sum {
            best = i;
            best_sum = sum;
        }
    }
    best
}

/// Farthest-first traversal for `k` centres at level `s`, seeded at the
/// 1-median.
pub fn farthest_first<M: LevelMetric + ?Sized>(metric: &M, s: usize, k: usize) -> Vec<usize> {
    let m = metric.len();
    let k = k.min(m).max(1);
    let seed = one_median(metric, s);
    let mut centers = vec![seed];
    let mut gap: Vec<f64> = (0..m).map(|j| metric.dist(s, j, seed)).collect();
    let mut chosen = vec![false; m];
    chosen[seed] = true;
    while centers.len() < k {
        let mut next = None;
        let mut far = f64::NEG_INFINITY;
        for j in 0..m {
            if !chosen[j] && gap[j] > far {
                far = gap[j];
                next = Some(j);
            }
        }
        let c = next.expect("fewer centres than points");
        chosen[c] = true;
        centers.push(c);
        for j in 0..m {
            gap[j] = gap[j].min(metric.dist(s, j, c));
        }
    }
    centers.sort_unstable();
    centers
}

/// Greedy admissible sequence: level `s` gets `min(2^{2^s}, m)` farthest-first
/// centres under the level-`s` distance and nearest-point maps under the same
/// distance.
pub fn greedy_admissible<M: LevelMetric + ?Sized>(metric: &M) -> AdmissibleSequence {
    let m = metric.len();
    let s_max = s_max_for(m);
    let members = (0..=s_max)
        .map(|s| {
            let k = level_budget(s).min(m);
            if k == m {
                (0..m).collect()
            } else {
                farthest_first(metric, s, k)
            }
        })
        .collect();
    AdmissibleSequence::from_members(metric, members).expect("greedy levels respect the budgets")
}

/// Value of a chaining sum for one sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainValue {
    pub value: f64,
    /// Set when `s0 > s_max`: every term vanishes and the value is 0.
    pub s0_beyond_levels: bool,
}

/// `sup_t sum_{s >= s0} 2^{s/alpha} d_s(t, pi_s t)` for a fixed sequence.
pub fn evaluate_chain<M: LevelMetric + ?Sized>(
    metric: &M,
    seq: &AdmissibleSequence,
    alpha: f64,
    s0: usize,
) -> ChainValue {
    let s_max = seq.s_max();
    if s0 > s_max {
        return ChainValue { value: 0.0, s0_beyond_levels: true };
    }
    let value = (0..seq.len_points())
        .map(|t| {
            (s0..s_max)
                .map(|s| 2f64.powf(s as f64 / alpha) * metric.dist(s, t, seq.pi(s, t)))
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    ChainValue { value, s0_beyond_levels: false }
}

/// Inner sup-sum of `gamma_{s0,alpha}` for one admissible sequence.
pub fn evaluate_gamma(space: &FiniteMetricSpace, seq: &AdmissibleSequence, alpha: f64, s0: usize) -> ChainValue {
    evaluate_chain(space, seq, alpha, s0)
}

/// Upper bound on `gamma_{s0,alpha}` from the greedy sequence.
pub fn gamma_upper(space: &FiniteMetricSpace, alpha: f64, s0: usize) -> f64 {
    evaluate_gamma(space, &greedy_admissible(space), alpha, s0).value
}

/// Exact `gamma_{s0,alpha}` by enumeration; refuses more than six points.
pub fn gamma_bruteforce(space: &FiniteMetricSpace, alpha: f64, s0: usize) -> Result<f64> {
    bruteforce_infimum(space, alpha, s0)
}

/// Exact infimum over admissible sequences of the chaining sum with
/// level-dependent distances.
///
/// A larger `T_s` can only shrink `d_s(t, T_s)`, so it suffices to enumerate
/// member sets of exactly `min(2^{2^s}, m)` points at each contributing level
/// `s0 <= s < s_max`.
pub fn bruteforce_infimum<M: LevelMetric + ?Sized>(metric: &M, alpha: f64, s0: usize) -> Result<f64> {
    let m = metric.len();
    if m > BRUTEFORCE_MAX_POINTS {
        return Err(Error::TooLarge(format!(
            "exhaustive enumeration supports at most {BRUTEFORCE_MAX_POINTS} points, got {m}"
        )));
    }
    let s_max = s_max_for(m);
    if s0 >= s_max {
        return Ok(0.0);
    }
    let choices: Vec<Vec<Vec<usize>>> =
        (s0..s_max).map(|s| combinations(m, level_budget(s).min(m))).collect();
    // Precompute d_s(t, T) for each candidate set.
    let gaps: Vec<Vec<Vec<f64>>> = choices
        .iter()
        .enumerate()
        .map(|(k, sets)| {
            let s = s0 + k;
            sets.iter()
                .map(|set| {
                    (0..m)
                        .map(|t| set.iter().map(|&c| metric.dist(s, t, c)).fold(f64::INFINITY, f64::min))
                        .collect()
                })
                .collect()
        })
        .collect();
    let weights: Vec<f64> = (s0..s_max).map(|s| 2f64.powf(s as f64 / alpha)).collect();
    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; gaps.len()];
    loop {
        let value = (0..m)
            .map(|t| {
                pick.iter()
                    .enumerate()
                    .map(|(k, &c)| weights[k] * gaps[k][c][t])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        best = best.min(value);
        // odometer increment
        let mut k = 0;
        loop {
            if k == pick.len() {
                return Ok(best);
            }
            pick[k] += 1;
            if pick[k] < gaps[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m - k + i {
                cur[i] += 1;
                for j in (i + 1)..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}
