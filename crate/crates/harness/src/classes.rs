//! Class sources: CSV files and seeded random generators.

use std::path::Path;

use rand::Rng;

use chainbound::dist::Dist;
use chainbound::rng::stream;

use crate::HarnessError;

/// Header-free CSV of numbers, one row per line. Blank lines are skipped.
pub fn parse_csv_matrix(text: &str) -> Result<Vec<Vec<f64>>, HarnessError> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| HarnessError::Config(format!("line {}: {cell:?}: {e}", i + 1)))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(HarnessError::Config("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(HarnessError::Config("rows have different lengths".into()));
    }
    Ok(rows)
}

pub fn read_csv_matrix(path: &Path) -> Result<Vec<Vec<f64>>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    parse_csv_matrix(&text)
}

/// `m` vectors in `R^n` with i.i.d. `N(0, 1/n)` entries.
pub fn gaussian_class(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, "gaussian-class", 0);
    let s = Dist::gaussian().sampler();
    let scale = 1.0 / (n as f64).sqrt();
    (0..m)
        .map(|_| {
            let mut t = vec![0.0; n];
            s.fill(&mut rng, &mut t);
            t.iter_mut().for_each(|x| *x *= scale);
            t
        })
        .collect()
}

/// Vertices `{+t_k, -t_k}` of a random symmetric polytope with `m` vertices
/// (`m` even). Each direction is gaussian, restricted to a random support,
/// and its coordinates are rescaled by independent log-uniform factors in
/// `[1/16, 16]`.
pub fn random_polytope(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, "polytope", 0);
    let g = Dist::gaussian().sampler();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m.div_ceil(2) {
        let support = rng.random_range(1..=n);
        let mut t = vec![0.0; n];
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..support {
            let j = rng.random_range(k..n);
            idx.swap(k, j);
            let scale = 16f64.powf(rng.random_range(-1.0..=1.0));
            t[idx[k]] = g.sample(&mut rng) * scale;
        }
        out.push(t.iter().map(|x| -x).collect());
        out.push(t);
    }
    out.truncate(m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_parsing() {
        let m = parse_csv_matrix("0, 1.5\n\n1.5,0\n").unwrap();
        assert_eq!(m, vec![vec![0.0, 1.5], vec![1.5, 0.0]]);
        assert!(parse_csv_matrix("1,2\n3").is_err());
        assert!(parse_csv_matrix("a").is_err());
        assert!(parse_csv_matrix("").is_err());
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(gaussian_class(4, 3, 9), gaussian_class(4, 3, 9));
        assert_ne!(gaussian_class(4, 3, 9), gaussian_class(4, 3, 10));
        let p = random_polytope(6, 5, 1);
        assert_eq!(p.len(), 6);
        for k in 0..3 {
            assert!(p[2 * k].iter().zip(&p[2 * k + 1]).all(|(a, b)| *a == -b));
        }
    }
}
