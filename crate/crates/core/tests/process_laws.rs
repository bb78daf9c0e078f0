//! Simulator outputs against exact laws.

use chainbound::dist::Dist;
use chainbound::processes::{
    bernoulli_multiplier_sup, empirical_sup, exhaustive_bernoulli_law, multiplier_sup, product_sup, quadratic_sup,
    sample_projection, EnsembleKind, EnsembleSpec, MultiplierSpec,
};
use chainbound::rng::child_seed;
use chainbound::stats::{mean_stderr, sorted};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn gauss(dim: usize) -> EnsembleSpec {
    EnsembleSpec::new(EnsembleKind::Gaussian, dim).unwrap()
}

fn trials<F: Fn(u64) -> f64>(n: usize, tag: &str, f: F) -> Vec<f64> {
    (0..n as u64).map(|k| f(child_seed(11, tag, k))).collect()
}

#[test]
fn singleton_empirical_sup_is_folded_normal() {
    let t = vec![0.6, -0.8, 1.0];
    let sigma = (2.0f64).sqrt();
    let n = 16;
    let xs = sorted(&trials(10_000, "ks", |s| {
        (n as f64).sqrt() * empirical_sup(std::slice::from_ref(&t), &gauss(3), n, s).unwrap()
    }));
    let normal = Normal::new(0.0, sigma).unwrap();
    let m = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 2.0 * normal.cdf(x) - 1.0;
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov-Smirnov statistic.
    assert!(d < 1.628 / m.sqrt(), "KS statistic {d}");
}

#[test]
fn gaussian_multiplier_matches_product_normal_moments() {
    let t = vec![2.0, 0.0];
    let n = 4;
    let mult = MultiplierSpec::Independent { dist: Dist::gaussian() };
    let s = trials(200_000, "product-normal", |seed| {
        (n as f64).sqrt() * multiplier_sup(std::slice::from_ref(&t), &gauss(2), &mult, n, seed).unwrap()
    });
    // S = N^{-1/2} sum xi_i g_i ||t||: E S^2 = ||t||^2, E S^4 = (3 + 6/N) ||t||^4.
    let (m2, se2) = mean_stderr(&s.iter().map(|x| x.powi(2)).collect::<Vec<_>>());
    let (m4, se4) = mean_stderr(&s.iter().map(|x| x.powi(4)).collect::<Vec<_>>());
    assert!((m2 - 4.0).abs() < 4.0 * se2, "{m2} +- {se2}");
    assert!((m4 - 4.5 * 16.0).abs() < 4.0 * se4, "{m4} +- {se4}");
}

#[test]
fn gaussian_quadratic_matches_chi_square_moments() {
    let t = vec![0.0, 1.5];
    let n = 6;
    let nf = n as f64;
    let s = trials(200_000, "chi-square", |seed| nf * quadratic_sup(std::slice::from_ref(&t), &gauss(2), n, seed).unwrap());
    let scale = 1.5f64.powi(2);
    // N sup = |chi2_N - N| ||t||^2; central moments 2N and 12N(N + 4).
    let (m2, se2) = mean_stderr(&s.iter().map(|x| (x / scale).powi(2)).collect::<Vec<_>>());
    let (m4, se4) = mean_stderr(&s.iter().map(|x| (x / scale).powi(4)).collect::<Vec<_>>());
    assert!((m2 - 2.0 * nf).abs() < 4.0 * se2, "{m2} +- {se2}");
    assert!((m4 - 12.0 * nf * (nf + 4.0)).abs() < 4.0 * se4, "{m4} +- {se4}");
}

#[test]
fn isotropy_of_projection_columns() {
    let class = vec![vec![1.0, 2.0, -1.0], vec![0.0, 0.5, 0.0]];
    let e = EnsembleSpec::new(EnsembleKind::Rademacher, 3).unwrap();
    let v = sample_projection(&class, &e, 100_000, 5).unwrap();
    for (t, row) in class.iter().zip(&v) {
        let (m, se) = mean_stderr(&row.iter().map(|x| x * x).collect::<Vec<_>>());
        let target: f64 = t.iter().map(|x| x * x).sum();
        assert!((m - target).abs() < 3.0 * se.max(1e-12), "{m} vs {target}");
    }
}

#[test]
fn single_coordinate_bernoulli() {
    for (z, v) in [(2.0, -3.0), (-0.5, 4.0)] {
        assert_eq!(bernoulli_multiplier_sup(&[vec![v]], &[z], &[1.0]), (z * v).abs());
        assert_eq!(bernoulli_multiplier_sup(&[vec![v]], &[z], &[-1.0]), (z * v).abs());
        let law = exhaustive_bernoulli_law(&[vec![v]], &[z]).unwrap();
        assert_eq!(law.quantile(0.5), (z * v).abs());
    }
    assert_eq!(bernoulli_multiplier_sup(&[vec![0.0; 3]], &[1.0, 2.0, 3.0], &[1.0, -1.0, 1.0]), 0.0);
}

#[test]
fn coordinate_multiplier_on_a_singleton_is_the_quadratic_process() {
    let t = vec![0.3, -1.1, 0.7, 0.2];
    let e = EnsembleSpec::new(EnsembleKind::Laplace, 4).unwrap();
    let m = MultiplierSpec::Coordinate { theta: t.clone() };
    for seed in 100..140 {
        let a = multiplier_sup(std::slice::from_ref(&t), &e, &m, 33, seed).unwrap();
        let b = quadratic_sup(std::slice::from_ref(&t), &e, 33, seed).unwrap();
        let c = product_sup(std::slice::from_ref(&t), std::slice::from_ref(&t), &e, 33, seed).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }
}

fn arb_class() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sups_scale_with_the_class(class in arb_class(), k in -3i32..4, seed in 0u64..1000) {
        let lam = 2f64.powi(k);
        let scaled: Vec<Vec<f64>> = class.iter().map(|t| t.iter().map(|x| x * lam).collect()).collect();
        let e = EnsembleSpec::new(EnsembleKind::Exponential, 3).unwrap();
        let m = MultiplierSpec::Independent { dist: Dist::gaussian() };
        prop_assert_eq!(lam * empirical_sup(&class, &e, 20, seed).unwrap(), empirical_sup(&scaled, &e, 20, seed).unwrap());
        prop_assert_eq!(lam * multiplier_sup(&class, &e, &m, 20, seed).unwrap(), multiplier_sup(&scaled, &e, &m, 20, seed).unwrap());
        prop_assert_eq!(lam * lam * quadratic_sup(&class, &e, 20, seed).unwrap(), quadratic_sup(&scaled, &e, 20, seed).unwrap());
    }

    #[test]
    fn general_scaling_within_rounding(class in arb_class(), lam in 0.01f64..100.0, seed in 0u64..1000) {
        let scaled: Vec<Vec<f64>> = class.iter().map(|t| t.iter().map(|x| x * lam).collect()).collect();
        let a = lam * empirical_sup(&class, &gauss(3), 15, seed).unwrap();
        let b = empirical_sup(&scaled, &gauss(3), 15, seed).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()) + 1e-300);
    }

    #[test]
    fn sups_are_nonnegative_and_replayable(class in arb_class(), seed in any::<u64>()) {
        let e = EnsembleSpec::new(EnsembleKind::Student { q: 5.0 }, 3).unwrap();
        let a = quadratic_sup(&class, &e, 12, seed).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, quadratic_sup(&class, &e, 12, seed).unwrap());
        let p = product_sup(&class, &class, &e, 12, seed).unwrap();
        prop_assert!(p >= a);
    }
}
