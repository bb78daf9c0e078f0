//! Monte Carlo moment estimators against closed forms.

use chainbound::dist::{exponential_abs_moment, gaussian_abs_moment, Dist, DistKind};
use chainbound::norms::mc_linear_form_lq;
use chainbound::orderstats::{decay_slope, latala_rhs, latala_sum_norms, lq_vector_norm_check};

#[test]
fn linear_form_moments_of_a_coordinate() {
    let ts = vec![vec![1.0, 0.0, 0.0], vec![0.0, -3.0, 0.0], vec![0.0; 3]];
    let ps = [1.0, 2.0, 4.0];
    let out = mc_linear_form_lq(&ts, &Dist::exponential(), &ps, 400_000, 3).unwrap();
    for (k, p) in ps.iter().enumerate() {
        let exact = exponential_abs_moment(*p);
        assert!((out[0][k] / exact - 1.0).abs() < 0.02, "p={p}: {} vs {exact}", out[0][k]);
        assert!((out[1][k] / (3.0 * exact) - 1.0).abs() < 0.02);
        assert_eq!(out[2][k], 0.0);
    }
}

#[test]
fn linear_form_of_gaussians_is_gaussian() {
    let t = vec![0.6, 0.8];
    let out = mc_linear_form_lq(&[t], &Dist::gaussian(), &[3.0], 400_000, 8).unwrap();
    assert!((out[0][0] / gaussian_abs_moment(3.0) - 1.0).abs() < 0.02);
}

#[test]
fn latala_single_summand() {
    // m = 1: the sum is W itself, so the Monte Carlo norm is ||W||_{L_r}.
    let w = Dist::from(DistKind::GaussianSquared);
    let mc = latala_sum_norms(&w, 1, &[1.0, 2.0], 400_000, 4).unwrap();
    assert!((mc[0] - 1.0).abs() < 0.01);
    assert!((mc[1] / 3f64.sqrt() - 1.0).abs() < 0.02);
    let e = Dist::exponential();
    let rhs = latala_rhs(1, 2.0, |s| e.abs_moment(s).unwrap()).unwrap();
    let lhs = exponential_abs_moment(2.0);
    assert!(lhs / rhs <= 8.0 && rhs / lhs <= 8.0);
}

#[test]
fn latala_sum_grows_linearly_for_small_r() {
    // ||sum of m exponentials||_{L_1} = m.
    let e = Dist::exponential();
    let mc = latala_sum_norms(&e, 16, &[1.0], 100_000, 9).unwrap();
    assert!((mc[0] / 16.0 - 1.0).abs() < 0.01);
}

#[test]
fn pareto_vector_norm_decays_at_least_quadratically() {
    let d = Dist::new(DistKind::SymmetricPareto { tail: 3.0 }).unwrap().standardized().unwrap();
    let grid: Vec<f64> = (0..16).map(|k| 1.2 * 2f64.powf(k as f64 / 4.0)).collect();
    let rows = lq_vector_norm_check(&d, 2.5, 1024, 20_000, &grid, 6).unwrap();
    let slope = decay_slope(&rows).unwrap();
    assert!(slope <= -2.0, "slope {slope}");
    assert!(rows.windows(2).all(|w| w[1].frequency <= w[0].frequency));
}

#[test]
fn gaussian_vector_norm_rarely_doubles() {
    let rows = lq_vector_norm_check(&Dist::gaussian(), 4.0, 1024, 5_000, &[0.5, 2.0], 2).unwrap();
    assert!(rows[0].frequency > 0.99);
    assert!(rows[1].frequency < 1e-3);
}
