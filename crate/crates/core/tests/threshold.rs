use hsmdp::quad::{integrate, QuadratureSpec};
use hsmdp::special::norm_pdf;
use hsmdp::threshold::{equiboundary_residual, saddle_point_residual, DEFAULT_ROOT_TOL};
use hsmdp::{
    abos_threshold, comparison_density, equiboundary_solve, mdp_threshold, mills_tail,
    oracle_bayes_risk, saddle_point_threshold, Error, PriorSpec, ThresholdReport,
};
use proptest::prelude::*;

fn cauchy(t: f64) -> f64 {
    comparison_density(&PriorSpec::cauchy(), t).unwrap()
}

#[test]
fn mills_exact_matches_tail_integral() {
    let q = QuadratureSpec::new(1e-300, 1e-13, 500).unwrap();
    for t in [0.5, 1.0, 3.0, 6.0, 12.0] {
        let tail = 2.0 * integrate(norm_pdf, t, t + 40.0, &q).unwrap();
        let (exact, _) = mills_tail(t).unwrap();
        assert!((exact / tail - 1.0).abs() < 1e-11, "{t}: {exact} vs {tail}");
    }
    assert!(matches!(mills_tail(0.0), Err(Error::OutOfDomain { .. })));
}

#[test]
fn mdp_and_universal_examples() {
    assert!(mdp_threshold(10_000).unwrap() > mdp_threshold(1_000).unwrap());
    let n = 1_000_000u64;
    let p0 = (n as f64 / std::f64::consts::E.powi(2)).round() as u64;
    assert!((abos_threshold(n, p0).unwrap() - 2.0).abs() < 1e-5);
    let r = ThresholdReport::new(2000, 10, DEFAULT_ROOT_TOL).unwrap();
    assert!((r.t_mdp * r.t_mdp - (1000.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    assert!(r.t_mdp > 0.0 && r.t_abos > 0.0 && r.t_equiboundary > 0.0);
}

#[test]
fn universal_over_mdp_ratio_band() {
    for k in 3..=6 {
        let n = 10u64.pow(k);
        let a = abos_threshold(n, 1).unwrap();
        let m = mdp_threshold(n).unwrap();
        assert!(m < a + 0.5);
        assert!((1.2..=1.6).contains(&(a / m)), "{n}: {}", a / m);
    }
}

#[test]
fn equiboundary_residual_below_tolerance() {
    let t = equiboundary_solve(10_000, 1e-12).unwrap();
    assert!(equiboundary_residual(t).abs() < 1e-12);
    assert!(t > 1.0 && t < (4.0 * 10_000f64.ln()).sqrt());
    assert!(equiboundary_solve(5, 1e-12).is_err());
}

#[test]
fn equiboundary_matches_mdp_scale_at_ten_thousand() {
    let n = 10_000f64;
    let t = equiboundary_solve(10_000, 1e-12).unwrap();
    let band = 3.0 * n.ln().ln();
    let gap = t * t - (std::f64::consts::PI * n / 2.0).ln();
    assert!(gap.abs() <= band, "t² - ln(πn/2) = {gap}, band {band}");
}

#[test]
fn equiboundary_root_grows_with_n() {
    let a = equiboundary_solve(10_000, 1e-12).unwrap();
    let b = equiboundary_solve(1_000_000, 1e-12).unwrap();
    assert!(b > a, "{b} vs {a}");
}

#[test]
fn saddle_cauchy_constant() {
    let target = (std::f64::consts::PI / 2.0).ln();
    for n in [10_000u64, 1_000_000] {
        let t = saddle_point_threshold(n, 1, cauchy, 1e-12).unwrap();
        let c = t * t - (n as f64).ln();
        assert!((c - target).abs() <= 0.5, "{n}: root² - ln n = {c}");
    }
}

#[test]
fn saddle_residual_and_comparative_static() {
    let t = saddle_point_threshold(2000, 10, cauchy, 1e-12).unwrap();
    let scale = 2.0 * norm_pdf(t);
    assert!(saddle_point_residual(2000, 10, cauchy, t).abs() / scale < 1e-10);
    let t2 = saddle_point_threshold(2000, 10, |x| 2.0 * cauchy(x), 1e-12).unwrap();
    assert!(t2 < t);
    assert!(saddle_point_threshold(10, 10, cauchy, 1e-12).is_err());
}

#[test]
fn testing_rate_below_estimation_rate() {
    for (n, p0) in [(100u64, 10u64), (2000, 10), (1_000_000, 5)] {
        let r = oracle_bayes_risk(n, p0).unwrap();
        let est = p0 as f64 * (n as f64 / p0 as f64).ln() / n as f64;
        assert!(r < est);
        let scaled = r * n as f64 / p0 as f64;
        assert!(scaled > 0.0 && scaled < 1.0);
    }
}

proptest! {
    #[test]
    fn mills_overestimates(t in 0.05f64..30.0) {
        let (e, a) = mills_tail(t).unwrap();
        prop_assert!(a > e && e > 0.0 && e < 1.0);
    }

    #[test]
    fn thresholds_scale_like_sqrt_log(k in 3u32..7) {
        let n = 10u64.pow(k);
        let m = mdp_threshold(n).unwrap();
        prop_assert!((m * m - (std::f64::consts::PI * n as f64 / 2.0).ln()).abs() < 1e-12);
    }
}
