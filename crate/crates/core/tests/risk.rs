use hsmdp::quad::{integrate_pieces, QuadratureSpec};
use hsmdp::risk::{
    cumulative_kl_path, fit_line, laplace_posterior_mean, posterior_mean,
    superefficiency_exponent_for,
};
use hsmdp::{
    abos_threshold, cumulative_kl, null_kl_risk, posterior_summary, signal_kl_risk,
    superefficiency_exponent, Error, PriorKind, PriorSpec,
};
use proptest::prelude::*;

/// Laplace posterior mean by direct quadrature of `θ φ((y-θ)/σ) e^{-|θ|/b}`.
fn laplace_mean_oracle(y: f64, b: f64, sigma: f64) -> f64 {
    let q = QuadratureSpec::new(1e-300, 1e-12, 4000).unwrap();
    let lo = y.min(0.0) - 40.0 * sigma;
    let hi = y.max(0.0) + 40.0 * sigma;
    let mut pts = vec![lo, 0.0, hi];
    for d in [-3.0, -1.0, 1.0, 3.0] {
        pts.push(y + d * sigma);
    }
    pts.sort_by(f64::total_cmp);
    // shift the exponent by its maximum, which sits at θ = 0 or at the
    // stationary point y - sign(y) σ²/b
    let g = |t: f64| -0.5 * ((y - t) / sigma).powi(2) - t.abs() / b;
    let stat = y - y.signum() * sigma * sigma / b;
    let shift = if stat * y > 0.0 { g(0.0).max(g(stat)) } else { g(0.0) };
    let f = |t: f64, m: f64| {
        let z = (y - t) / sigma;
        t.powf(m) * (-0.5 * z * z - t.abs() / b - shift).exp()
    };
    let z0 = integrate_pieces(&|t| f(t, 0.0), &pts, &q).unwrap();
    let z1 = integrate_pieces(&|t| if t == 0.0 { 0.0 } else { t * f(t, 0.0) }, &pts, &q).unwrap();
    z1 / z0
}

#[test]
fn laplace_mean_matches_quadrature() {
    for (y, b, s) in [
        (0.3, 1.0, 1.0),
        (2.0, 0.5, 1.0),
        (-4.0, 0.1, 1.0),
        (8.0, 0.01, 1.0),
        (1.0, 5.0, 2.0),
        (-0.5, 1e-3, 0.3),
    ] {
        let c = laplace_posterior_mean(y, b, s);
        let o = laplace_mean_oracle(y, b, s);
        assert!((c - o).abs() < 1e-9 * (1.0 + o.abs()), "{y} {b} {s}: {c} vs {o}");
    }
}

#[test]
fn horseshoe_mean_matches_summary() {
    let q = QuadratureSpec::default();
    for (y, tau) in [(0.5, 1e-3), (3.0, 1e-2), (7.0, 1e-3), (-2.0, 0.3)] {
        let fast = posterior_mean(&PriorSpec::horseshoe(tau), y).unwrap();
        let slow = posterior_summary(y, tau, 1.0, &q).unwrap().post_mean_theta;
        assert!((fast - slow).abs() < 1e-9 * (1.0 + slow.abs()));
    }
}

#[test]
fn null_risk_is_reproducible_and_validated() {
    let p = PriorSpec::horseshoe(1e-2);
    let a = null_kl_risk(&p, 1000, 5).unwrap();
    let b = null_kl_risk(&p, 1000, 5).unwrap();
    assert_eq!(a, b);
    assert!(a.mean >= 0.0 && a.std_err >= 0.0);
    assert_eq!(a.reps, 1000);
    assert!(null_kl_risk(&p, 999, 5).is_err());
    assert!(matches!(
        null_kl_risk(&PriorSpec::cauchy(), 1000, 5),
        Err(Error::UnsupportedKind(PriorKind::Cauchy))
    ));
}

#[test]
fn null_risk_decade_ratio() {
    // the null risk falls by about one decade per decade of τ: large-|y|
    // draws past √(2 ln 1/τ), which occur with probability of order τ, are
    // left unshrunk and dominate the average
    let hi = null_kl_risk(&PriorSpec::horseshoe(1e-2), 100_000, 1).unwrap();
    let lo = null_kl_risk(&PriorSpec::horseshoe(1e-3), 100_000, 1).unwrap();
    let ratio = hi.mean / lo.mean;
    assert!((2.0..100.0).contains(&ratio), "{ratio}");
}

#[test]
fn laplace_at_matched_scale_shrinks_harder_at_the_null() {
    // with b = τ the Laplace mean is ≈ 2τ²y near zero, so its null risk is
    // far below the horseshoe's
    let h = null_kl_risk(&PriorSpec::horseshoe(1e-3), 10_000, 2).unwrap();
    let l = null_kl_risk(&PriorSpec::laplace(1e-3), 10_000, 2).unwrap();
    assert!(l.mean < h.mean);
}

#[test]
fn exponent_fit_is_deterministic() {
    let taus = [10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3];
    let a = superefficiency_exponent(&taus, 2000, 9).unwrap();
    let b = superefficiency_exponent(&taus, 2000, 9).unwrap();
    assert_eq!(a, b);
    assert!((0.0..=1.0).contains(&a.r_squared));
    let l = superefficiency_exponent_for(PriorKind::Laplace, &taus, 2000, 9).unwrap();
    // risk ∝ b⁴ for the Laplace prior at b = τ
    assert!((l.exponent - 4.0).abs() < 0.1, "{}", l.exponent);
    assert!(superefficiency_exponent(&taus[..3], 2000, 9).is_err());
    assert!(superefficiency_exponent(&[0.5, 0.1, 0.01, 0.001], 2000, 9).is_err());
}

#[test]
fn signal_risk_examples() {
    let n = 2000;
    let tc = abos_threshold(n, 1).unwrap();
    let p = PriorSpec::horseshoe(1.0 / n as f64);
    let far = signal_kl_risk(3.0 * tc, &p, 4000, 3).unwrap();
    assert!(far.mean <= 10.0 * 0.5, "{}", far.mean);

    let a = signal_kl_risk(2.2, &p, 2000, 3).unwrap();
    let b = signal_kl_risk(-2.2, &p, 2000, 3).unwrap();
    let se = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * se);

    let p3 = PriorSpec::horseshoe(1e-3);
    let t3 = (2.0 * 1e3f64.ln()).sqrt();
    let small = signal_kl_risk(0.1 * t3, &p3, 4000, 4).unwrap();
    let at = signal_kl_risk(t3, &p3, 4000, 4).unwrap();
    assert!(small.mean < 0.1 * at.mean, "{} vs {}", small.mean, at.mean);
}

#[test]
fn cumulative_kl_small_cases() {
    let p = PriorSpec::horseshoe(1e-3);
    let a = cumulative_kl(5.0, 10, &p, 50, 8).unwrap();
    let b = cumulative_kl(5.0, 10, &p, 50, 8).unwrap();
    assert_eq!(a, b);
    // first step predicts with the prior mean 0
    assert!(a.mean >= 12.5);
    let path = cumulative_kl_path(5.0, &[10, 40], &p, 50, 8).unwrap();
    assert_eq!(path[0], a);
    assert!(path[1].mean >= path[0].mean);
    assert!(cumulative_kl(5.0, 9, &p, 50, 8).is_err());
}

#[test]
fn cumulative_kl_fixed_prior_ridge_matches_closed_form() {
    // ridge prior N(0, s0²): θ̂_t = s0² t ȳ / (σ² + s0² t), and the expected
    // KL at step t is [(σ² θ0)² + s0⁴ t σ²] / (σ² + s0² t)² / 2σ²
    let (s0, theta0, n) = (2.0f64, 1.5f64, 30usize);
    let mut exact = 0.0;
    for t in 0..n {
        let tt = t as f64;
        let d = 1.0 + s0 * s0 * tt;
        exact += (theta0 * theta0 + s0.powi(4) * tt) / (d * d) / 2.0;
    }
    let r = cumulative_kl(theta0, n, &PriorSpec::ridge(s0), 20_000, 1).unwrap();
    assert!((r.mean - exact).abs() < 4.0 * r.std_err, "{} vs {exact}", r.mean);
}

#[test]
fn line_fit_rejects_bad_input() {
    assert!(matches!(fit_line(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplace_mean_shrinks(y in -20.0f64..20.0, lb in -3.0f64..1.0) {
        let v = laplace_posterior_mean(y, 10f64.powf(lb), 1.0);
        prop_assert!(v.abs() <= y.abs() + 1e-12);
        prop_assert!(v * y >= 0.0);
    }

    #[test]
    fn risks_nonnegative(seed in 0u64..1000) {
        let r = null_kl_risk(&PriorSpec::horseshoe_plus(0.05), 1000, seed).unwrap();
        prop_assert!(r.mean >= 0.0);
    }
}
