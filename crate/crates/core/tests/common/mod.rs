#![allow(dead_code)]

use hsmdp::quad::{integrate_pieces, QuadratureSpec};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^x E1(x)` for `x > 0`: power series below 1, Lentz continued fraction
/// above.
pub fn scaled_e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        return x.exp() * (-EULER_GAMMA - x.ln() - sum);
    }
    // E1(x) e^x = 1 / (x + 1 - 1 / (x + 3 - 4 / (x + 5 - ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Closed form of the unit-scale horseshoe density, `K e^{θ²/2} E1(θ²/2)`.
pub fn hs_density_oracle(theta: f64) -> f64 {
    let k = (2.0 * std::f64::consts::PI.powi(3)).sqrt().recip();
    k * scaled_e1(0.5 * theta * theta)
}

/// `∫_{-∞}^{∞} f(θ) dθ` for an even density with scale `scale`, computed as
/// `2 ∫ θ f(θ) dt` with `θ = scale · e^t`.
pub fn even_total_mass<F: Fn(f64) -> f64>(f: F, scale: f64, rel_tol: f64) -> f64 {
    let pts: Vec<f64> = (-12..=12).map(|j| 4.0 * j as f64).collect();
    let spec = QuadratureSpec::new(1e-15, rel_tol, 2000).unwrap();
    let g = |t: f64| {
        let theta = scale * t.exp();
        theta * f(theta)
    };
    2.0 * integrate_pieces(&g, &pts, &spec).unwrap()
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
