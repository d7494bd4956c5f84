//! Bracketed root finding and golden-section maximisation.

use crate::error::{Error, Result};

/// Root of `f` on `[lo, hi]`: bisection until the bracket is narrow, then
/// secant steps kept inside the bracket.
///
/// Stops once `|f(x)| < tol` or the bracket has collapsed to adjacent floats.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    // coarse bisection: 30 halvings leave ~1e-9 of the original width
    for _ in 0..30 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < tol {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    for _ in 0..200 {
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() < tol || x <= a || x >= b {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if b - a <= f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Bisection on a monotone predicate: the point in `[lo, hi]` where `pred`
/// switches from false to true, to absolute width `xtol`.
pub fn bisect_switch<P: Fn(f64) -> bool>(pred: P, lo: f64, hi: f64, xtol: f64) -> Option<f64> {
    if pred(lo) || !pred(hi) {
        return None;
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > xtol {
        let m = 0.5 * (a + b);
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `xtol`. Returns `(argmax, max)`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = bracketed_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn same_sign_rejected() {
        let e = bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::NoRootInBracket { .. }));
    }

    #[test]
    fn switch_point() {
        let s = bisect_switch(|x| x > 0.3, 0.0, 1.0, 1e-9).unwrap();
        assert!((s - 0.3).abs() < 1e-8);
        assert!(bisect_switch(|x| x > 2.0, 0.0, 1.0, 1e-9).is_none());
    }

    #[test]
    fn golden_parabola() {
        let (x, v) = golden_max(|x| -(x - 0.7) * (x - 0.7) + 3.0, -2.0, 5.0, 1e-9);
        assert!((x - 0.7).abs() < 1e-7);
        assert!((v - 3.0).abs() < 1e-12);
    }
}
