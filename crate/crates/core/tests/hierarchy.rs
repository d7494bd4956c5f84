use hsmdp::quad::{integrate, QuadratureSpec};
use hsmdp::special::norm_pdf;
use hsmdp::{hierarchy_report, Error};

#[test]
fn eight_levels_in_order_and_repeatable() {
    let a = hierarchy_report(2000, 10, 3).unwrap();
    assert_eq!(a.len(), 8);
    assert!(a.iter().enumerate().all(|(i, l)| l.level as usize == i + 1));
    assert!(a.iter().all(|l| l.pass == (l.metric >= l.band[0] && l.metric <= l.band[1])));
    let b = hierarchy_report(2000, 10, 3).unwrap();
    assert_eq!(a, b);
    assert!(a[0].pass, "density sandwich must hold: {:?}", a[0]);
}

#[test]
fn level_six_metric_from_tail_integral() {
    let n = 2000f64;
    let t = (std::f64::consts::PI * n / 2.0).ln().sqrt();
    let q = QuadratureSpec::new(1e-300, 1e-13, 500).unwrap();
    let tail = 2.0 * integrate(norm_pdf, t, t + 40.0, &q).unwrap();
    let expect = tail * n * (n.ln() / 2.0).sqrt();
    let l6 = &hierarchy_report(2000, 10, 0).unwrap()[5];
    assert_eq!(l6.band, [0.3, 3.0]);
    assert!((l6.metric / expect - 1.0).abs() < 1e-10);
}

#[test]
fn small_n_rejected() {
    assert!(matches!(hierarchy_report(50, 1, 0), Err(Error::DomainError(_))));
    assert!(hierarchy_report(1000, 0, 0).is_err());
}
