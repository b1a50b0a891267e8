mod support;

use support::dd::Dd;

#[test]
fn double_double_constants() {
    // e and ln 10 to double-double precision
    let e = Dd::ONE.exp();
    assert_eq!(e.hi, std::f64::consts::E);
    assert!(
        (e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-30,
        "{:e}",
        e.lo
    );
    let ln10 = Dd::new(10.0).ln();
    assert_eq!(ln10.hi, std::f64::consts::LN_10);
    assert!((ln10.lo - -2.170_756_223_382_249_4e-16).abs() < 1e-30);
}

#[test]
fn double_double_roundtrips() {
    for x in [1e-8, 0.3, 1.0, 7.5, 123456.0, 1e12] {
        let y = Dd::new(x).ln().exp();
        assert!(
            ((y - Dd::new(x)) / Dd::new(x)).to_f64().abs() < 1e-28,
            "{x}"
        );
    }
    let third = Dd::ONE / Dd::new(3.0);
    assert!((third * Dd::new(3.0) - Dd::ONE).to_f64().abs() < 1e-31);
}

#[test]
fn oracle_reproduces_worked_example() {
    let r = support::dd::general(1, 464, &[0.1], 1.0, 0.25);
    assert_eq!(r.a, 0.0625);
    assert_eq!(r.lambda_min, 464.0);
    assert!((r.bound / 1.29e6 - 1.0).abs() < 0.01);
}
