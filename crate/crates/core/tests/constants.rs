use std::f64::consts::{LN_2, PI};

use nlg_core::constants::{c_p, g_dp, g_dp_quadrature, gamma_limit_constant, Provenance};
use nlg_core::quad::{integrate, QuadConfig};

#[test]
fn closed_form_g_matches_quadrature() {
    for d in [2, 3] {
        for p in [1.0, 2.0, 3.5] {
            let closed = g_dp(d, p).unwrap();
            let quad = g_dp_quadrature(d, p).unwrap();
            assert_eq!((closed.provenance, quad.provenance), (Provenance::ClosedForm, Provenance::Quadrature));
            assert!((closed.value - quad.value).abs() <= 1e-8 * closed.value, "d={d} p={p}");
        }
    }
}

#[test]
fn planar_moments_by_angle_quadrature() {
    let cfg = QuadConfig::default();
    for (p, expect) in [(2.0, PI), (1.0, 4.0)] {
        let v = integrate(|t: f64| t.cos().abs().powf(p), 0.0, 2.0 * PI, cfg).unwrap().value;
        assert!((v - expect).abs() < 1e-9);
        assert!((g_dp(2, p).unwrap().value - v).abs() < 1e-9);
    }
    let v = 2.0 * PI * integrate(|f: f64| f.cos().powi(2) * f.sin(), 0.0, PI, cfg).unwrap().value;
    assert!((g_dp(3, 2.0).unwrap().value - v).abs() < 1e-10);
}

#[test]
fn c_p_is_decreasing_and_bounded() {
    let mut prev = f64::INFINITY;
    for i in 0..2000 {
        let p = 1.0 + i as f64 * 0.01;
        let c = c_p(p).unwrap().value;
        assert!(c > 0.0 && c <= 1.0);
        assert!(c < prev, "p={p}");
        prev = c;
    }
    assert_eq!(c_p(1.0).unwrap().value, LN_2);
    // across the switch between the series and the direct formula
    let below = c_p(1.0 + 0.99e-8).unwrap().value;
    let above = c_p(1.0 + 1.01e-8).unwrap().value;
    assert!(below > above && below - above < 1e-10);
}

#[test]
fn one_dimensional_limit_constant() {
    for p in [1.0, 1.25, 2.0, 3.0, 7.5] {
        assert_eq!(gamma_limit_constant(1, p).unwrap().value, 2.0 * c_p(p).unwrap().value / p);
    }
}
