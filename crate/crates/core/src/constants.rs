//! The constants `C_p`, `G_{d,p}` and the Gamma-limit factor
//! `(1/p) G_{d,p} C_p`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
}

/// A positive constant and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstant {
    pub value: f64,
    pub provenance: Provenance,
}

impl LimitConstant {
    fn closed(value: f64) -> Self {
        Self { value, provenance: Provenance::ClosedForm }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::BadExponent(p))
    }
}

/// `C_p = (1 - 2^(1-p)) / (p - 1)`, `C_1 = ln 2`.
pub fn c_p(p: f64) -> Result<LimitConstant> {
    check_p(p)?;
    let x = p - 1.0;
    if x < 1e-8 {
        // ln2 * Σ (-x ln2)^k / (k+1)!
        let t = -x * LN_2;
        let series = 1.0 + t / 2.0 + t * t / 6.0 + t * t * t / 24.0;
        return Ok(LimitConstant::closed(LN_2 * series));
    }
    Ok(LimitConstant::closed(-(-x * LN_2).exp_m1() / x))
}

fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 170.0 && b < 170.0 {
        libm::tgamma(a) / libm::tgamma(b)
    } else {
        (libm::lgamma(a) - libm::lgamma(b)).exp()
    }
}

/// `G_{d,p} = ∫_{S^{d-1}} |⟨v, σ⟩|^p dσ` for any unit `v`.
pub fn g_dp(d: usize, p: f64) -> Result<LimitConstant> {
    check_p(p)?;
    match d {
        0 => Err(Error::BadDimension(d)),
        1 => Ok(LimitConstant::closed(2.0)),
        _ => {
            let d = d as f64;
            Ok(LimitConstant::closed(2.0 * PI.powf(0.5 * (d - 1.0)) * gamma_ratio(0.5 * (p + 1.0), 0.5 * (p + d))))
        }
    }
}

/// Surface measure of the unit sphere `S^{d-1}` in `ℝ^d`, from the
/// recurrence `|S^k| = 2π/(k-1) |S^{k-2}|`.
pub fn sphere_area(d: usize) -> Result<f64> {
    match d {
        0 => Err(Error::BadDimension(0)),
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        _ => Ok(2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2)?),
    }
}

/// Volume of the unit ball in `ℝ^d`.
pub fn ball_volume(d: usize) -> Result<f64> {
    Ok(sphere_area(d)? / d as f64)
}

/// `G_{d,p}` by one-dimensional quadrature in the polar angle:
/// `2 |S^{d-2}| ∫_0^{π/2} cos^p φ sin^{d-2} φ dφ`.
pub fn g_dp_quadrature(d: usize, p: f64) -> Result<LimitConstant> {
    check_p(p)?;
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    let area = sphere_area(d - 1)?;
    let k = (d - 2) as i32;
    let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-13, ..QuadConfig::default() };
    let r = integrate(|phi: f64| phi.cos().powf(p) * phi.sin().powi(k), 0.0, 0.5 * PI, cfg)?;
    Ok(LimitConstant { value: 2.0 * area * r.value, provenance: Provenance::Quadrature })
}

/// `(1/p) G_{d,p} C_p`.
pub fn gamma_limit_constant(d: usize, p: f64) -> Result<LimitConstant> {
    Ok(LimitConstant::closed(g_dp(d, p)?.value * c_p(p)?.value / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_p_values() {
        assert!((c_p(1.0).unwrap().value - LN_2).abs() < 1e-15);
        assert!((c_p(2.0).unwrap().value - 0.5).abs() < 1e-15);
        assert!((c_p(3.0).unwrap().value - 0.375).abs() < 1e-15);
        assert!((c_p(1.0 + 1e-9).unwrap().value - LN_2).abs() < 1e-8);
        assert_eq!(c_p(0.5).unwrap_err(), Error::BadExponent(0.5));
    }

    #[test]
    fn g_dp_values() {
        assert_eq!(g_dp(1, 3.7).unwrap().value, 2.0);
        assert!((g_dp(2, 2.0).unwrap().value - PI).abs() < 1e-13);
        assert!((g_dp(2, 1.0).unwrap().value - 4.0).abs() < 1e-13);
        assert!((g_dp(3, 2.0).unwrap().value - 4.0 * PI / 3.0).abs() < 1e-13);
        assert_eq!(g_dp(0, 2.0).unwrap_err(), Error::BadDimension(0));
    }

    #[test]
    fn sphere_measures() {
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((ball_volume(2).unwrap() - PI).abs() < 1e-14);
        assert!((ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_limits() {
        assert!((gamma_limit_constant(1, 1.0).unwrap().value - 2.0 * LN_2).abs() < 1e-15);
        assert!((gamma_limit_constant(1, 2.0).unwrap().value - 0.5).abs() < 1e-15);
        assert!((gamma_limit_constant(2, 2.0).unwrap().value - PI / 4.0).abs() < 1e-13);
    }
}
