//! The oscillatory integrals J_{nu,k}(X) and I_k(X).
//!
//! Both are integrals of the form `int_0^X (X^2 - u^2)^{(k-2)/2} w(u) du` with
//! an oscillating weight. The substitution u = X sin(theta) removes the k = 1
//! endpoint singularity, after which the integrand is smooth on each panel.

use std::f64::consts::{FRAC_PI_2, PI};

use super::bessel::bessel_j;
use super::quad::{KahanSum, GL16};
use crate::error::{Error, Result};

/// Panels per unit of u, i.e. per oscillation of the Bessel/sine weight.
const PANELS_PER_UNIT: f64 = 10.0;

/// `J_{nu,k}(X) = int_0^X (X^2 - u^2)^{(k-2)/2} J_nu(2 pi u) u^{nu+1} du`.
///
/// Accepts nu >= 0 so that the recurrence partner `J_{nu-1,k+2}` is
/// computable down to nu = 1.
pub fn osc_integral_j(nu: f64, k: u32, x_max: f64) -> Result<f64> {
    if nu < 0.0 {
        return Err(Error::domain(format!("osc_integral_j requires nu >= 0, got {nu}")));
    }
    if k < 1 {
        return Err(Error::domain("osc_integral_j requires k >= 1".to_string()));
    }
    if x_max < 0.0 {
        return Err(Error::domain(format!("osc_integral_j requires X >= 0, got {x_max}")));
    }
    if x_max == 0.0 {
        return Ok(0.0);
    }
    // After u = X sin(theta):
    //   X^{k+nu} cos^{k-1}(theta) sin^{nu+1}(theta) J_nu(2 pi X sin(theta))
    let scale = x_max.powf(k as f64 + nu);
    oscillatory_theta_integral(x_max, |theta| {
        let (s, c) = theta.sin_cos();
        let j = bessel_j(nu, 2.0 * PI * x_max * s).expect("nu, argument validated");
        scale * c.powi(k as i32 - 1) * s.powf(nu + 1.0) * j
    })
}

/// `I_k(X) = int_0^X (X^2 - u^2)^{(k-2)/2} u sin(2 pi u) du`.
///
/// Closed form (repeated integration by parts) for even k, quadrature for
/// odd k; the two routes agree within 1e-9 absolute where both apply.
pub fn osc_integral_i(k: u32, x_max: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain("osc_integral_i requires k >= 1".to_string()));
    }
    if x_max < 0.0 {
        return Err(Error::domain(format!("osc_integral_i requires X >= 0, got {x_max}")));
    }
    if x_max == 0.0 {
        return Ok(0.0);
    }
    if k % 2 == 0 {
        Ok(osc_integral_i_even(k, x_max))
    } else {
        osc_integral_i_quad(k, x_max)
    }
}

/// Quadrature route for I_k, valid for any k >= 1. Used directly for odd k
/// and as a cross-check of the closed form for even k.
pub fn osc_integral_i_quad(k: u32, x_max: f64) -> Result<f64> {
    if x_max == 0.0 {
        return Ok(0.0);
    }
    let scale = x_max.powi(k as i32);
    oscillatory_theta_integral(x_max, |theta| {
        let (s, c) = theta.sin_cos();
        scale * c.powi(k as i32 - 1) * s * (2.0 * PI * x_max * s).sin()
    })
}

/// Integrate f(theta) over [0, pi/2] with panels aligned to the u-grid of
/// spacing 1/PANELS_PER_UNIT (at least 10 panels per oscillation in u).
fn oscillatory_theta_integral<F: Fn(f64) -> f64>(x_max: f64, f: F) -> Result<f64> {
    let n_panels = ((x_max * PANELS_PER_UNIT).ceil() as usize).max(4);
    let du = x_max / n_panels as f64;
    let mut acc = KahanSum::new();
    let mut theta_lo = 0.0;
    for i in 1..=n_panels {
        let u = (i as f64 * du).min(x_max);
        let theta_hi = if i == n_panels { FRAC_PI_2 } else { (u / x_max).asin() };
        acc.add(GL16.integrate(theta_lo, theta_hi, &f));
        theta_lo = theta_hi;
    }
    Ok(acc.value())
}

/// Even-k closed form by repeated integration by parts. With m = k/2 and
/// `S_m = int_0^X (X^2 - u^2)^m cos(2 pi u) du`, the identity
/// `I_{2m}(X) = (pi/m) S_m` holds, and two integrations by parts give
/// `S_m = [f'(u) cos(2 pi u)/(4 pi^2)]_0^X
///        + ((4m^2 - 2m) S_{m-1} - 4m(m-1) X^2 S_{m-2}) / (4 pi^2)`.
/// No binomial expansion, so no X^k-scale cancellation.
fn osc_integral_i_even(k: u32, x_max: f64) -> f64 {
    let a = 2.0 * PI;
    let (sin_ax, cos_ax) = (a * x_max).sin_cos();
    let m_top = (k / 2) as usize;
    let mut s_prev = 0.0; // S_{m-2}
    let mut s = sin_ax / a; // S_0
    for m in 1..=m_top {
        let mf = m as f64;
        // boundary term: f'(X) = -2mX (X^2-u^2)^{m-1}|_{u=X}, zero for m >= 2
        let boundary = if m == 1 { -2.0 * x_max * cos_ax / (a * a) } else { 0.0 };
        let next = boundary
            + ((4.0 * mf * mf - 2.0 * mf) * s
                - 4.0 * mf * (mf - 1.0) * x_max * x_max * s_prev)
                / (a * a);
        s_prev = s;
        s = next;
    }
    PI / m_top as f64 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_integral() {
        assert_eq!(osc_integral_j(1.0, 2, 0.0).unwrap(), 0.0);
        assert_eq!(osc_integral_i(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn i2_antiderivative_value() {
        // I_2(1) = int_0^1 u sin(2 pi u) du = -1/(2 pi)
        let want = -1.0 / (2.0 * PI);
        let got = osc_integral_i(2, 1.0).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn even_closed_form_matches_quadrature() {
        for k in [2u32, 4, 6] {
            for &x in &[0.7, 1.0, 3.3, 10.0, 25.0] {
                let cf = osc_integral_i(k, x).unwrap();
                let q = osc_integral_i_quad(k, x).unwrap();
                // the quadrature is roundoff-limited at the integrand scale
                // X^{k/2}; the closed form is the more accurate route
                let tol = 1e-9 * (1.0 + x.powf(k as f64 / 2.0));
                assert!((cf - q).abs() < tol, "k = {k}, X = {x}: {cf} vs {q}");
            }
        }
    }

    #[test]
    fn i_is_pi_times_j_half() {
        // I_k(X) = pi * J_{1/2,k}(X)
        for k in [1u32, 2, 3] {
            for &x in &[1.0, 5.0, 10.0] {
                let i = osc_integral_i(k, x).unwrap();
                let j = osc_integral_j(0.5, k, x).unwrap();
                let tol = 1e-9 * (1.0 + x.powf((k as f64) / 2.0));
                assert!((i - PI * j).abs() < tol, "k = {k}, X = {x}: {i} vs {}", PI * j);
            }
        }
    }

    #[test]
    fn recurrence_small_grid() {
        // J_{nu,k}(X) = (2 pi / k) J_{nu-1,k+2}(X)
        for &nu in &[1.0, 1.5, 2.0] {
            for k in [1u32, 2, 3] {
                for &x in &[1.0, 5.0, 20.0] {
                    let lhs = osc_integral_j(nu, k, x).unwrap();
                    let rhs = 2.0 * PI / k as f64 * osc_integral_j(nu - 1.0, k + 2, x).unwrap();
                    let tol = 1e-8 * (1.0 + x.powf((k as f64 + 2.0 * nu - 1.0) / 2.0));
                    assert!((lhs - rhs).abs() < tol, "nu = {nu}, k = {k}, X = {x}");
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(osc_integral_j(-0.1, 2, 1.0).is_err());
        assert!(osc_integral_j(1.0, 0, 1.0).is_err());
        assert!(osc_integral_i(0, 1.0).is_err());
        assert!(osc_integral_i(2, -1.0).is_err());
    }
}
