//! Integrals of radial term sums over `R^m`, moments, and the angular
//! Fourier integral over the unit sphere.

use std::f64::consts::PI;

use num_traits::{Signed, Zero};

use crate::analysis::quadrature::{integrate, integrate_semi_infinite, QuadOptions, QuadratureResult};
use crate::analysis::special::{bessel_j, sphere_area};
use crate::error::{Endpoint, Error, Result};
use crate::terms::{int, RadialTerm, TermSum};

/// Rejects sums whose scalar terms are not integrable on `R^m`.
pub fn check_integrable(t: &TermSum) -> Result<()> {
    let m = int(i64::from(t.params().m()));
    let two = int(2);
    let decays = t.params().beta().is_positive();
    for term in t.terms() {
        if term.k < 0 {
            return Err(Error::Domain(format!(
                "growing Gauss factor cannot be integrated: {term}"
            )));
        }
        if term.n != 0 {
            continue;
        }
        if !(&two * &term.a + &m).is_positive() {
            return Err(Error::Divergent {
                term: term.to_string(),
                endpoint: Endpoint::Origin,
            });
        }
        let gaussian = term.k >= 1 && decays;
        if !gaussian && !(&two * (&term.a + &term.b) + &m).is_negative() {
            return Err(Error::Divergent {
                term: term.to_string(),
                endpoint: Endpoint::Infinity,
            });
        }
    }
    Ok(())
}

pub fn radial_integral(t: &TermSum) -> Result<QuadratureResult> {
    radial_integral_with(t, QuadOptions::default())
}

/// `int_{R^m} t dV`. Vector terms integrate to zero by symmetry; the scalar
/// part reduces to `|S^{m-1}| int_0^inf g(r) r^{m-1} dr`.
pub fn radial_integral_with(t: &TermSum, opts: QuadOptions) -> Result<QuadratureResult> {
    check_integrable(t)?;
    let scalar: Vec<RadialTerm> = t.terms().filter(|term| term.n == 0).collect();
    if scalar.is_empty() {
        return Ok(QuadratureResult::zero());
    }
    let scalar = TermSum::from_terms(t.params().clone(), scalar);
    let eval = scalar.evaluator();
    let m = t.params().m() as i32;
    let g = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        eval.eval_unchecked(r).0 * r.powi(m - 1)
    };
    let res = integrate_semi_infinite(g, opts)?;
    Ok(res.scaled(sphere_area(t.params().m())?))
}

/// `int_{R^m} x^k t dV` (scalar part). Odd total parity is exactly zero.
pub fn moment(k: u32, t: &TermSum) -> Result<QuadratureResult> {
    moment_with(k, t, QuadOptions::default())
}

pub fn moment_with(k: u32, t: &TermSum, opts: QuadOptions) -> Result<QuadratureResult> {
    let power = TermSum::from_terms(t.params().clone(), [RadialTerm::vector_power(k)]);
    let product = power.mul(t)?;
    if product.terms().all(|term| term.n == 1 || term.coeff.is_zero()) {
        return Ok(QuadratureResult::zero());
    }
    radial_integral_with(&product, opts)
}

/// `int_{S^{m-1}} e^{-i r rho <w, xi>} dsigma(w)` by direct quadrature over
/// the polar angle, returned as `(re, im)`.
pub fn sphere_fourier_integral(m: u32, r: f64, rho: f64) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(Error::Domain(format!("sphere integral needs m >= 2, got {m}")));
    }
    let z = r * rho;
    let p = (m - 2) as i32;
    let opts = QuadOptions {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        max_panels: 4000,
    };
    let re = integrate(|th: f64| (z * th.cos()).cos() * th.sin().powi(p), 0.0, PI, opts)?;
    let im = integrate(|th: f64| -(z * th.cos()).sin() * th.sin().powi(p), 0.0, PI, opts)?;
    let ring = sphere_area(m - 1)?;
    Ok((ring * re.value, ring * im.value))
}

/// `(2 pi)^{m/2} J_{m/2-1}(r rho) / (r rho)^{m/2-1}`.
pub fn sphere_fourier_closed(m: u32, r: f64, rho: f64) -> Result<f64> {
    let z = r * rho;
    if z == 0.0 {
        return sphere_area(m);
    }
    let nu = f64::from(m) / 2.0 - 1.0;
    Ok((2.0 * PI).powf(f64::from(m) / 2.0) * bessel_j(nu, z) / z.powf(nu))
}
