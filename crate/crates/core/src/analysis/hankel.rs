//! `H(rho) = int_0^inf w(r) J_nu(r rho) dr` for smooth non-oscillating `w`.
//!
//! The range is cut at the zeros `j_{nu,k} / rho` of the kernel. The first
//! lobe is integrated on geometric panels, later lobes one at a time. The
//! lobe sums form an alternating series; when it does not die out on its own
//! the partial sums are accelerated by repeated averaging (Euler).

use crate::analysis::quadrature::{geometric_breakpoints, integrate, integrate_breakpoints, integrate_semi_infinite};
use crate::analysis::quadrature::{QuadOptions, QuadratureResult};
use crate::analysis::special::{bessel_j, bessel_zero};
use crate::error::{Error, Result};

const STORED_ZEROS: usize = 64;
const MAX_LOBES: usize = 4000;
const EULER_START: usize = 6;
const EULER_DEPTH: usize = 12;

#[derive(Debug, Clone)]
pub struct Hankel {
    nu: f64,
    zeros: Vec<f64>,
}

impl Hankel {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::Domain(format!("Bessel order must be >= 0, got {nu}")));
        }
        let zeros = (1..=STORED_ZEROS).map(|k| bessel_zero(nu, k)).collect();
        Ok(Self { nu, zeros })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `j_{nu,k}`, `k >= 1`; beyond the stored ones McMahon's expansion is
    /// accurate to far below what a split point needs.
    fn zero(&self, k: usize) -> f64 {
        if k <= self.zeros.len() {
            return self.zeros[k - 1];
        }
        let mu = 4.0 * self.nu * self.nu;
        let b = (k as f64 + 0.5 * self.nu - 0.25) * std::f64::consts::PI;
        let e = 8.0 * b;
        b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
    }

    pub fn transform<W: Fn(f64) -> f64>(&self, w: W, rho: f64, tol: f64) -> Result<QuadratureResult> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("rho must be finite and >= 0, got {rho}")));
        }
        let opts = QuadOptions::relative(tol);
        if rho == 0.0 {
            if self.nu == 0.0 {
                return integrate_semi_infinite(w, opts);
            }
            return Ok(QuadratureResult::zero());
        }
        let nu = self.nu;
        let f = |r: f64| w(r) * bessel_j(nu, r * rho);

        let first = self.zero(1) / rho;
        let mut total = integrate_breakpoints(f, &geometric_breakpoints(first), opts)?;

        let mut partial = vec![total.value];
        let mut small_run = 0;
        let mut euler_prev: Option<f64> = None;
        let mut euler_run = 0;
        for k in 1..MAX_LOBES {
            let lobe = integrate(f, self.zero(k) / rho, self.zero(k + 1) / rho, opts)?;
            total = total.combine(lobe);
            partial.push(total.value);

            if lobe.value.abs() <= tol * total.abs_integral {
                small_run += 1;
                if small_run >= 2 {
                    total.abs_error_estimate += lobe.value.abs();
                    return Ok(total);
                }
            } else {
                small_run = 0;
            }

            if partial.len() > EULER_START {
                let start = partial.len().saturating_sub(EULER_DEPTH);
                let estimate = euler(&partial[start..]);
                if let Some(prev) = euler_prev {
                    let change = (estimate - prev).abs();
                    if change <= tol * total.abs_integral {
                        euler_run += 1;
                        if euler_run >= 2 {
                            return Ok(QuadratureResult {
                                value: estimate,
                                abs_error_estimate: total.abs_error_estimate + change,
                                ..total
                            });
                        }
                    } else {
                        euler_run = 0;
                    }
                }
                euler_prev = Some(estimate);
            }
        }
        Err(Error::Quadrature(format!(
            "Hankel transform at rho={rho} did not settle within {MAX_LOBES} lobes"
        )))
    }
}

/// Repeated pairwise averaging of partial sums, down to a single value.
fn euler(partial: &[f64]) -> f64 {
    let mut level = partial.to_vec();
    while level.len() > 1 {
        level = level.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    level[0]
}
