//! Radial Fourier profiles of the wavelets, a brute-force 2-D transform used
//! as an independent oracle, and admissibility constants.
//!
//! For a wavelet of order `l` in `R^m` the Fourier magnitude is
//! `|psi^|(rho) = (2 pi)^{m/2} rho^{1 - m/2 + l} |H(rho)|` with
//! `H(rho) = int_0^inf w(r) J_{m/2-1}(r rho) dr`, where
//! `w(r) = r^{2(mu+l) + m/2} (1+r^2)^{alpha+l}` for family S and
//! `w(r) = r^{m/2} (1+r^2)^{alpha+l} e^{-beta r^2}` for family K.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::hankel::Hankel;
use crate::analysis::quadrature::{integrate, integrate_semi_infinite, QuadOptions};
use crate::analysis::special::gamma_fn;
use crate::error::{Endpoint, Error, Result};
use crate::families::{wavelet, Family, FamilySpec};
use crate::terms::{format_rational, int, ratio, rational_to_f64, Rational};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub rho: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<f64>,
    #[serde(rename = "psi_hat_mag")]
    pub magnitude: Vec<f64>,
    #[serde(skip)]
    pub spec: FamilySpec,
}

impl RadialProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,H,psi_hat_mag\n");
        for i in 0..self.rho.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.rho[i], self.h[i], self.magnitude[i])
                .expect("writing to a string");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityResult {
    pub constant: f64,
    pub converged: bool,
    pub tail_bound: f64,
    pub error_estimate: f64,
}

/// `r^power (1+r^2)^b e^{-decay r^2}`.
#[derive(Debug, Clone, Copy)]
struct ProfileWeight {
    power: f64,
    b: f64,
    decay: f64,
}

impl ProfileWeight {
    fn eval(&self, r: f64) -> f64 {
        if r == 0.0 {
            return if self.power == 0.0 { 1.0 } else { 0.0 };
        }
        (self.power * r.ln() + self.b * (r * r).ln_1p() - self.decay * r * r).exp()
    }
}

fn bessel_order(m: u32) -> f64 {
    f64::from(m) / 2.0 - 1.0
}

/// Checks integrability of `w(r) J_nu(r rho)` and builds `w`.
fn profile_weight(spec: &FamilySpec, at_zero: bool) -> Result<ProfileWeight> {
    let p = &spec.params;
    let m = int(i64::from(p.m()));
    let l = int(i64::from(spec.ell));
    let half_m = &m / int(2);
    let b = p.alpha() + &l;
    let describe = || {
        format!(
            "profile weight of family {} (ell={}, mu={}, alpha={})",
            spec.family,
            spec.ell,
            format_rational(p.mu()),
            format_rational(p.alpha())
        )
    };
    match spec.family {
        Family::S => {
            let power: Rational = int(2) * (p.mu() + &l) + &half_m;
            // origin: w ~ r^power, J_nu ~ r^{m/2-1}
            if !(&power + &half_m).is_positive() {
                return Err(Error::Divergent {
                    term: describe(),
                    endpoint: Endpoint::Origin,
                });
            }
            // infinity: r^{power + 2b} against the r^{-1/2} Bessel envelope,
            // or the bare weight when the kernel is J_0(0) = 1
            let growth = &power + int(2) * &b;
            let bound = if at_zero && p.m() == 2 { int(-1) } else { ratio(-1, 2) };
            if growth >= bound {
                return Err(Error::Divergent {
                    term: describe(),
                    endpoint: Endpoint::Infinity,
                });
            }
            Ok(ProfileWeight {
                power: rational_to_f64(&power),
                b: rational_to_f64(&b),
                decay: 0.0,
            })
        }
        Family::K => Ok(ProfileWeight {
            power: rational_to_f64(&half_m),
            b: rational_to_f64(&b),
            decay: rational_to_f64(p.beta()),
        }),
    }
}

fn validate_grid(rho: &[f64]) -> Result<()> {
    if rho.is_empty() {
        return Err(Error::Domain("rho grid is empty".into()));
    }
    if rho.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::Domain("rho values must be finite and >= 0".into()));
    }
    if rho.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("rho grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `H` and `|psi^|` on `rho_grid`. `ell = 0` is allowed here and gives the
/// transform of the weight itself.
pub fn fourier_profile(spec: &FamilySpec, rho_grid: &[f64], tol: f64) -> Result<RadialProfile> {
    validate_grid(rho_grid)?;
    let m = spec.params.m();
    let nu = bessel_order(m);
    let w = profile_weight(spec, rho_grid[0] == 0.0)?;
    let hankel = Hankel::new(nu)?;
    let norm = (2.0 * PI).powf(f64::from(m) / 2.0);
    let ell = f64::from(spec.ell);

    let rows: Vec<(f64, f64)> = rho_grid
        .par_iter()
        .map(|&rho| -> Result<(f64, f64)> {
            let h = hankel.transform(|r| w.eval(r), rho, tol)?.value;
            if rho > 0.0 {
                return Ok((h, norm * rho.powf(ell - nu) * h.abs()));
            }
            if spec.ell > 0 {
                return Ok((h, 0.0));
            }
            // rho^{-nu} H(rho) -> int w r^nu / (2^nu Gamma(nu+1))
            let moment = integrate_semi_infinite(|r| w.eval(r) * r.powf(nu), QuadOptions::relative(tol))?;
            let limit = moment.value / (2f64.powf(nu) * gamma_fn(nu + 1.0)?);
            Ok((h, norm * limit.abs()))
        })
        .collect::<Result<_>>()?;

    let (h, magnitude) = rows.into_iter().unzip();
    Ok(RadialProfile {
        rho: rho_grid.to_vec(),
        h,
        magnitude,
        spec: spec.clone(),
    })
}

/// Discrete transform `sum_x e^{-i <x,u>} f_c(x) dx^2` of each component on
/// the grid `x_i = -L + i dx`, `dx = 2L/(n-1)`, row-major with `y` outer.
pub fn grid_fourier_at(components: &[&[f64]], n: usize, half_width: f64, u: (f64, f64)) -> Vec<(f64, f64)> {
    let dx = 2.0 * half_width / (n - 1) as f64;
    let coord = |i: usize| -half_width + i as f64 * dx;
    let phase = |k: f64| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let a = -coord(i) * k;
                (a.cos(), a.sin())
            })
            .collect()
    };
    let px = phase(u.0);
    let py = phase(u.1);
    components
        .iter()
        .map(|field| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &(cy, sy)) in py.iter().enumerate() {
                let row = &field[j * n..(j + 1) * n];
                let (mut rr, mut ri) = (0.0, 0.0);
                for (v, &(cx, sx)) in row.iter().zip(&px) {
                    rr += v * cx;
                    ri += v * sx;
                }
                re += rr * cy - ri * sy;
                im += rr * sy + ri * cy;
            }
            (re * dx * dx, im * dx * dx)
        })
        .collect()
}

const ORACLE_DIRECTIONS: usize = 4;

/// Direction-averaged magnitude of the discrete transform of
/// multivector-valued samples, at each `rho`.
pub fn grid_fourier_magnitude(components: &[&[f64]], n: usize, half_width: f64, rho_grid: &[f64]) -> Vec<f64> {
    rho_grid
        .par_iter()
        .map(|&rho| {
            let mut acc = 0.0;
            for d in 0..ORACLE_DIRECTIONS {
                let theta = d as f64 * PI / (2.0 * ORACLE_DIRECTIONS as f64);
                let u = (rho * theta.cos(), rho * theta.sin());
                let power: f64 = grid_fourier_at(components, n, half_width, u)
                    .iter()
                    .map(|(re, im)| re * re + im * im)
                    .sum();
                acc += power.sqrt();
            }
            acc / ORACLE_DIRECTIONS as f64
        })
        .collect()
}

/// Brute-force 2-D transform of the sampled wavelet; the `H` column is the
/// magnitude divided back by `2 pi rho^l`.
pub fn ft_grid_oracle(spec: &FamilySpec, grid_size: usize, half_width: f64, rho_grid: &[f64]) -> Result<RadialProfile> {
    if spec.params.m() != 2 {
        return Err(Error::Unsupported(format!(
            "grid Fourier oracle is 2-D only, got m={}",
            spec.params.m()
        )));
    }
    if grid_size < 2 || !(half_width > 0.0) {
        return Err(Error::Domain("grid needs n >= 2 and half-width > 0".into()));
    }
    validate_grid(rho_grid)?;
    if rho_grid[0] == 0.0 {
        return Err(Error::Domain("grid oracle needs rho > 0".into()));
    }
    let psi = wavelet(spec)?.evaluator();
    let n = grid_size;
    let dx = 2.0 * half_width / (n - 1) as f64;
    let mut scalar = vec![0.0; n * n];
    let mut ex = vec![0.0; n * n];
    let mut ey = vec![0.0; n * n];
    for j in 0..n {
        let y = -half_width + j as f64 * dx;
        for i in 0..n {
            let x = -half_width + i as f64 * dx;
            let r = x.hypot(y);
            if r == 0.0 && psi.has_singular_origin() {
                continue;
            }
            let (s, v) = psi.eval(r)?;
            scalar[j * n + i] = s;
            ex[j * n + i] = v * x;
            ey[j * n + i] = v * y;
        }
    }
    let comps: [&[f64]; 3] = [&scalar, &ex, &ey];
    let magnitude = grid_fourier_magnitude(&comps, n, half_width, rho_grid);
    let ell = f64::from(spec.ell);
    let h = rho_grid
        .iter()
        .zip(&magnitude)
        .map(|(rho, mag)| mag / (2.0 * PI * rho.powf(ell)))
        .collect();
    Ok(RadialProfile {
        rho: rho_grid.to_vec(),
        h,
        magnitude,
        spec: spec.clone(),
    })
}

const MAX_DOUBLINGS: usize = 40;

/// `A = (2 pi)^m int_0^inf rho^{2l+1-m} H(rho)^2 d rho`.
///
/// The outer integral runs over `[0, 1/2], [1/2, 1], [1, 2], ...` until two
/// consecutive panels are negligible. `tail_bound` adds those last panels to
/// the power-law estimate `eps f(eps) / (2l)` of the mass below `eps`.
pub fn admissibility(spec: &FamilySpec, tol: f64) -> Result<AdmissibilityResult> {
    if spec.ell == 0 {
        return Err(Error::NotAdmissible(
            "ell = 0: the integrand behaves like 1/rho at the origin".into(),
        ));
    }
    let m = spec.params.m();
    let nu = bessel_order(m);
    let w = profile_weight(spec, false)?;
    let hankel = Hankel::new(nu)?;
    let power = 2 * spec.ell as i32 + 1 - m as i32;
    let inner_tol = 0.1 * tol;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |rho: f64| -> f64 {
        match hankel.transform(|r| w.eval(r), rho, inner_tol) {
            Ok(h) => rho.powi(power) * h.value * h.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let outer = |a: f64, b: f64, floor: f64| {
        let opts = QuadOptions {
            abs_tol: floor,
            ..QuadOptions::relative(tol)
        };
        integrate(f, a, b, opts)
    };

    let mut total = 0.0;
    let mut error = 0.0;
    let mut quiet = 0;
    let mut last_two = [0.0f64; 2];
    let (mut a, mut b) = (0.0, 0.5);
    let mut settled = false;
    for _ in 0..MAX_DOUBLINGS {
        let panel = match outer(a, b, 0.01 * tol * total.abs()) {
            Ok(p) => p,
            Err(e) => return Err(failure.take().unwrap_or(e)),
        };
        total += panel.value;
        error += panel.abs_error_estimate;
        last_two = [last_two[1], panel.value.abs()];
        if panel.value.abs() <= 0.1 * tol * total.abs() {
            quiet += 1;
            if quiet >= 2 {
                settled = true;
                break;
            }
        } else {
            quiet = 0;
        }
        a = b;
        b *= 2.0;
    }
    let eps = 1e-6;
    let lower = f(eps).abs() * eps / (2.0 * f64::from(spec.ell));
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let scale = (2.0 * PI).powi(m as i32);
    let constant = scale * total;
    let tail_bound = scale * (last_two[0] + last_two[1] + lower);
    Ok(AdmissibilityResult {
        constant,
        converged: settled && constant > 0.0 && tail_bound <= tol * constant,
        tail_bound,
        error_estimate: scale * error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::WeightParams;

    fn spec(family: Family, ell: u32, mu: i64, alpha: i64, beta: i64) -> FamilySpec {
        let p = WeightParams::new(2, int(mu), int(alpha), int(beta)).unwrap();
        FamilySpec::new(family, ell, p).unwrap()
    }

    #[test]
    fn gauss_weight_profile_is_the_gaussian_pair() {
        let s = spec(Family::K, 0, 0, 0, 1);
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        let prof = fourier_profile(&s, &grid, 1e-12).unwrap();
        for (rho, h) in grid.iter().zip(&prof.h) {
            assert!((h - 0.5 * (-rho * rho / 4.0).exp()).abs() < 1e-11, "rho={rho}");
        }
        assert!((prof.h[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gauss_reference_wavelet_closed_form() {
        // w = r (1+r^2) e^{-r^2}: H = (2 - rho^2/4) e^{-rho^2/4} / 2
        let s = spec(Family::K, 1, 0, 0, 1);
        let grid: Vec<f64> = (1..=12).map(|i| 0.5 * i as f64).collect();
        let prof = fourier_profile(&s, &grid, 1e-12).unwrap();
        for (rho, h) in grid.iter().zip(&prof.h) {
            let q = rho * rho / 4.0;
            assert!((h - 0.5 * (2.0 - q) * (-q).exp()).abs() < 1e-11, "rho={rho}");
        }
        let tail: Vec<f64> = prof.h[8..].iter().map(|h| h.abs()).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn gauss_reference_admissibility_is_five_halves_pi_squared() {
        let s = spec(Family::K, 1, 0, 0, 1);
        let a = admissibility(&s, 1e-9).unwrap();
        assert!(a.converged, "{a:?}");
        assert!((a.constant - 2.5 * PI * PI).abs() < 1e-7 * a.constant, "{a:?}");
    }

    #[test]
    fn s_reference_against_macdonald_closed_form() {
        // w = r^3 (1+r^2)^{-5}: H = rho^3 K_3(rho)/48 - rho^4 K_4(rho)/384,
        // values from 30-digit evaluation of that form
        let s = spec(Family::S, 1, 0, -6, 0);
        let prof = fourier_profile(&s, &[0.5], 1e-12).unwrap();
        assert!((prof.h[0] - 0.039_173_413_829_505_234).abs() < 1e-12);
        let a = admissibility(&s, 1e-9).unwrap();
        assert!(a.converged);
        assert!((a.constant - 0.078_330_193_659_439_354).abs() < 1e-9 * a.constant, "{a:?}");
    }

    #[test]
    fn s_decay_precondition() {
        let slow = spec(Family::S, 1, 0, -1, 0);
        assert!(matches!(
            fourier_profile(&slow, &[1.0], 1e-9),
            Err(Error::Divergent { endpoint: Endpoint::Infinity, .. })
        ));
        assert!(matches!(admissibility(&spec(Family::S, 0, 0, -6, 0), 1e-9), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn oracle_rejects_other_dimensions() {
        let p = WeightParams::new(3, int(0), int(0), int(1)).unwrap();
        let s = FamilySpec::new(Family::K, 1, p).unwrap();
        assert!(matches!(ft_grid_oracle(&s, 32, 4.0, &[1.0]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_field_and_reflection_symmetry() {
        let n = 17;
        let zero = vec![0.0; n * n];
        let mags = grid_fourier_magnitude(&[&zero], n, 3.0, &[0.5, 1.0]);
        assert!(mags.iter().all(|m| *m == 0.0));

        let bump: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                let x = -3.0 + i as f64 * 6.0 / 16.0;
                let y = -3.0 + j as f64 * 6.0 / 16.0;
                (-(x * x + 2.0 * y * y)).exp()
            })
            .collect();
        let a = grid_fourier_at(&[&bump], n, 3.0, (0.7, 0.0))[0];
        let b = grid_fourier_at(&[&bump], n, 3.0, (-0.7, 0.0))[0];
        assert!(((a.0 * a.0 + a.1 * a.1).sqrt() - (b.0 * b.0 + b.1 * b.1).sqrt()).abs() < 1e-14);
    }
}
