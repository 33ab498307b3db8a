//! Gamma, sphere areas and Bessel functions of the first kind.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn needs finite x > 0, got {x}")));
    }
    Ok(gamma_pos(x))
}

fn gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_pos(1.0 - x));
    }
    if x > 171.0 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// Area of the unit sphere `S^{d-1}` in `R^d`.
pub fn sphere_area(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("sphere_area needs d >= 1".into()));
    }
    let half = f64::from(d) / 2.0;
    Ok(2.0 * PI.powf(half) / gamma_pos(half))
}

const SERIES_LIMIT: f64 = 8.0;

/// `J_nu(x)` for `nu >= 0`, `x >= 0`.
///
/// Power series for small `x`, Miller's backward recurrence in the middle
/// range, Hankel's asymptotic expansion for large `x`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT.max(nu) {
        series(nu, x)
    } else if x < 25f64.max(2.0 * nu * nu) {
        miller(nu, x)
    } else {
        hankel_asymptotic(nu, x)
    }
}

fn series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..300 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    let prefactor = if nu == 0.0 {
        1.0
    } else {
        (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0)).exp()
    };
    prefactor * sum
}

fn miller(nu: f64, x: f64) -> f64 {
    let order = nu.floor() as usize;
    let nu0 = nu - order as f64;
    let mut top = order + x.ceil() as usize + 40;
    if top % 2 == 1 {
        top += 1;
    }

    // Neumann normalisation (x/2)^nu0 = sum_k c_k J_{nu0+2k},
    // c_0 = Gamma(nu0+1), c_k = (nu0+2k) Gamma(nu0+k)/k!.
    let half = top / 2;
    let mut weights = vec![0.0; half + 1];
    weights[0] = gamma_pos(nu0 + 1.0);
    let mut g = weights[0];
    for (k, w) in weights.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        if k > 1 {
            g *= (nu0 + kf - 1.0) / kf;
        }
        *w = (nu0 + 2.0 * kf) * g;
    }

    let mut above = 0.0;
    let mut current = 1e-280;
    let mut sum = weights[half] * current;
    let mut target = if top == order { current } else { 0.0 };
    for i in (1..=top).rev() {
        let below = 2.0 * (nu0 + i as f64) / x * current - above;
        above = current;
        current = below;
        let idx = i - 1;
        if idx % 2 == 0 {
            sum += weights[idx / 2] * current;
        }
        if idx == order {
            target = current;
        }
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            sum *= 1e-250;
            target *= 1e-250;
        }
    }
    target * (0.5 * x).powf(nu0) / sum
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let eight_x = 8.0 * x;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * eight_x);
        }
        let mag = term.abs();
        if mag > last && k > 2 {
            break;
        }
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 * (p.abs() + q.abs()) {
            break;
        }
        last = mag;
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// McMahon's large-zero estimate of `j_{nu,k}`.
fn mcmahon(nu: f64, k: usize) -> f64 {
    let mu = 4.0 * nu * nu;
    let b = (k as f64 + 0.5 * nu - 0.25) * PI;
    let e = 8.0 * b;
    b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
}

/// The `k`-th positive zero of `J_nu` (`k >= 1`), by Newton polish of the
/// McMahon estimate.
pub fn bessel_zero(nu: f64, k: usize) -> f64 {
    assert!(k >= 1, "zeros are numbered from 1");
    let mut z = mcmahon(nu, k);
    if z <= 0.0 {
        z = nu + 1.0;
    }
    for _ in 0..50 {
        let j = bessel_j(nu, z);
        let dj = nu / z * j - bessel_j(nu + 1.0, z);
        let step = j / dj;
        z -= step;
        if step.abs() < 1e-15 * z {
            break;
        }
    }
    z
}
