//! Globally adaptive 21-point Gauss-Kronrod quadrature over finite panels
//! and over `[0, inf)`.

use serde::Serialize;

use crate::error::{Error, Result};

// Abscissae and weights of the 21-point Kronrod rule and its embedded
// 10-point Gauss rule, from QUADPACK's qk21.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// Estimate of the integral of `|f|`, the scale for relative tolerances.
    pub abs_integral: f64,
}

impl QuadratureResult {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            abs_integral: 0.0,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            evaluations: self.evaluations,
            abs_integral: self.abs_integral * factor.abs(),
        }
    }

    pub fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            evaluations: self.evaluations + other.evaluations,
            abs_integral: self.abs_integral + other.abs_integral,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 0.0,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

/// Where the variable of a panel lives: directly on `r`, or on `t` with
/// `r = origin / t` for the unbounded tail.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    Tail(f64),
}

fn rule<F: Fn(f64) -> f64>(f: &F, map: Map, a: f64, b: f64) -> Result<Panel> {
    let eval = |x: f64| -> Result<f64> {
        let y = match map {
            Map::Identity => f(x),
            Map::Tail(origin) => {
                let r = origin / x;
                f(r) * origin / (x * x)
            }
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Quadrature(format!("non-finite integrand value at {x:e}")))
        }
    };
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(center)?;
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut resg = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let width = half.abs();
    let value = resk * half;
    let resabs = resabs * width;
    let resasc = resasc * width;
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        a,
        b,
        value,
        err,
        abs: resabs,
    })
}

fn adapt<F: Fn(f64) -> f64>(f: &F, seeds: &[(Map, f64, f64)], opts: QuadOptions) -> Result<QuadratureResult> {
    let mut panels: Vec<(Map, Panel, bool)> = Vec::with_capacity(seeds.len() + 64);
    for &(map, a, b) in seeds {
        panels.push((map, rule(f, map, a, b)?, true));
    }
    let mut evaluations = 21 * panels.len();
    loop {
        let value: f64 = panels.iter().map(|p| p.1.value).sum();
        let err: f64 = panels.iter().map(|p| p.1.err).sum();
        let abs: f64 = panels.iter().map(|p| p.1.abs).sum();
        let target = opts.abs_tol.max(opts.rel_tol * abs);
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.2)
            .max_by(|x, y| x.1 .1.err.total_cmp(&y.1 .1.err))
            .map(|(i, _)| i);
        let done = QuadratureResult {
            value,
            abs_error_estimate: err,
            evaluations,
            abs_integral: abs,
        };
        if err <= target {
            return Ok(done);
        }
        let Some(i) = worst else {
            return Err(Error::Quadrature(format!(
                "no further subdivision possible: value {value:e}, error {err:e}, target {target:e}"
            )));
        };
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "panel limit {} reached: value {value:e}, error {err:e}, target {target:e}",
                opts.max_panels
            )));
        }
        let (map, p, _) = panels[i];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 1e-14 * p.a.abs().max(p.b.abs()) {
            panels[i].2 = false;
            continue;
        }
        let left = rule(f, map, p.a, mid)?;
        let right = rule(f, map, mid, p.b)?;
        evaluations += 42;
        panels[i] = (map, left, true);
        panels.push((map, right, true));
    }
}

/// `int_a^b f` by global adaptive bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadratureResult> {
    integrate_breakpoints(f, &[a, b], opts)
}

/// Like [`integrate`] with the interval pre-split at `points` (ascending).
pub fn integrate_breakpoints<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOptions) -> Result<QuadratureResult> {
    if points.len() < 2 {
        return Err(Error::Domain("need at least two breakpoints".into()));
    }
    if points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("breakpoints must be strictly increasing".into()));
    }
    let seeds: Vec<_> = points.windows(2).map(|w| (Map::Identity, w[0], w[1])).collect();
    adapt(&f, &seeds, opts)
}

/// Geometric panels `[0, 1/2], [1/2, 1], ..., [2^(k-1), end]`, the last one
/// stopping exactly at `end`.
pub fn geometric_breakpoints(end: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = 0.5;
    while x < end {
        pts.push(x);
        x *= 2.0;
    }
    pts.push(end);
    pts
}

const TAIL_START: f64 = 64.0;

/// `int_0^inf f`: geometric panels up to 64, then `r = 64 / t` on `t in (0, 1]`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, opts: QuadOptions) -> Result<QuadratureResult> {
    let pts = geometric_breakpoints(TAIL_START);
    let mut seeds: Vec<_> = pts.windows(2).map(|w| (Map::Identity, w[0], w[1])).collect();
    seeds.push((Map::Tail(TAIL_START), 0.0, 1.0));
    adapt(&f, &seeds, opts)
}
