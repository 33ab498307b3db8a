//! Continuous wavelet transform on a square 2-D grid.
//!
//! Fields carry the scalar and vector parts of an `R_2`-valued function.
//! Coefficients `C_{a,b} = sum_x conj(psi_{a,b}(x)) f(x) dx^2` are full
//! multivectors (scalar, e1, e2, e12), with
//! `psi_{a,b}(x) = a^{-1} psi((x - b)/a)`. Scales are integrated with the
//! trapezoid rule in `ln a`, so `da / a^3 -> w_a a^{-2}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::fourier::{admissibility, AdmissibilityResult, DEFAULT_TOL};
use crate::clifford::{blade_sign, VectorM};
use crate::error::{Error, Result};
use crate::families::{wavelet, FamilySpec};
use crate::terms::RadialEvaluator;

pub const MIN_GRID: usize = 16;
pub const MIN_SCALE_SPAN: f64 = 10.0;
const KERNEL_CUTOFF: f64 = 1e-16;
const FIELD_HEADER: &str = "x,y,scalar,vx,vy";
const COEFF_HEADER: &str = "a,x,y,scalar,vx,vy,bxy";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub n: usize,
    pub half_width: f64,
}

impl GridGeometry {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::Domain(format!("grid needs n >= {MIN_GRID}, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Domain(format!("half-width must be > 0, got {half_width}")));
        }
        Ok(Self { n, half_width })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::Geometry(format!(
                "grids differ: n={} L={} vs n={} L={}",
                self.n, self.half_width, other.n, other.half_width
            )));
        }
        Ok(())
    }
}

/// Samples on the grid, row-major with `y` outer: index `j * n + i` is the
/// point `(coord(i), coord(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtField {
    geometry: GridGeometry,
    components: [Vec<f64>; 3],
}

impl CwtField {
    pub fn new(geometry: GridGeometry, scalar: Vec<f64>, vx: Vec<f64>, vy: Vec<f64>) -> Result<Self> {
        let components = [scalar, vx, vy];
        if components.iter().any(|c| c.len() != geometry.len()) {
            return Err(Error::Geometry(format!("expected {} samples per component", geometry.len())));
        }
        if components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field samples must be finite".into()));
        }
        Ok(Self { geometry, components })
    }

    pub fn zero(geometry: GridGeometry) -> Self {
        let z = vec![0.0; geometry.len()];
        Self {
            geometry,
            components: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> [f64; 3]>(geometry: GridGeometry, f: F) -> Result<Self> {
        let mut out = Self::zero(geometry);
        for j in 0..geometry.n {
            for i in 0..geometry.n {
                let v = f(geometry.coord(i), geometry.coord(j));
                for c in 0..3 {
                    out.components[c][j * geometry.n + i] = v[c];
                }
            }
        }
        Self::new(geometry, out.components[0].clone(), out.components[1].clone(), out.components[2].clone())
    }

    /// `e^{-|x|^2}` as a scalar field.
    pub fn gaussian_bump(geometry: GridGeometry) -> Self {
        Self::from_fn(geometry, |x, y| [(-(x * x + y * y)).exp(), 0.0, 0.0]).expect("finite samples")
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn scalar(&self) -> &[f64] {
        &self.components[0]
    }

    pub fn vx(&self) -> &[f64] {
        &self.components[1]
    }

    pub fn vy(&self) -> &[f64] {
        &self.components[2]
    }

    pub fn components(&self) -> [&[f64]; 3] {
        [&self.components[0], &self.components[1], &self.components[2]]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().flatten().for_each(|v| *v *= factor);
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.geometry.check_same(&other.geometry)?;
        let mut out = self.clone();
        for c in 0..3 {
            for (v, w) in out.components[c].iter_mut().zip(&other.components[c]) {
                *v += w;
            }
        }
        Ok(out)
    }

    /// Euclidean inner product `sum_x <f(x), g(x)> dx^2`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.geometry.check_same(&other.geometry)?;
        let dx = self.geometry.spacing();
        let mut acc = 0.0;
        for c in 0..3 {
            acc += self.components[c]
                .iter()
                .zip(&other.components[c])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        Ok(acc * dx * dx)
    }

    pub fn relative_error(&self, reference: &Self) -> Result<f64> {
        let diff = self.checked_add(&reference.scaled(-1.0))?;
        let norm = reference.inner(reference)?;
        if norm == 0.0 {
            return Err(Error::Domain("reference field is zero".into()));
        }
        Ok((diff.inner(&diff)? / norm).sqrt())
    }

    pub fn to_csv(&self) -> String {
        let g = self.geometry;
        let mut out = format!("{FIELD_HEADER}\n");
        for j in 0..g.n {
            for i in 0..g.n {
                let k = j * g.n + i;
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    g.coord(i),
                    g.coord(j),
                    self.components[0][k],
                    self.components[1][k],
                    self.components[2][k]
                )
                .expect("writing to a string");
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let table = parse_table(text, FIELD_HEADER)?;
        let (geometry, columns) = grid_columns(&table, 0)?;
        let [s, vx, vy]: [Vec<f64>; 3] = columns.try_into().expect("three value columns");
        Self::new(geometry, s, vx, vy)
    }
}

fn parse_table(text: &str, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == header => {}
        Some(h) => return Err(Error::Parse(format!("bad CSV header {h:?}, expected {header:?}"))),
        None => return Err(Error::Parse("empty CSV".into())),
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .map(|(row, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("CSV row {}: {e}", row + 2)))?;
            if vals.len() != width {
                return Err(Error::Parse(format!("CSV row {} has {} fields, expected {width}", row + 2, vals.len())));
            }
            Ok(vals)
        })
        .collect()
}

/// Recovers the grid from the `x,y` columns at `offset` and returns the
/// remaining columns. Coordinates must match the uniform grid.
fn grid_columns(table: &[Vec<f64>], offset: usize) -> Result<(GridGeometry, Vec<Vec<f64>>)> {
    let n = (table.len() as f64).sqrt().round() as usize;
    if n * n != table.len() {
        return Err(Error::Geometry(format!("{} rows is not a square grid", table.len())));
    }
    if n < MIN_GRID {
        return Err(Error::Geometry(format!("grid needs n >= {MIN_GRID}, got {n}")));
    }
    let geometry = GridGeometry::new(n, -table[0][offset])?;
    let slack = 1e-9 * geometry.half_width;
    for (k, row) in table.iter().enumerate() {
        let (i, j) = (k % n, k / n);
        if (row[offset] - geometry.coord(i)).abs() > slack || (row[offset + 1] - geometry.coord(j)).abs() > slack {
            return Err(Error::Geometry(format!(
                "row {} at ({}, {}) is off the uniform grid",
                k + 2,
                row[offset],
                row[offset + 1]
            )));
        }
    }
    let width = table[0].len();
    let columns = (offset + 2..width).map(|c| table.iter().map(|r| r[c]).collect()).collect();
    Ok((geometry, columns))
}

fn evaluator(spec: &FamilySpec) -> Result<RadialEvaluator> {
    if spec.params.m() != 2 {
        return Err(Error::Unsupported(format!("the CWT grid is 2-D, got m={}", spec.params.m())));
    }
    Ok(wavelet(spec)?.evaluator())
}

/// Samples of `a^{-1} psi((x - b)/a)`. With `exclude_origin` a sample that
/// lands exactly on a singular origin is set to zero.
pub fn sample_wavelet(
    spec: &FamilySpec,
    a: f64,
    b: &VectorM,
    geometry: GridGeometry,
    exclude_origin: bool,
) -> Result<CwtField> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("scale must be > 0, got {a}")));
    }
    if b.dim() != 2 {
        return Err(Error::Dimension(format!("translation must be 2-D, got {}", b.dim())));
    }
    let psi = evaluator(spec)?;
    let (bx, by) = (b.components()[0], b.components()[1]);
    let mut out = CwtField::zero(geometry);
    for j in 0..geometry.n {
        for i in 0..geometry.n {
            let u = (geometry.coord(i) - bx) / a;
            let v = (geometry.coord(j) - by) / a;
            let r = u.hypot(v);
            if r == 0.0 && psi.has_singular_origin() {
                if exclude_origin {
                    continue;
                }
                return Err(Error::Singularity(format!("wavelet is singular at b = ({bx}, {by})")));
            }
            let (s, c) = psi.eval(r)?;
            let k = j * geometry.n + i;
            out.components[0][k] = s / a;
            out.components[1][k] = c * u / a;
            out.components[2][k] = c * v / a;
        }
    }
    Ok(out)
}

/// `psi_a` on the offset lattice `d dx`, `|d_i| <= half`, truncated to the
/// box where any component exceeds `KERNEL_CUTOFF` times the peak.
#[derive(Debug, Clone)]
struct Kernel {
    half: usize,
    components: [Vec<f64>; 3],
}

impl Kernel {
    fn sample(psi: &RadialEvaluator, a: f64, geometry: GridGeometry) -> Result<Self> {
        let full = geometry.n - 1;
        let width = 2 * full + 1;
        let dx = geometry.spacing();
        let mut components = [vec![0.0; width * width], vec![0.0; width * width], vec![0.0; width * width]];
        for j in 0..width {
            for i in 0..width {
                let u = (i as f64 - full as f64) * dx / a;
                let v = (j as f64 - full as f64) * dx / a;
                let r = u.hypot(v);
                if r == 0.0 && psi.has_singular_origin() {
                    continue;
                }
                let (s, c) = psi.eval(r)?;
                let k = j * width + i;
                components[0][k] = s / a;
                components[1][k] = c * u / a;
                components[2][k] = c * v / a;
            }
        }
        let peak = components.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut half = 0;
        for j in 0..width {
            for i in 0..width {
                let k = j * width + i;
                if components.iter().any(|c| c[k].abs() > KERNEL_CUTOFF * peak) {
                    half = half.max(i.abs_diff(full)).max(j.abs_diff(full));
                }
            }
        }
        let keep = 2 * half + 1;
        let lo = full - half;
        let crop = |c: &Vec<f64>| -> Vec<f64> {
            (0..keep)
                .flat_map(|j| c[(lo + j) * width + lo..(lo + j) * width + lo + keep].iter().copied())
                .collect()
        };
        Ok(Self {
            half,
            components: [crop(&components[0]), crop(&components[1]), crop(&components[2])],
        })
    }

    /// Point reflection `d -> -d`.
    fn flipped(&self) -> Self {
        let flip = |c: &Vec<f64>| c.iter().rev().copied().collect();
        Self {
            half: self.half,
            components: [flip(&self.components[0]), flip(&self.components[1]), flip(&self.components[2])],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `out(b) = sum_d k(d) f(b + d)` with zero padding outside the grid.
fn correlate(kernel: &[f64], half: usize, field: &[f64], n: usize) -> Vec<f64> {
    let width = 2 * half + 1;
    let h = half as isize;
    let ni = n as isize;
    let mut out = vec![0.0; n * n];
    for bj in 0..ni {
        let dj_lo = (-h).max(-bj);
        let dj_hi = h.min(ni - 1 - bj);
        for bi in 0..ni {
            let di_lo = (-h).max(-bi);
            let di_hi = h.min(ni - 1 - bi);
            if di_lo > di_hi {
                continue;
            }
            let len = (di_hi - di_lo + 1) as usize;
            let mut acc = 0.0;
            for dj in dj_lo..=dj_hi {
                let krow = ((dj + h) as usize) * width + (di_lo + h) as usize;
                let frow = ((bj + dj) as usize) * n + (bi + di_lo) as usize;
                acc += dot(&kernel[krow..krow + len], &field[frow..frow + len]);
            }
            out[(bj as usize) * n + bi as usize] = acc;
        }
    }
    out
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

/// `sum_{p,q} sign(p,q) corr(k_p, f_q)` into blade `p ^ q`. Blades are
/// numbered by bitmask: 0 scalar, 1 e1, 2 e2, 3 e12.
fn clifford_correlate(kernel: &Kernel, kernel_blades: &[usize], field: &[&[f64]], n: usize) -> [Vec<f64>; 4] {
    let mut out: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n * n]);
    for (p, kp) in kernel_blades.iter().zip(&kernel.components) {
        if is_zero(kp) {
            continue;
        }
        for (q, fq) in field.iter().enumerate() {
            if is_zero(fq) {
                continue;
            }
            let sign = blade_sign(*p, q);
            let part = correlate(kp, kernel.half, fq, n);
            for (o, v) in out[p ^ q].iter_mut().zip(&part) {
                *o += sign * v;
            }
        }
    }
    out
}

/// Equally spaced in `ln a`, ends included.
pub fn log_scales(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max > min) || !max.is_finite() || count < 2 {
        return Err(Error::Domain(format!(
            "scales need 0 < min < max and count >= 2, got {min}:{max}:{count}"
        )));
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                max
            } else if i == 0 {
                min
            } else {
                (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// Trapezoid weights in `ln a`.
pub fn log_trapezoid_weights(scales: &[f64]) -> Vec<f64> {
    let k = scales.len();
    (0..k)
        .map(|i| {
            let left = if i > 0 { (scales[i] / scales[i - 1]).ln() } else { 0.0 };
            let right = if i + 1 < k { (scales[i + 1] / scales[i]).ln() } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn validate_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::Domain("no scales given".into()));
    }
    if scales.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Domain("scales must be finite and > 0".into()));
    }
    if scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("scales must be strictly ascending".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwtCoefficients {
    pub geometry: GridGeometry,
    pub scales: Vec<f64>,
    /// Per scale, the blades (scalar, e1, e2, e12) over the translation grid.
    pub coeffs: Vec<[Vec<f64>; 4]>,
    pub admissibility: Option<AdmissibilityResult>,
}

impl CwtCoefficients {
    pub fn scale_csv(&self, index: usize) -> String {
        let g = self.geometry;
        let a = self.scales[index];
        let c = &self.coeffs[index];
        let mut out = format!("{COEFF_HEADER}\n");
        for j in 0..g.n {
            for i in 0..g.n {
                let k = j * g.n + i;
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    a,
                    g.coord(i),
                    g.coord(j),
                    c[0][k],
                    c[1][k],
                    c[2][k],
                    c[3][k]
                )
                .expect("writing to a string");
            }
        }
        out
    }

    /// One `scale_NNN.csv` per scale, plus `admissibility.json` when known.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for i in 0..self.scales.len() {
            fs::write(dir.join(format!("scale_{i:03}.csv")), self.scale_csv(i))?;
        }
        if let Some(adm) = &self.admissibility {
            let text = serde_json::to_string_pretty(adm).expect("admissibility serializes");
            fs::write(dir.join("admissibility.json"), text + "\n")?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let mut files: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.file_name()
                    .and_then(|s| s.to_str())
                    .is_some_and(|s| s.starts_with("scale_") && s.ends_with(".csv"))
            })
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Io(format!("no scale_*.csv files in {}", dir.display())));
        }
        let mut geometry = None;
        let mut scales = Vec::new();
        let mut coeffs = Vec::new();
        for path in &files {
            let table = parse_table(&fs::read_to_string(path)?, COEFF_HEADER)?;
            let (g, columns) = grid_columns(&table, 1)?;
            if let Some(prev) = geometry {
                g.check_same(&prev)?;
            }
            geometry = Some(g);
            let a = table[0][0];
            if table.iter().any(|r| r[0] != a) {
                return Err(Error::Parse(format!("{} mixes several scales", path.display())));
            }
            scales.push(a);
            coeffs.push(columns.try_into().expect("four blade columns"));
        }
        validate_scales(&scales)?;
        let adm_path = dir.join("admissibility.json");
        let admissibility = if adm_path.exists() {
            let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&adm_path)?)
                .map_err(|e| Error::Parse(format!("admissibility.json: {e}")))?;
            let get = |k: &str| value.get(k).and_then(|v| v.as_f64());
            Some(AdmissibilityResult {
                constant: get("constant").ok_or_else(|| Error::Parse("admissibility.json lacks constant".into()))?,
                converged: value.get("converged").and_then(|v| v.as_bool()).unwrap_or(false),
                tail_bound: get("tail_bound").unwrap_or(f64::NAN),
                error_estimate: get("error_estimate").unwrap_or(f64::NAN),
            })
        } else {
            None
        };
        Ok(Self {
            geometry: geometry.expect("at least one file"),
            scales,
            coeffs,
            admissibility,
        })
    }
}

/// Coefficients at every scale and grid translation; the admissibility
/// constant of `spec` is attached for later normalisation.
pub fn cwt_transform(f: &CwtField, spec: &FamilySpec, scales: &[f64]) -> Result<CwtCoefficients> {
    let mut out = cwt_coefficients(f, spec, scales)?;
    out.admissibility = Some(admissibility(spec, DEFAULT_TOL)?);
    Ok(out)
}

fn cwt_coefficients(f: &CwtField, spec: &FamilySpec, scales: &[f64]) -> Result<CwtCoefficients> {
    validate_scales(scales)?;
    let psi = evaluator(spec)?;
    let g = f.geometry;
    let area = g.spacing() * g.spacing();
    let field = f.components();
    let coeffs = scales
        .par_iter()
        .map(|&a| -> Result<[Vec<f64>; 4]> {
            let mut kernel = Kernel::sample(&psi, a, g)?;
            // Clifford conjugation flips the vector part
            for c in &mut kernel.components[1..] {
                c.iter_mut().for_each(|v| *v = -*v);
            }
            let mut c = clifford_correlate(&kernel, &[0, 1, 2], &field, g.n);
            c.iter_mut().flatten().for_each(|v| *v *= area);
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CwtCoefficients {
        geometry: g,
        scales: scales.to_vec(),
        coeffs,
        admissibility: None,
    })
}

/// `(lhs, rhs)` with `lhs = sum_a w_a a^{-2} sum_b <C_f, C_g> db^2` and
/// `rhs = A <f, g>`, the pairing being the scalar part of `conj(C_f) C_g`.
pub fn plancherel_check(
    f: &CwtField,
    g: &CwtField,
    coeffs_f: &CwtCoefficients,
    coeffs_g: &CwtCoefficients,
) -> Result<(f64, f64)> {
    let geom = f.geometry;
    geom.check_same(&g.geometry)?;
    geom.check_same(&coeffs_f.geometry)?;
    geom.check_same(&coeffs_g.geometry)?;
    if coeffs_f.scales != coeffs_g.scales {
        return Err(Error::Geometry("coefficient sets use different scales".into()));
    }
    let scales = &coeffs_f.scales;
    validate_scales(scales)?;
    let span = scales[scales.len() - 1] / scales[0];
    if span < MIN_SCALE_SPAN {
        return Err(Error::Domain(format!(
            "scale range spans a factor {span}, need at least {MIN_SCALE_SPAN}"
        )));
    }
    let constant = coeffs_f
        .admissibility
        .ok_or_else(|| Error::Domain("admissibility constant missing".into()))?
        .constant;
    let area = geom.spacing() * geom.spacing();
    let weights = log_trapezoid_weights(scales);
    let mut lhs = 0.0;
    for (i, a) in scales.iter().enumerate() {
        let mut pair = 0.0;
        for blade in 0..4 {
            pair += coeffs_f.coeffs[i][blade]
                .iter()
                .zip(&coeffs_g.coeffs[i][blade])
                .map(|(x, y)| x * y)
                .sum::<f64>();
        }
        lhs += weights[i] / (a * a) * pair * area;
    }
    Ok((lhs, constant * f.inner(g)?))
}

/// `f = (1/A) sum_a w_a a^{-2} sum_b psi_{a,b} C_{a,b} db^2`; the e12 part
/// of the synthesis is discarded.
pub fn reconstruct(coeffs: &CwtCoefficients, spec: &FamilySpec) -> Result<CwtField> {
    let constant = coeffs
        .admissibility
        .ok_or_else(|| Error::Domain("admissibility constant missing".into()))?
        .constant;
    if !(constant > 0.0) || !constant.is_finite() {
        return Err(Error::NotAdmissible(format!("admissibility constant {constant}")));
    }
    validate_scales(&coeffs.scales)?;
    let psi = evaluator(spec)?;
    let g = coeffs.geometry;
    let area = g.spacing() * g.spacing();
    let weights = log_trapezoid_weights(&coeffs.scales);
    let parts = coeffs
        .scales
        .par_iter()
        .zip(&coeffs.coeffs)
        .zip(&weights)
        .map(|((&a, c), &w)| -> Result<[Vec<f64>; 4]> {
            let kernel = Kernel::sample(&psi, a, g)?.flipped();
            let blades: [&[f64]; 4] = [&c[0], &c[1], &c[2], &c[3]];
            let mut part = clifford_correlate(&kernel, &[0, 1, 2], &blades, g.n);
            let factor = w / (a * a) * area / constant;
            part.iter_mut().flatten().for_each(|v| *v *= factor);
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = CwtField::zero(g);
    for part in &parts {
        for c in 0..3 {
            for (o, v) in out.components[c].iter_mut().zip(&part[c]) {
                *o += v;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RoundTrip {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub reconstruction_error: f64,
}

/// Transform, Plancherel self-pairing and reconstruction of one field.
pub fn round_trip(f: &CwtField, spec: &FamilySpec, scales: &[f64]) -> Result<(CwtCoefficients, RoundTrip)> {
    let coeffs = cwt_transform(f, spec, scales)?;
    let (lhs, rhs) = plancherel_check(f, f, &coeffs, &coeffs)?;
    let rec = reconstruct(&coeffs, spec)?;
    let report = RoundTrip {
        lhs,
        rhs,
        ratio: lhs / rhs,
        reconstruction_error: rec.relative_error(f)?,
    };
    Ok((coeffs, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Family;
    use crate::terms::{int, WeightParams};

    fn k_ref() -> FamilySpec {
        FamilySpec::new(Family::K, 1, WeightParams::new(2, int(0), int(0), int(1)).unwrap()).unwrap()
    }

    fn origin() -> VectorM {
        VectorM::new(vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn wavelet_parity() {
        let g = GridGeometry::new(17, 3.0).unwrap();
        let w = sample_wavelet(&k_ref(), 1.0, &origin(), g, false).unwrap();
        let n = g.n;
        for k in 0..n * n {
            let mirror = n * n - 1 - k;
            assert_eq!(w.scalar()[k], w.scalar()[mirror]);
            assert_eq!(w.vx()[k], -w.vx()[mirror]);
            assert_eq!(w.vy()[k], -w.vy()[mirror]);
        }
    }

    #[test]
    fn norm_is_scale_invariant() {
        let g = GridGeometry::new(129, 12.0).unwrap();
        let norms: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&a| {
                let w = sample_wavelet(&k_ref(), a, &origin(), g, false).unwrap();
                w.inner(&w).unwrap()
            })
            .collect();
        for v in &norms {
            assert!((v / norms[1] - 1.0).abs() < 0.01, "{norms:?}");
        }
    }

    #[test]
    fn translation_by_one_step() {
        let g = GridGeometry::new(17, 8.0).unwrap();
        let shift = VectorM::new(vec![1.0, 0.0]).unwrap();
        let w0 = sample_wavelet(&k_ref(), 1.0, &origin(), g, false).unwrap();
        let w1 = sample_wavelet(&k_ref(), 1.0, &shift, g, false).unwrap();
        for j in 0..17 {
            for i in 1..17 {
                assert_eq!(w1.vx()[j * 17 + i], w0.vx()[j * 17 + i - 1]);
            }
        }
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let g = GridGeometry::new(16, 2.5).unwrap();
        let f = CwtField::from_fn(g, |x, y| [x * y, (x - y).sin(), 1.0 / 3.0]).unwrap();
        assert_eq!(CwtField::from_csv(&f.to_csv()).unwrap(), f);
        let broken = f.to_csv().replacen("-2.5000000000000000e0,-2.5", "-2.4000000000000000e0,-2.5", 1);
        assert!(matches!(CwtField::from_csv(&broken), Err(Error::Geometry(_))));
        assert!(GridGeometry::new(15, 1.0).is_err());
    }

    #[test]
    fn linearity_and_zero() {
        let g = GridGeometry::new(16, 4.0).unwrap();
        let scales = log_scales(0.5, 2.0, 3).unwrap();
        let f = CwtField::gaussian_bump(g);
        let h = CwtField::from_fn(g, |x, y| [0.0, (-(x - 1.0).powi(2) - y * y).exp(), x * (-x * x - y * y).exp()]).unwrap();
        let cf = cwt_coefficients(&f, &k_ref(), &scales).unwrap();
        let ch = cwt_coefficients(&h, &k_ref(), &scales).unwrap();
        let cs = cwt_coefficients(&f.checked_add(&h).unwrap(), &k_ref(), &scales).unwrap();
        for s in 0..3 {
            for b in 0..4 {
                for k in 0..g.len() {
                    let sum = cf.coeffs[s][b][k] + ch.coeffs[s][b][k];
                    assert!((cs.coeffs[s][b][k] - sum).abs() < 1e-12);
                }
            }
        }
        let cz = cwt_coefficients(&CwtField::zero(g), &k_ref(), &scales).unwrap();
        assert!(cz.coeffs.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn matched_filter_peaks_at_the_source() {
        let g = GridGeometry::new(33, 4.0).unwrap();
        let b0 = VectorM::new(vec![g.coord(20) , g.coord(14)]).unwrap();
        let f = sample_wavelet(&k_ref(), 1.0, &b0, g, false).unwrap();
        let scales = log_scales(0.5, 2.0, 5).unwrap();
        let c = cwt_coefficients(&f, &k_ref(), &scales).unwrap();
        let mut best = (0.0, 0, 0);
        for (s, blades) in c.coeffs.iter().enumerate() {
            for k in 0..g.len() {
                let mag: f64 = blades.iter().map(|b| b[k] * b[k]).sum();
                if mag > best.0 {
                    best = (mag, s, k);
                }
            }
        }
        assert_eq!((best.1, best.2), (2, 14 * 33 + 20));
    }

    #[test]
    fn translation_covariance() {
        let g = GridGeometry::new(24, 6.0).unwrap();
        let dx = g.spacing();
        let bump = |x: f64, y: f64| [(-2.0 * (x * x + y * y)).exp(), 0.0, 0.0];
        let f = CwtField::from_fn(g, bump).unwrap();
        let shifted = CwtField::from_fn(g, |x, y| bump(x - dx, y)).unwrap();
        let scales = [0.5, 0.8];
        let c = cwt_coefficients(&f, &k_ref(), &scales).unwrap();
        let cs = cwt_coefficients(&shifted, &k_ref(), &scales).unwrap();
        for s in 0..2 {
            for b in 0..4 {
                for j in 0..g.n {
                    for i in 1..g.n {
                        let k = j * g.n + i;
                        assert!((cs.coeffs[s][b][k] - c.coeffs[s][b][k - 1]).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn plancherel_bilinearity_and_zero() {
        let g = GridGeometry::new(24, 5.0).unwrap();
        let scales = log_scales(0.3, 3.0, 6).unwrap();
        let f = CwtField::gaussian_bump(g);
        let cf = cwt_transform(&f, &k_ref(), &scales).unwrap();
        let (l1, r1) = plancherel_check(&f, &f, &cf, &cf).unwrap();
        let f2 = f.scaled(2.0);
        let c2 = cwt_transform(&f2, &k_ref(), &scales).unwrap();
        let (l2, r2) = plancherel_check(&f2, &f2, &c2, &c2).unwrap();
        assert_eq!((l2, r2), (4.0 * l1, 4.0 * r1));
        let z = CwtField::zero(g);
        let cz = cwt_transform(&z, &k_ref(), &scales).unwrap();
        assert_eq!(plancherel_check(&z, &z, &cz, &cz).unwrap(), (0.0, 0.0));
        let narrow = cwt_transform(&f, &k_ref(), &[1.0, 2.0]).unwrap();
        assert!(plancherel_check(&f, &f, &narrow, &narrow).is_err());
    }

    #[test]
    fn reconstruction_needs_the_constant_and_maps_zero_to_zero() {
        let g = GridGeometry::new(16, 4.0).unwrap();
        let scales = log_scales(0.5, 2.0, 3).unwrap();
        let mut c = cwt_transform(&CwtField::zero(g), &k_ref(), &scales).unwrap();
        assert_eq!(reconstruct(&c, &k_ref()).unwrap(), CwtField::zero(g));
        c.admissibility = None;
        assert!(reconstruct(&c, &k_ref()).is_err());
    }

    #[test]
    fn coefficient_directory_round_trip() {
        let g = GridGeometry::new(16, 4.0).unwrap();
        let scales = log_scales(0.5, 2.0, 3).unwrap();
        let c = cwt_transform(&CwtField::gaussian_bump(g), &k_ref(), &scales).unwrap();
        let dir = std::env::temp_dir().join(format!("cwt-dir-{}", std::process::id()));
        c.write_dir(&dir).unwrap();
        let back = CwtCoefficients::read_dir(&dir).unwrap();
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn log_grid_and_weights() {
        let s = log_scales(0.25, 4.0, 5).unwrap();
        assert_eq!((s[0], s[4]), (0.25, 4.0));
        assert!((s[2] - 1.0).abs() < 1e-15);
        let w = log_trapezoid_weights(&s);
        assert!((w.iter().sum::<f64>() - 16f64.ln()).abs() < 1e-14);
    }
}
