//! Command-line front end.
//!
//! Errors are reported as one `error: ...` line on stderr. Exit code 1 means
//! the input was rejected, 2 that the numerics failed.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::json;

use crate::analysis::fourier::DEFAULT_TOL;
use crate::analysis::{admissibility, fourier_profile, moment};
use crate::cwt::{cwt_transform, log_scales, plancherel_check, reconstruct, CwtCoefficients, CwtField, GridGeometry};
use crate::error::{Error, Result};
use crate::families::{latex, polynomial, rodrigues, wavelet, Family, FamilySpec, PolyDoc};
use crate::terms::{format_rational, parse_rational, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Poly,
    Check,
    Moments,
    Fourier,
    Admissibility,
    Cwt,
    Reconstruct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Latex,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "monogenic", version, about = "Clifford polynomial families, spheroidal wavelets and a 2-D CWT")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// S or K
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true)]
    pub ell: i64,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub mu: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub alpha: String,
    /// defaults to 0 for S and 1 for K
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long = "half-width", default_value_t = 6.0)]
    pub half_width: f64,
    /// MIN:MAX:COUNT, log-spaced
    #[arg(long, default_value = "0.25:4:24")]
    pub scales: String,
    /// MIN:MAX:COUNT, evenly spaced
    #[arg(long, default_value = "0.2:3:15")]
    pub rho: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// worker threads, 0 = all cores
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// field CSV for `cwt`, coefficient directory for `reconstruct`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// field CSV to compare a reconstruction against
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

fn parse_family(text: &str) -> std::result::Result<Family, String> {
    match text {
        "S" | "s" => Ok(Family::S),
        "K" | "k" => Ok(Family::K),
        other => Err(format!("unknown family {other:?}, expected S or K")),
    }
}

fn parse_triple(text: &str, what: &str) -> Result<(f64, f64, usize)> {
    let bad = || Error::Parse(format!("{what} must look like MIN:MAX:COUNT, got {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].parse::<f64>().map_err(|_| bad())?;
    let hi = parts[1].parse::<f64>().map_err(|_| bad())?;
    let count = parts[2].parse::<usize>().map_err(|_| bad())?;
    Ok((lo, hi, count))
}

fn linear_grid(text: &str) -> Result<Vec<f64>> {
    let (lo, hi, count) = parse_triple(text, "rho")?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() || (count > 1 && !(hi > lo)) {
        return Err(Error::Domain(format!("rho grid {text:?} is empty or not increasing")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

impl RunConfig {
    pub fn spec(&self) -> Result<FamilySpec> {
        if self.ell < 0 {
            return Err(Error::Domain("ell must be >= 0".into()));
        }
        let ell = u32::try_from(self.ell).map_err(|_| Error::Domain("ell is too large".into()))?;
        let default_beta = match self.family {
            Family::S => "0",
            Family::K => "1",
        };
        let params = WeightParams::new(
            self.m,
            parse_rational(&self.mu)?,
            parse_rational(&self.alpha)?,
            parse_rational(self.beta.as_deref().unwrap_or(default_beta))?,
        )?;
        FamilySpec::new(self.family, ell, params)
    }

    fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return Err(Error::Unsupported(format!(
                "format {} is not available for this command",
                f.to_possible_value().expect("named").get_name()
            )));
        }
        Ok(f)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                fs::write(path, text)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| Error::Domain(format!("{flag} is required for this command")))
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json serializes") + "\n"
}

fn poly(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    let doc = PolyDoc::build(spec)?;
    let text = match cfg.format_or(Format::Json, &[Format::Json, Format::Csv, Format::Latex])? {
        Format::Json => serde_json::to_string_pretty(&doc).expect("json serializes") + "\n",
        Format::Latex => {
            let coeffs = polynomial(spec)?.expand_coeffs()?;
            latex(spec, &coeffs) + "\n"
        }
        Format::Csv => {
            let mut out = String::from("power,coeff\n");
            for (i, c) in doc.coeffs.iter().enumerate() {
                out += &format!("{i},{c}\n");
            }
            out
        }
    };
    cfg.emit(&text)
}

fn check(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    if polynomial(spec)? != rodrigues(spec)? {
        return Err(Error::Inconsistent("recurrence and rodrigues forms differ".into()));
    }
    cfg.emit("recurrence == rodrigues: EXACT\n")
}

fn moments(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    let psi = wavelet(spec)?;
    let format = cfg.format_or(Format::Json, &[Format::Json, Format::Csv])?;
    let mut rows = Vec::new();
    for k in 0..=spec.ell {
        match moment(k, &psi) {
            Ok(r) => rows.push((k, "ok".to_string(), Some(r))),
            Err(e @ Error::Divergent { .. }) => rows.push((k, e.to_string(), None)),
            Err(e) => return Err(e),
        }
    }
    let text = match format {
        Format::Csv => {
            let mut out = String::from("k,status,value,abs_error_estimate,abs_integral\n");
            for (k, status, r) in &rows {
                match r {
                    Some(r) => {
                        out += &format!(
                            "{k},{status},{:.16e},{:.16e},{:.16e}\n",
                            r.value, r.abs_error_estimate, r.abs_integral
                        )
                    }
                    None => out += &format!("{k},divergent,,,\n"),
                }
            }
            out
        }
        _ => pretty(&json!(rows
            .iter()
            .map(|(k, status, r)| json!({
                "k": k,
                "status": status,
                "value": r.map(|r| r.value),
                "abs_error_estimate": r.map(|r| r.abs_error_estimate),
                "abs_integral": r.map(|r| r.abs_integral),
            }))
            .collect::<Vec<_>>())),
    };
    cfg.emit(&text)
}

fn fourier(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    let grid = linear_grid(&cfg.rho)?;
    let profile = fourier_profile(spec, &grid, cfg.tol)?;
    let text = match cfg.format_or(Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Csv => profile.to_csv(),
        _ => profile.to_json() + "\n",
    };
    cfg.emit(&text)
}

fn admissibility_cmd(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    cfg.format_or(Format::Json, &[Format::Json])?;
    let result = admissibility(spec, cfg.tol)?;
    cfg.emit(&pretty(&json!({
        "family": spec.family,
        "ell": spec.ell,
        "m": spec.params.m(),
        "mu": format_rational(spec.params.mu()),
        "alpha": format_rational(spec.params.alpha()),
        "beta": format_rational(spec.params.beta()),
        "tol": cfg.tol,
        "constant": result.constant,
        "converged": result.converged,
        "tail_bound": result.tail_bound,
        "error_estimate": result.error_estimate,
    })))
}

fn cwt(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    let dir = cfg.require(&cfg.out, "--out")?;
    let field = match &cfg.input {
        Some(path) => CwtField::from_csv(&fs::read_to_string(path)?)?,
        None => CwtField::gaussian_bump(GridGeometry::new(cfg.grid, cfg.half_width)?),
    };
    let (lo, hi, count) = parse_triple(&cfg.scales, "scales")?;
    let scales = log_scales(lo, hi, count)?;
    let coeffs = cwt_transform(&field, spec, &scales)?;
    let plancherel = match plancherel_check(&field, &field, &coeffs, &coeffs) {
        Ok((lhs, rhs)) => json!({ "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs }),
        Err(Error::Domain(_)) => serde_json::Value::Null,
        Err(e) => return Err(e),
    };
    coeffs.write_dir(dir)?;
    let geometry = field.geometry();
    let summary = pretty(&json!({
        "grid": geometry.n,
        "half_width": geometry.half_width,
        "scales": scales,
        "admissibility": coeffs.admissibility,
        "plancherel": plancherel,
    }));
    fs::write(dir.join("summary.json"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn reconstruct_cmd(cfg: &RunConfig, spec: &FamilySpec) -> Result<()> {
    let dir = cfg.require(&cfg.input, "--input")?;
    let coeffs = CwtCoefficients::read_dir(dir)?;
    let field = reconstruct(&coeffs, spec)?;
    cfg.emit(&field.to_csv())?;
    if let Some(path) = &cfg.reference {
        let reference = CwtField::from_csv(&fs::read_to_string(path)?)?;
        eprintln!("relative_l2_error: {:.16e}", field.relative_error(&reference)?);
    }
    Ok(())
}

fn dispatch(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.spec()?;
    if !(cfg.tol > 0.0) || !cfg.tol.is_finite() {
        return Err(Error::Domain(format!("tol must be > 0, got {}", cfg.tol)));
    }
    match cfg.command {
        Command::Poly => poly(cfg, &spec),
        Command::Check => check(cfg, &spec),
        Command::Moments => moments(cfg, &spec),
        Command::Fourier => fourier(cfg, &spec),
        Command::Admissibility => admissibility_cmd(cfg, &spec),
        Command::Cwt => cwt(cfg, &spec),
        Command::Reconstruct => reconstruct_cmd(cfg, &spec),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
