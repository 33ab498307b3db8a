//! The two monogenic polynomial families and their wavelets.
//!
//! * `S` (Clifford-Gegenbauer-Jacobi): weight `|x|^{2 mu} (1+|x|^2)^alpha`.
//! * `K` (Clifford-Gauss-Gegenbauer-Jacobi): weight `(1+|x|^2)^alpha e^{-beta |x|^2}`.
//!
//! Each family is built twice, by its three-term recurrence and by its
//! Rodrigues formula, and the two results must agree as exact term sums.
//! The recurrence is the normative construction.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::terms::{format_rational, int, ParamsDoc, RadialTerm, Rational, TermSum, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    S,
    K,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::S => f.write_str("S"),
            Family::K => f.write_str("K"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub family: Family,
    pub ell: u32,
    pub params: WeightParams,
}

impl FamilySpec {
    pub fn new(family: Family, ell: u32, params: WeightParams) -> Result<Self> {
        if family == Family::K && !params.beta().is_positive() {
            return Err(Error::Domain(format!(
                "family K needs beta > 0, got {}",
                format_rational(params.beta())
            )));
        }
        Ok(Self {
            family,
            ell,
            params,
        })
    }

    pub fn m(&self) -> u32 {
        self.params.m()
    }

    fn expect(&self, family: Family) -> Result<()> {
        if self.family != family {
            return Err(Error::WrongFamily {
                expected: family.to_string(),
                got: self.family.to_string(),
            });
        }
        Ok(())
    }

    /// Same family and dimension, shifted to `(mu + ell, alpha + ell)`: the
    /// parameters of the polynomial factor inside the wavelet.
    fn shifted_for_wavelet(&self) -> Self {
        let l = int(i64::from(self.ell));
        Self {
            family: self.family,
            ell: self.ell,
            params: self
                .params
                .with_mu_alpha(self.params.mu() + &l, self.params.alpha() + &l),
        }
    }
}

fn term(c: Rational, a: i64, b: i64, n: u32) -> RadialTerm {
    RadialTerm::new(c, int(a), int(b), 0, n)
}

fn s_step(prev: &TermSum, ell: u32) -> TermSum {
    let p = prev.params();
    let l = int(i64::from(ell));
    let two = int(2);
    // -2x[(mu-l)(1+s) + (alpha-l)s]
    let left = TermSum::from_terms(
        p.clone(),
        [
            term(-&two * (p.mu() - &l), 0, 1, 1),
            term(-&two * (p.alpha() - &l), 1, 0, 1),
        ],
    );
    // -s(1+s)
    let right = TermSum::from_terms(p.clone(), [term(-Rational::one(), 1, 1, 0)]);
    combine(&left, prev, &right)
}

fn k_step(prev: &TermSum, ell: u32) -> TermSum {
    let p = prev.params();
    let l = int(i64::from(ell));
    let two = int(2);
    // -[2(alpha-l)x - 2 beta x (1+s)]
    let left = TermSum::from_terms(
        p.clone(),
        [
            term(-&two * (p.alpha() - &l), 0, 0, 1),
            term(&two * p.beta(), 0, 1, 1),
        ],
    );
    // -(1+s)
    let right = TermSum::from_terms(p.clone(), [term(-Rational::one(), 0, 1, 0)]);
    combine(&left, prev, &right)
}

fn combine(left: &TermSum, prev: &TermSum, right: &TermSum) -> TermSum {
    let a = left.mul(prev).expect("same parameters");
    let b = right.mul(&prev.dirac()).expect("same parameters");
    a.add(&b).expect("same parameters")
}

type CacheKey = (Family, WeightParams);

fn cache() -> &'static RwLock<HashMap<CacheKey, Vec<TermSum>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Vec<TermSum>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `P_0..=P_ell` by recurrence; prefixes are memoised per `(family, params)`.
/// Concurrent callers may both compute a sequence; the values are identical
/// so whichever insert lands last is fine.
pub fn recurrence_sequence(family: Family, params: &WeightParams, ell: u32) -> Vec<TermSum> {
    let key = (family, params.clone());
    let want = ell as usize + 1;
    let mut seq = {
        let guard = cache().read().unwrap_or_else(|e| e.into_inner());
        match guard.get(&key) {
            Some(s) if s.len() >= want => return s[..want].to_vec(),
            Some(s) => s.clone(),
            None => vec![TermSum::one(params.clone())],
        }
    };
    while seq.len() < want {
        let l = (seq.len() - 1) as u32;
        let next = match family {
            Family::S => s_step(&seq[l as usize], l),
            Family::K => k_step(&seq[l as usize], l),
        };
        seq.push(next);
    }
    let mut guard = cache().write().unwrap_or_else(|e| e.into_inner());
    let entry = guard.entry(key).or_default();
    if entry.len() < seq.len() {
        *entry = seq.clone();
    }
    seq
}

pub fn gen_s_recurrence(spec: &FamilySpec) -> Result<TermSum> {
    spec.expect(Family::S)?;
    Ok(recurrence_sequence(Family::S, &spec.params, spec.ell).pop().expect("nonempty"))
}

pub fn gen_k_recurrence(spec: &FamilySpec) -> Result<TermSum> {
    spec.expect(Family::K)?;
    Ok(recurrence_sequence(Family::K, &spec.params, spec.ell).pop().expect("nonempty"))
}

fn sign(ell: u32) -> Rational {
    if ell % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// `(-1)^l s^{l-mu} (1+s)^{l-alpha} D^l [s^mu (1+s)^alpha]`.
pub fn rodrigues_s(spec: &FamilySpec) -> Result<TermSum> {
    spec.expect(Family::S)?;
    let p = &spec.params;
    let l = int(i64::from(spec.ell));
    let weight = TermSum::weight_s(p.clone(), p.mu().clone(), p.alpha().clone());
    let prefactor = TermSum::from_terms(
        p.clone(),
        [RadialTerm::new(sign(spec.ell), &l - p.mu(), &l - p.alpha(), 0, 0)],
    );
    prefactor.mul(&weight.dirac_n(spec.ell))
}

/// `(-1)^l (1+s)^{l-alpha} e^{beta s} D^l [(1+s)^alpha e^{-beta s}]`; the
/// prefactor carries Gauss multiplicity `-1` so the exponentials cancel.
pub fn rodrigues_k(spec: &FamilySpec) -> Result<TermSum> {
    spec.expect(Family::K)?;
    let p = &spec.params;
    let l = int(i64::from(spec.ell));
    let weight = TermSum::weight_k(p.clone(), p.alpha().clone());
    let prefactor = TermSum::from_terms(
        p.clone(),
        [RadialTerm::new(sign(spec.ell), Rational::zero(), &l - p.alpha(), -1, 0)],
    );
    let out = prefactor.mul(&weight.dirac_n(spec.ell))?;
    if !out.is_polynomial() {
        return Err(Error::Inconsistent(
            "Gauss factors did not cancel in the Rodrigues product".into(),
        ));
    }
    Ok(out)
}

pub fn polynomial(spec: &FamilySpec) -> Result<TermSum> {
    match spec.family {
        Family::S => gen_s_recurrence(spec),
        Family::K => gen_k_recurrence(spec),
    }
}

pub fn rodrigues(spec: &FamilySpec) -> Result<TermSum> {
    match spec.family {
        Family::S => rodrigues_s(spec),
        Family::K => rodrigues_k(spec),
    }
}

/// The weight `omega` that multiplies the shifted polynomial in the wavelet.
pub fn base_weight(spec: &FamilySpec) -> TermSum {
    let p = spec.params.clone();
    match spec.family {
        Family::S => TermSum::weight_s(p.clone(), p.mu().clone(), p.alpha().clone()),
        Family::K => TermSum::weight_k(p.clone(), p.alpha().clone()),
    }
}

/// The mother wavelet, built as polynomial times weight and checked against
/// the `ell`-fold derivative form.
pub fn wavelet(spec: &FamilySpec) -> Result<TermSum> {
    if spec.ell == 0 {
        return Err(Error::NotAdmissible(
            "ell = 0 gives no vanishing moment; wavelets need ell >= 1".into(),
        ));
    }
    let shifted = spec.shifted_for_wavelet();
    let poly = polynomial(&shifted)?.with_params(spec.params.clone());
    let product = base_weight(spec).mul(&poly)?;

    let p = &spec.params;
    let lifted = match spec.family {
        Family::S => TermSum::weight_s(p.clone(), shifted.params.mu().clone(), shifted.params.alpha().clone()),
        Family::K => TermSum::weight_k(p.clone(), shifted.params.alpha().clone()),
    };
    let derivative = lifted.dirac_n(spec.ell).scale(&sign(spec.ell));
    if product != derivative {
        return Err(Error::Inconsistent(format!(
            "wavelet forms disagree for family {} ell={}",
            spec.family, spec.ell
        )));
    }
    Ok(product)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Which powers of `x` occur in an expanded polynomial.
pub fn parity(coeffs: &[Rational]) -> Parity {
    let has = |rem: usize| {
        coeffs
            .iter()
            .enumerate()
            .any(|(j, c)| j % 2 == rem && !c.is_zero())
    };
    match (has(0), has(1)) {
        (true, true) => Parity::Mixed,
        (_, true) => Parity::Odd,
        _ => Parity::Even,
    }
}

/// Orders of the truncated series `F_N(t, x) = sum_{l <= N} t^l/l! S_l w_{mu-l, alpha-l}`
/// under `(d/dt + D)`. Entry `j` is the coefficient of `t^j / j!`.
pub fn ck_residual(params: &WeightParams, order: u32) -> Result<Vec<TermSum>> {
    let seq = recurrence_sequence(Family::S, params, order + 1);
    let piece = |j: u32| -> Result<TermSum> {
        let l = int(i64::from(j));
        let w = TermSum::weight_s(params.clone(), params.mu() - &l, params.alpha() - &l);
        seq[j as usize].mul(&w)
    };
    let mut out = Vec::with_capacity(order as usize + 1);
    for j in 0..=order {
        let dx = piece(j)?.dirac();
        out.push(if j < order { piece(j + 1)?.add(&dx)? } else { dx });
    }
    Ok(out)
}

/// Expanded polynomial in LaTeX; presentation only.
pub fn latex(spec: &FamilySpec, coeffs: &[Rational]) -> String {
    let p = &spec.params;
    let head = match spec.family {
        Family::S => format!(
            "S_{{{},{}}}^{{{},{}}}(\\underline{{x}})",
            spec.ell,
            p.m(),
            latex_rational(p.mu()),
            latex_rational(p.alpha())
        ),
        Family::K => format!(
            "K_{{{},{}}}^{{{},-{}}}(\\underline{{x}})",
            spec.ell,
            p.m(),
            latex_rational(p.alpha()),
            latex_rational(p.beta())
        ),
    };
    let mut body = String::new();
    for (j, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let magnitude = c.abs();
        let lead = body.is_empty();
        body.push_str(match (lead, c.is_negative()) {
            (true, true) => "-",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        });
        let show_coeff = j == 0 || !magnitude.is_one();
        if show_coeff {
            body.push_str(&latex_rational(&magnitude));
        }
        match j {
            0 => {}
            1 => body.push_str("\\underline{x}"),
            _ => body.push_str(&format!("\\underline{{x}}^{{{j}}}")),
        }
    }
    if body.is_empty() {
        body.push('0');
    }
    format!("{head} = {body}")
}

fn latex_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else if q.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -q.numer(), q.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

/// JSON document for the `poly` command.
#[derive(Debug, Clone, Serialize)]
pub struct PolyDoc {
    pub family: Family,
    pub ell: u32,
    pub params: ParamsDoc,
    pub coeffs: Vec<String>,
    pub degree: usize,
    pub termsum: serde_json::Value,
}

impl PolyDoc {
    pub fn build(spec: &FamilySpec) -> Result<Self> {
        let poly = polynomial(spec)?;
        let coeffs = poly.expand_coeffs()?;
        let termsum = serde_json::from_str(&poly.to_json())
            .map_err(|e| Error::Inconsistent(format!("term sum json: {e}")))?;
        Ok(Self {
            family: spec.family,
            ell: spec.ell,
            params: ParamsDoc::from(&spec.params),
            degree: coeffs.len() - 1,
            coeffs: coeffs.iter().map(format_rational).collect(),
            termsum,
        })
    }
}
