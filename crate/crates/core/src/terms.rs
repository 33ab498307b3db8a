//! Exact sums of radial terms `c s^a (1+s)^b e^{-k beta s} x^n`, where
//! `s = |x|^2` and `x` is the Clifford vector variable.
//!
//! Since `x^2 = -s`, every power of `x` reduces to `n` in `{0, 1}`. The
//! factor `(1 - x^2)` that shows up in some derivations is the same function
//! as `(1 + s)` and is always written in the second form here.
//!
//! Canonical form: terms are grouped into classes sharing `n`, `k` and the
//! fractional parts of `a` and `b`. Inside a class the sum is
//! `s^{a0} (1+s)^{b0} P(s)` for a polynomial `P` with `P(0) != 0` and
//! `P(-1) != 0`, and that factorisation is unique. The stored terms are the
//! monomials of `P` shifted by `s^{a0} (1+s)^{b0}`. Two sums denote the same
//! function exactly when their canonical term maps coincide.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    Rational::from_str(text.trim())
        .map_err(|_| Error::Parse(format!("invalid rational '{text}' (expected p or p/q)")))
}

/// Always `p/q`, including integers (`3/1`), so documents have one shape.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Dimension and weight parameters `(m, mu, alpha, beta)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightParams {
    m: u32,
    mu: Rational,
    alpha: Rational,
    beta: Rational,
}

impl WeightParams {
    pub fn new(m: u32, mu: Rational, alpha: Rational, beta: Rational) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("m must be >= 2, got {m}")));
        }
        if beta.is_negative() {
            return Err(Error::Domain(format!(
                "beta must be >= 0, got {}",
                format_rational(&beta)
            )));
        }
        Ok(Self { m, mu, alpha, beta })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    /// Same dimension and beta, new `(mu, alpha)`.
    pub fn with_mu_alpha(&self, mu: Rational, alpha: Rational) -> Self {
        Self {
            m: self.m,
            mu,
            alpha,
            beta: self.beta.clone(),
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.beta != other.beta {
            return Err(Error::ParamsMismatch(format!(
                "(m={}, beta={}) vs (m={}, beta={})",
                self.m,
                format_rational(&self.beta),
                other.m,
                format_rational(&other.beta)
            )));
        }
        Ok(())
    }
}

/// One term `coeff * s^a * (1+s)^b * e^{-k beta s} * x^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadialTerm {
    pub coeff: Rational,
    pub a: Rational,
    pub b: Rational,
    pub k: i64,
    pub n: u32,
}

impl RadialTerm {
    pub fn new(coeff: Rational, a: Rational, b: Rational, k: i64, n: u32) -> Self {
        Self { coeff, a, b, k, n }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(c, Rational::zero(), Rational::zero(), 0, 0)
    }

    /// `x^n` with unit coefficient.
    pub fn vector_power(n: u32) -> Self {
        Self::new(Rational::one(), Rational::zero(), Rational::zero(), 0, n)
    }
}

impl fmt::Display for RadialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} * |x|^(2*{}) * (1+|x|^2)^({}) * exp(-{} beta |x|^2) * x^{}",
            format_rational(&self.coeff),
            format_rational(&self.a),
            format_rational(&self.b),
            self.k,
            self.n
        )
    }
}

/// Canonical key; the derived order is lexicographic on `(n, a, b, k)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub n: u32,
    pub a: Rational,
    pub b: Rational,
    pub k: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSum {
    params: WeightParams,
    terms: BTreeMap<TermKey, Rational>,
}

/// `x^2 = -s`: move even powers of `x` into `s`.
fn reduce_power(mut t: RadialTerm) -> RadialTerm {
    let half = t.n / 2;
    if half > 0 {
        t.a += int(i64::from(half));
        if half % 2 == 1 {
            t.coeff = -t.coeff;
        }
        t.n %= 2;
    }
    t
}

fn frac(q: &Rational) -> Rational {
    q - q.floor()
}

fn integer_gap(hi: &Rational, lo: &Rational) -> usize {
    (hi - lo)
        .to_integer()
        .to_usize()
        .expect("exponent gap inside a class is a small nonnegative integer")
}

/// Divide by `(1 + s)` if it is a factor; coefficients are low order first.
fn divide_by_one_plus_s(p: &[Rational]) -> Option<Vec<Rational>> {
    let d = p.len() - 1;
    let mut q = vec![Rational::zero(); d];
    q[d - 1] = p[d].clone();
    for i in (1..d).rev() {
        q[i - 1] = &p[i] - &q[i];
    }
    if (&p[0] - &q[0]).is_zero() {
        Some(q)
    } else {
        None
    }
}

fn canonicalize<I>(raw: I) -> BTreeMap<TermKey, Rational>
where
    I: IntoIterator<Item = RadialTerm>,
{
    type ClassKey = (u32, Rational, Rational, i64);
    let mut classes: BTreeMap<ClassKey, Vec<RadialTerm>> = BTreeMap::new();
    for t in raw {
        if t.coeff.is_zero() {
            continue;
        }
        let t = reduce_power(t);
        classes
            .entry((t.n, frac(&t.a), frac(&t.b), t.k))
            .or_default()
            .push(t);
    }

    let mut out = BTreeMap::new();
    for ((n, _, _, k), members) in classes {
        let mut a0 = members.iter().map(|t| &t.a).min().cloned().expect("class is nonempty");
        let mut b0 = members.iter().map(|t| &t.b).min().cloned().expect("class is nonempty");

        let mut poly: Vec<Rational> = Vec::new();
        for t in &members {
            let da = integer_gap(&t.a, &a0);
            let db = integer_gap(&t.b, &b0);
            if poly.len() < da + db + 1 {
                poly.resize(da + db + 1, Rational::zero());
            }
            for j in 0..=db {
                poly[da + j] += &t.coeff * Rational::from_integer(binomial(db, j));
            }
        }
        while poly.last().is_some_and(Zero::is_zero) {
            poly.pop();
        }
        if poly.is_empty() {
            continue;
        }
        let lead = poly.iter().take_while(|c| c.is_zero()).count();
        poly.drain(..lead);
        a0 += int(lead as i64);
        while poly.len() >= 2 {
            match divide_by_one_plus_s(&poly) {
                Some(q) => {
                    poly = q;
                    b0 += Rational::one();
                }
                None => break,
            }
        }
        for (i, c) in poly.into_iter().enumerate() {
            if !c.is_zero() {
                let key = TermKey {
                    n,
                    a: &a0 + int(i as i64),
                    b: b0.clone(),
                    k,
                };
                out.insert(key, c);
            }
        }
    }
    out
}

impl TermSum {
    pub fn zero(params: WeightParams) -> Self {
        Self {
            params,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(params: WeightParams, c: Rational) -> Self {
        Self::from_terms(params, [RadialTerm::constant(c)])
    }

    pub fn one(params: WeightParams) -> Self {
        Self::constant(params, Rational::one())
    }

    /// Builds and normalizes; any power `n` is accepted.
    pub fn from_terms<I>(params: WeightParams, terms: I) -> Self
    where
        I: IntoIterator<Item = RadialTerm>,
    {
        Self {
            params,
            terms: canonicalize(terms),
        }
    }

    /// `s^mu (1+s)^alpha`.
    pub fn weight_s(params: WeightParams, mu: Rational, alpha: Rational) -> Self {
        Self::from_terms(params, [RadialTerm::new(Rational::one(), mu, alpha, 0, 0)])
    }

    /// `(1+s)^alpha e^{-beta s}`.
    pub fn weight_k(params: WeightParams, alpha: Rational) -> Self {
        Self::from_terms(params, [RadialTerm::new(Rational::one(), Rational::zero(), alpha, 1, 0)])
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn with_params(mut self, params: WeightParams) -> Self {
        self.params = params;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Stored terms in canonical key order.
    pub fn terms(&self) -> impl Iterator<Item = RadialTerm> + '_ {
        self.terms.iter().map(|(key, c)| RadialTerm {
            coeff: c.clone(),
            a: key.a.clone(),
            b: key.b.clone(),
            k: key.k,
            n: key.n,
        })
    }

    /// Idempotent; stored sums are always canonical already.
    pub fn normalize(&self) -> Self {
        Self::from_terms(self.params.clone(), self.terms())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.params.compatible(&other.params)?;
        Ok(Self::from_terms(
            self.params.clone(),
            self.terms().chain(other.terms()),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.params.clone());
        }
        Self {
            params: self.params.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Termwise product; radial factors commute with `x`, so the order of the
    /// operands only decides which parameter set the result carries.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.params.compatible(&other.params)?;
        let mut raw = Vec::with_capacity(self.len() * other.len());
        for s in self.terms() {
            for t in other.terms() {
                raw.push(RadialTerm {
                    coeff: &s.coeff * &t.coeff,
                    a: &s.a + &t.a,
                    b: &s.b + &t.b,
                    k: s.k + t.k,
                    n: s.n + t.n,
                });
            }
        }
        Ok(Self::from_terms(self.params.clone(), raw))
    }

    /// Exact Dirac derivative (generator acting from the left).
    pub fn dirac(&self) -> Self {
        let m = self.params.m;
        let two = int(2);
        let mut raw = Vec::with_capacity(4 * self.len());
        for t in self.terms() {
            let up = t.n + 1;
            if !t.a.is_zero() {
                raw.push(RadialTerm::new(
                    &two * &t.a * &t.coeff,
                    &t.a - Rational::one(),
                    t.b.clone(),
                    t.k,
                    up,
                ));
            }
            if !t.b.is_zero() {
                raw.push(RadialTerm::new(
                    &two * &t.b * &t.coeff,
                    t.a.clone(),
                    &t.b - Rational::one(),
                    t.k,
                    up,
                ));
            }
            if t.k != 0 {
                raw.push(RadialTerm::new(
                    -&two * int(t.k) * &self.params.beta * &t.coeff,
                    t.a.clone(),
                    t.b.clone(),
                    t.k,
                    up,
                ));
            }
            if t.n >= 1 {
                let gamma = DiracRule::new(t.n, m).gamma;
                raw.push(RadialTerm::new(gamma * &t.coeff, t.a, t.b, t.k, t.n - 1));
            }
        }
        Self::from_terms(self.params.clone(), raw)
    }

    pub fn dirac_n(&self, times: u32) -> Self {
        (0..times).fold(self.clone(), |acc, _| acc.dirac())
    }

    /// True when every term has nonnegative integer `a`, `b` and `k = 0`.
    pub fn is_polynomial(&self) -> bool {
        self.first_non_polynomial().is_none()
    }

    fn first_non_polynomial(&self) -> Option<RadialTerm> {
        self.terms().find(|t| {
            !t.a.is_integer() || !t.b.is_integer() || t.a.is_negative() || t.b.is_negative() || t.k != 0
        })
    }

    /// Coefficients `c_0..c_D` of `sum_j c_j x^j`, with `D` the exact degree.
    pub fn expand_coeffs(&self) -> Result<Vec<Rational>> {
        if let Some(bad) = self.first_non_polynomial() {
            return Err(Error::NotPolynomial(bad.to_string()));
        }
        let mut coeffs: Vec<Rational> = Vec::new();
        for t in self.terms() {
            let a = t.a.to_integer().to_usize().expect("checked nonnegative integer");
            let b = t.b.to_integer().to_usize().expect("checked nonnegative integer");
            for j in 0..=b {
                // s^{a+j} = (-1)^{a+j} x^{2(a+j)}
                let degree = 2 * (a + j) + t.n as usize;
                if coeffs.len() <= degree {
                    coeffs.resize(degree + 1, Rational::zero());
                }
                let mut c = &t.coeff * Rational::from_integer(binomial(b, j));
                if (a + j) % 2 == 1 {
                    c = -c;
                }
                coeffs[degree] += c;
            }
        }
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rational::zero());
        }
        Ok(coeffs)
    }

    /// Degree in `x`; `None` for non-polynomials and for the zero sum.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        self.expand_coeffs().ok().map(|c| c.len() - 1)
    }

    pub fn evaluator(&self) -> RadialEvaluator {
        RadialEvaluator::new(self)
    }

    /// `(scalar, vector_coeff)` with `t(x) = scalar + vector_coeff * x` at `|x| = r`.
    pub fn eval_radial(&self, r: f64) -> Result<(f64, f64)> {
        self.evaluator().eval(r)
    }

    /// Smallest `a` over terms with the given `n`, if any.
    pub fn min_a(&self, n: u32) -> Option<Rational> {
        self.terms.keys().filter(|k| k.n == n).map(|k| k.a.clone()).min()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TermSumDoc::from(self)).expect("term sum serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&TermSumDoc::from(self)).expect("term sum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TermSumDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("term sum json: {e}")))?;
        doc.try_into()
    }
}

/// `gamma_{n,m}` in `D x^n = gamma_{n,m} x^{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiracRule {
    pub n: u32,
    pub m: u32,
    pub gamma: Rational,
}

impl DiracRule {
    pub fn new(n: u32, m: u32) -> Self {
        let gamma = if n % 2 == 0 {
            -int(i64::from(n))
        } else {
            -int(i64::from(m + n - 1))
        };
        Self { n, m, gamma }
    }
}

/// Floating-point view of a `TermSum` for repeated evaluation.
#[derive(Debug, Clone)]
pub struct RadialEvaluator {
    terms: Vec<CompiledTerm>,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coeff: f64,
    a: f64,
    b: f64,
    decay: f64,
    vector: bool,
}

impl RadialEvaluator {
    fn new(t: &TermSum) -> Self {
        let beta = rational_to_f64(&t.params.beta);
        let terms = t
            .terms()
            .map(|term| CompiledTerm {
                coeff: rational_to_f64(&term.coeff),
                a: rational_to_f64(&term.a),
                b: rational_to_f64(&term.b),
                decay: term.k as f64 * beta,
                vector: term.n == 1,
            })
            .collect();
        Self { terms }
    }

    pub fn has_singular_origin(&self) -> bool {
        self.terms.iter().any(|t| t.a < 0.0)
    }

    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("radius must be finite and >= 0, got {r}")));
        }
        if r == 0.0 && self.has_singular_origin() {
            return Err(Error::Singularity("negative power of |x| evaluated at the origin".into()));
        }
        Ok(self.eval_unchecked(r))
    }

    /// No singularity check; at `r = 0` negative powers give infinities.
    pub fn eval_unchecked(&self, r: f64) -> (f64, f64) {
        let s = r * r;
        let (ln_s, ln_1s) = (s.ln(), s.ln_1p());
        let mut scalar = 0.0;
        let mut vector = 0.0;
        for t in &self.terms {
            let radial = if s == 0.0 {
                if t.a == 0.0 {
                    t.coeff
                } else if t.a > 0.0 {
                    0.0
                } else {
                    f64::INFINITY * t.coeff.signum()
                }
            } else {
                t.coeff * (t.a * ln_s + t.b * ln_1s - t.decay * s).exp()
            };
            if t.vector {
                vector += radial;
            } else {
                scalar += radial;
            }
        }
        (scalar, vector)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub m: u32,
    pub mu: String,
    pub alpha: String,
    pub beta: String,
}

impl From<&WeightParams> for ParamsDoc {
    fn from(p: &WeightParams) -> Self {
        Self {
            m: p.m,
            mu: format_rational(&p.mu),
            alpha: format_rational(&p.alpha),
            beta: format_rational(&p.beta),
        }
    }
}

impl TryFrom<ParamsDoc> for WeightParams {
    type Error = Error;

    fn try_from(d: ParamsDoc) -> Result<Self> {
        WeightParams::new(
            d.m,
            parse_rational(&d.mu)?,
            parse_rational(&d.alpha)?,
            parse_rational(&d.beta)?,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermDoc {
    coeff: String,
    a: String,
    b: String,
    k: i64,
    n: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSumDoc {
    params: ParamsDoc,
    terms: Vec<TermDoc>,
}

impl From<&TermSum> for TermSumDoc {
    fn from(t: &TermSum) -> Self {
        Self {
            params: ParamsDoc::from(&t.params),
            terms: t
                .terms()
                .map(|term| TermDoc {
                    coeff: format_rational(&term.coeff),
                    a: format_rational(&term.a),
                    b: format_rational(&term.b),
                    k: term.k,
                    n: term.n,
                })
                .collect(),
        }
    }
}

impl TryFrom<TermSumDoc> for TermSum {
    type Error = Error;

    fn try_from(doc: TermSumDoc) -> Result<Self> {
        let params = WeightParams::try_from(doc.params)?;
        let mut raw = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            if t.n > 1 {
                return Err(Error::Parse(format!("term power n must be 0 or 1, got {}", t.n)));
            }
            raw.push(RadialTerm::new(
                parse_rational(&t.coeff)?,
                parse_rational(&t.a)?,
                parse_rational(&t.b)?,
                t.k,
                t.n,
            ));
        }
        Ok(TermSum::from_terms(params, raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{vector_power, DenseMultivector, VectorM};
    use proptest::prelude::*;

    fn params(m: u32) -> WeightParams {
        WeightParams::new(m, ratio(1, 3), ratio(-5, 2), ratio(3, 2)).unwrap()
    }

    fn ts(m: u32, terms: Vec<RadialTerm>) -> TermSum {
        TermSum::from_terms(params(m), terms)
    }

    fn term(c: i64, a: Rational, b: Rational, k: i64, n: u32) -> RadialTerm {
        RadialTerm::new(int(c), a, b, k, n)
    }

    #[test]
    fn normalize_examples() {
        let sq = ts(3, vec![RadialTerm::vector_power(2)]);
        assert_eq!(sq, ts(3, vec![term(-1, int(1), int(0), 0, 0)]));

        let cube = ts(3, vec![RadialTerm::vector_power(3)]);
        assert_eq!(cube, ts(3, vec![term(-1, int(1), int(0), 0, 1)]));

        let merged = ts(3, vec![term(2, int(1), int(0), 0, 0), term(3, int(1), int(0), 0, 0)]);
        let stored: Vec<_> = merged.terms().collect();
        assert_eq!(stored, vec![term(5, int(1), int(0), 0, 0)]);
        assert_eq!(merged.normalize(), merged);
    }

    #[test]
    fn canonical_form_identifies_rewritten_factors() {
        // s(1+s)^{-1} + (1+s)^{-1} = 1
        let q = ratio(-1, 1);
        let t = ts(2, vec![term(1, int(1), q.clone(), 0, 0), term(1, int(0), q, 0, 0)]);
        assert_eq!(t, TermSum::one(params(2)));

        // (1+s)^{1/2} written two ways
        let h = ratio(1, 2);
        let lhs = ts(2, vec![term(1, int(0), h.clone(), 0, 1)]);
        let rhs = ts(
            2,
            vec![term(1, int(0), &h - int(1), 0, 1), term(1, int(1), &h - int(1), 0, 1)],
        );
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn add_scale_mul_examples() {
        let s = ts(3, vec![term(2, ratio(1, 2), int(3), 0, 1), term(-7, int(0), int(1), 1, 0)]);
        assert!(s.add(&s.scale(&int(-1))).unwrap().is_zero());
        assert!(s.scale(&int(0)).is_zero());

        let p = params(3);
        let w = TermSum::weight_s(p.clone(), p.mu().clone(), p.alpha().clone());
        let inv = TermSum::weight_s(p.clone(), -p.mu().clone(), -p.alpha().clone());
        assert_eq!(w.mul(&inv).unwrap(), TermSum::one(p.clone()));

        let x = ts(3, vec![RadialTerm::vector_power(1)]);
        assert_eq!(x.mul(&x).unwrap(), ts(3, vec![term(-1, int(1), int(0), 0, 0)]));

        let cs = ts(3, vec![term(4, int(1), int(0), 0, 0)]);
        assert_eq!(x.mul(&cs).unwrap(), ts(3, vec![term(4, int(1), int(0), 0, 1)]));
    }

    #[test]
    fn params_mismatch_is_rejected() {
        let a = TermSum::one(params(2));
        let b = TermSum::one(params(3));
        assert!(matches!(a.add(&b), Err(Error::ParamsMismatch(_))));
        assert!(matches!(a.mul(&b), Err(Error::ParamsMismatch(_))));
    }

    #[test]
    fn dirac_examples() {
        for m in 2..6 {
            let x = ts(m, vec![RadialTerm::vector_power(1)]);
            assert_eq!(x.dirac(), TermSum::constant(params(m), -int(i64::from(m))));
        }
        let minus_s = ts(3, vec![term(-1, int(1), int(0), 0, 0)]);
        assert_eq!(minus_s.dirac(), ts(3, vec![term(-2, int(0), int(0), 0, 1)]));

        let p = params(3);
        let w = TermSum::weight_s(p.clone(), p.mu().clone(), p.alpha().clone());
        let expected = ts(
            3,
            vec![
                RadialTerm::new(int(2) * p.mu(), p.mu() - int(1), p.alpha().clone(), 0, 1),
                RadialTerm::new(int(2) * p.alpha(), p.mu().clone(), p.alpha() - int(1), 0, 1),
            ],
        );
        assert_eq!(w.dirac(), expected);
    }

    #[test]
    fn dirac_power_lemma() {
        for m in 2..=6u32 {
            for n in 1..=9u32 {
                let lhs = ts(m, vec![RadialTerm::vector_power(n)]).dirac();
                let rule = DiracRule::new(n, m);
                let rhs = ts(m, vec![RadialTerm::new(rule.gamma, int(0), int(0), 0, n - 1)]);
                assert_eq!(lhs, rhs, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn expand_coeffs_examples() {
        let five = TermSum::constant(params(2), int(5));
        assert_eq!(five.expand_coeffs().unwrap(), vec![int(5)]);

        let w = TermSum::weight_s(params(2), ratio(1, 2), int(0));
        assert!(matches!(w.expand_coeffs(), Err(Error::NotPolynomial(_))));
        assert!(!w.is_polynomial());

        // (1+s) x = x - x^3
        let t = ts(2, vec![term(1, int(0), int(1), 0, 1)]);
        assert_eq!(t.expand_coeffs().unwrap(), vec![int(0), int(1), int(0), int(-1)]);
        assert_eq!(t.degree(), Some(3));
    }

    #[test]
    fn eval_radial_examples() {
        let one = TermSum::one(params(2));
        assert_eq!(one.eval_radial(2.0).unwrap(), (1.0, 0.0));

        let w = TermSum::weight_s(params(2), int(1), int(1));
        let (sc, v) = w.eval_radial(1.0).unwrap();
        assert!((sc - 2.0).abs() < 1e-15 && v == 0.0);

        let sing = TermSum::weight_s(params(2), int(-1), int(0));
        assert!(matches!(sing.eval_radial(0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = ts(
            4,
            vec![term(3, ratio(1, 3), ratio(-5, 2), 1, 1), term(-2, int(0), int(2), 0, 0)],
        );
        let text = t.to_json();
        let back = TermSum::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
        assert!(text.starts_with("{\"params\":{\"m\":4,\"mu\":\"1/3\""));
    }

    #[test]
    fn json_rejects_bad_power() {
        let bad = r#"{"params":{"m":2,"mu":"0/1","alpha":"0/1","beta":"1/1"},"terms":[{"coeff":"1/1","a":"0/1","b":"0/1","k":0,"n":2}]}"#;
        assert!(TermSum::from_json(bad).is_err());
    }

    fn eval_dense(t: &TermSum, x: &VectorM) -> DenseMultivector {
        let (sc, v) = t.eval_radial(x.norm()).unwrap();
        let mut out = DenseMultivector::scalar(x.dim(), sc).unwrap();
        out = out.checked_add(&x.embed().scale(v)).unwrap();
        out
    }

    fn arb_term() -> impl Strategy<Value = RadialTerm> {
        (-5i64..=5, 0i64..4, -3i64..3, 0i64..2, 0u32..4)
            .prop_map(|(c, a, b, k, n)| RadialTerm::new(int(c), int(a), ratio(b, 2), k, n))
    }

    fn arb_poly_term() -> impl Strategy<Value = RadialTerm> {
        (-5i64..=5, 0i64..3, 0i64..3, 0u32..4)
            .prop_map(|(c, a, b, n)| RadialTerm::new(int(c), int(a), int(b), 0, n))
    }

    proptest! {
        #[test]
        fn dirac_is_linear(s in prop::collection::vec(arb_term(), 0..5),
                           t in prop::collection::vec(arb_term(), 0..5)) {
            let s = ts(3, s);
            let t = ts(3, t);
            prop_assert_eq!(s.add(&t).unwrap().dirac(), s.dirac().add(&t.dirac()).unwrap());
        }

        #[test]
        fn normalize_is_idempotent(s in prop::collection::vec(arb_term(), 0..6)) {
            let s = ts(2, s);
            prop_assert_eq!(s.normalize(), s.clone());
        }

        #[test]
        fn product_rule_for_scalar_factor(f in prop::collection::vec(arb_term(), 1..4),
                                          p in prop::collection::vec(arb_poly_term(), 1..4)) {
            let f: Vec<_> = f.into_iter().map(|mut t| { t.n = 2 * (t.n / 2); t }).collect();
            let f = ts(4, f);
            let p = ts(4, p);
            let lhs = f.mul(&p).unwrap().dirac();
            let rhs = f.dirac().mul(&p).unwrap().add(&f.mul(&p.dirac()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn add_commutes(s in prop::collection::vec(arb_term(), 0..5),
                        t in prop::collection::vec(arb_term(), 0..5)) {
            let s = ts(2, s);
            let t = ts(2, t);
            prop_assert_eq!(s.add(&t).unwrap(), t.add(&s).unwrap());
        }

        #[test]
        fn eval_matches_dense_power_expansion(p in prop::collection::vec(arb_poly_term(), 1..5),
                                              m in 2u32..=4,
                                              xs in prop::collection::vec(-1.5f64..1.5, 4)) {
            let t = ts(m, p);
            let x = VectorM::new(xs[..m as usize].to_vec()).unwrap();
            let coeffs = t.expand_coeffs().unwrap();
            let mut dense = DenseMultivector::zero(m as usize).unwrap();
            for (j, c) in coeffs.iter().enumerate() {
                dense = dense.checked_add(&vector_power(&x, j as u32).scale(rational_to_f64(c))).unwrap();
            }
            let radial = eval_dense(&t, &x);
            let scale = 1.0 + dense.max_abs();
            prop_assert!((&dense - &radial).max_abs() <= 1e-12 * scale);
        }

        #[test]
        fn dirac_squared_is_minus_laplacian(p in prop::collection::vec(arb_poly_term(), 1..4),
                                            m in 2u32..=3,
                                            xs in prop::collection::vec(0.2f64..1.2, 3)) {
            let t = ts(m, p);
            let dd = t.dirac().dirac();
            let x = VectorM::new(xs[..m as usize].to_vec()).unwrap();
            let f = |y: &VectorM| eval_dense(&t, y);
            let stencil = |h: f64| {
                let mut lap = f(&x).scale(-2.0 * m as f64);
                for j in 0..m as usize {
                    lap = &lap + &(&f(&x.shifted(j, h)) + &f(&x.shifted(j, -h)));
                }
                lap.scale(1.0 / (h * h))
            };
            // Richardson step removes the O(h^2) stencil error
            let lap = (&stencil(1e-3).scale(4.0) - &stencil(2e-3)).scale(1.0 / 3.0);
            let exact = eval_dense(&dd, &x);
            let err = (&exact + &lap).max_abs();
            prop_assert!(err <= 1e-5 * (1.0 + exact.max_abs()), "err {err}");
        }
    }
}
