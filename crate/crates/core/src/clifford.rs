//! Dense real Clifford algebra `R_m` with generators `e_j^2 = -1`.
//!
//! Blades are addressed by bitmask: bit `j - 1` set means `e_j` is a factor,
//! and the factors of a blade are always kept in increasing index order.
//! These dense multivectors are the floating-point oracle against which the
//! exact radial-term engine is checked.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest supported dimension (2^12 components).
pub const MAX_DIM: usize = 12;

/// Default central-difference step for [`dirac_numeric`].
pub const DEFAULT_DIRAC_STEP: f64 = 1e-4;

/// Sign picked up when multiplying the canonical blades `e_A e_B`.
///
/// Reordering `e_A e_B` into increasing order costs one transposition for
/// every pair `(i in A, j in B)` with `i > j`; each shared generator then
/// squares to `-1`.
#[inline]
pub fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut rest = a >> 1;
    while rest != 0 {
        swaps += (rest & b).count_ones();
        rest >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the conjugate of a grade-`k` blade: `(-1)^{k(k+1)/2}`.
#[inline]
fn conjugation_sign(blade: usize) -> f64 {
    let k = blade.count_ones();
    if (k * (k + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A point of `R^m`, embedded in the algebra as `x = sum_j x_j e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorM {
    components: Vec<f64>,
}

impl VectorM {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_DIM {
            return Err(Error::Dimension(format!(
                "vector dimension {} outside 1..={MAX_DIM}",
                components.len()
            )));
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Copy with component `j` (0-based) moved by `delta`.
    pub fn shifted(&self, j: usize, delta: f64) -> Self {
        let mut components = self.components.clone();
        components[j] += delta;
        Self { components }
    }

    pub fn embed(&self) -> DenseMultivector {
        let mut mv = DenseMultivector::zero(self.dim()).expect("dimension checked at construction");
        for (j, &c) in self.components.iter().enumerate() {
            mv.coeffs[1 << j] = c;
        }
        mv
    }
}

/// Full `2^m`-component element of `R_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMultivector {
    dim: usize,
    coeffs: Vec<f64>,
}

impl DenseMultivector {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(format!(
                "algebra dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        Ok(Self {
            dim,
            coeffs: vec![0.0; 1 << dim],
        })
    }

    pub fn scalar(dim: usize, value: f64) -> Result<Self> {
        let mut mv = Self::zero(dim)?;
        mv.coeffs[0] = value;
        Ok(mv)
    }

    /// The basis blade `e_{indices}`; indices are 1-based and may come in any
    /// order, the product is taken left to right.
    pub fn blade(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut mv = Self::scalar(dim, 1.0)?;
        for &j in indices {
            if j == 0 || j > dim {
                return Err(Error::Dimension(format!("generator e_{j} not in R_{dim}")));
            }
            let mut gen = Self::zero(dim)?;
            gen.coeffs[1 << (j - 1)] = 1.0;
            mv = mv.geometric_product(&gen)?;
        }
        Ok(mv)
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mv = Self::zero(dim)?;
        if coeffs.len() != mv.coeffs.len() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for R_{dim}, got {}",
                mv.coeffs.len(),
                coeffs.len()
            )));
        }
        Ok(Self { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of the blade with bitmask `blade`.
    pub fn get(&self, blade: usize) -> f64 {
        self.coeffs[blade]
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Grade-1 coefficients `(x_1, ..., x_m)`.
    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.dim).map(|j| self.coeffs[1 << j]).collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(-1.0))
    }

    pub fn geometric_product(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = vec![0.0; self.coeffs.len()];
        for (a, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in other.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                out[a ^ b] += blade_sign(a, b) * ca * cb;
            }
        }
        Ok(Self {
            dim: self.dim,
            coeffs: out,
        })
    }

    /// Clifford conjugation: the anti-involution with `conj(e_j) = -e_j`.
    pub fn conjugate(&self) -> Self {
        Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(blade, &c)| conjugation_sign(blade) * c)
                .collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "multivector dimensions differ: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl Add for &DenseMultivector {
    type Output = DenseMultivector;

    fn add(self, rhs: Self) -> DenseMultivector {
        self.checked_add(rhs).expect("dimension mismatch in multivector addition")
    }
}

impl Sub for &DenseMultivector {
    type Output = DenseMultivector;

    fn sub(self, rhs: Self) -> DenseMultivector {
        self.checked_sub(rhs).expect("dimension mismatch in multivector subtraction")
    }
}

impl Mul for &DenseMultivector {
    type Output = DenseMultivector;

    fn mul(self, rhs: Self) -> DenseMultivector {
        self.geometric_product(rhs)
            .expect("dimension mismatch in geometric product")
    }
}

impl Neg for &DenseMultivector {
    type Output = DenseMultivector;

    fn neg(self) -> DenseMultivector {
        self.scale(-1.0)
    }
}

/// Repeated geometric product `x^n` (with `x^0 = 1`).
pub fn vector_power(x: &VectorM, n: u32) -> DenseMultivector {
    let embedded = x.embed();
    let mut acc = DenseMultivector::scalar(x.dim(), 1.0).expect("dimension checked at construction");
    for _ in 0..n {
        acc = &acc * &embedded;
    }
    acc
}

/// Central-difference Dirac operator `sum_j e_j (f(x + h e_j) - f(x - h e_j)) / 2h`,
/// with the generator acting from the left. Truncation error is `O(h^2)`.
pub fn dirac_numeric<F>(f: F, x: &VectorM, h: f64) -> Result<DenseMultivector>
where
    F: Fn(&VectorM) -> DenseMultivector,
{
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let dim = x.dim();
    let mut acc = DenseMultivector::zero(dim)?;
    for j in 0..dim {
        let forward = f(&x.shifted(j, h));
        let backward = f(&x.shifted(j, -h));
        let diff = forward.checked_sub(&backward)?.scale(0.5 / h);
        let generator = DenseMultivector::blade(dim, &[j + 1])?;
        acc = acc.checked_add(&generator.geometric_product(&diff)?)?;
    }
    Ok(acc)
}
