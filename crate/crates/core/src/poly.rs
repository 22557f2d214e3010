//! Sparse multivariate polynomials over `f64` with exact formal derivatives.
//!
//! A [`PolyField`] is a map from exponent multi-indices to coefficients. Terms
//! are kept in lexicographic exponent order, so evaluation order and
//! serialization are bit-reproducible. Terms whose coefficient becomes exactly
//! zero are pruned after every operation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Default)]
pub struct PolyField {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolyField {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, value: f64) -> Self {
        let mut p = Self::zero(num_vars);
        if value != 0.0 {
            p.terms.insert(vec![0; num_vars], value);
        }
        p
    }

    /// The coordinate function `x_axis` (0-based).
    pub fn variable(num_vars: usize, axis: usize) -> Result<Self> {
        if axis >= num_vars {
            return Err(Error::AxisOutOfRange { axis, num_vars });
        }
        let mut exp = vec![0; num_vars];
        exp[axis] = 1;
        Self::monomial(num_vars, 1.0, exp)
    }

    pub fn monomial(num_vars: usize, coeff: f64, exp: Vec<u32>) -> Result<Self> {
        Self::from_terms(num_vars, [(exp, coeff)])
    }

    /// Collects terms, summing repeated exponents and dropping zeros.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(num_vars);
        for (exp, coeff) in terms {
            if exp.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    found: exp.len(),
                });
            }
            if !coeff.is_finite() {
                return Err(Error::invalid("polynomial coefficient is not finite"));
            }
            *p.terms.entry(exp).or_insert(0.0) += coeff;
        }
        p.prune();
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exp: &[u32]) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &PolyField) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, c) in &self.terms {
            worst = worst.max((c - other.coeff(e)).abs());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(c.abs());
            }
        }
        worst
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: x.len(),
            });
        }
        Ok(self.value_at(x))
    }

    /// Evaluation without the length check; panics in debug builds on mismatch.
    pub(crate) fn value_at(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.num_vars);
        let mut sum = 0.0;
        for (exp, coeff) in &self.terms {
            let mut term = *coeff;
            for (xi, &e) in x.iter().zip(exp) {
                if e > 0 {
                    term *= xi.powi(e as i32);
                }
            }
            sum += term;
        }
        sum
    }

    /// Formal partial derivative along the 0-based `axis`.
    pub fn partial(&self, axis: usize) -> Result<PolyField> {
        if axis >= self.num_vars {
            return Err(Error::AxisOutOfRange {
                axis,
                num_vars: self.num_vars,
            });
        }
        Ok(self.d(axis))
    }

    pub(crate) fn d(&self, axis: usize) -> PolyField {
        let mut out = PolyField::zero(self.num_vars);
        for (exp, coeff) in &self.terms {
            let e = exp[axis];
            if e == 0 {
                continue;
            }
            let mut lowered = exp.clone();
            lowered[axis] = e - 1;
            *out.terms.entry(lowered).or_insert(0.0) += coeff * f64::from(e);
        }
        out.prune();
        out
    }

    pub fn checked_add(&self, other: &PolyField) -> Result<PolyField> {
        self.same_vars(other)?;
        Ok(self.combine(other, 1.0))
    }

    pub fn checked_sub(&self, other: &PolyField) -> Result<PolyField> {
        self.same_vars(other)?;
        Ok(self.combine(other, -1.0))
    }

    pub fn checked_mul(&self, other: &PolyField) -> Result<PolyField> {
        self.same_vars(other)?;
        Ok(self.product(other))
    }

    pub fn scale(&self, factor: f64) -> PolyField {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out.prune();
        out
    }

    /// `self += factor * other`, the workhorse of every tensor contraction.
    pub(crate) fn add_scaled(&mut self, other: &PolyField, factor: f64) {
        debug_assert_eq!(self.num_vars, other.num_vars);
        if factor == 0.0 {
            return;
        }
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(0.0) += factor * c;
        }
        self.prune();
    }

    /// `self += factor * a * b`.
    pub(crate) fn add_product(&mut self, a: &PolyField, b: &PolyField, factor: f64) {
        if factor == 0.0 || a.is_zero() || b.is_zero() {
            return;
        }
        let mut exp = vec![0u32; self.num_vars];
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                for (slot, (x, y)) in exp.iter_mut().zip(ea.iter().zip(eb)) {
                    *slot = x + y;
                }
                match self.terms.get_mut(&exp) {
                    Some(c) => *c += factor * ca * cb,
                    None => {
                        self.terms.insert(exp.clone(), factor * ca * cb);
                    }
                }
            }
        }
        self.prune();
    }

    fn combine(&self, other: &PolyField, sign: f64) -> PolyField {
        let mut out = self.clone();
        out.add_scaled(other, sign);
        out
    }

    fn product(&self, other: &PolyField) -> PolyField {
        let mut out = PolyField::zero(self.num_vars);
        out.add_product(self, other, 1.0);
        out
    }

    fn same_vars(&self, other: &PolyField) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }
}

impl fmt::Debug for PolyField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exp, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, &e) in exp.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

// Operator forms panic on a variable-count mismatch; use the `checked_*`
// methods at API boundaries.

impl Add for &PolyField {
    type Output = PolyField;
    fn add(self, rhs: &PolyField) -> PolyField {
        self.checked_add(rhs)
            .expect("PolyField add: variable count mismatch")
    }
}

impl Sub for &PolyField {
    type Output = PolyField;
    fn sub(self, rhs: &PolyField) -> PolyField {
        self.checked_sub(rhs)
            .expect("PolyField sub: variable count mismatch")
    }
}

impl Mul for &PolyField {
    type Output = PolyField;
    fn mul(self, rhs: &PolyField) -> PolyField {
        self.checked_mul(rhs)
            .expect("PolyField mul: variable count mismatch")
    }
}

impl Neg for &PolyField {
    type Output = PolyField;
    fn neg(self) -> PolyField {
        self.scale(-1.0)
    }
}
