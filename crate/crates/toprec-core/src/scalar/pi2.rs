//! Polynomials in pi^2 with rational coefficients — the exact ring where even zeta
//! values and the hyperbolic-volume times live. Never evaluated to floating point
//! inside the engine; rendering a decimal is a display-layer concern.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::{Error, Result};

/// Sum over k of c_k * (pi^2)^k, keyed by the power k; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Pi2Poly {
    terms: BTreeMap<u32, BigRational>,
}

impl Pi2Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        Self { terms }
    }

    /// c * (pi^2)^k.
    pub fn monomial(k: u32, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of (pi^2)^k.
    pub fn coeff(&self, k: u32) -> BigRational {
        self.terms.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Some(c) iff the polynomial is the constant c.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u32, &BigRational)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, k: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert_add(*k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.insert_add(ka + kb, ca * cb);
            }
        }
        out
    }

    /// Division restricted to nonzero constant divisors; the ring is not a field and
    /// every computation path in the engine divides by rationals only.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let c = rhs.as_constant().ok_or(Error::Pi2Division)?;
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self { terms: self.terms.iter().map(|(k, v)| (*k, v / &c)).collect() })
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    /// Terms as (power, coefficient) pairs in ascending power order.
    pub fn terms(&self) -> Vec<(u32, BigRational)> {
        self.terms.iter().map(|(k, c)| (*k, c.clone())).collect()
    }

    pub fn from_terms(pairs: impl IntoIterator<Item = (u32, BigRational)>) -> Self {
        let mut out = Self::zero();
        for (k, c) in pairs {
            out.insert_add(k, c);
        }
        out
    }
}

impl fmt::Display for Pi2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*pi^2")?,
                _ => write!(f, "{c}*pi^{}", 2 * k)?,
            }
        }
        Ok(())
    }
}
