//! Arithmetic in the cyclotomic field Q(rho), rho a primitive r-th root of unity,
//! in the power basis modulo the r-th cyclotomic polynomial. The power basis gives
//! canonical representatives, so structural equality is field equality.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

type Poly = Vec<BigRational>; // dense, index = degree; no trailing zeros

fn trim(p: &mut Poly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    if out.len() < b.len() {
        out.resize(b.len(), BigRational::zero());
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] -= bi;
    }
    trim(&mut out);
    out
}

/// Quotient and remainder of a by b (b nonzero).
fn poly_divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut rem = a.clone();
    trim(&mut rem);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    while rem.len() > db {
        let dr = rem.len() - 1;
        let c = &rem[dr] / &lead;
        let shift = dr - db;
        quot[shift] = c.clone();
        for (i, bi) in b.iter().enumerate() {
            let t = &c * bi;
            rem[shift + i] -= t;
        }
        trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    trim(&mut quot);
    (quot, rem)
}

/// The r-th cyclotomic polynomial, by recursive exact division of x^r - 1 by the
/// cyclotomic polynomials of the proper divisors of r.
pub fn cyclotomic_polynomial(r: u32) -> Vec<BigRational> {
    assert!(r >= 1);
    let mut num = vec![BigRational::zero(); r as usize + 1];
    num[0] = -BigRational::one();
    num[r as usize] = BigRational::one();
    for d in 1..r {
        if r % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            let (q, rem) = poly_divmod(&num, &phi_d);
            debug_assert!(rem.is_empty(), "cyclotomic division must be exact");
            num = q;
        }
    }
    num
}

/// An element of Q(rho) in the power basis 1, rho, ..., rho^{phi(r)-1} mod Phi_r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cyclotomic {
    r: u32,
    /// Length phi(r) = deg Phi_r; trailing zeros kept so the length is canonical.
    coeffs: Vec<BigRational>,
}

impl Cyclotomic {
    /// Field order r (r >= 3; r = 2 embeds into the rationals and is constructed
    /// upstream as -1).
    pub fn order(&self) -> u32 {
        self.r
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn degree(r: u32) -> usize {
        cyclotomic_polynomial(r).len() - 1
    }

    fn from_poly(r: u32, p: Poly) -> Self {
        let phi = cyclotomic_polynomial(r);
        let (_, mut rem) = poly_divmod(&p, &phi);
        rem.resize(phi.len() - 1, BigRational::zero());
        Self { r, coeffs: rem }
    }

    pub fn from_coeffs(r: u32, coeffs: Vec<BigRational>) -> Result<Self> {
        if r < 3 {
            return Err(Error::InvalidArgument(format!(
                "cyclotomic order must be >= 3 (r = {r} embeds in the rationals)"
            )));
        }
        let d = Self::degree(r);
        if coeffs.len() > d {
            let mut p = coeffs;
            trim(&mut p);
            Ok(Self::from_poly(r, p))
        } else {
            let mut c = coeffs;
            c.resize(d, BigRational::zero());
            Ok(Self { r, coeffs: c })
        }
    }

    pub fn constant(r: u32, c: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); Self::degree(r)];
        coeffs[0] = c;
        Self { r, coeffs }
    }

    /// The generator rho itself (r >= 3).
    pub fn rho(r: u32) -> Self {
        let mut p = vec![BigRational::zero(); 2];
        p[1] = BigRational::one();
        Self::from_poly(r, p)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Some(c) iff the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check_order(&self, rhs: &Self) -> Result<()> {
        if self.r == rhs.r {
            Ok(())
        } else {
            Err(Error::CyclotomicOrderMismatch(self.r, rhs.r))
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_order(rhs)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { r: self.r, coeffs })
    }

    pub fn neg(&self) -> Self {
        Self { r: self.r, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_order(rhs)?;
        let mut a = self.coeffs.clone();
        trim(&mut a);
        let mut b = rhs.coeffs.clone();
        trim(&mut b);
        Ok(Self::from_poly(self.r, poly_mul(&a, &b)))
    }

    /// Multiplicative inverse by the extended Euclidean algorithm against Phi_r,
    /// which is irreducible over Q, so every nonzero element is invertible.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let phi = cyclotomic_polynomial(self.r);
        let mut a = self.coeffs.clone();
        trim(&mut a);
        // Invariants: r0 = s0*a mod Phi, r1 = s1*a mod Phi.
        let mut r0 = phi;
        let mut r1 = a;
        let mut s0: Poly = Vec::new();
        let mut s1: Poly = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, rem) = poly_divmod(&r0, &r1);
            let s_next = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s_next);
        }
        // r0 is a nonzero constant gcd.
        debug_assert_eq!(r0.len(), 1, "Phi_r is irreducible, gcd must be constant");
        let inv_lead = BigRational::one() / r0[0].clone();
        let s = s0.iter().map(|c| c * &inv_lead).collect();
        Ok(Self::from_poly(self.r, s))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        self.check_order(rhs)?;
        self.mul(&rhs.inverse()?)
    }

    pub fn scaled(&self, c: BigRational) -> Self {
        Self { r: self.r, coeffs: self.coeffs.iter().map(|v| v * &c).collect() }
    }

    /// rho-power exponentiation of this element, with negative exponents via inverse.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::constant(self.r, BigRational::one());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*rho")?,
                _ => write!(f, "{c}*rho^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cyclotomic_polys() {
        let as_i64 = |p: &Poly| -> Vec<i64> {
            p.iter()
                .map(|c| {
                    assert!(c.is_integer());
                    c.to_integer().try_into().unwrap()
                })
                .collect()
        };
        assert_eq!(as_i64(&cyclotomic_polynomial(1)), vec![-1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(2)), vec![1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(3)), vec![1, 1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(4)), vec![1, 0, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(6)), vec![1, -1, 1]);
        assert_eq!(as_i64(&cyclotomic_polynomial(12)), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn rho_relations_r3() {
        let rho = Cyclotomic::rho(3);
        // 1 + rho + rho^2 = 0, so rho + rho^2 = -1.
        let sum = rho.add(&rho.pow(2).unwrap()).unwrap();
        assert_eq!(sum.as_rational(), Some(rat(-1, 1)));
        // (rho - rho^{-1})^2 = -3.
        let d = rho.sub(&rho.pow(-1).unwrap()).unwrap();
        let sq = d.mul(&d).unwrap();
        assert_eq!(sq.as_rational(), Some(rat(-3, 1)));
        // rho^3 = 1.
        assert_eq!(rho.pow(3).unwrap().as_rational(), Some(rat(1, 1)));
    }

    #[test]
    fn norm_identity() {
        // prod_{j=1}^{r-1} (1 - rho^j) = r for r in {3, 5, 7}.
        for r in [3u32, 5, 7] {
            let rho = Cyclotomic::rho(r);
            let one = Cyclotomic::constant(r, rat(1, 1));
            let mut prod = one.clone();
            for j in 1..r {
                let t = one.sub(&rho.pow(j as i64).unwrap()).unwrap();
                prod = prod.mul(&t).unwrap();
            }
            assert_eq!(prod.as_rational(), Some(rat(r as i64, 1)));
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let rho = Cyclotomic::rho(5);
        let x = rho
            .scaled(rat(3, 7))
            .add(&Cyclotomic::constant(5, rat(1, 2)))
            .unwrap();
        let inv = x.inverse().unwrap();
        let prod = x.mul(&inv).unwrap();
        assert_eq!(prod.as_rational(), Some(rat(1, 1)));
    }
}
