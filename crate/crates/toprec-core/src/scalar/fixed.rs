//! Arbitrary-precision dyadic fixed-point reals and complex numbers.
//!
//! A `FixedPoint` stores mantissa/2^prec exactly. Additions between values of
//! equal precision are exact integer additions, so accumulation order never
//! changes a result; multiplicative operations round to nearest at the smaller
//! operand precision. Transcendental functions (pi, exp, sin, cos, sqrt) carry
//! internal guard bits and return values accurate to within a few ulp.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

const GUARD_BITS: u32 = 64;

/// Round-to-nearest division, ties away from zero.
fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(!den.is_zero());
    let (mut q, r) = num.div_rem(den);
    // |r| / |den| >= 1/2  <=>  2|r| >= |den|
    if (&r * 2u32).abs() >= den.abs() {
        if (num.sign() == Sign::Minus) ^ (den.sign() == Sign::Minus) {
            q -= 1;
        } else {
            q += 1;
        }
    }
    q
}

/// Floor integer square root by Newton iteration; input must be nonnegative.
fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative integer");
    if n.bits() <= 1 {
        return n.clone();
    }
    let mut x = BigInt::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// mantissa/2^prec, the exact dyadic rational semantics of all operations.
#[derive(Clone, Debug)]
pub struct FixedPoint {
    mantissa: BigInt,
    prec: u32,
}

impl FixedPoint {
    pub fn new(mantissa: BigInt, prec: u32) -> Self {
        Self { mantissa, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Self { mantissa: BigInt::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        Self { mantissa: BigInt::one() << prec, prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self { mantissa: BigInt::from(v) << prec, prec }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let num = r.numer() << prec;
        Self { mantissa: div_round(&num, r.denom()), prec }
    }

    /// The exact value mantissa/2^prec as a rational.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.prec)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Same value re-rounded to a new precision (exact when raising).
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Self {
                mantissa: &self.mantissa << (prec - self.prec),
                prec,
            },
            Ordering::Less => {
                let den = BigInt::one() << (self.prec - prec);
                Self { mantissa: div_round(&self.mantissa, &den), prec }
            }
        }
    }

    /// Exact multiplication by 2^k (k may be negative).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            Self { mantissa: &self.mantissa << k as u32, prec: self.prec }
        } else {
            // Lower the value by raising the denominator, then re-round.
            let shifted = Self {
                mantissa: self.mantissa.clone(),
                prec: self.prec + (-k) as u32,
            };
            shifted.with_prec(self.prec)
        }
    }

    pub fn neg(&self) -> Self {
        Self { mantissa: -&self.mantissa, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        Self { mantissa: self.mantissa.abs(), prec: self.prec }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let prec = self.prec.min(rhs.prec);
        let a = self.with_prec(prec);
        let b = rhs.with_prec(prec);
        Self { mantissa: a.mantissa + b.mantissa, prec }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let prec = self.prec.min(rhs.prec);
        let prod = &self.mantissa * &rhs.mantissa;
        let den = BigInt::one() << (self.prec + rhs.prec - prec);
        Self { mantissa: div_round(&prod, &den), prec }
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec.min(rhs.prec);
        // (a/2^pa)/(b/2^pb) = a·2^(pb+prec-pa)/b at precision prec; when the
        // shift is negative fold it into the divisor instead.
        let shift = rhs.prec as i64 + prec as i64 - self.prec as i64;
        let mantissa = if shift >= 0 {
            div_round(&(&self.mantissa << shift as u32), &rhs.mantissa)
        } else {
            div_round(&self.mantissa, &(&rhs.mantissa << (-shift) as u32))
        };
        Ok(Self { mantissa, prec })
    }

    /// Square root (floor at working precision); negative input is an error.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::InvalidArgument(
                "square root of a negative real".into(),
            ));
        }
        // sqrt(m/2^p) = isqrt(m·2^p)/2^p.
        let m = isqrt(&(&self.mantissa << self.prec));
        Ok(Self { mantissa: m, prec: self.prec })
    }

    /// pi to the given precision (Machin: 16 atan(1/5) - 4 atan(1/239)).
    pub fn pi(prec: u32) -> Self {
        let wp = prec + GUARD_BITS;
        let atan_inv = |x: u64| -> BigInt {
            let x2 = BigInt::from(x) * BigInt::from(x);
            let mut term = (BigInt::one() << wp) / BigInt::from(x);
            let mut sum = term.clone();
            let mut k: u64 = 1;
            loop {
                term /= &x2;
                if term.is_zero() {
                    break;
                }
                let t = &term / BigInt::from(2 * k + 1);
                if k % 2 == 1 {
                    sum -= t;
                } else {
                    sum += t;
                }
                k += 1;
            }
            sum
        };
        let m = atan_inv(5) * 16 - atan_inv(239) * 4;
        Self { mantissa: m, prec: wp }.with_prec(prec)
    }

    /// e^x by halving reduction, Taylor series, and repeated squaring.
    pub fn exp(&self) -> Self {
        let prec = self.prec;
        if self.is_negative() {
            let inv = self.neg().exp();
            return Self::one(prec + GUARD_BITS)
                .div(&inv.with_prec(prec + GUARD_BITS))
                .expect("exp is never zero")
                .with_prec(prec);
        }
        let wp = prec + GUARD_BITS;
        let x = self.with_prec(wp);
        // Halve until |x| < 1/2, i.e. mantissa bits < wp.
        let bits = x.mantissa.bits();
        let j = (bits as i64 - wp as i64 + 1).max(0) as u32;
        let y = Self { mantissa: x.mantissa, prec: wp + j }.with_prec(wp);
        let mut sum = Self::one(wp);
        let mut term = Self::one(wp);
        let mut k: u64 = 1;
        while !term.is_zero() {
            term = term.mul(&y);
            term = Self {
                mantissa: div_round(&term.mantissa, &BigInt::from(k)),
                prec: wp,
            };
            sum = sum.add(&term);
            k += 1;
        }
        for _ in 0..j {
            sum = sum.mul(&sum);
        }
        sum.with_prec(prec)
    }

    /// Simultaneous (sin x, cos x) with range reduction modulo 2 pi.
    pub fn sin_cos(&self) -> (Self, Self) {
        let prec = self.prec;
        let wp = prec + GUARD_BITS;
        let two_pi = Self::pi(wp + GUARD_BITS).mul_pow2(1);
        let mut x = self.with_prec(wp + GUARD_BITS);
        // x -= round(x/2pi)·2pi, landing in [-pi, pi].
        let q = div_round(
            &x.div(&two_pi).expect("2*pi is nonzero").mantissa,
            &(BigInt::one() << (wp + GUARD_BITS)),
        );
        x = x.sub(&two_pi.mul(&Self { mantissa: q << (wp + GUARD_BITS), prec: wp + GUARD_BITS }));
        let x = x.with_prec(wp);
        let mut sin = x.clone();
        let mut cos = Self::one(wp);
        let mut term = x.clone();
        let mut k: u64 = 2;
        loop {
            // term alternates between x^k/k! pieces feeding cos (even k) and sin (odd k).
            term = term.mul(&x);
            term = Self {
                mantissa: div_round(&term.mantissa, &BigInt::from(k)),
                prec: wp,
            };
            if term.is_zero() {
                break;
            }
            let signed = if (k / 2) % 2 == 1 { term.neg() } else { term.clone() };
            if k % 2 == 0 {
                cos = cos.add(&signed);
            } else {
                sin = sin.add(&signed);
            }
            k += 1;
        }
        (sin.with_prec(prec), cos.with_prec(prec))
    }

    /// Decimal string with exactly `prec`-determined fractional digits:
    /// m/2^p = m·5^p/10^p, rendered exactly.
    pub fn to_decimal_string(&self) -> String {
        let p = self.prec as usize;
        let scaled = self.mantissa.abs() * BigInt::from(5u32).pow(self.prec);
        let digits = scaled.to_string();
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        if p == 0 {
            return format!("{sign}{digits}");
        }
        let padded = if digits.len() <= p {
            format!("{}{}", "0".repeat(p + 1 - digits.len()), digits)
        } else {
            digits
        };
        let split = padded.len() - p;
        format!("{sign}{}.{}", &padded[..split], &padded[split..])
    }

    /// Parse a plain decimal string (optional sign, optional fraction) at the
    /// given precision; exact whenever the value is dyadic at that precision.
    pub fn from_decimal_string(s: &str, prec: u32) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::InvalidArgument(format!("empty decimal literal {s:?}")));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(Error::InvalidArgument(format!("bad decimal literal {s:?}")));
        }
        let mut n: BigInt = format!("{int_part}{frac_part}")
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad decimal literal {s:?}")))?;
        n *= sign;
        // value = n/10^f; mantissa = n·2^prec/10^f rounded.
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        Ok(Self { mantissa: div_round(&(n << prec), &den), prec })
    }
}

impl PartialEq for FixedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl Eq for FixedPoint {}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare a/2^pa with b/2^pb via a·2^pb vs b·2^pa.
        let lhs = &self.mantissa << other.prec;
        let rhs = &other.mantissa << self.prec;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

/// Complex number with dyadic fixed-point components at a shared precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexAp {
    pub re: FixedPoint,
    pub im: FixedPoint,
}

impl ComplexAp {
    pub fn new(re: FixedPoint, im: FixedPoint) -> Self {
        let p = re.prec().min(im.prec());
        Self { re: re.with_prec(p), im: im.with_prec(p) }
    }

    pub fn zero(prec: u32) -> Self {
        Self { re: FixedPoint::zero(prec), im: FixedPoint::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self { re: FixedPoint::one(prec), im: FixedPoint::zero(prec) }
    }

    pub fn i(prec: u32) -> Self {
        Self { re: FixedPoint::zero(prec), im: FixedPoint::one(prec) }
    }

    pub fn from_real(re: FixedPoint) -> Self {
        let p = re.prec();
        Self { re, im: FixedPoint::zero(p) }
    }

    pub fn from_rationals(re: &BigRational, im: &BigRational, prec: u32) -> Self {
        Self {
            re: FixedPoint::from_rational(re, prec),
            im: FixedPoint::from_rational(im, prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().min(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self { re: self.re.with_prec(prec), im: self.im.with_prec(prec) }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn neg(&self) -> Self {
        Self { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { re: self.re.add(&rhs.re), im: self.im.add(&rhs.im) }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self { re: self.re.sub(&rhs.re), im: self.im.sub(&rhs.im) }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let re = self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im));
        let im = self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re));
        Self { re, im }
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let den = rhs.re.mul(&rhs.re).add(&rhs.im.mul(&rhs.im));
        let re = self.re.mul(&rhs.re).add(&self.im.mul(&rhs.im)).div(&den)?;
        let im = self.im.mul(&rhs.re).sub(&self.re.mul(&rhs.im)).div(&den)?;
        Ok(Self { re, im })
    }

    /// |z| = sqrt(re^2 + im^2).
    pub fn abs(&self) -> FixedPoint {
        self.re
            .mul(&self.re)
            .add(&self.im.mul(&self.im))
            .sqrt()
            .expect("sum of squares is nonnegative")
    }

    /// Principal square root via the numerically stable half-angle form.
    pub fn sqrt(&self) -> Result<Self> {
        let prec = self.prec();
        if self.is_zero() {
            return Ok(Self::zero(prec));
        }
        let r = self.abs();
        let two = FixedPoint::from_i64(2, prec);
        if !self.re.is_negative() {
            // w = sqrt((|z| + re)/2); result = w + i·im/(2w).
            let w = r.add(&self.re).div(&two)?.sqrt()?;
            let im = self.im.div(&w.mul_pow2(1))?;
            Ok(Self { re: w, im })
        } else {
            // w = sqrt((|z| - re)/2); result = |im|/(2w) + i·sign(im)·w.
            let w = r.sub(&self.re).div(&two)?.sqrt()?;
            let re = self.im.abs().div(&w.mul_pow2(1))?;
            let im = if self.im.is_negative() { w.neg() } else { w };
            Ok(Self { re, im })
        }
    }

    /// exp(re)·(cos im + i sin im).
    pub fn exp(&self) -> Self {
        let mag = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Self { re: mag.mul(&c), im: mag.mul(&s) }
    }

    pub fn powi(&self, e: i64) -> Result<Self> {
        let prec = self.prec();
        let base = if e < 0 {
            Self::one(prec).div(self)?
        } else {
            self.clone()
        };
        let mut acc = Self::one(prec);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn scale_rational(&self, c: &BigRational) -> Self {
        let f = FixedPoint::from_rational(c, self.prec());
        Self { re: self.re.mul(&f), im: self.im.mul(&f) }
    }
}

impl fmt::Display for ComplexAp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(s: &str) -> FixedPoint {
        FixedPoint::from_decimal_string(s, 192).unwrap()
    }

    fn assert_close(a: &FixedPoint, b: &FixedPoint, tol: &str) {
        let d = a.sub(b).abs();
        assert!(d <= fp(tol), "|{a} - {b}| = {d} > {tol}");
    }

    #[test]
    fn value_equality_across_precisions() {
        let a = FixedPoint::from_i64(3, 64);
        let b = FixedPoint::from_i64(3, 200);
        assert_eq!(a, b);
        assert!(FixedPoint::from_i64(2, 64) < a);
    }

    #[test]
    fn equal_precision_adds_are_exact() {
        let third = FixedPoint::from_rational(&BigRational::new(1.into(), 3.into()), 128);
        let mut sum = FixedPoint::zero(128);
        for _ in 0..3000 {
            sum = sum.add(&third);
        }
        // Exactly 3000·round(2^128/3), no drift beyond the representation error.
        assert_eq!(sum.mantissa(), &(div_round(&(BigInt::one() << 128), &BigInt::from(3)) * 3000));
    }

    #[test]
    fn pi_digits() {
        let pi = FixedPoint::pi(192);
        assert_close(&pi, &fp("3.14159265358979323846264338327950288419716939937510"), "1e-45");
    }

    #[test]
    fn exp_and_trig() {
        let e = FixedPoint::one(192).exp();
        assert_close(&e, &fp("2.71828182845904523536028747135266249775724709369995"), "1e-45");
        let inv_e = FixedPoint::from_i64(-1, 192).exp();
        assert_close(
            &inv_e,
            &fp("0.36787944117144232159552377016146086744581113103176"),
            "1e-45",
        );
        let pi = FixedPoint::pi(192);
        let (s, c) = pi.sin_cos();
        assert_close(&s, &FixedPoint::zero(192), "1e-45");
        assert_close(&c, &FixedPoint::from_i64(-1, 192), "1e-45");
        let half_pi = pi.mul_pow2(-1);
        let (s2, c2) = half_pi.sin_cos();
        assert_close(&s2, &FixedPoint::one(192), "1e-45");
        assert_close(&c2, &FixedPoint::zero(192), "1e-45");
    }

    #[test]
    fn sqrt_roundtrip() {
        let two = FixedPoint::from_i64(2, 192);
        let r = two.sqrt().unwrap();
        assert_close(&r.mul(&r), &two, "1e-45");
        assert!(FixedPoint::from_i64(-1, 64).sqrt().is_err());
    }

    #[test]
    fn decimal_roundtrip() {
        let x = FixedPoint::from_rational(&BigRational::new((-355).into(), 113.into()), 128);
        let s = x.to_decimal_string();
        let y = FixedPoint::from_decimal_string(&s, 128).unwrap();
        assert_eq!(x, y);
        assert_eq!(FixedPoint::from_i64(5, 0).to_decimal_string(), "5");
        assert_eq!(
            FixedPoint::new(BigInt::from(-3), 2).to_decimal_string(),
            "-0.75"
        );
    }

    #[test]
    fn complex_ops() {
        let prec = 192;
        let i = ComplexAp::i(prec);
        // sqrt(-1) = i.
        let minus_one = ComplexAp::one(prec).neg();
        let s = minus_one.sqrt().unwrap();
        assert_close(&s.re, &FixedPoint::zero(prec), "1e-45");
        assert_close(&s.im, &FixedPoint::one(prec), "1e-45");
        // exp(i·pi) = -1.
        let pi = FixedPoint::pi(prec);
        let e = ComplexAp::new(FixedPoint::zero(prec), pi).exp();
        assert_close(&e.re, &FixedPoint::from_i64(-1, prec), "1e-45");
        assert_close(&e.im, &FixedPoint::zero(prec), "1e-45");
        // (2+3i)/(1-i) = -1/2 + 5/2 i.
        let z = ComplexAp::from_rationals(
            &BigRational::from(BigInt::from(2)),
            &BigRational::from(BigInt::from(3)),
            prec,
        );
        let w = ComplexAp::from_rationals(
            &BigRational::from(BigInt::from(1)),
            &BigRational::from(BigInt::from(-1)),
            prec,
        );
        let q = z.div(&w).unwrap();
        assert_close(
            &q.re,
            &FixedPoint::from_rational(&BigRational::new((-1).into(), 2.into()), prec),
            "1e-45",
        );
        assert_close(
            &q.im,
            &FixedPoint::from_rational(&BigRational::new(5.into(), 2.into()), prec),
            "1e-45",
        );
        // powi round trip: i^{-3} = i.
        let p = i.powi(-3).unwrap();
        assert_close(&p.re, &FixedPoint::zero(prec), "1e-45");
        assert_close(&p.im, &FixedPoint::one(prec), "1e-45");
    }
}
