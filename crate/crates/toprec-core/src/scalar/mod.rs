//! Exact scalar arithmetic over the four coefficient rings used by the
//! recursion: rationals, polynomials in pi^2, cyclotomic fields, and
//! arbitrary-precision complex numbers.
//!
//! Rationals promote silently into every other variant; any other mixed-variant
//! operation is a hard error, so a computation can never silently change ring.

pub mod cyclotomic;
pub mod fixed;
pub mod pi2;
pub mod special;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};
pub use cyclotomic::Cyclotomic;
pub use fixed::{ComplexAp, FixedPoint};
pub use pi2::Pi2Poly;

/// A value in one of the supported coefficient rings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scalar {
    Rational(BigRational),
    Pi2(Pi2Poly),
    Cyclo(Cyclotomic),
    Complex(ComplexAp),
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    s.parse()
        .map_err(|_| Error::InvalidArgument(format!("bad integer literal {s:?}")))
}

/// Parse "n" or "n/d" into an exact rational.
pub fn rational_from_str(s: &str) -> Result<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        None => Ok(BigRational::from(parse_bigint(s)?)),
        Some((n, d)) => {
            let den = parse_bigint(d.trim())?;
            if den.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(parse_bigint(n.trim())?, den))
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(BigRational::one())
    }

    pub fn from_i64(v: i64) -> Self {
        Scalar::Rational(BigRational::from(BigInt::from(v)))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Scalar::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Rational(r)
    }

    /// zeta(2k) as an exact multiple of pi^{2k}, k >= 1.
    pub fn zeta_even(k: usize) -> Self {
        Scalar::Pi2(Pi2Poly::monomial(k as u32, special::zeta_even_coeff(k)))
    }

    /// c * (pi^2)^k.
    pub fn pi2_monomial(k: u32, c: BigRational) -> Self {
        Scalar::Pi2(Pi2Poly::monomial(k, c))
    }

    /// A primitive r-th root of unity. r = 2 is the rational -1; r >= 3 lives
    /// in the cyclotomic field of order r.
    pub fn cyclotomic_root(r: u32) -> Result<Self> {
        match r {
            0 | 1 => Err(Error::InvalidArgument(format!(
                "no primitive root of unity of order {r} below 2"
            ))),
            2 => Ok(Scalar::from_i64(-1)),
            _ => Ok(Scalar::Cyclo(Cyclotomic::rho(r))),
        }
    }

    pub fn complex(re: FixedPoint, im: FixedPoint) -> Self {
        Scalar::Complex(ComplexAp::new(re, im))
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Scalar::Rational(_) => "rational",
            Scalar::Pi2(_) => "pi2",
            Scalar::Cyclo(_) => "cyclotomic",
            Scalar::Complex(_) => "complex",
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Pi2(p) => p.is_zero(),
            Scalar::Cyclo(c) => c.is_zero(),
            Scalar::Complex(z) => z.is_zero(),
        }
    }

    /// Some(rational) iff the value lies in Q (complex values never do).
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Rational(r) => Some(r.clone()),
            Scalar::Pi2(p) => p.as_constant(),
            Scalar::Cyclo(c) => c.as_rational(),
            Scalar::Complex(_) => None,
        }
    }

    /// Numeric evaluation: exact variants are evaluated at pi and at
    /// e^{2 pi i / r} to the requested precision.
    pub fn to_complex(&self, prec: u32) -> ComplexAp {
        match self {
            Scalar::Rational(r) => {
                ComplexAp::from_real(FixedPoint::from_rational(r, prec))
            }
            Scalar::Pi2(p) => {
                let wp = prec + 32;
                let pi2 = {
                    let pi = FixedPoint::pi(wp);
                    pi.mul(&pi)
                };
                let mut acc = FixedPoint::zero(wp);
                for (k, c) in p.iter() {
                    let mut pow = FixedPoint::from_rational(c, wp);
                    for _ in 0..*k {
                        pow = pow.mul(&pi2);
                    }
                    acc = acc.add(&pow);
                }
                ComplexAp::from_real(acc.with_prec(prec))
            }
            Scalar::Cyclo(c) => {
                let wp = prec + 32;
                let r = c.order() as i64;
                let two_pi_over_r = FixedPoint::pi(wp)
                    .mul_pow2(1)
                    .div(&FixedPoint::from_i64(r, wp))
                    .expect("order is nonzero");
                let (s, co) = two_pi_over_r.sin_cos();
                let rho = ComplexAp::new(co, s);
                let mut acc = ComplexAp::zero(wp);
                let mut pow = ComplexAp::one(wp);
                for coeff in c.coeffs() {
                    acc = acc.add(&pow.scale_rational(coeff));
                    pow = pow.mul(&rho);
                }
                acc.with_prec(prec)
            }
            Scalar::Complex(z) => z.with_prec(prec),
        }
    }

    fn mismatch(&self, rhs: &Self) -> Error {
        Error::VariantMismatch(self.variant_name(), rhs.variant_name())
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        use Scalar::*;
        Ok(match (self, rhs) {
            (Rational(a), Rational(b)) => Rational(a + b),
            (Pi2(a), Pi2(b)) => Pi2(a.add(b)),
            (Rational(a), Pi2(b)) => Pi2(Pi2Poly::constant(a.clone()).add(b)),
            (Pi2(a), Rational(b)) => Pi2(a.add(&Pi2Poly::constant(b.clone()))),
            (Cyclo(a), Cyclo(b)) => Cyclo(a.add(b)?),
            (Rational(a), Cyclo(b)) => {
                Cyclo(Cyclotomic::constant(b.order(), a.clone()).add(b)?)
            }
            (Cyclo(a), Rational(b)) => {
                Cyclo(a.add(&Cyclotomic::constant(a.order(), b.clone()))?)
            }
            (Complex(a), Complex(b)) => Complex(a.add(b)),
            (Rational(a), Complex(b)) => {
                Complex(ComplexAp::from_real(FixedPoint::from_rational(a, b.prec())).add(b))
            }
            (Complex(a), Rational(b)) => {
                Complex(a.add(&ComplexAp::from_real(FixedPoint::from_rational(b, a.prec()))))
            }
            _ => return Err(self.mismatch(rhs)),
        })
    }

    pub fn checked_neg(&self) -> Self {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Pi2(p) => Scalar::Pi2(p.neg()),
            Scalar::Cyclo(c) => Scalar::Cyclo(c.neg()),
            Scalar::Complex(z) => Scalar::Complex(z.neg()),
        }
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(&rhs.checked_neg())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        use Scalar::*;
        Ok(match (self, rhs) {
            (Rational(a), Rational(b)) => Rational(a * b),
            (Pi2(a), Pi2(b)) => Pi2(a.mul(b)),
            (Rational(a), Pi2(b)) => Pi2(b.scale(a)),
            (Pi2(a), Rational(b)) => Pi2(a.scale(b)),
            (Cyclo(a), Cyclo(b)) => Cyclo(a.mul(b)?),
            (Rational(a), Cyclo(b)) => Cyclo(b.scaled(a.clone())),
            (Cyclo(a), Rational(b)) => Cyclo(a.scaled(b.clone())),
            (Complex(a), Complex(b)) => Complex(a.mul(b)),
            (Rational(a), Complex(b)) => Complex(b.scale_rational(a)),
            (Complex(a), Rational(b)) => Complex(a.scale_rational(b)),
            _ => return Err(self.mismatch(rhs)),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        use Scalar::*;
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match (self, rhs) {
            (Rational(a), Rational(b)) => Rational(a / b),
            (Pi2(a), Pi2(b)) => Pi2(a.div(b)?),
            (Rational(a), Pi2(b)) => Pi2(Pi2Poly::constant(a.clone()).div(b)?),
            (Pi2(a), Rational(b)) => Pi2(a.scale(&(BigRational::one() / b))),
            (Cyclo(a), Cyclo(b)) => Cyclo(a.div(b)?),
            (Rational(a), Cyclo(b)) => {
                Cyclo(Cyclotomic::constant(b.order(), a.clone()).div(b)?)
            }
            (Cyclo(a), Rational(b)) => Cyclo(a.scaled(BigRational::one() / b)),
            (Complex(a), Complex(b)) => Complex(a.div(b)?),
            (Rational(a), Complex(b)) => Complex(
                ComplexAp::from_real(FixedPoint::from_rational(a, b.prec())).div(b)?,
            ),
            (Complex(a), Rational(b)) => {
                Complex(a.scale_rational(&(BigRational::one() / b)))
            }
            _ => return Err(self.mismatch(rhs)),
        })
    }

    /// Exact scaling by a rational, available in every variant.
    pub fn scale(&self, c: &BigRational) -> Self {
        match self {
            Scalar::Rational(r) => Scalar::Rational(r * c),
            Scalar::Pi2(p) => Scalar::Pi2(p.scale(c)),
            Scalar::Cyclo(cy) => Scalar::Cyclo(cy.scaled(c.clone())),
            Scalar::Complex(z) => Scalar::Complex(z.scale_rational(c)),
        }
    }

    pub fn try_pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return Scalar::one().checked_div(&self.try_pow(-e)?);
        }
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $checked:ident, $msg:literal) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).expect($msg)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$checked(&rhs).expect($msg)
            }
        }
    };
}

scalar_binop!(Add, add, checked_add, "scalar variant mismatch in addition");
scalar_binop!(Sub, sub, checked_sub, "scalar variant mismatch in subtraction");
scalar_binop!(Mul, mul, checked_mul, "scalar variant mismatch in multiplication");

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.checked_neg()
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.checked_neg()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Pi2(p) => write!(f, "{p}"),
            Scalar::Cyclo(c) => write!(f, "{c}"),
            Scalar::Complex(z) => write!(f, "{z}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(r) => {
                let mut m = serializer.serialize_map(Some(3))?;
                m.serialize_entry("kind", "rational")?;
                m.serialize_entry("num", &r.numer().to_string())?;
                m.serialize_entry("den", &r.denom().to_string())?;
                m.end()
            }
            Scalar::Pi2(p) => {
                let terms: Vec<(u32, String, String)> = p
                    .terms()
                    .into_iter()
                    .map(|(k, c)| (k, c.numer().to_string(), c.denom().to_string()))
                    .collect();
                let mut m = serializer.serialize_map(Some(2))?;
                m.serialize_entry("kind", "pi2")?;
                m.serialize_entry("terms", &terms)?;
                m.end()
            }
            Scalar::Cyclo(c) => {
                let coeffs: Vec<(String, String)> = c
                    .coeffs()
                    .iter()
                    .map(|q| (q.numer().to_string(), q.denom().to_string()))
                    .collect();
                let mut m = serializer.serialize_map(Some(3))?;
                m.serialize_entry("kind", "cyclotomic")?;
                m.serialize_entry("r", &c.order())?;
                m.serialize_entry("coeffs", &coeffs)?;
                m.end()
            }
            Scalar::Complex(z) => {
                let mut m = serializer.serialize_map(Some(4))?;
                m.serialize_entry("kind", "complex")?;
                m.serialize_entry("re", &z.re.to_decimal_string())?;
                m.serialize_entry("im", &z.im.to_decimal_string())?;
                m.serialize_entry("prec", &z.prec())?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        scalar_from_value(&v).map_err(D::Error::custom)
    }
}

fn rat_from_parts(num: &serde_json::Value, den: &serde_json::Value) -> Result<BigRational> {
    let n = num
        .as_str()
        .ok_or_else(|| Error::InvalidArgument("numerator must be a string".into()))?;
    let d = den
        .as_str()
        .ok_or_else(|| Error::InvalidArgument("denominator must be a string".into()))?;
    let d = parse_bigint(d)?;
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(parse_bigint(n)?, d))
}

fn scalar_from_value(v: &serde_json::Value) -> Result<Scalar> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidArgument("scalar must be a JSON object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::InvalidArgument("scalar needs a string `kind` field".into()))?;
    let field = |name: &str| {
        obj.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!("{kind} scalar needs a `{name}` field"))
        })
    };
    match kind {
        "rational" => Ok(Scalar::Rational(rat_from_parts(field("num")?, field("den")?)?)),
        "pi2" => {
            let terms = field("terms")?
                .as_array()
                .ok_or_else(|| Error::InvalidArgument("pi2 `terms` must be an array".into()))?;
            let mut pairs = Vec::new();
            for t in terms {
                let triple = t.as_array().filter(|a| a.len() == 3).ok_or_else(|| {
                    Error::InvalidArgument("pi2 term must be [power, num, den]".into())
                })?;
                let k = triple[0].as_u64().ok_or_else(|| {
                    Error::InvalidArgument("pi2 power must be a nonnegative integer".into())
                })? as u32;
                pairs.push((k, rat_from_parts(&triple[1], &triple[2])?));
            }
            Ok(Scalar::Pi2(Pi2Poly::from_terms(pairs)))
        }
        "cyclotomic" => {
            let r = field("r")?
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("cyclotomic `r` must be an integer".into()))?
                as u32;
            let coeffs = field("coeffs")?
                .as_array()
                .ok_or_else(|| {
                    Error::InvalidArgument("cyclotomic `coeffs` must be an array".into())
                })?
                .iter()
                .map(|c| {
                    let pair = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                        Error::InvalidArgument("cyclotomic coefficient must be [num, den]".into())
                    })?;
                    rat_from_parts(&pair[0], &pair[1])
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Scalar::Cyclo(Cyclotomic::from_coeffs(r, coeffs)?))
        }
        "complex" => {
            let prec = field("prec")?
                .as_u64()
                .ok_or_else(|| Error::InvalidArgument("complex `prec` must be an integer".into()))?
                as u32;
            let re = field("re")?
                .as_str()
                .ok_or_else(|| Error::InvalidArgument("complex `re` must be a string".into()))?;
            let im = field("im")?
                .as_str()
                .ok_or_else(|| Error::InvalidArgument("complex `im` must be a string".into()))?;
            Ok(Scalar::Complex(ComplexAp::new(
                FixedPoint::from_decimal_string(re, prec)?,
                FixedPoint::from_decimal_string(im, prec)?,
            )))
        }
        other => Err(Error::InvalidArgument(format!("unknown scalar kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::rational(n, d)
    }

    #[test]
    fn promotion_rules() {
        let half = rat(1, 2);
        let z2 = Scalar::zeta_even(1); // pi^2/6
        let s = half.checked_add(&z2).unwrap();
        match &s {
            Scalar::Pi2(p) => {
                assert_eq!(p.coeff(0), BigRational::new(1.into(), 2.into()));
                assert_eq!(p.coeff(1), BigRational::new(1.into(), 6.into()));
            }
            _ => panic!("expected pi2 promotion"),
        }
        let rho = Scalar::cyclotomic_root(3).unwrap();
        let t = rho.checked_mul(&rat(2, 1)).unwrap();
        assert_eq!(t.variant_name(), "cyclotomic");
        // Mixed exotic variants refuse to combine.
        assert!(matches!(
            z2.checked_add(&rho),
            Err(Error::VariantMismatch("pi2", "cyclotomic"))
        ));
    }

    #[test]
    fn order_two_root_is_rational() {
        assert_eq!(Scalar::cyclotomic_root(2).unwrap(), Scalar::from_i64(-1));
    }

    #[test]
    fn rational_json_shape() {
        let s = rat(-1, 48);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"kind":"rational","num":"-1","den":"48"}"#
        );
        let back: Scalar = serde_json::from_str(r#"{"kind":"rational","num":"-1","den":"48"}"#).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn pi2_json_roundtrip() {
        let s = rat(1, 24).checked_add(&Scalar::zeta_even(1)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"pi2","terms":[[0,"1","24"],[1,"1","6"]]}"#);
        let back: Scalar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn cyclotomic_json_roundtrip() {
        let rho = Scalar::cyclotomic_root(5).unwrap();
        let v = rho.try_pow(3).unwrap().checked_add(&rat(1, 7)).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: Scalar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn complex_json_roundtrip() {
        let z = Scalar::complex(
            FixedPoint::from_rational(&BigRational::new(3.into(), 4.into()), 64),
            FixedPoint::from_i64(-2, 64),
        );
        let json = serde_json::to_string(&z).unwrap();
        let back: Scalar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn numeric_evaluation() {
        // pi^2/6 evaluates to 1.6449340668...
        let z2 = Scalar::zeta_even(1).to_complex(128);
        let expected = FixedPoint::from_decimal_string("1.644934066848226436472415", 128).unwrap();
        let tol = FixedPoint::from_decimal_string("0.000000000000000000001", 128).unwrap();
        assert!(z2.re.sub(&expected).abs() < tol);
        assert!(z2.im.is_zero());
        // rho(4) = i.
        let i = Scalar::cyclotomic_root(4).unwrap().to_complex(128);
        assert!(i.re.abs() < tol);
        assert!(i.im.sub(&FixedPoint::one(128)).abs() < tol);
    }

    #[test]
    fn division_rules() {
        assert!(rat(1, 2).checked_div(&Scalar::zero()).is_err());
        // Dividing by a pi^2 monomial is not allowed within the polynomial ring.
        let z2 = Scalar::zeta_even(1);
        assert!(matches!(rat(1, 1).checked_div(&z2), Err(Error::Pi2Division)));
        // Cyclotomic division is full field division.
        let rho = Scalar::cyclotomic_root(7).unwrap();
        let q = rat(1, 1).checked_div(&rho).unwrap();
        assert_eq!(q.checked_mul(&rho).unwrap().as_rational(), Some(BigRational::one()));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(rational_from_str("-3").unwrap(), BigRational::from(BigInt::from(-3)));
        assert_eq!(
            rational_from_str("2/6").unwrap(),
            BigRational::new(1.into(), 3.into())
        );
        assert!(rational_from_str("1/0").is_err());
        assert!(rational_from_str("x").is_err());
    }
}
