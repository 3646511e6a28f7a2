//! Truncated power series and Laurent series over [`Scalar`], the workhorses
//! behind residue extraction and series inversion in the curve builders.
//!
//! A series knows how many coefficients it carries; binary operations shrink
//! the window to what both operands can honestly determine.

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Dense truncated power series: coeffs[k] multiplies z^k.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Scalar>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        Self { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Self { coeffs: vec![Scalar::zero(); len] }
    }

    pub fn one(len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.coeffs[0] = Scalar::one();
        }
        s
    }

    /// Number of known coefficients (the truncation order).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn truncated(&self, len: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(len);
        Self { coeffs: c }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let n = self.len().min(rhs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs[k].checked_add(&rhs.coeffs[k]))
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.checked_neg()).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|v| v.checked_mul(c))
            .collect::<Result<_>>()?;
        Ok(Self { coeffs })
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        let n = self.len().min(rhs.len());
        let mut coeffs = vec![Scalar::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].checked_add(&a.checked_mul(b)?)?;
            }
        }
        Ok(Self { coeffs })
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_empty() || self.coeffs[0].is_zero() {
            return Err(Error::InvalidArgument(
                "power series inverse needs a nonzero constant term".into(),
            ));
        }
        let n = self.len();
        let c0_inv = Scalar::one().checked_div(&self.coeffs[0])?;
        let mut inv = vec![Scalar::zero(); n];
        inv[0] = c0_inv.clone();
        for k in 1..n {
            // coeff of z^k in self*inv must vanish: sum_{j=0..k} a_j b_{k-j} = 0.
            let mut acc = Scalar::zero();
            for j in 1..=k {
                let a = &self.coeffs[j];
                if a.is_zero() || inv[k - j].is_zero() {
                    continue;
                }
                acc = acc.checked_add(&a.checked_mul(&inv[k - j])?)?;
            }
            inv[k] = acc.checked_neg().checked_mul(&c0_inv)?;
        }
        Ok(Self { coeffs: inv })
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(&num_rational::BigRational::from(num_bigint::BigInt::from(k))))
            .collect();
        Self { coeffs }
    }

    /// Multiply by z^k (drops the top k known coefficients off the window).
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![Scalar::zero(); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }
}

/// Laurent series: coeffs[i] multiplies z^{lead + i}.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    lead: i64,
    coeffs: Vec<Scalar>,
}

impl LaurentSeries {
    pub fn new(lead: i64, coeffs: Vec<Scalar>) -> Self {
        Self { lead, coeffs }
    }

    pub fn from_power(p: &PowerSeries) -> Self {
        Self { lead: 0, coeffs: p.coeffs().to_vec() }
    }

    pub fn lead(&self) -> i64 {
        self.lead
    }

    /// Exponent one past the last known coefficient.
    pub fn upper(&self) -> i64 {
        self.lead + self.coeffs.len() as i64
    }

    pub fn coeff(&self, e: i64) -> Scalar {
        if e < self.lead || e >= self.upper() {
            Scalar::zero()
        } else {
            self.coeffs[(e - self.lead) as usize].clone()
        }
    }

    /// Residue: the coefficient of z^{-1}, which must lie inside the window
    /// (or below it, where it is structurally zero).
    pub fn residue(&self) -> Result<Scalar> {
        if -1 >= self.upper() {
            return Err(Error::InvalidArgument(format!(
                "residue outside the known window [{}, {})",
                self.lead,
                self.upper()
            )));
        }
        Ok(self.coeff(-1))
    }

    /// Normalize so the first stored coefficient is nonzero (empty if all zero).
    fn trimmed(&self) -> Self {
        let first = self.coeffs.iter().position(|c| !c.is_zero());
        match first {
            None => Self { lead: self.upper(), coeffs: Vec::new() },
            Some(i) => Self {
                lead: self.lead + i as i64,
                coeffs: self.coeffs[i..].to_vec(),
            },
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let lead = self.lead.min(rhs.lead);
        let upper = self.upper().min(rhs.upper());
        if upper <= lead {
            return Ok(Self { lead, coeffs: Vec::new() });
        }
        let coeffs = (lead..upper)
            .map(|e| self.coeff(e).checked_add(&rhs.coeff(e)))
            .collect::<Result<_>>()?;
        Ok(Self { lead, coeffs })
    }

    pub fn neg(&self) -> Self {
        Self { lead: self.lead, coeffs: self.coeffs.iter().map(|c| c.checked_neg()).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|v| v.checked_mul(c))
            .collect::<Result<_>>()?;
        Ok(Self { lead: self.lead, coeffs })
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let a = PowerSeries::new(self.coeffs[..n.min(self.coeffs.len())].to_vec());
        let b = PowerSeries::new(rhs.coeffs[..n.min(rhs.coeffs.len())].to_vec());
        Ok(Self {
            lead: self.lead + rhs.lead,
            coeffs: a.mul(&b)?.coeffs,
        })
    }

    /// Inverse of a series whose first nonzero coefficient starts the window.
    pub fn inverse(&self) -> Result<Self> {
        let t = self.trimmed();
        if t.coeffs.is_empty() {
            return Err(Error::DivisionByZero);
        }
        let unit = PowerSeries::new(t.coeffs.clone()).inverse()?;
        Ok(Self { lead: -t.lead, coeffs: unit.coeffs })
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let n = base.coeffs.len();
        let mut acc = Self { lead: 0, coeffs: PowerSeries::one(n).coeffs };
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_i64(v)
    }

    #[test]
    fn geometric_inverse() {
        // (1 - z)^{-1} = 1 + z + z^2 + ...
        let one_minus_z = PowerSeries::new(vec![s(1), s(-1), s(0), s(0), s(0)]);
        let inv = one_minus_z.inverse().unwrap();
        for k in 0..5 {
            assert_eq!(inv.coeff(k), s(1));
        }
        let prod = one_minus_z.mul(&inv).unwrap();
        assert_eq!(prod, PowerSeries::one(5));
    }

    #[test]
    fn inverse_requires_unit() {
        let z = PowerSeries::new(vec![s(0), s(1)]);
        assert!(z.inverse().is_err());
    }

    #[test]
    fn derivative_and_shift() {
        let p = PowerSeries::new(vec![s(7), s(3), s(5)]); // 7 + 3z + 5z^2
        let d = p.derivative();
        assert_eq!(d.coeffs(), &[s(3), s(10)]);
        let shifted = p.shift_up(2);
        assert_eq!(shifted.coeff(2), s(7));
    }

    #[test]
    fn laurent_residue() {
        // (1/z^2)·(1/(1-z)) = z^{-2} + z^{-1} + 1 + ...
        let geo = LaurentSeries::new(0, vec![s(1), s(1), s(1), s(1)]);
        let pole = LaurentSeries::new(-2, vec![s(1)]);
        let prod = pole.mul(&geo).unwrap();
        assert_eq!(prod.residue().unwrap(), s(1));
        assert_eq!(prod.coeff(-2), s(1));
        // A window that ends before z^{-1} cannot certify the residue.
        let low = LaurentSeries::new(-5, vec![s(1), s(2)]);
        assert!(low.residue().is_err());
        // A window strictly above -1 certifies residue zero.
        let high = LaurentSeries::new(3, vec![s(4)]);
        assert_eq!(high.residue().unwrap(), Scalar::zero());
    }

    #[test]
    fn laurent_inverse_of_pole() {
        // (z^{-1}(1 + z))^{-1} = z (1 - z + z^2 - ...)
        let a = LaurentSeries::new(-1, vec![s(1), s(1), s(0), s(0)]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv.lead(), 1);
        assert_eq!(inv.coeff(1), s(1));
        assert_eq!(inv.coeff(2), s(-1));
        assert_eq!(inv.coeff(3), s(1));
        let prod = a.mul(&inv).unwrap();
        assert_eq!(prod.coeff(0), s(1));
        assert_eq!(prod.coeff(1), s(0));
    }

    #[test]
    fn pow_and_trim() {
        let a = LaurentSeries::new(-1, vec![s(2), s(1)]);
        let sq = a.pow(2).unwrap();
        assert_eq!(sq.lead(), -2);
        assert_eq!(sq.coeff(-2), s(4));
        assert_eq!(sq.coeff(-1), s(4));
        let cube_inv = a.pow(-1).unwrap();
        assert_eq!(cube_inv.lead(), 1);
        assert_eq!(cube_inv.coeff(1), Scalar::rational(1, 2));
    }
}
