//! Combinatorial helpers shared across the curve families: factorials, the odd double
//! factorial with the empty-product convention, Bernoulli numbers, and binomials
//! (including the generalized rational-argument binomial).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// n! as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Odd double factorial m!! for odd m >= -1, with (-1)!! = 1 (empty product).
///
/// Panics if `m` is even or below -1; the recursion formulas only ever produce odd
/// arguments down to -1.
pub fn odd_double_factorial(m: i64) -> BigInt {
    assert!(m >= -1 && m % 2 != 0, "odd_double_factorial needs odd m >= -1, got {m}");
    let mut acc = BigInt::one();
    let mut i = 3;
    while i <= m {
        acc *= i;
        i += 2;
    }
    acc
}

/// (2k+1)!! for k >= -1 (so that k = -1 encodes (-1)!! = 1).
pub fn ddf(k: i64) -> BigInt {
    odd_double_factorial(2 * k + 1)
}

/// Binomial coefficient C(n, k) for integer n >= 0.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// Generalized binomial C(x, k) = x(x-1)...(x-k+1)/k! for rational x.
pub fn binomial_rational(x: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        let factor = x - BigRational::from_integer(BigInt::from(i));
        acc *= factor / BigRational::from_integer(BigInt::from(i + 1));
    }
    acc
}

/// Bernoulli numbers B_0..B_n (B_1 = -1/2 convention), by the defining recurrence
/// sum_{j<=m} C(m+1, j) B_j = 0.
pub fn bernoulli_upto(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            let c = BigRational::from_integer(binomial(m as u64 + 1, j as u64));
            acc += c * bj;
        }
        let denom = BigRational::from_integer(BigInt::from(m as u64 + 1));
        b.push(-acc / denom);
    }
    b
}

/// B_{2k} alone.
pub fn bernoulli_even(k: usize) -> BigRational {
    bernoulli_upto(2 * k).pop().expect("nonempty")
}

/// The rational coefficient c such that zeta(2k) = c * pi^{2k}:
/// c = (-1)^{k+1} B_{2k} 2^{2k} / (2 (2k)!).
pub fn zeta_even_coeff(k: usize) -> BigRational {
    assert!(k >= 1, "zeta_even needs k >= 1");
    let b2k = bernoulli_even(k);
    let sign = if k % 2 == 1 { BigInt::one() } else { -BigInt::one() };
    let num = sign * BigInt::from(2u32).pow(2 * k as u32);
    let den = BigInt::from(2) * factorial(2 * k as u64);
    b2k * BigRational::new(num, den)
}
