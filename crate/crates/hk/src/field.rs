//! Coefficient fields.
//!
//! Every coefficient is stored as a `BigRational`. Over a prime field the
//! value is kept as the canonical integer representative in `0..p`, so the
//! same container type serves both characteristics.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Coeff = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u64),
    #[error("denominator {0} vanishes modulo {1}")]
    DenominatorVanishes(BigInt, u32),
    #[error("unknown field `{0}` (expected `q` or `fp:<p>`)")]
    UnknownField(String),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "lowercase")]
#[derive(Default)]
pub enum FieldSpec {
    #[default]
    Rationals,
    Prime(u32),
}


fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if p >= (1u64 << 31) || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec::Prime(p as u32))
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::Prime(p) => *p,
        }
    }

    pub fn is_char_zero(&self) -> bool {
        matches!(self, FieldSpec::Rationals)
    }

    /// Maps an arbitrary rational into the field.
    pub fn reduce(&self, c: &Coeff) -> Result<Coeff, FieldError> {
        match self {
            FieldSpec::Rationals => Ok(c.clone()),
            FieldSpec::Prime(p) => {
                let p_big = BigInt::from(*p);
                let den = c.denom().mod_floor(&p_big);
                if den.is_zero() {
                    return Err(FieldError::DenominatorVanishes(c.denom().clone(), *p));
                }
                let num = c.numer().mod_floor(&p_big);
                let inv = mod_inverse(&den, &p_big);
                Ok(BigRational::from_integer((num * inv).mod_floor(&p_big)))
            }
        }
    }

    /// Reduction for values already known to have an invertible denominator.
    fn norm(&self, c: Coeff) -> Coeff {
        match self {
            FieldSpec::Rationals => c,
            FieldSpec::Prime(_) => self
                .reduce(&c)
                .expect("prime-field values always have unit denominators"),
        }
    }

    pub fn from_int(&self, v: i64) -> Coeff {
        self.norm(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(&self, v: BigInt) -> Coeff {
        self.norm(BigRational::from_integer(v))
    }

    pub fn zero(&self) -> Coeff {
        Coeff::zero()
    }

    pub fn one(&self) -> Coeff {
        Coeff::one()
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.norm(a + b)
    }

    pub fn sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.norm(a - b)
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.norm(a * b)
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        self.norm(-a)
    }

    pub fn inv(&self, a: &Coeff) -> Result<Coeff, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        match self {
            FieldSpec::Rationals => Ok(a.recip()),
            FieldSpec::Prime(p) => {
                let p_big = BigInt::from(*p);
                Ok(BigRational::from_integer(mod_inverse(a.numer(), &p_big)))
            }
        }
    }

    pub fn div(&self, a: &Coeff, b: &Coeff) -> Result<Coeff, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Coeff, e: u32) -> Coeff {
        let mut acc = Coeff::one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Binomial coefficient C(n, k) in the field; Lucas' theorem in characteristic p.
    pub fn binomial(&self, n: u32, k: u32) -> Coeff {
        if k > n {
            return Coeff::zero();
        }
        match self {
            FieldSpec::Rationals => BigRational::from_integer(binomial_big(n, k)),
            FieldSpec::Prime(p) => {
                let p = *p as u64;
                let (mut n, mut k) = (n as u64, k as u64);
                let mut acc = 1u64;
                while n > 0 || k > 0 {
                    let (ni, ki) = (n % p, k % p);
                    if ki > ni {
                        return Coeff::zero();
                    }
                    let small = binomial_big(ni as u32, ki as u32) % BigInt::from(p);
                    acc = acc * small.to_u64().unwrap_or(0) % p;
                    n /= p;
                    k /= p;
                }
                BigRational::from_integer(BigInt::from(acc))
            }
        }
    }

    pub fn format(&self, c: &Coeff) -> String {
        format_coeff(c)
    }
}

pub fn format_coeff(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_coeff(text: &str) -> Option<Coeff> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(text.parse().ok()?)),
    }
}

pub fn binomial_big(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    let x = e.x.mod_floor(m);
    debug_assert!(e.gcd.abs().is_one());
    x
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "q"),
            FieldSpec::Prime(p) => write!(f, "fp:{p}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "q" || s == "qq" || s == "rationals" {
            return Ok(FieldSpec::Rationals);
        }
        if let Some(p) = s.strip_prefix("fp:") {
            let p: u64 = p.parse().map_err(|_| FieldError::UnknownField(s.clone()))?;
            return FieldSpec::prime(p);
        }
        Err(FieldError::UnknownField(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lucas_matches_direct_reduction() {
        let f = FieldSpec::prime(5).unwrap();
        for n in 0..40u32 {
            for k in 0..=n {
                let direct = binomial_big(n, k).mod_floor(&BigInt::from(5));
                assert_eq!(f.binomial(n, k), BigRational::from_integer(direct), "C({n},{k})");
            }
        }
    }

    #[test]
    fn prime_field_inverse() {
        let f = FieldSpec::prime(7).unwrap();
        for a in 1..7 {
            let a = f.from_int(a);
            assert!(f.mul(&a, &f.inv(&a).unwrap()).is_one());
        }
        let half = f.reduce(&BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(half, f.from_int(4));
    }

    #[test]
    fn rejects_composites() {
        assert!(FieldSpec::prime(9).is_err());
        assert!("fp:13".parse::<FieldSpec>().is_ok());
        assert!("fp:1".parse::<FieldSpec>().is_err());
    }
}
