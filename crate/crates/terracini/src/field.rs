//! Exact coefficient fields: arbitrary-precision rationals and odd prime fields.
//!
//! Everything downstream (forms, matrices, certificates) is generic over
//! [`Field`]. A field value is a lightweight descriptor (`Rationals` is a
//! zero-sized type, `PrimeField` an 8-byte modulus) carried alongside the
//! data it interprets, so forms and matrices over different primes can never
//! be mixed silently.
//!
//! Rank computations over a prime field are a sound *lower* bound for the
//! rank of the same integer matrix over the rationals: reduction mod p can
//! only kill minors, never create them. Full rank mod p therefore certifies
//! full rank over the rationals, which is what the fast certificate paths
//! rely on.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exactla;
use crate::Error;

/// Default modulus for the prime-field fast path: the largest 32-bit prime,
/// 2^32 - 5. Products of two residues fit in a u128 without overflow.
pub const DEFAULT_WITNESS_PRIME: u64 = 4_294_967_291;

/// Label attached to reports so a consumer can tell a rational certificate
/// from a prime-field one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldLabel {
    #[serde(rename = "rational")]
    Rational,
    #[serde(rename = "prime-field")]
    PrimeField,
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldLabel::Rational => write!(f, "rational"),
            FieldLabel::PrimeField => write!(f, "prime-field"),
        }
    }
}

/// Runtime choice of coefficient field, as selected on a command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldChoice {
    Rational,
    Prime(u64),
}

impl FieldChoice {
    pub fn label(&self) -> FieldLabel {
        match self {
            FieldChoice::Rational => FieldLabel::Rational,
            FieldChoice::Prime(_) => FieldLabel::PrimeField,
        }
    }
}

/// An exact field of scalars.
///
/// Implementations must be honest fields: every operation is exact and the
/// axioms hold with no rounding anywhere.
#[allow(clippy::wrong_self_convention)] // field-object constructors take &self
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Element representation. `u64` residues for prime fields,
    /// `BigRational` for the rationals.
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Multiplicative inverse. Panics on zero; callers only invert pivots.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;

    /// Image of the rational num/den. Panics if den maps to zero (for a
    /// prime field this means p divides den).
    fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Self::Elem;

    /// Weight used for pivot selection during elimination: among eligible
    /// pivots the one of largest magnitude wins, ties to the lowest row.
    /// For the rationals this is the numerator magnitude; a prime field has
    /// no meaningful magnitude, so every nonzero element weighs the same and
    /// selection degenerates to "first nonzero row".
    fn pivot_magnitude(&self, a: &Self::Elem) -> BigUint;

    /// Exact rank of a dense row-major matrix over this field.
    fn rank_dense(&self, rows: usize, cols: usize, entries: &[Self::Elem]) -> usize;

    fn label(&self) -> FieldLabel;

    /// Render an element for reports and JSON payloads.
    fn elem_string(&self, a: &Self::Elem) -> String;
}

/// The field of arbitrary-precision rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }

    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }

    fn from_ratio(&self, num: &BigInt, den: &BigInt) -> BigRational {
        assert!(!den.is_zero(), "zero denominator");
        BigRational::new(num.clone(), den.clone())
    }

    fn pivot_magnitude(&self, a: &BigRational) -> BigUint {
        a.numer().abs().to_biguint().expect("abs is non-negative")
    }

    fn rank_dense(&self, rows: usize, cols: usize, entries: &[BigRational]) -> usize {
        exactla::bareiss_rank_rational(rows, cols, entries)
    }

    fn label(&self) -> FieldLabel {
        FieldLabel::Rational
    }

    fn elem_string(&self, a: &BigRational) -> String {
        a.to_string()
    }
}

/// A prime field F_p with runtime modulus p > 2^31.
///
/// Elements are residues in `0..p`. The modulus lower bound keeps random
/// integer specializations from collapsing ranks in practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds the field, checking that `p` is prime and exceeds 2^31.
    pub fn new(p: u64) -> Result<Self, Error> {
        if p <= (1 << 31) {
            return Err(Error::InvalidInput(format!(
                "prime-field modulus must exceed 2^31, got {p}"
            )));
        }
        if !is_prime_u64(p) {
            return Err(Error::InvalidInput(format!(
                "prime-field modulus must be prime, got {p}"
            )));
        }
        Ok(PrimeField { p })
    }

    /// The default witness field F_p with p = 2^32 - 5.
    pub fn default_witness() -> Self {
        PrimeField {
            p: DEFAULT_WITNESS_PRIME,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_i128(&self, v: i128) -> u64 {
        let p = self.p as i128;
        (v.rem_euclid(p)) as u64
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }

    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero");
        // Extended Euclid on (a, p); p prime so gcd = 1.
        let (mut r0, mut r1) = (*a as i128, self.p as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        self.reduce_i128(s0)
    }

    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i128(v as i128)
    }

    fn from_bigint(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let r = ((v % &p) + &p) % &p;
        r.try_into().expect("residue fits u64")
    }

    fn from_ratio(&self, num: &BigInt, den: &BigInt) -> u64 {
        let d = self.from_bigint(den);
        assert!(d != 0, "denominator divisible by the field modulus");
        self.mul(&self.from_bigint(num), &self.inv(&d))
    }

    fn pivot_magnitude(&self, a: &u64) -> BigUint {
        if *a == 0 {
            BigUint::zero()
        } else {
            BigUint::one()
        }
    }

    fn rank_dense(&self, rows: usize, cols: usize, entries: &[u64]) -> usize {
        exactla::gauss_rank(self, rows, cols, entries)
    }

    fn label(&self) -> FieldLabel {
        FieldLabel::PrimeField
    }

    fn elem_string(&self, a: &u64) -> String {
        a.to_string()
    }
}

/// Deterministic Miller-Rabin primality test for u64.
///
/// The base set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to be
/// exact for all inputs below 3.3 * 10^24, which covers u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(acc, base);
            }
            base = mulmod(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
