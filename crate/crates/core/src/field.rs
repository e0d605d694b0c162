//! Computation fields.
//!
//! Every algorithm in this crate is written once against [`Field`] and runs
//! either over a small prime field (fast, used for generic certificates) or
//! over the rationals (exact, required for certificates about one specific
//! tensor).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::linalg::Matrix;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus {0} is not a prime below 2^16")]
    InvalidModulus(u32),
    #[error("denominator of {0} vanishes modulo {1}")]
    NotReducible(String, u32),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Shared interface of the prime field and the rationals.
///
/// Elements are plain values; the field object carries whatever context the
/// arithmetic needs (the modulus). All operations are pure.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_rational(&self, v: &Rational) -> Result<Self::Elem, FieldError>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, FieldError>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Draws a random element from the distribution used for sampling points.
    fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    /// Human-readable name, e.g. `GF(127)` or `Q`.
    fn name(&self) -> String;

    /// The modulus for prime fields, `None` for the rationals.
    fn characteristic(&self) -> Option<u32>;

    /// Brings `m` to row echelon form in place using row operations only and
    /// returns the `(row, col)` pivot positions in order.
    ///
    /// Columns are scanned left to right; the pivot of a column is the first
    /// nonzero entry at or below the current row. Columns without a pivot are
    /// skipped, never swapped.
    fn echelonize(&self, m: &mut Matrix<Self::Elem>) -> Vec<(usize, usize)> {
        gaussian_echelon(self, m)
    }
}

/// Textbook elimination, shared by fields without a specialised routine.
pub(crate) fn gaussian_echelon<F: Field>(field: &F, m: &mut Matrix<F::Elem>) -> Vec<(usize, usize)> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&i| !field.is_zero(m.get(i, col))) else {
            continue;
        };
        m.swap_rows(row, p);
        let inv = field.inv(m.get(row, col)).expect("pivot is nonzero by construction");
        for i in row + 1..rows {
            if field.is_zero(m.get(i, col)) {
                continue;
            }
            let factor = field.mul(m.get(i, col), &inv);
            for j in col..cols {
                let v = field.sub(m.get(i, j), &field.mul(&factor, m.get(row, j)));
                m.set(i, j, v);
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    pivots
}

/// The prime field GF(q) with `q < 2^16`, elements stored in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    q: u32,
    /// floor(2^64 / q), for Barrett reduction of products.
    barrett: u64,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

pub const DEFAULT_PRIME: u32 = 127;
pub const ESCALATION_PRIME: u32 = 8191;

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, FieldError> {
        if !(2..1 << 16).contains(&q) || !is_prime(q) {
            return Err(FieldError::InvalidModulus(q));
        }
        Ok(Self {
            q,
            barrett: u64::MAX / q as u64,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        let quot = ((x as u128 * self.barrett as u128) >> 64) as u64;
        let mut r = x - quot * self.q as u64;
        while r >= self.q as u64 {
            r -= self.q as u64;
        }
        r as u32
    }

    /// Canonical representative of an arbitrary integer.
    pub fn from_bigint(&self, v: &BigInt) -> u32 {
        let r = v.mod_floor(&BigInt::from(self.q));
        r.to_u32().expect("residue fits")
    }

    fn pow(&self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.reduce(acc as u64 * base as u64);
            }
            base = self.reduce(base as u64 * base as u64);
            exp >>= 1;
        }
        acc
    }

    /// `target[j] -= factor * source[j]` for every `j`.
    #[inline]
    fn axpy_neg(&self, factor: u32, source: &[u32], target: &mut [u32]) {
        let neg = (self.q - factor) as u64;
        for (t, s) in target.iter_mut().zip(source) {
            *t = self.reduce(*t as u64 + neg * *s as u64);
        }
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field for PrimeField {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.q as i64) as u32
    }
    fn from_rational(&self, v: &Rational) -> Result<u32, FieldError> {
        let num = self.from_bigint(v.numer());
        let den = self.from_bigint(v.denom());
        if den == 0 {
            return Err(FieldError::NotReducible(v.to_string(), self.q));
        }
        self.div(&num, &den)
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        self.reduce(*a as u64 * *b as u64)
    }
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn inv(&self, a: &u32) -> Result<u32, FieldError> {
        if *a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(*a, self.q - 2))
    }
    fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(0..self.q)
    }
    fn name(&self) -> String {
        format!("GF({})", self.q)
    }
    fn characteristic(&self) -> Option<u32> {
        Some(self.q)
    }

    fn echelonize(&self, m: &mut Matrix<u32>) -> Vec<(usize, usize)> {
        let (rows, cols) = (m.rows(), m.cols());
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..cols {
            if row == rows {
                break;
            }
            let Some(p) = (row..rows).find(|&i| *m.get(i, col) != 0) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = self.inv(m.get(row, col)).expect("nonzero pivot");
            let (head, tail) = m.as_mut_slice().split_at_mut((row + 1) * cols);
            let pivot_row = &head[row * cols + col..(row + 1) * cols];
            for target in tail.chunks_exact_mut(cols) {
                let lead = target[col];
                if lead == 0 {
                    continue;
                }
                let factor = self.mul(&lead, &inv);
                self.axpy_neg(factor, pivot_row, &mut target[col..]);
            }
            pivots.push((row, col));
            row += 1;
        }
        pivots
    }
}

/// The rationals. Elimination runs fraction-free over the integers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RationalField;

/// Half-width of the integer range used when sampling exact points.
pub const EXACT_SAMPLE_RADIUS: i64 = 99;

impl Field for RationalField {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn from_i64(&self, v: i64) -> Rational {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(&self, v: &Rational) -> Result<Rational, FieldError> {
        Ok(v.clone())
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn inv(&self, a: &Rational) -> Result<Rational, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(a.recip())
    }
    fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Rational {
        self.from_i64(rng.random_range(-EXACT_SAMPLE_RADIUS..=EXACT_SAMPLE_RADIUS))
    }
    fn name(&self) -> String {
        "Q".to_string()
    }
    fn characteristic(&self) -> Option<u32> {
        None
    }

    fn echelonize(&self, m: &mut Matrix<Rational>) -> Vec<(usize, usize)> {
        let mut ints = m.map(|_| BigInt::zero());
        for i in 0..m.rows() {
            let lcm = m.row(i).iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            for j in 0..m.cols() {
                let v = m.get(i, j);
                ints.set(i, j, v.numer() * (&lcm / v.denom()));
            }
        }
        let pivots = crate::linalg::bareiss_echelon(&mut ints);
        // Strip row contents; keeps later products small.
        for i in 0..ints.rows() {
            let g = ints.row(i).iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
            for j in 0..ints.cols() {
                let v = if g.is_zero() || g.is_one() {
                    ints.get(i, j).clone()
                } else {
                    ints.get(i, j) / &g
                };
                m.set(i, j, Rational::from_integer(v));
            }
        }
        pivots
    }
}

/// Parses `"p/q"` or `"p"` into a canonical rational.
pub fn parse_rational(s: &str) -> Result<Rational, FieldError> {
    let t = s.trim();
    let err = || FieldError::Parse(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(FieldError::DivisionByZero);
            }
            Ok(Rational::new(n, d))
        }
        None => BigInt::from_str(t).map(Rational::from_integer).map_err(|_| err()),
    }
}

/// Formats a rational the way [`parse_rational`] reads it.
pub fn format_rational(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// True when `v` is in lowest terms with a positive denominator.
pub fn is_canonical(v: &Rational) -> bool {
    v.denom().is_positive() && v.numer().gcd(v.denom()).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_of_two_mod_127() {
        let f = PrimeField::new(127).unwrap();
        assert_eq!(f.inv(&2).unwrap(), 64);
        assert_eq!(f.mul(&2, &64), 1);
    }

    #[test]
    fn minus_one_is_self_inverse() {
        let f = PrimeField::new(127).unwrap();
        assert_eq!(f.inv(&126).unwrap(), 126);
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = PrimeField::new(8191).unwrap();
        assert_eq!(f.inv(&0), Err(FieldError::DivisionByZero));
        assert_eq!(RationalField.inv(&Rational::zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn quarters_sum_to_one() {
        let q = RationalField;
        let s = q.add(&parse_rational("3/4").unwrap(), &parse_rational("1/4").unwrap());
        assert_eq!(s, Rational::one());
        assert!(is_canonical(&s));
        assert_eq!(format_rational(&s), "1");
    }

    #[test]
    fn rejects_composite_and_large_moduli() {
        assert!(PrimeField::new(128).is_err());
        assert!(PrimeField::new(65537).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(8191).is_ok());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-6/4").unwrap(), Rational::new((-3).into(), 2.into()));
        assert_eq!(parse_rational(" 7 ").unwrap(), Rational::from_integer(7.into()));
        assert_eq!(parse_rational("5/0"), Err(FieldError::DivisionByZero));
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&parse_rational("2/-4").unwrap()), "-1/2");
    }

    #[test]
    fn rational_reduces_mod_q() {
        let f = PrimeField::new(127).unwrap();
        let half = parse_rational("1/2").unwrap();
        assert_eq!(f.from_rational(&half).unwrap(), 64);
        let bad = parse_rational("1/254").unwrap();
        assert!(matches!(f.from_rational(&bad), Err(FieldError::NotReducible(..))));
    }

    proptest! {
        #[test]
        fn prime_inverse_roundtrip(a in 1u32..8191) {
            let f = PrimeField::new(8191).unwrap();
            prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
        }

        #[test]
        fn barrett_matches_remainder(x in 0u64..(1u64 << 40), q in prop::sample::select(vec![2u32, 3, 127, 8191, 65521])) {
            let f = PrimeField::new(q).unwrap();
            prop_assert_eq!(f.reduce(x) as u64, x % q as u64);
        }

        #[test]
        fn rational_ops_stay_canonical(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let q = RationalField;
            let x = Rational::new(a.into(), b.into());
            let y = Rational::new(c.into(), d.into());
            for v in [q.add(&x, &y), q.sub(&x, &y), q.mul(&x, &y), q.neg(&x)] {
                prop_assert!(is_canonical(&v));
            }
            if !y.is_zero() {
                prop_assert!(is_canonical(&q.div(&x, &y).unwrap()));
            }
        }

        #[test]
        fn reduction_is_additive(a in prop::collection::vec(-100_000i64..100_000, 12),
                                 b in prop::collection::vec(-100_000i64..100_000, 12)) {
            let f = PrimeField::new(127).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(f.from_i64(x + y), f.add(&f.from_i64(*x), &f.from_i64(*y)));
            }
        }
    }
}
