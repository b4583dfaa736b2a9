//! Exact scalars: arbitrary precision rationals, prime fields `F_p` and
//! their quadratic extensions `F_{p^2}`.
//!
//! Every [`Scalar`] carries enough information to recover its [`FieldSpec`],
//! so binary operations can detect mixed-field operands.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields ({0} vs {1})")]
    MixedFields(FieldSpec, FieldSpec),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("a quadratic extension needs a positive characteristic")]
    ExtensionOfRationals,
    #[error("unsupported extension degree {0}")]
    UnsupportedDegree(u8),
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
    #[error("denominator vanishes modulo {0}")]
    DenominatorVanishes(u64),
    #[error("operation needs positive characteristic")]
    NeedsPositiveCharacteristic,
}

/// Description of a coefficient field.
///
/// For odd `p` the quadratic extension is `F_p[t]/(t^2 - d)` with `d` the
/// smallest quadratic non-residue; for `p = 2` it is `F_2[t]/(t^2 + t + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    characteristic: u64,
    degree: u8,
    nonresidue: u64,
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec { characteristic: 0, degree: 1, nonresidue: 0 }
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec { characteristic: p, degree: 1, nonresidue: 0 })
    }

    pub fn quadratic(p: u64) -> Result<Self, FieldError> {
        if p == 0 {
            return Err(FieldError::ExtensionOfRationals);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let nonresidue = if p == 2 { 0 } else { smallest_nonresidue(p) };
        Ok(FieldSpec { characteristic: p, degree: 2, nonresidue })
    }

    pub fn new(characteristic: u64, extension_degree: u8) -> Result<Self, FieldError> {
        match (characteristic, extension_degree) {
            (0, 1) => Ok(Self::rationals()),
            (0, 2) => Err(FieldError::ExtensionOfRationals),
            (p, 1) => Self::prime(p),
            (p, 2) => Self::quadratic(p),
            (_, d) => Err(FieldError::UnsupportedDegree(d)),
        }
    }

    /// `0` for the rationals, `p` otherwise.
    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn extension_degree(&self) -> u8 {
        self.degree
    }

    /// The constant `d` with `t^2 = d`; `None` for prime fields and for `F_4`.
    pub fn nonresidue(&self) -> Option<u64> {
        (self.degree == 2 && self.characteristic != 2).then_some(self.nonresidue)
    }

    pub fn is_finite(&self) -> bool {
        self.characteristic != 0
    }

    /// Number of elements, for finite fields.
    pub fn size(&self) -> Option<u64> {
        match self.characteristic {
            0 => None,
            p => Some(p.pow(self.degree as u32)),
        }
    }

    /// The prime subfield.
    pub fn base(&self) -> FieldSpec {
        FieldSpec { characteristic: self.characteristic, degree: 1, nonresidue: 0 }
    }

    /// The quadratic extension of the prime subfield.
    pub fn closure(&self) -> Result<FieldSpec, FieldError> {
        Self::quadratic(self.characteristic)
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match (self.characteristic, self.degree) {
            (0, _) => Scalar::Rational(BigRational::from_integer(BigInt::from(n))),
            (p, 1) => Scalar::Prime(Fp::new(reduce_i64(n, p), p)),
            (p, _) => Scalar::Quadratic(Fp2 { c0: reduce_i64(n, p), c1: 0, modulus: p, nonresidue: self.nonresidue }),
        }
    }

    /// `num / den` as an element of this field.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<Scalar, FieldError> {
        if den.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        if self.characteristic == 0 {
            return Ok(Scalar::Rational(BigRational::new(num.clone(), den.clone())));
        }
        let p = self.characteristic;
        let n = reduce_bigint(num, p);
        let d = reduce_bigint(den, p);
        if d == 0 {
            return Err(FieldError::DenominatorVanishes(p));
        }
        let v = mul_mod(n, inv_mod(d, p), p);
        Ok(self.embed_residue(v))
    }

    /// The generator `t` of a quadratic extension.
    pub fn generator(&self) -> Option<Scalar> {
        (self.degree == 2).then_some({
            Scalar::Quadratic(Fp2 { c0: 0, c1: 1, modulus: self.characteristic, nonresidue: self.nonresidue })
        })
    }

    fn embed_residue(&self, v: u64) -> Scalar {
        let p = self.characteristic;
        if self.degree == 1 {
            Scalar::Prime(Fp::new(v, p))
        } else {
            Scalar::Quadratic(Fp2 { c0: v, c1: 0, modulus: p, nonresidue: self.nonresidue })
        }
    }

    /// All elements of a finite field in canonical order.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        let p = self.characteristic;
        match (p, self.degree) {
            (0, _) => None,
            (p, 1) => Some((0..p).map(|v| Scalar::Prime(Fp::new(v, p))).collect()),
            (p, _) => Some(
                (0..p)
                    .flat_map(|c0| (0..p).map(move |c1| (c0, c1)))
                    .map(|(c0, c1)| Scalar::Quadratic(Fp2 { c0, c1, modulus: p, nonresidue: self.nonresidue }))
                    .collect(),
            ),
        }
    }

    /// Parses `p/q`, an integer, or `a+b*t` (extensions only).
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar, FieldError> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || FieldError::Parse(text.to_string());
        if s.is_empty() {
            return Err(err());
        }
        if s.contains('t') {
            if self.degree != 2 {
                return Err(err());
            }
            let (c0, c1) = split_extension(&s).ok_or_else(err)?;
            let a = self.parse_scalar(&c0)?;
            let b = self.parse_scalar(&c1)?;
            return a.checked_add(&b.checked_mul(&self.generator().unwrap())?);
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s.as_str(), "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| err())?;
        let den = BigInt::from_str(den).map_err(|_| err())?;
        self.from_ratio(&num, &den)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.characteristic, self.degree) {
            (0, _) => write!(f, "Q"),
            (p, 1) => write!(f, "F_{p}"),
            (p, d) => write!(f, "F_{p}^{d}"),
        }
    }
}

// "a+b*t", "b*t", "t", "a-t", ... into (a, b) strings.
fn split_extension(s: &str) -> Option<(String, String)> {
    let tpos = s.find('t')?;
    if tpos + 1 != s.len() {
        return None;
    }
    let head = &s[..tpos];
    let head = head.strip_suffix('*').unwrap_or(head);
    // find the sign that starts the t-coefficient (not at index 0)
    let split = head.char_indices().rev().find(|&(i, c)| i > 0 && (c == '+' || c == '-')).map(|(i, _)| i);
    let (c0, c1) = match split {
        Some(i) => (head[..i].to_string(), head[i..].to_string()),
        None => ("0".to_string(), head.to_string()),
    };
    let c1 = match c1.as_str() {
        "" | "+" => "1".to_string(),
        "-" => "-1".to_string(),
        other => other.trim_start_matches('+').to_string(),
    };
    Some((c0, c1))
}

/// Element of `F_p`, stored reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    fn new(value: u64, modulus: u64) -> Self {
        Fp { value: value % modulus, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Element `c0 + c1*t` of `F_{p^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp2 {
    c0: u64,
    c1: u64,
    modulus: u64,
    nonresidue: u64,
}

impl Fp2 {
    pub fn coefficients(&self) -> (u64, u64) {
        (self.c0, self.c1)
    }

    fn with(&self, c0: u64, c1: u64) -> Self {
        Fp2 { c0, c1, ..*self }
    }

    fn mul(&self, o: &Fp2) -> Fp2 {
        let p = self.modulus;
        let ac = mul_mod(self.c0, o.c0, p);
        let bd = mul_mod(self.c1, o.c1, p);
        let cross = add_mod(mul_mod(self.c0, o.c1, p), mul_mod(self.c1, o.c0, p), p);
        if p == 2 {
            // t^2 = t + 1
            self.with(add_mod(ac, bd, p), add_mod(cross, bd, p))
        } else {
            self.with(add_mod(ac, mul_mod(self.nonresidue, bd, p), p), cross)
        }
    }

    fn inv(&self) -> Option<Fp2> {
        let p = self.modulus;
        if self.c0 == 0 && self.c1 == 0 {
            return None;
        }
        if p == 2 {
            // the multiplicative group of F_4 has order 3
            return Some(self.mul(self));
        }
        let norm = sub_mod(mul_mod(self.c0, self.c0, p), mul_mod(self.nonresidue, mul_mod(self.c1, self.c1, p), p), p);
        let ninv = inv_mod(norm, p);
        Some(self.with(mul_mod(self.c0, ninv, p), mul_mod(neg_mod(self.c1, p), ninv, p)))
    }
}

impl PartialOrd for Fp2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fp2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.modulus, self.c0, self.c1).cmp(&(other.modulus, other.c0, other.c1))
    }
}

/// An exact field element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Rational(BigRational),
    Prime(Fp),
    Quadratic(Fp2),
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rational(_) => FieldSpec::rationals(),
            Scalar::Prime(a) => FieldSpec { characteristic: a.modulus, degree: 1, nonresidue: 0 },
            Scalar::Quadratic(a) => FieldSpec { characteristic: a.modulus, degree: 2, nonresidue: a.nonresidue },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime(a) => a.value == 0,
            Scalar::Quadratic(a) => a.c0 == 0 && a.c1 == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Prime(a) => a.value == 1,
            Scalar::Quadratic(a) => a.c0 == 1 && a.c1 == 0,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Residue of a prime-field element.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Prime(a) => Some(a.value),
            Scalar::Quadratic(a) if a.c1 == 0 => Some(a.c0),
            _ => None,
        }
    }

    fn mismatch(&self, other: &Scalar) -> FieldError {
        FieldError::MixedFields(self.field(), other.field())
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a + b)),
            (Scalar::Prime(a), Scalar::Prime(b)) if a.modulus == b.modulus => {
                Ok(Scalar::Prime(Fp::new(add_mod(a.value, b.value, a.modulus), a.modulus)))
            }
            (Scalar::Quadratic(a), Scalar::Quadratic(b)) if a.modulus == b.modulus => {
                let p = a.modulus;
                Ok(Scalar::Quadratic(a.with(add_mod(a.c0, b.c0, p), add_mod(a.c1, b.c1, p))))
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a * b)),
            (Scalar::Prime(a), Scalar::Prime(b)) if a.modulus == b.modulus => {
                Ok(Scalar::Prime(Fp::new(mul_mod(a.value, b.value, a.modulus), a.modulus)))
            }
            (Scalar::Quadratic(a), Scalar::Quadratic(b)) if a.modulus == b.modulus => Ok(Scalar::Quadratic(a.mul(b))),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, FieldError> {
        if self.field() != other.field() {
            return Err(self.mismatch(other));
        }
        self.checked_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<Scalar, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Prime(a) => Scalar::Prime(Fp::new(inv_mod(a.value, a.modulus), a.modulus)),
            Scalar::Quadratic(a) => Scalar::Quadratic(a.inv().expect("nonzero")),
        })
    }

    fn neg_ref(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Prime(a) => Scalar::Prime(Fp::new(neg_mod(a.value, a.modulus), a.modulus)),
            Scalar::Quadratic(a) => Scalar::Quadratic(a.with(neg_mod(a.c0, a.modulus), neg_mod(a.c1, a.modulus))),
        }
    }

    pub fn pow(&self, mut e: u64) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Moves a prime-field element into `target`, which must have the same
    /// characteristic (used to lift `F_p` into `F_{p^2}`), or reduces a
    /// rational modulo the characteristic of `target`.
    pub fn embed(&self, target: &FieldSpec) -> Result<Scalar, FieldError> {
        match self {
            Scalar::Rational(r) => target.from_ratio(r.numer(), r.denom()),
            Scalar::Prime(a) if a.modulus == target.characteristic => Ok(target.embed_residue(a.value)),
            Scalar::Quadratic(a) if a.modulus == target.characteristic && target.degree == 2 => Ok(self.clone()),
            Scalar::Quadratic(a) if a.modulus == target.characteristic && a.c1 == 0 => Ok(target.embed_residue(a.c0)),
            _ => Err(FieldError::MixedFields(self.field(), *target)),
        }
    }

    /// Legendre-style test over `F_p`: true when `self` is a square in `F_p`.
    pub fn is_square_in_base(&self) -> Option<bool> {
        match self {
            Scalar::Prime(a) => {
                Some(a.value == 0 || a.modulus == 2 || pow_mod(a.value, (a.modulus - 1) / 2, a.modulus) == 1)
            }
            _ => None,
        }
    }

    /// A square root of an `F_p` element in `F_{p^2}`. Of the two roots the
    /// one with the smaller encoding is returned.
    pub fn sqrt_in_closure(&self) -> Result<Scalar, FieldError> {
        let (v, p) = match self {
            Scalar::Prime(a) => (a.value, a.modulus),
            Scalar::Quadratic(a) if a.c1 == 0 => (a.c0, a.modulus),
            Scalar::Quadratic(_) => return Err(FieldError::UnsupportedDegree(4)),
            Scalar::Rational(_) => return Err(FieldError::NeedsPositiveCharacteristic),
        };
        let ext = FieldSpec::quadratic(p)?;
        if p == 2 || v == 0 {
            // Frobenius: every element of F_2 is its own square root
            return Ok(ext.embed_residue(v));
        }
        if pow_mod(v, (p - 1) / 2, p) == 1 {
            let s = tonelli_shanks(v, p);
            return Ok(ext.embed_residue(s.min(p - s)));
        }
        // v = d * w with w a square, sqrt(v) = t * sqrt(w)
        let w = mul_mod(v, inv_mod(ext.nonresidue, p), p);
        let s = tonelli_shanks(w, p);
        Ok(Scalar::Quadratic(Fp2 { c0: 0, c1: s.min(p - s), modulus: p, nonresidue: ext.nonresidue }))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime(a) => write!(f, "{}", a.value),
            Scalar::Quadratic(a) => {
                if a.c1 == 0 {
                    write!(f, "{}", a.c0)
                } else {
                    write!(f, "{}+{}*t", a.c0, a.c1)
                }
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Scalar {
    /// Negativity for rationals; always false in positive characteristic.
    pub fn is_negative(&self) -> bool {
        matches!(self, Scalar::Rational(r) if r.is_negative())
    }

    /// Rationals that are integers fitting in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Rational(r) if r.is_integer() => r.numer().to_i64(),
            _ => None,
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            /// Panics on mixed-field operands; use the `checked_*` form to recover.
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_ref()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

pub(crate) fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    add_mod(a, neg_mod(b, p), p)
}

pub(crate) fn neg_mod(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(p as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(p as i128) as u64
}

fn reduce_i64(n: i64, p: u64) -> u64 {
    (n as i128).rem_euclid(p as i128) as u64
}

fn reduce_bigint(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&n| pow_mod(n, (p - 1) / 2, p) == p - 1).expect("odd prime has a non-residue")
}

fn tonelli_shanks(n: u64, p: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    if p % 4 == 3 {
        return pow_mod(n, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = smallest_nonresidue(p);
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}
