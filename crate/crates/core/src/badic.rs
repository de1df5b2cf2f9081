//! Exact base-`b` digit arithmetic and Walsh functions.
//!
//! A [`DigitPoint`] stores the first `W` digits of a point in `[0, 1)`; digit
//! `i` (0-based) is the coefficient of `b^(-i-1)`. `b`-adic rationals always use
//! their finite expansion (trailing zeros). Walsh functions are represented by
//! their exponent in `Z_b`, so every group identity can be checked with exact
//! integer arithmetic and is only turned into a complex number at the boundary.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest digit precision a [`DigitPoint`] can carry.
pub const MAX_DIGITS: usize = 64;

/// A prime base `2 <= b <= 251`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Base(u8);

impl Base {
    pub const TWO: Base = Base(2);

    pub fn new(b: u32) -> Result<Self> {
        if !(2..=251).contains(&b) || !is_prime(b) {
            return Err(Error::InvalidBase(b));
        }
        Ok(Base(b as u8))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0 as u32
    }

    /// `b^e`, or `None` on `u64` overflow.
    pub fn pow(self, e: u32) -> Option<u64> {
        (self.0 as u64).checked_pow(e)
    }

    /// Largest `W` with `b^W <= 2^52`: digit points of this precision convert
    /// to `f64` without loss (52 for `b = 2`, 32 for `b = 3`).
    pub fn float_safe_digits(self) -> usize {
        let limit = 1u64 << 52;
        let mut w = 0;
        let mut acc = 1u64;
        while let Some(next) = acc.checked_mul(self.0 as u64) {
            if next > limit {
                break;
            }
            acc = next;
            w += 1;
        }
        w
    }
}

impl TryFrom<u32> for Base {
    type Error = Error;
    fn try_from(b: u32) -> Result<Self> {
        Base::new(b)
    }
}

impl From<Base> for u32 {
    fn from(b: Base) -> u32 {
        b.get()
    }
}

impl fmt::Debug for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Fixed-precision base-`b` representation of a point in `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitPoint {
    base: Base,
    len: u8,
    digits: [u8; MAX_DIGITS],
}

impl DigitPoint {
    pub fn zero(base: Base, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        Ok(Self {
            base,
            len: precision as u8,
            digits: [0; MAX_DIGITS],
        })
    }

    pub fn from_digits(base: Base, digits: &[u8]) -> Result<Self> {
        check_precision(digits.len())?;
        let mut p = Self::zero(base, digits.len())?;
        for (slot, &d) in p.digits.iter_mut().zip(digits) {
            if d as u32 >= base.get() {
                return Err(Error::InvalidDigit {
                    digit: d as u32,
                    base: base.get(),
                });
            }
            *slot = d;
        }
        Ok(p)
    }

    /// The point `a / b^W`.
    pub fn from_integer(a: u64, base: Base, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        if let Some(limit) = base.pow(precision as u32) {
            if a >= limit {
                return Err(Error::OutOfRange {
                    what: "grid index",
                    index: a,
                    limit,
                });
            }
        }
        let mut p = Self::zero(base, precision)?;
        let b = base.get() as u64;
        let mut rest = a;
        for i in (0..precision).rev() {
            p.digits[i] = (rest % b) as u8;
            rest /= b;
        }
        Ok(p)
    }

    /// First `precision` digits of `x`, rounding toward zero.
    ///
    /// For `b = 2` the digits are exact. For odd bases `x` is first snapped to
    /// the nearest grid point `a / b^F` with `F = b.float_safe_digits()`, so
    /// that e.g. `1/3` in base 3 yields `(1, 0, 0, ...)` despite `f64` rounding.
    pub fn from_f64(x: f64, base: Base, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(x));
        }
        let mut p = Self::zero(base, precision)?;
        if base.get() == 2 {
            let mut r = x;
            for slot in p.digits[..precision].iter_mut() {
                r *= 2.0;
                let d = r.floor();
                *slot = d as u8;
                r -= d;
            }
            return Ok(p);
        }
        let f = base.float_safe_digits();
        let scale = base.pow(f as u32).expect("float-safe power fits") as f64;
        let mut a = (x * scale).round();
        if a >= scale {
            a = (x * scale).floor().min(scale - 1.0);
        }
        let full = Self::from_integer(a as u64, base, f)?;
        let n = precision.min(f);
        p.digits[..n].copy_from_slice(&full.digits[..n]);
        Ok(p)
    }

    #[inline]
    pub fn base(&self) -> Base {
        self.base
    }

    #[inline]
    pub fn precision(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn digits(&self) -> &[u8] {
        &self.digits[..self.len as usize]
    }

    /// Digit `i` (0-based); zero beyond the stored precision.
    #[inline]
    pub fn digit(&self, i: usize) -> u8 {
        if i < self.len as usize {
            self.digits[i]
        } else {
            0
        }
    }

    #[inline]
    pub(crate) fn set_digit(&mut self, i: usize, d: u8) {
        debug_assert!(i < self.len as usize && (d as u32) < self.base.get());
        self.digits[i] = d;
    }

    /// Same value at a different precision: pads with zeros or truncates.
    pub fn with_precision(&self, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        let mut p = *self;
        if precision < p.len as usize {
            p.digits[precision..].fill(0);
        }
        p.len = precision as u8;
        Ok(p)
    }

    /// `Σ digits[i] b^(-i-1)`, correctly rounded when `b^W` fits in 53 bits.
    pub fn value(&self) -> f64 {
        let b = self.base.get() as u64;
        match self.base.pow(self.len as u32) {
            Some(den) if den <= 1 << 53 => {
                let num = self.digits().iter().fold(0u64, |acc, &d| acc * b + d as u64);
                num as f64 / den as f64
            }
            _ => self
                .digits()
                .iter()
                .rev()
                .fold(0.0, |acc, &d| (acc + d as f64) / b as f64),
        }
    }

    /// Center of the cell `[value, value + b^-W)`.
    pub fn midpoint_value(&self) -> f64 {
        let b = self.base.get() as u64;
        match self.base.pow(self.len as u32) {
            Some(den) if den <= 1 << 52 => {
                let num = self.digits().iter().fold(0u64, |acc, &d| acc * b + d as u64);
                (2 * num + 1) as f64 / (2 * den) as f64
            }
            _ => self.value() + 0.5 * (b as f64).powi(-(self.len as i32)),
        }
    }

    /// Integer formed by the first `len` digits, most significant first.
    pub fn prefix_index(&self, len: usize) -> u64 {
        let b = self.base.get() as u64;
        (0..len).fold(0u64, |acc, i| acc * b + self.digit(i) as u64)
    }

    /// Number of leading digits on which `self` and `other` agree.
    pub fn common_prefix_len(&self, other: &DigitPoint) -> usize {
        let n = self.precision().min(other.precision());
        self.digits[..n]
            .iter()
            .zip(&other.digits[..n])
            .take_while(|(a, b)| a == b)
            .count()
    }

    fn check_compatible(&self, other: &DigitPoint) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(self.base.get(), other.base.get()));
        }
        if self.len != other.len {
            return Err(Error::PrecisionMismatch(self.precision(), other.precision()));
        }
        Ok(())
    }

    /// Digitwise addition modulo `b` (no carries).
    pub fn digit_add(&self, other: &DigitPoint) -> Result<DigitPoint> {
        self.check_compatible(other)?;
        let b = self.base.get() as u16;
        let mut out = *self;
        for (o, &y) in out.digits[..self.len as usize].iter_mut().zip(other.digits()) {
            *o = ((*o as u16 + y as u16) % b) as u8;
        }
        Ok(out)
    }

    /// Digitwise subtraction modulo `b`.
    pub fn digit_sub(&self, other: &DigitPoint) -> Result<DigitPoint> {
        self.check_compatible(other)?;
        let b = self.base.get() as u16;
        let mut out = *self;
        for (o, &y) in out.digits[..self.len as usize].iter_mut().zip(other.digits()) {
            *o = ((*o as u16 + b - y as u16) % b) as u8;
        }
        Ok(out)
    }
}

impl fmt::Debug for DigitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0.")?;
        for d in self.digits() {
            if self.base.get() <= 10 {
                write!(f, "{d}")?;
            } else {
                write!(f, "[{d}]")?;
            }
        }
        write!(f, "_{}", self.base)
    }
}

fn check_precision(w: usize) -> Result<()> {
    if w == 0 || w > MAX_DIGITS {
        return Err(Error::InvalidPrecision(w));
    }
    Ok(())
}

/// A Walsh index `k = κ_0 + κ_1 b + κ_2 b^2 + ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WalshIndex {
    k: u64,
    base: Base,
}

impl WalshIndex {
    pub fn new(k: u64, base: Base) -> Self {
        Self { k, base }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.k
    }

    #[inline]
    pub fn base(self) -> Base {
        self.base
    }

    /// Digit `κ_a`.
    pub fn digit(self, a: usize) -> u8 {
        let b = self.base.get() as u64;
        let mut k = self.k;
        for _ in 0..a {
            if k == 0 {
                return 0;
            }
            k /= b;
        }
        (k % b) as u8
    }

    /// Digits `κ_0, κ_1, ...` up to the most significant nonzero one.
    pub fn digits(self) -> Vec<u8> {
        let b = self.base.get() as u64;
        let mut out = Vec::new();
        let mut k = self.k;
        while k > 0 {
            out.push((k % b) as u8);
            k /= b;
        }
        out
    }

    /// The `a` with `b^(a-1) <= k < b^a`; zero for `k = 0`.
    pub fn num_digits(self) -> usize {
        let b = self.base.get() as u64;
        let mut k = self.k;
        let mut a = 0;
        while k > 0 {
            k /= b;
            a += 1;
        }
        a
    }

    fn from_digit_vec(digits: &[u8], base: Base) -> Self {
        let b = base.get() as u64;
        let k = digits.iter().rev().fold(0u64, |acc, &d| acc * b + d as u64);
        Self { k, base }
    }

    /// Digitwise `k ⊕ l` on integer digits.
    pub fn digit_add(self, other: WalshIndex) -> Result<WalshIndex> {
        self.combine(other, |x, y, b| (x + y) % b)
    }

    /// Digitwise `k ⊖ l` on integer digits.
    pub fn digit_sub(self, other: WalshIndex) -> Result<WalshIndex> {
        self.combine(other, |x, y, b| (x + b - y) % b)
    }

    fn combine(self, other: WalshIndex, op: impl Fn(u16, u16, u16) -> u16) -> Result<WalshIndex> {
        if self.base != other.base {
            return Err(Error::BaseMismatch(self.base.get(), other.base.get()));
        }
        let b = self.base.get() as u16;
        let (x, y) = (self.digits(), other.digits());
        let n = x.len().max(y.len());
        let z: Vec<u8> = (0..n)
            .map(|i| {
                let xi = x.get(i).copied().unwrap_or(0) as u16;
                let yi = y.get(i).copied().unwrap_or(0) as u16;
                op(xi, yi, b) as u8
            })
            .collect();
        Ok(Self::from_digit_vec(&z, self.base))
    }
}

/// A `b`-th root of unity `ω_b^e` stored as its exponent `e ∈ Z_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WalshValue {
    exponent: u8,
    base: Base,
}

impl WalshValue {
    pub fn one(base: Base) -> Self {
        Self { exponent: 0, base }
    }

    pub fn from_exponent(e: u32, base: Base) -> Self {
        Self {
            exponent: (e % base.get()) as u8,
            base,
        }
    }

    #[inline]
    pub fn exponent(self) -> u32 {
        self.exponent as u32
    }

    pub fn is_one(self) -> bool {
        self.exponent == 0
    }

    pub fn mul(self, other: WalshValue) -> WalshValue {
        debug_assert_eq!(self.base, other.base);
        Self::from_exponent(self.exponent as u32 + other.exponent as u32, self.base)
    }

    pub fn conj(self) -> WalshValue {
        let b = self.base.get();
        Self::from_exponent(b - self.exponent as u32, self.base)
    }

    pub fn to_complex(self) -> Complex64 {
        if self.exponent == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let b = self.base.get();
        if b == 2 {
            return Complex64::new(-1.0, 0.0);
        }
        let theta = 2.0 * std::f64::consts::PI * self.exponent as f64 / b as f64;
        Complex64::from_polar(1.0, theta)
    }
}

/// `wal_k(x) = ω_b^(x_1 κ_0 + x_2 κ_1 + ...)`. Digits of `x` beyond its stored
/// precision are zero, consistent with the finite-expansion convention.
pub fn walsh(k: WalshIndex, x: &DigitPoint) -> WalshValue {
    let b = k.base.get() as u64;
    let mut rest = k.k;
    let mut e = 0u64;
    let mut j = 0;
    while rest > 0 {
        e += (rest % b) * x.digit(j) as u64;
        rest /= b;
        j += 1;
    }
    WalshValue::from_exponent((e % b) as u32, k.base)
}

/// `wal_k(x) = Π_j wal_{k_j}(x_j)`.
pub fn walsh_multi(ks: &[WalshIndex], xs: &[DigitPoint]) -> Result<WalshValue> {
    if ks.len() != xs.len() {
        return Err(Error::LengthMismatch {
            expected: ks.len(),
            actual: xs.len(),
        });
    }
    let base = ks.first().map(|k| k.base).unwrap_or(Base::TWO);
    Ok(ks
        .iter()
        .zip(xs)
        .fold(WalshValue::one(base), |acc, (&k, x)| acc.mul(walsh(k, x))))
}
