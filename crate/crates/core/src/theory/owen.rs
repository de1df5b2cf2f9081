use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::badic::{walsh, Base, DigitPoint, WalshIndex};
use crate::error::{Error, Result};
use crate::interlace::{deinterlace_index, deinterlace_point};
use crate::scramble::{order_d_scramble, HashedPermutations, ScrambleKey};

/// Per residue class `r`, the number of leading digits on which the class-`r`
/// components of `x` and `x'` agree.
///
/// `beta[r]` plays the role of the exponent in the three-case formula: class
/// `r` contributes a zero factor once its index component reaches
/// `b^{beta[r] + 1}`. A class that agrees on all `W / d` digits gets
/// `beta[r] = W / d`, which is unbounded at working precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BetaProfile {
    pub beta: Vec<usize>,
    pub class_precision: usize,
}

impl BetaProfile {
    pub fn new(x: &DigitPoint, x_prime: &DigitPoint, d: usize) -> Result<Self> {
        if x.base() != x_prime.base() {
            return Err(Error::BaseMismatch(x.base().get(), x_prime.base().get()));
        }
        if x.precision() != x_prime.precision() {
            return Err(Error::PrecisionMismatch(x.precision(), x_prime.precision()));
        }
        let a = deinterlace_point(x, d)?;
        let b = deinterlace_point(x_prime, d)?;
        Ok(Self {
            beta: a.iter().zip(&b).map(|(u, v)| u.common_prefix_len(v)).collect(),
            class_precision: x.precision() / d,
        })
    }
}

/// Exact value of `E[wal_k(y) conj(wal_k'(y'))]`: zero or `(1 - b)^{-v}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "v", rename_all = "snake_case")]
pub enum OwenExpectation {
    Zero,
    Power(u32),
}

impl OwenExpectation {
    pub fn value(self, base: Base) -> f64 {
        match self {
            OwenExpectation::Zero => 0.0,
            OwenExpectation::Power(v) => (1.0 - base.get() as f64).powi(-(v as i32)),
        }
    }
}

/// Three-case formula for two points scrambled with the same order-`d`
/// Owen scramble. `k` is split into its residue-class components (as
/// ordinary indices); each class contributes 1 below `b^{β_r}`,
/// `(1 - b)^{-1}` on `[b^{β_r}, b^{β_r + 1})` and 0 above.
pub fn owen_expectation_exact(
    k: WalshIndex,
    k_prime: WalshIndex,
    x: &DigitPoint,
    x_prime: &DigitPoint,
    d: usize,
) -> Result<OwenExpectation> {
    let profile = BetaProfile::new(x, x_prime, d)?;
    let b = x.base();
    let limit = b.pow(profile.class_precision as u32).unwrap_or(u64::MAX);
    let classes = deinterlace_index(k, d);
    for (kr, kr_prime) in classes.iter().zip(deinterlace_index(k_prime, d)) {
        if kr.value() >= limit || kr_prime.value() >= limit {
            return Err(Error::OutOfRange {
                what: "Walsh index component",
                index: kr.value().max(kr_prime.value()),
                limit,
            });
        }
    }
    if k != k_prime {
        return Ok(OwenExpectation::Zero);
    }
    let mut v = 0;
    for (kr, &beta) in classes.iter().zip(&profile.beta) {
        let lo = b.pow(beta as u32).unwrap_or(u64::MAX);
        let hi = b.pow(beta as u32 + 1).unwrap_or(u64::MAX);
        if kr.value() >= hi {
            return Ok(OwenExpectation::Zero);
        }
        if kr.value() >= lo {
            v += 1;
        }
    }
    Ok(OwenExpectation::Power(v))
}

/// Monte Carlo mean of `wal_k(y) conj(wal_k'(y'))` over independent
/// order-`d` scramblings, with the standard error of the complex mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McExpectation {
    pub re: f64,
    pub im: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl McExpectation {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Whether `value` lies within `z` standard errors (exact match when the
    /// sample has no spread).
    pub fn agrees_with(&self, value: f64, z: f64) -> bool {
        let dist = (self.mean() - Complex64::new(value, 0.0)).norm();
        dist <= z * self.std_error + 1e-12
    }
}

pub fn owen_expectation_mc(
    k: WalshIndex,
    k_prime: WalshIndex,
    x: &DigitPoint,
    x_prime: &DigitPoint,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<McExpectation> {
    if trials < 100 {
        return Err(Error::InvalidConfig(format!("need at least 100 trials, got {trials}")));
    }
    if x.precision() != x_prime.precision() {
        return Err(Error::PrecisionMismatch(x.precision(), x_prime.precision()));
    }
    let (mut sum_re, mut sum_im, mut sum_sq) = (0.0, 0.0, 0.0);
    for t in 0..trials {
        let key = ScrambleKey::new(seed, t as u64, x.base(), x.precision() / d);
        let src = HashedPermutations::new(&key);
        let y = order_d_scramble(&[*x], d, &src)?[0];
        let y_prime = order_d_scramble(&[*x_prime], d, &src)?[0];
        let w = walsh(k, &y).mul(walsh(k_prime, &y_prime).conj()).to_complex();
        sum_re += w.re;
        sum_im += w.im;
        sum_sq += w.norm_sqr();
    }
    let n = trials as f64;
    let (re, im) = (sum_re / n, sum_im / n);
    let var = ((sum_sq - n * (re * re + im * im)) / (n - 1.0)).max(0.0);
    Ok(McExpectation {
        re,
        im,
        std_error: (var / n).sqrt(),
        trials,
    })
}

/// One randomized test configuration for the Owen lemma.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OwenCase {
    pub b: u32,
    pub d: usize,
    pub precision: usize,
    pub k: u64,
    pub k_prime: u64,
    pub x: Vec<u8>,
    pub x_prime: Vec<u8>,
    pub exact: OwenExpectation,
    pub exact_value: f64,
    pub mc: McExpectation,
    pub passed: bool,
}

/// Draws `cases` configurations with `b ∈ {2, 3}`, `d ≤ 3`, `W ≤ 10`.
/// `x'` copies a random number of leading digits per class from `x`, and
/// the index components are drawn near the resulting thresholds so that
/// every branch of the formula is exercised.
pub fn owen_case_grid(cases: usize, trials: usize, seed: u64) -> Result<Vec<OwenCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cases);
    for c in 0..cases {
        let base = Base::new(if rng.random::<bool>() { 2 } else { 3 })?;
        let bb = base.get() as u8;
        let d = rng.random_range(1..=3usize);
        let w_in = rng.random_range(1..=10 / d);
        let precision = d * w_in;
        let x_digits: Vec<u8> = (0..precision).map(|_| rng.random_range(0..bb)).collect();
        let mut xp_digits = x_digits.clone();
        let mut match_len = vec![0usize; d];
        for (r, len) in match_len.iter_mut().enumerate() {
            *len = rng.random_range(0..=w_in);
            if *len < w_in {
                let pos = r + *len * d;
                xp_digits[pos] = (x_digits[pos] + rng.random_range(1..bb)) % bb;
                for a in *len + 1..w_in {
                    xp_digits[r + a * d] = rng.random_range(0..bb);
                }
            }
        }
        let x = DigitPoint::from_digits(base, &x_digits)?;
        let x_prime = DigitPoint::from_digits(base, &xp_digits)?;
        // component r gets between len - 1 and len + 2 digits, capped at w_in
        let comps: Vec<WalshIndex> = match_len
            .iter()
            .map(|&len| {
                let lo = len.saturating_sub(1);
                let hi = (len + 2).min(w_in);
                let digits = rng.random_range(lo..=hi);
                let v = if digits == 0 {
                    0
                } else {
                    let low = base.pow(digits as u32 - 1).unwrap();
                    rng.random_range(low..low * base.get() as u64)
                };
                WalshIndex::new(v, base)
            })
            .collect();
        let k = crate::interlace::interlace_index(&comps)?;
        let k_prime = if rng.random_range(0..10) == 0 {
            let alt = rng.random_range(0..base.pow(precision as u32).unwrap());
            WalshIndex::new(alt, base)
        } else {
            k
        };
        let exact = owen_expectation_exact(k, k_prime, &x, &x_prime, d)?;
        let exact_value = exact.value(base);
        let mc = owen_expectation_mc(k, k_prime, &x, &x_prime, d, trials, seed ^ ((c as u64 + 1) << 32))?;
        out.push(OwenCase {
            b: base.get(),
            d,
            precision,
            k: k.value(),
            k_prime: k_prime.value(),
            x: x_digits,
            x_prime: xp_digits,
            exact,
            exact_value,
            passed: mc.agrees_with(exact_value, 4.0),
            mc,
        });
    }
    Ok(out)
}
