//! The digit interlacing map `D_d` and its inverse.
//!
//! `D_d(x_1, ..., x_d)` places digit `a` (1-based) of coordinate `r` at output
//! position `r + (a - 1) d`. On Walsh indices the map places digit `κ_{r,a}`
//! (0-based `a`) at integer digit position `r - 1 + a d`, so that
//! `wal_{D_d(k)}(D_d(x)) = Π_r wal_{k_r}(x_r)`.
//!
//! Everything here works on digit arrays; no floating point is involved.
//!
//! At infinite precision `D_d` is injective but not surjective: no preimage
//! maps to an expansion ending in `(b-1)` digits along one residue class
//! modulo `d`, because that would require a non-finite expansion of a
//! `b`-adic rational. At any finite precision every digit pattern is
//! attainable, so [`image_membership`] is always `true`.

use num_rational::Ratio;

use crate::badic::{Base, DigitPoint, WalshIndex, MAX_DIGITS};
use crate::error::{Error, Result};

/// Interlacing factor together with the working digit budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterlaceSpec {
    pub d: usize,
    pub base: Base,
    pub input_precision: usize,
}

impl InterlaceSpec {
    /// Requires `d * input_precision <= base.float_safe_digits()`, so interlaced
    /// points convert to `f64` without loss.
    pub fn new(d: usize, base: Base, input_precision: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("interlacing factor must be >= 1".into()));
        }
        if input_precision == 0 {
            return Err(Error::InvalidPrecision(0));
        }
        let budget = base.float_safe_digits();
        if d * input_precision > budget {
            return Err(Error::InvalidConfig(format!(
                "interlaced precision {d} x {input_precision} exceeds the float-safe budget {budget} for base {base}"
            )));
        }
        Ok(Self {
            d,
            base,
            input_precision,
        })
    }

    /// The largest input precision within budget: 52, 26, 17 digits for
    /// `d = 1, 2, 3` in base 2.
    pub fn with_default_precision(d: usize, base: Base) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("interlacing factor must be >= 1".into()));
        }
        Self::new(d, base, base.float_safe_digits() / d)
    }

    pub fn output_precision(&self) -> usize {
        self.d * self.input_precision
    }
}

/// `D_d(x_1, ..., x_d)`, with `d = xs.len()`. Output precision is `d * W_in`.
pub fn interlace_point(xs: &[DigitPoint]) -> Result<DigitPoint> {
    let d = xs.len();
    let first = xs
        .first()
        .ok_or_else(|| Error::InvalidConfig("interlacing needs at least one coordinate".into()))?;
    if d == 1 {
        return Ok(*first);
    }
    let w_in = first.precision();
    for x in xs {
        if x.base() != first.base() {
            return Err(Error::BaseMismatch(first.base().get(), x.base().get()));
        }
        if x.precision() != w_in {
            return Err(Error::PrecisionMismatch(w_in, x.precision()));
        }
    }
    if d * w_in > MAX_DIGITS {
        return Err(Error::InvalidPrecision(d * w_in));
    }
    let mut out = DigitPoint::zero(first.base(), d * w_in)?;
    for (r, x) in xs.iter().enumerate() {
        for (a, &digit) in x.digits().iter().enumerate() {
            out.set_digit(r + a * d, digit);
        }
    }
    Ok(out)
}

/// Left inverse of [`interlace_point`].
pub fn deinterlace_point(y: &DigitPoint, d: usize) -> Result<Vec<DigitPoint>> {
    if d == 0 || !y.precision().is_multiple_of(d) {
        return Err(Error::InvalidConfig(format!(
            "precision {} is not divisible by interlacing factor {d}",
            y.precision()
        )));
    }
    let w_in = y.precision() / d;
    (0..d)
        .map(|r| {
            let mut x = DigitPoint::zero(y.base(), w_in)?;
            for a in 0..w_in {
                x.set_digit(a, y.digit(r + a * d));
            }
            Ok(x)
        })
        .collect()
}

/// Interlaces consecutive groups of `d` coordinates: `[0, 1)^{ds} -> [0, 1)^s`.
pub fn interlace_coordinates(point: &[DigitPoint], d: usize) -> Result<Vec<DigitPoint>> {
    if d == 0 || !point.len().is_multiple_of(d) {
        return Err(Error::InvalidConfig(format!(
            "{} coordinates cannot be grouped by interlacing factor {d}",
            point.len()
        )));
    }
    point.chunks(d).map(interlace_point).collect()
}

/// `D_d(k_1, ..., k_d) = Σ_a Σ_r κ_{r,a} b^{r - 1 + a d}`.
pub fn interlace_index(ks: &[WalshIndex]) -> Result<WalshIndex> {
    let d = ks.len();
    let base = ks
        .first()
        .ok_or_else(|| Error::InvalidConfig("interlacing needs at least one index".into()))?
        .base();
    let b = base.get() as u128;
    let mut k: u128 = 0;
    for (r, kr) in ks.iter().enumerate() {
        if kr.base() != base {
            return Err(Error::BaseMismatch(base.get(), kr.base().get()));
        }
        for (a, &digit) in kr.digits().iter().enumerate() {
            if digit == 0 {
                continue;
            }
            let pos = (r + a * d) as u32;
            let term = b
                .checked_pow(pos)
                .and_then(|p| p.checked_mul(digit as u128))
                .ok_or(Error::OutOfRange {
                    what: "interlaced Walsh index",
                    index: u64::MAX,
                    limit: u64::MAX,
                })?;
            k += term;
        }
    }
    let k = u64::try_from(k).map_err(|_| Error::OutOfRange {
        what: "interlaced Walsh index",
        index: u64::MAX,
        limit: u64::MAX,
    })?;
    Ok(WalshIndex::new(k, base))
}

/// Splits `k` into its `d` residue-class components `k_1, ..., k_d`, each
/// re-packed as an ordinary index (inverse of [`interlace_index`]).
pub fn deinterlace_index(k: WalshIndex, d: usize) -> Vec<WalshIndex> {
    let base = k.base();
    let digits = k.digits();
    (0..d)
        .map(|r| {
            let comp: Vec<u8> = digits.iter().skip(r).step_by(d.max(1)).copied().collect();
            let b = base.get() as u64;
            let v = comp.iter().rev().fold(0u64, |acc, &x| acc * b + x as u64);
            WalshIndex::new(v, base)
        })
        .collect()
}

/// Whether `y` lies in the image of `D_d`. Always `true` at finite precision;
/// see the module docs for the infinite-precision exclusion set.
pub fn image_membership(_y: &DigitPoint, _d: usize) -> bool {
    true
}

/// A `b`-adic box `Π_r [a_r b^{-ν_r}, (a_r + 1) b^{-ν_r})` in `[0, 1)^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BAdicBox {
    pub base: Base,
    pub levels: Vec<u32>,
    pub anchors: Vec<u64>,
}

/// The `b`-adic interval `[start b^{-level}, (start + 1) b^{-level})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BAdicInterval {
    pub start: u64,
    pub level: u32,
}

impl BAdicBox {
    pub fn volume(&self) -> Ratio<u128> {
        let b = self.base.get() as u128;
        let total: u32 = self.levels.iter().sum();
        Ratio::new(1, b.pow(total))
    }

    /// Digit `a` (0-based) of the anchor of coordinate `r`.
    fn anchor_digit(&self, r: usize, a: u32) -> u8 {
        let b = self.base.get() as u64;
        let shift = self.levels[r] - 1 - a;
        ((self.anchors[r] / b.pow(shift)) % b) as u8
    }
}

impl BAdicInterval {
    pub fn length(&self, base: Base) -> Ratio<u128> {
        Ratio::new(1, (base.get() as u128).pow(self.level))
    }
}

/// `D_d(J)` as a disjoint union of `b`-adic intervals of equal level
/// `d · max ν_r`, obtained by fixing the digits the box pins down and
/// enumerating the free ones.
pub fn box_image(bx: &BAdicBox) -> Result<Vec<BAdicInterval>> {
    let d = bx.levels.len();
    if d == 0 || bx.anchors.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            actual: bx.anchors.len(),
        });
    }
    let b = bx.base.get() as u64;
    for (r, (&nu, &a)) in bx.levels.iter().zip(&bx.anchors).enumerate() {
        if a >= b.pow(nu) {
            return Err(Error::OutOfRange {
                what: "box anchor",
                index: r as u64,
                limit: b.pow(nu),
            });
        }
    }
    let max_nu = *bx.levels.iter().max().unwrap_or(&0);
    let level = d as u32 * max_nu;
    let free = level - bx.levels.iter().sum::<u32>();
    let count = (b as u128).pow(free);
    if count > 1 << 24 || level > 40 {
        return Err(Error::TooLarge {
            what: "box image enumeration",
            work: count,
            limit: 1 << 24,
        });
    }
    // position p (0-based) of the interlaced digit string belongs to
    // coordinate p % d, digit p / d
    let pinned: Vec<Option<u8>> = (0..level)
        .map(|p| {
            let (r, a) = ((p as usize) % d, p / d as u32);
            (a < bx.levels[r]).then(|| bx.anchor_digit(r, a))
        })
        .collect();
    let mut out = Vec::with_capacity(count as usize);
    for mut free_idx in 0..count as u64 {
        let mut start = 0u64;
        for slot in &pinned {
            let digit = match slot {
                Some(x) => *x as u64,
                None => {
                    let x = free_idx % b;
                    free_idx /= b;
                    x
                }
            };
            start = start * b + digit;
        }
        out.push(BAdicInterval { start, level });
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::badic::walsh;

    fn b(n: u32) -> Base {
        Base::new(n).unwrap()
    }

    fn pt(base: u32, digits: &[u8]) -> DigitPoint {
        DigitPoint::from_digits(b(base), digits).unwrap()
    }

    #[test]
    fn interlace_point_examples() {
        let x = pt(2, &[1, 0, 1]);
        assert_eq!(interlace_point(&[x]).unwrap(), x);
        let half = DigitPoint::from_f64(0.5, b(2), 2).unwrap();
        let quarter = DigitPoint::from_f64(0.25, b(2), 2).unwrap();
        let y = interlace_point(&[half, quarter]).unwrap();
        assert_eq!(y.digits(), &[1, 0, 0, 1]);
        assert_eq!(y.value(), 0.5625);
        let z = DigitPoint::zero(b(2), 3).unwrap();
        assert_eq!(interlace_point(&[z, z]).unwrap().value(), 0.0);
        assert!(interlace_point(&[x, half]).is_err());
        assert!(interlace_point(&[]).is_err());
    }

    #[test]
    fn deinterlace_examples() {
        let y = pt(2, &[1, 0, 0, 1]);
        let xs = deinterlace_point(&y, 2).unwrap();
        assert_eq!(xs[0].digits(), &[1, 0]);
        assert_eq!(xs[1].digits(), &[0, 1]);
        assert_eq!(deinterlace_point(&y, 1).unwrap(), vec![y]);
        let zero = DigitPoint::zero(b(3), 6).unwrap();
        for x in deinterlace_point(&zero, 3).unwrap() {
            assert_eq!(x.value(), 0.0);
        }
        assert!(deinterlace_point(&pt(2, &[1, 0, 1]), 2).is_err());
    }

    #[test]
    fn round_trip_two_coordinates_four_digits() {
        for a in 0..16u64 {
            for c in 0..16u64 {
                let xs = [
                    DigitPoint::from_integer(a, b(2), 4).unwrap(),
                    DigitPoint::from_integer(c, b(2), 4).unwrap(),
                ];
                let y = interlace_point(&xs).unwrap();
                assert_eq!(deinterlace_point(&y, 2).unwrap(), xs.to_vec());
            }
        }
    }

    #[test]
    fn interlace_index_examples() {
        let w = |k| WalshIndex::new(k, b(2));
        assert_eq!(interlace_index(&[w(0), w(0), w(0)]).unwrap().value(), 0);
        assert_eq!(interlace_index(&[w(1), w(2)]).unwrap().value(), 9);
        assert_eq!(interlace_index(&[w(1), w(0)]).unwrap().value(), 1);
        let k = interlace_index(&[w(5), w(3)]).unwrap();
        assert_eq!(deinterlace_index(k, 2), vec![w(5), w(3)]);
    }

    #[test]
    fn d2_index_9_matches_walsh_identity_on_grid() {
        let w = |k| WalshIndex::new(k, b(2));
        for i in 0..4 {
            for j in 0..4 {
                let x1 = DigitPoint::from_integer(i, b(2), 2).unwrap();
                let x2 = DigitPoint::from_integer(j, b(2), 2).unwrap();
                let y = interlace_point(&[x1, x2]).unwrap();
                let lhs = walsh(w(9), &y);
                let rhs = walsh(w(1), &x1).mul(walsh(w(2), &x2));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn image_membership_is_vacuous_at_finite_precision() {
        assert!(image_membership(&pt(2, &[1, 1, 1, 1]), 2));
        assert!(image_membership(&pt(3, &[2, 2, 2]), 1));
    }

    #[test]
    fn interlace_spec_budget() {
        assert_eq!(InterlaceSpec::with_default_precision(1, b(2)).unwrap().input_precision, 52);
        assert_eq!(InterlaceSpec::with_default_precision(2, b(2)).unwrap().input_precision, 26);
        assert_eq!(InterlaceSpec::with_default_precision(3, b(2)).unwrap().input_precision, 17);
        assert!(InterlaceSpec::new(2, b(2), 27).is_err());
        assert!(InterlaceSpec::new(0, b(2), 1).is_err());
    }

    #[test]
    fn box_image_small_case() {
        // J = [1/2, 1) x [0, 1/2) in base 2, d = 2 -> digits (1, 0) fixed: [1/2, 3/4)
        let bx = BAdicBox {
            base: b(2),
            levels: vec![1, 1],
            anchors: vec![1, 0],
        };
        let img = box_image(&bx).unwrap();
        assert_eq!(img, vec![BAdicInterval { start: 2, level: 2 }]);
        // J = [0, 1) x [1/2, 1): second digit pinned to 1 -> [1/4,1/2) ∪ [3/4,1)
        let bx = BAdicBox {
            base: b(2),
            levels: vec![0, 1],
            anchors: vec![0, 1],
        };
        let img = box_image(&bx).unwrap();
        assert_eq!(img.len(), 2);
        assert_eq!(img[0], BAdicInterval { start: 1, level: 2 });
        assert_eq!(img[1], BAdicInterval { start: 3, level: 2 });
    }
}
