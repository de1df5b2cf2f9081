use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::badic::{Base, WalshIndex};
use crate::error::{Error, Result};
use crate::netgen::DigitalNet;

/// Work limit on the number of point pairs enumerated.
pub const GAIN_PAIR_GUARD: u128 = 1 << 28;

/// `ℓ = (ℓ_1, ..., ℓ_{ds})`: the digit-length shell `B_ℓ` of Walsh indices
/// `b^{ℓ_j - 1} <= k_j < b^{ℓ_j}` (`k_j = 0` when `ℓ_j = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GainIndex {
    pub levels: Vec<u32>,
    pub d: usize,
}

impl GainIndex {
    pub fn new(levels: Vec<u32>, d: usize) -> Result<Self> {
        if d == 0 || !levels.len().is_multiple_of(d) {
            return Err(Error::InvalidConfig(format!(
                "{} levels cannot be grouped into blocks of {d}",
                levels.len()
            )));
        }
        Ok(Self { levels, d })
    }

    pub fn norm1(&self) -> u32 {
        self.levels.iter().sum()
    }

    /// Coordinates `j` with `ℓ_j > 0` (0-based).
    pub fn support(&self) -> Vec<usize> {
        (0..self.levels.len()).filter(|&j| self.levels[j] > 0).collect()
    }

    /// Number of blocks of `d` coordinates containing a nonzero level.
    pub fn nonzero_blocks(&self) -> usize {
        self.levels.chunks(self.d).filter(|c| c.iter().any(|&l| l > 0)).count()
    }

    /// Smallest member of `B_ℓ`: `k_j = b^{ℓ_j - 1}`.
    pub fn smallest_member(&self, base: Base) -> Result<Vec<WalshIndex>> {
        self.member(base, |l| base.pow(l - 1))
    }

    /// Largest member of `B_ℓ`: `k_j = b^{ℓ_j} - 1`.
    pub fn largest_member(&self, base: Base) -> Result<Vec<WalshIndex>> {
        self.member(base, |l| base.pow(l).map(|p| p - 1))
    }

    fn member(&self, base: Base, pick: impl Fn(u32) -> Option<u64>) -> Result<Vec<WalshIndex>> {
        self.levels
            .iter()
            .map(|&l| {
                let k = if l == 0 {
                    Some(0)
                } else {
                    pick(l)
                };
                k.map(|k| WalshIndex::new(k, base)).ok_or(Error::OutOfRange {
                    what: "gain level",
                    index: l as u64,
                    limit: 63,
                })
            })
            .collect()
    }
}

/// Marker for a coordinate pair that agrees on every stored digit, hence is
/// identical (digits beyond the generator rows are zero).
const IDENTICAL: u8 = u8::MAX;

/// Histogram of per-coordinate match lengths over all ordered point pairs.
#[derive(Clone, Debug)]
pub struct PairProfile {
    base: Base,
    m: u32,
    dim: usize,
    d: usize,
    counts: HashMap<Vec<u8>, u64>,
}

impl PairProfile {
    /// Enumerates all `b^{2m}` ordered pairs of a pre-interlacing net.
    pub fn new(net: &DigitalNet, d: usize) -> Result<Self> {
        let n = net.len() as u128;
        if n * n > GAIN_PAIR_GUARD {
            return Err(Error::TooLarge {
                what: "gain coefficient pair enumeration",
                work: n * n,
                limit: GAIN_PAIR_GUARD,
            });
        }
        let dim = net.dimension();
        if d == 0 || !dim.is_multiple_of(d) {
            return Err(Error::InvalidConfig(format!(
                "{dim} coordinates cannot be grouped by interlacing factor {d}"
            )));
        }
        let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
        let mut key = vec![0u8; dim];
        for p in net.points() {
            for q in net.points() {
                for ((slot, x), y) in key.iter_mut().zip(p).zip(q) {
                    let h = x.common_prefix_len(y);
                    *slot = if h == x.precision() { IDENTICAL } else { h as u8 };
                }
                *counts.entry(key.clone()).or_default() += 1;
            }
        }
        Ok(Self {
            base: net.base(),
            m: net.spec.m,
            dim,
            d,
            counts,
        })
    }

    /// Same histogram for a digital net in `O(b^m)`: `x_n ⊖ x_{n'}` is the
    /// point with index `n ⊖ n'`, so every point's digit-wise distance from
    /// the origin occurs `b^m` times among the pair differences, and the
    /// match length of a pair is the number of leading zeros of its
    /// difference.
    ///
    /// `net` must be generated by matrices (as by `generate_net`);
    /// scrambled or hand-built point sets need [`PairProfile::new`].
    pub fn digital(net: &DigitalNet, d: usize) -> Result<Self> {
        let dim = net.dimension();
        if d == 0 || !dim.is_multiple_of(d) {
            return Err(Error::InvalidConfig(format!(
                "{dim} coordinates cannot be grouped by interlacing factor {d}"
            )));
        }
        let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
        let n = net.len() as u64;
        for p in net.points() {
            let key = p
                .iter()
                .map(|x| match x.digits().iter().position(|&g| g != 0) {
                    Some(h) => h as u8,
                    None => IDENTICAL,
                })
                .collect();
            *counts.entry(key).or_default() += n;
        }
        Ok(Self {
            base: net.base(),
            m: net.spec.m,
            dim,
            d,
            counts,
        })
    }

    /// `Γ_ℓ = b^{-2m} Σ_{n, n'} Π_j φ(ℓ_j, h_j)` where `φ` is the single-digit
    /// Owen factor: 1 if `ℓ_j <= h_j`, `(1 - b)^{-1}` if `ℓ_j = h_j + 1`, else 0.
    pub fn gain(&self, index: &GainIndex) -> Result<Ratio<i128>> {
        if index.levels.len() != self.dim || index.d != self.d {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                actual: index.levels.len(),
            });
        }
        let b = self.base.get() as i128;
        let dim = self.dim as u32;
        // Σ count (-1)^v (b-1)^{dim - v}, over the common denominator (b-1)^dim
        let mut numer: i128 = 0;
        'pairs: for (h, &count) in &self.counts {
            let mut v = 0u32;
            for (&l, &hj) in index.levels.iter().zip(h) {
                if l == 0 || hj == IDENTICAL || l <= hj as u32 {
                    continue;
                }
                if l == hj as u32 + 1 {
                    v += 1;
                } else {
                    continue 'pairs;
                }
            }
            let sign = if v.is_multiple_of(2) { 1 } else { -1 };
            numer += sign * count as i128 * (b - 1).pow(dim - v);
        }
        let denom = b.pow(2 * self.m) * (b - 1).pow(dim);
        Ok(Ratio::new(numer, denom))
    }
}

/// `Γ_ℓ` of the order-`d` scrambled, interlaced version of the digital net
/// `net`.
pub fn gain_coefficient(net: &DigitalNet, d: usize, index: &GainIndex) -> Result<Ratio<i128>> {
    PairProfile::digital(net, d)?.gain(index)
}

/// `Γ` evaluated literally for one member `k` of `B_ℓ`: the pair average of
/// the product over blocks of the order-`d` Owen expectation, on the
/// interlaced points.
pub fn gain_coefficient_for(net: &DigitalNet, d: usize, k: &[WalshIndex]) -> Result<Ratio<i128>> {
    let n = net.len() as u128;
    if n * n > GAIN_PAIR_GUARD {
        return Err(Error::TooLarge {
            what: "gain coefficient pair enumeration",
            work: n * n,
            limit: GAIN_PAIR_GUARD,
        });
    }
    if k.len() != net.dimension() {
        return Err(Error::LengthMismatch {
            expected: net.dimension(),
            actual: k.len(),
        });
    }
    let digits = k.iter().map(|ki| ki.num_digits()).max().unwrap_or(0);
    let w = (net.spec.m as usize).max(digits).max(1);
    let y = net.with_precision(w)?.interlace(d)?;
    let blocks = k.chunks(d).map(crate::interlace::interlace_index).collect::<Result<Vec<_>>>()?;
    let b = net.base().get() as i128;
    let mut total = Ratio::from_integer(0i128);
    for p in y.points() {
        for q in y.points() {
            let mut term = Ratio::from_integer(1i128);
            for ((x, xp), &ki) in p.iter().zip(q).zip(&blocks) {
                match super::owen_expectation_exact(ki, ki, x, xp, d)? {
                    super::OwenExpectation::Zero => {
                        term = Ratio::from_integer(0);
                        break;
                    }
                    super::OwenExpectation::Power(v) => term *= Ratio::new(1, 1 - b).pow(v as i32),
                }
            }
            total += term;
        }
    }
    Ok(total / b.pow(2 * net.spec.m))
}

/// Which case of the bound applies to `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GainBand {
    /// `|ℓ|_1 <= m - t`: `Γ = 0`.
    Zero,
    /// `m - t < |ℓ|_1 <= m - t + |q|`: `Γ <= b^{|q| - |ℓ|_1}`.
    Middle,
    /// `|ℓ|_1 > m - t + |q|`: `Γ <= b^{t - m}`.
    Upper,
}

/// The band of `ℓ` and its bound, with `q` the support of `ℓ` (coordinates
/// with `ℓ_j > 0`). Counting nonzero blocks instead is too strict: a
/// `(0, 1, 2)`-net with `ℓ = (1, 1)` has `Γ = 1`.
pub fn gain_bound(base: Base, m: u32, t: u32, index: &GainIndex) -> (GainBand, Ratio<i128>) {
    let b = base.get() as i128;
    let norm = index.norm1() as i64;
    let q = index.support().len() as i64;
    let mt = m as i64 - t as i64;
    let pow = |e: i64| {
        if e >= 0 {
            Ratio::from_integer(b.pow(e as u32))
        } else {
            Ratio::new(1, b.pow((-e) as u32))
        }
    };
    if norm <= mt {
        (GainBand::Zero, Ratio::from_integer(0))
    } else if norm <= mt + q {
        (GainBand::Middle, pow(q - norm))
    } else {
        (GainBand::Upper, pow(t as i64 - m as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainEntry {
    pub levels: Vec<u32>,
    pub norm1: u32,
    pub support_size: usize,
    /// Exact value as `numerator/denominator`.
    pub gamma: String,
    pub gamma_f64: f64,
    pub band: GainBand,
    pub bound_f64: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainReport {
    pub b: u32,
    pub m: u32,
    pub dim: usize,
    pub d: usize,
    pub t: u32,
    pub construction: String,
    pub max_norm: u32,
    pub entries: Vec<GainEntry>,
    pub violations: usize,
}

/// Every nonzero `ℓ ∈ N_0^{dim}` with `|ℓ|_1 <= max_norm`.
pub fn enumerate_levels(dim: usize, max_norm: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, dim: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            if prefix.iter().any(|&l| l > 0) {
                out.push(prefix.clone());
            }
            return;
        }
        for l in 0..=budget {
            prefix.push(l);
            rec(prefix, dim, budget - l, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(dim), dim, max_norm, &mut out);
    out
}

/// Computes `Γ_ℓ` for every nonzero `ℓ` with `|ℓ|_1 <= max_norm` and checks
/// it against the band bound for a digital `(t, m, ds)`-net.
pub fn gain_bound_check(net: &DigitalNet, d: usize, t: u32, max_norm: u32) -> Result<GainReport> {
    let profile = PairProfile::digital(net, d)?;
    let base = net.base();
    let m = net.spec.m;
    let mut entries = Vec::new();
    for levels in enumerate_levels(net.dimension(), max_norm) {
        let index = GainIndex::new(levels, d)?;
        let gamma = profile.gain(&index)?;
        let (band, bound) = gain_bound(base, m, t, &index);
        let holds = match band {
            GainBand::Zero => gamma == Ratio::from_integer(0),
            _ => gamma <= bound,
        };
        entries.push(GainEntry {
            norm1: index.norm1(),
            support_size: index.support().len(),
            gamma: format!("{}/{}", gamma.numer(), gamma.denom()),
            gamma_f64: ratio_f64(gamma),
            band,
            bound_f64: ratio_f64(bound),
            holds,
            levels: index.levels,
        });
    }
    let violations = entries.iter().filter(|e| !e.holds).count();
    Ok(GainReport {
        b: base.get(),
        m,
        dim: net.dimension(),
        d,
        t,
        construction: net.construction.clone(),
        max_norm,
        entries,
        violations,
    })
}

pub(crate) fn ratio_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
