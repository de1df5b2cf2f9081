use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::unit_rule;
use crate::badic::{Base, WalshIndex};
use crate::error::{Error, Result};
use crate::estimator::Integrand;
use crate::interlace::deinterlace_index;

/// Largest number of grid cells `b^L` accepted by [`walsh_spectrum`].
pub const CELL_GUARD: u64 = 1 << 22;

/// Gauss–Legendre nodes per grid cell.
const NODES_PER_CELL: usize = 4;

/// Walsh coefficients `f̂(k) = ∫ f conj(wal_k)` of a one-dimensional function
/// for every `k < b^L`.
///
/// Walsh functions with `k < b^L` are constant on the cells of width `b^{-L}`,
/// so the coefficients only need the cell integrals of `f`; those come from
/// a Gauss–Legendre rule per cell.
#[derive(Clone, Debug)]
pub struct WalshSpectrum {
    pub base: Base,
    pub levels: u32,
    pub coefficients: Vec<Complex64>,
    /// `∫ f^2` by the same cell rule.
    pub square_integral: f64,
}

impl WalshSpectrum {
    pub fn mean(&self) -> f64 {
        self.coefficients[0].re
    }

    /// `∫ f^2 - (∫ f)^2`.
    pub fn variance(&self) -> f64 {
        self.square_integral - self.mean() * self.mean()
    }

    pub fn coefficient(&self, k: u64) -> Option<Complex64> {
        self.coefficients.get(k as usize).copied()
    }
}

pub fn walsh_spectrum(f: &Integrand, base: Base, levels: u32) -> Result<WalshSpectrum> {
    if f.dimension() != 1 {
        return Err(Error::InvalidConfig(format!(
            "Walsh spectrum needs a one-dimensional integrand, '{}' has dimension {}",
            f.name(),
            f.dimension()
        )));
    }
    let cells = base.pow(levels).filter(|&c| c <= CELL_GUARD).ok_or(Error::TooLarge {
        what: "Walsh spectrum grid",
        work: (base.get() as u128).saturating_pow(levels),
        limit: CELL_GUARD as u128,
    })? as usize;
    let rule = unit_rule(NODES_PER_CELL);
    let width = 1.0 / cells as f64;
    let mut values = Vec::with_capacity(cells);
    let mut square_integral = 0.0;
    for j in 0..cells {
        let (mut sum, mut sq) = (0.0, 0.0);
        for &(x, w) in &rule {
            let v = f.evaluate(&[(j as f64 + x) * width]);
            sum += w * v;
            sq += w * v * v;
        }
        values.push(Complex64::new(sum * width, 0.0));
        square_integral += sq * width;
    }
    let b = base.get() as usize;
    let roots: Vec<Complex64> = if b == 2 {
        vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
    } else {
        (0..b)
            .map(|e| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * e as f64 / b as f64))
            .collect()
    };
    // cell index j = Σ ξ_a b^{L-a}; transform each digit axis in place
    let mut scratch = vec![Complex64::new(0.0, 0.0); b];
    let mut stride = 1;
    while stride < cells {
        for start in (0..cells).step_by(stride * b) {
            for off in 0..stride {
                let at = |t: usize| start + off + t * stride;
                for (kappa, out) in scratch.iter_mut().enumerate() {
                    *out = (0..b).map(|xi| values[at(xi)] * roots[kappa * xi % b]).sum();
                }
                for (t, v) in scratch.iter().enumerate() {
                    values[at(t)] = *v;
                }
            }
        }
        stride *= b;
    }
    // position of axis a now holds κ_a, the digit of b^{a-1} in k
    let mut coefficients = vec![Complex64::new(0.0, 0.0); cells];
    for (j, v) in values.into_iter().enumerate() {
        let (mut rest, mut k) = (j, 0usize);
        for _ in 0..levels {
            k = k * b + rest % b;
            rest /= b;
        }
        coefficients[k] = v;
    }
    Ok(WalshSpectrum {
        base,
        levels,
        coefficients,
        square_integral,
    })
}

/// `ℓ` of a one-dimensional index `k` after splitting it into `d` residue
/// class components: the digit count of each component.
pub fn level_of(k: WalshIndex, d: usize) -> Vec<u32> {
    deinterlace_index(k, d).iter().map(|c| c.num_digits() as u32).collect()
}

/// Whether every index of level `ℓ` lies below `b^L`: the component of
/// class `r` with `ℓ_r` digits reaches interlaced position `(ℓ_r - 1) d + r`.
pub fn level_is_complete(levels: &[u32], levels_total: u32) -> bool {
    let d = levels.len();
    levels
        .iter()
        .enumerate()
        .all(|(r, &l)| l == 0 || (l as usize - 1) * d + r < levels_total as usize)
}

/// `σ²_ℓ(f) = Σ_{k ∈ B_ℓ} |f̂(k)|²` for the one-dimensional case, grouped by
/// the per-class digit counts of `k`.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaTable {
    pub d: usize,
    pub levels_total: u32,
    sigma2: BTreeMap<Vec<u32>, f64>,
}

impl SigmaTable {
    pub fn new(spectrum: &WalshSpectrum, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("interlacing factor must be positive".into()));
        }
        let mut sigma2: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (k, c) in spectrum.coefficients.iter().enumerate().skip(1) {
            let l = level_of(WalshIndex::new(k as u64, spectrum.base), d);
            *sigma2.entry(l).or_default() += c.norm_sqr();
        }
        Ok(Self {
            d,
            levels_total: spectrum.levels,
            sigma2,
        })
    }

    /// `None` when part of `B_ℓ` lies beyond the grid.
    pub fn sigma2(&self, levels: &[u32]) -> Option<f64> {
        if levels.len() != self.d || !level_is_complete(levels, self.levels_total) {
            return None;
        }
        Some(self.sigma2.get(levels).copied().unwrap_or(0.0))
    }

    pub fn sigma(&self, levels: &[u32]) -> Option<f64> {
        self.sigma2(levels).map(f64::sqrt)
    }
}

/// Decay factor `γ(ℓ)` of the Walsh-coefficient bound. Within block `i`,
/// coordinate `r = 1..d` with `ℓ_j > 0` contributes
/// `γ'_j = (b - 1) b^{-r - (ℓ_j - 1) d}`; the `min(α, |K_i|)` smallest
/// factors of each block are multiplied.
pub fn gamma(levels: &[u32], d: usize, base: Base, alpha: u32) -> f64 {
    let b = base.get() as f64;
    let mut out = 1.0;
    for block in levels.chunks(d) {
        let mut factors: Vec<f64> = block
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(r, &l)| (b - 1.0) * b.powi(-(r as i32 + 1) - (l as i32 - 1) * d as i32))
            .collect();
        factors.sort_by(f64::total_cmp);
        out *= factors.iter().take(alpha as usize).product::<f64>();
    }
    out
}

/// `2^{s max(d - α, 0)} γ(ℓ) V`.
pub fn sigma_bound(levels: &[u32], d: usize, base: Base, alpha: u32, variation: f64) -> f64 {
    let s = (levels.len() / d) as i32;
    let excess = (d as i32 - alpha as i32).max(0);
    2f64.powi(s * excess) * gamma(levels, d, base, alpha) * variation
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::builtin_integrand;

    #[test]
    fn identity_function_base_two() {
        // x = 1/2 - Σ_a 2^{-a-1} wal_{2^{a-1}}(x) in the limit
        let f = builtin_integrand("linear").unwrap();
        let sp = walsh_spectrum(&f, Base::TWO, 6).unwrap();
        assert!((sp.mean() - 0.5).abs() < 1e-14);
        for k in 1..64u64 {
            let c = sp.coefficient(k).unwrap();
            let want = if k.is_power_of_two() {
                -0.25 / k as f64
            } else {
                0.0
            };
            assert!((c - Complex64::new(want, 0.0)).norm() < 1e-14, "k = {k}: {c}");
        }
        assert!((sp.variance() - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn parseval_for_step_function_base_three() {
        // a function constant on the 3^3 cells is fully captured at L = 3
        let f = Integrand::new("step", 1, |x| (x[0] * 27.0).floor().sin());
        let sp = walsh_spectrum(&f, Base::new(3).unwrap(), 3).unwrap();
        let energy: f64 = sp.coefficients.iter().map(|c| c.norm_sqr()).sum();
        assert!((energy - sp.square_integral).abs() < 1e-12);
    }

    #[test]
    fn level_grouping() {
        // k = 0b1001, d = 2: class 0 digits (1, 0) -> 1, class 1 digits (0, 1) -> 2
        assert_eq!(level_of(WalshIndex::new(0b1001, Base::TWO), 2), vec![1, 2]);
        assert!(level_is_complete(&[2, 2], 4));
        assert!(!level_is_complete(&[3, 0], 4));
    }

    #[test]
    fn sigma_table_for_identity() {
        let f = builtin_integrand("linear").unwrap();
        let sp = walsh_spectrum(&f, Base::TWO, 8).unwrap();
        let table = SigmaTable::new(&sp, 1).unwrap();
        // only k = 2^{l-1} has level l
        for l in 1..=8u32 {
            let want = 0.25f64.powi(l as i32 + 1);
            assert!((table.sigma2(&[l]).unwrap() - want).abs() < 1e-15);
        }
        assert!(table.sigma2(&[9]).is_none());
    }

    #[test]
    fn gamma_factors() {
        let two = Base::TWO;
        assert_eq!(gamma(&[0, 0], 2, two, 2), 1.0);
        // r = 1, l = 1: (b-1) b^{-1}
        assert_eq!(gamma(&[1], 1, two, 1), 0.5);
        // d = 2: b^{-1-2} and b^{-2-0}; α = 1 keeps the smaller
        assert_eq!(gamma(&[2, 1], 2, two, 2), 0.125 * 0.25);
        assert_eq!(gamma(&[2, 1], 2, two, 1), 0.125);
        assert_eq!(sigma_bound(&[2, 1], 2, two, 1, 1.0), 2.0 * 0.125);
    }
}
