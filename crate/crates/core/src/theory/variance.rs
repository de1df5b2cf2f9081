use rayon::prelude::*;
use serde::Serialize;

use super::gain::{enumerate_levels, GainIndex, PairProfile};
use super::ratio_f64;
use super::spectral::{walsh_spectrum, SigmaTable};
use crate::error::{Error, Result};
use crate::estimator::Integrand;
use crate::netgen::DigitalNet;
use crate::scramble::{order_d_scramble, HashedPermutations, ScrambleKey};

/// Largest digit count per coordinate used by the empirical scrambles.
const SCRAMBLE_DIGITS: usize = 52;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceTerm {
    pub levels: Vec<u32>,
    pub sigma2: f64,
    pub gain: f64,
}

/// Empirical variance of the scrambled estimator next to the truncated sum
/// `Σ_{0 < |ℓ|_1 <= budget} σ²_ℓ Γ_ℓ`.
///
/// Every `Γ_ℓ` lies in `[0, 1]`, so the omitted terms add between 0 and
/// `tail_bound = Var f - Σ_{0 < |ℓ|_1 <= budget} σ²_ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub integrand: String,
    pub b: u32,
    pub m: u32,
    pub d: usize,
    pub construction: String,
    pub budget: u32,
    pub grid_levels: u32,
    pub replications: usize,
    pub seed: u64,
    pub empirical_variance: f64,
    /// Standard error of `empirical_variance`.
    pub empirical_std_error: f64,
    pub truncated_sum: f64,
    pub tail_bound: f64,
    pub function_variance: f64,
    pub terms: Vec<VarianceTerm>,
}

impl VarianceReport {
    /// `|emp - trunc| <= rel · trunc + tail + z · se`.
    pub fn agrees(&self, rel: f64, z: f64) -> bool {
        let gap = (self.empirical_variance - self.truncated_sum).abs();
        gap <= rel * self.truncated_sum + self.tail_bound + z * self.empirical_std_error
    }
}

/// `net` is the `d`-dimensional net before interlacing and `f` is
/// one-dimensional. The empirical side scrambles the interlaced net with
/// independent order-`d` Owen scrambles and evaluates `f` at the centre of
/// each point's `b^{-52}`-cell.
pub fn variance_decomposition_check(
    f: &Integrand,
    net: &DigitalNet,
    budget: u32,
    replications: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if f.dimension() != 1 {
        return Err(Error::InvalidConfig(format!(
            "variance decomposition supports one-dimensional integrands, '{}' has dimension {}",
            f.name(),
            f.dimension()
        )));
    }
    if replications < 2 {
        return Err(Error::InvalidConfig("need at least two replications".into()));
    }
    let d = net.dimension();
    let base = net.base();
    let grid_levels = budget * d as u32;
    let spectrum = walsh_spectrum(f, base, grid_levels)?;
    let sigma = SigmaTable::new(&spectrum, d)?;
    let profile = PairProfile::digital(net, d)?;

    let mut terms = Vec::new();
    let (mut truncated_sum, mut captured) = (0.0, 0.0);
    for levels in enumerate_levels(d, budget) {
        let sigma2 = sigma.sigma2(&levels).expect("grid covers every level within the budget");
        let gain = ratio_f64(profile.gain(&GainIndex::new(levels.clone(), d)?)?);
        truncated_sum += sigma2 * gain;
        captured += sigma2;
        terms.push(VarianceTerm { levels, sigma2, gain });
    }
    let function_variance = spectrum.variance();

    let per_class = SCRAMBLE_DIGITS / d;
    let y = net.with_precision(per_class)?.interlace(d)?;
    let estimates: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let key = ScrambleKey::new(seed, rep, base, per_class);
            let src = HashedPermutations::new(&key);
            let mut sum = 0.0;
            for p in y.points() {
                let z = order_d_scramble(p, d, &src)?;
                sum += f.evaluate(&[z[0].midpoint_value()]);
            }
            Ok(sum / y.len() as f64)
        })
        .collect::<Result<_>>()?;
    let r = replications as f64;
    let mean = estimates.iter().sum::<f64>() / r;
    let sq: Vec<f64> = estimates.iter().map(|e| (e - mean).powi(2)).collect();
    let empirical_variance = sq.iter().sum::<f64>() / (r - 1.0);
    let spread = sq.iter().map(|q| (q - empirical_variance).powi(2)).sum::<f64>() / (r - 1.0);

    Ok(VarianceReport {
        integrand: f.name().to_string(),
        b: base.get(),
        m: net.spec.m,
        d,
        construction: net.construction.clone(),
        budget,
        grid_levels,
        replications,
        seed,
        empirical_variance,
        empirical_std_error: (spread / r).sqrt(),
        truncated_sum,
        tail_bound: (function_variance - captured).max(0.0),
        function_variance,
        terms,
    })
}
