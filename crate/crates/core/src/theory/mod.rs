//! Executable checks of the variance analysis for order-`d` scrambled,
//! interlaced nets: the Owen expectation of Walsh functions, exact gain
//! coefficients with their bound, the Walsh-coefficient decay bound, and the
//! difference operators and smooth-case variation that bound rests on.

mod gain;
mod owen;
mod spectral;
mod variance;
mod variation;

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

pub use gain::{
    enumerate_levels, gain_bound, gain_bound_check, gain_coefficient, gain_coefficient_for, GainBand, GainEntry,
    GainIndex, GainReport, PairProfile, GAIN_PAIR_GUARD,
};
pub(crate) use gain::ratio_f64;
pub use owen::{
    owen_case_grid, owen_expectation_exact, owen_expectation_mc, BetaProfile, McExpectation, OwenCase,
    OwenExpectation,
};
pub use spectral::{
    gamma, level_is_complete, level_of, sigma_bound, walsh_spectrum, SigmaTable, WalshSpectrum, CELL_GUARD,
};
pub use variance::{variance_decomposition_check, VarianceReport, VarianceTerm};
pub use variation::{finite_difference, variation_smooth, VariationSpec, VariationTerm};

/// Gauss–Legendre rule with `n` nodes mapped to `[0, 1]`.
pub(crate) fn unit_rule(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("at least one node"));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0))
        .collect()
}
