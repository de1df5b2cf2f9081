//! Higher-order scrambled digital nets.
//!
//! The crate builds digital `(t, m, s)`-nets over `Z_b`, randomizes them with
//! Owen's nested uniform scrambling (or a cheaper linear matrix scramble),
//! interlaces the digits of groups of `d` coordinates, and averages an
//! integrand over the resulting points. For integrands with square integrable
//! mixed derivatives of order `d`, the root mean square error of the estimate
//! decays like `N^(-d-1/2)` up to logarithmic factors.
//!
//! Module map:
//!
//! * [`badic`]: exact base-`b` digit points, digitwise `⊕`/`⊖`, Walsh functions.
//! * [`netgen`]: generator matrices, classical constructions, `t`-value and
//!   elementary-interval verification.
//! * [`scramble`]: Owen scrambling, order-`d` scrambling, linear matrix scramble.
//! * [`interlace`]: the digit interlacing map on points and Walsh indices.
//! * [`estimator`]: the randomized QMC estimator, replications and convergence tables.
//! * [`theory`]: executable checks of the variance analysis (Owen's lemma of
//!   order `d`, gain coefficients, finite differences, smooth variation).

pub mod badic;
pub mod error;
pub mod estimator;
mod gf;
pub mod interlace;
pub mod netgen;
mod rng;
pub mod scramble;
pub mod theory;

pub use badic::{walsh, walsh_multi, Base, DigitPoint, WalshIndex, WalshValue};
pub use error::{Error, Result};
pub use estimator::{
    builtin_integrand, ConvergenceTable, EstimateResult, Estimator, EstimatorConfig, Integrand,
};
pub use interlace::{deinterlace_point, interlace_index, interlace_point, InterlaceSpec};
pub use netgen::{
    builtin_matrices, generate_net, t_value, verify_net, Construction, DigitalNet,
    GeneratorMatrixSet, NetSpec,
};
pub use scramble::{owen_scramble, HashedPermutations, PermutationSource, ScrambleKey, ScrambleKind};

/// Version tag written into every exported artifact.
pub const FORMAT_VERSION: &str = "hoqmc/1";
