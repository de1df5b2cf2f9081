//! The randomized QMC estimator, replication statistics and convergence
//! experiments.
//!
//! One estimate builds a digital `(t, m, ds)`-net, randomizes it with the
//! chosen scramble, interlaces groups of `d` coordinates and averages the
//! integrand over the `b^m` resulting points. Scrambled points are evaluated
//! at the center of their `b^{-W}` cell, the conditional mean of the random
//! digits past the working precision.

mod integrand;
mod table;

use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::badic::{Base, DigitPoint};
use crate::error::{Error, Result};
use crate::interlace::{interlace_point, InterlaceSpec};
use crate::netgen::{builtin_matrices_with, Construction, DirectionNumbers, GeneratorMatrixSet, NetSpec};
use crate::rng::keyed_rng;
use crate::scramble::{owen_scramble, HashedPermutations, LinearScramble, ScrambleKey, ScrambleKind};

pub use integrand::{builtin_integrand, Integrand, BUILTIN_INTEGRANDS};
pub use table::{fit_slope, ConvergenceRow, ConvergenceTable, SlopeFit, CSV_HEADER};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;
/// Replications per estimate when none are given.
pub const DEFAULT_REPLICATIONS: usize = 300;

const MC_TAG: u64 = 0x4d43_4d43;

/// How the `b^m` points of one replication are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Qmc(ScrambleKind),
    /// I.i.d. uniform points, the plain Monte Carlo baseline.
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Qmc(kind) => write!(f, "{kind}"),
            Method::MonteCarlo => f.write_str("mc"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Method::MonteCarlo),
            other => other.parse().map(Method::Qmc),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub base: Base,
    /// Defaults to van der Corput when `ds = 1`, else Sobol in base 2 and Faure otherwise.
    pub construction: Option<Construction>,
    pub d: usize,
    pub method: Method,
    pub seed: u64,
    pub replications: usize,
    /// Digits per coordinate before interlacing; defaults to the float-safe budget divided by `d`.
    pub input_precision: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            base: Base::TWO,
            construction: None,
            d: 1,
            method: Method::Qmc(ScrambleKind::Owen),
            seed: DEFAULT_SEED,
            replications: DEFAULT_REPLICATIONS,
            input_precision: None,
        }
    }
}

impl EstimatorConfig {
    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }

    pub fn with_scramble(mut self, kind: ScrambleKind) -> Self {
        self.method = Method::Qmc(kind);
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replications(mut self, r: usize) -> Self {
        self.replications = r;
        self
    }

    pub fn with_construction(mut self, c: Construction) -> Self {
        self.construction = Some(c);
        self
    }

    pub fn with_base(mut self, base: Base) -> Self {
        self.base = base;
        self
    }
}

/// Summary of `R` independent replications at one `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub integrand: String,
    pub b: u32,
    pub m: u32,
    pub s: usize,
    pub d: usize,
    pub n: u64,
    pub construction: Option<Construction>,
    pub scramble: Method,
    pub seed: u64,
    pub replications: usize,
    /// Mean of the per-replication estimates.
    pub estimate: f64,
    pub estimates: Vec<f64>,
    /// Unbiased sample variance (divisor `R - 1`).
    pub variance: f64,
    /// `sqrt(variance / R)`.
    pub std_error: f64,
    pub exact: Option<f64>,
    pub rmse: Option<f64>,
    /// Standard error of `rmse` by the delta method.
    pub rmse_stderr: Option<f64>,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Base-net data shared by all replications at one `m`.
struct PreparedNet {
    m: u32,
    /// `b^m` points of `ds` coordinates each, padded to the working precision.
    points: Vec<DigitPoint>,
}

/// Estimates `∫ f` with scrambled, interlaced digital nets.
#[derive(Clone, Debug)]
pub struct Estimator {
    integrand: Integrand,
    config: EstimatorConfig,
    construction: Construction,
    interlace: InterlaceSpec,
    directions: DirectionNumbers,
}

impl Estimator {
    pub fn new(integrand: Integrand, config: EstimatorConfig) -> Result<Self> {
        let s = integrand.dimension();
        if s == 0 {
            return Err(Error::InvalidConfig("integrand dimension must be positive".into()));
        }
        let interlace = match config.input_precision {
            Some(w) => InterlaceSpec::new(config.d, config.base, w)?,
            None => InterlaceSpec::with_default_precision(config.d, config.base)?,
        };
        let ds = s * config.d;
        let construction = config.construction.unwrap_or(if config.base.get() == 2 && ds > 1 {
            Construction::Sobol
        } else if ds == 1 {
            Construction::VanDerCorput
        } else {
            Construction::Faure
        });
        Ok(Self {
            integrand,
            config,
            construction,
            interlace,
            directions: DirectionNumbers::bundled(),
        })
    }

    /// Replaces the bundled Sobol direction numbers.
    pub fn with_direction_numbers(mut self, directions: DirectionNumbers) -> Self {
        self.directions = directions;
        self
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn interlace_spec(&self) -> InterlaceSpec {
        self.interlace
    }

    /// Generator matrices of the underlying `ds`-dimensional net.
    pub fn base_matrices(&self, m: u32) -> Result<GeneratorMatrixSet> {
        let ds = self.integrand.dimension() * self.config.d;
        builtin_matrices_with(self.construction, self.config.base, ds, m as usize, &self.directions)
    }

    pub fn net_spec(&self, m: u32) -> Result<NetSpec> {
        NetSpec::new(self.config.base, m, self.integrand.dimension(), self.config.d)
    }

    fn prepare(&self, m: u32) -> Result<PreparedNet> {
        let g = self.base_matrices(m)?;
        let w = self.interlace.input_precision;
        let n = g.num_points();
        if n > 1 << 26 {
            return Err(Error::TooLarge {
                what: "point set",
                work: n as u128,
                limit: 1 << 26,
            });
        }
        let mut points = Vec::with_capacity(n as usize * g.dimension());
        for i in 0..n {
            for x in g.generate_point(i)? {
                points.push(x.with_precision(w)?);
            }
        }
        Ok(PreparedNet { m, points })
    }

    /// Float coordinates of the `b^m` points used by one replication.
    pub fn points(&self, m: u32, replication_id: u64) -> Result<Vec<Vec<f64>>> {
        let method = self.config.method;
        match method {
            Method::MonteCarlo => {
                let s = self.integrand.dimension();
                let n = self.config.base.pow(m).unwrap_or(u64::MAX);
                let mut rng = keyed_rng(&[MC_TAG, self.config.seed, replication_id]);
                Ok((0..n).map(|_| (0..s).map(|_| rng.random::<f64>()).collect()).collect())
            }
            Method::Qmc(kind) => {
                let net = self.prepare(m)?;
                let mut out = Vec::new();
                self.for_each_point(&net, kind, replication_id, |x| out.push(x.to_vec()))?;
                Ok(out)
            }
        }
    }

    /// Runs `visit` on every point of replication `replication_id`.
    fn for_each_point(
        &self,
        net: &PreparedNet,
        kind: ScrambleKind,
        replication_id: u64,
        mut visit: impl FnMut(&[f64]),
    ) -> Result<()> {
        let s = self.integrand.dimension();
        let d = self.config.d;
        let ds = s * d;
        let key = ScrambleKey::new(
            self.config.seed,
            replication_id,
            self.config.base,
            self.interlace.input_precision,
        );
        let owen = HashedPermutations::new(&key);
        let linear: Vec<LinearScramble> = match kind {
            ScrambleKind::Linear => (0..ds).map(|j| LinearScramble::new(&key, j)).collect(),
            _ => Vec::new(),
        };
        let mut scrambled = vec![net.points[0]; ds];
        let mut x = vec![0.0; s];
        for p in net.points.chunks(ds) {
            for (j, (out, xj)) in scrambled.iter_mut().zip(p).enumerate() {
                *out = match kind {
                    ScrambleKind::None => *xj,
                    ScrambleKind::Owen => owen_scramble(xj, j, &owen),
                    ScrambleKind::Linear => linear[j].apply(xj)?,
                };
            }
            for (i, xi) in x.iter_mut().enumerate() {
                let y = interlace_point(&scrambled[i * d..(i + 1) * d])?;
                *xi = match kind {
                    ScrambleKind::None => y.value(),
                    _ => y.midpoint_value(),
                };
            }
            visit(&x);
        }
        Ok(())
    }

    /// Error `Î(f) - offset` of one replication, summed with compensation.
    fn replication_error(&self, net: Option<&PreparedNet>, m: u32, replication_id: u64, offset: f64) -> Result<f64> {
        let mut acc = CompensatedSum::default();
        let f = &self.integrand;
        let n = self.config.base.pow(m).unwrap_or(u64::MAX);
        match (self.config.method, net) {
            (Method::Qmc(kind), Some(net)) => {
                debug_assert_eq!(net.m, m);
                self.for_each_point(net, kind, replication_id, |x| acc.add(f.evaluate(x) - offset))?;
            }
            (Method::MonteCarlo, _) => {
                let s = f.dimension();
                let mut rng = keyed_rng(&[MC_TAG, self.config.seed, replication_id]);
                let mut x = vec![0.0; s];
                for _ in 0..n {
                    x.iter_mut().for_each(|xi| *xi = rng.random::<f64>());
                    acc.add(f.evaluate(&x) - offset);
                }
            }
            (Method::Qmc(_), None) => unreachable!("qmc replications need a prepared net"),
        }
        Ok(acc.total() / n as f64)
    }

    fn prepared(&self, m: u32) -> Result<Option<PreparedNet>> {
        match self.config.method {
            Method::Qmc(_) => self.prepare(m).map(Some),
            Method::MonteCarlo => Ok(None),
        }
    }

    /// The estimate `Î(f)` of a single replication.
    pub fn estimate(&self, m: u32, replication_id: u64) -> Result<f64> {
        let net = self.prepared(m)?;
        let offset = self.integrand.exact_integral().unwrap_or(0.0);
        Ok(offset + self.replication_error(net.as_ref(), m, replication_id, offset)?)
    }

    /// `R` replications with ids `0..R`, run in parallel and merged in id order.
    pub fn run_replications(&self, m: u32) -> Result<EstimateResult> {
        let r = self.config.replications;
        if r < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 replications, got {r}")));
        }
        let net = self.prepared(m)?;
        let offset = self.integrand.exact_integral().unwrap_or(0.0);
        let errors = (0..r as u64)
            .into_par_iter()
            .map(|id| self.replication_error(net.as_ref(), m, id, offset))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.summarize(m, errors, offset))
    }

    fn summarize(&self, m: u32, errors: Vec<f64>, offset: f64) -> EstimateResult {
        let r = errors.len() as f64;
        let mean_err = errors.iter().sum::<f64>() / r;
        let variance = errors.iter().map(|e| (e - mean_err).powi(2)).sum::<f64>() / (r - 1.0);
        let exact = self.integrand.exact_integral();
        let (rmse, rmse_stderr) = match exact {
            Some(_) => {
                let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
                let ms = sq.iter().sum::<f64>() / r;
                let var_sq = sq.iter().map(|v| (v - ms).powi(2)).sum::<f64>() / (r - 1.0);
                let rmse = ms.sqrt();
                let se = if rmse > 0.0 { (var_sq / r).sqrt() / (2.0 * rmse) } else { 0.0 };
                (Some(rmse), Some(se))
            }
            None => (None, None),
        };
        EstimateResult {
            integrand: self.integrand.name().to_string(),
            b: self.config.base.get(),
            m,
            s: self.integrand.dimension(),
            d: self.config.d,
            n: self.config.base.pow(m).unwrap_or(u64::MAX),
            construction: match self.config.method {
                Method::Qmc(_) => Some(self.construction),
                Method::MonteCarlo => None,
            },
            scramble: self.config.method,
            seed: self.config.seed,
            replications: errors.len(),
            estimate: offset + mean_err,
            estimates: errors.iter().map(|e| offset + e).collect(),
            variance,
            std_error: (variance / r).sqrt(),
            exact,
            rmse,
            rmse_stderr,
        }
    }

    /// One row per `m`, with a slope fitted on the upper half of the range.
    pub fn convergence(&self, m_range: impl IntoIterator<Item = u32>) -> Result<ConvergenceTable> {
        if self.integrand.exact_integral().is_none() {
            return Err(Error::InvalidConfig(format!(
                "integrand '{}' has no exact integral, RMSE is undefined",
                self.integrand.name()
            )));
        }
        let ms: Vec<u32> = m_range.into_iter().collect();
        if ms.is_empty() || ms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("m range must be nonempty and ascending".into()));
        }
        let mut rows = Vec::with_capacity(ms.len());
        for &m in &ms {
            let res = self.run_replications(m)?;
            log::info!("d={} m={m} rmse={:e}", self.config.d, res.rmse.unwrap_or(f64::NAN));
            rows.push(ConvergenceRow {
                d: self.config.d,
                m,
                n: res.n,
                rmse: res.rmse.unwrap_or(f64::NAN),
                stderr: res.rmse_stderr.unwrap_or(f64::NAN),
                replications: res.replications,
            });
        }
        Ok(ConvergenceTable::new(
            self.integrand.name(),
            self.config.method,
            self.config.seed,
            self.config.base.get(),
            rows,
        ))
    }
}

fn config_for(spec: &NetSpec, f: &Integrand, method: Method, seed: u64, replications: usize) -> Result<EstimatorConfig> {
    if spec.s != f.dimension() {
        return Err(Error::InvalidConfig(format!(
            "net dimension {} does not match integrand dimension {}",
            spec.s,
            f.dimension()
        )));
    }
    Ok(EstimatorConfig {
        base: spec.base,
        d: spec.d,
        method,
        seed,
        replications,
        ..EstimatorConfig::default()
    })
}

/// One estimate `Î(f)` for the replication identified by `key`.
pub fn estimate(f: &Integrand, spec: &NetSpec, kind: ScrambleKind, key: &ScrambleKey) -> Result<f64> {
    let config = config_for(spec, f, Method::Qmc(kind), key.seed, 2)?;
    Estimator::new(f.clone(), config)?.estimate(spec.m, key.replication_id)
}

pub fn run_replications(f: &Integrand, spec: &NetSpec, kind: ScrambleKind, seed: u64, replications: usize) -> Result<EstimateResult> {
    let config = config_for(spec, f, Method::Qmc(kind), seed, replications)?;
    Estimator::new(f.clone(), config)?.run_replications(spec.m)
}

/// Convergence table in base 2 with the default construction.
pub fn convergence_experiment(
    f: &Integrand,
    d: usize,
    m_range: impl IntoIterator<Item = u32>,
    replications: usize,
    method: Method,
    seed: u64,
) -> Result<ConvergenceTable> {
    let config = EstimatorConfig::default()
        .with_d(d)
        .with_method(method)
        .with_seed(seed)
        .with_replications(replications);
    Estimator::new(f.clone(), config)?.convergence(m_range)
}
