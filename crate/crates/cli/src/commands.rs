use hoqmc::estimator::Method;
use hoqmc::netgen::{builtin_matrices_with, DirectionNumbers, NetCheck, NetExport};
use hoqmc::scramble::{linear_scramble_net, scramble_net};
use hoqmc::theory::{
    gain_bound, gain_bound_check, gain_coefficient, gain_coefficient_for, owen_case_grid,
    variance_decomposition_check, GainEntry, GainIndex, OwenCase,
};
use hoqmc::{
    builtin_integrand, generate_net, t_value, verify_net, Base, Construction, Error, Estimator, EstimatorConfig,
    GeneratorMatrixSet, HashedPermutations, NetSpec, Result, ScrambleKey, ScrambleKind,
};
use serde::Serialize;

use crate::config::{companion_path, with_output, write_json, Envelope, Failure, RunConfig};
use crate::{
    ConvergeArgs, ConvergeScramble, Format, GainArgs, NetScramble, OwenCheckArgs, PointsArgs, VardecompArgs,
    VerifyArgs,
};

/// Matrices for a construction name; `zero` gives all-zero matrices. The
/// default is van der Corput for one coordinate, Sobol in base 2 and Faure
/// otherwise.
fn matrices(name: Option<&str>, base: Base, dim: usize, m: u32) -> Result<GeneratorMatrixSet> {
    let name = name.unwrap_or(if dim == 1 {
        "vdc"
    } else if base.get() == 2 {
        "sobol"
    } else {
        "faure"
    });
    if name == "zero" {
        return GeneratorMatrixSet::zeros(base, dim, m as usize);
    }
    let c: Construction = name.parse()?;
    builtin_matrices_with(c, base, dim, m as usize, &DirectionNumbers::from_env_or_bundled()?)
}

fn group_count(dim: usize, d: usize) -> Result<usize> {
    if d == 0 || dim == 0 || !dim.is_multiple_of(d) {
        return Err(Error::InvalidConfig(format!(
            "{dim} coordinates cannot be grouped by interlacing factor {d}"
        )));
    }
    Ok(dim / d)
}

fn ratio_text(r: &num_rational::Ratio<i128>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ratio_value(r: &num_rational::Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Serialize)]
struct PointsSummary {
    t: u32,
    points: usize,
    columns: usize,
}

pub fn points(a: PointsArgs) -> Result<Vec<Failure>> {
    let base = Base::new(a.net.b)?;
    let d = a.interlace;
    let s_out = group_count(a.s, d)?;
    let g = matrices(a.net.construction.as_deref(), base, a.s, a.net.m)?;
    let t = match t_value(&g) {
        Ok(t) => t,
        Err(e @ Error::TooLarge { .. }) => {
            log::warn!("{e}; recording t = m");
            a.net.m
        }
        Err(e) => return Err(e),
    };
    let mut net = generate_net(&g, NetSpec::new(base, a.net.m, s_out, d)?.with_t(t)?)?;
    let precision = base.float_safe_digits() / d;
    let key = ScrambleKey::new(a.seed, a.replication, base, precision);
    net = match a.scramble {
        NetScramble::None => net,
        NetScramble::Owen => scramble_net(&net.with_precision(precision)?, &HashedPermutations::new(&key))?,
        NetScramble::Linear => linear_scramble_net(&net.with_precision(precision)?, &key)?,
    };
    if d > 1 {
        net = net.interlace(d)?;
    }

    let mut config = RunConfig::new("points", Some(base.get()), a.format.name(), a.output.out.as_deref())
        .param("coordinates_before_interlacing", a.s)
        .param("replication", a.replication);
    config.m = Some(a.net.m);
    config.s = s_out;
    config.d = d;
    config.construction = Some(g.label().to_string());
    config.scramble = Some(format!("{:?}", a.scramble).to_lowercase());
    config.seed = a.seed;

    let out = a.output.out.as_deref();
    match a.format {
        Format::Csv => {
            with_output(out, |w| net.write_csv(w))?;
            if let Some(p) = out {
                let summary = PointsSummary {
                    t,
                    points: net.len(),
                    columns: net.dimension(),
                };
                write_json(Some(&companion_path(p)), &Envelope::new(&config, &[], &summary))?;
            }
        }
        Format::Json => {
            let export = NetExport::from_net(&net, None);
            write_json(out, &Envelope::new(&config, &[], &export))?;
        }
    }
    Ok(Vec::new())
}

pub fn converge(a: ConvergeArgs) -> Result<Vec<Failure>> {
    if a.m_min > a.m_max {
        return Err(Error::InvalidConfig(format!("m-min {} exceeds m-max {}", a.m_min, a.m_max)));
    }
    let base = Base::new(a.b)?;
    let f = builtin_integrand(&a.integrand)?;
    let method = match a.scramble {
        ConvergeScramble::None => Method::Qmc(ScrambleKind::None),
        ConvergeScramble::Owen => Method::Qmc(ScrambleKind::Owen),
        ConvergeScramble::Linear => Method::Qmc(ScrambleKind::Linear),
        ConvergeScramble::Mc => Method::MonteCarlo,
    };
    let mut cfg = EstimatorConfig::default()
        .with_base(base)
        .with_d(a.d)
        .with_method(method)
        .with_seed(a.seed)
        .with_replications(a.reps);
    if let Some(c) = &a.construction {
        cfg = cfg.with_construction(c.parse()?);
    }
    let s = f.dimension();
    let est = Estimator::new(f, cfg)?.with_direction_numbers(DirectionNumbers::from_env_or_bundled()?);
    let table = est.convergence(a.m_min..=a.m_max)?;

    let mut failures = Vec::new();
    if let Some(limit) = a.max_slope {
        if !(table.fit.defined && table.slope() <= limit) {
            failures.push(Failure::new("slope", format!("fitted slope {} is above {limit}", table.slope())));
        }
    }

    let mut config = RunConfig::new("converge", Some(base.get()), "csv", a.output.out.as_deref());
    config.m_range = Some([a.m_min, a.m_max]);
    config.s = s;
    config.d = a.d;
    config.construction = match method {
        Method::MonteCarlo => None,
        Method::Qmc(_) => Some(est.construction().name().to_string()),
    };
    config.scramble = Some(method.to_string());
    config.seed = a.seed;
    config.replications = Some(a.reps);
    config.integrand = Some(a.integrand.clone());
    if let Some(limit) = a.max_slope {
        config = config.param("max_slope", limit);
    }

    let out = a.output.out.as_deref();
    with_output(out, |w| table.write_csv(w))?;
    match out {
        Some(p) => write_json(Some(&companion_path(p)), &Envelope::new(&config, &failures, &table))?,
        None => log::info!("fitted slope {} on m = {:?}", table.slope(), table.fit.fit_m),
    }
    Ok(failures)
}

#[derive(Serialize)]
struct VerifyReport {
    computed_t: u32,
    checked_t: u32,
    points: usize,
    dimension: usize,
    check: NetCheck,
}

pub fn verify(a: VerifyArgs) -> Result<Vec<Failure>> {
    let base = Base::new(a.net.b)?;
    let d = a.interlace;
    let s_out = group_count(a.s, d)?;
    let g = matrices(a.net.construction.as_deref(), base, a.s, a.net.m)?;
    let computed_t = t_value(&g)?;
    let checked_t = a.t.unwrap_or(computed_t);
    let mut net = generate_net(&g, NetSpec::new(base, a.net.m, s_out, d)?)?;
    if d > 1 {
        net = net.interlace(d)?;
    }
    let check = verify_net(&net, checked_t)?;
    let mut failures = Vec::new();
    if let Some(v) = &check.violation {
        failures.push(Failure::new(
            "net",
            format!(
                "elementary interval levels {:?} anchors {:?} holds {} points, expected {}",
                v.levels, v.anchors, v.count, v.expected
            ),
        ));
    }
    eprintln!("t = {computed_t}; counting check at t = {checked_t}: {}", if check.passed { "pass" } else { "fail" });

    let mut config = RunConfig::new("verify", Some(base.get()), "json", a.output.out.as_deref());
    config.m = Some(a.net.m);
    config.s = s_out;
    config.d = d;
    config.construction = Some(g.label().to_string());
    if let Some(t) = a.t {
        config = config.param("t", t);
    }
    let report = VerifyReport {
        computed_t,
        checked_t,
        points: net.len(),
        dimension: net.dimension(),
        check,
    };
    write_json(a.output.out.as_deref(), &Envelope::new(&config, &failures, &report))?;
    Ok(failures)
}

#[derive(Serialize)]
struct OwenReport {
    total: usize,
    passed: usize,
    cases: Vec<OwenCase>,
}

pub fn owen_check(a: OwenCheckArgs) -> Result<Vec<Failure>> {
    let cases = owen_case_grid(a.cases, a.trials, a.seed)?;
    let failures: Vec<Failure> = cases
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.passed)
        .map(|(i, c)| {
            Failure::new(
                format!("case-{i}"),
                format!(
                    "b={} d={} k={} exact {} vs mc {}+{}i (se {})",
                    c.b, c.d, c.k, c.exact_value, c.mc.re, c.mc.im, c.mc.std_error
                ),
            )
        })
        .collect();
    let mut config = RunConfig::new("theory owen-check", None, "json", a.output.out.as_deref())
        .param("cases", a.cases)
        .param("trials", a.trials);
    config.seed = a.seed;
    let report = OwenReport {
        total: cases.len(),
        passed: cases.len() - failures.len(),
        cases,
    };
    write_json(a.output.out.as_deref(), &Envelope::new(&config, &failures, &report))?;
    Ok(failures)
}

#[derive(Serialize)]
struct SingleGain {
    t: u32,
    entry: GainEntry,
    /// The literal pair average at the smallest member of the level, when
    /// small enough to enumerate.
    literal: Option<String>,
}

pub fn gain(a: GainArgs) -> Result<Vec<Failure>> {
    let base = Base::new(a.b)?;
    let dim = a.s * a.d;
    if dim == 0 {
        return Err(Error::InvalidConfig("s and d must be positive".into()));
    }
    let g = matrices(a.net.as_deref(), base, dim, a.m)?;
    let t = t_value(&g)?;
    let net = generate_net(&g, NetSpec::new(base, a.m, a.s, a.d)?.with_t(t)?)?;

    let mut config = RunConfig::new("theory gain", Some(base.get()), "json", a.output.out.as_deref());
    config.m = Some(a.m);
    config.s = a.s;
    config.d = a.d;
    config.construction = Some(g.label().to_string());

    let mut failures = Vec::new();
    match a.l {
        Some(levels) => {
            if levels.len() != dim {
                return Err(Error::InvalidConfig(format!(
                    "--l needs {dim} entries (s * d), got {}",
                    levels.len()
                )));
            }
            config = config.param("l", &levels);
            let index = GainIndex::new(levels.clone(), a.d)?;
            let gamma = gain_coefficient(&net, a.d, &index)?;
            let (band, bound) = gain_bound(base, a.m, t, &index);
            let holds = if bound == num_rational::Ratio::from_integer(0) {
                gamma == bound
            } else {
                gamma <= bound
            };
            let literal = match gain_coefficient_for(&net, a.d, &index.smallest_member(base)?) {
                Ok(r) => Some(r),
                Err(Error::TooLarge { .. }) => None,
                Err(e) => return Err(e),
            };
            if !holds {
                failures.push(Failure::new("bound", format!("gamma {} exceeds {}", ratio_text(&gamma), ratio_text(&bound))));
            }
            if literal.is_some_and(|r| r != gamma) {
                failures.push(Failure::new("literal", "pair average at the smallest member disagrees"));
            }
            let report = SingleGain {
                t,
                entry: GainEntry {
                    norm1: index.norm1(),
                    support_size: index.support().len(),
                    gamma: ratio_text(&gamma),
                    gamma_f64: ratio_value(&gamma),
                    band,
                    bound_f64: ratio_value(&bound),
                    holds,
                    levels,
                },
                literal: literal.as_ref().map(ratio_text),
            };
            write_json(a.output.out.as_deref(), &Envelope::new(&config, &failures, &report))?;
        }
        None => {
            let max_norm = a.max_norm.unwrap_or(a.m + 4);
            config = config.param("max_norm", max_norm);
            let report = gain_bound_check(&net, a.d, t, max_norm)?;
            for e in report.entries.iter().filter(|e| !e.holds) {
                let id: Vec<String> = e.levels.iter().map(u32::to_string).collect();
                failures.push(Failure::new(
                    format!("l={}", id.join(",")),
                    format!("gamma {} against bound {} ({:?})", e.gamma, e.bound_f64, e.band),
                ));
            }
            write_json(a.output.out.as_deref(), &Envelope::new(&config, &failures, &report))?;
        }
    }
    Ok(failures)
}

pub fn vardecomp(a: VardecompArgs) -> Result<Vec<Failure>> {
    let base = Base::new(a.b)?;
    let f = builtin_integrand(&a.integrand)?;
    let g = matrices(a.construction.as_deref(), base, a.d, a.m)?;
    let net = generate_net(&g, NetSpec::new(base, a.m, 1, a.d)?)?;
    let report = variance_decomposition_check(&f, &net, a.budget, a.reps, a.seed)?;
    let mut failures = Vec::new();
    if !report.agrees(a.rel, a.z) {
        failures.push(Failure::new(
            "variance",
            format!(
                "empirical {} (se {}) vs truncated {} with tail {}",
                report.empirical_variance, report.empirical_std_error, report.truncated_sum, report.tail_bound
            ),
        ));
    }
    let mut config = RunConfig::new("theory vardecomp", Some(base.get()), "json", a.output.out.as_deref())
        .param("budget", a.budget)
        .param("rel", a.rel)
        .param("z", a.z);
    config.m = Some(a.m);
    config.s = 1;
    config.d = a.d;
    config.construction = Some(g.label().to_string());
    config.scramble = Some(ScrambleKind::Owen.to_string());
    config.seed = a.seed;
    config.replications = Some(a.reps);
    config.integrand = Some(a.integrand);
    write_json(a.output.out.as_deref(), &Envelope::new(&config, &failures, &report))?;
    Ok(failures)
}
