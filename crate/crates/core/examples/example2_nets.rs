//! Per-`m` RMSE of the two-dimensional example with `d = 2`, for the
//! base-2 Sobol net and the base-5 Faure net, next to the `t`-value of the
//! underlying four-dimensional net and the local slope between rows.

use hoqmc::estimator::{builtin_integrand, Estimator, EstimatorConfig};
use hoqmc::netgen::{t_value, Construction};
use hoqmc::{Base, ScrambleKind};

fn main() -> hoqmc::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    let f = builtin_integrand("example2")?;
    for (construction, b, ms) in [(Construction::Sobol, 2, 4..=14), (Construction::Faure, 5, 2..=6)] {
        let base = Base::new(b)?;
        let est = Estimator::new(
            f.clone(),
            EstimatorConfig::default()
                .with_d(2)
                .with_base(base)
                .with_construction(construction)
                .with_scramble(ScrambleKind::Owen)
                .with_replications(reps),
        )?;
        let mut prev: Option<f64> = None;
        for m in ms {
            let t = t_value(&est.base_matrices(m)?)?;
            let rmse = est.run_replications(m)?.rmse.unwrap_or(f64::NAN);
            let local = prev.map(|p| (rmse / p).ln() / (b as f64).ln());
            match local {
                Some(s) => println!("{construction} b={b} m={m:2} t={t} rmse={rmse:.3e} local slope {s:.2}"),
                None => println!("{construction} b={b} m={m:2} t={t} rmse={rmse:.3e}"),
            }
            prev = Some(rmse);
        }
    }
    Ok(())
}
