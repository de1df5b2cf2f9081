//! Prints convergence tables for the two example integrands.

use std::time::Instant;

use hoqmc::estimator::{builtin_integrand, convergence_experiment, Method};
use hoqmc::ScrambleKind;

fn main() -> hoqmc::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    for (name, ds, m_max) in [("example1", &[1, 2, 3][..], 14), ("example2", &[1, 2][..], 13)] {
        let f = builtin_integrand(name)?;
        for &d in ds {
            let start = Instant::now();
            let t = convergence_experiment(&f, d, 6..=m_max, reps, Method::Qmc(ScrambleKind::Owen), 42)?;
            println!("{name} d={d} slope={:.3} ({:.1?})", t.slope(), start.elapsed());
            for r in &t.rows {
                println!("  m={:2} rmse={:.3e} se={:.2e}", r.m, r.rmse, r.stderr);
            }
        }
    }
    Ok(())
}
