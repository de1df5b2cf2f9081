use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Method;
use crate::error::Result;

/// Column order of the convergence CSV.
pub const CSV_HEADER: &str = "d,m,N,rmse,stderr,replications,scramble,seed,integrand";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub d: usize,
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u64,
    pub rmse: f64,
    pub stderr: f64,
    pub replications: usize,
}

/// Least-squares fit of `ln rmse = intercept + slope ln N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// NaN when undefined.
    pub slope: f64,
    pub intercept: f64,
    pub fit_m: Vec<u32>,
    /// `false` when some RMSE in the fit range is zero or not finite, or
    /// fewer than two rows are available.
    pub defined: bool,
}

/// Fits on the largest `ceil(k / 2)` values of `m` among `rows`.
pub fn fit_slope(rows: &[ConvergenceRow]) -> SlopeFit {
    let keep = rows.len().div_ceil(2);
    let used = &rows[rows.len() - keep..];
    let fit_m: Vec<u32> = used.iter().map(|r| r.m).collect();
    let undefined = SlopeFit {
        slope: f64::NAN,
        intercept: f64::NAN,
        fit_m: fit_m.clone(),
        defined: false,
    };
    if used.len() < 2 || used.iter().any(|r| !(r.rmse > 0.0 && r.rmse.is_finite())) {
        return undefined;
    }
    let xs: Vec<f64> = used.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.rmse.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return undefined;
    }
    let slope = sxy / sxx;
    SlopeFit {
        slope,
        intercept: my - slope * mx,
        fit_m,
        defined: true,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub integrand: String,
    pub scramble: Method,
    pub seed: u64,
    pub b: u32,
    /// Sorted by `N`.
    pub rows: Vec<ConvergenceRow>,
    pub fit: SlopeFit,
}

impl ConvergenceTable {
    pub fn new(integrand: &str, scramble: Method, seed: u64, b: u32, mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by_key(|r| r.n);
        let fit = fit_slope(&rows);
        Self {
            integrand: integrand.to_string(),
            scramble,
            seed,
            b,
            rows,
            fit,
        }
    }

    pub fn slope(&self) -> f64 {
        self.fit.slope
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:e},{:e},{},{},{},{}",
                r.d, r.m, r.n, r.rmse, r.stderr, r.replications, self.scramble, self.seed, self.integrand
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scramble::ScrambleKind;

    fn row(m: u32, rmse: f64) -> ConvergenceRow {
        ConvergenceRow {
            d: 1,
            m,
            n: 1 << m,
            rmse,
            stderr: 0.0,
            replications: 10,
        }
    }

    #[test]
    fn exact_power_law_slope() {
        let rows: Vec<_> = (2..=9).map(|m| row(m, 3.0 * ((1u64 << m) as f64).powf(-1.5))).collect();
        let fit = fit_slope(&rows);
        assert!(fit.defined);
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert_eq!(fit.fit_m, vec![6, 7, 8, 9]);
    }

    #[test]
    fn zero_rmse_is_undefined() {
        let fit = fit_slope(&[row(2, 0.0), row(3, 0.0)]);
        assert!(!fit.defined);
        assert!(fit.slope.is_nan());
    }

    #[test]
    fn csv_header_and_row() {
        let t = ConvergenceTable::new("linear", Method::Qmc(ScrambleKind::Owen), 7, 2, vec![row(3, 0.25), row(2, 0.5)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "1,2,4,5e-1,0e0,10,owen,7,linear");
        assert_eq!(lines.len(), 3);
    }
}
