use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type DerivFn = dyn Fn(&[u32], &[f64]) -> f64 + Send + Sync;

/// A function on `[0, 1]^s`, optionally with its exact integral and an
/// evaluator for mixed partial derivatives.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    dimension: usize,
    eval: Arc<EvalFn>,
    exact: Option<f64>,
    derivative: Option<Arc<DerivFn>>,
}

impl Integrand {
    pub fn new(name: impl Into<String>, dimension: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            dimension,
            eval: Arc::new(f),
            exact: None,
            derivative: None,
        }
    }

    pub fn with_exact(mut self, value: f64) -> Self {
        self.exact = Some(value);
        self
    }

    /// `df(orders, x)` must return `∂^{orders[0]}_{x_1} ... ∂^{orders[s-1]}_{x_s} f(x)`.
    pub fn with_derivative(mut self, df: impl Fn(&[u32], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn exact_integral(&self) -> Option<f64> {
        self.exact
    }

    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn derivative(&self, orders: &[u32], x: &[f64]) -> Result<f64> {
        let df = self
            .derivative
            .as_ref()
            .ok_or_else(|| Error::MissingDerivative(self.name.clone()))?;
        if orders.len() != self.dimension || x.len() != self.dimension {
            return Err(Error::LengthMismatch {
                expected: self.dimension,
                actual: orders.len().min(x.len()),
            });
        }
        Ok(df(orders, x))
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("exact", &self.exact)
            .field("derivative", &self.derivative.is_some())
            .finish()
    }
}

/// Names accepted by [`builtin_integrand`].
pub const BUILTIN_INTEGRANDS: &[&str] = &["example1", "example2", "const", "linear", "product_peak"];

const PEAK_WIDTH: f64 = 5.0;
const PEAK_CENTER: f64 = 0.5;

/// Looks up a built-in integrand. `const:c` gives the constant `c`; plain
/// `const` is the constant 1.
pub fn builtin_integrand(name: &str) -> Result<Integrand> {
    if let Some(c) = name.strip_prefix("const:") {
        let c: f64 = c
            .parse()
            .map_err(|_| Error::UnknownIntegrand(name.to_string()))?;
        return Ok(constant(name, c));
    }
    Ok(match name {
        "example1" => Integrand::new(name, 1, |x| x[0] * x[0].exp())
            .with_exact(1.0)
            .with_derivative(|a, x| (x[0] + a[0] as f64) * x[0].exp()),
        "example2" => {
            let scale = std::f64::consts::E - 2.0;
            Integrand::new(name, 2, move |x| x[1] * (x[0] * x[1]).exp() / scale)
                .with_exact(1.0)
                .with_derivative(move |a, x| example2_derivative(a[0], a[1], x[0], x[1]) / scale)
        }
        "const" => constant(name, 1.0),
        "linear" => Integrand::new(name, 1, |x| x[0])
            .with_exact(0.5)
            .with_derivative(|a, x| match a[0] {
                0 => x[0],
                1 => 1.0,
                _ => 0.0,
            }),
        "product_peak" => {
            let (a, u) = (PEAK_WIDTH, PEAK_CENTER);
            let one_dim = a * ((a * (1.0 - u)).atan() + (a * u).atan());
            Integrand::new(name, 2, move |x| {
                x.iter().map(|&xi| 1.0 / (a.powi(-2) + (xi - u).powi(2))).product()
            })
            .with_exact(one_dim * one_dim)
        }
        _ => return Err(Error::UnknownIntegrand(name.to_string())),
    })
}

fn constant(name: &str, c: f64) -> Integrand {
    Integrand::new(name, 1, move |_| c)
        .with_exact(c)
        .with_derivative(move |a, _| if a.iter().all(|&o| o == 0) { c } else { 0.0 })
}

/// `∂_x^p ∂_y^q (y e^{xy})`. Differentiating in `x` first gives `y^{p+1} e^{xy}`;
/// Leibniz in `y` then gives `Σ_j C(q, j) (p+1)!/(p+1-j)! y^{p+1-j} x^{q-j} e^{xy}`.
fn example2_derivative(p: u32, q: u32, x: f64, y: f64) -> f64 {
    let e = (x * y).exp();
    let mut total = 0.0;
    let mut binom = 1.0;
    let mut falling = 1.0;
    for j in 0..=q.min(p + 1) {
        if j > 0 {
            binom *= (q - j + 1) as f64 / j as f64;
            falling *= (p + 2 - j) as f64;
        }
        total += binom * falling * y.powi((p + 1 - j) as i32) * x.powi((q - j) as i32);
    }
    total * e
}
