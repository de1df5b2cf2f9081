use serde::Serialize;

use super::unit_rule;
use crate::error::{Error, Result};
use crate::estimator::Integrand;

/// Mixed difference `Δ_α(x; z) f`: `z[i]` lists the steps `z_{i,1..α_i}` for
/// coordinate `i`, and each coordinate is differenced by the recursion
/// `Δ_α(x) = Δ_{α-1}(x + z_α) - Δ_{α-1}(x)`. Expanded, the term for the
/// step subsets `v_i` carries the sign `(-1)^{Σ (α_i - |v_i|)}`.
pub fn finite_difference(f: &Integrand, x: &[f64], z: &[Vec<f64>]) -> Result<f64> {
    let s = f.dimension();
    if x.len() != s || z.len() != s {
        return Err(Error::LengthMismatch {
            expected: s,
            actual: if x.len() != s { x.len() } else { z.len() },
        });
    }
    let total: usize = z.iter().map(Vec::len).sum();
    if total > 24 {
        return Err(Error::TooLarge {
            what: "finite difference stencil",
            work: 1 << total,
            limit: 1 << 24,
        });
    }
    let mut point = vec![0.0; s];
    let mut sum = 0.0;
    for mask in 0u64..1 << total {
        let mut bit = 0;
        let mut left_out = 0;
        for i in 0..s {
            point[i] = x[i];
            for &step in &z[i] {
                if mask >> bit & 1 == 1 {
                    point[i] += step;
                } else {
                    left_out += 1;
                }
                bit += 1;
            }
            if !(0.0..=1.0).contains(&point[i]) {
                return Err(Error::Domain(point[i]));
            }
        }
        let v = f.evaluate(&point);
        sum += if left_out % 2 == 0 { v } else { -v };
    }
    Ok(sum)
}

/// One term of the smooth-case variation: the squared `L_2` norm over
/// `x_u` of the partial derivative of order `orders` integrated over the
/// remaining coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationTerm {
    pub subset: Vec<usize>,
    pub orders: Vec<u32>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationSpec {
    pub alpha: u32,
    pub nodes: usize,
    pub terms: Vec<VariationTerm>,
    pub value: f64,
}

/// `V_α(f)` for smooth `f`: the square root of
/// `Σ_u Σ_{α_u ∈ {1..α}^{|u|}} ∫ |∫ ∂^{α_u} f dx_{-u}|² dx_u`, with every
/// integral on a tensor Gauss–Legendre grid of `nodes` points per axis.
pub fn variation_smooth(f: &Integrand, alpha: u32, nodes: usize) -> Result<VariationSpec> {
    let s = f.dimension();
    if nodes == 0 || (nodes as f64).powi(s as i32) > 1e7 {
        return Err(Error::InvalidConfig(format!(
            "{nodes} quadrature nodes per axis in dimension {s}"
        )));
    }
    if !f.has_derivative() {
        return Err(Error::MissingDerivative(f.name().to_string()));
    }
    let rule = unit_rule(nodes);
    let mut terms = Vec::new();
    for mask in 0u32..1 << s {
        let subset: Vec<usize> = (0..s).filter(|&i| mask >> i & 1 == 1).collect();
        let rest: Vec<usize> = (0..s).filter(|&i| mask >> i & 1 == 0).collect();
        for_each_order(subset.len(), alpha, |sub_orders| {
            let mut orders = vec![0u32; s];
            for (&i, &a) in subset.iter().zip(sub_orders) {
                orders[i] = a;
            }
            let mut x = vec![0.0; s];
            let mut outer = 0.0;
            let mut ok = Ok(());
            tensor(&rule, subset.len(), |u_nodes, u_weight| {
                for (&i, &xi) in subset.iter().zip(u_nodes) {
                    x[i] = xi;
                }
                let mut inner = 0.0;
                tensor(&rule, rest.len(), |r_nodes, r_weight| {
                    for (&i, &xi) in rest.iter().zip(r_nodes) {
                        x[i] = xi;
                    }
                    match f.derivative(&orders, &x) {
                        Ok(v) => inner += r_weight * v,
                        Err(e) => ok = Err(e),
                    }
                });
                outer += u_weight * inner * inner;
            });
            ok?;
            terms.push(VariationTerm {
                subset: subset.clone(),
                orders,
                value: outer,
            });
            Ok(())
        })?;
    }
    let value = terms.iter().map(|t| t.value).sum::<f64>().sqrt();
    Ok(VariationSpec {
        alpha,
        nodes,
        terms,
        value,
    })
}

/// Visits every vector in `{1..=alpha}^len`.
fn for_each_order(len: usize, alpha: u32, mut visit: impl FnMut(&[u32]) -> Result<()>) -> Result<()> {
    if alpha == 0 && len > 0 {
        return Ok(());
    }
    let mut cur = vec![1u32; len];
    loop {
        visit(&cur)?;
        let mut i = 0;
        while i < len && cur[i] == alpha {
            cur[i] = 1;
            i += 1;
        }
        if i == len {
            return Ok(());
        }
        cur[i] += 1;
    }
}

/// Visits every node of the `dim`-fold tensor product of `rule`.
fn tensor(rule: &[(f64, f64)], dim: usize, mut visit: impl FnMut(&[f64], f64)) {
    let mut idx = vec![0usize; dim];
    let mut nodes = vec![0.0; dim];
    loop {
        let mut w = 1.0;
        for (k, &j) in idx.iter().enumerate() {
            nodes[k] = rule[j].0;
            w *= rule[j].1;
        }
        visit(&nodes, w);
        let mut k = 0;
        while k < dim && idx[k] + 1 == rule.len() {
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            return;
        }
        idx[k] += 1;
    }
}
