//! Flooding sum-product decoder.
//!
//! Channel LLRs follow the `ln(P[c=1]/P[c=0])` convention used for
//! [`compute_llrs`](super::compute_llrs). Internally messages are kept as
//! `ln(P[0]/P[1])` so the check update is the usual tanh rule.

use super::LdpcCode;
use crate::{Error, Result};

/// Largest magnitude of a tanh product fed to `atanh`.
const TANH_CLAMP: f64 = 1.0 - 1e-15;

/// `tanh(m / 2)` through a single `exp`.
#[inline]
fn half_tanh(m: f64) -> f64 {
    let e = (-m.abs()).exp();
    ((1.0 - e) / (1.0 + e)).copysign(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutcome {
    pub bits: Vec<u8>,
    /// All checks satisfied with no undecided (zero-posterior) bit.
    pub converged: bool,
    pub iterations: usize,
}

pub fn bp_decode(code: &LdpcCode, llrs: &[f64], max_iter: usize) -> Result<BpOutcome> {
    let n = code.n();
    if llrs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: llrs.len(),
        });
    }
    let checks = code.checks();
    let mut offsets = Vec::with_capacity(checks.len() + 1);
    offsets.push(0);
    for vars in checks {
        offsets.push(offsets.last().unwrap() + vars.len());
    }
    let edge_var: Vec<usize> = checks.iter().flatten().copied().collect();
    let mut var_edges = vec![Vec::new(); n];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[v].push(e);
    }

    let prior: Vec<f64> = llrs.iter().map(|l| -l).collect();
    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| prior[v]).collect();
    let mut c2v = vec![0.0; edge_var.len()];
    let mut posterior = prior.clone();
    let mut bits = vec![0u8; n];
    let mut tanhs = Vec::new();

    for iter in 1..=max_iter {
        for c in 0..checks.len() {
            let edges = offsets[c]..offsets[c + 1];
            tanhs.clear();
            tanhs.extend(v2c[edges.clone()].iter().map(|&m| half_tanh(m)));
            // leave-one-out products via prefix/suffix sweeps
            let mut prefix = 1.0;
            for (i, e) in edges.clone().enumerate() {
                c2v[e] = prefix;
                prefix *= tanhs[i];
            }
            let mut suffix = 1.0;
            for (i, e) in edges.clone().enumerate().rev() {
                let p = (c2v[e] * suffix).clamp(-TANH_CLAMP, TANH_CLAMP);
                c2v[e] = ((1.0 + p) / (1.0 - p)).ln();
                suffix *= tanhs[i];
            }
        }

        for v in 0..n {
            let total = prior[v] + var_edges[v].iter().map(|&e| c2v[e]).sum::<f64>();
            posterior[v] = total;
            for &e in &var_edges[v] {
                v2c[e] = total - c2v[e];
            }
            bits[v] = u8::from(total < 0.0);
        }

        if posterior.iter().all(|&p| p != 0.0) && code.syndrome_weight(&bits) == 0 {
            return Ok(BpOutcome {
                bits,
                converged: true,
                iterations: iter,
            });
        }
    }
    Ok(BpOutcome {
        bits,
        converged: false,
        iterations: max_iter,
    })
}
