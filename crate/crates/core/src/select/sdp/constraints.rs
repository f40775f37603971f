//! The affine constraints of the lifted problem as linear functionals.
//!
//! With `l = n - 1` the slack index:
//!
//! ```text
//! S_ll = 1
//! S_ii - S_il = 0                 (i < l)
//! S_ll + sum_{i<l} S_li = K + 1
//! ```
//!
//! Off-diagonal coefficients are split evenly over `(i, l)` and `(l, i)` so
//! each functional is `<A_j, S>` with a symmetric `A_j`.

use nalgebra::DMatrix;

/// `<A, X>` for a symmetric `A` stored as its non-zero entries.
pub(crate) struct Functional {
    pub(crate) entries: Vec<(usize, usize, f64)>,
    pub(crate) rhs: f64,
}

impl Functional {
    pub(crate) fn apply(&self, x: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(r, c, w)| w * x[(r, c)]).sum()
    }

    /// `x += scale * A`.
    pub(crate) fn add_scaled(&self, x: &mut DMatrix<f64>, scale: f64) {
        for &(r, c, w) in &self.entries {
            x[(r, c)] += scale * w;
        }
    }

    pub(crate) fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }
}

/// The `n + 1` constraints for an `n x n` lifted variable and subset size `k`.
pub(crate) fn lifted_constraints(n: usize, k: usize) -> Vec<Functional> {
    let last = n - 1;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Functional {
        entries: vec![(last, last, 1.0)],
        rhs: 1.0,
    });
    for i in 0..last {
        out.push(Functional {
            entries: vec![(i, i, 1.0), (i, last, -0.5), (last, i, -0.5)],
            rhs: 0.0,
        });
    }
    let mut sum = vec![(last, last, 1.0)];
    for i in 0..last {
        sum.push((i, last, 0.5));
        sum.push((last, i, 0.5));
    }
    out.push(Functional {
        entries: sum,
        rhs: k as f64 + 1.0,
    });
    out
}

/// Largest violation of the constraints by `s`.
pub(crate) fn max_violation(s: &DMatrix<f64>, k: usize) -> f64 {
    lifted_constraints(s.nrows(), k)
        .iter()
        .map(|c| (c.apply(s) - c.rhs).abs())
        .fold(0.0, f64::max)
}
