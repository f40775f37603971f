//! Operator-splitting solver.
//!
//! The problem is split as `min tr(B X) + [X affine-feasible] + [Z PSD]` with
//! consensus `X = Z`. Each iteration projects onto the affine set in closed
//! form, projects onto the PSD cone by clipping negative eigenvalues, and
//! updates the scaled dual `U`. The map `(Z, U) -> (Z+, U+)` is a fixed-point
//! iteration, extrapolated with Anderson acceleration; an extrapolated point
//! whose residual grows is discarded in favour of the plain step. `rho` is
//! rebalanced from the residual ratio every few iterations.

use nalgebra::{DMatrix, DVector};

use super::anderson::Anderson;
use super::constraints::{lifted_constraints, Functional};
use super::linalg::project_psd;
use super::solver::{SdpConfig, SdpSolution};
use crate::{Error, Result};

const ADAPT_EVERY: usize = 10;
const ADAPT_RATIO: f64 = 10.0;

/// Euclidean projection onto `{X symmetric : <A_j, X> = b_j for all j}`.
pub(crate) struct AffineProjector {
    constraints: Vec<Functional>,
    gram_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl AffineProjector {
    pub(crate) fn new(n: usize, k: usize) -> Result<Self> {
        let constraints = lifted_constraints(n, k);
        let count = constraints.len();
        let mut scratch = DMatrix::<f64>::zeros(n, n);
        let mut gram = DMatrix::<f64>::zeros(count, count);
        for (j, cj) in constraints.iter().enumerate() {
            cj.add_scaled(&mut scratch, 1.0);
            for (i, ci) in constraints.iter().enumerate() {
                gram[(i, j)] = ci.apply(&scratch);
            }
            cj.add_scaled(&mut scratch, -1.0);
        }
        let gram_chol = gram.cholesky().ok_or_else(|| {
            Error::InvalidParameter("affine constraints are linearly dependent".into())
        })?;
        Ok(Self {
            constraints,
            gram_chol,
        })
    }

    pub(crate) fn project(&self, x: &mut DMatrix<f64>) {
        let residual = DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|c| c.apply(x) - c.rhs),
        );
        let lambda = self.gram_chol.solve(&residual);
        for (c, &l) in self.constraints.iter().zip(lambda.iter()) {
            c.add_scaled(x, -l);
        }
    }

    #[cfg(test)]
    pub(crate) fn constraints(&self) -> &[Functional] {
        &self.constraints
    }
}

pub(crate) fn solve(b_mat: &DMatrix<f64>, k: usize, cfg: &SdpConfig) -> Result<SdpSolution> {
    let n = b_mat.nrows();
    let affine = AffineProjector::new(n, k)?;
    let mut rho = cfg.rho;
    let alpha = cfg.relaxation;
    let nn = n * n;
    let mut accel = Anderson::new(cfg.anderson_memory);

    // start from the lift of the fractional point b = K/M, with zero dual
    let frac = k as f64 / (n - 1) as f64;
    let mut start = DVector::from_element(n, frac);
    start[n - 1] = 1.0;
    let mut w = vec![0.0; 2 * nn];
    w[..nn].copy_from_slice((&start * start.transpose()).as_slice());

    // plain step and its residual norm, kept while an extrapolated point is on trial
    let mut fallback: Option<(Vec<f64>, f64)> = None;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut z_out = DMatrix::<f64>::zeros(n, n);

    for iter in 1..=cfg.max_iter {
        let z = DMatrix::from_column_slice(n, n, &w[..nn]);
        let u = DMatrix::from_column_slice(n, n, &w[nn..]);
        let mut x = &z - &u - b_mat / rho;
        affine.project(&mut x);
        let x_relaxed = &x * alpha + &z * (1.0 - alpha);
        let z_next = project_psd(&(&x_relaxed + &u))?;
        let u_next = &u + &x_relaxed - &z_next;

        primal = (&x - &z_next).norm();
        dual = rho * (&z_next - &z).norm();
        if primal < cfg.tol && dual < cfg.tol {
            return Ok(SdpSolution::new(
                b_mat, z_next, primal, dual, None, iter, true,
            ));
        }
        if iter % 100 == 0 {
            log::debug!("admm iter {iter}: primal {primal:.3e} dual {dual:.3e} rho {rho:.3e}");
        }

        let mut t = Vec::with_capacity(2 * nn);
        t.extend_from_slice(z_next.as_slice());
        t.extend_from_slice(u_next.as_slice());
        z_out = z_next;
        let f_norm = t
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if let Some((plain, plain_norm)) = fallback.take() {
            if f_norm > plain_norm {
                w = plain;
                accel.reset();
                continue;
            }
        }

        if iter % ADAPT_EVERY == 0 {
            let factor = if primal > ADAPT_RATIO * dual {
                2.0
            } else if dual > ADAPT_RATIO * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                // U is scaled by 1/rho
                rho *= factor;
                t[nn..].iter_mut().for_each(|v| *v /= factor);
                accel.reset();
                w = t;
                continue;
            }
        }

        if cfg.anderson_memory == 0 {
            w = t;
        } else {
            let next = accel.step(&w, t.clone());
            fallback = Some((t, f_norm));
            w = next;
        }
    }
    Ok(SdpSolution::new(
        b_mat,
        z_out,
        primal,
        dual,
        None,
        cfg.max_iter,
        false,
    ))
}
