//! Primal-dual interior-point solver.
//!
//! Infeasible path following on the pair
//!
//! ```text
//! primal:  min <C, X>   s.t. <A_j, X> = b_j,             X PSD
//! dual:    max b^T y    s.t. sum_j y_j A_j + Z = C,      Z PSD
//! ```
//!
//! with the HKM search direction and a Mehrotra predictor-corrector step.
//! Iteration stops once both residuals and the gap `<X, Z>` are below the
//! tolerance. When rounding stalls progress first, the run still counts as
//! converged if the gap is within tolerance relative to `1 + |<C, X>|`.
//! Each iteration needs one Schur complement of size `n + 1` (cheap, the
//! constraint matrices are sparse) and a handful of dense `n x n` products.

use nalgebra::{DMatrix, DVector};

use super::constraints::{lifted_constraints, Functional};
use super::linalg::{min_eigenvalue, symmetrize};
use super::solver::{SdpConfig, SdpSolution};
use crate::{Error, Result};

/// Iterations rarely exceed a few dozen; beyond this the method has stalled.
const MAX_ITER: usize = 200;
/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.95;
const MIN_STEP: f64 = 1e-10;

fn apply_all(cons: &[Functional], x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(cons.len(), cons.iter().map(|c| c.apply(x)))
}

/// `sum_j y_j A_j`.
fn adjoint(cons: &[Functional], y: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for (c, &yj) in cons.iter().zip(y.iter()) {
        c.add_scaled(&mut out, yj);
    }
    out
}

/// `M_ij = tr(A_i X A_j W)`.
fn schur_complement(cons: &[Functional], x: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let m = cons.len();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut v = 0.0;
            for &(r1, c1, w1) in &cons[i].entries {
                for &(r2, c2, w2) in &cons[j].entries {
                    v += w1 * w2 * x[(c1, r2)] * w[(c2, r1)];
                }
            }
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Largest `a` with `x + a d` PSD, for positive definite `x`.
fn max_step(x: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<f64> {
    let chol = x
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("iterate lost positive definiteness".into()))?;
    let l = chol.l();
    let half = l
        .solve_lower_triangular(d)
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let scaled = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let lambda = min_eigenvalue(&symmetrize(scaled))?;
    Ok(if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    })
}

/// Cholesky of the Schur complement, or LU once rounding has cost it
/// definiteness near the optimum.
enum SchurSolver {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurSolver {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        match m.clone().cholesky() {
            Some(ch) => Some(SchurSolver::Cholesky(ch)),
            None => {
                let lu = m.lu();
                lu.is_invertible().then_some(SchurSolver::Lu(lu))
            }
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurSolver::Cholesky(ch) => ch.solve(rhs),
            SchurSolver::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

struct Direction {
    dy: DVector<f64>,
    dx: DMatrix<f64>,
    dz: DMatrix<f64>,
}

pub(crate) fn solve(c: &DMatrix<f64>, k: usize, cfg: &SdpConfig) -> Result<SdpSolution> {
    let n = c.nrows();
    let nf = n as f64;
    let cons = lifted_constraints(n, k);
    let m = cons.len();
    let b = DVector::from_iterator(m, cons.iter().map(|f| f.rhs));

    let floor = 10f64.max(nf.sqrt());
    let xi = cons
        .iter()
        .map(|f| nf * (1.0 + f.rhs.abs()) / (1.0 + f.norm()))
        .fold(floor, f64::max);
    let eta = cons
        .iter()
        .map(Functional::norm)
        .fold(floor.max(c.norm()), f64::max);
    let mut x = DMatrix::<f64>::identity(n, n) * xi;
    let mut z = DMatrix::<f64>::identity(n, n) * eta;
    let mut y = DVector::<f64>::zeros(m);

    let max_iter = cfg.max_iter.min(MAX_ITER);
    let mut primal;
    let mut dual;
    let mut gap;
    let mut iter = 0;
    loop {
        let r_p = &b - apply_all(&cons, &x);
        let r_d = c - &z - adjoint(&cons, &y, n);
        primal = r_p.norm();
        dual = r_d.norm();
        gap = x.dot(&z);
        log::debug!("ipm iter {iter}: primal {primal:.3e} dual {dual:.3e} gap {gap:.3e}");
        if primal < cfg.tol && dual < cfg.tol && gap < cfg.tol {
            return Ok(SdpSolution::new(c, x, primal, dual, Some(gap), iter, true));
        }
        if iter == max_iter {
            break;
        }
        iter += 1;

        let Some(z_inv) = z.clone().cholesky().map(|ch| symmetrize(ch.inverse())) else {
            log::debug!("ipm: dual slack lost definiteness");
            break;
        };
        let Some(schur) = SchurSolver::new(schur_complement(&cons, &x, &z_inv)) else {
            log::debug!("ipm: singular Schur complement");
            break;
        };
        // M dy = r_p - A(G) + A(X R_d W), then dZ = R_d - A*(dy) and
        // dX = sym(G - X dZ W), for a complementarity target G
        let base = &r_p + apply_all(&cons, &(&x * &r_d * &z_inv));
        let direction = |g: &DMatrix<f64>| {
            let dy = schur.solve(&(&base - apply_all(&cons, g)));
            let dz = &r_d - adjoint(&cons, &dy, n);
            let dx = symmetrize(g - &x * &dz * &z_inv);
            Direction { dy, dx, dz }
        };

        let mu = gap / nf;
        let affine = direction(&(-&x));
        let ap = max_step(&x, &affine.dx)?.min(1.0);
        let ad = max_step(&z, &affine.dz)?.min(1.0);
        let mu_aff = (&x + &affine.dx * ap).dot(&(&z + &affine.dz * ad)) / nf;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let target = &z_inv * (sigma * mu) - &x - &affine.dx * &affine.dz * &z_inv;
        let step = direction(&target);
        let ap = (STEP_FRACTION * max_step(&x, &step.dx)?).min(1.0);
        let ad = (STEP_FRACTION * max_step(&z, &step.dz)?).min(1.0);
        if !(ap.max(ad) > MIN_STEP) {
            log::debug!("ipm: step lengths {ap:e} {ad:e}");
            break;
        }
        x = symmetrize(x + &step.dx * ap);
        z = symmetrize(z + &step.dz * ad);
        y += &step.dy * ad;
    }
    // stalled or capped: accept a gap that is small relative to the objective
    let objective = c.dot(&x).abs();
    let converged = primal < cfg.tol && dual < cfg.tol && gap < cfg.tol * (1.0 + objective);
    Ok(SdpSolution::new(
        c,
        x,
        primal,
        dual,
        Some(gap),
        iter,
        converged,
    ))
}
