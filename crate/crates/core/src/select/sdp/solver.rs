//! The lifted cutoff-rate relaxation
//!
//! ```text
//! minimize    tr(B S)
//! subject to  S >= 0 (PSD),  S_nn = 1,  S_ii = S_in (i < n),  sum_i S_ni = K + 1
//! ```
//!
//! and its two solvers: a primal-dual interior-point method (default) and an
//! accelerated operator-splitting method.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::{admm, constraints, ipm};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdpMethod {
    #[default]
    InteriorPoint,
    Admm,
}

impl fmt::Display for SdpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SdpMethod::InteriorPoint => "ipm",
            SdpMethod::Admm => "admm",
        })
    }
}

impl FromStr for SdpMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipm" => Ok(SdpMethod::InteriorPoint),
            "admm" => Ok(SdpMethod::Admm),
            other => Err(Error::InvalidParameter(format!(
                "unknown SDP solver {other:?} (expected ipm or admm)"
            ))),
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpConfig {
    /// Stop once the primal and dual residuals (and, for the interior-point
    /// method, the duality gap `<X, Z>`) fall below this.
    pub tol: f64,
    pub max_iter: usize,
    pub method: SdpMethod,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// ADMM over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Number of past ADMM steps used for Anderson extrapolation; 0 disables it.
    pub anderson_memory: usize,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 5000,
            method: SdpMethod::InteriorPoint,
            rho: 1.0,
            relaxation: 1.0,
            anderson_memory: 10,
        }
    }
}

/// Relaxed solution `S` and solver diagnostics.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// `(M+1) x (M+1)` PSD matrix; the last row/column is the slack entry.
    pub s_hat: DMatrix<f64>,
    /// `tr(B S)`.
    pub objective: f64,
    /// Interior point: `||b - A(X)||`. ADMM: `||X - Z||_F` between the affine
    /// and PSD iterates.
    pub primal_residual: f64,
    /// Interior point: `||C - Z - A*(y)||_F`. ADMM: `rho ||Z_k - Z_{k-1}||_F`.
    pub dual_residual: f64,
    /// `<X, Z>` for the interior-point method.
    pub duality_gap: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    pub(crate) fn new(
        b_mat: &DMatrix<f64>,
        s_hat: DMatrix<f64>,
        primal_residual: f64,
        dual_residual: f64,
        duality_gap: Option<f64>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let objective = b_mat.component_mul(&s_hat).sum();
        Self {
            s_hat,
            objective,
            primal_residual,
            dual_residual,
            duality_gap,
            iterations,
            converged,
        }
    }

    /// Largest violation of the affine constraints by `s_hat`.
    pub fn constraint_violation(&self, k: usize) -> f64 {
        constraints::max_violation(&self.s_hat, k)
    }
}

/// Solves the relaxation for embedded cost `b_mat` and subset size `k`.
///
/// When the iteration cap is hit (or the interior-point method stalls) the
/// last iterate is returned with `converged == false` and its residuals.
pub fn solve_sdp(b_mat: &DMatrix<f64>, k: usize, cfg: &SdpConfig) -> Result<SdpSolution> {
    let n = b_mat.nrows();
    if n < 3 || b_mat.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "cost matrix must be square with at least 3 rows, got {}x{}",
            n,
            b_mat.ncols()
        )));
    }
    if k < 1 || k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "subset size {k} must lie in 1..={}",
            n - 1
        )));
    }
    if !(cfg.tol > 0.0) || !(cfg.rho > 0.0) || !(0.0 < cfg.relaxation && cfg.relaxation < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "bad solver settings {cfg:?}"
        )));
    }
    match cfg.method {
        SdpMethod::InteriorPoint => ipm::solve(b_mat, k, cfg),
        SdpMethod::Admm => admm::solve(b_mat, k, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::testing::random_channel;
    use crate::select::sdp::linalg::min_eigenvalue;
    use crate::select::sdp::{build_gram, embed};
    use approx::assert_abs_diff_eq;

    fn admm() -> SdpConfig {
        SdpConfig {
            method: SdpMethod::Admm,
            ..SdpConfig::default()
        }
    }

    #[test]
    fn orthogonal_rows_relaxation() {
        // A = I: every K-subset costs K, and tr(AX) = sum_i S_ii = K on the
        // feasible set, so the relaxation value is exactly K
        let m = 5;
        let mut b = DMatrix::<f64>::zeros(m + 1, m + 1);
        for i in 0..m {
            b[(i, i)] = 1.0;
        }
        for cfg in [SdpConfig::default(), admm()] {
            let sol = solve_sdp(&b, 2, &cfg).unwrap();
            assert!(sol.converged, "{}", cfg.method);
            assert_abs_diff_eq!(sol.objective, 2.0, epsilon = 1e-5);
            assert!(sol.constraint_violation(2) < 1e-6);
        }
    }

    #[test]
    fn solvers_agree() {
        for seed in 0..4 {
            let ch = random_channel(12, 6, seed);
            let b = embed(&build_gram(&ch));
            let tight = |method| SdpConfig {
                tol: 1e-9,
                max_iter: 20_000,
                method,
                ..SdpConfig::default()
            };
            let ipm = solve_sdp(&b, 4, &tight(SdpMethod::InteriorPoint)).unwrap();
            let adm = solve_sdp(&b, 4, &tight(SdpMethod::Admm)).unwrap();
            assert!(ipm.converged && adm.converged);
            assert_abs_diff_eq!(ipm.objective, adm.objective, epsilon = 1e-6);
            for sol in [&ipm, &adm] {
                assert!(sol.constraint_violation(4) < 1e-6);
                assert!(min_eigenvalue(&sol.s_hat).unwrap() > -1e-7);
            }
        }
    }

    #[test]
    fn reports_non_convergence() {
        let b = DMatrix::from_fn(5, 5, |i, j| {
            if i < 4 && j < 4 {
                1.0 / (1.0 + (i as f64 - j as f64).abs())
            } else {
                0.0
            }
        });
        for method in [SdpMethod::InteriorPoint, SdpMethod::Admm] {
            let cfg = SdpConfig {
                max_iter: 3,
                method,
                ..SdpConfig::default()
            };
            let sol = solve_sdp(&b, 2, &cfg).unwrap();
            assert!(!sol.converged);
            assert_eq!(sol.iterations, 3);
            assert!(sol.primal_residual.is_finite());
        }
    }

    #[test]
    fn rejects_bad_input() {
        let b = DMatrix::<f64>::zeros(4, 4);
        assert!(solve_sdp(&b, 0, &SdpConfig::default()).is_err());
        assert!(solve_sdp(&b, 4, &SdpConfig::default()).is_err());
        let bad = SdpConfig {
            tol: 0.0,
            ..SdpConfig::default()
        };
        assert!(solve_sdp(&b, 2, &bad).is_err());
        assert_eq!("admm".parse::<SdpMethod>().unwrap(), SdpMethod::Admm);
        assert!("sedumi".parse::<SdpMethod>().is_err());
    }
}
