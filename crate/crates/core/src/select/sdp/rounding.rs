use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{symmetric_eigen, symmetrize};
use super::solver::SdpSolution;
use crate::dmc::SubsetMask;
use crate::{Error, Result};

/// Most negative eigenvalue [`psd_factorize`] tolerates before rejecting.
pub const FACTOR_EIG_FLOOR: f64 = -1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingMethod {
    /// Project random directions through the factor of `S`.
    Randomized,
    /// Quantize the dominant eigenvector of `S` once.
    Eigen,
}

impl std::str::FromStr for RoundingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "randomized" => Ok(Self::Randomized),
            "eigen" => Ok(Self::Eigen),
            other => Err(Error::InvalidParameter(format!(
                "unknown rounding method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingConfig {
    pub n_rand: usize,
    pub seed: u64,
    pub method: RoundingMethod,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            n_rand: 100,
            seed: 0,
            method: RoundingMethod::Randomized,
        }
    }
}

impl RoundingConfig {
    fn validate(&self) -> Result<()> {
        if self.n_rand == 0 || self.n_rand > 1_000_000 {
            return Err(Error::InvalidParameter(format!(
                "n_rand must lie in 1..=1000000, got {}",
                self.n_rand
            )));
        }
        Ok(())
    }
}

/// Rounded subset and the trace of the search.
#[derive(Debug, Clone)]
pub struct Rounding {
    pub mask: SubsetMask,
    /// `b^T A b` of the returned mask.
    pub objective: f64,
    /// Best objective seen after each draw.
    pub best_so_far: Vec<f64>,
}

/// Factor `V = diag(sqrt(max(lambda, 0))) Q^T` with `V^T V = S`.
pub fn psd_factorize(sol: &SdpSolution) -> Result<DMatrix<f64>> {
    factorize(&sol.s_hat)
}

pub(crate) fn factorize(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = symmetric_eigen(&symmetrize(s.clone()))?;
    let min = vals[0];
    if min < FACTOR_EIG_FLOOR {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let roots = DVector::from_iterator(vals.len(), vals.iter().map(|v| v.max(0.0).sqrt()));
    Ok(DMatrix::from_diagonal(&roots) * vecs.transpose())
}

/// Sets the `k` largest of the first `M = len - 1` entries to one, after
/// flipping the vector so its last (slack) entry is non-negative. Equal
/// values go to the smaller index.
pub fn quantize_top_k(s: &[f64], k: usize) -> Result<SubsetMask> {
    let m = s.len() - 1;
    let sign = if s[m] < 0.0 { -1.0 } else { 1.0 };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| (sign * s[b]).total_cmp(&(sign * s[a])).then(a.cmp(&b)));
    SubsetMask::from_indices(m, &order[..k])
}

/// `b^T A b` for the selected indices, read from the embedded matrix.
pub(crate) fn quadratic_cost(b_mat: &DMatrix<f64>, selected: &[usize]) -> f64 {
    selected
        .iter()
        .map(|&i| selected.iter().map(|&j| b_mat[(i, j)]).sum::<f64>())
        .sum()
}

/// Turns the factor `v` of the relaxed solution into a `k`-subset.
///
/// Randomized: each draw `i` takes `u` uniform on the unit sphere (stream
/// `(seed, i)`), forms `s = V^T u`, quantizes it and keeps the candidate of
/// smallest `b^T A b` (earliest on ties). Eigen: quantizes the dominant
/// eigenvector of `V^T V`.
pub fn round_solution(
    v: &DMatrix<f64>,
    k: usize,
    b_mat: &DMatrix<f64>,
    cfg: &RoundingConfig,
) -> Result<Rounding> {
    cfg.validate()?;
    let n = v.ncols();
    if b_mat.nrows() != n || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "rounding needs a {n}x{n} cost and 1 <= k < {n}"
        )));
    }
    match cfg.method {
        RoundingMethod::Eigen => {
            let (_, vecs) = symmetric_eigen(&symmetrize(v.transpose() * v))?;
            // eigenvalues ascend, so the dominant eigenvector is the last column
            let dir: Vec<f64> = vecs.column(n - 1).iter().copied().collect();
            let mask = quantize_top_k(&dir, k)?;
            let objective = quadratic_cost(b_mat, &mask.indices());
            Ok(Rounding {
                mask,
                objective,
                best_so_far: vec![objective],
            })
        }
        RoundingMethod::Randomized => {
            let vt = v.transpose();
            let mut best: Option<(SubsetMask, f64)> = None;
            let mut trace = Vec::with_capacity(cfg.n_rand);
            for draw in 0..cfg.n_rand {
                let mut rng = crate::rng::stream(cfg.seed, draw as u64);
                let u = unit_sphere(&mut rng, n);
                let s = &vt * u;
                let mask = quantize_top_k(s.as_slice(), k)?;
                let cost = quadratic_cost(b_mat, &mask.indices());
                if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                    best = Some((mask, cost));
                }
                trace.push(best.as_ref().map(|(_, c)| *c).unwrap_or(cost));
            }
            let (mask, objective) = best.expect("n_rand >= 1");
            Ok(Rounding {
                mask,
                objective,
                best_so_far: trace,
            })
        }
    }
}

fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 0.0 {
            return g / norm;
        }
    }
}
