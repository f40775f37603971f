//! Cutoff-rate subset selection through a semidefinite relaxation.
//!
//! Maximizing the cutoff rate over `K`-subsets is the binary quadratic program
//! `min b^T A b` s.t. `1^T b = K`, where `A` is the Gram matrix of the
//! root-likelihood rows. Writing `b = s_n [s_1..s_M]` with a sign slack `s_n`
//! and lifting `S = s s^T` gives a linear objective over rank-one matrices;
//! dropping the rank constraint leaves an SDP, solved in [`solve_sdp`]. A
//! subset is then recovered by randomized rounding ([`round_solution`]).

mod admm;
mod anderson;
mod constraints;
mod ipm;
mod linalg;
mod rounding;
mod solver;

use nalgebra::DMatrix;

pub use rounding::{
    psd_factorize, quantize_top_k, round_solution, Rounding, RoundingConfig, RoundingMethod,
    FACTOR_EIG_FLOOR,
};
pub use solver::{solve_sdp, SdpConfig, SdpMethod, SdpSolution};

use crate::dmc::{cutoff_rate, DmcChannel, SubsetMask};
use crate::{Error, Result};

/// Bhattacharyya coefficients `A_ij = sum_y sqrt(P(y|i) P(y|j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    a: DMatrix<f64>,
}

impl GramMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    /// `b^T A b` for a subset.
    pub fn quadratic_form(&self, mask: &SubsetMask) -> f64 {
        let sel = mask.indices();
        sel.iter()
            .map(|&i| sel.iter().map(|&j| self.a[(i, j)]).sum::<f64>())
            .sum()
    }
}

pub fn build_gram(ch: &DmcChannel) -> GramMatrix {
    let m = ch.num_inputs();
    let roots: Vec<Vec<f64>> = ch
        .rows()
        .map(|r| r.iter().map(|p| p.sqrt()).collect())
        .collect();
    let mut a = DMatrix::<f64>::identity(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let v: f64 = roots[i].iter().zip(&roots[j]).map(|(p, q)| p * q).sum();
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    GramMatrix { a }
}

/// `B = [[A, 0], [0^T, 0]]`.
pub fn embed(gram: &GramMatrix) -> DMatrix<f64> {
    let m = gram.size();
    let mut b = DMatrix::<f64>::zeros(m + 1, m + 1);
    b.view_mut((0, 0), (m, m)).copy_from(&gram.a);
    b
}

/// Output of the full selection pipeline.
#[derive(Debug, Clone)]
pub struct SdpSelection {
    pub mask: SubsetMask,
    pub cutoff_rate_bits: f64,
    /// `tr(B S)`, a lower bound on `b^T A b` over all `K`-subsets (up to
    /// solver tolerance).
    pub sdp_objective: f64,
    /// `2 log2 K - log2 tr(B S)`: the cutoff rate no `K`-subset can exceed.
    pub cutoff_rate_bound_bits: f64,
    /// `b^T A b` of the returned subset.
    pub rounded_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub duality_gap: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Gram matrix, embedding, SDP, factorization and rounding in one call.
pub fn sdp_select(
    ch: &DmcChannel,
    k: usize,
    sdp: &SdpConfig,
    rounding: &RoundingConfig,
) -> Result<SdpSelection> {
    let m = ch.num_inputs();
    if k < 2 || k > m {
        return Err(Error::InvalidParameter(format!(
            "subset size {k} must lie in 2..={m}"
        )));
    }
    let gram = build_gram(ch);
    let b_mat = embed(&gram);
    let sol = solve_sdp(&b_mat, k, sdp)?;
    if !sol.converged {
        log::warn!(
            "SDP stopped after {} iterations (primal {:.2e}, dual {:.2e})",
            sol.iterations,
            sol.primal_residual,
            sol.dual_residual
        );
    }
    let v = psd_factorize(&sol)?;
    let rounded = round_solution(&v, k, &b_mat, rounding)?;
    let kf = k as f64;
    Ok(SdpSelection {
        cutoff_rate_bits: cutoff_rate(ch, &rounded.mask)?,
        cutoff_rate_bound_bits: 2.0 * kf.log2() - sol.objective.log2(),
        sdp_objective: sol.objective,
        rounded_objective: rounded.objective,
        mask: rounded.mask,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        duality_gap: sol.duality_gap,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::testing::{bsc, random_channel};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    #[test]
    fn gram_basics() {
        let g = build_gram(&bsc(0.1));
        assert_eq!(g.matrix()[(0, 0)], 1.0);
        assert_abs_diff_eq!(g.matrix()[(0, 1)], 0.6, epsilon = 1e-15);
        let disjoint = DmcChannel::from_rows(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(build_gram(&disjoint).matrix()[(0, 1)], 0.0);
        let ch = random_channel(9, 4, 1);
        let g = build_gram(&ch);
        assert_eq!(g.matrix(), &g.matrix().transpose());
        assert!(g.matrix().symmetric_eigenvalues().min() > -1e-12);
    }

    #[test]
    fn embedding() {
        let b = embed(&build_gram(&DmcChannel::identity(2).unwrap()));
        assert_eq!(
            b,
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]))
        );
        let ch = random_channel(6, 3, 2);
        let b = embed(&build_gram(&ch));
        assert_abs_diff_eq!(b.trace(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_form_is_bhattacharyya_mass() {
        let ch = random_channel(7, 5, 9);
        let mask = SubsetMask::from_indices(7, &[0, 2, 3, 6]).unwrap();
        let g = build_gram(&ch);
        let mass = crate::dmc::bhattacharyya_mass(&ch, &mask.indices());
        assert_abs_diff_eq!(g.quadratic_form(&mask), mass, epsilon = 1e-12);
    }

    #[test]
    fn full_set_forced() {
        let ch = random_channel(5, 4, 6);
        let g = build_gram(&ch);
        let b = embed(&g);
        let ones: f64 = g.matrix().sum();
        let sol = solve_sdp(&b, 5, &SdpConfig::default()).unwrap();
        assert!(sol.objective <= ones + 1e-6);
        assert_abs_diff_eq!(sol.objective, ones, epsilon = 1e-4);
        let v = psd_factorize(&sol).unwrap();
        let r = round_solution(&v, 5, &b, &RoundingConfig::default()).unwrap();
        assert_eq!(r.mask.k(), 5);
    }

    #[test]
    fn noiseless_pipeline() {
        let ch = DmcChannel::identity(8).unwrap();
        let out = sdp_select(&ch, 4, &SdpConfig::default(), &RoundingConfig::default()).unwrap();
        assert_eq!(out.mask.k(), 4);
        assert_abs_diff_eq!(out.cutoff_rate_bits, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.sdp_objective, 4.0, epsilon = 1e-4);
    }

    proptest! {
        #[test]
        fn lift_satisfies_constraints(bits in proptest::collection::vec(any::<bool>(), 3..20)) {
            let k = bits.iter().filter(|&&b| b).count();
            prop_assume!(k >= 2);
            let m = bits.len();
            let ch = random_channel(m, 4, m as u64);
            let g = build_gram(&ch);
            let b = embed(&g);
            let mut s = DVector::from_iterator(m + 1, bits.iter().map(|&x| f64::from(u8::from(x))).chain([1.0]));
            let mask = SubsetMask::new(bits.clone()).unwrap();
            prop_assert!((s.dot(&(&b * &s)) - g.quadratic_form(&mask)).abs() < 1e-12);
            let last = s[m];
            prop_assert_eq!(last * s.sum(), (k + 1) as f64);
            for i in 0..m {
                prop_assert_eq!(s[i] * last - s[i] * s[i], 0.0);
            }
            // the sign-flipped lift is equally feasible
            s.neg_mut();
            prop_assert_eq!(s[m] * s.sum(), (k + 1) as f64);
        }
    }
}
