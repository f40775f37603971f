//! Information functionals of a channel under a (subset-)uniform input.
//!
//! All rates are in bits. Sums run in a fixed order (outputs outer, inputs
//! inner, both ascending) so results are bit-reproducible.

use super::channel::{DmcChannel, InputDistribution, SubsetMask};
use crate::{Error, Result};

/// `I(X;Y)` in bits for input distribution `p`.
pub fn mutual_information(ch: &DmcChannel, p: &InputDistribution) -> Result<f64> {
    if p.len() != ch.num_inputs() {
        return Err(Error::DimensionMismatch {
            expected: ch.num_inputs(),
            got: p.len(),
        });
    }
    let probs = p.probs();
    let mut log_q = vec![0.0; ch.num_outputs()];
    for (y, lq) in log_q.iter_mut().enumerate() {
        let q: f64 = (0..ch.num_inputs()).map(|x| probs[x] * ch.prob(x, y)).sum();
        *lq = q.ln();
    }
    let mut total = 0.0;
    for (x, &px) in probs.iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let mut kl = 0.0;
        for (y, &lq) in log_q.iter().enumerate() {
            let w = ch.prob(x, y);
            if w > 0.0 {
                kl += w * (ch.log_prob(x, y) - lq);
            }
        }
        total += px * kl;
    }
    Ok((total / std::f64::consts::LN_2).max(0.0))
}

/// Mutual information with inputs uniform over the subset `mask`.
///
/// Evaluated as `log2 K + 1/K sum_y sum_{x in X'} P(y|x) log2(P(y|x) / sum_{x' in X'} P(y|x'))`.
pub fn uniform_subset_rate(ch: &DmcChannel, mask: &SubsetMask) -> Result<f64> {
    mask.check_against(ch)?;
    Ok(subset_rate_of(ch, &mask.indices()))
}

pub(crate) fn subset_rate_of(ch: &DmcChannel, selected: &[usize]) -> f64 {
    let k = selected.len() as f64;
    let mut acc = 0.0;
    for y in 0..ch.num_outputs() {
        let denom: f64 = selected.iter().map(|&x| ch.prob(x, y)).sum();
        if denom == 0.0 {
            continue;
        }
        let log_denom = denom.ln();
        for &x in selected {
            let w = ch.prob(x, y);
            if w > 0.0 {
                acc += w * (ch.log_prob(x, y) - log_denom);
            }
        }
    }
    let rate = k.log2() + acc / (k * std::f64::consts::LN_2);
    rate.max(0.0)
}

/// Symbol error rate of ML detection with inputs uniform over `mask`.
pub fn ser_ml(ch: &DmcChannel, mask: &SubsetMask) -> Result<f64> {
    mask.check_against(ch)?;
    Ok(ser_of(ch, &mask.indices()))
}

pub(crate) fn ser_of(ch: &DmcChannel, selected: &[usize]) -> f64 {
    let hits: f64 = (0..ch.num_outputs())
        .map(|y| selected.iter().map(|&x| ch.prob(x, y)).fold(0.0, f64::max))
        .sum();
    (1.0 - hits / selected.len() as f64).max(0.0)
}

/// Sum over outputs of the squared sum of root-likelihoods, i.e. `b^T A b`
/// for the Bhattacharyya Gram matrix `A`.
pub(crate) fn bhattacharyya_mass(ch: &DmcChannel, selected: &[usize]) -> f64 {
    (0..ch.num_outputs())
        .map(|y| {
            let s: f64 = selected.iter().map(|&x| ch.prob(x, y).sqrt()).sum();
            s * s
        })
        .sum()
}

/// Cutoff rate `R0` in bits with inputs uniform over `mask`.
pub fn cutoff_rate(ch: &DmcChannel, mask: &SubsetMask) -> Result<f64> {
    mask.check_against(ch)?;
    Ok(cutoff_of(ch, &mask.indices()))
}

pub(crate) fn cutoff_of(ch: &DmcChannel, selected: &[usize]) -> f64 {
    let k = selected.len() as f64;
    (2.0 * k.log2() - bhattacharyya_mass(ch, selected).log2()).max(0.0)
}

/// For each selected input (ascending index), the probability that ML
/// detection restricted to the subset decides on another symbol.
///
/// Ties in the ML decision go to the smallest input index.
pub fn per_symbol_misdetect(ch: &DmcChannel, mask: &SubsetMask) -> Result<Vec<f64>> {
    mask.check_against(ch)?;
    let selected = mask.indices();
    let mut cost = vec![0.0; selected.len()];
    for y in 0..ch.num_outputs() {
        let mut winner = 0;
        let mut best = ch.prob(selected[0], y);
        for (pos, &x) in selected.iter().enumerate().skip(1) {
            let w = ch.prob(x, y);
            if w > best {
                best = w;
                winner = pos;
            }
        }
        for (pos, &x) in selected.iter().enumerate() {
            if pos != winner {
                cost[pos] += ch.prob(x, y);
            }
        }
    }
    Ok(cost)
}

/// The `K x L` channel made of the selected rows.
pub fn restrict(ch: &DmcChannel, mask: &SubsetMask) -> Result<DmcChannel> {
    mask.check_against(ch)?;
    Ok(ch.select_rows(&mask.indices()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::testing::{bsc, random_channel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn binary_entropy(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn identity_channel_rates() {
        let ch = DmcChannel::identity(4).unwrap();
        let mi = mutual_information(&ch, &InputDistribution::uniform(4)).unwrap();
        assert_abs_diff_eq!(mi, 2.0, epsilon = 1e-15);
        let ch8 = DmcChannel::identity(8).unwrap();
        let mask = SubsetMask::from_indices(8, &[0, 3, 5, 6]).unwrap();
        assert_abs_diff_eq!(
            uniform_subset_rate(&ch8, &mask).unwrap(),
            2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(cutoff_rate(&ch8, &mask).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(ser_ml(&ch8, &mask).unwrap(), 0.0);
        assert_eq!(per_symbol_misdetect(&ch8, &mask).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn identical_rows_carry_nothing() {
        let row = vec![0.2, 0.3, 0.5];
        let ch = DmcChannel::from_rows(&[row.clone(), row.clone(), row]).unwrap();
        let p = InputDistribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        assert_eq!(mutual_information(&ch, &p).unwrap(), 0.0);
        let pair = SubsetMask::from_indices(3, &[0, 2]).unwrap();
        assert_abs_diff_eq!(
            uniform_subset_rate(&ch, &pair).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(cutoff_rate(&ch, &pair).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ser_ml(&ch, &pair).unwrap(), 0.5, epsilon = 1e-15);
        let costs = per_symbol_misdetect(&ch, &pair).unwrap();
        assert_eq!(costs[0], 0.0);
        assert_abs_diff_eq!(costs[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bsc_closed_forms() {
        let ch = bsc(0.1);
        let full = SubsetMask::full(2).unwrap();
        let mi = mutual_information(&ch, &InputDistribution::uniform(2)).unwrap();
        assert_abs_diff_eq!(mi, 1.0 - binary_entropy(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(mi, 0.531_004_406_410_718_5, epsilon = 1e-12);
        assert_abs_diff_eq!(ser_ml(&ch, &full).unwrap(), 0.1, epsilon = 1e-15);
        let r0 = cutoff_rate(&ch, &full).unwrap();
        assert_abs_diff_eq!(r0, 1.0 - 1.6f64.log2(), epsilon = 1e-12);
        let costs = per_symbol_misdetect(&ch, &full).unwrap();
        assert_abs_diff_eq!(costs[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(costs[1], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn subset_rate_matches_generic_mutual_information() {
        let ch = random_channel(8, 8, 11);
        let mask = SubsetMask::from_indices(8, &[1, 4, 6]).unwrap();
        let direct = uniform_subset_rate(&ch, &mask).unwrap();
        let generic = mutual_information(&ch, &InputDistribution::uniform_on(&mask)).unwrap();
        assert_abs_diff_eq!(direct, generic, epsilon = 1e-12);
        let restricted = restrict(&ch, &mask).unwrap();
        let via_restrict = mutual_information(&restricted, &InputDistribution::uniform(3)).unwrap();
        assert_abs_diff_eq!(direct, via_restrict, epsilon = 1e-12);
    }

    #[test]
    fn restrict_selects_rows() {
        let ch = DmcChannel::identity(4).unwrap();
        let r = restrict(&ch, &SubsetMask::from_indices(4, &[0, 2]).unwrap()).unwrap();
        assert_eq!(r.num_inputs(), 2);
        assert_eq!(r.row(0), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.row(1), &[0.0, 0.0, 1.0, 0.0]);
        let full = restrict(&ch, &SubsetMask::full(4).unwrap()).unwrap();
        assert_eq!(full, ch);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = bsc(0.2);
        assert!(mutual_information(&ch, &InputDistribution::uniform(3)).is_err());
        let mask = SubsetMask::full(3).unwrap();
        assert!(ser_ml(&ch, &mask).is_err());
    }

    fn arb_case() -> impl Strategy<Value = (DmcChannel, Vec<usize>, Vec<usize>)> {
        (2usize..9, 2usize..9, any::<u64>()).prop_flat_map(|(m, l, seed)| {
            let ch = random_channel(m, l, seed);
            (
                Just(ch),
                proptest::sample::subsequence((0..m).collect::<Vec<_>>(), 2..=m),
                Just((0..m).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
    }

    proptest! {
        #[test]
        fn rate_ordering((ch, sel, _perm) in arb_case()) {
            let mask = SubsetMask::from_indices(ch.num_inputs(), &sel).unwrap();
            let r0 = cutoff_rate(&ch, &mask).unwrap();
            let rate = uniform_subset_rate(&ch, &mask).unwrap();
            let ser = ser_ml(&ch, &mask).unwrap();
            let k = mask.k() as f64;
            prop_assert!(r0 >= 0.0);
            prop_assert!(r0 <= rate + 1e-12);
            prop_assert!(rate <= k.log2() + 1e-12);
            prop_assert!(ser >= 0.0 && ser <= 1.0 - 1.0 / k + 1e-12);
        }

        #[test]
        fn input_permutation_is_relabeling((ch, sel, perm) in arb_case()) {
            // new row i is old row perm[i]; old input j moves to inv[j]
            let m = ch.num_inputs();
            let mut inv = vec![0; m];
            for (i, &old) in perm.iter().enumerate() {
                inv[old] = i;
            }
            let permuted = ch.permute_inputs(&perm).unwrap();
            let mask = SubsetMask::from_indices(m, &sel).unwrap();
            let moved: Vec<usize> = sel.iter().map(|&j| inv[j]).collect();
            let pmask = SubsetMask::from_indices(m, &moved).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
            prop_assert!(close(ser_ml(&ch, &mask).unwrap(), ser_ml(&permuted, &pmask).unwrap()));
            prop_assert!(close(cutoff_rate(&ch, &mask).unwrap(), cutoff_rate(&permuted, &pmask).unwrap()));
            prop_assert!(close(
                uniform_subset_rate(&ch, &mask).unwrap(),
                uniform_subset_rate(&permuted, &pmask).unwrap()
            ));
            // random real-valued rows have no likelihood ties, so the
            // per-symbol costs follow their symbols
            let costs = per_symbol_misdetect(&ch, &mask).unwrap();
            let pcosts = per_symbol_misdetect(&permuted, &pmask).unwrap();
            let sorted_sel = mask.indices();
            let sorted_moved = pmask.indices();
            for (pos, &j) in sorted_sel.iter().enumerate() {
                let ppos = sorted_moved.iter().position(|&i| i == inv[j]).unwrap();
                prop_assert!(close(costs[pos], pcosts[ppos]));
            }
            let mean: f64 = costs.iter().sum::<f64>() / mask.k() as f64;
            prop_assert!(close(mean, ser_ml(&ch, &mask).unwrap()));
        }
    }
}
