//! Binary switching algorithm for minimum-SER subsets.
//!
//! Starting from a random `K`-subset, the selected symbols are ranked by their
//! individual misdetection probability. The worst symbol is offered every
//! unselected candidate and the swap that lowers the total SER the most is
//! taken; if no swap helps, the next symbol in the ranking is tried, and so
//! on. After each accepted swap the ranking is rebuilt. A restart ends when no
//! selected symbol admits an improving swap.

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::dmc::{ser_of, DmcChannel, SubsetMask};
use crate::{Error, Result};

/// Improvements smaller than this (in summed ML hit probability) are ignored,
/// so rounding noise cannot make the search cycle.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BsaConfig {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Cap on accepted swaps per restart.
    pub max_passes: usize,
}

impl BsaConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 20,
            seed: 0,
            max_passes: 1000,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// What happened in one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub initial_ser: f64,
    pub final_ser: f64,
    pub swaps: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct BsaOutcome {
    pub mask: SubsetMask,
    pub ser: f64,
    /// Set when the winning restart hit `max_passes`.
    pub truncated: bool,
    pub best_restart: usize,
    pub restarts: Vec<RestartTrace>,
}

/// Runs the binary switching algorithm with `cfg.restarts` random starts and
/// returns the lowest-SER subset (earliest restart on ties).
pub fn bsa_select(ch: &DmcChannel, cfg: &BsaConfig) -> Result<BsaOutcome> {
    let m = ch.num_inputs();
    if cfg.k < 2 || cfg.k >= m {
        return Err(Error::InvalidParameter(format!(
            "subset size {} must lie in 2..{m}",
            cfg.k
        )));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidParameter(
            "at least one restart is needed".into(),
        ));
    }
    let runs: Vec<(Vec<usize>, RestartTrace)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = crate::rng::stream(cfg.seed, r as u64);
            let start = sample(&mut rng, m, cfg.k).into_vec();
            local_search(ch, start, cfg.max_passes)
        })
        .collect();

    let (best_restart, _) =
        runs.iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, (_, t))| {
                if t.final_ser < bv {
                    (i, t.final_ser)
                } else {
                    (bi, bv)
                }
            });
    let mask = SubsetMask::from_indices(m, &runs[best_restart].0)?;
    let winner = &runs[best_restart].1;
    Ok(BsaOutcome {
        mask,
        ser: winner.final_ser,
        truncated: winner.truncated,
        best_restart,
        restarts: runs.into_iter().map(|(_, t)| t).collect(),
    })
}

/// Per-output ML bookkeeping for the current subset: the best and runner-up
/// selected likelihoods and who holds the best one.
struct HitCache {
    best: Vec<f64>,
    best_at: Vec<usize>,
    second: Vec<f64>,
    hits: f64,
}

impl HitCache {
    fn build(ch: &DmcChannel, selected: &[usize]) -> Self {
        let l = ch.num_outputs();
        let mut best = vec![f64::NEG_INFINITY; l];
        let mut best_at = vec![usize::MAX; l];
        let mut second = vec![f64::NEG_INFINITY; l];
        let mut ordered = selected.to_vec();
        ordered.sort_unstable();
        for y in 0..l {
            for &x in &ordered {
                let w = ch.prob(x, y);
                if w > best[y] {
                    second[y] = best[y];
                    best[y] = w;
                    best_at[y] = x;
                } else if w > second[y] {
                    second[y] = w;
                }
            }
        }
        let hits = best.iter().sum();
        Self {
            best,
            best_at,
            second,
            hits,
        }
    }

    /// Summed ML hit probability after replacing `out` by `candidate`.
    fn hits_after_swap(&self, ch: &DmcChannel, out: usize, candidate: usize) -> f64 {
        let row = ch.row(candidate);
        (0..row.len())
            .map(|y| {
                let rest = if self.best_at[y] == out {
                    self.second[y]
                } else {
                    self.best[y]
                };
                rest.max(row[y])
            })
            .sum()
    }

    /// Misdetection probability of each entry of `selected` (ties to the
    /// smallest index, via the ascending scan in `build`).
    fn misdetect(&self, ch: &DmcChannel, selected: &[usize]) -> Vec<f64> {
        selected
            .iter()
            .map(|&x| {
                ch.row(x)
                    .iter()
                    .zip(&self.best_at)
                    .filter(|(_, &winner)| winner != x)
                    .map(|(&w, _)| w)
                    .sum()
            })
            .collect()
    }
}

fn local_search(
    ch: &DmcChannel,
    mut selected: Vec<usize>,
    max_passes: usize,
) -> (Vec<usize>, RestartTrace) {
    selected.sort_unstable();
    let m = ch.num_inputs();
    let initial_ser = ser_of(ch, &selected);
    let mut in_set = vec![false; m];
    selected.iter().for_each(|&x| in_set[x] = true);
    let mut cache = HitCache::build(ch, &selected);
    let mut swaps = 0;
    let mut truncated = false;

    loop {
        let costs = cache.misdetect(ch, &selected);
        let mut ranking: Vec<usize> = (0..selected.len()).collect();
        ranking.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]));

        let mut accepted = None;
        for &pos in &ranking {
            let out = selected[pos];
            let mut best: Option<(usize, f64)> = None;
            for candidate in (0..m).filter(|&c| !in_set[c]) {
                let hits = cache.hits_after_swap(ch, out, candidate);
                if best.is_none_or(|(_, h)| hits > h) {
                    best = Some((candidate, hits));
                }
            }
            if let Some((candidate, hits)) = best {
                if hits > cache.hits + MIN_GAIN {
                    accepted = Some((pos, candidate));
                    break;
                }
            }
        }

        let Some((pos, candidate)) = accepted else {
            break;
        };
        if swaps == max_passes {
            truncated = true;
            break;
        }
        in_set[selected[pos]] = false;
        in_set[candidate] = true;
        selected[pos] = candidate;
        selected.sort_unstable();
        cache = HitCache::build(ch, &selected);
        swaps += 1;
    }

    let final_ser = ser_of(ch, &selected);
    (
        selected,
        RestartTrace {
            initial_ser,
            final_ser,
            swaps,
            truncated,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmc::testing::random_channel;
    use crate::select::exhaustive::{exhaustive_select, Criterion};
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_reaches_zero() {
        let ch = DmcChannel::identity(8).unwrap();
        let out = bsa_select(&ch, &BsaConfig::new(4).with_restarts(3)).unwrap();
        assert_eq!(out.ser, 0.0);
        assert_eq!(out.mask.k(), 4);
    }

    #[test]
    fn finds_orthogonal_rows() {
        // rows 1, 4 and 6 have disjoint supports; the rest smear over everything
        let mut rows = vec![vec![1.0 / 6.0; 6]; 8];
        rows[1] = vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0];
        rows[4] = vec![0.0, 0.0, 0.5, 0.5, 0.0, 0.0];
        rows[6] = vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5];
        let ch = DmcChannel::from_rows(&rows).unwrap();
        let (oracle_mask, oracle) = exhaustive_select(&ch, 3, Criterion::Ser).unwrap();
        assert_eq!(oracle, 0.0);
        let out = bsa_select(&ch, &BsaConfig::new(3).with_restarts(10)).unwrap();
        assert_eq!(out.ser, 0.0);
        assert_eq!(out.mask, oracle_mask);
    }

    #[test]
    fn every_restart_improves_monotonically() {
        let ch = random_channel(12, 9, 4);
        let out = bsa_select(&ch, &BsaConfig::new(4).with_restarts(8).with_seed(3)).unwrap();
        let (_, oracle) = exhaustive_select(&ch, 4, Criterion::Ser).unwrap();
        for t in &out.restarts {
            assert!(t.final_ser <= t.initial_ser);
            assert!(t.final_ser >= oracle - 1e-12);
        }
        assert_abs_diff_eq!(
            out.ser,
            crate::dmc::ser_ml(&ch, &out.mask).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn seeded_runs_repeat() {
        let ch = random_channel(10, 6, 8);
        let cfg = BsaConfig::new(3).with_restarts(5).with_seed(42);
        let a = bsa_select(&ch, &cfg).unwrap();
        let b = bsa_select(&ch, &cfg).unwrap();
        assert_eq!(a.mask, b.mask);
        assert_eq!(a.ser.to_bits(), b.ser.to_bits());
        assert_eq!(a.restarts, b.restarts);
    }

    #[test]
    fn truncation_is_flagged() {
        let ch = random_channel(16, 8, 2);
        let mut cfg = BsaConfig::new(5).with_restarts(4);
        cfg.max_passes = 0;
        let out = bsa_select(&ch, &cfg).unwrap();
        assert!(out.restarts.iter().any(|t| t.truncated));
        for t in &out.restarts {
            assert_eq!(t.swaps, 0);
            assert_eq!(t.initial_ser, t.final_ser);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let ch = DmcChannel::identity(4).unwrap();
        assert!(bsa_select(&ch, &BsaConfig::new(4)).is_err());
        assert!(bsa_select(&ch, &BsaConfig::new(1)).is_err());
        assert!(bsa_select(&ch, &BsaConfig::new(2).with_restarts(0)).is_err());
    }
}
