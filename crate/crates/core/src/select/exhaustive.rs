//! Brute-force subset search, used as a reference at small `M`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::dmc::{cutoff_of, ser_of, subset_rate_of, DmcChannel, SubsetMask};
use crate::{Error, Result};

/// Largest number of subsets [`exhaustive_select`] will enumerate.
pub const SEARCH_LIMIT: u128 = 10_000_000;

/// Objective for subset selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Maximize the uniform-input mutual information.
    Rate,
    /// Minimize the ML symbol error rate.
    Ser,
    /// Maximize the cutoff rate.
    Cutoff,
}

impl Criterion {
    pub fn evaluate(self, ch: &DmcChannel, selected: &[usize]) -> f64 {
        match self {
            Criterion::Rate => subset_rate_of(ch, selected),
            Criterion::Ser => ser_of(ch, selected),
            Criterion::Cutoff => cutoff_of(ch, selected),
        }
    }

    /// Whether `a` is strictly better than `b` under this criterion.
    pub fn improves(self, a: f64, b: f64) -> bool {
        match self {
            Criterion::Ser => a < b,
            Criterion::Rate | Criterion::Cutoff => a > b,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Rate => "rate",
            Criterion::Ser => "ser",
            Criterion::Cutoff => "cutoff",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" => Ok(Criterion::Rate),
            "ser" => Ok(Criterion::Ser),
            "cutoff" => Ok(Criterion::Cutoff),
            other => Err(Error::InvalidParameter(format!(
                "unknown criterion '{other}'"
            ))),
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Globally optimal `k`-subset under `criterion`.
///
/// Subsets are visited in lexicographic order of their sorted index lists and
/// only a strict improvement replaces the incumbent, so ties resolve to the
/// lexicographically smallest index list.
pub fn exhaustive_select(
    ch: &DmcChannel,
    k: usize,
    criterion: Criterion,
) -> Result<(SubsetMask, f64)> {
    let m = ch.num_inputs();
    if k < 2 || k > m {
        return Err(Error::InvalidParameter(format!(
            "subset size {k} must lie in 2..={m}"
        )));
    }
    let count = binomial(m, k);
    if count > SEARCH_LIMIT {
        return Err(Error::SearchTooLarge {
            count,
            limit: SEARCH_LIMIT,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for combo in (0..m).combinations(k) {
        let value = criterion.evaluate(ch, &combo);
        match &best {
            Some((_, incumbent)) if !criterion.improves(value, *incumbent) => {}
            _ => best = Some((combo, value)),
        }
    }
    let (indices, value) = best.expect("at least one subset exists");
    Ok((SubsetMask::from_indices(m, &indices)?, value))
}
