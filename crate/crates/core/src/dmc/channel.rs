use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Linear-domain probabilities below this are stored as exact zeros.
pub const PROB_FLOOR: f64 = 1e-300;

/// Row-sum deviation accepted by the loaders before renormalization.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// A discrete memoryless channel given by its transition matrix `P(y|x)`.
///
/// Rows are indexed by input, columns by output. The matrix is kept in
/// row-major order together with its natural logarithm; the log companion
/// stays finite for entries that were flushed to zero in the linear domain
/// but are still representable as logs (useful for very high SNR).
#[derive(Debug, Clone, PartialEq)]
pub struct DmcChannel {
    num_inputs: usize,
    num_outputs: usize,
    trans: Vec<f64>,
    log_trans: Vec<f64>,
}

impl DmcChannel {
    /// Builds a channel from linear-domain rows.
    ///
    /// Each row must be non-negative and sum to one within [`ROW_SUM_TOL`];
    /// rows are then renormalized.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_inputs = rows.len();
        let num_outputs = rows.first().map_or(0, Vec::len);
        check_dims(num_inputs, num_outputs)?;
        let mut trans = Vec::with_capacity(num_inputs * num_outputs);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != num_outputs {
                return Err(Error::InvalidChannel {
                    row: x,
                    reason: format!("has {} entries, expected {num_outputs}", row.len()),
                });
            }
            trans.extend_from_slice(row);
        }
        Self::from_flat(num_inputs, num_outputs, trans)
    }

    /// Same as [`DmcChannel::from_rows`] on a row-major flat buffer.
    pub fn from_flat(num_inputs: usize, num_outputs: usize, mut trans: Vec<f64>) -> Result<Self> {
        check_dims(num_inputs, num_outputs)?;
        if trans.len() != num_inputs * num_outputs {
            return Err(Error::DimensionMismatch {
                expected: num_inputs * num_outputs,
                got: trans.len(),
            });
        }
        let mut log_trans = vec![0.0; trans.len()];
        for x in 0..num_inputs {
            let row = &mut trans[x * num_outputs..(x + 1) * num_outputs];
            let mut sum = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidChannel {
                        row: x,
                        reason: format!("entry {y} is {p}, expected a probability"),
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChannel {
                    row: x,
                    reason: format!("sums to {sum}"),
                });
            }
            // Rows already normalized up to rounding are left untouched so
            // that saving and reloading a channel is exact.
            if (sum - 1.0).abs() <= 8.0 * f64::EPSILON {
                sum = 1.0;
            }
            let log_row = &mut log_trans[x * num_outputs..(x + 1) * num_outputs];
            let log_sum = sum.ln();
            for (p, lp) in row.iter_mut().zip(log_row.iter_mut()) {
                *lp = p.ln() - log_sum;
                *p /= sum;
                if *p < PROB_FLOOR {
                    *p = 0.0;
                }
            }
        }
        Ok(Self {
            num_inputs,
            num_outputs,
            trans,
            log_trans,
        })
    }

    /// Builds a channel from natural-log probabilities.
    ///
    /// The linear matrix is `exp` of the input with entries below
    /// [`PROB_FLOOR`] flushed to zero; the log values are kept, shifted by the
    /// row renormalization.
    pub fn from_log_flat(
        num_inputs: usize,
        num_outputs: usize,
        mut log_trans: Vec<f64>,
    ) -> Result<Self> {
        check_dims(num_inputs, num_outputs)?;
        if log_trans.len() != num_inputs * num_outputs {
            return Err(Error::DimensionMismatch {
                expected: num_inputs * num_outputs,
                got: log_trans.len(),
            });
        }
        let mut trans = vec![0.0; log_trans.len()];
        for x in 0..num_inputs {
            let range = x * num_outputs..(x + 1) * num_outputs;
            let log_row = &mut log_trans[range.clone()];
            let row = &mut trans[range];
            let mut sum = 0.0;
            for (y, (&lp, p)) in log_row.iter().zip(row.iter_mut()).enumerate() {
                if lp.is_nan() || lp > 1e-12 {
                    return Err(Error::InvalidChannel {
                        row: x,
                        reason: format!("log-probability {lp} at output {y}"),
                    });
                }
                *p = lp.exp();
                sum += *p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChannel {
                    row: x,
                    reason: format!("sums to {sum}"),
                });
            }
            let log_sum = sum.ln();
            for (lp, p) in log_row.iter_mut().zip(row.iter_mut()) {
                *lp -= log_sum;
                *p /= sum;
                if *p < PROB_FLOOR {
                    *p = 0.0;
                }
            }
        }
        Ok(Self {
            num_inputs,
            num_outputs,
            trans,
            log_trans,
        })
    }

    /// The noiseless channel on `m` symbols.
    pub fn identity(m: usize) -> Result<Self> {
        let mut trans = vec![0.0; m * m];
        for i in 0..m {
            trans[i * m + i] = 1.0;
        }
        Self::from_flat(m, m, trans)
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.trans[x * self.num_outputs + y]
    }

    #[inline]
    pub fn log_prob(&self, x: usize, y: usize) -> f64 {
        self.log_trans[x * self.num_outputs + y]
    }

    /// Row `P(.|x)`.
    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.trans[x * self.num_outputs..(x + 1) * self.num_outputs]
    }

    #[inline]
    pub fn log_row(&self, x: usize) -> &[f64] {
        &self.log_trans[x * self.num_outputs..(x + 1) * self.num_outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.trans.chunks_exact(self.num_outputs)
    }

    /// Reorders inputs so that new row `i` is old row `perm[i]`.
    pub fn permute_inputs(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.num_inputs,
                got: perm.len(),
            });
        }
        let mut trans = Vec::with_capacity(self.trans.len());
        let mut log_trans = Vec::with_capacity(self.trans.len());
        for &old in perm {
            trans.extend_from_slice(self.row(old));
            log_trans.extend_from_slice(self.log_row(old));
        }
        Ok(Self {
            num_inputs: self.num_inputs,
            num_outputs: self.num_outputs,
            trans,
            log_trans,
        })
    }

    pub(crate) fn select_rows(&self, inputs: &[usize]) -> Self {
        let mut trans = Vec::with_capacity(inputs.len() * self.num_outputs);
        let mut log_trans = Vec::with_capacity(inputs.len() * self.num_outputs);
        for &x in inputs {
            trans.extend_from_slice(self.row(x));
            log_trans.extend_from_slice(self.log_row(x));
        }
        Self {
            num_inputs: inputs.len(),
            num_outputs: self.num_outputs,
            trans,
            log_trans,
        }
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            num_inputs: self.num_inputs,
            num_outputs: self.num_outputs,
            probs: self.rows().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile = serde_json::from_str(text)?;
        file.into_channel()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn check_dims(num_inputs: usize, num_outputs: usize) -> Result<()> {
    if num_inputs < 2 || num_outputs < 2 {
        return Err(Error::InvalidParameter(format!(
            "channel needs at least 2 inputs and 2 outputs, got {num_inputs}x{num_outputs}"
        )));
    }
    Ok(())
}

/// On-disk channel format: `{"M": int, "L": int, "P": [[float; L]; M]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(rename = "M")]
    pub num_inputs: usize,
    #[serde(rename = "L")]
    pub num_outputs: usize,
    #[serde(rename = "P")]
    pub probs: Vec<Vec<f64>>,
}

/// A problem found while checking a channel file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelIssue {
    /// Offending row, if the problem is local to one.
    pub row: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ChannelIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.row {
            Some(row) => write!(f, "row {row}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ChannelFile {
    /// Lists every structural problem without stopping at the first.
    pub fn issues(&self) -> Vec<ChannelIssue> {
        let mut issues = Vec::new();
        if self.num_inputs < 2 || self.num_outputs < 2 {
            issues.push(ChannelIssue {
                row: None,
                message: format!(
                    "need M >= 2 and L >= 2, got M={} L={}",
                    self.num_inputs, self.num_outputs
                ),
            });
        }
        if self.probs.len() != self.num_inputs {
            issues.push(ChannelIssue {
                row: None,
                message: format!("M={} but P has {} rows", self.num_inputs, self.probs.len()),
            });
        }
        for (x, row) in self.probs.iter().enumerate() {
            if row.len() != self.num_outputs {
                issues.push(ChannelIssue {
                    row: Some(x),
                    message: format!("has {} entries, expected L={}", row.len(), self.num_outputs),
                });
            }
            if let Some((y, p)) = row
                .iter()
                .enumerate()
                .find(|(_, p)| !p.is_finite() || **p < 0.0)
            {
                issues.push(ChannelIssue {
                    row: Some(x),
                    message: format!("entry {y} is {p}"),
                });
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                issues.push(ChannelIssue {
                    row: Some(x),
                    message: format!("sums to {sum}"),
                });
            }
        }
        issues
    }

    pub fn into_channel(self) -> Result<DmcChannel> {
        if self.probs.len() != self.num_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.num_inputs,
                got: self.probs.len(),
            });
        }
        if let Some(row) = self.probs.iter().position(|r| r.len() != self.num_outputs) {
            return Err(Error::InvalidChannel {
                row,
                reason: format!("expected {} entries", self.num_outputs),
            });
        }
        DmcChannel::from_rows(&self.probs)
    }
}

/// An input probability mass function.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "input distribution sums to {sum}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    /// Uniform over the inputs selected by `mask`, zero elsewhere.
    pub fn uniform_on(mask: &SubsetMask) -> Self {
        let w = 1.0 / mask.k() as f64;
        Self {
            probs: mask
                .bits()
                .iter()
                .map(|&b| if b { w } else { 0.0 })
                .collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Selection of `k` out of `M` channel inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: Vec<bool>,
    k: usize,
}

impl SubsetMask {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        let k = bits.iter().filter(|&&b| b).count();
        if k < 2 {
            return Err(Error::InvalidMask(format!(
                "a subset needs at least 2 symbols, got {k}"
            )));
        }
        Ok(Self { bits, k })
    }

    /// Mask over `m` inputs selecting `indices` (any order, no duplicates).
    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; m];
        for &i in indices {
            if i >= m {
                return Err(Error::InvalidMask(format!("index {i} out of range 0..{m}")));
            }
            if bits[i] {
                return Err(Error::InvalidMask(format!("index {i} listed twice")));
            }
            bits[i] = true;
        }
        Self::new(bits)
    }

    pub fn full(m: usize) -> Result<Self> {
        Self::new(vec![true; m])
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of channel inputs `M` the mask ranges over.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.get(i).copied().unwrap_or(false)
    }

    /// Selected inputs in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub(crate) fn check_against(&self, ch: &DmcChannel) -> Result<()> {
        if self.bits.len() != ch.num_inputs() {
            return Err(Error::DimensionMismatch {
                expected: ch.num_inputs(),
                got: self.bits.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renormalizes_rows_within_tolerance() {
        let ch = DmcChannel::from_rows(&[vec![0.5, 0.5 + 5e-7], vec![0.25, 0.75]]).unwrap();
        let sum: f64 = ch.row(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        assert!((ch.log_prob(0, 0).exp() - ch.prob(0, 0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(DmcChannel::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(DmcChannel::from_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(DmcChannel::from_rows(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn log_companion_keeps_tiny_values() {
        let m = DmcChannel::from_log_flat(2, 2, vec![-800.0, 0.0, 0.0, -800.0]).unwrap();
        assert_eq!(m.prob(0, 0), 0.0);
        assert_eq!(m.log_prob(0, 0), -800.0);
        assert_eq!(m.prob(0, 1), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let ch = DmcChannel::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let text = ch.to_json().unwrap();
        assert!(text.contains("\"M\":2"));
        assert_eq!(DmcChannel::from_json(&text).unwrap(), ch);
    }

    #[test]
    fn file_issues_name_the_row() {
        let file: ChannelFile =
            serde_json::from_str(r#"{"M":2,"L":2,"P":[[0.5,0.5],[0.5,0.4]]}"#).unwrap();
        let issues = file.issues();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].row, Some(1));
    }

    #[test]
    fn mask_construction() {
        let m = SubsetMask::from_indices(5, &[3, 1]).unwrap();
        assert_eq!(m.k(), 2);
        assert_eq!(m.indices(), vec![1, 3]);
        assert!(SubsetMask::from_indices(5, &[1]).is_err());
        assert!(SubsetMask::from_indices(5, &[1, 1]).is_err());
        assert!(SubsetMask::from_indices(5, &[1, 7]).is_err());
    }
}
