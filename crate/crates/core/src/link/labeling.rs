use crate::dmc::{DmcChannel, SubsetMask};
use crate::{Error, Result};

/// Largest LLR magnitude handed to the decoder.
pub const LLR_CLIP: f64 = 40.0;

/// Bit labels for the selected symbols: the `p`-th smallest selected input
/// index carries label `p` in natural binary, most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLabeling {
    mask: SubsetMask,
    symbols: Vec<usize>,
    bits_per_symbol: usize,
}

impl SymbolLabeling {
    pub fn new(mask: SubsetMask) -> Result<Self> {
        let k = mask.k();
        if !k.is_power_of_two() {
            return Err(Error::InvalidMask(format!(
                "labeling needs a power-of-two subset size, got {k}"
            )));
        }
        Ok(Self {
            symbols: mask.indices(),
            bits_per_symbol: k.trailing_zeros() as usize,
            mask,
        })
    }

    pub fn mask(&self) -> &SubsetMask {
        &self.mask
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Channel input carrying `label`.
    pub fn symbol(&self, label: usize) -> usize {
        self.symbols[label]
    }

    /// Selected channel inputs in label order.
    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// Bit `b` (0 = most significant) of `label`.
    #[inline]
    pub fn label_bit(&self, label: usize, b: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    /// Label of the selected input `x`, if selected.
    pub fn label_of(&self, x: usize) -> Option<usize> {
        self.symbols.binary_search(&x).ok()
    }
}

/// Channel inputs for a bit stream, `log2 K` bits per use.
///
/// Code bit `i` rides on use `floor(i / log2 K)`. A trailing partial group is
/// padded with zeros; the pad length is returned alongside.
pub fn map_bits(bits: &[u8], lab: &SymbolLabeling) -> (Vec<usize>, usize) {
    let width = lab.bits_per_symbol();
    let pad = (width - bits.len() % width) % width;
    let symbols = bits
        .chunks(width)
        .map(|group| {
            let label = (0..width).fold(0, |acc, b| {
                (acc << 1) | usize::from(group.get(b).copied().unwrap_or(0) & 1)
            });
            lab.symbol(label)
        })
        .collect();
    (symbols, pad)
}

/// Inverse of [`map_bits`], truncated to `len` bits.
pub fn demap_symbols(inputs: &[usize], lab: &SymbolLabeling, len: usize) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(inputs.len() * lab.bits_per_symbol());
    for &x in inputs {
        let label = lab
            .label_of(x)
            .ok_or_else(|| Error::InvalidMask(format!("input {x} is not in the labeled subset")))?;
        bits.extend((0..lab.bits_per_symbol()).map(|b| lab.label_bit(label, b)));
    }
    bits.truncate(len);
    Ok(bits)
}

/// Per-bit LLRs `ln(P[c=1|y] / P[c=0|y])` for output `y`, uniform prior over
/// the labeled symbols, clipped to `+-40`.
pub fn compute_llrs(ch: &DmcChannel, lab: &SymbolLabeling, y: usize) -> Result<Vec<f64>> {
    if y >= ch.num_outputs() {
        return Err(Error::InvalidParameter(format!(
            "output {y} out of range 0..{}",
            ch.num_outputs()
        )));
    }
    lab.mask().check_against(ch)?;
    let width = lab.bits_per_symbol();
    let logs: Vec<f64> = lab.symbols().iter().map(|&x| ch.log_prob(x, y)).collect();
    if logs.iter().all(|l| *l == f64::NEG_INFINITY) {
        log::warn!("output {y} has zero likelihood under every selected symbol");
        return Ok(vec![0.0; width]);
    }
    Ok((0..width)
        .map(|b| {
            let (ones, zeros): (Vec<f64>, Vec<f64>) = (0..logs.len())
                .map(|label| (lab.label_bit(label, b), logs[label]))
                .fold((Vec::new(), Vec::new()), |(mut o, mut z), (bit, l)| {
                    if bit == 1 {
                        o.push(l)
                    } else {
                        z.push(l)
                    }
                    (o, z)
                });
            let llr = log_sum_exp(&ones) - log_sum_exp(&zeros);
            if llr.is_nan() {
                0.0
            } else {
                llr.clamp(-LLR_CLIP, LLR_CLIP)
            }
        })
        .collect())
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
