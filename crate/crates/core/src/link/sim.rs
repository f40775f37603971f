//! Monte-Carlo BER of the coded link.
//!
//! Per frame: draw a message, encode, map `log2 K` code bits per channel use,
//! pass each use through the noisy one-bit MIMO receiver, turn every output
//! into bit LLRs, decode with belief propagation and count message-bit errors.
//! Frame `f` at SNR point `s` draws from the stream `(seed, s, f)`, and frames
//! are simulated in batches whose results are folded in frame order, so counts
//! do not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;

use super::{bp_decode, build_ldpc, compute_llrs, map_bits, LdpcCode, SymbolLabeling};
use crate::dmc::{DmcChannel, SubsetMask};
use crate::mimo::{
    build_quantized_mimo, enumerate_qpsk_inputs, sample_receive, ComplexChannelMatrix, SnrPoint,
};
use crate::{Error, Result};

const BATCH: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Codeword length.
    pub n: usize,
    /// Information bits per channel use; the code rate is this over `log2 K`.
    pub total_rate: f64,
    pub col_weight: usize,
    pub bp_max_iter: usize,
    pub min_frame_errors: usize,
    pub max_frames: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            n: 250,
            total_rate: 2.5,
            col_weight: 3,
            bp_max_iter: 100,
            min_frame_errors: 50,
            max_frames: 1_000_000,
        }
    }
}

/// Error counts at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    /// Subset size `K`.
    pub k: usize,
    pub code_rate: f64,
    /// Code seed, or `None` for the pooled average over all seeds.
    pub seed: Option<u64>,
    pub frames: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
}

impl BerRecord {
    fn new(snr_db: f64, k: usize, code_rate: f64, seed: Option<u64>) -> Self {
        Self {
            snr_db,
            k,
            code_rate,
            seed,
            frames: 0,
            bits_sent: 0,
            bit_errors: 0,
            frame_errors: 0,
            ber: 0.0,
        }
    }

    fn absorb(&mut self, frames: u64, bits_sent: u64, bit_errors: u64, frame_errors: u64) {
        self.frames += frames;
        self.bits_sent += bits_sent;
        self.bit_errors += bit_errors;
        self.frame_errors += frame_errors;
        self.ber = if self.bits_sent == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits_sent as f64
        };
    }
}

/// Everything needed to simulate frames at one SNR with one code.
pub struct CodedLink<'a> {
    h: &'a ComplexChannelMatrix,
    code: &'a LdpcCode,
    labeling: &'a SymbolLabeling,
    inputs: &'a [Vec<num_complex::Complex64>],
    snr: SnrPoint,
    /// `llr_table[y]`: bit LLRs of output `y`.
    llr_table: Vec<Vec<f64>>,
    bp_max_iter: usize,
}

impl<'a> CodedLink<'a> {
    pub fn new(
        h: &'a ComplexChannelMatrix,
        channel: &DmcChannel,
        code: &'a LdpcCode,
        labeling: &'a SymbolLabeling,
        inputs: &'a [Vec<num_complex::Complex64>],
        snr: SnrPoint,
        bp_max_iter: usize,
    ) -> Result<Self> {
        let llr_table = (0..channel.num_outputs())
            .map(|y| compute_llrs(channel, labeling, y))
            .collect::<Result<_>>()?;
        Ok(Self {
            h,
            code,
            labeling,
            inputs,
            snr,
            llr_table,
            bp_max_iter,
        })
    }

    /// Simulates one frame and returns its message-bit error count.
    pub fn frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let message: Vec<u8> = (0..self.code.k())
            .map(|_| u8::from(rng.random::<bool>()))
            .collect();
        let codeword = self.code.encode(&message)?;
        let (symbols, _pad) = map_bits(&codeword, self.labeling);
        let mut llrs = Vec::with_capacity(symbols.len() * self.labeling.bits_per_symbol());
        for &x in &symbols {
            let y = sample_receive(self.h, &self.inputs[x], self.snr, rng);
            llrs.extend_from_slice(&self.llr_table[y]);
        }
        llrs.truncate(self.code.n());
        let decoded = bp_decode(self.code, &llrs, self.bp_max_iter)?;
        let errors = self
            .code
            .info_positions()
            .iter()
            .zip(&message)
            .filter(|(&pos, &bit)| decoded.bits[pos] != bit)
            .count();
        Ok(errors as u64)
    }
}

/// Coded BER of subset `mask` (all `4^T` inputs when `None`) over `snr_db`.
///
/// One code is drawn per entry of `seeds`; frames for that code use the same
/// seed. The result holds one record per (SNR, seed) followed, when more than
/// one seed is given, by a pooled record per SNR.
pub fn run_coded_ber(
    h: &ComplexChannelMatrix,
    mask: Option<&SubsetMask>,
    snr_db: &[f64],
    cfg: &LinkConfig,
    seeds: &[u64],
) -> Result<Vec<BerRecord>> {
    let mask = match mask {
        Some(m) => m.clone(),
        None => SubsetMask::full(1usize << (2 * h.n_tx()))?,
    };
    run_coded_ber_per_point(h, &vec![mask; snr_db.len()], snr_db, cfg, seeds)
}

/// As [`run_coded_ber`] with a separate subset for every SNR point.
///
/// All masks must select the same number of inputs, so one code per seed
/// serves the whole sweep.
pub fn run_coded_ber_per_point(
    h: &ComplexChannelMatrix,
    masks: &[SubsetMask],
    snr_db: &[f64],
    cfg: &LinkConfig,
    seeds: &[u64],
) -> Result<Vec<BerRecord>> {
    let inputs = enumerate_qpsk_inputs(h.n_tx())?;
    if masks.len() != snr_db.len() {
        return Err(Error::DimensionMismatch {
            expected: snr_db.len(),
            got: masks.len(),
        });
    }
    if let Some(bad) = masks.iter().find(|m| m.len() != inputs.len()) {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: bad.len(),
        });
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one seed is needed".into(),
        ));
    }
    let Some(first) = masks.first() else {
        return Ok(Vec::new());
    };
    let k = first.k();
    if masks.iter().any(|m| m.k() != k) {
        return Err(Error::InvalidParameter(
            "all per-point subsets must have the same size".into(),
        ));
    }
    let labelings = masks
        .iter()
        .map(|m| SymbolLabeling::new(m.clone()))
        .collect::<Result<Vec<_>>>()?;
    let bits = labelings[0].bits_per_symbol();
    let code_rate = cfg.total_rate / bits as f64;
    if !(code_rate > 0.0 && code_rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "total rate {} over {bits} bits per use gives code rate {code_rate}",
            cfg.total_rate
        )));
    }
    let codes = seeds
        .iter()
        .map(|&s| build_ldpc(cfg.n, code_rate, cfg.col_weight, s))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for (point, (&db, labeling)) in snr_db.iter().zip(&labelings).enumerate() {
        let snr = SnrPoint::from_db(db)?;
        let channel = build_quantized_mimo(h, snr)?;
        let mut pooled = BerRecord::new(db, k, code_rate, None);
        for (&seed, code) in seeds.iter().zip(&codes) {
            let link = CodedLink::new(h, &channel, code, labeling, &inputs, snr, cfg.bp_max_iter)?;
            let rec = simulate_point(&link, cfg, seed, point as u64, db, k, code_rate)?;
            pooled.absorb(rec.frames, rec.bits_sent, rec.bit_errors, rec.frame_errors);
            records.push(rec);
        }
        if seeds.len() > 1 {
            records.push(pooled);
        }
    }
    Ok(records)
}

fn simulate_point(
    link: &CodedLink<'_>,
    cfg: &LinkConfig,
    seed: u64,
    point: u64,
    snr_db: f64,
    k: usize,
    code_rate: f64,
) -> Result<BerRecord> {
    let info_bits = link.code.k() as u64;
    let mut rec = BerRecord::new(snr_db, k, code_rate, Some(seed));
    let mut next = 0usize;
    'outer: while next < cfg.max_frames {
        let end = (next + BATCH).min(cfg.max_frames);
        let errors: Vec<u64> = (next..end)
            .into_par_iter()
            .map(|f| link.frame(&mut crate::rng::substream(seed, point, f as u64)))
            .collect::<Result<_>>()?;
        for e in errors {
            rec.absorb(1, info_bits, e, u64::from(e > 0));
            if rec.frame_errors as usize >= cfg.min_frame_errors {
                break 'outer;
            }
        }
        next = end;
    }
    Ok(rec)
}

/// Empirical ML symbol error rate of uncoded transmission over `mask`:
/// uniform symbols, noisy receiver, detection by the largest `P(y|x)` within
/// the subset (smallest index on ties).
pub fn simulate_uncoded_ser(
    h: &ComplexChannelMatrix,
    channel: &DmcChannel,
    mask: &SubsetMask,
    snr: SnrPoint,
    uses: usize,
    seed: u64,
) -> Result<f64> {
    mask.check_against(channel)?;
    let inputs = enumerate_qpsk_inputs(h.n_tx())?;
    let selected = mask.indices();
    let decide: Vec<usize> = (0..channel.num_outputs())
        .map(|y| {
            let mut best = selected[0];
            for &x in &selected[1..] {
                if channel.prob(x, y) > channel.prob(best, y) {
                    best = x;
                }
            }
            best
        })
        .collect();
    let mut rng = crate::rng::stream(seed, 0);
    let errors = (0..uses)
        .filter(|_| {
            let x = selected[rng.random_range(0..selected.len())];
            let y = sample_receive(h, &inputs[x], snr, &mut rng);
            decide[y] != x
        })
        .count();
    Ok(errors as f64 / uses as f64)
}
