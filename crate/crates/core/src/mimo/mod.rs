//! QPSK MIMO link with a one-bit (sign) quantizer on every real and imaginary
//! receive component, viewed as a discrete memoryless channel.
//!
//! Inputs are indexed by base-4 digits, transmit antenna 1 most significant;
//! digit `d` maps to `{(+1+j), (+1-j), (-1+j), (-1-j)}[d] / sqrt(2T)` so every
//! input vector has unit energy. Outputs are indexed by `2N` sign bits: the
//! component `(i, c)` (receive antenna `i`, 0-based, `c = 0` for the real part
//! and `1` for the imaginary part) sits at bit `2i + c`, and the bit is set iff
//! the quantized value is `+1`.

mod normal;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use normal::{log_norm_cdf, norm_cdf};

use crate::dmc::DmcChannel;
use crate::{Error, Result};

/// Largest input or output alphabet [`build_quantized_mimo`] accepts.
pub const DEFAULT_ALPHABET_CAP: usize = 1 << 16;

const PAPER_H_JSON: &str = include_str!("../../assets/paper_h.json");

/// Complex `N x T` channel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannelMatrix {
    n_rx: usize,
    n_tx: usize,
    entries: Vec<Complex64>,
}

/// JSON layout `{"re": [[...]], "im": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelMatrixFile {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexChannelMatrix {
    pub fn new(n_rx: usize, n_tx: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n_rx == 0 || n_tx == 0 {
            return Err(Error::InvalidParameter(format!(
                "channel matrix must be at least 1x1, got {n_rx}x{n_tx}"
            )));
        }
        if entries.len() != n_rx * n_tx {
            return Err(Error::DimensionMismatch {
                expected: n_rx * n_tx,
                got: entries.len(),
            });
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter(
                "channel matrix has non-finite entries".into(),
            ));
        }
        Ok(Self {
            n_rx,
            n_tx,
            entries,
        })
    }

    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n_rx = re.len();
        let n_tx = re.first().map_or(0, Vec::len);
        if im.len() != n_rx {
            return Err(Error::DimensionMismatch {
                expected: n_rx,
                got: im.len(),
            });
        }
        let mut entries = Vec::with_capacity(n_rx * n_tx);
        for (r, (re_row, im_row)) in re.iter().zip(im).enumerate() {
            if re_row.len() != n_tx || im_row.len() != n_tx {
                return Err(Error::InvalidParameter(format!(
                    "channel matrix row {r} does not have {n_tx} columns"
                )));
            }
            entries.extend(
                re_row
                    .iter()
                    .zip(im_row)
                    .map(|(&a, &b)| Complex64::new(a, b)),
            );
        }
        Self::new(n_rx, n_tx, entries)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelMatrixFile = serde_json::from_str(text)?;
        Self::from_parts(&file.re, &file.im)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> ChannelMatrixFile {
        let rows = |f: fn(&Complex64) -> f64| {
            self.entries
                .chunks_exact(self.n_tx)
                .map(|row| row.iter().map(f).collect())
                .collect()
        };
        ChannelMatrixFile {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// Number of receive antennas `N`.
    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    /// Number of transmit antennas `T`.
    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn get(&self, rx: usize, tx: usize) -> Complex64 {
        self.entries[rx * self.n_tx + tx]
    }

    /// `H x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.entries
            .chunks_exact(self.n_tx)
            .map(|row| row.iter().zip(x).map(|(h, v)| h * v).sum())
            .collect()
    }

    pub fn neg(&self) -> Self {
        Self {
            n_rx: self.n_rx,
            n_tx: self.n_tx,
            entries: self.entries.iter().map(|z| -z).collect(),
        }
    }

    /// Matrix with i.i.d. standard complex Gaussian entries.
    pub fn random<R: Rng + ?Sized>(n_rx: usize, n_tx: usize, rng: &mut R) -> Result<Self> {
        let entries = (0..n_rx * n_tx)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        Self::new(n_rx, n_tx, entries)
    }
}

/// The fixed 4x4 example matrix used throughout the experiments.
pub fn paper_channel_matrix() -> ComplexChannelMatrix {
    ComplexChannelMatrix::from_json(PAPER_H_JSON).expect("bundled channel matrix is valid")
}

/// Transmit power over noise variance, `P_Tr / sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    linear: f64,
    db: f64,
}

impl SnrPoint {
    pub fn from_db(db: f64) -> Result<Self> {
        let linear = 10f64.powf(db / 10.0);
        if !db.is_finite() || !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "SNR {db} dB is not usable"
            )));
        }
        Ok(Self { linear, db })
    }

    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "SNR {linear} must be positive"
            )));
        }
        Ok(Self {
            linear,
            db: 10.0 * linear.log10(),
        })
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    pub fn db(&self) -> f64 {
        self.db
    }
}

/// All `4^T` unit-energy QPSK input vectors, in input-index order.
pub fn enumerate_qpsk_inputs(n_tx: usize) -> Result<Vec<Vec<Complex64>>> {
    if !(1..=8).contains(&n_tx) {
        return Err(Error::InvalidParameter(format!(
            "QPSK enumeration supports 1..=8 transmit antennas, got {n_tx}"
        )));
    }
    let scale = 1.0 / (2.0 * n_tx as f64).sqrt();
    let points = [
        Complex64::new(scale, scale),
        Complex64::new(scale, -scale),
        Complex64::new(-scale, scale),
        Complex64::new(-scale, -scale),
    ];
    let m = 1usize << (2 * n_tx);
    Ok((0..m)
        .map(|index| {
            (0..n_tx)
                .map(|antenna| {
                    let shift = 2 * (n_tx - 1 - antenna);
                    points[(index >> shift) & 3]
                })
                .collect()
        })
        .collect())
}

/// Output index of the sign pattern of `r` (non-negative counts as `+1`).
pub fn sign_pattern_index(r: &[Complex64]) -> usize {
    r.iter().enumerate().fold(0, |acc, (i, z)| {
        let re = usize::from(z.re >= 0.0) << (2 * i);
        let im = usize::from(z.im >= 0.0) << (2 * i + 1);
        acc | re | im
    })
}

/// The quantized MIMO transition matrix at `snr`, with alphabets up to
/// [`DEFAULT_ALPHABET_CAP`].
pub fn build_quantized_mimo(h: &ComplexChannelMatrix, snr: SnrPoint) -> Result<DmcChannel> {
    build_quantized_mimo_capped(h, snr, DEFAULT_ALPHABET_CAP)
}

/// As [`build_quantized_mimo`] with an explicit alphabet-size cap.
///
/// `ln P(y|x) = sum_{i,c} ln Phi(sqrt(2 P_Tr/sigma^2) y_{c,i} [Hx]_{c,i})`,
/// evaluated in the log domain and exponentiated once.
pub fn build_quantized_mimo_capped(
    h: &ComplexChannelMatrix,
    snr: SnrPoint,
    cap: usize,
) -> Result<DmcChannel> {
    let too_big = |antennas: usize| antennas > 8 || (1usize << (2 * antennas)) > cap;
    if too_big(h.n_tx()) || too_big(h.n_rx()) {
        return Err(Error::InvalidParameter(format!(
            "a {}x{} quantized MIMO channel exceeds the alphabet cap {cap}",
            h.n_rx(),
            h.n_tx()
        )));
    }
    let inputs = enumerate_qpsk_inputs(h.n_tx())?;
    let components = 2 * h.n_rx();
    let num_outputs = 1usize << components;
    let gain = (2.0 * snr.linear()).sqrt();

    let rows: Vec<Vec<f64>> = inputs
        .par_iter()
        .map(|x| {
            let hx = h.apply(x);
            // (ln Phi(-g a), ln Phi(+g a)) per component, indexed by the sign bit
            let factors: Vec<[f64; 2]> = hx
                .iter()
                .flat_map(|z| [z.re, z.im])
                .map(|a| [log_norm_cdf(-gain * a), log_norm_cdf(gain * a)])
                .collect();
            (0..num_outputs)
                .map(|y| {
                    (0..components)
                        .map(|bit| factors[bit][(y >> bit) & 1])
                        .sum()
                })
                .collect()
        })
        .collect();
    DmcChannel::from_log_flat(inputs.len(), num_outputs, rows.concat())
}

/// Draws one quantized receive vector for input `x` and returns its output
/// index.
///
/// The noise variance is normalized to one (`sigma^2/2` per real dimension)
/// and the signal scaled by `sqrt(P_Tr)`.
pub fn sample_receive<R: Rng + ?Sized>(
    h: &ComplexChannelMatrix,
    x: &[Complex64],
    snr: SnrPoint,
    rng: &mut R,
) -> usize {
    let amplitude = snr.linear().sqrt();
    let noise_std = std::f64::consts::FRAC_1_SQRT_2;
    let r: Vec<Complex64> = h
        .apply(x)
        .into_iter()
        .map(|z| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            z * amplitude + Complex64::new(re, im) * noise_std
        })
        .collect();
    sign_pattern_index(&r)
}

/// [`sample_receive`] on the stream `(seed, draw)`.
pub fn sample_receive_seeded(
    h: &ComplexChannelMatrix,
    x: &[Complex64],
    snr: SnrPoint,
    seed: u64,
    draw: u64,
) -> usize {
    sample_receive(h, x, snr, &mut crate::rng::stream(seed, draw))
}
