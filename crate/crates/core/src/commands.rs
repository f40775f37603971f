//! Experiment drivers behind the command-line tool.
//!
//! Everything here is deterministic given its inputs and seed; the binary only
//! parses flags and writes the rendered output.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc::{ChannelFile, ChannelIssue};
use crate::link::{run_coded_ber_per_point, BerRecord, LinkConfig};
use crate::mimo::{build_quantized_mimo, ComplexChannelMatrix, SnrPoint};
use crate::select::bsa::{bsa_select, BsaConfig};
use crate::select::exhaustive::{exhaustive_select, Criterion};
use crate::select::sdp::{sdp_select, RoundingConfig, SdpConfig, SdpSelection};
use crate::{
    blahut_arimoto, cutoff_rate, ser_ml, uniform_subset_rate, DmcChannel, Error, Result,
    SubsetMask, VERSION,
};

/// Iteration cap for Blahut-Arimoto inside the drivers.
pub const BA_MAX_ITER: usize = 1_000_000;

/// First line of every CSV the tool writes.
pub fn csv_header_comment() -> String {
    format!("# dmc-shaper v{VERSION}")
}

/// Parses an SNR list: comma-separated values, each either a number or an
/// inclusive range `start:stop:step`.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let bad = |t: &str| Error::InvalidParameter(format!("cannot parse SNR entry '{t}'"));
    let mut out = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = token.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(v.parse::<f64>().map_err(|_| bad(token))?),
            [a, b, s] => {
                let (a, b, s): (f64, f64, f64) = (
                    a.parse().map_err(|_| bad(token))?,
                    b.parse().map_err(|_| bad(token))?,
                    s.parse().map_err(|_| bad(token))?,
                );
                if !(s > 0.0) || !(b >= a) {
                    return Err(bad(token));
                }
                let steps = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=steps).map(|i| a + i as f64 * s));
            }
            _ => return Err(bad(token)),
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("empty SNR list".into()));
    }
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("SNR {v} is not finite")));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepMethod {
    Sdp,
    Bsa,
    Exhaustive,
    Full,
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMethod::Sdp => "sdp",
            SweepMethod::Bsa => "bsa",
            SweepMethod::Exhaustive => "exhaustive",
            SweepMethod::Full => "full",
        })
    }
}

impl FromStr for SweepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdp" => Ok(SweepMethod::Sdp),
            "bsa" => Ok(SweepMethod::Bsa),
            "exhaustive" => Ok(SweepMethod::Exhaustive),
            "full" => Ok(SweepMethod::Full),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep method '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Ignored when sweeping a fixed channel file.
    pub snr_db: Vec<f64>,
    pub k_list: Vec<usize>,
    pub methods: Vec<SweepMethod>,
    pub seed: u64,
    pub restarts: usize,
    pub n_rand: usize,
    pub ba_tol: f64,
    pub sdp: SdpConfig,
}

impl SweepSpec {
    pub fn new(snr_db: Vec<f64>, k_list: Vec<usize>, methods: Vec<SweepMethod>, seed: u64) -> Self {
        Self {
            snr_db,
            k_list,
            methods,
            seed,
            restarts: 20,
            n_rand: 100,
            ba_tol: 1e-6,
            sdp: SdpConfig::default(),
        }
    }

    /// Checks the spec against a channel with `m` inputs.
    pub fn validate(&self, m: usize, needs_snr: bool) -> Result<()> {
        if needs_snr && self.snr_db.is_empty() {
            return Err(Error::InvalidParameter("SNR list is empty".into()));
        }
        if self.k_list.is_empty() {
            return Err(Error::InvalidParameter("K list is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("method list is empty".into()));
        }
        if let Some(k) = self.k_list.iter().find(|&&k| k < 2 || k > m) {
            return Err(Error::InvalidParameter(format!(
                "K={k} must lie in 2..={m}"
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be positive".into()));
        }
        Ok(())
    }
}

/// Rate, cutoff rate and SER of one (K, method) configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMetrics {
    pub k: usize,
    pub method: SweepMethod,
    pub rate: f64,
    pub cutoff: f64,
    pub ser: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: Option<f64>,
    pub capacity_ba: f64,
    pub rate_uniform_full: f64,
    pub subsets: Vec<SubsetMetrics>,
}

impl SweepRow {
    pub fn get(&self, k: usize, method: SweepMethod) -> Option<&SubsetMetrics> {
        self.subsets.iter().find(|s| s.k == k && s.method == method)
    }
}

fn metrics_of(
    ch: &DmcChannel,
    mask: &SubsetMask,
    k: usize,
    method: SweepMethod,
) -> Result<SubsetMetrics> {
    Ok(SubsetMetrics {
        k,
        method,
        rate: uniform_subset_rate(ch, mask)?,
        cutoff: cutoff_rate(ch, mask)?,
        ser: ser_ml(ch, mask)?,
    })
}

/// Evaluates every (K, method) pair of `spec` on one channel.
///
/// `exhaustive` reports each column's own optimum (best rate, best cutoff
/// rate, lowest SER), `full` reports the full input set whatever K is.
pub fn sweep_point(ch: &DmcChannel, snr_db: Option<f64>, spec: &SweepSpec) -> Result<SweepRow> {
    let m = ch.num_inputs();
    let full = SubsetMask::full(m)?;
    let capacity = blahut_arimoto(ch, spec.ba_tol, BA_MAX_ITER)?;
    let mut subsets = Vec::new();
    for &k in &spec.k_list {
        for &method in &spec.methods {
            let metrics = match method {
                SweepMethod::Full => metrics_of(ch, &full, k, method)?,
                SweepMethod::Sdp => {
                    let sel = select_sdp(ch, k, spec.n_rand, spec.seed, &spec.sdp)?;
                    metrics_of(ch, &sel.mask, k, method)?
                }
                SweepMethod::Bsa if k == m => metrics_of(ch, &full, k, method)?,
                SweepMethod::Bsa => {
                    let cfg = BsaConfig::new(k)
                        .with_restarts(spec.restarts)
                        .with_seed(spec.seed);
                    metrics_of(ch, &bsa_select(ch, &cfg)?.mask, k, method)?
                }
                SweepMethod::Exhaustive => SubsetMetrics {
                    k,
                    method,
                    rate: exhaustive_select(ch, k, Criterion::Rate)?.1,
                    cutoff: exhaustive_select(ch, k, Criterion::Cutoff)?.1,
                    ser: exhaustive_select(ch, k, Criterion::Ser)?.1,
                },
            };
            subsets.push(metrics);
        }
    }
    Ok(SweepRow {
        snr_db,
        capacity_ba: capacity.bits,
        rate_uniform_full: uniform_subset_rate(ch, &full)?,
        subsets,
    })
}

/// SDP selection with randomized rounding seeded by `seed`.
pub fn select_sdp(
    ch: &DmcChannel,
    k: usize,
    n_rand: usize,
    seed: u64,
    sdp: &SdpConfig,
) -> Result<SdpSelection> {
    let rounding = RoundingConfig {
        n_rand,
        seed,
        ..RoundingConfig::default()
    };
    sdp_select(ch, k, sdp, &rounding)
}

/// Sweeps the quantized MIMO channel of `h` over `spec.snr_db`. Points run in
/// parallel; rows come back in input order.
pub fn run_sweep_mimo(h: &ComplexChannelMatrix, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate(1usize << (2 * h.n_tx()), true)?;
    spec.snr_db
        .par_iter()
        .map(|&db| {
            let ch = build_quantized_mimo(h, SnrPoint::from_db(db)?)?;
            sweep_point(&ch, Some(db), spec)
        })
        .collect()
}

/// Single-row sweep of a fixed channel.
pub fn run_sweep_channel(ch: &DmcChannel, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate(ch.num_inputs(), false)?;
    Ok(vec![sweep_point(ch, None, spec)?])
}

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders sweep rows; the per-config blocks follow the order of `spec`.
pub fn sweep_csv(rows: &[SweepRow], spec: &SweepSpec) -> String {
    let mut out = csv_header_comment();
    out.push('\n');
    let mut header = vec![
        "snr_db".to_string(),
        "capacity_ba".into(),
        "rate_uniform_full".into(),
    ];
    for &k in &spec.k_list {
        for &method in &spec.methods {
            for col in ["rate", "cutoff", "ser"] {
                header.push(format!("k{k}_{method}_{col}"));
            }
        }
    }
    push_row(&mut out, &header);
    for row in rows {
        let mut fields = vec![
            opt_num(row.snr_db),
            row.capacity_ba.to_string(),
            row.rate_uniform_full.to_string(),
        ];
        for s in &row.subsets {
            fields.extend([s.rate.to_string(), s.cutoff.to_string(), s.ser.to_string()]);
        }
        push_row(&mut out, &fields);
    }
    out
}

/// Structural problems of a channel file's text. Malformed JSON is an error.
pub fn validate_channel_text(text: &str) -> Result<Vec<ChannelIssue>> {
    let file: ChannelFile = serde_json::from_str(text)?;
    Ok(file.issues())
}

pub fn validate_channel_file(path: impl AsRef<Path>) -> Result<Vec<ChannelIssue>> {
    validate_channel_text(&std::fs::read_to_string(path)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MaskText {
    List(Vec<usize>),
    Object { mask: Vec<usize> },
}

/// Parses a subset for a channel with `m` inputs: either a JSON index list or
/// any object with a `mask` index list (such as `select` output).
pub fn parse_mask(text: &str, m: usize) -> Result<SubsetMask> {
    let indices = match serde_json::from_str::<MaskText>(text)? {
        MaskText::List(v) | MaskText::Object { mask: v } => v,
    };
    SubsetMask::from_indices(m, &indices)
}

pub fn load_mask(path: impl AsRef<Path>, m: usize) -> Result<SubsetMask> {
    parse_mask(&std::fs::read_to_string(path)?, m)
}

#[derive(Debug, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SdpReport {
    pub mask: Vec<usize>,
    pub cutoff_rate_bits: f64,
    pub sdp_objective: f64,
    pub cutoff_rate_bound_bits: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub converged: bool,
    pub solver: String,
}

impl SdpReport {
    pub fn new(sel: &SdpSelection, cfg: &SdpConfig) -> Self {
        Self {
            mask: sel.mask.indices(),
            cutoff_rate_bits: sel.cutoff_rate_bits,
            sdp_objective: sel.sdp_objective,
            cutoff_rate_bound_bits: sel.cutoff_rate_bound_bits,
            residuals: Residuals {
                primal: sel.primal_residual,
                dual: sel.dual_residual,
                gap: sel.duality_gap,
            },
            iterations: sel.iterations,
            converged: sel.converged,
            solver: cfg.method.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BsaReport {
    pub mask: Vec<usize>,
    pub ser: f64,
    pub truncated: bool,
    pub best_restart: usize,
}

#[derive(Debug, Serialize)]
pub struct ExhaustiveReport {
    pub mask: Vec<usize>,
    pub criterion: String,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct CapacityReport {
    pub capacity_bits: f64,
    pub upper_bits: f64,
    pub iterations: usize,
    pub distribution: Vec<f64>,
}

/// Which inputs the coded link transmits from.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskChoice {
    Full,
    Fixed(SubsetMask),
    /// SDP selection of `k` inputs, redone at every SNR point.
    SelectSdp {
        k: usize,
        n_rand: usize,
        seed: u64,
    },
}

/// Coded BER sweep with subsets chosen per `choice`.
pub fn coded_ber(
    h: &ComplexChannelMatrix,
    choice: &MaskChoice,
    snr_db: &[f64],
    cfg: &LinkConfig,
    seeds: &[u64],
) -> Result<Vec<BerRecord>> {
    let m = 1usize << (2 * h.n_tx());
    let masks = match choice {
        MaskChoice::Full => vec![SubsetMask::full(m)?; snr_db.len()],
        MaskChoice::Fixed(mask) => vec![mask.clone(); snr_db.len()],
        MaskChoice::SelectSdp { k, n_rand, seed } => snr_db
            .iter()
            .map(|&db| {
                let ch = build_quantized_mimo(h, SnrPoint::from_db(db)?)?;
                Ok(select_sdp(&ch, *k, *n_rand, *seed, &SdpConfig::default())?.mask)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    run_coded_ber_per_point(h, &masks, snr_db, cfg, seeds)
}

/// Renders coded BER records. Pooled records carry `pooled` in the seed
/// column.
pub fn coded_ber_csv(records: &[BerRecord], choice: &MaskChoice) -> String {
    let mut out = csv_header_comment();
    out.push('\n');
    let subsets = match choice {
        MaskChoice::Full => "full input set".to_string(),
        MaskChoice::Fixed(mask) => format!("fixed subset of {} inputs", mask.k()),
        MaskChoice::SelectSdp { k, .. } => format!("SDP-selected subset of {k} inputs per SNR"),
    };
    let _ = writeln!(
        out,
        "# labeling: natural binary over sorted input indices; {subsets}"
    );
    push_row(
        &mut out,
        &[
            "snr_db",
            "k",
            "code_rate",
            "frames",
            "bit_errors",
            "ber",
            "seed",
            "bits_sent",
            "frame_errors",
        ]
        .map(String::from),
    );
    for r in records {
        push_row(
            &mut out,
            &[
                r.snr_db.to_string(),
                r.k.to_string(),
                r.code_rate.to_string(),
                r.frames.to_string(),
                r.bit_errors.to_string(),
                r.ber.to_string(),
                r.seed
                    .map_or_else(|| "pooled".to_string(), |s| s.to_string()),
                r.bits_sent.to_string(),
                r.frame_errors.to_string(),
            ],
        );
    }
    out
}
