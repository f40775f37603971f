//! Information rates of discrete memoryless channels and selection of
//! uniformly used input subsets.
//!
//! The crate is organised by subsystem:
//!
//! * [`dmc`] holds the channel model and the information functionals
//!   (mutual information, ML symbol error rate, cutoff rate, Blahut-Arimoto).
//! * [`mimo`] builds the channel induced by QPSK signalling over a MIMO link
//!   whose receiver keeps only the sign of each real and imaginary component.
//! * [`select`] picks input subsets: binary switching for the error rate,
//!   semidefinite relaxation with randomized rounding for the cutoff rate, and
//!   exhaustive search as a small-scale reference.
//! * [`link`] runs LDPC-coded Monte-Carlo simulations over a selected subset.
//! * [`commands`] glues the above into the experiments exposed by the
//!   `dmc-shaper` binary.

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod dmc;
mod error;
pub mod link;
pub mod mimo;
pub mod rng;
pub mod select;

pub use error::{Error, Result};

pub use dmc::{
    blahut_arimoto, cutoff_rate, mutual_information, per_symbol_misdetect, restrict, ser_ml,
    uniform_subset_rate, Capacity, DmcChannel, InputDistribution, SubsetMask,
};
pub use link::{
    bp_decode, build_ldpc, compute_llrs, map_bits, run_coded_ber, run_coded_ber_per_point,
    BerRecord, LdpcCode, LinkConfig, SymbolLabeling,
};
pub use mimo::{
    build_quantized_mimo, enumerate_qpsk_inputs, paper_channel_matrix, sample_receive,
    ComplexChannelMatrix, SnrPoint,
};
pub use select::bsa::{bsa_select, BsaConfig, BsaOutcome};
pub use select::exhaustive::{exhaustive_select, Criterion};
pub use select::sdp::{
    build_gram, embed, psd_factorize, round_solution, sdp_select, solve_sdp, GramMatrix,
    RoundingConfig, RoundingMethod, SdpConfig, SdpMethod, SdpSelection, SdpSolution,
};

/// Version tag written into CSV headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
