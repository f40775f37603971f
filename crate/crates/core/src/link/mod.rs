//! LDPC-coded transmission over a selected input subset.

mod bp;
mod labeling;
mod ldpc;
mod sim;

pub use bp::{bp_decode, BpOutcome};
pub use labeling::{compute_llrs, demap_symbols, map_bits, SymbolLabeling, LLR_CLIP};
pub use ldpc::{build_ldpc, four_cycles, LdpcCode};
pub use sim::{
    run_coded_ber, run_coded_ber_per_point, simulate_uncoded_ser, BerRecord, CodedLink, LinkConfig,
};
