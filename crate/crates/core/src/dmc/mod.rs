//! Discrete memoryless channels and their information functionals.

mod capacity;
mod channel;
mod measures;
#[cfg(test)]
pub(crate) mod testing;

pub use capacity::{blahut_arimoto, Capacity};
pub use channel::{
    ChannelFile, ChannelIssue, DmcChannel, InputDistribution, SubsetMask, PROB_FLOOR, ROW_SUM_TOL,
};
#[cfg(test)]
pub(crate) use measures::bhattacharyya_mass;
pub(crate) use measures::{cutoff_of, ser_of, subset_rate_of};
pub use measures::{
    cutoff_rate, mutual_information, per_symbol_misdetect, restrict, ser_ml, uniform_subset_rate,
};
