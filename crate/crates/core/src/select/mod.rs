//! Input subset selection.

pub mod bsa;
pub mod exhaustive;
pub mod sdp;
