//! File formats, experiment sweeps and the `minrank-ic` command line on top of
//! [`minrank_core`].

pub mod cli;
pub mod format;
pub mod sweep;
