//! File formats, heatmaps and subcommands behind the `ssc` binary.

pub mod commands;
pub mod format;
pub mod svg;
