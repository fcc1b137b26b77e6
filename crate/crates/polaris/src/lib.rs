//! File formats, corpus generation, reports and the command-line front end
//! for `polaris-core`.

pub mod cli;
pub mod config;
pub mod datagen;
pub mod io;
pub mod report;
pub mod trace_format;
