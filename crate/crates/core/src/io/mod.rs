//! Configuration, end-use import, bundled scenarios and report writing.

pub mod config;
pub mod import;
pub mod presets;
pub mod report;
