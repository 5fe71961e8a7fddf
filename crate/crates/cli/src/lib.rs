//! Experiment harness around the core library: run configuration, the five
//! experiment drivers, and deterministic artifact emission (CSV tables, SVG
//! plots, JSON summaries).

pub mod config;
pub mod experiments;
pub mod output;
