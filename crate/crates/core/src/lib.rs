//! minifl: a spectrum-based fault-localization workbench for MiniLang.
//!
//! The pipeline: run a program's embedded test suite under a tracing
//! interpreter, build a coverage spectrum, score statements with one of six
//! suspiciousness metrics, then optionally purify the failing tests
//! (atomization + dynamic backward slicing) and refine the ranking with the
//! purified coverage. A mutation-based harness measures how much wasted
//! inspection effort the refinement saves.

pub mod config;
pub mod frontend;
pub mod interpreter;
pub mod mutation;
pub mod pipeline;
pub mod purification;
pub mod ranking;
pub mod report;
pub mod spectra;
