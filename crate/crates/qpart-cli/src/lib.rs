//! Command-line companion to `qpart-core`: JSON and CSV file formats,
//! thread-parallel sampling, and the verification suites behind
//! `qpart verify`.
//!
//! Everything here that matters for correctness lives in the library so the
//! binary stays a thin argument parser. Outputs are deterministic: reports
//! serialize with sorted keys, sampling is chunk-seeded, and rerunning any
//! command reproduces its output byte for byte.

pub mod io;
pub mod mc;
pub mod verify;
