//! IO layer of the saddle-solution laboratory: JSON archives and reports,
//! CSV and whitespace plot files, and the batch command implementations
//! behind the `saddle` binary.
//!
//! Archives are deterministic: fields are declared in sorted key order,
//! floats use the shortest round-trip formatting, and every randomized run
//! stores its seed, so re-running a command on the same inputs produces
//! byte-identical files.

pub mod archive;
pub mod commands;
pub mod config;

pub use archive::{CertificateReport, SolutionArchive, SpectrumReport, VerdictReport};
pub use config::FileConfig;
