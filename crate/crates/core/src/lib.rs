//! Unified scoring of multi-tool security assessments.
//!
//! Reports from six open-source tools (Lynis, OpenSCAP with a STIG-derived
//! and a CIS profile, AIDE, Tripwire and an nmap vulnerability scan) are
//! parsed into raw metrics, normalized to a common 0-100 scale and combined
//! into a weighted composite. Assessments taken at different hardening
//! levels can be compared tool by tool.
//!
//! ```
//! use uca_core::model::WeightProfile;
//! use uca_core::scoring::{aggregate, supplied_scores};
//!
//! let scores = supplied_scores([59.0, 67.4, 83.4, 82.4, 57.8, 0.0]);
//! let a = aggregate(&scores, &WeightProfile::default(), "baseline").unwrap();
//! assert!((a.composite - 58.34).abs() < 0.01);
//! ```

pub mod analysis;
pub mod config;
pub mod manifest;
pub mod model;
pub mod parsers;
pub mod report;
pub mod runner;
pub mod scoring;
pub mod store;

pub use model::{
    CompositeAssessment, DeltaDecomposition, NormalizedScore, RawToolReport, Severity, ToolKind,
    WeightProfile,
};
