//! Domain types shared across parsing, scoring, analysis and storage.

mod assessment;
mod report;
mod tool;
mod weights;

pub use assessment::{CompositeAssessment, DeltaDecomposition};
pub use report::{
    AideReport, LynisReport, NormalizedScore, RawToolReport, ScapReport, TripwireReport,
    VulnFinding, VulnReport,
};
pub use tool::{ScapProfile, Severity, ToolKind, UnknownTool};
pub use weights::{
    default_severity_weights, default_tool_weights, WeightError, WeightProfile,
    WEIGHT_SUM_TOLERANCE,
};
