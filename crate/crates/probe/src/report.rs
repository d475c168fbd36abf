use std::path::Path;

use serde::{Deserialize, Serialize};

use feature_probe_core::planner::{ParamsEcho, StrideProfile};
use feature_probe_core::validation::SpearmanReport;

use crate::error::{ProbeError, Result};

pub const TOOLKIT: &str = "feature-probe";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One encoder on one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageProfile {
    pub manifest: String,
    pub profile: StrideProfile,
}

/// Supervised counterpart of SC for one stride of one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScGtRow {
    pub encoder_id: String,
    pub manifest: String,
    pub stride: u32,
    pub sc: f64,
    pub sc_gt: f64,
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub toolkit: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub params: ParamsEcho,
    pub profiles: Vec<StrideProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_image: Vec<ImageProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sc_gt: Vec<ScGtRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub toolkit: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sc_gt: Vec<ScGtRow>,
    /// Spearman of SC against SC_GT over all rows, when there are enough.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sc_vs_sc_gt: Option<SpearmanReport>,
    /// Spearman over caller-supplied (metric, outcome) pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<SpearmanReport>,
}

/// Reads the profiles accepted by `plan`: a full report, a bare list, or a single profile.
pub fn read_profiles(path: &Path) -> Result<Vec<StrideProfile>> {
    let text = std::fs::read_to_string(path).map_err(|e| ProbeError::io(path, e))?;
    let bad = |e: serde_json::Error| ProbeError::BadFile {
        path: path.to_path_buf(),
        message: format!("not a report, profile list or profile: {e}"),
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
    if value.is_array() {
        serde_json::from_value(value).map_err(bad)
    } else if value.get("profiles").is_some() {
        Ok(serde_json::from_value::<AssessmentReport>(value).map_err(bad)?.profiles)
    } else {
        Ok(vec![serde_json::from_value(value).map_err(bad)?])
    }
}
