//! IoT security & privacy label and dataset nutrition label.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::document::parse_document;
use crate::error::Result;
use crate::findings::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    Camera,
    Microphone,
    Imu,
    Other(String),
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensorKind::Camera => f.write_str("camera"),
            SensorKind::Microphone => f.write_str("microphone"),
            SensorKind::Imu => f.write_str("IMU"),
            SensorKind::Other(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    Continuous,
    OnTrigger,
    Never,
}

impl fmt::Display for Collection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Collection::Continuous => "continuous",
            Collection::OnTrigger => "on trigger",
            Collection::Never => "never",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorPresence {
    pub kind: SensorKind,
    pub collection: Collection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    None,
    OtaAutomatic,
    OtaUserApproved,
}

impl fmt::Display for UpdateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateMode::None => "not updateable",
            UpdateMode::OtaAutomatic => "over-the-air, automatic",
            UpdateMode::OtaUserApproved => "over-the-air, after user approval",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelUpdateability {
    pub mode: UpdateMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<String>,
}

/// Two-layer IoT security & privacy label. Both layers live in one value;
/// the renderer decides which fields go on which layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyLabel {
    pub sensors_present: Vec<SensorPresence>,
    pub data_stored_on_device: bool,
    pub data_transmitted_off_device: bool,
    pub security_mechanisms: Vec<String>,
    pub model_updateability: ModelUpdateability,
    pub secondary_layer_url: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceCategory {
    Governmental,
    Commercial,
    Academic,
    Mixed,
}

impl fmt::Display for SourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceCategory::Governmental => "governmental",
            SourceCategory::Commercial => "commercial",
            SourceCategory::Academic => "academic",
            SourceCategory::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Image,
    Audio,
    Timeseries,
    Text,
    Other(String),
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Image => f.write_str("image"),
            Modality::Audio => f.write_str("audio"),
            Modality::Timeseries => f.write_str("time series"),
            Modality::Text => f.write_str("text"),
            Modality::Other(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NutritionLabel {
    pub dataset_name: String,
    pub upstream_sources: Vec<String>,
    pub source_category: SourceCategory,
    pub license: String,
    pub modality: Modality,
    pub human_labeled: bool,
    pub contains_human_data: bool,
    /// Absent means "not applicable / not stated"; `Some(false)` asserts the
    /// data was collected without consent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consent_obtained: Option<bool>,
    pub actively_managed: bool,
}

/// Badge flags shown in the label summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub from_upstream_source: bool,
    pub human_data: bool,
    pub no_consent: bool,
    pub unmanaged: bool,
    pub human_labeled: bool,
}

pub fn parse_privacy_label(source: &str) -> Result<PrivacyLabel> {
    parse_document(source)
}

pub fn parse_nutrition_label(source: &str) -> Result<NutritionLabel> {
    parse_document(source)
}

pub fn validate_privacy_label(p: &PrivacyLabel) -> ValidationReport {
    validate_privacy_label_at(p, "privacy_label.")
}

pub(crate) fn validate_privacy_label_at(p: &PrivacyLabel, prefix: &str) -> ValidationReport {
    let mut report = ValidationReport::new();
    if p.secondary_layer_url.trim().is_empty() {
        report.error(format!("{prefix}secondary_layer_url"), "primary layer must link to the secondary layer");
    }
    let declared = p.security_mechanisms.iter().any(|m| !m.trim().is_empty());
    if p.data_transmitted_off_device && !declared {
        report.warning(
            format!("{prefix}security_mechanisms"),
            "off-device transmission without declared security mechanisms",
        );
    }
    report
}

pub fn validate_nutrition_label(n: &NutritionLabel) -> ValidationReport {
    validate_nutrition_label_at(n, "nutrition_label.")
}

pub(crate) fn validate_nutrition_label_at(n: &NutritionLabel, prefix: &str) -> ValidationReport {
    let mut report = ValidationReport::new();
    if n.dataset_name.trim().is_empty() {
        report.error(format!("{prefix}dataset_name"), "dataset name must be nonempty");
    }
    match (n.contains_human_data, n.consent_obtained) {
        (false, Some(_)) => {
            report.error(format!("{prefix}consent_obtained"), "consent flag set on a dataset without human data")
        }
        (true, Some(false)) => {
            report.warning(format!("{prefix}consent_obtained"), "dataset contains human data obtained without consent")
        }
        _ => {}
    }
    if !n.actively_managed {
        report.warning(format!("{prefix}actively_managed"), "dataset is not actively managed or updated");
    }
    report
}

pub fn summarize_label(n: &NutritionLabel) -> LabelSummary {
    LabelSummary {
        from_upstream_source: !n.upstream_sources.is_empty(),
        human_data: n.contains_human_data,
        no_consent: n.contains_human_data && n.consent_obtained == Some(false),
        unmanaged: !n.actively_managed,
        human_labeled: n.human_labeled,
    }
}
