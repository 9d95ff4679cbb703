//! Standard datasheet sections: description, hardware characteristics,
//! communication specification, physical dimensions and compliance claims.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::document::{self, parse_document};
use crate::error::{Error, Result};
use crate::findings::{Finding, ValidationReport};
use crate::wire;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorManifest {
    pub name: String,
    pub description_technical: String,
    pub description_plain: String,
    pub features: Vec<String>,
    pub use_cases: Vec<String>,
    pub hardware: HardwareSpec,
    pub communication: CommSpec,
    pub compliance: Vec<ComplianceClaim>,
    pub dimensions_mm: Dimensions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareSpec {
    pub supply_voltage_min_v: f64,
    pub supply_voltage_max_v: f64,
    pub operating_current_ma: f64,
    pub processor: String,
    pub memory_kb: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bus {
    I2C,
    SPI,
    UART,
    OTHER(String),
}

impl fmt::Display for Bus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bus::I2C => f.write_str("I2C"),
            Bus::SPI => f.write_str("SPI"),
            Bus::UART => f.write_str("UART"),
            Bus::OTHER(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommSpec {
    pub bus: Bus,
    pub max_rate_kbps: f64,
    pub connector: String,
    /// Identifier of the off-sensor payload schema, see [`wire::PAYLOAD_SCHEMA`].
    pub payload_schema: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplianceStatus {
    Certified,
    SelfDeclared,
    NotApplicable,
}

impl fmt::Display for ComplianceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplianceStatus::Certified => "certified",
            ComplianceStatus::SelfDeclared => "self-declared",
            ComplianceStatus::NotApplicable => "not applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplianceClaim {
    pub standard_id: String,
    pub status: ComplianceStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_url: Option<String>,
}

/// Board width and height in millimetres, held to three decimal places.
/// Serialized as a two-element array `[width, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Dimensions {
    pub width: f64,
    pub height: f64,
}

impl Dimensions {
    pub fn new(width: f64, height: f64) -> Self {
        Dimensions { width: round_mm(width), height: round_mm(height) }
    }
}

fn round_mm(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

impl From<(f64, f64)> for Dimensions {
    fn from((w, h): (f64, f64)) -> Self {
        Dimensions::new(w, h)
    }
}

impl From<Dimensions> for (f64, f64) {
    fn from(d: Dimensions) -> Self {
        (d.width, d.height)
    }
}

/// Known standards, keyed by identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplianceRegistry {
    standards: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    standards: Vec<RegistryEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryEntry {
    id: String,
    title: String,
}

const DEFAULT_REGISTRY: &str = include_str!("../data/compliance_registry.json");

impl ComplianceRegistry {
    pub fn parse(source: &str) -> Result<Self> {
        let file: RegistryFile = parse_document(source)?;
        Ok(ComplianceRegistry { standards: file.standards.into_iter().map(|e| (e.id, e.title)).collect() })
    }

    pub fn title(&self, id: &str) -> Option<&str> {
        self.standards.get(id).map(String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.standards.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.standards.keys().map(String::as_str)
    }
}

impl Default for ComplianceRegistry {
    fn default() -> Self {
        ComplianceRegistry::parse(DEFAULT_REGISTRY).expect("bundled registry is valid")
    }
}

impl SensorManifest {
    /// Type-level invariants, reported as error findings under `prefix`.
    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn invariant_findings(&self, prefix: &str) -> ValidationReport {
        let p = |field: &str| format!("{prefix}{field}");
        let mut report = ValidationReport::new();
        if self.name.trim().is_empty() {
            report.error(p("name"), "name must be nonempty");
        }
        if self.description_plain.trim().is_empty() {
            report.error(p("description_plain"), "plain-language description must be nonempty");
        }
        if !(self.dimensions_mm.width > 0.0 && self.dimensions_mm.height > 0.0) {
            report.error(p("dimensions_mm"), "dimensions must be strictly positive");
        }
        let hw = &self.hardware;
        if !(hw.supply_voltage_min_v > 0.0) {
            report.error(p("hardware.supply_voltage_min_v"), "minimum supply voltage must be positive");
        }
        if !(hw.supply_voltage_min_v <= hw.supply_voltage_max_v) {
            report.error(p("hardware.supply_voltage_max_v"), "maximum supply voltage is below the minimum");
        }
        if !(hw.operating_current_ma > 0.0) {
            report.error(p("hardware.operating_current_ma"), "operating current must be positive");
        }
        if !(self.communication.max_rate_kbps > 0.0) {
            report.error(p("communication.max_rate_kbps"), "maximum data rate must be positive");
        }
        report
    }
}

/// Parses a standalone manifest document and enforces its invariants.
pub fn parse_manifest(source: &str) -> Result<SensorManifest> {
    let manifest: SensorManifest = parse_document(source)?;
    check_invariants(&manifest)?;
    Ok(manifest)
}

pub(crate) fn check_invariants(manifest: &SensorManifest) -> Result<()> {
    let report = manifest.invariant_findings("");
    let first = report
        .errors()
        .next()
        .map(|Finding { path, message, .. }| Error::Invariant { path: path.clone(), message: message.clone() });
    first.map_or(Ok(()), Err)
}

/// Serializes a manifest as a versioned JSON document.
pub fn serialize_manifest(manifest: &SensorManifest) -> String {
    document::to_document(manifest).expect("manifest serializes")
}

pub fn validate_manifest(m: &SensorManifest, registry: &ComplianceRegistry) -> ValidationReport {
    validate_manifest_at(m, registry, "manifest.")
}

pub(crate) fn validate_manifest_at(
    m: &SensorManifest,
    registry: &ComplianceRegistry,
    prefix: &str,
) -> ValidationReport {
    let mut report = m.invariant_findings(prefix);
    for (i, claim) in m.compliance.iter().enumerate() {
        let at = format!("{prefix}compliance[{i}]");
        if !registry.contains(&claim.standard_id) {
            report.error(format!("{at}.standard_id"), format!("unknown standard `{}`", claim.standard_id));
        }
        let has_evidence = claim.evidence_url.as_deref().is_some_and(|u| !u.trim().is_empty());
        if claim.status == ComplianceStatus::Certified && !has_evidence {
            report.warning(format!("{at}.evidence_url"), "certified claim without evidence");
        }
    }
    if m.communication.payload_schema != wire::PAYLOAD_SCHEMA {
        report.warning(
            format!("{prefix}communication.payload_schema"),
            format!(
                "payload schema `{}` is not the supported `{}`",
                m.communication.payload_schema,
                wire::PAYLOAD_SCHEMA
            ),
        );
    }
    report
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const PERSONDET: &str = r#"{
        "schema_version": "1",
        "name": "persondet",
        "description_technical": "MobileNetV1 person detector on a microcontroller",
        "description_plain": "Tells you whether a person is in view.",
        "features": ["on-device inference"],
        "use_cases": ["occupancy sensing"],
        "hardware": {
            "supply_voltage_min_v": 3.5,
            "supply_voltage_max_v": 5.5,
            "operating_current_ma": 40,
            "processor": "RP2040",
            "memory_kb": 264
        },
        "communication": {
            "bus": "I2C",
            "max_rate_kbps": 100,
            "connector": "Qwiic",
            "payload_schema": "confidence-byte/1"
        },
        "compliance": [],
        "dimensions_mm": [27.2, 27.7]
    }"#;

    #[test]
    fn parses_reference_sensor() {
        let m = parse_manifest(PERSONDET).unwrap();
        assert_eq!(m.name, "persondet");
        assert_eq!(m.dimensions_mm, Dimensions { width: 27.2, height: 27.7 });
        assert_eq!(m.hardware.supply_voltage_min_v, 3.5);
        assert_eq!(m.hardware.supply_voltage_max_v, 5.5);
        assert_eq!(m.hardware.operating_current_ma, 40.0);
        assert_eq!(m.communication.bus, Bus::I2C);
        assert_eq!(m.communication.max_rate_kbps, 100.0);
    }

    #[test]
    fn missing_plain_description_is_named() {
        let src = PERSONDET.replace(r#""description_plain": "Tells you whether a person is in view.","#, "");
        match parse_manifest(&src) {
            Err(Error::MissingField { path }) => assert_eq!(path, "description_plain"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inverted_voltage_range_is_rejected() {
        let src = PERSONDET
            .replace("\"supply_voltage_min_v\": 3.5", "\"supply_voltage_min_v\": 5.5")
            .replace("\"supply_voltage_max_v\": 5.5", "\"supply_voltage_max_v\": 3.5");
        assert!(matches!(
            parse_manifest(&src),
            Err(Error::Invariant { path, .. }) if path == "hardware.supply_voltage_max_v"
        ));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let src = PERSONDET.replace("\"memory_kb\": 264", "\"memory_kb\": 264, \"flash_kb\": 2048");
        assert!(matches!(
            parse_manifest(&src),
            Err(Error::UnknownField { path }) if path == "hardware.flash_kb"
        ));
    }

    #[test]
    fn other_bus_and_dimension_rounding() {
        let src = PERSONDET
            .replace("\"bus\": \"I2C\"", "\"bus\": {\"OTHER\": \"CAN\"}")
            .replace("[27.2, 27.7]", "[27.20049, 27.7]");
        let m = parse_manifest(&src).unwrap();
        assert_eq!(m.communication.bus, Bus::OTHER("CAN".into()));
        assert_eq!(m.dimensions_mm.width, 27.2);
    }

    fn with_claims(claims: Vec<ComplianceClaim>) -> SensorManifest {
        let mut m = parse_manifest(PERSONDET).unwrap();
        m.compliance = claims;
        m
    }

    #[test]
    fn certified_without_evidence_warns() {
        let m = with_claims(vec![ComplianceClaim {
            standard_id: "ISO-26262".into(),
            status: ComplianceStatus::Certified,
            evidence_url: None,
        }]);
        let report = validate_manifest(&m, &ComplianceRegistry::default());
        let findings: Vec<_> = report.findings().collect();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].severity, crate::findings::Severity::Warning);
        assert_eq!(findings[0].message, "certified claim without evidence");
        assert!(report.is_valid(false));
    }

    #[test]
    fn unknown_standard_is_error() {
        let m = with_claims(vec![ComplianceClaim {
            standard_id: "ISO-99999".into(),
            status: ComplianceStatus::SelfDeclared,
            evidence_url: None,
        }]);
        let report = validate_manifest(&m, &ComplianceRegistry::default());
        assert!(report.has_errors());
        assert!(report.contains_path("manifest.compliance[0].standard_id"));
        assert!(report.errors().any(|f| f.message.contains("unknown standard")));
    }

    #[test]
    fn clean_manifest_has_no_findings() {
        let m = with_claims(vec![
            ComplianceClaim { standard_id: "GDPR".into(), status: ComplianceStatus::SelfDeclared, evidence_url: None },
            ComplianceClaim {
                standard_id: "FCC".into(),
                status: ComplianceStatus::Certified,
                evidence_url: Some("https://example.org/fcc".into()),
            },
        ]);
        assert!(validate_manifest(&m, &ComplianceRegistry::default()).is_empty());
    }

    #[test]
    fn default_registry_contents() {
        let r = ComplianceRegistry::default();
        let ids: Vec<_> = r.ids().collect();
        assert_eq!(ids, ["FCC", "FDA", "GDPR", "HIPAA", "IEC-61508", "ISO-26262"]);
    }

    #[test]
    fn registry_override() {
        let r = ComplianceRegistry::parse(r#"{"schema_version":"1","standards":[{"id":"ISO-99999","title":"x"}]}"#)
            .unwrap();
        let m = with_claims(vec![ComplianceClaim {
            standard_id: "ISO-99999".into(),
            status: ComplianceStatus::SelfDeclared,
            evidence_url: None,
        }]);
        assert!(validate_manifest(&m, &r).is_empty());
    }

    proptest! {
        #[test]
        fn reparse_is_idempotent(
            name in "[a-z]{1,12}",
            w in 0.001f64..500.0,
            h in 0.001f64..500.0,
            vmin in 0.1f64..5.0,
            span in 0.0f64..10.0,
            features in proptest::collection::vec("[ -~]{0,16}", 0..4),
        ) {
            let mut m = parse_manifest(PERSONDET).unwrap();
            m.name = name;
            m.dimensions_mm = Dimensions::new(w, h);
            m.hardware.supply_voltage_min_v = vmin;
            m.hardware.supply_voltage_max_v = vmin + span;
            m.features = features;
            let once = parse_manifest(&serialize_manifest(&m)).unwrap();
            let twice = parse_manifest(&serialize_manifest(&once)).unwrap();
            prop_assert_eq!(&once, &m);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn parsing_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse_manifest(&text);
        }
    }
}
