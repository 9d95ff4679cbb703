//! Datasheet assembly and rendering.
//!
//! [`assemble`] validates every section and computes the derived reports.
//! Rendering first builds a format-neutral [`Document`], then writes it as
//! Markdown or HTML, so both formats carry the same values.

mod document;
mod html;
mod markdown;

use serde::Serialize;

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::findings::ValidationReport;
use crate::footprint::{self, breakdown_csv, footprint_breakdown_table};
use crate::labels::{validate_nutrition_label_at, validate_privacy_label_at, NutritionLabel, PrivacyLabel};
use crate::manifest::{validate_manifest_at, ComplianceRegistry, SensorManifest};
use crate::metrics::{self, pr_csv, roc_csv};
use crate::study::{self, strata_csv, Dimension};
use crate::{FootprintReport, ModelReport, StudyReport, UsageProfile};

pub use document::{build_document, slug, Block, Document, Field, Group, Section, SECTION_TITLES};
pub use html::{escape as escape_html, render_html};
pub use markdown::render_markdown;

/// The validated aggregate of every datasheet section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Datasheet {
    pub manifest: SensorManifest,
    pub privacy: PrivacyLabel,
    pub nutrition: NutritionLabel,
    pub model: ModelReport,
    pub footprint: FootprintReport,
    /// Usage assumptions behind the operational term.
    pub usage: UsageProfile,
    pub study: Option<StudyReport>,
    pub generated_at: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, Default)]
pub struct AssembleOptions {
    pub registry: ComplianceRegistry,
    /// Treat warnings as errors.
    pub strict: bool,
    /// Timestamp used when the bundle does not carry `generated_at`.
    pub generated_at: Option<String>,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const EPOCH: &str = "1970-01-01T00:00:00Z";

/// Validates and computes every section. On success returns the datasheet
/// and any warnings; on failure, [`Error::Validation`] carries all findings.
pub fn assemble(bundle: &Bundle, options: &AssembleOptions) -> Result<(Datasheet, ValidationReport)> {
    let mut findings = ValidationReport::new();
    findings.merge(validate_manifest_at(&bundle.manifest, &options.registry, "manifest."));
    findings.merge(validate_privacy_label_at(&bundle.privacy_label, "privacy_label."));
    findings.merge(validate_nutrition_label_at(&bundle.nutrition_label, "nutrition_label."));

    let fp_cost = bundle.model.false_positive_cost.unwrap_or(1.0);
    let model = metrics::build_model_report_weighted(&bundle.eval, bundle.model.meta(), fp_cost)
        .map_err(|e| findings.merge(e.into_findings("model.eval_file")))
        .ok();

    let fp = &bundle.footprint;
    let inputs = footprint::validate_inputs(&bundle.bom, fp.transport_kg, fp.training_kg, &fp.usage, "footprint.");
    let footprint = if inputs.is_empty() {
        footprint::compute_footprint(&bundle.bom, fp.transport_kg, fp.training_kg, &fp.usage)
            .map_err(|e| findings.merge(e.into_findings("footprint")))
            .ok()
    } else {
        findings.merge(inputs);
        None
    };

    let study = match &bundle.study {
        Some(s) => match study::build_study_report(&s.participants, &s.readings, &s.config) {
            Ok((report, warnings)) => {
                findings.merge(warnings);
                Some(report)
            }
            Err(e) => {
                findings.merge(e.into_findings("study"));
                None
            }
        },
        None => None,
    };

    if !findings.is_valid(options.strict) {
        let report = if options.strict { findings.promoted() } else { findings };
        return Err(Error::Validation(report));
    }
    let (Some(model), Some(footprint)) = (model, footprint) else {
        unreachable!("section failures are recorded as error findings");
    };

    let datasheet = Datasheet {
        manifest: bundle.manifest.clone(),
        privacy: bundle.privacy_label.clone(),
        nutrition: bundle.nutrition_label.clone(),
        model,
        footprint,
        usage: fp.usage,
        study,
        generated_at: bundle
            .generated_at
            .clone()
            .or_else(|| options.generated_at.clone())
            .unwrap_or_else(|| EPOCH.to_string()),
        tool_version: TOOL_VERSION.to_string(),
    };
    Ok((datasheet, findings))
}

/// Output file name for an artifact of the datasheet, e.g. `persondet.roc.csv`.
pub fn artifact_name(d: &Datasheet, suffix: &str) -> String {
    format!("{}.{suffix}", file_stem(&d.manifest.name))
}

/// Sensor name reduced to characters safe in a file name.
pub fn file_stem(name: &str) -> String {
    let stem: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    if stem.is_empty() {
        "sensor".into()
    } else {
        stem
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Sidecar files written next to the rendered documents: curve and table
/// CSVs plus JSON reports. Names are relative to the output directory.
pub fn sidecars(d: &Datasheet) -> Vec<(String, String)> {
    let mut files = vec![
        (artifact_name(d, "roc.csv"), roc_csv(&d.model.roc)),
        (artifact_name(d, "pr.csv"), pr_csv(&d.model.pr)),
        (artifact_name(d, "model.json"), json(&d.model)),
        (artifact_name(d, "footprint.csv"), breakdown_csv(&footprint_breakdown_table(&d.footprint))),
        (artifact_name(d, "footprint.json"), json(&d.footprint)),
    ];
    if let Some(s) = &d.study {
        for dim in Dimension::ALL {
            files.push((artifact_name(d, &format!("study.{}.csv", dimension_slug(dim))), strata_csv(s.strata(dim))));
        }
        files.push((artifact_name(d, "study.json"), json(s)));
    }
    files
}

pub(crate) fn dimension_slug(d: Dimension) -> &'static str {
    match d {
        Dimension::Gender => "gender",
        Dimension::Skintone => "skintone",
        Dimension::Lighting => "lighting",
        Dimension::Distance => "distance",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::load_bundle;
    use crate::labels::SensorKind;
    use std::path::Path;

    fn bundle() -> Bundle {
        load_bundle(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../example/persondet")).unwrap()
    }

    #[test]
    fn fixture_assembles_cleanly() {
        let (d, findings) = assemble(&bundle(), &AssembleOptions::default()).unwrap();
        assert!(findings.is_empty());
        assert_eq!(d.generated_at, "2024-05-01T00:00:00Z");
        assert_eq!(format!("{:.2}", d.footprint.total_kg), "2.34");
        assert_eq!(d.privacy.sensors_present[0].kind, SensorKind::Camera);
    }

    #[test]
    fn empty_secondary_url_fails_with_finding() {
        let mut b = bundle();
        b.privacy_label.secondary_layer_url.clear();
        match assemble(&b, &AssembleOptions::default()) {
            Err(Error::Validation(r)) => {
                assert!(r.has_errors());
                assert!(r.contains_path("privacy_label.secondary_layer_url"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn every_defect_is_reported_at_once() {
        let mut b = bundle();
        b.privacy_label.secondary_layer_url.clear();
        b.bom[0].embodied_kg_co2e = -1.0;
        b.eval.iter_mut().for_each(|r| r.label = true);
        let Err(Error::Validation(r)) = assemble(&b, &AssembleOptions::default()) else { panic!() };
        assert_eq!(r.errors().count(), 3, "{r}");
        assert!(r.contains_path("footprint.bom[0].embodied_kg_co2e"));
        assert!(r.contains_path("model.eval_file"));
    }

    #[test]
    fn generated_at_falls_back_to_option_then_epoch() {
        let mut b = bundle();
        b.generated_at = None;
        let (d, _) = assemble(&b, &AssembleOptions::default()).unwrap();
        assert_eq!(d.generated_at, EPOCH);
        let opts = AssembleOptions { generated_at: Some("2030-01-01T00:00:00Z".into()), ..Default::default() };
        assert_eq!(assemble(&b, &opts).unwrap().0.generated_at, "2030-01-01T00:00:00Z");
    }

    #[test]
    fn sidecars_follow_study_presence() {
        let (mut d, _) = assemble(&bundle(), &AssembleOptions::default()).unwrap();
        assert_eq!(sidecars(&d).len(), 10);
        d.study = None;
        let names: Vec<String> = sidecars(&d).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 5);
        assert!(names.iter().all(|n| n.starts_with("persondet.")));
    }

    #[test]
    fn file_stem_is_filesystem_safe() {
        assert_eq!(file_stem("Person Sensor v2/rev.b"), "Person_Sensor_v2_rev_b");
        assert_eq!(file_stem(""), "sensor");
    }
}
