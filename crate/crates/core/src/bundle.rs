//! Datasheet bundle: a directory holding `bundle.json` plus the CSV inputs
//! it references.
//!
//! ```text
//! persondet/
//!   bundle.json        manifest, labels, model metadata, footprint terms
//!   eval.csv           score,label
//!   bom.csv            category,name,embodied_kg_co2e
//!   participants.csv   id,gender,mst                      (optional)
//!   readings.csv       participant_id,sensor_id,...       (optional)
//! ```

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::document::{decode, parse_json, take_envelope};
use crate::error::{Error, Result};
use crate::footprint::{read_bom_csv, BomEntry, UsageProfile};
use crate::labels::{NutritionLabel, PrivacyLabel};
use crate::manifest::SensorManifest;
use crate::metrics::{read_eval_csv, EvalRecord, ModelMeta};
use crate::study::{read_participants_csv, read_readings_csv, Participant, Reading, StudyConfig};

pub const BUNDLE_FILE: &str = "bundle.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub architecture: String,
    pub parameter_count: u64,
    pub input_shape: String,
    pub output_schema: String,
    pub eval_file: String,
    /// Cost of a false positive relative to a false negative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_positive_cost: Option<f64>,
}

impl ModelSection {
    pub fn meta(&self) -> ModelMeta {
        ModelMeta {
            architecture: self.architecture.clone(),
            parameter_count: self.parameter_count,
            input_shape: self.input_shape.clone(),
            output_schema: self.output_schema.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FootprintSection {
    pub bom_file: String,
    pub transport_kg: f64,
    pub training_kg: f64,
    pub usage: UsageProfile<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub participants_file: String,
    pub readings_file: String,
    #[serde(default = "default_distances")]
    pub distances_m: Vec<f64>,
}

fn default_distances() -> Vec<f64> {
    StudyConfig::default().distances_m
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyInputs {
    pub participants: Vec<Participant>,
    pub readings: Vec<Reading<f64>>,
    pub config: StudyConfig,
}

/// Every section input, parsed but not yet validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub manifest: SensorManifest,
    pub privacy_label: PrivacyLabel,
    pub nutrition_label: NutritionLabel,
    pub model: ModelSection,
    pub eval: Vec<EvalRecord<f64>>,
    pub footprint: FootprintSection,
    pub bom: Vec<BomEntry<f64>>,
    pub study: Option<StudyInputs>,
    pub generated_at: Option<String>,
}

const REQUIRED: [&str; 5] = ["manifest", "privacy_label", "nutrition_label", "model", "footprint"];
const OPTIONAL: [&str; 2] = ["study", "generated_at"];

fn open(dir: &Path, name: &str) -> Result<(File, String)> {
    let path: PathBuf = dir.join(name);
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    Ok((file, name.to_string()))
}

/// Reads `bundle.json` and every file it references from `dir`.
pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let path = dir.join(BUNDLE_FILE);
    let source = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut sections = take_envelope(parse_json(&source)?)?;

    if let Some(unknown) = sections.keys().find(|k| !REQUIRED.contains(&k.as_str()) && !OPTIONAL.contains(&k.as_str()))
    {
        return Err(Error::UnknownField { path: unknown.clone() });
    }
    let mut take = |name: &str| -> Result<Value> {
        sections.remove(name).ok_or_else(|| Error::MissingSection { section: name.to_string() })
    };

    let manifest: SensorManifest = decode(take("manifest")?, "manifest")?;
    let privacy_label: PrivacyLabel = decode(take("privacy_label")?, "privacy_label")?;
    let nutrition_label: NutritionLabel = decode(take("nutrition_label")?, "nutrition_label")?;
    let model: ModelSection = decode(take("model")?, "model")?;
    let footprint: FootprintSection = decode(take("footprint")?, "footprint")?;
    let study: Option<StudySection> = take("study").ok().map(|v| decode(v, "study")).transpose()?;
    let generated_at: Option<String> = take("generated_at").ok().map(|v| decode(v, "generated_at")).transpose()?;

    let (file, name) = open(dir, &model.eval_file)?;
    let eval = read_eval_csv(file, &name)?;
    let (file, name) = open(dir, &footprint.bom_file)?;
    let bom = read_bom_csv(file, &name)?;
    let study = match study {
        Some(s) => {
            let (file, name) = open(dir, &s.participants_file)?;
            let participants = read_participants_csv(file, &name)?;
            let (file, name) = open(dir, &s.readings_file)?;
            let readings = read_readings_csv(file, &name)?;
            Some(StudyInputs { participants, readings, config: StudyConfig { distances_m: s.distances_m } })
        }
        None => None,
    };

    Ok(Bundle { manifest, privacy_label, nutrition_label, model, eval, footprint, bom, study, generated_at })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../example/persondet")
    }

    fn copy_with(edit: impl FnOnce(&mut serde_json::Map<String, Value>)) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for entry in std::fs::read_dir(fixture()).unwrap() {
            let p = entry.unwrap().path();
            std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
        }
        let path = dir.path().join(BUNDLE_FILE);
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        edit(v.as_object_mut().unwrap());
        std::fs::write(&path, v.to_string()).unwrap();
        dir
    }

    #[test]
    fn loads_fixture() {
        let b = load_bundle(&fixture()).unwrap();
        assert_eq!(b.manifest.name, "persondet");
        assert_eq!(b.eval.len(), 400);
        assert_eq!(b.bom.len(), 6);
        let study = b.study.unwrap();
        assert_eq!(study.participants.len(), 38);
        assert_eq!(study.readings.len(), 38 * 3 * 4 * 3 * 10);
    }

    #[test]
    fn missing_section_is_named() {
        let dir = copy_with(|m| {
            m.remove("nutrition_label");
        });
        match load_bundle(dir.path()) {
            Err(Error::MissingSection { section }) => assert_eq!(section, "nutrition_label"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn study_is_optional() {
        let dir = copy_with(|m| {
            m.remove("study");
        });
        assert!(load_bundle(dir.path()).unwrap().study.is_none());
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let dir = copy_with(|m| {
            m.insert("extras".into(), Value::Bool(true));
        });
        assert!(matches!(load_bundle(dir.path()), Err(Error::UnknownField { path }) if path == "extras"));
    }

    #[test]
    fn nested_errors_carry_section_prefix() {
        let dir = copy_with(|m| {
            m["footprint"]["usage"]["lifetime_hours"] = Value::String("long".into());
        });
        match load_bundle(dir.path()) {
            Err(Error::TypeMismatch { path, .. }) => assert_eq!(path, "footprint.usage.lifetime_hours"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_referenced_file_is_io_error() {
        let dir = copy_with(|m| {
            m["model"]["eval_file"] = Value::String("absent.csv".into());
        });
        assert!(matches!(load_bundle(dir.path()), Err(Error::Io { .. })));
    }
}
