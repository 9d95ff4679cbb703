//! Format-neutral datasheet document.
//!
//! Every block that shows a datasheet field records the field's path
//! (matching the JSON serialization of [`Datasheet`]), which lets tests
//! check that no field is silently dropped.

use crate::footprint::footprint_breakdown_table;
use crate::labels::summarize_label;
use crate::render::{artifact_name, dimension_slug, Datasheet};
use crate::study::{bias_gap, round1, Dimension, Stratum};
use crate::wire;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Standard,
    Iot,
    Ai,
    MlSensor,
}

impl Group {
    pub fn title(self) -> &'static str {
        match self {
            Group::Standard => "Standard Datasheet Components",
            Group::Iot => "IoT Datasheet Components",
            Group::Ai => "AI Datasheet Components",
            Group::MlSensor => "ML Sensor Datasheet Components",
        }
    }
}

/// Section titles in template order.
pub const SECTION_TITLES: [(Group, &str); 9] = [
    (Group::Standard, "Description, Features, and Use Cases"),
    (Group::Standard, "Diagrams and Communication Specification"),
    (Group::Standard, "Hardware Characteristics"),
    (Group::Standard, "Compliance and Certification"),
    (Group::Iot, "Security and Privacy"),
    (Group::Ai, "Dataset Nutrition Label"),
    (Group::Ai, "Model Characteristics"),
    (Group::MlSensor, "Environmental Impact"),
    (Group::MlSensor, "End-to-End Performance Analysis"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub label: String,
    pub value: String,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Para { text: String, path: Option<String> },
    Subheading(String),
    Fields(Vec<Field>),
    List { items: Vec<String>, path: String },
    Link { label: String, url: String, path: String },
    Table { caption: String, header: Vec<String>, rows: Vec<Vec<String>>, path: Option<String>, csv: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub group: Group,
    pub title: &'static str,
    pub blocks: Vec<Block>,
}

impl Section {
    /// GitHub-style heading anchor.
    pub fn anchor(&self) -> String {
        slug(self.title)
    }
}

pub fn slug(title: &str) -> String {
    title
        .to_lowercase()
        .chars()
        .filter_map(|c| match c {
            'a'..='z' | '0'..='9' | '-' => Some(c),
            ' ' => Some('-'),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub title: String,
    pub header: Vec<Field>,
    pub sections: Vec<Section>,
}

impl Document {
    /// Field paths shown anywhere in the document, in order of appearance.
    pub fn field_paths(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.header.iter().filter_map(|f| f.path.as_deref()).collect();
        for block in self.sections.iter().flat_map(|s| &s.blocks) {
            match block {
                Block::Para { path: Some(p), .. } | Block::List { path: p, .. } | Block::Link { path: p, .. } => {
                    out.push(p)
                }
                Block::Table { path: Some(p), .. } => out.push(p),
                Block::Fields(fields) => out.extend(fields.iter().filter_map(|f| f.path.as_deref())),
                _ => {}
            }
        }
        out
    }

    /// Every displayed data value (field values, list items, table cells).
    pub fn values(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.header.iter().map(|f| f.value.as_str()).collect();
        for block in self.sections.iter().flat_map(|s| &s.blocks) {
            match block {
                Block::Para { text, .. } => out.push(text),
                Block::Fields(fields) => out.extend(fields.iter().map(|f| f.value.as_str())),
                Block::List { items, .. } => out.extend(items.iter().map(String::as_str)),
                Block::Link { url, .. } => out.push(url),
                Block::Table { rows, .. } => out.extend(rows.iter().flatten().map(String::as_str)),
                Block::Subheading(_) => {}
            }
        }
        out
    }
}

fn field(label: &str, value: impl Into<String>, path: &str) -> Field {
    Field { label: label.to_string(), value: value.into(), path: Some(path.to_string()) }
}

fn derived(label: &str, value: impl Into<String>) -> Field {
    Field { label: label.to_string(), value: value.into(), path: None }
}

fn kg(v: f64) -> String {
    format!("{v:.2} kg CO2-eq")
}

fn prob(v: f64) -> String {
    format!("{v:.2}")
}

fn pct(v: f64) -> String {
    format!("{v:.1}%")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn list(items: &[String], path: &str) -> Block {
    let items = if items.is_empty() { vec!["none declared".to_string()] } else { items.to_vec() };
    Block::List { items, path: path.to_string() }
}

fn description(d: &Datasheet) -> Vec<Block> {
    let m = &d.manifest;
    vec![
        Block::Fields(vec![
            field("Sensor name", &m.name, "manifest.name"),
            field("Technical description", &m.description_technical, "manifest.description_technical"),
            field("Plain-language description", &m.description_plain, "manifest.description_plain"),
        ]),
        Block::Subheading("Features".into()),
        list(&m.features, "manifest.features"),
        Block::Subheading("Use cases".into()),
        list(&m.use_cases, "manifest.use_cases"),
    ]
}

fn communication(d: &Datasheet) -> Vec<Block> {
    let m = &d.manifest;
    let c = &m.communication;
    vec![
        Block::Fields(vec![
            field(
                "Dimensions",
                format!("{} mm x {} mm", m.dimensions_mm.width, m.dimensions_mm.height),
                "manifest.dimensions_mm",
            ),
            field("Bus", c.bus.to_string(), "manifest.communication.bus"),
            field("Maximum data rate", format!("{} kB/s", c.max_rate_kbps), "manifest.communication.max_rate_kbps"),
            field("Connector", &c.connector, "manifest.communication.connector"),
            field("Payload schema", &c.payload_schema, "manifest.communication.payload_schema"),
        ]),
        Block::Para {
            text: format!(
                "The sensor reports person-presence confidence p as a single byte: raw = round(p x 255), p = raw / 255. Round-trip quantization error is at most 0.5/255 (about {:.4}). Default bus address: {:#04x}.",
                wire::quantization_bound::<f64>(),
                wire::DEFAULT_ADDRESS
            ),
            path: None,
        },
    ]
}

fn hardware(d: &Datasheet) -> Vec<Block> {
    let h = &d.manifest.hardware;
    vec![Block::Fields(vec![
        field(
            "Minimum supply voltage",
            format!("{} V", h.supply_voltage_min_v),
            "manifest.hardware.supply_voltage_min_v",
        ),
        field(
            "Maximum supply voltage",
            format!("{} V", h.supply_voltage_max_v),
            "manifest.hardware.supply_voltage_max_v",
        ),
        field("Operating current", format!("{} mA", h.operating_current_ma), "manifest.hardware.operating_current_ma"),
        field("Processor", &h.processor, "manifest.hardware.processor"),
        field("Memory", format!("{} kB", h.memory_kb), "manifest.hardware.memory_kb"),
    ])]
}

fn compliance(d: &Datasheet) -> Vec<Block> {
    let claims = &d.manifest.compliance;
    if claims.is_empty() {
        return vec![Block::Para {
            text: "No certifications or standards compliance claims declared.".into(),
            path: Some("manifest.compliance".into()),
        }];
    }
    vec![Block::Table {
        caption: "Compliance claims".into(),
        header: vec!["Standard".into(), "Status".into(), "Evidence".into()],
        rows: claims
            .iter()
            .map(|c| {
                vec![
                    c.standard_id.clone(),
                    c.status.to_string(),
                    c.evidence_url.clone().unwrap_or_else(|| "none".into()),
                ]
            })
            .collect(),
        path: Some("manifest.compliance".into()),
        csv: None,
    }]
}

fn privacy(d: &Datasheet) -> Vec<Block> {
    let p = &d.privacy;
    let sensors = if p.sensors_present.is_empty() {
        Block::Para { text: "Sensors present: none declared".into(), path: Some("privacy.sensors_present".into()) }
    } else {
        Block::Table {
            caption: "Sensors present".into(),
            header: vec!["Sensor".into(), "Collection".into()],
            rows: p.sensors_present.iter().map(|s| vec![s.kind.to_string(), s.collection.to_string()]).collect(),
            path: Some("privacy.sensors_present".into()),
            csv: None,
        }
    };
    let u = &p.model_updateability;
    vec![
        Block::Subheading("Primary layer".into()),
        sensors,
        Block::Fields(vec![
            field("Data stored on device", yes_no(p.data_stored_on_device), "privacy.data_stored_on_device"),
            field(
                "Data transmitted off device",
                yes_no(p.data_transmitted_off_device),
                "privacy.data_transmitted_off_device",
            ),
        ]),
        Block::Link {
            label: "Secondary layer".into(),
            url: p.secondary_layer_url.clone(),
            path: "privacy.secondary_layer_url".into(),
        },
        Block::Subheading("Secondary layer".into()),
        Block::Para { text: "Security mechanisms:".into(), path: None },
        list(&p.security_mechanisms, "privacy.security_mechanisms"),
        Block::Fields(vec![
            field("Model updateability", u.mode.to_string(), "privacy.model_updateability.mode"),
            field(
                "Update frequency",
                u.frequency.clone().unwrap_or_else(|| "not stated".into()),
                "privacy.model_updateability.frequency",
            ),
        ]),
    ]
}

fn nutrition(d: &Datasheet) -> Vec<Block> {
    let n = &d.nutrition;
    let s = summarize_label(n);
    let consent = match (n.consent_obtained, n.contains_human_data) {
        (Some(true), _) => "obtained",
        (Some(false), _) => "not obtained",
        (None, true) => "not stated",
        (None, false) => "not applicable",
    };
    let badge = |on: bool, text: &str| if on { Some(text.to_string()) } else { None };
    let badges: Vec<String> = [
        badge(s.from_upstream_source, "from an upstream source"),
        badge(s.human_data, "contains human data"),
        badge(s.no_consent, "collected without consent"),
        badge(s.unmanaged, "not actively managed"),
        badge(s.human_labeled, "human labeled"),
    ]
    .into_iter()
    .flatten()
    .collect();
    vec![
        Block::Fields(vec![
            field("Dataset", &n.dataset_name, "nutrition.dataset_name"),
            field("Source category", n.source_category.to_string(), "nutrition.source_category"),
            field("License", &n.license, "nutrition.license"),
            field("Modality", n.modality.to_string(), "nutrition.modality"),
            field("Human labeled", yes_no(n.human_labeled), "nutrition.human_labeled"),
            field("Contains human data", yes_no(n.contains_human_data), "nutrition.contains_human_data"),
            field("Consent", consent, "nutrition.consent_obtained"),
            field("Actively managed", yes_no(n.actively_managed), "nutrition.actively_managed"),
        ]),
        Block::Subheading("Upstream sources".into()),
        list(&n.upstream_sources, "nutrition.upstream_sources"),
        Block::Subheading("Summary".into()),
        Block::Para { text: if badges.is_empty() { "No flags raised.".into() } else { badges.join("; ") }, path: None },
    ]
}

/// Most curve rows shown inline; the sidecar CSV has every point.
const CURVE_ROWS: usize = 21;

/// Evenly spaced subset of `n` indices, always keeping the first and last.
pub fn thin_indices(n: usize, max: usize) -> Vec<usize> {
    if n <= max || max < 2 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..max).map(|i| (i * (n - 1) + (max - 1) / 2) / (max - 1)).collect();
    idx.dedup();
    idx
}

fn curve_caption(name: &str, shown: usize, total: usize) -> String {
    if shown == total {
        name.to_string()
    } else {
        format!("{name} ({shown} of {total} points)")
    }
}

fn model(d: &Datasheet) -> Vec<Block> {
    let m = &d.model;
    let meta = &m.model_meta;
    let c = &m.confusion;
    let roc = thin_indices(m.roc.points.len(), CURVE_ROWS);
    let pr = thin_indices(m.pr.points.len(), CURVE_ROWS);
    vec![
        Block::Fields(vec![
            field("Architecture", &meta.architecture, "model.model_meta.architecture"),
            field("Parameters", meta.parameter_count.to_string(), "model.model_meta.parameter_count"),
            field("Input", &meta.input_shape, "model.model_meta.input_shape"),
            field("Output", &meta.output_schema, "model.model_meta.output_schema"),
            field("ROC AUC", prob(m.roc.auc), "model.roc.auc"),
            field("Chosen threshold", prob(m.chosen_threshold), "model.chosen_threshold"),
            field("Accuracy", prob(m.accuracy), "model.accuracy"),
            field("Precision", prob(m.precision), "model.precision"),
            field("Recall", prob(m.recall), "model.recall"),
            field("F1 score", prob(m.f1), "model.f1"),
        ]),
        Block::Para {
            text: "The threshold minimizes false positives plus false negatives on the evaluation set; a score at or above it counts as a detection.".into(),
            path: None,
        },
        Block::Subheading("Confusion matrix".into()),
        Block::Fields(vec![
            field("Threshold", prob(c.threshold), "model.confusion.threshold"),
            field("True positives", c.tp.to_string(), "model.confusion.tp"),
            field("False positives", c.fp.to_string(), "model.confusion.fp"),
            field("False negatives", c.fn_.to_string(), "model.confusion.fn"),
            field("True negatives", c.tn.to_string(), "model.confusion.tn"),
        ]),
        Block::Table {
            caption: curve_caption("ROC curve", roc.len(), m.roc.points.len()),
            header: vec!["False positive rate".into(), "True positive rate".into()],
            rows: roc.iter().map(|&i| vec![prob(m.roc.points[i].fpr), prob(m.roc.points[i].tpr)]).collect(),
            path: Some("model.roc.points".into()),
            csv: Some(artifact_name(d, "roc.csv")),
        },
        Block::Table {
            caption: curve_caption("Precision-recall curve", pr.len(), m.pr.points.len()),
            header: vec!["Recall".into(), "Precision".into()],
            rows: pr.iter().map(|&i| vec![prob(m.pr.points[i].recall), prob(m.pr.points[i].precision)]).collect(),
            path: Some("model.pr.points".into()),
            csv: Some(artifact_name(d, "pr.csv")),
        },
    ]
}

fn environment(d: &Datasheet) -> Vec<Block> {
    let f = &d.footprint;
    let u = &d.usage;
    let rows = footprint_breakdown_table(f);
    vec![
        Block::Para {
            text: format!("Total carbon footprint: {:.2} kg CO2-eq", f.total_kg),
            path: Some("footprint.total_kg".into()),
        },
        Block::Fields(vec![
            field("Embodied carbon", kg(f.embodied_total), "footprint.embodied_total"),
            field("Transport", kg(f.transport_kg), "footprint.transport_kg"),
            field("Model training", kg(f.training_kg), "footprint.training_kg"),
            field("Operational use", kg(f.operational_kg), "footprint.operational_kg"),
        ]),
        Block::Subheading("Usage assumptions".into()),
        Block::Fields(vec![
            field("Average power", format!("{} W", u.average_power_w), "usage.average_power_w"),
            field("Lifetime", format!("{} h", u.lifetime_hours), "usage.lifetime_hours"),
            field(
                "Grid intensity",
                format!("{} kg CO2-eq/kWh", u.grid_intensity_kg_per_kwh),
                "usage.grid_intensity_kg_per_kwh",
            ),
        ]),
        Block::Table {
            caption: "Carbon footprint breakdown".into(),
            header: vec!["Component or term".into(), "kg CO2-eq".into(), "Share".into()],
            rows: rows.iter().map(|r| vec![r.term.clone(), format!("{:.2}", r.kg), pct(r.percent)]).collect(),
            path: Some("footprint.embodied_by_category".into()),
            csv: Some(artifact_name(d, "footprint.csv")),
        },
    ]
}

fn strata_table(d: &Datasheet, dim: Dimension, strata: &[Stratum<f64>], field_name: &str) -> Block {
    Block::Table {
        caption: format!("Mean confidence by {dim}"),
        header: ["Stratum", "Mean confidence", "Std. dev. (sample)", "Groups", "Readings", "Participants"]
            .map(String::from)
            .to_vec(),
        rows: strata
            .iter()
            .map(|s| {
                vec![
                    s.label.clone(),
                    prob(s.stats.mean_confidence),
                    prob(s.stats.stddev),
                    s.stats.n.to_string(),
                    s.stats.readings.to_string(),
                    s.stats.participants.to_string(),
                ]
            })
            .collect(),
        path: Some(format!("study.{field_name}")),
        csv: Some(artifact_name(d, &format!("study.{}.csv", dimension_slug(dim)))),
    }
}

fn performance(d: &Datasheet) -> Vec<Block> {
    let Some(s) = &d.study else {
        return vec![Block::Para {
            text: "End-to-End Performance Analysis: not provided".into(),
            path: Some("study".into()),
        }];
    };
    let g = &s.demographics;
    let mut blocks = vec![
        Block::Fields(vec![
            field("Readings", s.total_readings.to_string(), "study.total_readings"),
            field("Averaged reading groups", s.total_groups.to_string(), "study.total_groups"),
        ]),
        Block::Para {
            text: "Readings are averaged per participant, sensor, lighting level and distance; strata summarize those averages.".into(),
            path: None,
        },
        Block::Subheading("Participants".into()),
        Block::Fields(vec![
            field("Participants", g.participants.to_string(), "study.demographics.participants"),
            field("Male", g.male.to_string(), "study.demographics.male"),
            field("Female", g.female.to_string(), "study.demographics.female"),
            field("Other or unspecified", g.other.to_string(), "study.demographics.other"),
            field("Male share", pct(round1(g.percent_male())), "study.demographics.percent_male"),
            field("Female share", pct(round1(g.percent_female())), "study.demographics.percent_female"),
            field("Other or unspecified share", pct(round1(g.percent_other())), "study.demographics.percent_other"),
            field("Light skin tone (MST 0-4)", g.light.to_string(), "study.demographics.light"),
            field("Medium skin tone (MST 5-7)", g.medium.to_string(), "study.demographics.medium"),
            field("Dark skin tone (MST 8-10)", g.dark.to_string(), "study.demographics.dark"),
            field("Light share", pct(round1(g.percent_light())), "study.demographics.percent_light"),
            field("Medium share", pct(round1(g.percent_medium())), "study.demographics.percent_medium"),
            field("Dark share", pct(round1(g.percent_dark())), "study.demographics.percent_dark"),
        ]),
    ];
    for (dim, name) in [
        (Dimension::Lighting, "by_lighting"),
        (Dimension::Distance, "by_distance"),
        (Dimension::Gender, "by_gender"),
        (Dimension::Skintone, "by_skintone"),
    ] {
        blocks.push(strata_table(d, dim, s.strata(dim), name));
    }
    blocks.push(Block::Table {
        caption: "Mean confidence per sensor".into(),
        header: vec!["Sensor".into(), "Mean confidence".into()],
        rows: s.per_sensor.iter().map(|(id, m)| vec![id.clone(), prob(*m)]).collect(),
        path: Some("study.per_sensor".into()),
        csv: None,
    });
    blocks.push(Block::Table {
        caption: "Largest gap between stratum means".into(),
        header: vec!["Dimension".into(), "Gap".into()],
        rows: Dimension::ALL
            .iter()
            .map(|&dim| vec![dim.to_string(), bias_gap(s, dim).map(prob).unwrap_or_else(|_| "n/a".into())])
            .collect(),
        path: None,
        csv: None,
    });
    blocks
}

pub fn build_document(d: &Datasheet) -> Document {
    let builders: [fn(&Datasheet) -> Vec<Block>; 9] =
        [description, communication, hardware, compliance, privacy, nutrition, model, environment, performance];
    let sections = SECTION_TITLES
        .iter()
        .zip(builders)
        .map(|(&(group, title), build)| Section { group, title, blocks: build(d) })
        .collect();
    Document {
        title: format!("{} Datasheet", d.manifest.name),
        header: vec![
            field("Generated at", &d.generated_at, "generated_at"),
            field("Tool version", &d.tool_version, "tool_version"),
            derived("Format", "ML sensor datasheet, schema version 1"),
        ],
        sections,
    }
}
