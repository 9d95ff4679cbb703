//! Command-line surface.
//!
//! Exit statuses: 0 success, 1 validation failure (findings on stderr, one
//! per line), 2 usage error or unreadable input.

use std::ffi::OsString;
use std::fs::File;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bundle::load_bundle;
use crate::error::{Error, Result};
use crate::findings::{Severity, ValidationReport};
use crate::footprint::{breakdown_csv, compute_footprint, footprint_breakdown_table, read_bom_csv, validate_inputs};
use crate::manifest::ComplianceRegistry;
use crate::metrics::{build_model_report_weighted, pr_csv, read_eval_csv, roc_csv, ModelMeta};
use crate::render::{artifact_name, assemble, build_document, render_html, render_markdown, sidecars, AssembleOptions};
use crate::study::{build_study_report, read_participants_csv, read_readings_csv, strata_csv, Dimension, StudyConfig};
use crate::wire::{decode_confidence, encode_confidence, ConfidenceByte};
use crate::{ConfusionMatrix, UsageProfile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mlsds", version, about = "Compile and validate ML sensor datasheets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a bundle without writing a datasheet.
    Validate(BundleArgs),
    /// Compute ROC/PR curves and the operating threshold from `score,label` rows.
    Metrics(MetricsArgs),
    /// Compute the carbon footprint from a bill of materials.
    Footprint(FootprintArgs),
    /// Aggregate end-to-end study readings into strata.
    Study(StudyArgs),
    /// Convert between confidence values and wire bytes.
    Wire {
        #[command(subcommand)]
        op: WireOp,
    },
    /// Build the full datasheet from a bundle.
    Build(BuildArgs),
}

#[derive(Debug, Args)]
struct BundleArgs {
    #[arg(long)]
    bundle: PathBuf,
    /// Write the findings as JSON to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Treat warnings as errors.
    #[arg(long)]
    strict: bool,
    /// Compliance registry replacing the built-in one.
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Html,
    Both,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    bundle: BundleArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    eval: PathBuf,
    /// Cost of a false positive relative to a false negative.
    #[arg(long, default_value_t = 1.0)]
    fp_cost: f64,
    /// Directory for roc.csv, pr.csv and metrics.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FootprintArgs {
    #[arg(long)]
    bom: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    transport_kg: f64,
    #[arg(long, default_value_t = 0.0)]
    training_kg: f64,
    #[arg(long, default_value_t = 0.0)]
    power_w: f64,
    #[arg(long, default_value_t = 0.0)]
    lifetime_hours: f64,
    #[arg(long, default_value_t = 0.0)]
    grid_kg_per_kwh: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[arg(long)]
    participants: PathBuf,
    #[arg(long)]
    readings: PathBuf,
    /// Configured test distances in metres.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 3.0, 5.0])]
    distances: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum WireOp {
    /// Print the byte for a confidence in [0, 1].
    Encode { p: f64 },
    /// Print the confidence carried by a byte.
    Decode { byte: u8 },
}

/// Outcome of a command that did not succeed.
enum Failure {
    Invalid(ValidationReport),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Usage(e.to_string()),
            Error::Validation(report) => Failure::Invalid(report),
            other => Failure::Invalid(other.into_findings("input")),
        }
    }
}

type Outcome = std::result::Result<ValidationReport, Failure>;

struct Io<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    color: bool,
}

/// Runs the tool with process stdout/stderr and returns the exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let color = std::env::var_os("MLSDS_NO_COLOR").is_none() && std::io::stderr().is_terminal();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    run_with(argv, &mut out, &mut err, color)
}

/// Runs the tool against the given streams.
pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { stdout, stderr, color };
    let report_path = match &cli.command {
        Command::Validate(a) => a.report.clone(),
        Command::Build(a) => a.bundle.report.clone(),
        Command::Metrics(a) => a.report.clone(),
        Command::Footprint(a) => a.report.clone(),
        Command::Study(a) => a.report.clone(),
        Command::Wire { .. } => None,
    };
    let outcome = match cli.command {
        Command::Validate(a) => validate(&a, &mut io),
        Command::Build(a) => build(&a, &mut io),
        Command::Metrics(a) => metrics(&a, &mut io),
        Command::Footprint(a) => footprint(&a, &mut io),
        Command::Study(a) => study(&a, &mut io),
        Command::Wire { op } => wire(op, &mut io),
    };

    let (code, findings) = match outcome {
        Ok(findings) => (EXIT_OK, findings),
        Err(Failure::Invalid(findings)) => (EXIT_INVALID, findings),
        Err(Failure::Usage(message)) => {
            let _ = writeln!(io.stderr, "error: {message}");
            return EXIT_USAGE;
        }
    };
    for f in findings.findings() {
        let _ = match (io.color, f.severity) {
            (true, Severity::Error) => writeln!(io.stderr, "\x1b[31m{f}\x1b[0m"),
            (true, Severity::Warning) => writeln!(io.stderr, "\x1b[33m{f}\x1b[0m"),
            (false, _) => writeln!(io.stderr, "{f}"),
        };
    }
    if let Some(path) = report_path {
        if let Err(e) = write_report(&path, code == EXIT_OK, &findings) {
            let _ = writeln!(io.stderr, "error: {e}");
            return EXIT_USAGE;
        }
    }
    code
}

#[derive(Serialize)]
struct FindingsReport<'a> {
    valid: bool,
    findings: &'a ValidationReport,
}

fn write_report(path: &Path, valid: bool, findings: &ValidationReport) -> Result<()> {
    let body = crate::document::to_document(&FindingsReport { valid, findings })?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "report.json".into());
    write_atomic(dir, &name, &body)
}

/// Writes `dir/name` through a temporary file in the same directory, so
/// readers never observe a partially written file.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(&target, e))?;
    tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
    Ok(())
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files.iter().try_for_each(|(name, body)| write_atomic(dir, name, body))
}

fn open(path: &Path) -> Result<(File, String)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok((file, path.display().to_string()))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn options(a: &BundleArgs) -> Result<AssembleOptions> {
    let registry = match &a.registry {
        Some(path) => {
            let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            ComplianceRegistry::parse(&source)?
        }
        None => ComplianceRegistry::default(),
    };
    Ok(AssembleOptions { registry, strict: a.strict, generated_at: source_date_epoch() })
}

/// Honors `SOURCE_DATE_EPOCH` for reproducible timestamps.
fn source_date_epoch() -> Option<String> {
    let secs: i64 = std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()?;
    let t = chrono::DateTime::from_timestamp(secs, 0)?;
    Some(t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
}

fn validate(a: &BundleArgs, io: &mut Io) -> Outcome {
    let bundle = load_bundle(&a.bundle)?;
    let (d, findings) = assemble(&bundle, &options(a)?)?;
    let _ = writeln!(io.stdout, "{}: valid ({} warning(s))", d.manifest.name, findings.warnings().count());
    Ok(findings)
}

fn build(a: &BuildArgs, io: &mut Io) -> Outcome {
    let bundle = load_bundle(&a.bundle.bundle)?;
    let (d, findings) = assemble(&bundle, &options(&a.bundle)?)?;
    let doc = build_document(&d);
    let mut files = Vec::new();
    if matches!(a.format, Format::Md | Format::Both) {
        files.push((artifact_name(&d, "datasheet.md"), render_markdown(&doc)));
    }
    if matches!(a.format, Format::Html | Format::Both) {
        files.push((artifact_name(&d, "datasheet.html"), render_html(&doc)));
    }
    files.extend(sidecars(&d));
    write_all(&a.out, &files)?;
    for (name, _) in &files {
        let _ = writeln!(io.stdout, "{}", a.out.join(name).display());
    }
    Ok(findings)
}

#[derive(Serialize)]
struct MetricsSummary<'a> {
    auc: f64,
    chosen_threshold: f64,
    confusion: &'a ConfusionMatrix,
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
}

fn metrics(a: &MetricsArgs, io: &mut Io) -> Outcome {
    let (file, name) = open(&a.eval)?;
    let records = read_eval_csv::<f64, _>(file, &name)?;
    if !(a.fp_cost.is_finite() && a.fp_cost > 0.0) {
        return Err(Failure::Usage(format!("--fp-cost must be a positive number, got {}", a.fp_cost)));
    }
    let meta = ModelMeta {
        architecture: String::new(),
        parameter_count: 0,
        input_shape: String::new(),
        output_schema: String::new(),
    };
    let r =
        build_model_report_weighted(&records, meta, a.fp_cost).map_err(|e| Failure::Invalid(e.into_findings(&name)))?;
    let summary = json(&MetricsSummary {
        auc: r.roc.auc,
        chosen_threshold: r.chosen_threshold,
        confusion: &r.confusion,
        accuracy: r.accuracy,
        precision: r.precision,
        recall: r.recall,
        f1: r.f1,
    });
    let _ = io.stdout.write_all(summary.as_bytes());
    if let Some(out) = &a.out {
        let files = [
            ("roc.csv".to_string(), roc_csv(&r.roc)),
            ("pr.csv".to_string(), pr_csv(&r.pr)),
            ("metrics.json".to_string(), summary),
        ];
        write_all(out, &files)?;
    }
    Ok(ValidationReport::new())
}

fn footprint(a: &FootprintArgs, io: &mut Io) -> Outcome {
    let (file, name) = open(&a.bom)?;
    let bom = read_bom_csv::<f64, _>(file, &name)?;
    let usage = UsageProfile {
        average_power_w: a.power_w,
        lifetime_hours: a.lifetime_hours,
        grid_intensity_kg_per_kwh: a.grid_kg_per_kwh,
    };
    let negatives = validate_inputs(&bom, a.transport_kg, a.training_kg, &usage, "");
    if negatives.has_errors() {
        return Err(Failure::Invalid(negatives));
    }
    let r = compute_footprint(&bom, a.transport_kg, a.training_kg, &usage)?;
    let rows = footprint_breakdown_table(&r);
    for row in &rows {
        let _ = writeln!(io.stdout, "{:<16} {:>8.2} kg CO2-eq {:>6.1}%", row.term, row.kg, row.percent);
    }
    let _ = writeln!(io.stdout, "Total carbon footprint: {:.2} kg CO2-eq", r.total_kg);
    if let Some(out) = &a.out {
        let files = [("footprint.csv".to_string(), breakdown_csv(&rows)), ("footprint.json".to_string(), json(&r))];
        write_all(out, &files)?;
    }
    Ok(ValidationReport::new())
}

fn study(a: &StudyArgs, io: &mut Io) -> Outcome {
    let (file, name) = open(&a.participants)?;
    let participants = read_participants_csv(file, &name)?;
    let (file, name) = open(&a.readings)?;
    let readings = read_readings_csv::<f64, _>(file, &name)?;
    let config = StudyConfig { distances_m: a.distances.clone() };
    let (r, findings) = build_study_report(&participants, &readings, &config)?;
    let body = json(&r);
    let _ = io.stdout.write_all(body.as_bytes());
    if let Some(out) = &a.out {
        let mut files: Vec<(String, String)> = Dimension::ALL
            .iter()
            .map(|&dim| (format!("study.{}.csv", crate::render::dimension_slug(dim)), strata_csv(r.strata(dim))))
            .collect();
        files.push(("study.json".to_string(), body));
        write_all(out, &files)?;
    }
    Ok(findings)
}

fn wire(op: WireOp, io: &mut Io) -> Outcome {
    match op {
        WireOp::Encode { p } => {
            let b = encode_confidence(p).map_err(|e| Failure::Usage(e.to_string()))?;
            let _ = writeln!(io.stdout, "{}", b.0);
        }
        WireOp::Decode { byte } => {
            let p: f64 = decode_confidence(ConfidenceByte(byte));
            let _ = writeln!(io.stdout, "{p}");
        }
    }
    Ok(ValidationReport::new())
}
