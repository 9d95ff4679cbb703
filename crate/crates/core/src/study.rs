//! End-to-end study aggregation: stratified mean confidence by lighting,
//! distance, gender and skin tone, per-sensor variability and cohort
//! demographics.
//!
//! Raw readings are first averaged per (participant, sensor, lighting,
//! distance) group. Every stratum statistic is computed over those group
//! means, so `n` in [`StratumStats`] counts groups, not raw readings.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::findings::ValidationReport;
use crate::scalar::{mean, sample_stddev, Scalar};
use crate::wire::{decode_confidence, ConfidenceByte};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    #[serde(alias = "unspecified")]
    Other,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Other => "other/unspecified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub gender: Gender,
    /// Monk Skin Tone value, 0 to 10.
    pub mst: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkinTone {
    Light,
    Medium,
    Dark,
}

impl fmt::Display for SkinTone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkinTone::Light => "light",
            SkinTone::Medium => "medium",
            SkinTone::Dark => "dark",
        })
    }
}

/// MST 0-4 light, 5-7 medium, 8-10 dark.
pub fn mst_bucket(mst: i64) -> Result<SkinTone> {
    match mst {
        0..=4 => Ok(SkinTone::Light),
        5..=7 => Ok(SkinTone::Medium),
        8..=10 => Ok(SkinTone::Dark),
        _ => Err(Error::OutOfRange { what: "MST value", value: mst.to_string(), range: "[0, 10]" }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightingLevel {
    Off,
    Low,
    Medium,
    High,
}

impl LightingLevel {
    pub const ALL: [LightingLevel; 4] =
        [LightingLevel::Off, LightingLevel::Low, LightingLevel::Medium, LightingLevel::High];

    /// Nominal illuminance of the level in lux.
    pub fn nominal_lux(self) -> f64 {
        match self {
            LightingLevel::Off => 0.0,
            LightingLevel::Low => 208.0,
            LightingLevel::Medium => 584.0,
            LightingLevel::High => 1149.0,
        }
    }
}

impl fmt::Display for LightingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LightingLevel::Off => "off",
            LightingLevel::Low => "low",
            LightingLevel::Medium => "medium",
            LightingLevel::High => "high",
        })
    }
}

/// Nearest nominal level; equidistant readings go to the lower level.
pub fn lighting_level<T: Scalar>(lux: T) -> LightingLevel {
    let lux = lux.as_f64();
    let mut best = LightingLevel::Off;
    let mut best_gap = f64::INFINITY;
    for level in LightingLevel::ALL {
        let gap = (lux - level.nominal_lux()).abs();
        if gap < best_gap {
            best = level;
            best_gap = gap;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Reading<T> {
    pub participant_id: String,
    pub sensor_id: String,
    pub lighting_lux: T,
    pub distance_m: T,
    pub confidence: T,
}

/// Distance stratum, ordered numerically.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistanceBin(pub f64);

// Equality, ordering and hashing all go through the bit pattern so they agree.
impl PartialEq for DistanceBin {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}

impl Eq for DistanceBin {}

impl std::hash::Hash for DistanceBin {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for DistanceBin {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DistanceBin {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for DistanceBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} m", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub participant_id: String,
    pub sensor_id: String,
    pub lighting: LightingLevel,
    pub distance: DistanceBin,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.participant_id, self.sensor_id, self.lighting, self.distance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Planned standing distances in metres.
    pub distances_m: Vec<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { distances_m: vec![1.0, 3.0, 5.0] }
    }
}

const DISTANCE_MATCH_TOLERANCE: f64 = 1e-9;

impl StudyConfig {
    /// Configured distance the reading matches, or `None` if it is off-plan.
    pub fn bin(&self, distance_m: f64) -> Option<DistanceBin> {
        self.distances_m.iter().find(|&&d| (d - distance_m).abs() <= DISTANCE_MATCH_TOLERANCE).map(|&d| DistanceBin(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StratumStats<T> {
    pub mean_confidence: T,
    /// Sample standard deviation of the group means in this stratum.
    pub stddev: T,
    /// Number of (participant, sensor, condition) groups.
    pub n: usize,
    pub readings: usize,
    pub participants: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Stratum<T> {
    pub label: String,
    #[serde(flatten)]
    pub stats: StratumStats<T>,
}

/// Cohort composition as exact counts; percentages are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Demographics {
    pub participants: usize,
    pub male: usize,
    pub female: usize,
    pub other: usize,
    pub light: usize,
    pub medium: usize,
    pub dark: usize,
}

impl Demographics {
    fn percent(&self, count: usize) -> f64 {
        if self.participants == 0 {
            0.0
        } else {
            count as f64 * 100.0 / self.participants as f64
        }
    }

    pub fn percent_male(&self) -> f64 {
        self.percent(self.male)
    }

    pub fn percent_female(&self) -> f64 {
        self.percent(self.female)
    }

    pub fn percent_other(&self) -> f64 {
        self.percent(self.other)
    }

    pub fn percent_light(&self) -> f64 {
        self.percent(self.light)
    }

    pub fn percent_medium(&self) -> f64 {
        self.percent(self.medium)
    }

    pub fn percent_dark(&self) -> f64 {
        self.percent(self.dark)
    }
}

/// Percent to one decimal place.
pub fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

impl Serialize for Demographics {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Demographics", 13)?;
        st.serialize_field("participants", &self.participants)?;
        st.serialize_field("male", &self.male)?;
        st.serialize_field("female", &self.female)?;
        st.serialize_field("other", &self.other)?;
        st.serialize_field("light", &self.light)?;
        st.serialize_field("medium", &self.medium)?;
        st.serialize_field("dark", &self.dark)?;
        st.serialize_field("percent_male", &round1(self.percent_male()))?;
        st.serialize_field("percent_female", &round1(self.percent_female()))?;
        st.serialize_field("percent_other", &round1(self.percent_other()))?;
        st.serialize_field("percent_light", &round1(self.percent_light()))?;
        st.serialize_field("percent_medium", &round1(self.percent_medium()))?;
        st.serialize_field("percent_dark", &round1(self.percent_dark()))?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct StudyReport<T> {
    pub by_lighting: Vec<Stratum<T>>,
    pub by_distance: Vec<Stratum<T>>,
    pub by_gender: Vec<Stratum<T>>,
    pub by_skintone: Vec<Stratum<T>>,
    /// Mean of each sensor's group means.
    pub per_sensor: BTreeMap<String, T>,
    pub demographics: Demographics,
    pub total_readings: usize,
    pub total_groups: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Gender,
    Skintone,
    Lighting,
    Distance,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::Lighting, Dimension::Distance, Dimension::Gender, Dimension::Skintone];
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Gender => "gender",
            Dimension::Skintone => "skin tone",
            Dimension::Lighting => "lighting",
            Dimension::Distance => "distance",
        })
    }
}

impl<T: Scalar> StudyReport<T> {
    pub fn strata(&self, dimension: Dimension) -> &[Stratum<T>] {
        match dimension {
            Dimension::Gender => &self.by_gender,
            Dimension::Skintone => &self.by_skintone,
            Dimension::Lighting => &self.by_lighting,
            Dimension::Distance => &self.by_distance,
        }
    }
}

/// Mean of one reading group.
///
/// Values are summed in ascending order so the result does not depend on
/// the order readings arrive in; a constant group averages to exactly that
/// constant.
pub fn average_readings<T: Scalar>(key: &str, confidences: &[T]) -> Result<T> {
    if confidences.is_empty() {
        return Err(Error::EmptyGroup { key: key.to_string() });
    }
    let first = confidences[0];
    if confidences.iter().all(|&c| c == first) {
        return Ok(first);
    }
    let mut sorted = confidences.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(mean(&sorted).expect("non-empty"))
}

/// Mean confidence and reading count per group.
pub type GroupMeans<T> = BTreeMap<GroupKey, (T, usize)>;

/// Groups readings by (participant, sensor, lighting level, distance) and
/// averages each group. Off-plan distances are binned under their literal
/// value and reported as warnings.
pub fn group_means<T: Scalar>(
    readings: &[Reading<T>],
    config: &StudyConfig,
) -> Result<(GroupMeans<T>, ValidationReport)> {
    let mut warnings = ValidationReport::new();
    let mut groups: BTreeMap<GroupKey, Vec<T>> = BTreeMap::new();
    for r in readings {
        let d = r.distance_m.as_f64();
        let distance = config.bin(d).unwrap_or_else(|| {
            warnings.warning(
                "readings.distance_m",
                format!(
                    "distance {d} m is not among the configured distances {:?}; binned under its literal value",
                    config.distances_m
                ),
            );
            DistanceBin(d)
        });
        let key = GroupKey {
            participant_id: r.participant_id.clone(),
            sensor_id: r.sensor_id.clone(),
            lighting: lighting_level(r.lighting_lux),
            distance,
        };
        groups.entry(key).or_default().push(r.confidence);
    }
    let mut means = BTreeMap::new();
    for (key, values) in groups {
        let m = average_readings(&key.to_string(), &values)?;
        means.insert(key, (m, values.len()));
    }
    Ok((means, warnings))
}

fn check_inputs<T: Scalar>(
    participants: &[Participant],
    readings: &[Reading<T>],
) -> Result<BTreeMap<String, Participant>> {
    let mut by_id = BTreeMap::new();
    for (i, p) in participants.iter().enumerate() {
        mst_bucket(i64::from(p.mst))
            .map_err(|e| Error::Invariant { path: format!("participants[{i}].mst"), message: e.to_string() })?;
        if by_id.insert(p.id.clone(), p.clone()).is_some() {
            return Err(Error::Invariant {
                path: format!("participants[{i}].id"),
                message: format!("duplicate participant id `{}`", p.id),
            });
        }
    }
    for (i, r) in readings.iter().enumerate() {
        let bad = |field: &str, message: &str| Error::Invariant {
            path: format!("readings[{i}].{field}"),
            message: message.to_string(),
        };
        if !(r.confidence >= T::zero() && r.confidence <= T::one()) {
            return Err(bad("confidence", "confidence must lie in [0, 1]"));
        }
        if !(r.lighting_lux >= T::zero() && r.lighting_lux.is_finite()) {
            return Err(bad("lighting_lux", "illuminance must be nonnegative"));
        }
        if !(r.distance_m > T::zero() && r.distance_m.is_finite()) {
            return Err(bad("distance_m", "distance must be positive"));
        }
        if !by_id.contains_key(&r.participant_id) {
            return Err(Error::DanglingParticipant { participant_id: r.participant_id.clone() });
        }
    }
    Ok(by_id)
}

struct Accumulator<T> {
    means: Vec<T>,
    readings: usize,
    participants: BTreeSet<String>,
}

impl<T> Default for Accumulator<T> {
    fn default() -> Self {
        Accumulator { means: Vec::new(), readings: 0, participants: BTreeSet::new() }
    }
}

impl<T: Scalar> Accumulator<T> {
    fn add(&mut self, participant: &str, group_mean: T, readings: usize) {
        self.means.push(group_mean);
        self.readings += readings;
        self.participants.insert(participant.to_string());
    }

    fn finish(mut self, label: String) -> Stratum<T> {
        // fixed summation order keeps results independent of input order
        self.means.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Stratum {
            label,
            stats: StratumStats {
                mean_confidence: mean(&self.means).unwrap_or_else(T::zero),
                stddev: sample_stddev(&self.means),
                n: self.means.len(),
                readings: self.readings,
                participants: self.participants.len(),
            },
        }
    }
}

fn collect<K: Ord + fmt::Display, T: Scalar>(acc: BTreeMap<K, Accumulator<T>>) -> Vec<Stratum<T>> {
    acc.into_iter().map(|(k, a)| a.finish(k.to_string())).collect()
}

pub fn demographics(participants: &[Participant]) -> Result<Demographics> {
    let mut d = Demographics { participants: participants.len(), ..Default::default() };
    for p in participants {
        match p.gender {
            Gender::Male => d.male += 1,
            Gender::Female => d.female += 1,
            Gender::Other => d.other += 1,
        }
        match mst_bucket(i64::from(p.mst))? {
            SkinTone::Light => d.light += 1,
            SkinTone::Medium => d.medium += 1,
            SkinTone::Dark => d.dark += 1,
        }
    }
    Ok(d)
}

/// Builds the stratified report. Returns warnings (off-plan distances)
/// alongside the report.
pub fn build_study_report<T: Scalar>(
    participants: &[Participant],
    readings: &[Reading<T>],
    config: &StudyConfig,
) -> Result<(StudyReport<T>, ValidationReport)> {
    let by_id = check_inputs(participants, readings)?;
    let (groups, warnings) = group_means(readings, config)?;

    let mut lighting: BTreeMap<LightingLevel, Accumulator<T>> = BTreeMap::new();
    let mut distance: BTreeMap<DistanceBin, Accumulator<T>> = BTreeMap::new();
    let mut gender: BTreeMap<Gender, Accumulator<T>> = BTreeMap::new();
    let mut skintone: BTreeMap<SkinTone, Accumulator<T>> = BTreeMap::new();
    let mut sensors: BTreeMap<String, Vec<T>> = BTreeMap::new();

    for (key, &(m, count)) in &groups {
        let p = &by_id[&key.participant_id];
        let pid = key.participant_id.as_str();
        lighting.entry(key.lighting).or_default().add(pid, m, count);
        distance.entry(key.distance).or_default().add(pid, m, count);
        gender.entry(p.gender).or_default().add(pid, m, count);
        skintone.entry(mst_bucket(i64::from(p.mst))?).or_default().add(pid, m, count);
        sensors.entry(key.sensor_id.clone()).or_default().push(m);
    }

    let report = StudyReport {
        by_lighting: collect(lighting),
        by_distance: collect(distance),
        by_gender: collect(gender),
        by_skintone: collect(skintone),
        per_sensor: sensors
            .into_iter()
            .map(|(id, mut v)| {
                v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                (id, mean(&v).unwrap_or_else(T::zero))
            })
            .collect(),
        demographics: demographics(participants)?,
        total_readings: readings.len(),
        total_groups: groups.len(),
    };
    Ok((report, warnings))
}

/// Largest minus smallest stratum mean along one dimension.
pub fn bias_gap<T: Scalar>(report: &StudyReport<T>, dimension: Dimension) -> Result<T> {
    let means: Vec<T> =
        report.strata(dimension).iter().filter(|s| s.stats.n > 0).map(|s| s.stats.mean_confidence).collect();
    if means.len() < 2 {
        return Err(Error::InsufficientStrata { dimension: dimension.to_string() });
    }
    let max = means.iter().copied().fold(T::neg_infinity(), T::max);
    let min = means.iter().copied().fold(T::infinity(), T::min);
    Ok(max - min)
}

pub fn bias_gaps<T: Scalar>(report: &StudyReport<T>) -> Result<BTreeMap<Dimension, T>> {
    Dimension::ALL.iter().map(|&d| bias_gap(report, d).map(|g| (d, g))).collect()
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader)
}

/// Reads participants from CSV with header `id,gender,mst`.
pub fn read_participants_csv<R: Read>(reader: R, source: &str) -> Result<Vec<Participant>> {
    let csv_err = |line: u64, message: String| Error::Csv { path: source.to_string(), line, message };
    let mut rdr = csv_reader(reader);
    let headers: Vec<String> =
        rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.iter().map(str::to_string).collect();
    if headers != ["id", "gender", "mst"] {
        return Err(csv_err(1, format!("expected header `id,gender,mst`, found `{}`", headers.join(","))));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let gender = match row[1].to_ascii_lowercase().as_str() {
            "male" | "m" => Gender::Male,
            "female" | "f" => Gender::Female,
            "other" | "unspecified" | "" => Gender::Other,
            other => return Err(csv_err(line, format!("unknown gender `{other}`"))),
        };
        let mst: i64 = row[2].parse().map_err(|_| csv_err(line, format!("mst `{}` is not an integer", &row[2])))?;
        mst_bucket(mst).map_err(|e| csv_err(line, e.to_string()))?;
        out.push(Participant { id: row[0].to_string(), gender, mst: mst as u8 });
    }
    Ok(out)
}

/// Reads readings from CSV with header
/// `participant_id,sensor_id,lighting_lux,distance_m,confidence`. Raw
/// captures may instead carry a `confidence_byte` column (0-255), which is
/// decoded with the wire codec.
pub fn read_readings_csv<T: Scalar, R: Read>(reader: R, source: &str) -> Result<Vec<Reading<T>>> {
    let csv_err = |line: u64, message: String| Error::Csv { path: source.to_string(), line, message };
    let mut rdr = csv_reader(reader);
    let headers: Vec<String> =
        rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.iter().map(str::to_string).collect();
    let raw_bytes = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["participant_id", "sensor_id", "lighting_lux", "distance_m", "confidence"] => false,
        ["participant_id", "sensor_id", "lighting_lux", "distance_m", "confidence_byte"] => true,
        _ => {
            return Err(csv_err(
                1,
                format!(
                    "expected header `participant_id,sensor_id,lighting_lux,distance_m,confidence`, found `{}`",
                    headers.join(",")
                ),
            ))
        }
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |idx: usize, name: &str| -> Result<f64> {
            row[idx].parse::<f64>().map_err(|_| csv_err(line, format!("{name} `{}` is not a number", &row[idx])))
        };
        let confidence = if raw_bytes {
            let raw: u8 = row[4]
                .parse()
                .map_err(|_| csv_err(line, format!("confidence_byte `{}` is not in 0..=255", &row[4])))?;
            decode_confidence::<T>(ConfidenceByte(raw))
        } else {
            T::lit(num(4, "confidence")?)
        };
        out.push(Reading {
            participant_id: row[0].to_string(),
            sensor_id: row[1].to_string(),
            lighting_lux: T::lit(num(2, "lighting_lux")?),
            distance_m: T::lit(num(3, "distance_m")?),
            confidence,
        });
    }
    Ok(out)
}

/// CSV for one stratification, suitable for bar charts.
pub fn strata_csv<T: Scalar>(strata: &[Stratum<T>]) -> String {
    let mut out = String::from("stratum,mean_confidence,stddev,n,readings,participants\n");
    for s in strata {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.label, s.stats.mean_confidence, s.stats.stddev, s.stats.n, s.stats.readings, s.stats.participants
        ));
    }
    out
}
