//! Carbon footprint accounting: embodied carbon per bill-of-materials
//! category plus transport, model training and operational use.
//!
//! Values accumulate unrounded; rounding happens only when rendering or when
//! the breakdown table computes display percentages.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::findings::ValidationReport;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum BomCategory {
    Processing,
    Sensing,
    PowerSupply,
    Memory,
    Pcb,
    Passives,
    Other(String),
}

impl fmt::Display for BomCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BomCategory::Processing => "processing",
            BomCategory::Sensing => "sensing",
            BomCategory::PowerSupply => "power_supply",
            BomCategory::Memory => "memory",
            BomCategory::Pcb => "pcb",
            BomCategory::Passives => "passives",
            BomCategory::Other(name) => name,
        })
    }
}

impl FromStr for BomCategory {
    type Err = Infallible;

    /// Unrecognized names become [`BomCategory::Other`].
    fn from_str(s: &str) -> Result<Self, Infallible> {
        Ok(match s {
            "processing" => BomCategory::Processing,
            "sensing" => BomCategory::Sensing,
            "power_supply" => BomCategory::PowerSupply,
            "memory" => BomCategory::Memory,
            "pcb" => BomCategory::Pcb,
            "passives" => BomCategory::Passives,
            other => BomCategory::Other(other.to_string()),
        })
    }
}

impl From<String> for BomCategory {
    fn from(s: String) -> Self {
        let Ok(c) = s.parse();
        c
    }
}

impl From<BomCategory> for String {
    fn from(c: BomCategory) -> Self {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BomEntry<T> {
    pub category: BomCategory,
    pub name: String,
    pub embodied_kg_co2e: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct UsageProfile<T> {
    pub average_power_w: T,
    pub lifetime_hours: T,
    pub grid_intensity_kg_per_kwh: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FootprintReport<T> {
    pub embodied_by_category: BTreeMap<BomCategory, T>,
    pub embodied_total: T,
    pub transport_kg: T,
    pub training_kg: T,
    pub operational_kg: T,
    pub total_kg: T,
}

/// One line of the breakdown table: a BOM category or an extra term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BreakdownRow<T> {
    pub term: String,
    pub kg: T,
    /// Percent of total, two decimals.
    pub percent: f64,
}

fn nonnegative<T: Scalar>(value: T, path: impl Into<String>) -> Result<T> {
    if value >= T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NegativeInput { path: path.into(), value: value.to_f64().unwrap_or(f64::NAN) })
    }
}

impl<T: Scalar> UsageProfile<T> {
    pub fn check(&self) -> Result<()> {
        nonnegative(self.average_power_w, "average_power_w")?;
        nonnegative(self.lifetime_hours, "lifetime_hours")?;
        nonnegative(self.grid_intensity_kg_per_kwh, "grid_intensity_kg_per_kwh")?;
        Ok(())
    }
}

/// kg CO2-eq from running at `average_power_w` for `lifetime_hours`.
pub fn operational_carbon<T: Scalar>(u: &UsageProfile<T>) -> T {
    u.average_power_w * u.lifetime_hours / T::lit(1000.0) * u.grid_intensity_kg_per_kwh
}

/// Converts training energy into kg CO2-eq.
pub fn training_carbon<T: Scalar>(energy_kwh: T, grid_intensity_kg_per_kwh: T) -> Result<T> {
    let e = nonnegative(energy_kwh, "training_energy_kwh")?;
    let g = nonnegative(grid_intensity_kg_per_kwh, "grid_intensity_kg_per_kwh")?;
    Ok(e * g)
}

pub fn compute_footprint<T: Scalar>(
    bom: &[BomEntry<T>],
    transport_kg: T,
    training_kg: T,
    usage: &UsageProfile<T>,
) -> Result<FootprintReport<T>> {
    let transport_kg = nonnegative(transport_kg, "transport_kg")?;
    let training_kg = nonnegative(training_kg, "training_kg")?;
    usage.check().map_err(|e| e.within("usage"))?;

    let mut embodied_by_category: BTreeMap<BomCategory, T> = BTreeMap::new();
    for (i, entry) in bom.iter().enumerate() {
        let kg = nonnegative(entry.embodied_kg_co2e, format!("bom[{i}].embodied_kg_co2e"))?;
        let slot = embodied_by_category.entry(entry.category.clone()).or_insert_with(T::zero);
        *slot = *slot + kg;
    }
    let embodied_total: T = embodied_by_category.values().copied().sum();
    let operational_kg = operational_carbon(usage);
    Ok(FootprintReport {
        embodied_total,
        total_kg: embodied_total + transport_kg + training_kg + operational_kg,
        embodied_by_category,
        transport_kg,
        training_kg,
        operational_kg,
    })
}

/// Every negative or non-finite input, as error findings under `prefix`.
pub fn validate_inputs<T: Scalar>(
    bom: &[BomEntry<T>],
    transport_kg: T,
    training_kg: T,
    usage: &UsageProfile<T>,
    prefix: &str,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut check = |value: T, path: String| {
        if let Err(e) = nonnegative(value, path.clone()) {
            report.error(path, e.to_string());
        }
    };
    for (i, entry) in bom.iter().enumerate() {
        check(entry.embodied_kg_co2e, format!("{prefix}bom[{i}].embodied_kg_co2e"));
    }
    check(transport_kg, format!("{prefix}transport_kg"));
    check(training_kg, format!("{prefix}training_kg"));
    check(usage.average_power_w, format!("{prefix}usage.average_power_w"));
    check(usage.lifetime_hours, format!("{prefix}usage.lifetime_hours"));
    check(usage.grid_intensity_kg_per_kwh, format!("{prefix}usage.grid_intensity_kg_per_kwh"));
    report
}

/// Rows sorted by kg (descending, then by name). Percentages use the
/// largest-remainder method so the two-decimal values sum to exactly 100.
pub fn footprint_breakdown_table<T: Scalar>(r: &FootprintReport<T>) -> Vec<BreakdownRow<T>> {
    let mut rows: Vec<(String, T)> = r
        .embodied_by_category
        .iter()
        .map(|(c, &kg)| (c.to_string(), kg))
        .chain([
            ("transport".to_string(), r.transport_kg),
            ("training".to_string(), r.training_kg),
            ("operational".to_string(), r.operational_kg),
        ])
        .collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0)));

    let total = r.total_kg.as_f64();
    let hundredths = if total > 0.0 {
        largest_remainder(rows.iter().map(|(_, kg)| kg.as_f64() / total * 10_000.0).collect(), 10_000)
    } else {
        vec![0; rows.len()]
    };
    rows.into_iter()
        .zip(hundredths)
        .map(|((term, kg), h)| BreakdownRow { term, kg, percent: h as f64 / 100.0 })
        .collect()
}

/// Rounds `shares` to integers summing to `target`, handing leftover units to
/// the largest fractional parts (earlier rows win ties).
fn largest_remainder(shares: Vec<f64>, target: i64) -> Vec<i64> {
    let mut floors: Vec<i64> = shares.iter().map(|s| s.floor() as i64).collect();
    let leftover = target - floors.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(leftover.max(0) as usize) {
        floors[i] += 1;
    }
    floors
}

/// Reads a bill of materials from CSV with header `category,name,embodied_kg_co2e`.
pub fn read_bom_csv<T: Scalar, R: Read>(reader: R, source: &str) -> Result<Vec<BomEntry<T>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let csv_err = |line: u64, message: String| Error::Csv { path: source.to_string(), line, message };
    let headers = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != ["category", "name", "embodied_kg_co2e"] {
        return Err(csv_err(
            1,
            format!("expected header `category,name,embodied_kg_co2e`, found `{}`", found.join(",")),
        ));
    }
    let mut entries = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let kg: f64 =
            row[2].parse().map_err(|_| csv_err(line, format!("embodied_kg_co2e `{}` is not a number", &row[2])))?;
        let Ok(category) = row[0].parse();
        entries.push(BomEntry { category, name: row[1].to_string(), embodied_kg_co2e: T::lit(kg) });
    }
    Ok(entries)
}

pub fn breakdown_csv<T: Scalar>(rows: &[BreakdownRow<T>]) -> String {
    let mut out = String::from("term,kg_co2e,percent\n");
    for row in rows {
        out.push_str(&format!("{},{},{:.2}\n", row.term, row.kg, row.percent));
    }
    out
}
