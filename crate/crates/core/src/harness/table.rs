use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{aggregate, MetricReport};

/// Label of the dataset-level row.
pub const ALL_ROW: &str = "all";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub unit: String,
    pub images: usize,
    pub mae: f64,
    pub fbeta_max: f64,
    pub emeasure_max: f64,
    pub smeasure: f64,
}

impl BenchmarkRow {
    fn from_report(unit: impl Into<String>, images: usize, r: &MetricReport) -> Self {
        BenchmarkRow {
            unit: unit.into(),
            images,
            mae: r.mae,
            fbeta_max: r.fbeta_max,
            emeasure_max: r.emeasure_max,
            smeasure: r.smeasure,
        }
    }
}

/// One row per evaluated unit plus a trailing `all` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkTable {
    /// `units` pairs a unit name with its per-image reports; the `all` row
    /// averages every image, not every unit.
    pub fn from_units(units: &[(String, Vec<MetricReport>)]) -> Result<Self> {
        let mut rows = Vec::with_capacity(units.len() + 1);
        let mut everything = Vec::new();
        for (name, reports) in units {
            if reports.is_empty() {
                continue;
            }
            rows.push(BenchmarkRow::from_report(name.clone(), reports.len(), &aggregate(reports)?));
            everything.extend(reports.iter().cloned());
        }
        if everything.is_empty() {
            return Err(Error::NothingToEvaluate);
        }
        rows.push(BenchmarkRow::from_report(ALL_ROW, everything.len(), &aggregate(&everything)?));
        Ok(BenchmarkTable { rows })
    }

    pub fn all(&self) -> &BenchmarkRow {
        self.rows.last().expect("tables always carry the aggregate row")
    }

    pub fn row(&self, unit: &str) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.unit == unit)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["unit", "images", "mae", "fbeta_max", "emeasure_max", "smeasure"])?;
        for r in &self.rows {
            writer.write_record([
                r.unit.clone(),
                r.images.to_string(),
                format!("{:.6}", r.mae),
                format!("{:.6}", r.fbeta_max),
                format!("{:.6}", r.emeasure_max),
                format!("{:.6}", r.smeasure),
            ])?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| unit | images | MAE ↓ | F_β^max ↑ | E_φ^max ↑ | S_α ↑ |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|\n");
        for r in &self.rows {
            let unit = r.unit.replace('|', "\\|");
            let _ = writeln!(
                out,
                "| {unit} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
                r.images, r.mae, r.fbeta_max, r.emeasure_max, r.smeasure
            );
        }
        out
    }

    /// Writes `<stem>.csv` and `<stem>.md` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        let csv_path = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv_path, self.to_csv()?).map_err(Error::io(&csv_path))?;
        let md_path = dir.join(format!("{stem}.md"));
        std::fs::write(&md_path, self.to_markdown()).map_err(Error::io(&md_path))
    }
}
