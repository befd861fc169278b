//! Evaluation report: one row per (scene, object), per-object means, CSV and
//! aligned-text renderings.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::metrics::{EvalReport, SegReport};
use crate::render::Role;

/// How predictions are aligned before scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Every object uses the scale and translation estimated on the vessel.
    VesselScale,
    /// Every object is aligned with its own scale and translation.
    ContentScale,
    /// Mask scoring only.
    Segmentation,
}

impl EvalMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalMode::VesselScale => "vessel-scale",
            EvalMode::ContentScale => "content-scale",
            EvalMode::Segmentation => "segmentation",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            EvalMode::Segmentation => &["iou", "precision", "recall"],
            _ => &[
                "mae",
                "mad",
                "max_dst",
                "mae_over_mad",
                "mae_over_maxdst",
                "chamfer",
                "chamfer_over_mad",
                "chamfer_over_maxdst",
                "r_squared",
            ],
        }
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "vessel-scale" => Ok(EvalMode::VesselScale),
            "content-scale" => Ok(EvalMode::ContentScale),
            "segmentation" => Ok(EvalMode::Segmentation),
            _ => Err(Error::InvalidConfig(format!(
                "unknown mode '{s}' (expected vessel-scale, content-scale or segmentation)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RowMetrics {
    Points(EvalReport),
    Segmentation(SegReport),
}

impl RowMetrics {
    pub fn values(&self) -> Vec<f64> {
        match self {
            RowMetrics::Points(r) => vec![
                r.mae,
                r.mad,
                r.max_dst,
                r.mae_over_mad,
                r.mae_over_maxdst,
                r.chamfer,
                r.chamfer_over_mad,
                r.chamfer_over_maxdst,
                r.r_squared,
            ],
            RowMetrics::Segmentation(r) => vec![r.iou, r.precision, r.recall],
        }
    }
}

/// Why a row carries no metrics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Absence {
    /// Object not visible in the ground truth; nothing to score.
    NotVisible,
    MissingPrediction(String),
    Error(String),
}

impl Absence {
    /// Counts against the batch, unlike an invisible object.
    pub fn is_failure(&self) -> bool {
        !matches!(self, Absence::NotVisible)
    }

    fn describe(&self) -> String {
        match self {
            Absence::NotVisible => "not visible".into(),
            Absence::MissingPrediction(p) => format!("missing prediction {p}"),
            Absence::Error(e) => e.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub seed: u64,
    pub object: Role,
    pub result: Result<RowMetrics, Absence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub object: Role,
    pub count: usize,
    /// Column means over present rows (ratios are averaged per image).
    pub means: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub mode: EvalMode,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl ReportDocument {
    /// Sorts rows by (seed, object) and computes the per-object means.
    pub fn new(mode: EvalMode, mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by_key(|r| (r.seed, r.object));
        let columns: Vec<String> = mode.columns().iter().map(|c| c.to_string()).collect();
        let aggregates = Role::ALL
            .iter()
            .filter_map(|&object| {
                let present: Vec<Vec<f64>> = rows
                    .iter()
                    .filter(|r| r.object == object)
                    .filter_map(|r| r.result.as_ref().ok().map(|m| m.values()))
                    .collect();
                if present.is_empty() {
                    return None;
                }
                let n = present.len() as f64;
                let means = (0..columns.len())
                    .map(|c| present.iter().map(|v| v[c]).sum::<f64>() / n)
                    .collect();
                Some(AggregateRow {
                    object,
                    count: present.len(),
                    means,
                })
            })
            .collect();
        ReportDocument {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            mode,
            columns,
            rows,
            aggregates,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.result.as_ref().err().is_some_and(Absence::is_failure))
    }

    pub fn aggregate(&self, object: Role) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.object == object)
    }

    /// Mean of `column` for `object`, if any row is present.
    pub fn mean(&self, object: Role, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.aggregate(object).map(|a| a.means[c])
    }

    /// Machine-readable table; absent rows leave metric cells empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["seed".to_string(), "object".into(), "status".into()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        let blank = vec![String::new(); self.columns.len()];
        for r in &self.rows {
            let mut rec = vec![r.seed.to_string(), r.object.to_string()];
            match &r.result {
                Ok(m) => {
                    rec.push("ok".into());
                    rec.extend(m.values().iter().map(|v| v.to_string()));
                }
                Err(a) => {
                    rec.push(a.describe());
                    rec.extend(blank.iter().cloned());
                }
            }
            w.write_record(&rec).expect("in-memory write");
        }
        for a in &self.aggregates {
            let mut rec = vec!["mean".to_string(), a.object.to_string(), format!("n={}", a.count)];
            rec.extend(a.means.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Human-readable table; ratio columns in percent.
    pub fn to_table(&self) -> String {
        let percent = |c: &str| c.contains("_over_") || matches!(c, "iou" | "precision" | "recall");
        let fmt = |c: &str, v: f64| {
            if percent(c) {
                format!("{:.3}%", v * 100.0)
            } else {
                format!("{v:.6}")
            }
        };
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["seed".to_string(), "object".into()];
        header.extend(self.columns.iter().map(|c| {
            if percent(c) {
                format!("{c} [%]")
            } else {
                c.clone()
            }
        }));
        lines.push(header);
        for r in &self.rows {
            let mut l = vec![r.seed.to_string(), r.object.to_string()];
            match &r.result {
                Ok(m) => l.extend(self.columns.iter().zip(m.values()).map(|(c, v)| fmt(c, v))),
                Err(a) => l.push(format!("({})", a.describe())),
            }
            lines.push(l);
        }
        for a in &self.aggregates {
            let mut l = vec![format!("mean n={}", a.count), a.object.to_string()];
            l.extend(self.columns.iter().zip(&a.means).map(|(c, &v)| fmt(c, v)));
            lines.push(l);
        }
        let ncol = lines[0].len();
        let widths: Vec<usize> = (0..ncol)
            .map(|c| lines.iter().filter_map(|l| l.get(c)).map(|s| s.len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "mode: {}  (ratios averaged per image)", self.mode.as_str());
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    // a long absence note spills over the metric columns
                    if l.len() < ncol && c == l.len() - 1 {
                        s.clone()
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}
