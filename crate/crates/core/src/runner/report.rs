//! CSV reports.
//!
//! | file | columns |
//! |---|---|
//! | `grid.csv` | `dataset,row,column,mean,std,cell,folds` |
//! | `per_class.csv` | `dataset,row,strategy,entry,precision,recall,f1,value` |
//! | `confusion.csv` | `dataset,row,column,true_class,predicted_class,count` |
//! | `precision_recall.csv` | `dataset,row,class,precision,recall` |
//! | `predictions.csv` | `dataset,row,fold,sample,sample_id,true,softmax,softmax_conf,svm_rbf,svm_rbf_conf,svm_poly,svm_poly_conf` |
//! | `classes.csv` | `dataset,class_id,class_name` |
//!
//! `classes.csv` is written together with `predictions.csv`; the pair is
//! what [`load_predictions`] reads back.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::experiment::{Column, DatasetLog, ExperimentResults, PredictionLog, PredictionRecord};
use crate::error::{Error, Result};
use crate::fusion::FusionStrategy;
use crate::metrics::{agreement, accuracy, class_metrics, format_fixed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReportFormat {
    Grid,
    PerClass,
    Confusion,
    PrecisionRecall,
    Predictions,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 5] = [
        ReportFormat::Grid,
        ReportFormat::PerClass,
        ReportFormat::Confusion,
        ReportFormat::PrecisionRecall,
        ReportFormat::Predictions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportFormat::Grid => "grid",
            ReportFormat::PerClass => "per_class",
            ReportFormat::Confusion => "confusion",
            ReportFormat::PrecisionRecall => "precision_recall",
            ReportFormat::Predictions => "predictions",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Grid => "grid.csv",
            ReportFormat::PerClass => "per_class.csv",
            ReportFormat::Confusion => "confusion.csv",
            ReportFormat::PrecisionRecall => "precision_recall.csv",
            ReportFormat::Predictions => "predictions.csv",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grid" => Ok(ReportFormat::Grid),
            "per_class" | "per-class" => Ok(ReportFormat::PerClass),
            "confusion" => Ok(ReportFormat::Confusion),
            "precision_recall" | "pr" => Ok(ReportFormat::PrecisionRecall),
            "predictions" => Ok(ReportFormat::Predictions),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

pub const CLASSES_FILE: &str = "classes.csv";

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn pct(x: f64, decimals: u32) -> String {
    format_fixed(100.0 * x, decimals)
}

fn grid_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for g in &results.grids {
        for (r, row) in g.rows.iter().enumerate() {
            for col in Column::ALL {
                let s = &g.cells[r][col.index()];
                out.push(vec![
                    g.dataset.clone(),
                    row.clone(),
                    col.to_string(),
                    format_fixed(s.mean, 1),
                    format_fixed(s.std, 1),
                    s.render(),
                    s.values.iter().map(|v| format_fixed(*v, 2)).collect::<Vec<_>>().join(";"),
                ]);
            }
        }
    }
    out
}

fn per_class_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    let f4 = Column::Fusion(FusionStrategy::F4);
    let mut out = Vec::new();
    for g in &results.grids {
        let r = g.headline_row();
        let cm = &g.pooled[r][f4.index()];
        let base = || vec![g.dataset.clone(), g.rows[r].clone(), f4.to_string()];
        for (c, m) in class_metrics(cm).iter().enumerate() {
            let mut line = base();
            line.extend([g.class_names[c].clone(), pct(m.precision, 2), pct(m.recall, 2), pct(m.f1, 2), String::new()]);
            out.push(line);
        }
        let mut acc = base();
        acc.extend(["accuracy".into(), String::new(), String::new(), String::new(), pct(accuracy(cm), 2)]);
        out.push(acc);
        let mut kap = base();
        kap.extend(["kappa".into(), String::new(), String::new(), String::new(), format_fixed(agreement(cm).kappa, 3)]);
        out.push(kap);
    }
    out
}

fn confusion_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for g in &results.grids {
        for (r, row) in g.rows.iter().enumerate() {
            for col in Column::ALL {
                let cm = &g.pooled[r][col.index()];
                for t in 0..cm.n_classes() {
                    for p in 0..cm.n_classes() {
                        out.push(vec![
                            g.dataset.clone(),
                            row.clone(),
                            col.to_string(),
                            g.class_names[t].clone(),
                            g.class_names[p].clone(),
                            cm.get(t, p).to_string(),
                        ]);
                    }
                }
            }
        }
    }
    out
}

fn precision_recall_rows(results: &ExperimentResults) -> Vec<Vec<String>> {
    let f4 = Column::Fusion(FusionStrategy::F4);
    let mut out = Vec::new();
    for g in &results.grids {
        for (r, row) in g.rows.iter().enumerate() {
            for (c, m) in class_metrics(&g.pooled[r][f4.index()]).iter().enumerate() {
                out.push(vec![
                    g.dataset.clone(),
                    row.clone(),
                    g.class_names[c].clone(),
                    pct(m.precision, 2),
                    pct(m.recall, 2),
                ]);
            }
        }
    }
    out
}

const PREDICTION_HEADER: [&str; 12] = [
    "dataset",
    "row",
    "fold",
    "sample",
    "sample_id",
    "true",
    "softmax",
    "softmax_conf",
    "svm_rbf",
    "svm_rbf_conf",
    "svm_poly",
    "svm_poly_conf",
];

fn prediction_rows(log: &PredictionLog) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for ds in &log.datasets {
        for rec in &ds.records {
            let mut line = vec![
                ds.name.clone(),
                ds.rows[rec.row].clone(),
                rec.fold.to_string(),
                rec.sample.to_string(),
                ds.sample_ids[rec.sample].clone(),
                rec.truth.to_string(),
            ];
            for (label, conf) in rec.voters {
                line.push(label.to_string());
                line.push(conf.to_string());
            }
            out.push(line);
        }
    }
    out
}

fn class_rows(log: &PredictionLog) -> Vec<Vec<String>> {
    log.datasets
        .iter()
        .flat_map(|ds| {
            ds.class_names
                .iter()
                .enumerate()
                .map(|(i, n)| vec![ds.name.clone(), i.to_string(), n.clone()])
        })
        .collect()
}

/// Writes the requested reports into `out_dir` and returns the written paths.
pub fn emit_reports(results: &ExperimentResults, formats: &[ReportFormat], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    if formats.is_empty() {
        log::warn!("no report formats requested; nothing written");
        return Ok(Vec::new());
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut written = Vec::new();
    for f in formats {
        let mut path = out_dir.join(f.file_name());
        match f {
            ReportFormat::Grid => write_csv(
                &path,
                &["dataset", "row", "column", "mean", "std", "cell", "folds"],
                grid_rows(results),
            )?,
            ReportFormat::PerClass => write_csv(
                &path,
                &["dataset", "row", "strategy", "entry", "precision", "recall", "f1", "value"],
                per_class_rows(results),
            )?,
            ReportFormat::Confusion => write_csv(
                &path,
                &["dataset", "row", "column", "true_class", "predicted_class", "count"],
                confusion_rows(results),
            )?,
            ReportFormat::PrecisionRecall => write_csv(
                &path,
                &["dataset", "row", "class", "precision", "recall"],
                precision_recall_rows(results),
            )?,
            ReportFormat::Predictions => {
                write_csv(&path, &PREDICTION_HEADER, prediction_rows(&results.log))?;
                let classes = out_dir.join(CLASSES_FILE);
                write_csv(&classes, &["dataset", "class_id", "class_name"], class_rows(&results.log))?;
                written.push(path.clone());
                path.clone_from(&classes);
            }
        }
        written.push(path);
    }
    Ok(written)
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>().map_err(|e| csv_error(path, e))?;
    Ok((header, rows))
}

fn field<T: FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::format(path, format!("record {line}: cannot parse field {} ('{raw}')", i + 1)))
}

/// Reads `predictions.csv` and `classes.csv` from a results directory.
pub fn load_predictions(dir: impl AsRef<Path>) -> Result<PredictionLog> {
    let dir = dir.as_ref();
    let class_path = dir.join(CLASSES_FILE);
    let (header, class_recs) = read_records(&class_path)?;
    if header != ["dataset", "class_id", "class_name"] {
        return Err(Error::format(&class_path, "unexpected header"));
    }
    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (i, rec) in class_recs.iter().enumerate() {
        let name = rec.get(0).unwrap_or("").to_string();
        let id: usize = field(&class_path, rec, 1, i + 1)?;
        let entry = classes.entry(name.clone()).or_insert_with(|| {
            order.push(name.clone());
            Vec::new()
        });
        if id != entry.len() {
            return Err(Error::format(&class_path, format!("record {}: class ids must be contiguous", i + 1)));
        }
        entry.push(rec.get(2).unwrap_or("").to_string());
    }

    let pred_path = dir.join(ReportFormat::Predictions.file_name());
    let (header, recs) = read_records(&pred_path)?;
    if header != PREDICTION_HEADER {
        return Err(Error::format(&pred_path, "unexpected header"));
    }
    let mut logs: Vec<DatasetLog> = order
        .iter()
        .map(|n| DatasetLog {
            name: n.clone(),
            class_names: classes[n].clone(),
            sample_ids: Vec::new(),
            folds: 0,
            rows: Vec::new(),
            records: Vec::new(),
        })
        .collect();
    for (i, rec) in recs.iter().enumerate() {
        let line = i + 1;
        let name = rec.get(0).unwrap_or("");
        let ds = logs
            .iter_mut()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::format(&pred_path, format!("record {line}: dataset '{name}' missing from classes")))?;
        let row_name = rec.get(1).unwrap_or("").to_string();
        let row = match ds.rows.iter().position(|r| *r == row_name) {
            Some(r) => r,
            None => {
                ds.rows.push(row_name);
                ds.rows.len() - 1
            }
        };
        let fold: usize = field(&pred_path, rec, 2, line)?;
        let sample: usize = field(&pred_path, rec, 3, line)?;
        if ds.sample_ids.len() <= sample {
            ds.sample_ids.resize(sample + 1, String::new());
        }
        ds.sample_ids[sample] = rec.get(4).unwrap_or("").to_string();
        let truth: usize = field(&pred_path, rec, 5, line)?;
        let mut voters = [(0usize, 0f64); 3];
        for (v, slot) in voters.iter_mut().enumerate() {
            *slot = (field(&pred_path, rec, 6 + 2 * v, line)?, field(&pred_path, rec, 7 + 2 * v, line)?);
        }
        let c = ds.class_names.len();
        if truth >= c || voters.iter().any(|&(l, _)| l >= c) {
            return Err(Error::format(&pred_path, format!("record {line}: label out of range")));
        }
        ds.folds = ds.folds.max(fold + 1);
        ds.records.push(PredictionRecord { row, fold, sample, truth, voters });
    }
    for ds in &mut logs {
        ds.records.sort_by_key(|r| (r.row, r.fold, r.sample));
    }
    Ok(PredictionLog { datasets: logs })
}
