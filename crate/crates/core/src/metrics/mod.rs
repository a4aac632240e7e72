//! AUROC and robustness reports.
//!
//! AUROC is the probability that a random positive outscores a random
//! negative, ties counting one half. It is computed from average ranks,
//! which gives exactly the same value as counting all pairs.

mod report;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{
    aggregate, annotate, build_reports, pp_difference, ReportAxes, ReportCell, RobustnessReport, RunResult,
};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("AUROC is undefined with {positives} positive and {negatives} negative samples")]
    UndefinedAuroc { positives: usize, negatives: usize },
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),
    #[error("sample `{id}` has label `{label}`; labels must be 0 or 1")]
    InvalidLabel { id: String, label: String },
    #[error("sample `{id}` has non-finite score `{score}`")]
    InvalidScore { id: String, score: String },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error("no prediction sets given")]
    Empty,
}

impl MetricsError {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricsError::UndefinedAuroc { .. } => "UndefinedAUROC",
            MetricsError::AxisMismatch(_) => "AxisMismatch",
            MetricsError::DuplicateId(_) => "DuplicateId",
            MetricsError::InvalidLabel { .. } => "InvalidLabel",
            MetricsError::InvalidScore { .. } => "InvalidScore",
            MetricsError::Csv { .. } => "InvalidCsv",
            MetricsError::Empty => "Empty",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: u8,
    pub score: f64,
}

/// Scores of one model on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub model_id: String,
    pub dataset_id: String,
    records: Vec<Prediction>,
}

impl PredictionSet {
    pub fn new(
        model_id: impl Into<String>,
        dataset_id: impl Into<String>,
        records: Vec<Prediction>,
    ) -> Result<Self, MetricsError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(MetricsError::DuplicateId(r.id.clone()));
            }
            if r.label > 1 {
                return Err(MetricsError::InvalidLabel {
                    id: r.id.clone(),
                    label: r.label.to_string(),
                });
            }
            if !r.score.is_finite() {
                return Err(MetricsError::InvalidScore {
                    id: r.id.clone(),
                    score: r.score.to_string(),
                });
            }
        }
        Ok(Self {
            model_id: model_id.into(),
            dataset_id: dataset_id.into(),
            records,
        })
    }

    /// Build from parallel label and score slices, using indices as ids.
    pub fn from_scores(labels: &[u8], scores: &[f64]) -> Result<Self, MetricsError> {
        if labels.len() != scores.len() {
            return Err(MetricsError::AxisMismatch(format!(
                "{} labels but {} scores",
                labels.len(),
                scores.len()
            )));
        }
        let records = labels
            .iter()
            .zip(scores)
            .enumerate()
            .map(|(i, (&label, &score))| Prediction {
                id: i.to_string(),
                label,
                score,
            })
            .collect();
        Self::new("", "", records)
    }

    pub fn records(&self) -> &[Prediction] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Parse `id,label,score` CSV text.
    pub fn parse_csv(
        text: &str,
        model_id: impl Into<String>,
        dataset_id: impl Into<String>,
        origin: &str,
    ) -> Result<Self, MetricsError> {
        let csv_err = |message: String| MetricsError::Csv {
            path: origin.to_string(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| csv_err(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["id", "label", "score"] {
            return Err(csv_err(format!(
                "expected header `id,label,score`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| csv_err(e.to_string()))?;
            let id = row[0].to_string();
            let label = match &row[1] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(MetricsError::InvalidLabel {
                        id,
                        label: other.to_string(),
                    })
                }
            };
            let score = row[2]
                .parse::<f64>()
                .ok()
                .filter(|s| s.is_finite())
                .ok_or_else(|| MetricsError::InvalidScore {
                    id: id.clone(),
                    score: row[2].to_string(),
                })?;
            records.push(Prediction { id, label, score });
        }
        Self::new(model_id, dataset_id, records)
    }

    /// Read a prediction file. The model id is the name of the containing
    /// directory and the dataset id is the file stem, so
    /// `runs/seed3/brightness_m0.4.csv` is model `seed3` on
    /// `brightness_m0.4`.
    pub fn read_csv(path: &Path) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        let name = |p: Option<&std::ffi::OsStr>| {
            p.map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        };
        let model = name(path.parent().and_then(|p| p.file_name()));
        let dataset = name(path.file_stem());
        Ok(Self::parse_csv(&text, model, dataset, &path.display().to_string())?)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "label", "score"]).expect("in-memory write");
        for r in &self.records {
            w.write_record([r.id.as_str(), &r.label.to_string(), &format!("{:?}", r.score)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Area under the ROC curve of `preds`.
pub fn auroc(preds: &PredictionSet) -> Result<f64, MetricsError> {
    let mut pairs: Vec<(f64, u8)> = preds.records.iter().map(|r| (r.score, r.label)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = pairs.iter().filter(|p| p.1 == 1).count();
    let negatives = pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::UndefinedAuroc {
            positives,
            negatives,
        });
    }
    // Twice the rank sum of the positives, kept integral: a tie block
    // covering 1-based ranks i..=j gets average rank (i + j) / 2.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j + 1 < pairs.len() && pairs[j + 1].0 == pairs[i].0 {
            j += 1;
        }
        let pos_in_block = pairs[i..=j].iter().filter(|p| p.1 == 1).count() as u128;
        rank_sum2 += pos_in_block * ((i + 1) + (j + 1)) as u128;
        i = j + 1;
    }
    let (p, n) = (positives as u128, negatives as u128);
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}

/// AUROC of parallel label and score slices.
pub fn auroc_scores(labels: &[u8], scores: &[f64]) -> Result<f64, MetricsError> {
    auroc(&PredictionSet::from_scores(labels, scores)?)
}
