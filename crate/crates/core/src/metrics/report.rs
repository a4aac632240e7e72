use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auroc, MetricsError, PredictionSet};
use crate::shiftgen::DatasetCoord;
use crate::transforms::TransformKind;

/// What the rows and columns of a report grid stand for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportAxes {
    /// One row, one column per magnitude.
    Transform {
        kind: TransformKind,
        magnitudes: Vec<f64>,
    },
    /// Rows are haematoxylin multipliers, columns eosin multipliers.
    StainGrid { h: Vec<f64>, e: Vec<f64> },
    /// One row, one column per named dataset.
    Datasets { names: Vec<String> },
}

impl ReportAxes {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            ReportAxes::Transform { magnitudes, .. } => (1, magnitudes.len()),
            ReportAxes::StainGrid { h, e } => (h.len(), e.len()),
            ReportAxes::Datasets { names } => (1, names.len()),
        }
    }

    /// Dataset coordinate of cell `(row, col)`.
    pub fn coord(&self, row: usize, col: usize) -> DatasetCoord {
        match self {
            ReportAxes::Transform { kind, magnitudes } => DatasetCoord::Transform {
                kind: *kind,
                value: magnitudes[col],
            },
            ReportAxes::StainGrid { h, e } => DatasetCoord::Stain { h: h[row], e: e[col] },
            ReportAxes::Datasets { names } => DatasetCoord::Named(names[col].clone()),
        }
    }

    pub fn title(&self) -> String {
        match self {
            ReportAxes::Transform { kind, .. } => kind.to_string(),
            ReportAxes::StainGrid { .. } => "stain".to_string(),
            ReportAxes::Datasets { .. } => "datasets".to_string(),
        }
    }

    fn row_title(&self) -> &'static str {
        match self {
            ReportAxes::Transform { .. } => "magnitude",
            ReportAxes::StainGrid { .. } => "h\\e",
            ReportAxes::Datasets { .. } => "dataset",
        }
    }

    fn row_labels(&self) -> Vec<String> {
        match self {
            ReportAxes::Transform { kind, .. } => vec![kind.to_string()],
            ReportAxes::StainGrid { h, .. } => h.iter().map(|v| format!("{v:?}")).collect(),
            ReportAxes::Datasets { .. } => vec!["auroc".to_string()],
        }
    }

    fn col_labels(&self) -> Vec<String> {
        match self {
            ReportAxes::Transform { magnitudes, .. } => {
                magnitudes.iter().map(|v| format!("{v:?}")).collect()
            }
            ReportAxes::StainGrid { e, .. } => e.iter().map(|v| format!("{v:?}")).collect(),
            ReportAxes::Datasets { names } => names.clone(),
        }
    }
}

/// AUROC of one model on every cell of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub model_id: String,
    pub axes: ReportAxes,
    /// Row-major, shaped like `axes`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub mean: f64,
    pub std: f64,
    pub n_models: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub axes: ReportAxes,
    pub cells: Vec<Vec<ReportCell>>,
    /// `100 * (mean - baseline mean)` per cell, when a baseline was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pp_vs_baseline: Option<Vec<Vec<f64>>>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let mut mean = xs.iter().sum::<f64>() / n;
    mean += xs.iter().map(|x| x - mean).sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-cell mean and sample standard deviation over model runs.
pub fn aggregate(runs: &[RunResult]) -> Result<RobustnessReport, MetricsError> {
    let first = runs.first().ok_or(MetricsError::Empty)?;
    let (rows, cols) = first.axes.shape();
    for run in runs {
        if run.axes != first.axes {
            return Err(MetricsError::AxisMismatch(format!(
                "model `{}` has different axes from model `{}`",
                run.model_id, first.model_id
            )));
        }
        if run.values.len() != rows || run.values.iter().any(|r| r.len() != cols) {
            return Err(MetricsError::AxisMismatch(format!(
                "model `{}` values are not {rows}x{cols}",
                run.model_id
            )));
        }
    }
    let cells = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let xs: Vec<f64> = runs.iter().map(|run| run.values[r][c]).collect();
                    let (mean, std) = mean_std(&xs);
                    ReportCell {
                        mean,
                        std,
                        n_models: xs.len(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(RobustnessReport {
        axes: first.axes.clone(),
        cells,
        pp_vs_baseline: None,
    })
}

/// Cellwise `100 * (report - baseline)` of mean AUROC.
pub fn pp_difference(
    report: &RobustnessReport,
    baseline: &RobustnessReport,
) -> Result<Vec<Vec<f64>>, MetricsError> {
    if report.axes != baseline.axes {
        return Err(MetricsError::AxisMismatch(format!(
            "`{}` report and baseline have different axes",
            report.axes.title()
        )));
    }
    Ok(report
        .cells
        .iter()
        .zip(&baseline.cells)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| 100.0 * (x.mean - y.mean)).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum CoordKey {
    Transform(TransformKind, u64),
    Stain(u64, u64),
    Named(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Group {
    Transform(TransformKind),
    Stain,
    Named,
}

/// Compute AUROC for every prediction set and assemble one report per
/// axis group: one per transform kind, one stain grid, and one for any
/// datasets whose names carry no coordinates. Every model must cover
/// every cell seen in any model.
pub fn build_reports(sets: &[PredictionSet]) -> Result<Vec<RobustnessReport>, MetricsError> {
    if sets.is_empty() {
        return Err(MetricsError::Empty);
    }
    let aurocs: Vec<f64> = sets.par_iter().map(auroc).collect::<Result<_, _>>()?;

    let mut names: Vec<String> = Vec::new();
    let mut key_of = |coord: DatasetCoord| match coord {
        DatasetCoord::Transform { kind, value } => CoordKey::Transform(kind, value.to_bits()),
        DatasetCoord::Stain { h, e } => CoordKey::Stain(h.to_bits(), e.to_bits()),
        DatasetCoord::Named(n) => CoordKey::Named(match names.iter().position(|x| *x == n) {
            Some(i) => i,
            None => {
                names.push(n);
                names.len() - 1
            }
        }),
    };

    let mut per_model: BTreeMap<&str, HashMap<CoordKey, f64>> = BTreeMap::new();
    let mut all_keys: BTreeSet<CoordKey> = BTreeSet::new();
    for (set, &a) in sets.iter().zip(&aurocs) {
        let key = key_of(DatasetCoord::parse(&set.dataset_id));
        all_keys.insert(key);
        if per_model.entry(&set.model_id).or_default().insert(key, a).is_some() {
            return Err(MetricsError::AxisMismatch(format!(
                "model `{}` has two prediction sets for dataset `{}`",
                set.model_id, set.dataset_id
            )));
        }
    }

    let mut groups: BTreeMap<Group, Vec<CoordKey>> = BTreeMap::new();
    for &k in &all_keys {
        let g = match k {
            CoordKey::Transform(kind, _) => Group::Transform(kind),
            CoordKey::Stain(..) => Group::Stain,
            CoordKey::Named(_) => Group::Named,
        };
        groups.entry(g).or_default().push(k);
    }

    let mut reports = Vec::new();
    for (group, keys) in groups {
        let (axes, grid): (ReportAxes, Vec<Vec<CoordKey>>) = match group {
            Group::Transform(kind) => {
                let mut m: Vec<f64> = keys
                    .iter()
                    .map(|k| match k {
                        CoordKey::Transform(_, bits) => f64::from_bits(*bits),
                        _ => unreachable!(),
                    })
                    .collect();
                m.sort_by(f64::total_cmp);
                let row = m.iter().map(|v| CoordKey::Transform(kind, v.to_bits())).collect();
                (
                    ReportAxes::Transform {
                        kind,
                        magnitudes: m,
                    },
                    vec![row],
                )
            }
            Group::Stain => {
                let mut hs = BTreeSet::new();
                let mut es = BTreeSet::new();
                for k in &keys {
                    if let CoordKey::Stain(h, e) = k {
                        hs.insert(OrdF64(f64::from_bits(*h)));
                        es.insert(OrdF64(f64::from_bits(*e)));
                    }
                }
                let h: Vec<f64> = hs.into_iter().map(|v| v.0).collect();
                let e: Vec<f64> = es.into_iter().map(|v| v.0).collect();
                let grid = h
                    .iter()
                    .map(|hv| {
                        e.iter()
                            .map(|ev| CoordKey::Stain(hv.to_bits(), ev.to_bits()))
                            .collect()
                    })
                    .collect();
                (ReportAxes::StainGrid { h, e }, grid)
            }
            Group::Named => {
                let mut idx: Vec<usize> = keys
                    .iter()
                    .map(|k| match k {
                        CoordKey::Named(i) => *i,
                        _ => unreachable!(),
                    })
                    .collect();
                idx.sort_by(|a, b| names[*a].cmp(&names[*b]));
                let row = idx.iter().map(|i| CoordKey::Named(*i)).collect();
                (
                    ReportAxes::Datasets {
                        names: idx.iter().map(|i| names[*i].clone()).collect(),
                    },
                    vec![row],
                )
            }
        };
        let runs = per_model
            .iter()
            .map(|(model, values)| {
                let grid_values = grid
                    .iter()
                    .enumerate()
                    .map(|(r, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(c, key)| {
                                values.get(key).copied().ok_or_else(|| {
                                    MetricsError::AxisMismatch(format!(
                                        "model `{model}` has no predictions for `{}`",
                                        axes.coord(r, c).name()
                                    ))
                                })
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(RunResult {
                    model_id: model.to_string(),
                    axes: axes.clone(),
                    values: grid_values,
                })
            })
            .collect::<Result<Vec<_>, MetricsError>>()?;
        reports.push(aggregate(&runs)?);
    }
    Ok(reports)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Cell annotation: mean AUROC times 100, rounded to the closest integer.
pub fn annotate(mean: f64) -> i64 {
    (mean * 100.0).round() as i64
}

impl RobustnessReport {
    /// Attach percentage-point differences against `baseline`.
    pub fn with_baseline(mut self, baseline: &RobustnessReport) -> Result<Self, MetricsError> {
        self.pp_vs_baseline = Some(pp_difference(&self, baseline)?);
        Ok(self)
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .map(|r| r.iter().map(|c| c.mean).collect())
            .collect()
    }

    /// Lowest mean AUROC over all cells.
    pub fn worst_mean(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .map(|c| c.mean)
            .fold(f64::INFINITY, f64::min)
    }

    fn matrix_csv(&self, cell: impl Fn(usize, usize) -> String) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.axes.row_title().to_string()];
        header.extend(self.axes.col_labels());
        w.write_record(&header).expect("in-memory write");
        for (r, label) in self.axes.row_labels().into_iter().enumerate() {
            let mut rec = vec![label];
            rec.extend((0..self.cells[r].len()).map(|c| cell(r, c)));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Grid of rounded `mean * 100` annotations.
    pub fn to_csv_matrix(&self) -> String {
        self.matrix_csv(|r, c| annotate(self.cells[r][c].mean).to_string())
    }

    /// Grid of percentage-point differences, one decimal, if a baseline
    /// was attached.
    pub fn pp_csv_matrix(&self) -> Option<String> {
        let pp = self.pp_vs_baseline.as_ref()?;
        Some(self.matrix_csv(|r, c| format!("{:.1}", pp[r][c])))
    }

    /// Heatmap of mean AUROC, each cell annotated with `mean * 100`
    /// rounded to an integer.
    pub fn to_svg(&self) -> String {
        render_svg(
            &format!("{} (mean AUROC x 100)", self.axes.title()),
            &self.axes,
            |r, c| {
                let m = self.cells[r][c].mean;
                (sequential((m - 0.5) * 2.0), annotate(m).to_string())
            },
        )
    }

    /// Heatmap of percentage-point differences, if a baseline was attached.
    pub fn pp_svg(&self) -> Option<String> {
        let pp = self.pp_vs_baseline.as_ref()?;
        Some(render_svg(
            &format!("{} (pp vs baseline)", self.axes.title()),
            &self.axes,
            |r, c| {
                let v = pp[r][c];
                (diverging(v / 50.0), format!("{:+}", v.round() as i64))
            },
        ))
    }
}

type Rgb = [u8; 3];

fn lerp_stops(stops: &[Rgb], t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0) * (stops.len() - 1) as f64;
    let i = (t.floor() as usize).min(stops.len() - 2);
    let f = t - i as f64;
    let mut out = [0; 3];
    for k in 0..3 {
        let a = stops[i][k] as f64;
        let b = stops[i + 1][k] as f64;
        out[k] = (a + (b - a) * f).round() as u8;
    }
    out
}

/// Viridis-like ramp on `[0, 1]`.
fn sequential(t: f64) -> Rgb {
    const STOPS: [Rgb; 5] = [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ];
    lerp_stops(&STOPS, t)
}

/// Red to white to blue on `[-1, 1]`.
fn diverging(t: f64) -> Rgb {
    const STOPS: [Rgb; 3] = [[178, 24, 43], [247, 247, 247], [33, 102, 172]];
    lerp_stops(&STOPS, (t + 1.0) / 2.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_svg(title: &str, axes: &ReportAxes, cell: impl Fn(usize, usize) -> (Rgb, String)) -> String {
    const CW: usize = 64;
    const CH: usize = 40;
    const LEFT: usize = 110;
    const TOP: usize = 60;
    let (rows, cols) = axes.shape();
    let width = LEFT + cols * CW + 20;
    let height = TOP + rows * CH + 20;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{LEFT}" y="20" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="10" y="{}">{}</text>"#,
        TOP - 10,
        escape(axes.row_title())
    );
    for (c, label) in axes.col_labels().iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + c * CW + CW / 2,
            TOP - 10,
            escape(label)
        );
    }
    for (r, label) in axes.row_labels().iter().enumerate() {
        let y = TOP + r * CH;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 8,
            y + CH / 2 + 4,
            escape(label)
        );
        for c in 0..cols {
            let (rgb, text) = cell(r, c);
            let x = LEFT + c * CW;
            let luminance = 0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64;
            let ink = if luminance < 128.0 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CW}" height="{CH}" fill="rgb({},{},{})" stroke="#ffffff"/>"##,
                rgb[0], rgb[1], rgb[2]
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{}</text>"#,
                x + CW / 2,
                y + CH / 2 + 4,
                escape(&text)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Prediction;

    fn run(model: &str, v: f64) -> RunResult {
        RunResult {
            model_id: model.into(),
            axes: ReportAxes::Datasets {
                names: vec!["clean".into()],
            },
            values: vec![vec![v]],
        }
    }

    #[test]
    fn aggregate_examples() {
        let r = aggregate(&[run("a", 0.7)]).unwrap();
        assert_eq!(r.cells[0][0], ReportCell { mean: 0.7, std: 0.0, n_models: 1 });

        let five: Vec<_> = (0..5).map(|i| run(&i.to_string(), 0.9)).collect();
        let r = aggregate(&five).unwrap();
        assert_eq!((r.cells[0][0].mean, r.cells[0][0].std), (0.9, 0.0));

        let r = aggregate(&[run("a", 0.8), run("b", 0.9)]).unwrap();
        assert!((r.cells[0][0].mean - 0.85).abs() < 1e-12);
        assert!((r.cells[0][0].std - 0.005f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn aggregate_rejects_mismatched_axes() {
        let mut b = run("b", 0.5);
        b.axes = ReportAxes::Datasets {
            names: vec!["other".into()],
        };
        let err = aggregate(&[run("a", 0.5), b]).unwrap_err();
        assert_eq!(err.kind(), "AxisMismatch");
    }

    #[test]
    fn pp_examples() {
        let a = aggregate(&[run("a", 0.95)]).unwrap();
        let b = aggregate(&[run("a", 0.45)]).unwrap();
        let pp = pp_difference(&a, &b).unwrap();
        assert!((pp[0][0] - 50.0).abs() < 1e-9);
        assert_eq!(pp_difference(&b, &a).unwrap()[0][0], -pp[0][0]);
        assert_eq!(pp_difference(&a, &a).unwrap()[0][0], 0.0);
    }

    fn set(model: &str, dataset: &str, flip: bool) -> PredictionSet {
        let records = (0..4)
            .map(|i| Prediction {
                id: i.to_string(),
                label: (i >= 2) as u8,
                score: if flip { -(i as f64) } else { i as f64 },
            })
            .collect();
        PredictionSet::new(model, dataset, records).unwrap()
    }

    #[test]
    fn reports_group_by_axis() {
        let mut sets = Vec::new();
        for model in ["m0", "m1"] {
            for ds in ["stain_h0.0_e1.0", "stain_h1.0_e1.0", "stain_h0.0_e0.0", "stain_h1.0_e0.0"] {
                sets.push(set(model, ds, false));
            }
            sets.push(set(model, "brightness_m0.4", model == "m1"));
            sets.push(set(model, "clean", false));
        }
        let reports = build_reports(&sets).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(matches!(reports[0].axes, ReportAxes::Transform { kind: TransformKind::Brightness, .. }));
        assert_eq!(reports[0].cells[0][0].mean, 0.5);
        assert!(reports[0].cells[0][0].std > 0.0);
        assert_eq!(
            reports[1].axes,
            ReportAxes::StainGrid {
                h: vec![0.0, 1.0],
                e: vec![0.0, 1.0]
            }
        );
        assert_eq!(reports[1].cells[1][1].n_models, 2);
        assert_eq!(reports[1].to_csv_matrix(), "h\\e,0.0,1.0\n0.0,100,100\n1.0,100,100\n");
        assert!(reports[1].to_svg().contains(">100</text>"));

        sets.pop();
        assert_eq!(build_reports(&sets).unwrap_err().kind(), "AxisMismatch");
    }
}
