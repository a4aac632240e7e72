//! Desk-scale robustness experiment: train the toy scorer with and without
//! StrongAugment on synthetic tissue tiles, score shifted copies of a test
//! set written through the dataset pipeline, and compare the reports.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use strongaug::imgcore::io;
use strongaug::metrics::{build_reports, PredictionSet, ReportAxes, RobustnessReport};
use strongaug::policies::augment;
use strongaug::rng::stream;
use strongaug::shiftgen::{shift_dataset, stain_grid, LoadedManifest, ShiftSpec, DEFAULT_STAIN_GRID};
use strongaug::stain::{mean_stain_model, DEFAULT_ALPHA, DEFAULT_BACKGROUND, DEFAULT_BETA};
use strongaug::transforms::default_eval_grid;
use strongaug::{ImageRGB8, PolicyConfig, TransformKind};

use super::synth::{tissue_tile, write_dataset};
use super::toy_scorer::{features, ToyScorer, FEATURES};

pub struct DemoConfig {
    pub train_tiles: usize,
    pub test_tiles: usize,
    pub tile_size: u32,
    pub runs: usize,
    pub augmented_copies: usize,
    pub strong_p: f64,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            train_tiles: 2000,
            test_tiles: 400,
            tile_size: 32,
            runs: 3,
            augmented_copies: 2,
            strong_p: 0.5,
            seed: 2024,
        }
    }
}

pub struct ArmResult {
    pub name: &'static str,
    pub reports: Vec<RobustnessReport>,
    pub clean: f64,
    pub worst_stain: f64,
}

impl ArmResult {
    pub fn report(&self, pred: impl Fn(&ReportAxes) -> bool) -> Option<&RobustnessReport> {
        self.reports.iter().find(|r| pred(&r.axes))
    }

    pub fn stain(&self) -> &RobustnessReport {
        self.report(|a| matches!(a, ReportAxes::StainGrid { .. }))
            .expect("stain report")
    }

    pub fn worst_stain_drop(&self) -> f64 {
        self.clean - self.worst_stain
    }
}

pub struct DemoOutcome {
    pub baseline: ArmResult,
    pub augmented: ArmResult,
    pub out_dir: PathBuf,
}

fn make_tiles(n: usize, size: u32, seed: u64, offset: u64) -> Vec<(ImageRGB8, u8)> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let label = (i % 2) as u8;
            let mut rng = stream(seed, offset + i as u64);
            (tissue_tile(&mut rng, label, size), label)
        })
        .collect()
}

/// Bootstrap resample for run `run`, so runs differ even without
/// augmentation.
fn bootstrap(n: usize, seed: u64, run: usize) -> Vec<usize> {
    let mut rng = stream(seed ^ 0xB007, run as u64);
    let idx: Vec<usize> = (0..n).collect();
    (0..n).map(|_| *idx.choose(&mut rng).unwrap()).collect()
}

fn train_arm(
    train: &[(ImageRGB8, u8)],
    cfg: &DemoConfig,
    run: usize,
    policy: Option<&PolicyConfig>,
) -> ToyScorer {
    let picks = bootstrap(train.len(), cfg.seed, run);
    let samples: Vec<([f64; FEATURES], u8)> = picks
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, &i)| {
            let (img, label) = &train[i];
            let feats: Vec<([f64; FEATURES], u8)> = match policy {
                None => vec![(features(img), *label)],
                Some(p) => (0..cfg.augmented_copies)
                    .map(|c| {
                        let idx = (k * cfg.augmented_copies + c) as u64;
                        let mut rng = stream(cfg.seed.wrapping_add(1 + run as u64), idx);
                        let (aug, _) = augment(img, p, &mut rng).unwrap();
                        (features(&aug), *label)
                    })
                    .collect(),
            };
            feats
        })
        .collect();
    let (xs, ys): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
    ToyScorer::train(&xs, &ys)
}

fn score_dataset(model: &ToyScorer, dir: &Path, out_csv: &Path) {
    let loaded = LoadedManifest::load(dir.join("manifest.json")).unwrap();
    let records: Vec<strongaug::metrics::Prediction> = loaded
        .manifest
        .entries
        .par_iter()
        .map(|e| {
            let img = io::read_image(loaded.image_path(e)).unwrap();
            strongaug::metrics::Prediction {
                id: e.id.clone(),
                label: e.label,
                score: model.score(&img),
            }
        })
        .collect();
    let set = PredictionSet::new("", "", records).unwrap();
    fs::create_dir_all(out_csv.parent().unwrap()).unwrap();
    fs::write(out_csv, set.to_csv()).unwrap();
}

fn dataset_dirs(root: &Path) -> Vec<(String, PathBuf)> {
    let mut v: Vec<(String, PathBuf)> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.join("manifest.json").exists())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), p))
        .collect();
    v.sort();
    v
}

fn write_renderings(reports: &[RobustnessReport], dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    for r in reports {
        let stem = r.axes.title();
        fs::write(dir.join(format!("{stem}.csv")), r.to_csv_matrix()).unwrap();
        fs::write(dir.join(format!("{stem}.svg")), r.to_svg()).unwrap();
        if let (Some(csv), Some(svg)) = (r.pp_csv_matrix(), r.pp_svg()) {
            fs::write(dir.join(format!("{stem}_pp.csv")), csv).unwrap();
            fs::write(dir.join(format!("{stem}_pp.svg")), svg).unwrap();
        }
    }
    let json = serde_json::to_string_pretty(reports).unwrap();
    fs::write(dir.join("report.json"), json).unwrap();
}

fn evaluate_arm(
    name: &'static str,
    models: &[ToyScorer],
    datasets: &[(String, PathBuf)],
    out_dir: &Path,
) -> ArmResult {
    let pred_root = out_dir.join("predictions").join(name);
    for (r, model) in models.iter().enumerate() {
        datasets.par_iter().for_each(|(ds, dir)| {
            score_dataset(model, dir, &pred_root.join(format!("run{r}")).join(format!("{ds}.csv")));
        });
    }
    let mut sets = Vec::new();
    for r in 0..models.len() {
        for (ds, _) in datasets {
            let path = pred_root.join(format!("run{r}")).join(format!("{ds}.csv"));
            sets.push(PredictionSet::read_csv(&path).unwrap());
        }
    }
    let reports = build_reports(&sets).unwrap();
    let clean = reports
        .iter()
        .find_map(|r| match &r.axes {
            ReportAxes::Datasets { names } => {
                let i = names.iter().position(|n| n == "clean")?;
                Some(r.cells[0][i].mean)
            }
            _ => None,
        })
        .expect("clean dataset scored");
    let worst_stain = reports
        .iter()
        .find(|r| matches!(r.axes, ReportAxes::StainGrid { .. }))
        .expect("stain grid scored")
        .worst_mean();
    ArmResult {
        name,
        reports,
        clean,
        worst_stain,
    }
}

pub fn run_demo(cfg: &DemoConfig, out_dir: &Path) -> DemoOutcome {
    let train = make_tiles(cfg.train_tiles, cfg.tile_size, cfg.seed, 0);
    let test = make_tiles(cfg.test_tiles, cfg.tile_size, cfg.seed, 1 << 32);

    let data_root = out_dir.join("datasets");
    let clean_dir = data_root.join("clean");
    write_dataset(&clean_dir, "t", &test);
    let loaded = LoadedManifest::load(clean_dir.join("manifest.json")).unwrap();

    let test_images: Vec<ImageRGB8> = test.iter().map(|(i, _)| i.clone()).collect();
    let model =
        mean_stain_model(&test_images, DEFAULT_BETA, DEFAULT_ALPHA, DEFAULT_BACKGROUND).unwrap();
    stain_grid(&loaded, &model, &DEFAULT_STAIN_GRID, &DEFAULT_STAIN_GRID, &data_root).unwrap();
    for m in default_eval_grid(TransformKind::Brightness) {
        let spec = ShiftSpec::transform(m, cfg.seed);
        shift_dataset(&loaded, &spec, &data_root.join(spec.dataset_name())).unwrap();
    }
    let datasets = dataset_dirs(&data_root);

    let policy = PolicyConfig::strong(cfg.strong_p).unwrap();
    let baseline_models: Vec<ToyScorer> =
        (0..cfg.runs).map(|r| train_arm(&train, cfg, r, None)).collect();
    let augmented_models: Vec<ToyScorer> = (0..cfg.runs)
        .map(|r| train_arm(&train, cfg, r, Some(&policy)))
        .collect();

    let baseline = evaluate_arm("baseline", &baseline_models, &datasets, out_dir);
    let mut augmented = evaluate_arm("strongaugment", &augmented_models, &datasets, out_dir);
    augmented.reports = augmented
        .reports
        .into_iter()
        .map(|r| {
            let base = baseline.reports.iter().find(|b| b.axes == r.axes).unwrap();
            r.with_baseline(base).unwrap()
        })
        .collect();

    write_renderings(&baseline.reports, &out_dir.join("reports").join("baseline"));
    write_renderings(&augmented.reports, &out_dir.join("reports").join("strongaugment"));
    DemoOutcome {
        baseline,
        augmented,
        out_dir: out_dir.to_path_buf(),
    }
}
