//! Score simulated predictions on a brightness grid and compare two
//! model families as an AUROC matrix and a percentage-point difference.

use rand::Rng;
use strongaug::metrics::{build_reports, Prediction, PredictionSet};
use strongaug::rng::stream;
use strongaug::transforms::default_eval_grid;
use strongaug::TransformKind;

/// Scores whose class separation shrinks as brightness moves away from 1.
/// `sensitivity` controls how fast.
fn simulate(model: &str, sensitivity: f64, seed: u64) -> Vec<PredictionSet> {
    default_eval_grid(TransformKind::Brightness)
        .into_iter()
        .enumerate()
        .map(|(d, m)| {
            let mut rng = stream(seed, d as u64);
            let separation = 2.0 * (-sensitivity * (m.value() - 1.0).abs()).exp();
            let records = (0..400)
                .map(|i| {
                    let label = (i % 2) as u8;
                    let noise: f64 = rng.random_range(-1.5..1.5);
                    Prediction { id: format!("x{i}"), label, score: label as f64 * separation + noise }
                })
                .collect();
            PredictionSet::new(model, format!("brightness_m{:?}", m.value()), records).unwrap()
        })
        .collect()
}

fn main() -> strongaug::Result<()> {
    let fragile: Vec<PredictionSet> = (0..3).flat_map(|s| simulate(&format!("base{s}"), 3.0, s)).collect();
    let robust: Vec<PredictionSet> = (0..3).flat_map(|s| simulate(&format!("aug{s}"), 0.5, 10 + s)).collect();

    let base = build_reports(&fragile)?.remove(0);
    let aug = build_reports(&robust)?.remove(0).with_baseline(&base)?;
    println!("baseline AUROC x100\n{}", base.to_csv_matrix());
    println!("augmented AUROC x100\n{}", aug.to_csv_matrix());
    println!("augmented minus baseline, pp\n{}", aug.pp_csv_matrix().unwrap());
    println!("worst cell: baseline {:.3}, augmented {:.3}", base.worst_mean(), aug.worst_mean());
    Ok(())
}
