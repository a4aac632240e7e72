//! A deliberately simple image scorer: logistic regression on per-channel
//! colour histograms. It stands in for a trained network when exercising
//! the evaluation pipeline end to end.

#![allow(dead_code)]

use strongaug::ImageRGB8;

pub const BINS: usize = 16;
pub const FEATURES: usize = 3 * BINS;

/// Normalised per-channel histograms, `BINS` bins each.
pub fn features(img: &ImageRGB8) -> [f64; FEATURES] {
    let mut f = [0.0; FEATURES];
    let n = img.pixel_count() as f64;
    for p in img.pixels() {
        for c in 0..3 {
            f[c * BINS + p[c] as usize * BINS / 256] += 1.0 / n;
        }
    }
    f
}

#[derive(Debug, Clone)]
pub struct ToyScorer {
    mean: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl ToyScorer {
    /// Full-batch gradient descent on standardised features with a small
    /// L2 penalty. Deterministic for a given input order.
    pub fn train(xs: &[[f64; FEATURES]], ys: &[u8]) -> Self {
        let n = xs.len() as f64;
        let mut mean = vec![0.0; FEATURES];
        let mut scale = vec![0.0; FEATURES];
        for x in xs {
            for j in 0..FEATURES {
                mean[j] += x[j] / n;
            }
        }
        for x in xs {
            for j in 0..FEATURES {
                scale[j] += (x[j] - mean[j]).powi(2) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = s.sqrt().max(1e-6);
        }
        let z: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| (0..FEATURES).map(|j| (x[j] - mean[j]) / scale[j]).collect())
            .collect();

        let (lr, l2) = (0.5, 1e-3);
        let mut w = vec![0.0; FEATURES];
        let mut b = 0.0;
        for _ in 0..400 {
            let mut gw = vec![0.0; FEATURES];
            let mut gb = 0.0;
            for (zi, &y) in z.iter().zip(ys) {
                let p = sigmoid(b + zi.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
                let err = p - y as f64;
                for j in 0..FEATURES {
                    gw[j] += err * zi[j] / n;
                }
                gb += err / n;
            }
            for j in 0..FEATURES {
                w[j] -= lr * (gw[j] + l2 * w[j]);
            }
            b -= lr * gb;
        }
        Self {
            mean,
            scale,
            weights: w,
            bias: b,
        }
    }

    /// Logit of the positive class.
    pub fn score_features(&self, x: &[f64; FEATURES]) -> f64 {
        self.bias
            + (0..FEATURES)
                .map(|j| (x[j] - self.mean[j]) / self.scale[j] * self.weights[j])
                .sum::<f64>()
    }

    pub fn score(&self, img: &ImageRGB8) -> f64 {
        self.score_features(&features(img))
    }
}
