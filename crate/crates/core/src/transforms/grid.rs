use super::{Magnitude, MagnitudeDomain, TransformKind};

const CONTINUOUS_POINTS: usize = 7;

fn snap(v: f64) -> f64 {
    (v * 1e6).round() / 1e6 + 0.0
}

/// Default shifted-evaluation magnitudes for `kind`, in increasing order.
///
/// Continuous kinds get seven evenly spaced points over their evaluation
/// range (rounded to 1e-6); integer kinds get every integer in it;
/// parameterless kinds get their single canonical magnitude. The no-effect
/// value is always present when the kind has one.
pub fn default_eval_grid(kind: TransformKind) -> Vec<Magnitude> {
    let mut values: Vec<f64> = match kind.evaluation_range() {
        MagnitudeDomain::None => vec![0.0],
        MagnitudeDomain::Integer { lo, hi } => (lo..=hi).map(|v| v as f64).collect(),
        MagnitudeDomain::Continuous { lo, hi } => {
            let step = (hi - lo) / (CONTINUOUS_POINTS - 1) as f64;
            (0..CONTINUOUS_POINTS)
                .map(|i| snap(lo + step * i as f64))
                .collect()
        }
    };
    if let Some(ne) = kind.no_effect() {
        if !values.contains(&ne) {
            values.push(ne);
            values.sort_by(|a, b| a.total_cmp(b));
        }
    }
    values
        .into_iter()
        .map(|v| Magnitude::new(kind, v).expect("grid values lie inside the legal domain"))
        .collect()
}
