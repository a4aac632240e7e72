//! Print the transform catalog and the evaluation grid of every kind.

use strongaug::transforms::{default_eval_grid, Catalog, MagnitudeDomain};

fn domain(d: &MagnitudeDomain) -> String {
    match d {
        MagnitudeDomain::None => "-".into(),
        MagnitudeDomain::Continuous { lo, hi } => format!("[{lo}, {hi}]"),
        MagnitudeDomain::Integer { lo, hi } => format!("{{{lo}..{hi}}}"),
    }
}

fn main() {
    let catalog = Catalog::current();
    println!(
        "{:<14} {:<16} {:<16} {:>9} {:>6}  grid",
        "kind", "domain", "evaluated", "no-effect", "affine"
    );
    for e in &catalog.kinds {
        let values: Vec<String> = default_eval_grid(e.kind)
            .iter()
            .map(|m| format!("{:.3}", m.value()).trim_end_matches('0').trim_end_matches('.').to_string())
            .collect();
        let grid = if values.len() > 9 {
            format!("{} {} ... {} ({} values)", values[0], values[1], values[values.len() - 1], values.len())
        } else {
            values.join(" ")
        };
        println!(
            "{:<14} {:<16} {:<16} {:>9} {:>6}  {}",
            e.kind.to_string(),
            domain(&e.domain),
            domain(&e.evaluation_range),
            e.no_effect.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            if e.affine { "yes" } else { "" },
            grid
        );
    }
}
