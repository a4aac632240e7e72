//! Train a toy colour-histogram scorer with and without StrongAugment on
//! synthetic tissue tiles, then compare how each holds up on stain- and
//! brightness-shifted copies of a held-out set.
//!
//! ```text
//! cargo run --release --example robustness_demo -- [out_dir]
//! ```

#[path = "../tests/support/mod.rs"]
mod support;

use std::path::PathBuf;
use std::time::Instant;

use support::demo::{run_demo, DemoConfig};

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strongaug_demo"));
    let _ = std::fs::remove_dir_all(&out);
    let start = Instant::now();
    let outcome = run_demo(&DemoConfig::default(), &out);
    for arm in [&outcome.baseline, &outcome.augmented] {
        println!("== {} ==", arm.name);
        for r in &arm.reports {
            println!("{}", r.to_csv_matrix());
        }
        println!(
            "clean AUROC {:.4}, worst stain cell {:.4}, drop {:.4}\n",
            arm.clean,
            arm.worst_stain,
            arm.worst_stain_drop()
        );
    }
    println!("reports written under {}", outcome.out_dir.join("reports").display());
    println!("elapsed {:.1?}", start.elapsed());
}
