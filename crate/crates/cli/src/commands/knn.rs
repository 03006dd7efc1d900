use std::path::Path;

use anyhow::Result;
use radarnas::config::RunConfig;
use radarnas::eval_metrics::{render_table, write_confusion_csv};
use radarnas::experiment::knn_baseline;

use super::load_dataset;
use crate::args::DataArgs;
use crate::output::write_json;

pub fn run(cfg: &RunConfig, a: &DataArgs, out: &Path) -> Result<()> {
    let ds = load_dataset(cfg, a, out)?;
    let outcome = knn_baseline(&ds, &cfg.knn.k_set)?;
    let dir = out.join("knn");
    write_json(&dir.join("report.json"), &outcome)?;
    write_confusion_csv(
        &dir.join("confusion.csv"),
        &outcome.test_confusion.normalized(),
    )?;
    for (k, acc) in &outcome.selection.val_accuracy {
        println!("k = {k:>2}: validation mean accuracy {:.2}%", acc * 100.0);
    }
    println!(
        "selected k = {}; test mean accuracy {:.2}%",
        outcome.selection.k,
        outcome.test_mean_accuracy * 100.0
    );
    print!(
        "{}",
        render_table("kNN", &outcome.test_confusion.normalized())
    );
    Ok(())
}
