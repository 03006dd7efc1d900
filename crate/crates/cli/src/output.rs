use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use radarnas::eval_metrics::{render_table, write_confusion_csv, ConfusionMatrix, RunAggregate};
use serde::Serialize;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Per-run normalised confusion matrices plus, for two or more runs, the
/// mean and variance matrices.
pub fn write_confusions(
    dir: &Path,
    per_run: &[ConfusionMatrix],
    aggregate: Option<&RunAggregate>,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for (r, cm) in per_run.iter().enumerate() {
        write_confusion_csv(
            &dir.join(format!("confusion_run_{r:02}.csv")),
            &cm.normalized(),
        )?;
    }
    if let Some(a) = aggregate {
        write_confusion_csv(&dir.join("confusion_mean.csv"), &a.mean)?;
        write_confusion_csv(&dir.join("confusion_variance.csv"), &a.variance)?;
    }
    Ok(())
}

/// Human-readable summary of a set of runs.
pub fn describe_runs(
    title: &str,
    per_run: &[(usize, f64)],
    aggregate: Option<&RunAggregate>,
    single: &ConfusionMatrix,
) -> String {
    let mut s = String::new();
    for (r, acc) in per_run {
        s += &format!("run {r:>2}: mean test accuracy {:.2}%\n", acc * 100.0);
    }
    match aggregate {
        Some(a) => {
            s += &format!(
                "{} runs: mean accuracy {:.2}% (variance {:.5})\n",
                a.runs,
                a.mean_accuracy * 100.0,
                a.accuracy_variance
            );
            s += &render_table(title, &a.mean);
            if a.significant_cells.is_empty() {
                s += "no cell varies significantly across runs\n";
            } else {
                for &(t, p) in &a.significant_cells {
                    s += &format!(
                        "significant variance: true {} / predicted {} ({:.3})\n",
                        radarnas::Category::ALL[t],
                        radarnas::Category::ALL[p],
                        a.variance[t][p]
                    );
                }
            }
        }
        None => s += &render_table(title, &single.normalized()),
    }
    s
}
