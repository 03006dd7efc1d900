use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use radarnas::association_roi::Split;
use radarnas::config::RunConfig;
use radarnas::eval_metrics::{aggregate_runs, mean_accuracy_present, render_side_by_side, Matrix};
use radarnas::experiment::evaluate_on_split;
use radarnas::tensor_nn::checkpoint;
use serde_json::json;

use super::load_dataset;
use crate::args::{EvalArgs, SplitArg};
use crate::output::{describe_runs, write_confusions, write_json, write_text};

/// Checkpoint stems named by `path`: the stem itself, or every `run_*.json`
/// in a directory, sorted.
fn stems(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension().is_some_and(|x| x == "json")
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("run_"))
            })
            .map(|p| p.with_extension(""))
            .collect();
        v.sort();
        if v.is_empty() {
            bail!("{} holds no run_*.json checkpoints", path.display());
        }
        Ok(v)
    } else {
        Ok(vec![
            if path.extension().is_some_and(|x| x == "json" || x == "bin") {
                path.with_extension("")
            } else {
                path.to_path_buf()
            },
        ])
    }
}

fn label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn run(cfg: &RunConfig, a: &EvalArgs, out: &Path) -> Result<()> {
    let ds = load_dataset(cfg, &a.data, out)?;
    let split = match a.split {
        SplitArg::Train => Split::Train,
        SplitArg::Val => Split::Val,
        SplitArg::Test => Split::Test,
    };
    let mut means: Vec<(String, Matrix)> = Vec::new();
    for (set, path) in a.checkpoints.iter().enumerate() {
        let mut cms = Vec::new();
        let mut per_run = Vec::new();
        for (r, stem) in stems(path)?.iter().enumerate() {
            let (model, _) = checkpoint::load(stem)
                .with_context(|| format!("cannot load checkpoint {}", stem.display()))?;
            let cm = evaluate_on_split(&ds, &model, split)
                .with_context(|| format!("checkpoint {}", stem.display()))?;
            per_run.push((r, mean_accuracy_present(&cm)));
            cms.push(cm);
        }
        let aggregate = if cms.len() >= 2 {
            Some(aggregate_runs(&cms)?)
        } else {
            None
        };
        let name = label(path);
        let dir = out.join("eval").join(format!("set{}", set + 1));
        write_confusions(&dir, &cms, aggregate.as_ref())?;
        write_json(
            &dir.join("report.json"),
            &json!({
                "source": path.display().to_string(),
                "split": split.name(),
                "runs": per_run.iter().map(|(r, acc)| json!({"run": r, "mean_accuracy": acc})).collect::<Vec<_>>(),
                "aggregate": aggregate,
            }),
        )?;
        let text = describe_runs(&name, &per_run, aggregate.as_ref(), &cms[0]);
        write_text(&dir.join("report.txt"), &text)?;
        println!("== {} ({} split)", path.display(), split.name());
        print!("{text}");
        let mean = aggregate
            .map(|a| a.mean)
            .unwrap_or_else(|| cms[0].normalized());
        means.push((name, mean));
    }
    if let [(la, ma), (lb, mb)] = means.as_slice() {
        let table = render_side_by_side(la, ma, lb, mb);
        write_text(&out.join("eval").join("comparison.txt"), &table)?;
        print!("{table}");
    }
    Ok(())
}
