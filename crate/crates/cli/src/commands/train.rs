use std::path::Path;

use anyhow::{Context, Result};
use radarnas::association_roi::Split;
use radarnas::config::RunConfig;
use radarnas::experiment::{run_report, train_runs, RunOutcome};
use radarnas::model_zoo::{self, ModelKind};
use radarnas::nas_engine::Genome;
use radarnas::tensor_nn::{checkpoint, class_weights};
use radarnas::Category;
use serde_json::json;

use super::load_dataset;
use crate::args::TrainArgs;
use crate::output::{describe_runs, write_confusions, write_json, write_text};
use crate::usage;

pub fn apply(cfg: &mut RunConfig, a: &TrainArgs) -> &'static str {
    if let Some(r) = a.runs {
        cfg.train.runs = r as usize;
    }
    if let Some(e) = a.epochs {
        cfg.train.epochs = e as usize;
    }
    "train"
}

fn genome_arg(spec: Option<&str>) -> Result<Genome> {
    match spec {
        None | Some("reference") => Ok(model_zoo::reference_genome()),
        Some("seed") => Ok(model_zoo::seed_genome()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read genome file {path}: {e}")))?;
            let g: Genome = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{path} is not a genome file: {e}")))?;
            g.validate().map_err(|e| usage(format!("{path}: {e}")))?;
            Ok(g)
        }
    }
}

/// Parses `manual`, `reflection-only`, `spectrum[:G]` or `hybrid[:G]`.
pub fn parse_model(spec: &str) -> Result<ModelKind> {
    let (name, genome) = match spec.split_once(':') {
        Some((n, g)) => (n, Some(g)),
        None => (spec, None),
    };
    match (name, genome) {
        ("manual", None) => Ok(ModelKind::Manual),
        ("reflection-only", None) => Ok(ModelKind::ReflectionOnly),
        ("spectrum", g) => Ok(ModelKind::Spectrum(genome_arg(g)?)),
        ("hybrid", g) => Ok(ModelKind::Hybrid(genome_arg(g)?)),
        _ => Err(usage(format!(
            "unknown model `{spec}` (expected manual, reflection-only, spectrum[:GENOME] or hybrid[:GENOME])"
        ))),
    }
}

fn genome_of(kind: &ModelKind) -> Option<&Genome> {
    match kind {
        ModelKind::Spectrum(g) | ModelKind::Hybrid(g) => Some(g),
        _ => None,
    }
}

pub fn run(cfg: &RunConfig, a: &TrainArgs, out: &Path) -> Result<()> {
    let kind = parse_model(&a.model)?;
    let ds = load_dataset(cfg, &a.data, out)?;
    let arch = kind.architecture()?;
    let n_params = arch.count_params()?;
    println!(
        "model {}: {} parameters, {} MACs",
        kind.name(),
        n_params,
        arch.count_macs()?
    );
    if let ModelKind::Hybrid(g) = &kind {
        let spectrum = model_zoo::spectrum_model(g)?.count_params()?;
        println!("Δparams (hybrid - spectrum) = {}", n_params - spectrum);
    }
    let mut counts = [0usize; Category::COUNT];
    for s in ds.split(Split::Train) {
        counts[s.category.index()] += 1;
    }
    let weights = class_weights(&counts);
    for (c, (n, w)) in Category::ALL.iter().zip(counts.iter().zip(&weights)) {
        println!("class weight {c:<12} {w:.4}  ({n} training samples)");
    }

    let dir = out.join("train").join(kind.name());
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let tc = cfg.train.to_train_config(cfg.train.epochs);
    let genome = genome_of(&kind).map(|g| g.canonical());
    let mut save_err = None;
    let outcomes = train_runs(
        &ds,
        &kind,
        &tc,
        cfg.train.runs,
        cfg.seed,
        |o: &RunOutcome| {
            eprintln!(
                "run {:>2}: best epoch {:>3}, validation {:.2}%, test {:.2}%",
                o.run,
                o.best_epoch,
                o.best_val_mean_acc * 100.0,
                o.test_mean_accuracy() * 100.0
            );
            let stem = dir.join(format!("run_{:02}", o.run));
            let meta = json!({
                "model": kind.name(),
                "genome": genome,
                "run": o.run,
                "seed": o.seed,
                "best_epoch": o.best_epoch,
                "best_val_mean_acc": o.best_val_mean_acc,
            });
            let r = checkpoint::save(&o.model, &stem, meta).and_then(|_| {
                checkpoint::write_history_csv(
                    &dir.join(format!("history_run_{:02}.csv", o.run)),
                    &o.history,
                )
            });
            if let Err(e) = r {
                save_err.get_or_insert(e);
            }
        },
    )?;
    if let Some(e) = save_err {
        return Err(e).context("cannot save checkpoint");
    }

    let report = run_report(&kind, &outcomes)?;
    write_json(&dir.join("report.json"), &report)?;
    let cms: Vec<_> = outcomes.iter().map(|o| o.test_confusion).collect();
    write_confusions(&dir, &cms, report.aggregate.as_ref())?;
    let per_run: Vec<_> = outcomes
        .iter()
        .map(|o| (o.run, o.test_mean_accuracy()))
        .collect();
    let text = describe_runs(kind.name(), &per_run, report.aggregate.as_ref(), &cms[0]);
    write_text(&dir.join("report.txt"), &text)?;
    print!("{text}");
    println!("checkpoints and reports in {}", dir.display());
    Ok(())
}
