use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use radarnas::config::RunConfig;
use radarnas::experiment::{run_nas, train_runs};
use radarnas::model_zoo::ModelKind;
use radarnas::nas_engine::{
    pick_candidate, read_front_csv, write_archive_jsonl, write_front_csv, Individual,
};

use super::load_dataset;
use crate::args::NasArgs;
use crate::output::{write_json, write_text};

pub fn apply(cfg: &mut RunConfig, a: &NasArgs) -> &'static str {
    let n = &mut cfg.nas;
    if let Some(b) = a.budget {
        n.budget = b;
    }
    if let Some(p) = a.population {
        n.population = p;
    }
    if let Some(k) = a.sample {
        n.sample = k;
    }
    if let Some(e) = a.epochs {
        n.epochs = e as usize;
    }
    if a.min_accuracy.is_some() {
        n.min_accuracy = a.min_accuracy;
    }
    "nas"
}

pub fn run(cfg: &RunConfig, a: &NasArgs, out: &Path) -> Result<()> {
    let ds = load_dataset(cfg, &a.data, out)?;
    let dir = out.join("nas");
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let tc = cfg.train.to_train_config(cfg.nas.epochs);
    let mut timings = String::from("genome_id,genome,cached,wall_time_s\n");
    let (archive, trainings) = run_nas(
        &ds,
        &cfg.nas.seed_genome,
        &cfg.nas.nas_config(),
        &tc,
        cfg.seed,
        |i: &Individual| {
            eprintln!(
                "#{:<3} {:<40} acc {:.3} params {:>7}{}",
                i.genome.id,
                i.genome.canonical(),
                i.objectives.accuracy,
                i.objectives.params,
                if i.cached { " (cached)" } else { "" }
            );
            let _ = writeln!(
                timings,
                "{},{},{},{:.3}",
                i.genome.id,
                i.genome.canonical(),
                i.cached,
                i.wall_time_s
            );
        },
    )?;
    write_archive_jsonl(&dir.join("archive.jsonl"), &archive)?;
    let front_path = dir.join("front.csv");
    write_front_csv(&front_path, &archive)?;
    read_front_csv(&front_path).context("front written by this run failed verification")?;
    write_text(&dir.join("timings.csv"), &timings)?;

    let mut summary = format!(
        "{} individuals evaluated, {} trainings, {} on the front\n",
        archive.all_evaluated.len(),
        trainings,
        archive.front.len()
    );
    for i in archive.front_members() {
        let _ = writeln!(
            summary,
            "front: #{:<3} {:<40} acc {:.4} params {:>7} MACs {}",
            i.genome.id,
            i.genome.canonical(),
            i.objectives.accuracy,
            i.objectives.params,
            i.objectives.macs
        );
    }
    let threshold = match cfg.nas.min_accuracy {
        Some(t) => t,
        None => {
            let manual = train_runs(&ds, &ModelKind::Manual, &tc, 1, cfg.seed, |_| {})?;
            let acc = manual[0].best_val_mean_acc;
            let _ = writeln!(
                summary,
                "manual CNN under the same budget: validation mean accuracy {acc:.4}, {} parameters",
                ModelKind::Manual.architecture()?.count_params()?
            );
            acc - cfg.nas.accuracy_slack
        }
    };
    let picked = pick_candidate(&archive, threshold);
    match &picked {
        Ok(c) => {
            let _ = writeln!(
                summary,
                "picked #{} {} (acc {:.4} >= {threshold:.4}, {} parameters)",
                c.genome.id,
                c.genome.canonical(),
                c.objectives.accuracy,
                c.objectives.params
            );
            write_json(&dir.join("candidate.json"), &c.genome)?;
        }
        Err(e) => {
            let _ = writeln!(summary, "no candidate picked: {e}");
        }
    }
    write_text(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    picked?;
    println!(
        "candidate genome written to {}",
        dir.join("candidate.json").display()
    );
    Ok(())
}
