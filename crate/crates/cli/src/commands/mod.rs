mod eval;
mod knn;
mod nas;
mod preprocess;
mod simulate;
mod train;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use radarnas::association_roi::{file, RoiDataset};
use radarnas::config::{ConfigError, RunConfig};

use crate::args::{Cli, Command, DataArgs};
use crate::lock::OutLock;
use crate::{output, usage};

pub fn run(cli: Cli) -> Result<()> {
    let Cli { common, command } = cli;
    if let Some(n) = common.threads {
        radarnas::par::set_threads(n as usize)
            .map_err(|e| anyhow::anyhow!("cannot set thread count: {e}"))?;
    }
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| config_error(path, e))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common.out.as_path();
    let _lock = OutLock::acquire(out)?;
    let name = match &command {
        Command::Simulate(a) => simulate::apply(&mut cfg, a),
        Command::Train(a) => train::apply(&mut cfg, a),
        Command::Nas(a) => nas::apply(&mut cfg, a),
        _ => "",
    };
    let name = if name.is_empty() {
        command_name(&command)
    } else {
        name
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    output::write_text(
        &out.join(format!("config.{name}.toml")),
        &cfg.to_toml_string()?,
    )?;
    match command {
        Command::Simulate(_) => simulate::run(&cfg, out),
        Command::Preprocess(a) => preprocess::run(&cfg, &a, out),
        Command::Train(a) => train::run(&cfg, &a, out),
        Command::Nas(a) => nas::run(&cfg, &a, out),
        Command::Eval(a) => eval::run(&cfg, &a, out),
        Command::Knn(a) => knn::run(&cfg, &a, out),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Preprocess(_) => "preprocess",
        Command::Train(_) => "train",
        Command::Nas(_) => "nas",
        Command::Eval(_) => "eval",
        Command::Knn(_) => "knn",
    }
}

fn config_error(path: &Path, e: ConfigError) -> anyhow::Error {
    usage(format!("{}: {e}", path.display()))
}

fn dataset_path(cfg: &RunConfig, data: &DataArgs, out: &Path) -> PathBuf {
    data.data
        .clone()
        .unwrap_or_else(|| out.join(&cfg.paths.roi_file))
}

pub(crate) fn load_dataset(cfg: &RunConfig, data: &DataArgs, out: &Path) -> Result<RoiDataset> {
    let path = dataset_path(cfg, data, out);
    let ds =
        file::read(&path).with_context(|| format!("cannot read ROI dataset {}", path.display()))?;
    eprintln!(
        "loaded {} samples from {}",
        ds.samples.len(),
        path.display()
    );
    Ok(ds)
}
