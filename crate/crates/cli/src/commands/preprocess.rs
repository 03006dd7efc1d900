use std::path::Path;

use anyhow::{Context, Result};
use radarnas::association_roi::{build_from_dir, file};
use radarnas::config::RunConfig;

use crate::args::PreprocessArgs;
use crate::output::write_text;

pub fn run(cfg: &RunConfig, a: &PreprocessArgs, out: &Path) -> Result<()> {
    let raw = a
        .raw
        .clone()
        .unwrap_or_else(|| out.join(&cfg.paths.raw_dir));
    let ds = build_from_dir(&raw, &cfg.pipeline(), cfg.seed)
        .with_context(|| format!("preprocessing {} failed", raw.display()))?;
    let dest = out.join(&cfg.paths.roi_file);
    file::write(&dest, &ds).with_context(|| format!("cannot write {}", dest.display()))?;
    let summary = ds.summary();
    write_text(&out.join("preprocess_summary.txt"), &summary)?;
    print!("{summary}");
    println!("wrote {} samples to {}", ds.samples.len(), dest.display());
    Ok(())
}
