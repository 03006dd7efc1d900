use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use radarnas::config::RunConfig;
use radarnas::signal_sim::io::simulate_to_dir;
use radarnas::signal_sim::TrackCounts;

use crate::args::SimulateArgs;

pub fn apply(cfg: &mut RunConfig, a: &SimulateArgs) -> &'static str {
    if let Some(n) = a.tracks {
        cfg.tracks = TrackCounts::scaled(n as usize);
    }
    let t = &mut cfg.tracks;
    for (slot, v) in [
        (&mut t.car, a.car),
        (&mut t.pedestrian, a.pedestrian),
        (&mut t.two_wheeler, a.two_wheeler),
        (&mut t.overridable, a.overridable),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(f) = a.frames {
        cfg.scenario.frames_per_track = f;
    }
    "simulate"
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<()> {
    let raw = out.join(&cfg.paths.raw_dir);
    if raw.join("dataset.json").exists() {
        fs::remove_dir_all(&raw).with_context(|| format!("cannot replace {}", raw.display()))?;
    } else if raw
        .read_dir()
        .map(|mut d| d.next().is_some())
        .unwrap_or(false)
    {
        bail!(
            "{} exists and is not a raw dataset; refusing to overwrite it",
            raw.display()
        );
    }
    let t = &cfg.tracks;
    eprintln!(
        "simulating {} tracks (car {}, pedestrian {}, two-wheeler {}, overridable {}) x {} frames",
        t.total(),
        t.car,
        t.pedestrian,
        t.two_wheeler,
        t.overridable,
        cfg.scenario.frames_per_track
    );
    simulate_to_dir(&raw, &cfg.tracks, &cfg.radar, &cfg.scenario, cfg.seed)
        .with_context(|| format!("simulation into {} failed", raw.display()))?;
    println!("wrote raw dataset to {}", raw.display());
    Ok(())
}
