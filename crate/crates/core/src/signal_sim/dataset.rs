use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::render::render_objects;
use super::{synth_scene, RadarConfig, RawFrame, SceneObject, SimError};
use crate::seed::{derive_indexed, rng_for, rng_from};
use crate::{par, Category};

/// Requested number of tracks per category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackCounts {
    pub car: usize,
    pub pedestrian: usize,
    pub two_wheeler: usize,
    pub overridable: usize,
}

/// Track counts of the measurement campaign the defaults are scaled from.
const REFERENCE_COUNTS: [usize; 4] = [573, 223, 178, 689];

impl TrackCounts {
    /// Scales the reference class ratios (car 573, pedestrian 223,
    /// overridable 689, two-wheeler 178) to roughly `total` tracks, keeping
    /// at least one track per category.
    pub fn scaled(total: usize) -> Self {
        let sum: usize = REFERENCE_COUNTS.iter().sum();
        let n = |i: usize| {
            ((REFERENCE_COUNTS[i] * total) as f64 / sum as f64)
                .round()
                .max(1.0) as usize
        };
        Self {
            car: n(0),
            pedestrian: n(1),
            two_wheeler: n(2),
            overridable: n(3),
        }
    }

    pub fn get(&self, c: Category) -> usize {
        match c {
            Category::Car => self.car,
            Category::Pedestrian => self.pedestrian,
            Category::TwoWheeler => self.two_wheeler,
            Category::Overridable => self.overridable,
        }
    }

    pub fn total(&self) -> usize {
        Category::ALL.iter().map(|&c| self.get(c)).sum()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if Category::ALL.iter().any(|&c| self.get(c) == 0) {
            return Err(SimError::InvalidTrackCount(format!("{self:?}")));
        }
        Ok(())
    }
}

impl Default for TrackCounts {
    fn default() -> Self {
        Self::scaled(60)
    }
}

/// Frame-to-frame behaviour of scatterer RCS within a track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RcsFluctuation {
    /// Every scatterer keeps its drawn RCS for the whole track.
    Constant,
    /// Swerling I: per frame, each scatterer's power is redrawn from an
    /// exponential distribution around its mean RCS.
    SwerlingI,
}

/// Approach-scenario knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub frames_per_track: usize,
    pub frame_interval_s: f64,
    pub ego_speed_mps: (f64, f64),
    pub start_range_m: (f64, f64),
    /// Chance that a pedestrian or overridable track has a parked car
    /// standing a few meters to the side.
    pub distractor_probability: f64,
    pub rcs_fluctuation: RcsFluctuation,
    /// Standard deviation in dB of a per-track offset applied to every
    /// scatterer of the labelled object (object size variation within a
    /// class).
    pub track_rcs_spread_db: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            frames_per_track: 24,
            frame_interval_s: 0.1,
            ego_speed_mps: (0.8, 2.4),
            start_range_m: (9.0, 16.0),
            distractor_probability: 0.3,
            rcs_fluctuation: RcsFluctuation::SwerlingI,
            track_rcs_spread_db: 0.0,
        }
    }
}

/// A labeled sequence of frames of one object approach.
///
/// `frames[i].truth[0]` is always the labeled object; further entries
/// are unlabeled distractors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecording {
    pub track_id: u32,
    pub category: Category,
    pub frames: Vec<RawFrame>,
    pub scenario_tag: String,
}

/// Simulates one approach track. The result depends only on
/// `(track_id, category, cfg, params, seed)`.
pub fn generate_track(
    track_id: u32,
    category: Category,
    cfg: &RadarConfig,
    params: &ScenarioParams,
    seed: u64,
) -> Result<TrackRecording, SimError> {
    let track_seed = derive_indexed(seed, "track", track_id as u64);
    let mut rng = rng_from(track_seed);
    let mut object = synth_scene(category, &mut rng);
    if params.track_rcs_spread_db > 0.0 {
        let z: f64 = rng_for(track_seed, "rcs-offset").sample(StandardNormal);
        for s in &mut object.scatterers {
            s.rcs_dbsm += params.track_rcs_spread_db * z;
        }
    }
    let n = params.frames_per_track.max(1);
    let duration = params.frame_interval_s * (n - 1) as f64;

    let v0 = rng.gen_range(params.ego_speed_mps.0..=params.ego_speed_mps.1);
    // brake, but keep closing so range decreases every frame
    let decel = if duration > 0.0 {
        rng.gen_range(0.0..=((v0 - 0.3).max(0.0) / duration))
    } else {
        0.0
    };
    let x0 = rng.gen_range(params.start_range_m.0..=params.start_range_m.1);
    let lat = object.lateral_velocity_mps;
    let y0 = if lat != 0.0 {
        -lat * duration / 2.0 + rng.gen_range(-0.5..=0.5)
    } else {
        rng.gen_range(-1.5..=1.5)
    };

    let mut scenario_tag = match category {
        Category::Pedestrian | Category::TwoWheeler => "crossing",
        _ => "approach",
    }
    .to_string();
    let mut distractor = None;
    if matches!(category, Category::Pedestrian | Category::Overridable)
        && rng.gen_bool(params.distractor_probability.clamp(0.0, 1.0))
    {
        let mut car = synth_scene(Category::Car, &mut rng);
        car.lateral_velocity_mps = 0.0;
        let side = if y0 > 0.0 { -1.0 } else { 1.0 };
        let offset = (
            x0 + rng.gen_range(-1.0..=1.0),
            y0 + side * rng.gen_range(5.0..=6.0),
        );
        distractor = Some((car, offset));
        scenario_tag = format!("{scenario_tag}_beside_parked_car");
    }

    let frames = (0..n)
        .map(|i| {
            let t = i as f64 * params.frame_interval_s;
            let travelled = v0 * t - 0.5 * decel * t * t;
            let speed = v0 - decel * t;
            let mut objects: Vec<SceneObject> =
                vec![object.moved_to((x0 - travelled, y0 + lat * t), speed, t)];
            if let Some((car, (cx, cy))) = &distractor {
                objects.push(car.moved_to((cx - travelled, *cy), speed, t));
            }
            if params.rcs_fluctuation == RcsFluctuation::SwerlingI {
                let mut fl = rng_from(derive_indexed(track_seed, "rcs-fluctuation", i as u64));
                for s in objects.iter_mut().flat_map(|o| o.scatterers.iter_mut()) {
                    let e: f64 = fl.sample(Exp1);
                    s.rcs_dbsm += 10.0 * e.max(1e-6).log10();
                }
            }
            let mut frame_rng = rng_from(derive_indexed(track_seed, "frame", i as u64));
            render_objects(&objects, cfg, &mut frame_rng)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(TrackRecording {
        track_id,
        category,
        frames,
        scenario_tag,
    })
}

/// Track ids and categories in dataset order: grouped by category.
pub fn track_plan(counts: &TrackCounts) -> Vec<(u32, Category)> {
    Category::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, counts.get(c)))
        .enumerate()
        .map(|(i, c)| (i as u32, c))
        .collect()
}

/// Simulates a full dataset with exactly the requested per-category counts.
pub fn generate_dataset(
    counts: &TrackCounts,
    cfg: &RadarConfig,
    params: &ScenarioParams,
    seed: u64,
) -> Result<Vec<TrackRecording>, SimError> {
    counts.validate()?;
    cfg.validate()?;
    par::map(&track_plan(counts), |&(id, cat)| {
        generate_track(id, cat, cfg, params, seed)
    })
    .into_iter()
    .collect()
}
