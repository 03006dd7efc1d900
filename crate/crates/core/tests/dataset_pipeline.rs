use std::collections::HashMap;

use radarnas::association_roi::{
    build_from_dir, build_from_simulation, file, PipelineParams, Split,
};
use radarnas::signal_sim::io::{read_track, simulate_to_dir, write_dataset};
use radarnas::signal_sim::{
    generate_dataset, generate_track, RadarConfig, RcsFluctuation, ScenarioParams, TrackCounts,
};
use radarnas::Category;

fn counts() -> TrackCounts {
    TrackCounts {
        car: 4,
        pedestrian: 3,
        two_wheeler: 3,
        overridable: 4,
    }
}

fn scenario() -> ScenarioParams {
    ScenarioParams {
        frames_per_track: 3,
        ..ScenarioParams::default()
    }
}

#[test]
fn disk_round_trip_matches_in_memory_processing() {
    let cfg = RadarConfig::desk();
    let dir = tempfile::tempdir().unwrap();
    simulate_to_dir(dir.path(), &counts(), &cfg, &scenario(), 7).unwrap();

    // streaming writer == generate + write
    let other = tempfile::tempdir().unwrap();
    let tracks = generate_dataset(&counts(), &cfg, &scenario(), 7).unwrap();
    write_dataset(other.path(), &tracks, &cfg, 7).unwrap();
    for t in &tracks {
        let name = format!("track_{:05}", t.track_id);
        let a = read_track(&dir.path().join(&name)).unwrap();
        let b = read_track(&other.path().join(&name)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frames[0].iq, t.frames[0].iq);
    }

    let params = PipelineParams::default();
    let from_disk = build_from_dir(dir.path(), &params, 7).unwrap();
    let in_memory = build_from_simulation(&counts(), &cfg, &scenario(), &params, 7).unwrap();
    assert_eq!(from_disk, in_memory);

    let roi = dir.path().join("set.roids");
    file::write(&roi, &from_disk).unwrap();
    assert_eq!(file::read(&roi).unwrap(), from_disk);
}

#[test]
fn samples_respect_the_contract() {
    let ds = build_from_simulation(
        &counts(),
        &RadarConfig::desk(),
        &scenario(),
        &PipelineParams::default(),
        2,
    )
    .unwrap();
    let mut split_of_track: HashMap<u32, Split> = HashMap::new();
    for s in &ds.samples {
        assert_eq!(s.roi.len(), 32 * 32);
        assert_eq!(s.rcs_vector.len(), 30);
        assert!(s
            .roi
            .iter()
            .chain(&s.rcs_vector)
            .all(|&v| (0.0..=1.0).contains(&v)));
        // populated RCS rows come first, the rest is padding
        let populated = s.rcs_vector.iter().take_while(|&&v| v > 0.0).count();
        assert!(populated <= s.n_reflections);
        assert!(s.rcs_vector[s.n_reflections..].iter().all(|&v| v == 0.0));
        // at most one patch per reflection is lit
        let lit = s.roi.iter().filter(|&&v| v > 0.0).count();
        assert!(
            lit <= s.n_reflections.max(1) * 49,
            "{lit} cells for {} reflections",
            s.n_reflections
        );
        assert_eq!(
            *split_of_track.entry(s.track_id).or_insert(s.split),
            s.split
        );
    }
    for c in Category::ALL {
        assert!(ds.samples.iter().any(|s| s.category == c));
    }
}

#[test]
fn swerling_fluctuation_preserves_mean_power() {
    let cfg = RadarConfig::desk();
    let p = ScenarioParams {
        frames_per_track: 400,
        frame_interval_s: 0.002,
        ..ScenarioParams::default()
    };
    let constant = ScenarioParams {
        rcs_fluctuation: RcsFluctuation::Constant,
        ..p.clone()
    };
    let steady = generate_track(0, Category::Overridable, &cfg, &constant, 3).unwrap();
    let nominal = steady.frames[0].truth[0].scatterers[0].rcs_dbsm;
    assert!(steady
        .frames
        .iter()
        .all(|f| f.truth[0].scatterers[0].rcs_dbsm == nominal));

    let fluct = generate_track(0, Category::Overridable, &cfg, &p, 3).unwrap();
    let lin: Vec<f64> = fluct
        .frames
        .iter()
        .map(|f| 10f64.powf((f.truth[0].scatterers[0].rcs_dbsm - nominal) / 10.0))
        .collect();
    let n = lin.len() as f64;
    let mean = lin.iter().sum::<f64>() / n;
    let var = lin.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    // unit-mean exponential: mean 1 and variance 1
    assert!((mean - 1.0).abs() < 4.0 / n.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 0.5, "variance {var}");
}
