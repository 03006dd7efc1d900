//! Data-parallel hot loops against a plain sequential loop over the same
//! per-item work. Group names carry the build mode, so running
//! `cargo bench` and `cargo bench --no-default-features` puts both
//! builds side by side in the criterion report.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use radarnas::association_roi::{build_from_simulation, PipelineParams};
use radarnas::eval_metrics::KnnModel;
use radarnas::experiment::{examples, knn_features};
use radarnas::model_zoo::{reference_genome, ModelKind};
use radarnas::par;
use radarnas::signal_sim::{generate_track, RadarConfig, ScenarioParams, TrackCounts};
use radarnas::spectra_dsp::{extract_reflections, range_doppler_fft, CfarParams};
use radarnas::tensor_nn::{evaluate_predictions, train, ModelGraph, TrainConfig};
use radarnas::Category;

fn mode() -> &'static str {
    if par::is_parallel() {
        "parallel-build"
    } else {
        "sequential-build"
    }
}

fn frame_processing(c: &mut Criterion) {
    let cfg = RadarConfig::desk();
    let scenario = ScenarioParams {
        frames_per_track: 8,
        ..ScenarioParams::default()
    };
    let track = generate_track(0, Category::Car, &cfg, &scenario, 1).unwrap();
    let cfar = CfarParams::default();
    let work = |f: &radarnas::signal_sim::RawFrame| {
        extract_reflections(&range_doppler_fft(f), &cfg, &cfar)
            .unwrap()
            .len()
    };

    let mut g = c.benchmark_group(format!("fft_cfar_8_frames/{}", mode()));
    g.bench_function("par_map", |b| b.iter(|| par::map(&track.frames, work)));
    g.bench_function("sequential_loop", |b| {
        b.iter(|| track.frames.iter().map(work).collect::<Vec<_>>())
    });
    g.finish();
}

fn dataset_and_models(c: &mut Criterion) {
    let counts = TrackCounts {
        car: 3,
        pedestrian: 3,
        two_wheeler: 3,
        overridable: 3,
    };
    let scenario = ScenarioParams {
        frames_per_track: 6,
        ..ScenarioParams::default()
    };
    let cfg = RadarConfig::desk();
    let params = PipelineParams::default();

    let mut g = c.benchmark_group(format!("dataset/{}", mode()));
    g.bench_function("build_12_tracks", |b| {
        b.iter(|| build_from_simulation(&counts, &cfg, &scenario, &params, 3).unwrap())
    });
    g.finish();

    let ds = build_from_simulation(&counts, &cfg, &scenario, &params, 3).unwrap();
    let feats: Vec<Vec<f32>> = ds.samples.iter().map(knn_features).collect();
    let labels: Vec<usize> = ds.samples.iter().map(|s| s.category.index()).collect();
    let (train_f, query_f) = feats.split_at(feats.len() / 2);
    let model = KnnModel::new(train_f.to_vec(), labels[..train_f.len()].to_vec()).unwrap();

    let mut g = c.benchmark_group(format!("knn_k5/{}", mode()));
    g.bench_function("par_map", |b| {
        b.iter(|| model.predict_many(query_f, &[5]).unwrap())
    });
    g.bench_function("sequential_loop", |b| {
        b.iter(|| {
            query_f
                .iter()
                .map(|q| model.classify(q, 5).unwrap())
                .collect::<Vec<_>>()
        })
    });
    g.finish();

    let kind = ModelKind::Hybrid(reference_genome());
    let arch = kind.architecture().unwrap();
    let samples: Vec<_> = ds.samples.iter().collect();
    let ex = examples(&kind, &samples);
    let net = ModelGraph::<f32>::new(&arch, &mut radarnas::seed::rng_from(0)).unwrap();
    let mut g = c.benchmark_group(format!("hybrid/{}", mode()));
    g.bench_function(BenchmarkId::new("inference", ex.len()), |b| {
        b.iter(|| evaluate_predictions(&net, &ex).unwrap())
    });
    g.bench_function(
        BenchmarkId::new("inference_sequential_loop", ex.len()),
        |b| {
            b.iter(|| {
                ex.iter()
                    .map(|e| net.predict(&e.inputs).unwrap())
                    .collect::<Vec<_>>()
            })
        },
    );
    let one_epoch = TrainConfig {
        epochs: 1,
        ..TrainConfig::default()
    };
    g.bench_function(BenchmarkId::new("train_epoch", ex.len()), |b| {
        b.iter(|| train(net.clone(), &ex, &ex, &one_epoch).unwrap())
    });
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3)).warm_up_time(Duration::from_millis(500));
    targets = frame_processing, dataset_and_models
}
criterion_main!(benches);
