//! Compares the rayon-backed data-parallel paths against the sequential
//! fallbacks on the toolkit's hot loops. Build with default features for the
//! parallel numbers; the `*_seq` baselines are always sequential.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use shapescale::io::{CostSettings, RunRecord};
use shapescale::law::{self, LawParams};
use shapescale::oracle::{self, GroundTruth, NoiseSpec};
use shapescale::par;
use shapescale::shape::{Shape, ShapeDim};
use shapescale::sweeps::{plan_star, StarPlanOptions, SweepDesign};
use shapescale::{fit, fit::FitOptions};

fn feature_label() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential-build"
    }
}

fn bench_grid_argmin(c: &mut Criterion) {
    let gt = GroundTruth::classification_preset();
    let grid: Vec<u32> = (1..=40).map(|i| 16 * i).collect();
    let n = grid.len().pow(3);
    let shape_at = |i: usize| {
        let nd = grid.len();
        Shape::new(
            grid[i / (nd * nd)],
            grid[(i / nd) % nd],
            grid[i % nd],
        )
    };
    let key = |i: usize| oracle::eval_truth_shape(&gt, shape_at(i), 1e10).unwrap();

    let mut group = c.benchmark_group("grid_argmin_64000");
    group.bench_function(feature_label(), |b| {
        b.iter(|| par::argmin_indexed(black_box(n), key))
    });
    group.bench_function("seq", |b| {
        b.iter(|| par::argmin_indexed_seq(black_box(n), key))
    });
    group.finish();
}

fn bench_batch_eval(c: &mut Criterion) {
    let p = LawParams::new(5.0, 0.9, 0.02, 1.3, 0.6, 0.8, 0.2);
    let xs: Vec<f64> = (0..200_000)
        .map(|i| 8.0 * 1.0001f64.powi(i))
        .collect();
    let f = |x: &f64| law::eval_law(&p, *x, 1e9).unwrap();

    let mut group = c.benchmark_group("law_batch_eval_200k");
    group.bench_function(feature_label(), |b| b.iter(|| par::map(&xs, f)));
    group.bench_function("seq", |b| b.iter(|| par::map_seq(&xs, f)));
    group.finish();
}

fn star_records() -> Vec<RunRecord> {
    let gt = GroundTruth::classification_preset();
    let spec = plan_star(
        Shape::new(1968, 40, 6144),
        &StarPlanOptions::default(),
        &CostSettings::default(),
    )
    .unwrap();
    oracle::gen_runs(&gt, &SweepDesign::Star(spec), &NoiseSpec::none(), "m")
        .unwrap()
        .into_iter()
        .filter(|r| r.dimension_under_test == Some(ShapeDim::Width))
        .collect()
}

fn bench_multistart_fit(c: &mut Criterion) {
    let records = star_records();
    let opts = FitOptions::new(17);

    let mut group = c.benchmark_group("fit_dimension_32_restarts");
    group.sample_size(10);
    group.bench_function(feature_label(), |b| {
        b.iter(|| fit::fit_dimension(black_box(&records), ShapeDim::Width, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_grid_argmin, bench_batch_eval, bench_multistart_fit);
criterion_main!(benches);
