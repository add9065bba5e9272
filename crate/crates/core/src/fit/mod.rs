//! Estimates law parameters from run records by minimizing relative error.
//!
//! The search runs in two layers: an outer derivative-free simplex descent
//! over the three exponents `(a, b, c)` in log space (multi-start, seeded,
//! deterministic), and an inner exact weighted least-squares solve for the
//! four scale coefficients `(alpha, beta, xi, eps)`, which enter the law
//! linearly once the exponents are fixed. Non-negativity of the scales is
//! enforced by the inner solver; tiny floors keep the returned params
//! strictly positive.

mod linear;
mod nelder_mead;

use crate::error::{Error, Result};
use crate::io::RunRecord;
use crate::law::{self, LawParams};
use crate::par;
use crate::shape::ShapeDim;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use nelder_mead::{minimize, NmOptions, NmResult};

/// Which relative-error statistic the outer search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitObjective {
    /// Mean squared relative error (smooth; the default).
    #[default]
    SquaredRelative,
    /// Mean absolute relative error.
    AbsoluteRelative,
}

/// Log-uniform sampling box for the exponent restarts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentBox {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub c: (f64, f64),
}

impl Default for ExponentBox {
    fn default() -> Self {
        Self {
            a: (0.05, 2.0),
            b: (0.05, 2.0),
            c: (0.1, 1.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub restarts: u32,
    pub max_evals_per_restart: u32,
    /// Relative simplex-spread convergence tolerance.
    pub rel_tol: f64,
    pub seed: u64,
    pub objective: FitObjective,
    pub exponent_box: ExponentBox,
}

impl FitOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            restarts: 32,
            max_evals_per_restart: 20_000,
            rel_tol: 1e-10,
            seed,
            objective: FitObjective::SquaredRelative,
            exponent_box: ExponentBox::default(),
        }
    }
}

impl Default for FitOptions {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Result of fitting one shape dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: LawParams,
    pub dimension: ShapeDim,
    pub metric_name: String,
    /// Final value of the configured objective.
    pub objective_value: f64,
    /// Signed relative residual `(predicted - observed) / observed` per record,
    /// in input order.
    pub residuals: Vec<f64>,
    /// The `(x, t)` training points, kept for diagnostics and plots.
    pub training_points: Vec<(f64, f64)>,
    pub holdout_relative_error: Option<f64>,
    /// `c / (a + b)` for the fitted params.
    pub scaling_exponent: f64,
    pub n_restarts_used: u32,
    pub converged: bool,
    /// Set when a scale coefficient collapsed to its floor, meaning the
    /// matching exponent is unidentifiable from this data.
    pub near_degenerate: bool,
}

struct FitPoint {
    x: f64,
    t: f64,
    f: f64,
}

/// Shared state for one fit: log-precomputed data plus floors.
struct Problem {
    lx: Vec<f64>,
    lt: Vec<f64>,
    f: Vec<f64>,
    mean_lx: f64,
    mean_lt: f64,
    f_min: f64,
    objective: FitObjective,
}

const SCALE_FLOOR_REL: f64 = 1e-12;
const EPS_FLOOR_REL: f64 = 1e-9;

impl Problem {
    fn new(points: &[FitPoint], objective: FitObjective) -> Self {
        let lx: Vec<f64> = points.iter().map(|p| p.x.ln()).collect();
        let lt: Vec<f64> = points.iter().map(|p| p.t.ln()).collect();
        let f: Vec<f64> = points.iter().map(|p| p.f).collect();
        let mean_lx = lx.iter().sum::<f64>() / lx.len() as f64;
        let mean_lt = lt.iter().sum::<f64>() / lt.len() as f64;
        let f_min = f.iter().cloned().fold(f64::INFINITY, f64::min);
        Self {
            lx,
            lt,
            f,
            mean_lx,
            mean_lt,
            f_min,
            objective,
        }
    }

    /// Solves the inner linear problem at fixed log-exponents and returns
    /// `(objective, scales)`. Scales are floored before the objective is
    /// computed so every code path sees the exact same function.
    fn eval(&self, log_abc: &[f64]) -> (f64, [f64; 4]) {
        let (a, b, c) = (log_abc[0].exp(), log_abc[1].exp(), log_abc[2].exp());
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return (f64::INFINITY, [0.0; 4]);
        }
        let n = self.f.len();
        // weighted design: row i of column j is (raw term) / f_i, target 1
        let mut cols = vec![vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let w = 1.0 / self.f[i];
            cols[0][i] = (-a * self.lx[i]).exp() * w;
            cols[1][i] = (b * self.lx[i] - c * self.lt[i]).exp() * w;
            cols[2][i] = (-c * self.lt[i]).exp() * w;
            cols[3][i] = w;
        }
        if cols
            .iter()
            .any(|col| col.iter().any(|v| !v.is_finite()))
        {
            return (f64::INFINITY, [0.0; 4]);
        }
        let ones = vec![1.0; n];
        let theta = linear::nnls(&cols, &ones);

        // floors: keep params strictly positive with negligible contributions
        let col_mid = [
            (-a * self.mean_lx).exp(),
            (b * self.mean_lx - c * self.mean_lt).exp(),
            (-c * self.mean_lt).exp(),
            1.0,
        ];
        let mut scales = [0.0; 4];
        for j in 0..3 {
            let floor = SCALE_FLOOR_REL * self.f_min / col_mid[j];
            scales[j] = theta[j].max(floor);
        }
        scales[3] = theta[3].max(EPS_FLOOR_REL * self.f_min);

        let mut acc = 0.0;
        for i in 0..n {
            let pred = scales[0] * (-a * self.lx[i]).exp()
                + scales[1] * (b * self.lx[i] - c * self.lt[i]).exp()
                + scales[2] * (-c * self.lt[i]).exp()
                + scales[3];
            let rel = (pred - self.f[i]) / self.f[i];
            acc += match self.objective {
                FitObjective::SquaredRelative => rel * rel,
                FitObjective::AbsoluteRelative => rel.abs(),
            };
        }
        (acc / n as f64, scales)
    }
}

fn extract_points(records: &[RunRecord], dim: ShapeDim) -> Result<Vec<FitPoint>> {
    let mut points = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if let Some(d) = r.dimension_under_test {
            if d != dim {
                return Err(Error::Validation(format!(
                    "record {i} was swept over {d} but the fit is over {dim}"
                )));
            }
        }
        let t = r.compute_gflops.ok_or_else(|| {
            Error::Validation(format!(
                "record {i} has no compute_gflops; resolve it from examples_seen first"
            ))
        })?;
        if !(t > 0.0) {
            return Err(Error::Validation(format!(
                "record {i} compute must be > 0, got {t}"
            )));
        }
        if !(r.metric_value > 0.0) {
            return Err(Error::Validation(format!(
                "record {i} metric_value must be > 0, got {}",
                r.metric_value
            )));
        }
        points.push(FitPoint {
            x: r.shape.dim(dim) as f64,
            t,
            f: r.metric_value,
        });
    }
    Ok(points)
}

fn validate_records(records: &[RunRecord], dim: ShapeDim) -> Result<()> {
    if records.len() < 8 {
        return Err(Error::Validation(format!(
            "need at least 8 records to fit, got {}",
            records.len()
        )));
    }
    let metric = &records[0].metric_name;
    if let Some(r) = records.iter().find(|r| &r.metric_name != metric) {
        return Err(Error::Validation(format!(
            "records mix metrics {:?} and {:?}",
            metric, r.metric_name
        )));
    }
    let mut xs: Vec<u32> = records.iter().map(|r| r.shape.dim(dim)).collect();
    xs.sort_unstable();
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::Validation(format!(
            "need >= 3 distinct {dim} values, got {}",
            xs.len()
        )));
    }
    let mut ts: Vec<u64> = records
        .iter()
        .filter_map(|r| r.compute_gflops.map(f64::to_bits))
        .collect();
    ts.sort_unstable();
    ts.dedup();
    if ts.len() < 2 {
        return Err(Error::Validation(format!(
            "need >= 2 distinct compute values, got {}",
            ts.len()
        )));
    }
    Ok(())
}

/// Fits the per-dimension law to `records`, deterministically for a given
/// `(records, options)` pair. Records must carry `compute_gflops`.
pub fn fit_dimension(
    records: &[RunRecord],
    dim: ShapeDim,
    options: &FitOptions,
) -> Result<FitReport> {
    validate_records(records, dim)?;
    let points = extract_points(records, dim)?;
    let problem = Problem::new(&points, options.objective);

    // seeded log-uniform restart draws; drawn up front so parallel execution
    // cannot change them
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let box_ = &options.exponent_box;
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| -> f64 {
        let u: f64 = rng.gen();
        lo.ln() + u * (hi.ln() - lo.ln())
    };
    let starts: Vec<[f64; 3]> = (0..options.restarts)
        .map(|_| {
            [
                draw(&mut rng, box_.a),
                draw(&mut rng, box_.b),
                draw(&mut rng, box_.c),
            ]
        })
        .collect();

    let nm_opts = NmOptions {
        max_evals: options.max_evals_per_restart,
        rel_tol: options.rel_tol,
        initial_step: 0.4,
    };
    let results: Vec<NmResult> = par::map(&starts, |start| {
        minimize(|z| problem.eval(z).0, start, &nm_opts)
    });

    let best_idx = results
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.value
                .partial_cmp(&b.1.value)
                .unwrap()
                .then(a.0.cmp(&b.0))
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    let n_restarts = results.len() as u32;
    let mut best = results[best_idx].clone();
    if !best.value.is_finite() {
        let report = build_report(records, dim, &problem, &best, n_restarts, false, true);
        return Err(Error::NonConvergence {
            best_effort: Box::new(report),
        });
    }

    // polish from the winning vertex with a tighter simplex
    for step in [0.05, 0.005] {
        let polished = minimize(
            |z| problem.eval(z).0,
            &best.x,
            &NmOptions {
                initial_step: step,
                ..nm_opts
            },
        );
        if polished.value < best.value {
            best = polished;
        }
    }

    let converged = best.converged || results[best_idx].converged;
    Ok(build_report(
        records, dim, &problem, &best, n_restarts, converged, false,
    ))
}

fn build_report(
    records: &[RunRecord],
    dim: ShapeDim,
    problem: &Problem,
    best: &NmResult,
    n_restarts: u32,
    converged: bool,
    diverged: bool,
) -> FitReport {
    let (objective_value, scales) = problem.eval(&best.x);
    let (a, b, c) = (best.x[0].exp(), best.x[1].exp(), best.x[2].exp());
    let params = LawParams::new(scales[0], a, scales[1], b, c, scales[2], scales[3]);

    let n = problem.f.len();
    let mut residuals = Vec::with_capacity(n);
    let mut training_points = Vec::with_capacity(n);
    for i in 0..n {
        let x = problem.lx[i].exp();
        let t = problem.lt[i].exp();
        let pred = law::eval_law(&params, x, t).unwrap_or(f64::NAN);
        residuals.push((pred - problem.f[i]) / problem.f[i]);
        training_points.push((x, t));
    }

    // a scale at its floor means the matching exponent carries no signal
    let col_mid_alpha = (-a * problem.mean_lx).exp();
    let col_mid_beta = (b * problem.mean_lx - c * problem.mean_lt).exp();
    let near_degenerate = diverged
        || scales[0] * col_mid_alpha <= 10.0 * SCALE_FLOOR_REL * problem.f_min
        || scales[1] * col_mid_beta <= 10.0 * SCALE_FLOOR_REL * problem.f_min;

    FitReport {
        scaling_exponent: law::scaling_exponent(&params),
        params,
        dimension: dim,
        metric_name: records[0].metric_name.clone(),
        objective_value,
        residuals,
        training_points,
        holdout_relative_error: None,
        n_restarts_used: n_restarts,
        converged: converged && !diverged,
        near_degenerate,
    }
}

/// Mean absolute relative error of the fitted law on holdout records, stored
/// into the report. Holdout points are expected to lie outside the training
/// range (the star-center protocol); feeding a training point back simply
/// reproduces that point's residual.
pub fn extrapolation_check(report: &mut FitReport, holdout: &[RunRecord]) -> Result<f64> {
    if holdout.is_empty() {
        return Err(Error::Validation("holdout set is empty".into()));
    }
    let points = extract_points(holdout, report.dimension)?;
    let mut acc = 0.0;
    for p in &points {
        let pred = law::eval_law(&report.params, p.x, p.t)?;
        acc += ((pred - p.f) / p.f).abs();
    }
    let err = acc / points.len() as f64;
    report.holdout_relative_error = Some(err);
    Ok(err)
}

/// Per-metric fit summary produced by [`exponent_stability`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub metric_name: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// `(max - min) / mean` of the scaling exponent across metrics.
    pub s_spread: f64,
    /// Metrics whose fit failed, with the error message; the rest proceed.
    pub failures: Vec<(String, String)>,
}

/// Fits every metric independently and reports how stable the scaling
/// exponent is across them.
pub fn exponent_stability(
    record_sets: &BTreeMap<String, Vec<RunRecord>>,
    dim: ShapeDim,
    options: &FitOptions,
) -> Result<StabilityReport> {
    if record_sets.is_empty() {
        return Err(Error::Validation("no record sets given".into()));
    }
    let entries: Vec<(&String, &Vec<RunRecord>)> = record_sets.iter().collect();
    let fits = par::map(&entries, |(name, records)| {
        ((*name).clone(), fit_dimension(records, dim, options))
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, fit) in fits {
        match fit {
            Ok(report) => rows.push(StabilityRow {
                metric_name: name,
                a: report.params.a,
                b: report.params.b,
                c: report.params.c,
                s: report.scaling_exponent,
            }),
            Err(e) => failures.push((name, e.to_string())),
        }
    }
    let s_spread = if rows.is_empty() {
        0.0
    } else {
        let min = rows.iter().map(|r| r.s).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r.s).fold(f64::NEG_INFINITY, f64::max);
        let mean = rows.iter().map(|r| r.s).sum::<f64>() / rows.len() as f64;
        (max - min) / mean
    };
    Ok(StabilityReport {
        rows,
        s_spread,
        failures,
    })
}
