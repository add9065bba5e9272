//! Star-sweep and grid-sweep experiment planning plus seed-shape selection.

use crate::error::{Error, Result};
use crate::io::{CostSettings, RunRecord};
use crate::shape::{Shape, ShapeDim};
use serde::{Deserialize, Serialize};

/// One-dimension-at-a-time sweep descending from a large star center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSweepSpec {
    pub center: Shape,
    /// Ascending per-dimension grids (width, depth, mlp). Every value lies
    /// strictly below the matching center coordinate.
    pub grids: [Vec<u32>; 3],
    /// Example-count checkpoints each run is evaluated at.
    pub checkpoints: Vec<u64>,
    /// Target geometric step between consecutive grid values.
    pub step_factor: f64,
    /// Fixed structural settings for every run.
    pub cost: CostSettings,
}

impl StarSweepSpec {
    /// Number of (run, checkpoint) records the sweep produces.
    pub fn record_count(&self) -> usize {
        self.grids.iter().map(Vec::len).sum::<usize>() * self.checkpoints.len()
    }

    pub fn validate(&self) -> Result<()> {
        for dim in ShapeDim::ALL {
            let grid = &self.grids[dim.index()];
            let center = self.center.dim(dim);
            if grid.is_empty() {
                return Err(Error::Validation(format!("{dim} grid is empty")));
            }
            for &v in grid {
                if v >= center {
                    return Err(Error::Validation(format!(
                        "{dim} grid value {v} is not strictly below center {center}"
                    )));
                }
                if v < 1 {
                    return Err(Error::Validation(format!("{dim} grid value must be >= 1")));
                }
            }
            for w in grid.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Validation(format!(
                        "{dim} grid must be strictly ascending"
                    )));
                }
                let ratio = w[1] as f64 / w[0] as f64;
                if (ratio / self.step_factor - 1.0).abs() > 0.05 {
                    return Err(Error::Validation(format!(
                        "{dim} grid step {:.4} deviates more than 5% from target {}",
                        ratio, self.step_factor
                    )));
                }
            }
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Validation("checkpoint list is empty".into()));
        }
        Ok(())
    }

    /// Shapes of every run: one dimension swept, the others pinned at the
    /// center. Enumerates dimensions in (width, depth, mlp) order.
    pub fn run_shapes(&self) -> Vec<(ShapeDim, Shape)> {
        let mut out = Vec::new();
        for dim in ShapeDim::ALL {
            for &v in &self.grids[dim.index()] {
                out.push((dim, self.center.with_dim(dim, v)));
            }
        }
        out
    }
}

/// Options for [`plan_star`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarPlanOptions {
    /// Geometric step between consecutive grid values.
    pub step_factor: f64,
    pub points_per_dim: u32,
    /// Grid maxima are anchored at `ceiling_ratio * center` per dimension.
    pub ceiling_ratio: f64,
    /// Per-dimension ceiling overrides (width, depth, mlp).
    pub per_dim_ceilings: Option<[f64; 3]>,
    pub checkpoints: Vec<u64>,
}

impl Default for StarPlanOptions {
    fn default() -> Self {
        Self {
            step_factor: 1.2,
            points_per_dim: 6,
            ceiling_ratio: 0.85,
            per_dim_ceilings: None,
            checkpoints: vec![64_000_000, 128_000_000, 256_000_000],
        }
    }
}

fn round_to_multiple(v: f64, multiple: u32) -> u32 {
    let m = multiple as f64;
    let k = (v / m + 0.5).floor().max(1.0);
    (k * m) as u32
}

/// Plans a star sweep: per dimension, `points_per_dim` exponentially spaced
/// values anchored at `ceiling * center` and descending by `step_factor`,
/// with widths rounded to head-count multiples and everything else to
/// integers.
pub fn plan_star(
    center: Shape,
    options: &StarPlanOptions,
    cost: &CostSettings,
) -> Result<StarSweepSpec> {
    if !(options.step_factor > 1.0) {
        return Err(Error::Validation(format!(
            "step_factor must be > 1, got {}",
            options.step_factor
        )));
    }
    if options.points_per_dim < 4 {
        return Err(Error::Validation(format!(
            "points_per_dim must be >= 4, got {}",
            options.points_per_dim
        )));
    }
    let ceilings = options
        .per_dim_ceilings
        .unwrap_or([options.ceiling_ratio; 3]);
    for (i, &r) in ceilings.iter().enumerate() {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Validation(format!(
                "ceiling ratio for {} must be in (0, 1), got {r}",
                ShapeDim::ALL[i]
            )));
        }
    }

    let mut grids: [Vec<u32>; 3] = Default::default();
    for dim in ShapeDim::ALL {
        let center_v = center.dim(dim) as f64;
        let ceiling = ceilings[dim.index()] * center_v;
        let multiple = if dim == ShapeDim::Width {
            cost.num_heads
        } else {
            1
        };
        let mut grid = Vec::with_capacity(options.points_per_dim as usize);
        let mut raw = ceiling;
        for _ in 0..options.points_per_dim {
            let mut v = round_to_multiple(raw, multiple);
            // rounding may not push the top value past the ceiling
            while v as f64 > ceiling && v > multiple {
                v -= multiple;
            }
            grid.push(v);
            raw /= options.step_factor;
        }
        grid.reverse();
        for w in grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InfeasibleDesign(format!(
                    "center {center} too small: {dim} grid collapses to duplicate value {}",
                    w[0]
                )));
            }
        }
        if grid[0] < multiple || grid[grid.len() - 1] as f64 > ceiling {
            return Err(Error::InfeasibleDesign(format!(
                "center {center} too small to fit {} {dim} values below ceiling {ceiling:.1}",
                options.points_per_dim
            )));
        }
        grids[dim.index()] = grid;
    }

    let spec = StarSweepSpec {
        center,
        grids,
        checkpoints: options.checkpoints.clone(),
        step_factor: options.step_factor,
        cost: *cost,
    };
    spec.validate().map_err(|e| match e {
        // post-rounding spacing violations mean the request cannot be met
        Error::Validation(m) => Error::InfeasibleDesign(m),
        other => other,
    })?;
    Ok(spec)
}

/// Full cross-product sweep of small shapes trained for one short duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSweepSpec {
    pub widths: Vec<u32>,
    pub depths: Vec<u32>,
    pub mlps: Vec<u32>,
    pub examples_per_run: u64,
    pub run_count: u64,
    /// Sum of per-run training compute, GFLOPs.
    pub total_compute_gflops: f64,
    pub cost: CostSettings,
}

impl GridSweepSpec {
    /// Deterministic enumeration: width-major, then depth, then mlp.
    pub fn run_shapes(&self) -> Vec<Shape> {
        let mut out = Vec::with_capacity(self.run_count as usize);
        for &w in &self.widths {
            for &d in &self.depths {
                for &m in &self.mlps {
                    out.push(Shape::new(w, d, m));
                }
            }
        }
        out
    }

    pub fn grids(&self) -> [Vec<u32>; 3] {
        [self.widths.clone(), self.depths.clone(), self.mlps.clone()]
    }
}

/// Plans a grid sweep over the cross-product of the given ascending value
/// lists. Each list needs at least 3 values so an interior optimum is
/// detectable.
pub fn plan_grid(
    ranges: &[Vec<u32>; 3],
    examples_per_run: u64,
    cost: &CostSettings,
) -> Result<GridSweepSpec> {
    for dim in ShapeDim::ALL {
        let list = &ranges[dim.index()];
        if list.len() < 3 {
            return Err(Error::Validation(format!(
                "{dim} list has {} values; need >= 3 for interior selection",
                list.len()
            )));
        }
        for w in list.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Validation(format!(
                    "{dim} list must be strictly ascending"
                )));
            }
        }
    }
    let mut spec = GridSweepSpec {
        widths: ranges[0].clone(),
        depths: ranges[1].clone(),
        mlps: ranges[2].clone(),
        examples_per_run,
        run_count: (ranges[0].len() * ranges[1].len() * ranges[2].len()) as u64,
        total_compute_gflops: 0.0,
        cost: *cost,
    };
    let mut total = 0.0;
    for shape in spec.run_shapes() {
        total += cost.training_compute(shape, examples_per_run)?;
    }
    spec.total_compute_gflops = total;
    Ok(spec)
}

/// Non-dominated subset of `records` under (compute, metric) minimization,
/// sorted by compute ascending with metric strictly decreasing. Ties on
/// (compute, metric) keep the lexicographically smallest shape.
pub fn pareto_frontier(records: &[RunRecord]) -> Result<Vec<RunRecord>> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let metric = &records[0].metric_name;
    let mut indexed: Vec<&RunRecord> = Vec::with_capacity(records.len());
    for r in records {
        if &r.metric_name != metric {
            return Err(Error::Validation(format!(
                "records mix metrics {:?} and {:?}",
                metric, r.metric_name
            )));
        }
        if r.compute_gflops.is_none() {
            return Err(Error::Validation(
                "records need compute_gflops for frontier extraction".into(),
            ));
        }
        indexed.push(r);
    }
    indexed.sort_by(|a, b| {
        a.compute_gflops
            .partial_cmp(&b.compute_gflops)
            .unwrap()
            .then(a.metric_value.partial_cmp(&b.metric_value).unwrap())
            .then(a.shape.cmp(&b.shape))
    });
    let mut out: Vec<RunRecord> = Vec::new();
    let mut best = f64::INFINITY;
    for r in indexed {
        if r.metric_value < best {
            best = r.metric_value;
            out.push(r.clone());
        }
    }
    Ok(out)
}

/// A sweep design the oracle can simulate and the manifest can describe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepDesign {
    Star(StarSweepSpec),
    Grid(GridSweepSpec),
}

impl SweepDesign {
    /// (dimension under test, shape, examples) per record, in deterministic
    /// order: star runs sweep (width, depth, mlp) with checkpoints innermost;
    /// grid runs enumerate width-major.
    pub fn record_plan(&self) -> Vec<(Option<ShapeDim>, Shape, u64)> {
        match self {
            SweepDesign::Star(spec) => {
                let mut out = Vec::with_capacity(spec.record_count());
                for (dim, shape) in spec.run_shapes() {
                    for &examples in &spec.checkpoints {
                        out.push((Some(dim), shape, examples));
                    }
                }
                out
            }
            SweepDesign::Grid(spec) => spec
                .run_shapes()
                .into_iter()
                .map(|shape| (None, shape, spec.examples_per_run))
                .collect(),
        }
    }

    pub fn cost(&self) -> &CostSettings {
        match self {
            SweepDesign::Star(spec) => &spec.cost,
            SweepDesign::Grid(spec) => &spec.cost,
        }
    }
}

/// One training run in an exported manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub width: u32,
    pub depth: u32,
    pub mlp_dim: u32,
    pub dimension_under_test: Option<ShapeDim>,
    /// Example counts at which the run is checkpointed and evaluated.
    pub example_checkpoints: Vec<u64>,
}

/// JSON run-manifest consumable by external trainers or by the simulator:
/// one entry per training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub design: SweepDesign,
    pub runs: Vec<ManifestRun>,
    pub total_runs: u64,
    pub notes: Vec<String>,
}

impl SweepManifest {
    pub fn new(design: SweepDesign) -> Self {
        let runs: Vec<ManifestRun> = match &design {
            SweepDesign::Star(spec) => spec
                .run_shapes()
                .into_iter()
                .map(|(dim, shape)| ManifestRun {
                    width: shape.width,
                    depth: shape.depth,
                    mlp_dim: shape.mlp_dim,
                    dimension_under_test: Some(dim),
                    example_checkpoints: spec.checkpoints.clone(),
                })
                .collect(),
            SweepDesign::Grid(spec) => spec
                .run_shapes()
                .into_iter()
                .map(|shape| ManifestRun {
                    width: shape.width,
                    depth: shape.depth,
                    mlp_dim: shape.mlp_dim,
                    dimension_under_test: None,
                    example_checkpoints: vec![spec.examples_per_run],
                })
                .collect(),
        };
        let total_runs = runs.len() as u64;
        SweepManifest {
            design,
            runs,
            total_runs,
            notes: vec![
                "optimizer hyper-parameter sub-sweeps (learning rate, weight decay) \
                 are not planned here; run them externally per encoder size"
                    .to_string(),
            ],
        }
    }
}

/// Binning rule for the "optimal over a range of compute" test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ComputeBins {
    /// One bin per distinct compute value present in the records.
    #[default]
    Distinct,
    /// The given number of log-spaced budgets between the observed extremes.
    LogCount(u32),
}

/// The selected seed shape plus the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSelection {
    pub x0: Shape,
    /// Least compute (GFLOPs) at which `x0` is optimal.
    pub t0: f64,
    /// Per-dimension flags set when `x0` sits at a grid extreme.
    pub on_boundary: [bool; 3],
    /// True when a boundary flag is set or the optimality range spans fewer
    /// than 2 bins.
    pub non_conclusive: bool,
    pub bins_covered: u32,
    pub total_bins: u32,
    pub pareto_set: Vec<RunRecord>,
}

/// Picks the shape that stays loss-minimal over the largest contiguous range
/// of compute budgets. Input order does not matter.
pub fn select_seed_shape(records: &[RunRecord], bins: ComputeBins) -> Result<SeedSelection> {
    if records.is_empty() {
        return Err(Error::Validation("no records to select from".into()));
    }
    let frontier = pareto_frontier(records)?;
    let budgets: Vec<f64> = match bins {
        ComputeBins::Distinct => {
            let mut ts: Vec<f64> = records
                .iter()
                .map(|r| r.compute_gflops.expect("checked by pareto_frontier"))
                .collect();
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts.dedup();
            ts
        }
        ComputeBins::LogCount(n) => {
            if n < 2 {
                return Err(Error::Validation(format!(
                    "need >= 2 compute bins, got {n}"
                )));
            }
            let ts: Vec<f64> = records
                .iter()
                .map(|r| r.compute_gflops.expect("checked"))
                .collect();
            let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min).ln();
            let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ln();
            (0..n)
                .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    };
    if budgets.len() < 2 {
        return Err(Error::Validation(format!(
            "need >= 2 compute bins, got {}",
            budgets.len()
        )));
    }

    // winner at budget T: the largest-compute frontier record with t <= T
    // (the frontier's metric decreases strictly with compute)
    let winners: Vec<Option<usize>> = budgets
        .iter()
        .map(|&t_budget| {
            let mut winner = None;
            for (i, r) in frontier.iter().enumerate() {
                if r.compute_gflops.unwrap() <= t_budget {
                    winner = Some(i);
                } else {
                    break;
                }
            }
            winner
        })
        .collect();

    // longest contiguous run of one winning shape; earlier start wins ties
    let mut best_run: Option<(usize, usize, Shape)> = None; // (start, len, shape)
    let mut i = 0;
    while i < winners.len() {
        let Some(w) = winners[i] else {
            i += 1;
            continue;
        };
        let shape = frontier[w].shape;
        let start = i;
        while i < winners.len() && winners[i].map(|w| frontier[w].shape) == Some(shape) {
            i += 1;
        }
        let len = i - start;
        if best_run.map_or(true, |(_, blen, _)| len > blen) {
            best_run = Some((start, len, shape));
        }
    }
    let Some((start, len, x0)) = best_run else {
        return Err(Error::Validation(
            "no record is optimal at any compute bin".into(),
        ));
    };

    // grid extremes per dimension, derived from the record set
    let mut on_boundary = [false; 3];
    for dim in ShapeDim::ALL {
        let mut vals: Vec<u32> = records.iter().map(|r| r.shape.dim(dim)).collect();
        vals.sort_unstable();
        vals.dedup();
        let v = x0.dim(dim);
        on_boundary[dim.index()] = v == vals[0] || v == *vals.last().unwrap();
    }

    let non_conclusive = len < 2 || on_boundary.iter().any(|&b| b);
    Ok(SeedSelection {
        x0,
        t0: budgets[start],
        on_boundary,
        non_conclusive,
        bins_covered: len as u32,
        total_bins: budgets.len() as u32,
        pareto_set: frontier,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(shape: Shape, t: f64, f: f64) -> RunRecord {
        RunRecord {
            shape,
            dimension_under_test: None,
            examples_seen: None,
            compute_gflops: Some(t),
            metric_name: "m".into(),
            metric_value: f,
            tag: String::new(),
            extra: Vec::new(),
        }
    }

    #[test]
    fn star_plan_matches_hand_computed_grid() {
        // center mlp 6144, ceiling 0.5 -> top 3072, step 1.2:
        // raw 3072, 2560, 2133.33, 1777.78, 1481.48, 1234.57
        let opts = StarPlanOptions {
            per_dim_ceilings: Some([0.85, 0.6, 0.5]),
            ..StarPlanOptions::default()
        };
        let spec = plan_star(
            Shape::new(1968, 40, 6144),
            &opts,
            &CostSettings::default(),
        )
        .unwrap();
        assert_eq!(spec.grids[2], vec![1235, 1481, 1778, 2133, 2560, 3072]);
        assert_eq!(spec.grids[1], vec![10, 12, 14, 17, 20, 24]);
        // width rounds to multiples of 16, top anchored at 0.85 * 1968
        assert_eq!(spec.grids[0], vec![672, 800, 976, 1168, 1392, 1664]);
        spec.validate().unwrap();
        assert_eq!(spec.record_count(), 54);
    }

    #[test]
    fn star_plan_tracks_paper_design_loosely() {
        // the published design: per-dimension ceilings roughly (0.85, 0.6, 0.5)
        // with ~20-25% steps; generated values land within 20% per point
        let paper: [Vec<u32>; 3] = [
            vec![608, 768, 928, 1088, 1328, 1648],
            vec![8, 10, 12, 16, 20, 24],
            vec![1088, 1360, 1728, 2160, 2592, 3072],
        ];
        let opts = StarPlanOptions {
            step_factor: 1.22,
            per_dim_ceilings: Some([0.85, 0.6, 0.5]),
            ..StarPlanOptions::default()
        };
        let spec = plan_star(
            Shape::new(1968, 40, 6144),
            &opts,
            &CostSettings::default(),
        )
        .unwrap();
        for dim in ShapeDim::ALL {
            for (got, want) in spec.grids[dim.index()].iter().zip(&paper[dim.index()]) {
                let rel = (*got as f64 - *want as f64).abs() / *want as f64;
                assert!(rel < 0.15, "{dim}: got {got} want {want}");
            }
        }
    }

    #[test]
    fn star_plan_never_reaches_center() {
        let spec = plan_star(
            Shape::new(1968, 40, 6144),
            &StarPlanOptions::default(),
            &CostSettings::default(),
        )
        .unwrap();
        for dim in ShapeDim::ALL {
            for &v in &spec.grids[dim.index()] {
                assert!(v < spec.center.dim(dim));
            }
        }
    }

    #[test]
    fn star_plan_small_center_infeasible() {
        let err = plan_star(
            Shape::new(10, 10, 10),
            &StarPlanOptions::default(),
            &CostSettings::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleDesign(_)), "{err}");
    }

    #[test]
    fn grid_plan_counts() {
        let cost = CostSettings::default();
        let spec = plan_grid(
            &[
                vec![416, 512, 608, 768],
                vec![6, 8, 10, 12],
                vec![768, 928, 1088, 1360],
            ],
            600_000_000,
            &cost,
        )
        .unwrap();
        assert_eq!(spec.run_count, 64);
        assert_eq!(spec.run_shapes().len(), 64);

        let spec3 = plan_grid(
            &[vec![416, 512, 608], vec![6, 8, 10], vec![768, 928, 1088]],
            600_000_000,
            &cost,
        )
        .unwrap();
        assert_eq!(spec3.run_count, 27);
    }

    #[test]
    fn grid_plan_total_compute_is_summation() {
        let cost = CostSettings::default();
        let spec = plan_grid(
            &[vec![416, 512, 608], vec![6, 8, 10], vec![768, 928, 1088]],
            600_000_000,
            &cost,
        )
        .unwrap();
        let expect: f64 = spec
            .run_shapes()
            .iter()
            .map(|&s| cost.training_compute(s, 600_000_000).unwrap())
            .sum();
        assert_eq!(spec.total_compute_gflops, expect);
    }

    #[test]
    fn grid_plan_rejects_short_lists() {
        let err = plan_grid(
            &[vec![416, 512], vec![6, 8, 10], vec![768, 928, 1088]],
            1,
            &CostSettings::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("interior"));
    }

    #[test]
    fn pareto_keeps_incomparable_pair() {
        let records = vec![
            rec(Shape::new(16, 1, 16), 1.0, 2.0),
            rec(Shape::new(16, 2, 16), 2.0, 1.0),
        ];
        let front = pareto_frontier(&records).unwrap();
        assert_eq!(front.len(), 2);
    }

    #[test]
    fn pareto_drops_dominated() {
        let records = vec![
            rec(Shape::new(16, 1, 16), 1.0, 1.0),
            rec(Shape::new(16, 2, 16), 2.0, 2.0),
        ];
        let front = pareto_frontier(&records).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].shape.depth, 1);
    }

    #[test]
    fn pareto_tie_keeps_lex_smaller_shape() {
        let records = vec![
            rec(Shape::new(32, 1, 16), 1.0, 1.0),
            rec(Shape::new(16, 1, 16), 1.0, 1.0),
        ];
        let front = pareto_frontier(&records).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].shape.width, 16);
    }

    /// O(n^2) dominance filter plus the same (compute, metric) tie rule.
    fn brute_force_frontier(records: &[RunRecord]) -> Vec<(f64, f64, Shape)> {
        let key =
            |r: &RunRecord| (r.compute_gflops.unwrap(), r.metric_value, r.shape);
        let mut kept: Vec<(f64, f64, Shape)> = Vec::new();
        'outer: for r in records {
            let (rt, rf, rs) = key(r);
            for q in records {
                let (qt, qf, _) = key(q);
                if qt <= rt && qf <= rf && (qt < rt || qf < rf) {
                    continue 'outer;
                }
            }
            // non-dominated; dedupe ties by lexicographic shape
            if let Some(existing) = kept.iter_mut().find(|(t, f, _)| *t == rt && *f == rf) {
                if rs < existing.2 {
                    existing.2 = rs;
                }
            } else {
                kept.push((rt, rf, rs));
            }
        }
        kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
        kept
    }

    #[test]
    fn pareto_matches_brute_force_on_random_records() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let records: Vec<RunRecord> = (0..1000)
            .map(|_| {
                let t = (rng.gen::<f64>() * 4.0).exp();
                let f = (rng.gen::<f64>() * 2.0).exp();
                let w = 16 * rng.gen_range(1..=8u32);
                rec(Shape::new(w, rng.gen_range(1..=8), 16), t, f)
            })
            .collect();
        let fast: Vec<(f64, f64, Shape)> = pareto_frontier(&records)
            .unwrap()
            .iter()
            .map(|r| (r.compute_gflops.unwrap(), r.metric_value, r.shape))
            .collect();
        assert_eq!(fast, brute_force_frontier(&records));
    }

    #[test]
    fn frontier_output_mutually_nondominated_and_sorted() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let records: Vec<RunRecord> = (0..300)
            .map(|i| {
                rec(
                    Shape::new(16 + 16 * (i % 7), 1 + (i % 5), 16),
                    rng.gen::<f64>() * 10.0 + 0.1,
                    rng.gen::<f64>() + 0.1,
                )
            })
            .collect();
        let front = pareto_frontier(&records).unwrap();
        for w in front.windows(2) {
            assert!(w[0].compute_gflops.unwrap() < w[1].compute_gflops.unwrap());
            assert!(w[0].metric_value > w[1].metric_value);
        }
    }

    #[test]
    fn seed_selection_uniform_winner() {
        // one shape dominates every budget
        let best = Shape::new(32, 2, 16);
        let records = vec![
            rec(best, 1.0, 0.10),
            rec(Shape::new(48, 2, 16), 2.0, 0.50),
            rec(Shape::new(64, 2, 16), 3.0, 0.60),
            rec(Shape::new(16, 2, 16), 0.5, 0.90),
            rec(Shape::new(32, 4, 16), 4.0, 0.80),
            rec(Shape::new(32, 8, 16), 5.0, 0.70),
            rec(Shape::new(48, 4, 32), 6.0, 0.65),
        ];
        let sel = select_seed_shape(&records, ComputeBins::Distinct).unwrap();
        assert_eq!(sel.x0, best);
        assert_eq!(sel.t0, 1.0);
        assert!(sel.bins_covered >= 2);
    }

    #[test]
    fn seed_selection_boundary_flagged() {
        // winner's depth is the grid maximum
        let best = Shape::new(32, 8, 16);
        let records = vec![
            rec(Shape::new(16, 2, 16), 0.5, 0.90),
            rec(Shape::new(32, 2, 16), 1.0, 0.80),
            rec(Shape::new(48, 2, 16), 2.0, 0.70),
            rec(Shape::new(32, 4, 16), 1.5, 0.60),
            rec(best, 2.5, 0.10),
            rec(Shape::new(48, 8, 16), 4.0, 0.55),
            rec(Shape::new(64, 4, 32), 5.0, 0.50),
        ];
        let sel = select_seed_shape(&records, ComputeBins::Distinct).unwrap();
        assert_eq!(sel.x0, best);
        assert!(sel.on_boundary[1], "depth at grid max must be flagged");
        assert!(sel.non_conclusive);
    }

    #[test]
    fn seed_selection_permutation_invariant() {
        let records = vec![
            rec(Shape::new(16, 2, 16), 0.5, 0.90),
            rec(Shape::new(32, 2, 16), 1.0, 0.40),
            rec(Shape::new(32, 4, 16), 1.5, 0.35),
            rec(Shape::new(48, 2, 16), 2.0, 0.70),
            rec(Shape::new(48, 4, 16), 2.5, 0.30),
            rec(Shape::new(64, 4, 16), 4.0, 0.28),
        ];
        let a = select_seed_shape(&records, ComputeBins::Distinct).unwrap();
        let mut shuffled = records.clone();
        shuffled.reverse();
        shuffled.swap(1, 3);
        let b = select_seed_shape(&shuffled, ComputeBins::Distinct).unwrap();
        assert_eq!(a.x0, b.x0);
        assert_eq!(a.t0, b.t0);
        assert_eq!(a.on_boundary, b.on_boundary);
    }

    #[test]
    fn seed_selection_requires_two_bins() {
        let records = vec![rec(Shape::new(16, 2, 16), 1.0, 0.5)];
        let err = select_seed_shape(&records, ComputeBins::Distinct).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
