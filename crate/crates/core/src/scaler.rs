//! Grows a seed shape to a target compute budget and emits the predicted
//! efficiency frontier.
//!
//! A compute increase by a factor `tau` over the seed compute is treated as
//! a sequence of per-dimension increments `tau^w_k` (weights summing to 1),
//! each dimension responding per its scaling exponent: dimension `k` grows by
//! `tau^(w_k * s_k)`. Rounding to a valid integer architecture happens once,
//! at the end; leftover compute goes into training duration.

use crate::cost;
use crate::error::{Error, Result};
use crate::io::CostSettings;
use crate::shape::Shape;
use serde::{Deserialize, Serialize};

/// Exponents fitted on ImageNet 10-shot classification (width, depth, mlp).
pub const CLASSIFICATION_EXPONENTS: [f64; 3] = [0.22, 0.45, 0.60];
/// Exponents fitted on the multitask decoding metric (width, depth, mlp).
pub const MULTITASK_EXPONENTS: [f64; 3] = [0.25, 0.49, 0.62];

/// Looks up a named exponent preset.
pub fn exponent_preset(name: &str) -> Option<[f64; 3]> {
    match name {
        "classification" => Some(CLASSIFICATION_EXPONENTS),
        "multitask" => Some(MULTITASK_EXPONENTS),
        _ => None,
    }
}

/// Everything needed to scale a seed shape to a compute budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub x0: Shape,
    /// Seed compute: the least compute (GFLOPs) at which `x0` is optimal.
    pub t0: f64,
    /// Per-dimension scaling exponents (width, depth, mlp).
    pub s: [f64; 3],
    /// Per-dimension allocation weights, summing to 1.
    pub w: [f64; 3],
    pub target_compute: f64,
}

impl ScalingPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::Validation(format!("t0 must be > 0, got {}", self.t0)));
        }
        for (k, &s) in self.s.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Validation(format!(
                    "scaling exponent s[{k}] must be > 0, got {s}"
                )));
            }
        }
        let mut sum = 0.0;
        for (k, &w) in self.w.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Validation(format!(
                    "allocation weight w[{k}] must be > 0, got {w}"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "allocation weights must sum to 1, got {sum}"
            )));
        }
        if !(self.target_compute >= self.t0) {
            return Err(Error::Validation(format!(
                "target compute {} below seed compute {}; downscaling is unsupported",
                self.target_compute, self.t0
            )));
        }
        Ok(())
    }
}

/// A scaled architecture with its training duration reconciled to the
/// compute budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledModel {
    /// Shape before integer rounding.
    pub real_shape: [f64; 3],
    pub rounded_shape: Shape,
    pub training_examples: u64,
    /// Compute actually consumed; within one example's FLOPs of the target.
    pub achieved_compute: f64,
    pub param_count: u64,
}

/// Applies the joint scaling rule: `x_k = x0_k * tau^(w_k * s_k)` with
/// `tau = target / t0`. Returns the real-valued shape; `tau = 1` returns the
/// seed exactly.
pub fn scale_shape(plan: &ScalingPlan) -> Result<[f64; 3]> {
    plan.validate()?;
    let tau = plan.target_compute / plan.t0;
    let x0 = plan.x0.as_f64_array();
    Ok([0, 1, 2].map(|k| x0[k] * tau.powf(plan.w[k] * plan.s[k])))
}

fn round_positive_multiple(v: f64, multiple: u32) -> u32 {
    let m = multiple as f64;
    // half-up, clamped to at least one multiple
    let k = (v / m + 0.5).floor().max(1.0);
    (k * m) as u32
}

/// Rounds a real-valued shape to a valid architecture: width to the nearest
/// positive multiple of `head_count`, mlp to the nearest positive multiple
/// of `mlp_multiple`, depth to the nearest integer >= 1. Half-way values
/// round up.
pub fn round_shape(real: [f64; 3], head_count: u32, mlp_multiple: u32) -> Shape {
    Shape::new(
        round_positive_multiple(real[0], head_count.max(1)),
        round_positive_multiple(real[1], 1),
        round_positive_multiple(real[2], mlp_multiple.max(1)),
    )
}

/// Allocates the residual budget to training duration: as many examples as
/// fit within `target_compute` for this shape.
pub fn reconcile_examples(
    shape: Shape,
    target_compute: f64,
    cost_settings: &CostSettings,
) -> Result<ScaledModel> {
    let config = cost_settings.config_for(shape);
    let breakdown = cost::cost_breakdown(&config)?;
    let examples =
        cost::examples_for_compute(&config, target_compute, cost_settings.flops_multiplier)?;
    if examples == 0 {
        return Err(Error::InfeasibleDesign(format!(
            "target compute {target_compute} GFLOPs is below one forward pass ({} GFLOPs) of {shape}",
            breakdown.forward_gflops * cost_settings.flops_multiplier
        )));
    }
    let achieved =
        cost::training_compute(&config, examples, cost_settings.flops_multiplier)?;
    Ok(ScaledModel {
        real_shape: shape.as_f64_array(),
        rounded_shape: shape,
        training_examples: examples,
        achieved_compute: achieved,
        param_count: breakdown.param_count,
    })
}

/// Scale, round, and reconcile in one step.
pub fn scale_to_compute(
    plan: &ScalingPlan,
    cost_settings: &CostSettings,
    mlp_multiple: u32,
) -> Result<ScaledModel> {
    let real = scale_shape(plan)?;
    let rounded = round_shape(real, cost_settings.num_heads, mlp_multiple);
    let mut model = reconcile_examples(rounded, plan.target_compute, cost_settings)?;
    model.real_shape = real;
    Ok(model)
}

/// One row of the predicted efficiency frontier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub compute_gflops: f64,
    pub shape: Shape,
    pub params: u64,
    pub examples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierTable {
    pub rows: Vec<FrontierRow>,
    /// False when independent per-row rounding broke the per-dimension
    /// monotone growth of the real-valued shapes.
    pub monotone_after_rounding: bool,
}

/// Predicted efficiency frontier over an ascending compute grid (each value
/// at least the seed compute).
pub fn frontier_table(
    x0: Shape,
    t0: f64,
    s: [f64; 3],
    w: [f64; 3],
    compute_grid: &[f64],
    cost_settings: &CostSettings,
    mlp_multiple: u32,
) -> Result<FrontierTable> {
    if compute_grid.is_empty() {
        return Err(Error::Validation("compute grid is empty".into()));
    }
    for pair in compute_grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::Validation(
                "compute grid must be strictly ascending".into(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(compute_grid.len());
    for &target in compute_grid {
        let plan = ScalingPlan {
            x0,
            t0,
            s,
            w,
            target_compute: target,
        };
        let model = scale_to_compute(&plan, cost_settings, mlp_multiple)?;
        rows.push(FrontierRow {
            compute_gflops: target,
            shape: model.rounded_shape,
            params: model.param_count,
            examples: model.training_examples,
        });
    }
    let monotone = rows.windows(2).all(|p| {
        p[1].shape.width >= p[0].shape.width
            && p[1].shape.depth >= p[0].shape.depth
            && p[1].shape.mlp_dim >= p[0].shape.mlp_dim
    });
    Ok(FrontierTable {
        rows,
        monotone_after_rounding: monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{self, LawParams};

    fn seed_plan(target: f64) -> ScalingPlan {
        let cost = CostSettings::default();
        let t0 = cost.training_compute(Shape::new(608, 10, 928), 600_000_000).unwrap();
        ScalingPlan {
            x0: Shape::new(608, 10, 928),
            t0,
            s: CLASSIFICATION_EXPONENTS,
            w: [1.0 / 3.0; 3],
            target_compute: target,
        }
    }

    #[test]
    fn tau_one_is_identity() {
        let cost = CostSettings::default();
        let t0 = cost.training_compute(Shape::new(608, 10, 928), 600_000_000).unwrap();
        let real = scale_shape(&seed_plan(t0)).unwrap();
        assert_eq!(real, [608.0, 10.0, 928.0]);
    }

    #[test]
    fn single_dimension_allocation() {
        let mut plan = seed_plan(0.0);
        plan.t0 = 1.0;
        plan.target_compute = 1024.0;
        plan.w = [1.0 - 2e-12, 1e-12, 1e-12];
        let real = scale_shape(&plan).unwrap();
        let tau: f64 = 1024.0;
        assert!((real[0] / (608.0 * tau.powf(plan.s[0])) - 1.0).abs() < 1e-9);
        assert!((real[1] / 10.0 - 1.0).abs() < 1e-9);
        assert!((real[2] / 928.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn downscaling_rejected() {
        let mut plan = seed_plan(1.0);
        plan.target_compute = plan.t0 * 0.5;
        assert!(matches!(scale_shape(&plan), Err(Error::Validation(_))));
    }

    #[test]
    fn reproduces_published_shape_within_tolerance() {
        let model = scale_to_compute(&seed_plan(9e12), &CostSettings::default(), 16).unwrap();
        let got = model.rounded_shape;
        let want = Shape::new(1152, 27, 4304);
        let rel = |g: u32, w: u32| (g as f64 - w as f64).abs() / w as f64;
        assert!(rel(got.width, want.width) <= 0.20, "width {got}");
        assert!(rel(got.mlp_dim, want.mlp_dim) <= 0.20, "mlp {got}");
        assert!(
            (got.depth as i64 - want.depth as i64).abs() <= 2,
            "depth {got}"
        );
    }

    #[test]
    fn round_shape_hand_cases() {
        assert_eq!(
            round_shape([1151.3, 26.6, 4301.9], 16, 16),
            Shape::new(1152, 27, 4304)
        );
        // exact integers pass through
        assert_eq!(
            round_shape([1152.0, 27.0, 4304.0], 16, 16),
            Shape::new(1152, 27, 4304)
        );
        // floor clamp to one head group
        assert_eq!(round_shape([8.0, 0.2, 3.0], 16, 16).width, 16);
        assert_eq!(round_shape([8.0, 0.2, 3.0], 16, 16).depth, 1);
        // half-up tie break
        assert_eq!(round_shape([24.0, 2.5, 24.0], 16, 16).depth, 3);
    }

    #[test]
    fn reconcile_nine_tera_gives_forty_billion() {
        let cost = CostSettings::default();
        let model = reconcile_examples(Shape::new(1152, 27, 4304), 9e12, &cost).unwrap();
        let rel = (model.training_examples as f64 - 40e9).abs() / 40e9;
        assert!(rel < 0.05, "examples {}", model.training_examples);
        assert!(model.achieved_compute <= 9e12);
    }

    #[test]
    fn reconcile_exact_forward_passes() {
        let cost = CostSettings::default();
        let shape = Shape::new(608, 10, 928);
        let one = cost::forward_flops(&cost.config_for(shape)).unwrap();
        for k in [1u64, 7, 1000] {
            let model = reconcile_examples(shape, one * k as f64, &cost).unwrap();
            assert_eq!(model.training_examples, k);
        }
    }

    #[test]
    fn reconcile_below_one_pass_is_infeasible() {
        let cost = CostSettings::default();
        let err = reconcile_examples(Shape::new(608, 10, 928), 1.0, &cost).unwrap_err();
        assert!(matches!(err, Error::InfeasibleDesign(_)));
    }

    #[test]
    fn reconcile_inversion_bound() {
        let cost = CostSettings::default();
        for (shape, target) in [
            (Shape::new(608, 10, 928), 3.33e11),
            (Shape::new(1152, 27, 4304), 7.7e12),
            (Shape::new(432, 7, 1024), 1.9e9),
        ] {
            let model = reconcile_examples(shape, target, &cost).unwrap();
            let one = cost::forward_flops(&cost.config_for(shape)).unwrap();
            assert!(model.achieved_compute <= target);
            assert!(target < model.achieved_compute + one);
        }
    }

    #[test]
    fn growth_ordering_mlp_depth_width() {
        for target_mult in [3.0, 10.0, 1e3] {
            let mut plan = seed_plan(1.0);
            plan.target_compute = plan.t0 * target_mult;
            let real = scale_shape(&plan).unwrap();
            let growth = [real[0] / 608.0, real[1] / 10.0, real[2] / 928.0];
            assert!(growth[2] > growth[1] && growth[1] > growth[0], "{growth:?}");
        }
    }

    #[test]
    fn frontier_param_growth_per_decade() {
        let cost = CostSettings::default();
        let t0 = cost.training_compute(Shape::new(608, 10, 928), 600_000_000).unwrap();
        let table = frontier_table(
            Shape::new(608, 10, 928),
            t0,
            CLASSIFICATION_EXPONENTS,
            [1.0 / 3.0; 3],
            &[t0, 10.0 * t0, 100.0 * t0],
            &cost,
            16,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 3);
        for pair in table.rows.windows(2) {
            let ratio = pair[1].params as f64 / pair[0].params as f64;
            assert!((2.0..=3.0).contains(&ratio), "params ratio {ratio}");
            assert!(ratio < 10.0);
        }
        assert!(table.monotone_after_rounding);
    }

    #[test]
    fn frontier_singleton_is_seed() {
        let cost = CostSettings::default();
        let x0 = Shape::new(608, 10, 928);
        let t0 = cost.training_compute(x0, 600_000_000).unwrap();
        let table = frontier_table(
            x0,
            t0,
            CLASSIFICATION_EXPONENTS,
            [1.0 / 3.0; 3],
            &[t0],
            &cost,
            16,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].shape, x0);
    }

    #[test]
    fn consistent_with_law_single_dimension_ratio() {
        // a single-dimension plan with w = 1 must reproduce the closed-form
        // optimal-shape ratio between two computes
        let p = LawParams::new(5.0, 0.9, 0.02, 1.3, 0.6, 0.8, 0.2);
        let (t0, t1) = (1e6, 1e9);
        let x_t0 = law::optimal_shape_dim(&p, t0).unwrap();
        let x_t1 = law::optimal_shape_dim(&p, t1).unwrap();
        let s = law::scaling_exponent(&p);
        let plan = ScalingPlan {
            x0: Shape::new(16, 1, 16),
            t0,
            s: [s, s, s],
            w: [1.0 - 2e-12, 1e-12, 1e-12],
            target_compute: t1,
        };
        let real = scale_shape(&plan).unwrap();
        let got_ratio = real[0] / 16.0;
        let want_ratio = x_t1 / x_t0;
        assert!(
            (got_ratio / want_ratio - 1.0).abs() < 1e-9,
            "{got_ratio} vs {want_ratio}"
        );
    }

    #[test]
    fn presets_exposed() {
        assert_eq!(exponent_preset("classification"), Some([0.22, 0.45, 0.60]));
        assert_eq!(exponent_preset("multitask"), Some([0.25, 0.49, 0.62]));
        assert_eq!(exponent_preset("nope"), None);
    }
}
