//! Parameter counts, forward FLOPs and training compute for encoder shapes.
//!
//! Everything downstream (sweep planning, the synthetic oracle, the scaler)
//! converts between shapes and compute through these functions, so they are
//! kept pure and deterministic. Compute is always expressed in GFLOPs.

use crate::error::{Error, Result};
use crate::shape::Shape;
use serde::{Deserialize, Serialize};

/// A shape plus the fixed structural settings needed for cost accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub shape: Shape,
    /// Patch side length in pixels.
    pub patch_size: u32,
    /// Input image side length in pixels.
    pub image_resolution: u32,
    pub num_heads: u32,
    /// Count one extra attention + MLP block for the pooling head.
    pub include_pooling_head: bool,
    /// Count a learned positional embedding of `token_count * width` params.
    pub include_pos_embedding: bool,
}

impl ModelConfig {
    /// Config with the sweep defaults: patch 14, resolution 224, 16 heads,
    /// pooling head and positional embedding included.
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            patch_size: 14,
            image_resolution: 224,
            num_heads: 16,
            include_pooling_head: true,
            include_pos_embedding: true,
        }
    }

    pub fn with_resolution(mut self, resolution: u32) -> Self {
        self.image_resolution = resolution;
        self
    }

    pub fn with_patch_size(mut self, patch: u32) -> Self {
        self.patch_size = patch;
        self
    }

    pub fn token_count(&self) -> u64 {
        let per_side = (self.image_resolution / self.patch_size) as u64;
        per_side * per_side
    }

    pub fn validate(&self) -> Result<()> {
        let Shape {
            width,
            depth,
            mlp_dim,
        } = self.shape;
        if width < 1 || depth < 1 || mlp_dim < 1 {
            return Err(Error::InvalidConfig(format!(
                "shape dimensions must be >= 1, got {}",
                self.shape
            )));
        }
        if self.num_heads < 1 {
            return Err(Error::InvalidConfig("num_heads must be >= 1".into()));
        }
        if width % self.num_heads != 0 {
            return Err(Error::InvalidConfig(format!(
                "width {} not divisible by num_heads {}",
                width, self.num_heads
            )));
        }
        if self.patch_size < 1 {
            return Err(Error::InvalidConfig("patch_size must be >= 1".into()));
        }
        if self.image_resolution % self.patch_size != 0 {
            return Err(Error::InvalidConfig(format!(
                "image_resolution {} not divisible by patch_size {}",
                self.image_resolution, self.patch_size
            )));
        }
        if self.token_count() < 1 {
            return Err(Error::InvalidConfig("token count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameter-count breakdown plus forward FLOPs for one config.
///
/// `param_count` is exactly `embedding + attention + mlp + pooling_head`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Patch embedding plus (optional) positional embedding.
    pub embedding: u64,
    /// Attention projections, biases and their layer norm, over all blocks.
    pub attention: u64,
    /// MLP weights, biases and their layer norm, over all blocks.
    pub mlp: u64,
    /// One extra attention + MLP block when the pooling head is counted.
    pub pooling_head: u64,
    pub param_count: u64,
    /// Forward pass for one example, in GFLOPs.
    pub forward_gflops: f64,
}

/// Full cost breakdown for a validated config.
pub fn cost_breakdown(config: &ModelConfig) -> Result<CostBreakdown> {
    config.validate()?;
    let w = config.shape.width as u64;
    let d = config.shape.depth as u64;
    let m = config.shape.mlp_dim as u64;
    let p = config.patch_size as u64;
    let tokens = config.token_count();

    let mut embedding = 3 * p * p * w + w;
    if config.include_pos_embedding {
        embedding += tokens * w;
    }
    // Per block: 4w^2 + 4w attention projections with bias, 2wm + w + m MLP
    // with bias, and 2w per layer norm (one for each sublayer).
    let attn_block = 4 * w * w + 4 * w + 2 * w;
    let mlp_block = 2 * w * m + w + m + 2 * w;
    let attention = d * attn_block;
    let mlp = d * mlp_block;
    let pooling_head = if config.include_pooling_head {
        attn_block + mlp_block
    } else {
        0
    };
    let param_count = embedding + attention + mlp + pooling_head;

    let lf = tokens as f64;
    let forward_flops =
        2.0 * param_count as f64 * lf + 4.0 * lf * lf * w as f64 * d as f64;

    Ok(CostBreakdown {
        embedding,
        attention,
        mlp,
        pooling_head,
        param_count,
        forward_gflops: forward_flops / 1e9,
    })
}

/// Total parameter count for a config.
pub fn param_count(config: &ModelConfig) -> Result<u64> {
    Ok(cost_breakdown(config)?.param_count)
}

/// Forward-pass cost for one example, in GFLOPs.
pub fn forward_flops(config: &ModelConfig) -> Result<f64> {
    Ok(cost_breakdown(config)?.forward_gflops)
}

/// Total training compute in GFLOPs for a number of examples seen.
///
/// `flops_multiplier` scales the per-example cost (1.0 counts the forward
/// pass only; pass e.g. 3.0 to include an approximate backward pass).
pub fn training_compute(
    config: &ModelConfig,
    examples_seen: u64,
    flops_multiplier: f64,
) -> Result<f64> {
    if !(flops_multiplier > 0.0) {
        return Err(Error::Validation(format!(
            "flops_multiplier must be > 0, got {flops_multiplier}"
        )));
    }
    Ok(forward_flops(config)? * examples_seen as f64 * flops_multiplier)
}

/// Largest example count whose training compute does not exceed `compute`.
///
/// Inverse of [`training_compute`]: `training_compute(examples_for_compute(t)) <= t`,
/// and feeding a value produced by `training_compute` returns the original
/// example count exactly.
pub fn examples_for_compute(
    config: &ModelConfig,
    compute: f64,
    flops_multiplier: f64,
) -> Result<u64> {
    if !(compute >= 0.0) {
        return Err(Error::Validation(format!(
            "compute must be >= 0, got {compute}"
        )));
    }
    if !(flops_multiplier > 0.0) {
        return Err(Error::Validation(format!(
            "flops_multiplier must be > 0, got {flops_multiplier}"
        )));
    }
    let unit = forward_flops(config)? * flops_multiplier;
    let mut n = (compute / unit).floor();
    // Nudge across the rounding boundary so n*unit <= compute < (n+1)*unit
    // holds exactly in f64 arithmetic.
    while (n + 1.0) * unit <= compute {
        n += 1.0;
    }
    while n > 0.0 && n * unit > compute {
        n -= 1.0;
    }
    Ok(n as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::ShapeDim;

    fn cfg(w: u32, d: u32, m: u32, patch: u32, res: u32) -> ModelConfig {
        ModelConfig::new(Shape::new(w, d, m))
            .with_patch_size(patch)
            .with_resolution(res)
    }

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want
    }

    #[test]
    fn table_anchor_vit_g_params() {
        let c = cfg(1408, 40, 6144, 14, 518);
        let p = param_count(&c).unwrap() as f64;
        assert!(rel_err(p, 1011e6) < 0.05, "got {p}");
    }

    #[test]
    fn table_anchor_sovit_params() {
        let c = cfg(1152, 27, 4304, 14, 224);
        let p = param_count(&c).unwrap() as f64;
        assert!(rel_err(p, 428e6) < 0.05, "got {p}");
    }

    #[test]
    fn table_anchor_vit_l_params() {
        let c = cfg(1024, 24, 4096, 16, 384);
        let p = param_count(&c).unwrap() as f64;
        assert!(rel_err(p, 303e6) < 0.05, "got {p}");
    }

    #[test]
    fn table_anchor_flops() {
        for (c, want) in [
            (cfg(1152, 27, 4304, 14, 224), 221.0),
            (cfg(1408, 40, 6144, 14, 518), 3208.0),
            (cfg(1024, 24, 4096, 16, 384), 383.0),
            (cfg(1152, 27, 4304, 14, 518), 1374.0),
        ] {
            let f = forward_flops(&c).unwrap();
            assert!(rel_err(f, want) < 0.05, "want ~{want} got {f}");
        }
    }

    #[test]
    fn unit_shape_hand_count() {
        // width 1, depth 1, mlp 1, heads 1, patch 1, resolution 1 -> 1 token.
        let c = ModelConfig {
            shape: Shape::new(1, 1, 1),
            patch_size: 1,
            image_resolution: 1,
            num_heads: 1,
            include_pooling_head: false,
            include_pos_embedding: false,
        };
        // patch embed 3*1*1*1 + 1 = 4; block: attn 4+4+2 = 10, mlp 2+1+1+2 = 6.
        let b = cost_breakdown(&c).unwrap();
        assert_eq!(b.embedding, 4);
        assert_eq!(b.attention, 10);
        assert_eq!(b.mlp, 6);
        assert_eq!(b.param_count, 20);
    }

    #[test]
    fn nine_tera_gflops_accounting() {
        let sovit = cfg(1152, 27, 4304, 14, 224);
        let t = training_compute(&sovit, 40_000_000_000, 1.0).unwrap();
        assert!(rel_err(t, 9e12) < 0.05, "got {t}");

        let vit_g = cfg(1408, 40, 6144, 14, 224);
        let t = training_compute(&vit_g, 16_000_000_000, 1.0).unwrap();
        assert!(rel_err(t, 9e12) < 0.05, "got {t}");
    }

    #[test]
    fn zero_examples_zero_compute() {
        let c = cfg(608, 10, 928, 14, 224);
        assert_eq!(training_compute(&c, 0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn examples_for_nine_tera() {
        let c = cfg(1152, 27, 4304, 14, 224);
        let n = examples_for_compute(&c, 9e12, 1.0).unwrap() as f64;
        assert!(rel_err(n, 40e9) < 0.05, "got {n}");
    }

    #[test]
    fn one_forward_pass_inverts_to_one() {
        let c = cfg(608, 10, 928, 14, 224);
        let one = forward_flops(&c).unwrap();
        assert_eq!(examples_for_compute(&c, one, 1.0).unwrap(), 1);
    }

    #[test]
    fn roundtrip_examples_exact() {
        let c = cfg(768, 12, 1360, 14, 224);
        for n in [0u64, 1, 7, 599_999_999, 600_000_000, 40_000_000_000] {
            let t = training_compute(&c, n, 1.0).unwrap();
            assert_eq!(examples_for_compute(&c, t, 1.0).unwrap(), n, "n={n}");
        }
    }

    #[test]
    fn strict_monotonicity_per_dimension() {
        let base = cfg(608, 10, 928, 14, 224);
        for dim in ShapeDim::ALL {
            let mut bigger = base;
            // step by num_heads so the width invariant keeps holding
            let step = if dim == ShapeDim::Width { 16 } else { 1 };
            bigger.shape = bigger.shape.with_dim(dim, base.shape.dim(dim) + step);
            assert!(param_count(&bigger).unwrap() > param_count(&base).unwrap());
            assert!(forward_flops(&bigger).unwrap() > forward_flops(&base).unwrap());
        }
    }

    #[test]
    fn flops_increase_with_resolution() {
        let lo = cfg(608, 10, 928, 14, 224);
        let hi = cfg(608, 10, 928, 14, 448);
        assert!(forward_flops(&hi).unwrap() > forward_flops(&lo).unwrap());
    }

    #[test]
    fn breakdown_is_additive() {
        let b = cost_breakdown(&cfg(1152, 27, 4304, 14, 224)).unwrap();
        assert_eq!(
            b.param_count,
            b.embedding + b.attention + b.mlp + b.pooling_head
        );
        assert!(b.embedding > 0 && b.attention > 0 && b.mlp > 0 && b.pooling_head > 0);
    }

    #[test]
    fn validation_names_the_invariant() {
        let mut c = cfg(608, 10, 928, 14, 224);
        c.shape.width = 7;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("divisible"), "message was: {msg}");

        let mut c = cfg(608, 10, 928, 14, 224);
        c.shape.depth = 0;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains(">= 1"), "message was: {msg}");
    }
}
