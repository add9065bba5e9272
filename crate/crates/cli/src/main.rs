//! Command-line interface tying the toolkit's modules into reproducible
//! pipelines. Every subcommand reads flags plus optional config, calls one
//! library operation, and writes deterministic JSON or CSV. Exit codes:
//! 0 success, 1 validation/parse error, 2 non-convergence or non-conclusive
//! result.

mod cmds;
mod util;

use clap::{Args, Parser, Subcommand};
use shapescale::io::{CostSettings, ToolConfig};
use shapescale::ShapeDim;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "shapescale",
    version,
    about = "Compute-optimal shape scaling toolkit",
    long_about = "Fits the joint shape/compute scaling law to sweep measurements, plans \
                  star and grid sweeps, simulates them against a synthetic ground truth, \
                  and scales seed architectures to target compute budgets.\n\n\
                  Units: compute is GFLOPs (suffixes K/M/G/T accepted, so 9T = 9e12 GFLOPs); \
                  training durations are example counts; image sizes are pixels."
)]
struct Cli {
    /// JSON tool config supplying defaults (cost model, fit, scaler). Flags
    /// override config values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parameter count and forward FLOPs for one architecture
    Cost(cmds::CostCmd),
    /// Plan a star sweep around a large center architecture
    PlanStar(cmds::PlanStarCmd),
    /// Plan a small-model grid sweep (cross-product)
    PlanGrid(cmds::PlanGridCmd),
    /// Simulate a sweep design against the synthetic ground truth
    Simulate(cmds::SimulateCmd),
    /// Fit the per-dimension scaling law to run records
    Fit(cmds::FitCmd),
    /// Fit every metric independently and report exponent stability
    Exponents(cmds::ExponentsCmd),
    /// Select the small compute-optimal seed shape from grid-sweep records
    SelectSeed(cmds::SelectSeedCmd),
    /// Scale a seed shape to one target compute budget
    OptimizeShape(cmds::OptimizeShapeCmd),
    /// Emit the predicted efficiency frontier over a compute grid
    Frontier(cmds::FrontierCmd),
}

/// Cost-model flags shared by subcommands that convert shapes to compute.
#[derive(Args, Clone, Debug, Default)]
struct CostArgs {
    /// Patch side length in pixels
    #[arg(long, value_name = "PIXELS")]
    patch: Option<u32>,
    /// Input image side length in pixels
    #[arg(long, value_name = "PIXELS")]
    res: Option<u32>,
    /// Attention head count; widths must be divisible by this
    #[arg(long, value_name = "COUNT")]
    heads: Option<u32>,
    /// Per-example FLOPs multiplier; 1.0 counts the forward pass only
    #[arg(long, value_name = "RATIO")]
    multiplier: Option<f64>,
    /// Exclude the pooling head (one attention + MLP block) from costs
    #[arg(long)]
    no_pooling_head: bool,
    /// Exclude the learned positional embedding from costs
    #[arg(long)]
    no_pos_embedding: bool,
}

impl CostArgs {
    fn resolve(&self, base: CostSettings) -> CostSettings {
        CostSettings {
            patch_size: self.patch.unwrap_or(base.patch_size),
            image_resolution: self.res.unwrap_or(base.image_resolution),
            num_heads: self.heads.unwrap_or(base.num_heads),
            flops_multiplier: self.multiplier.unwrap_or(base.flops_multiplier),
            include_pooling_head: !self.no_pooling_head && base.include_pooling_head,
            include_pos_embedding: !self.no_pos_embedding && base.include_pos_embedding,
        }
    }
}

pub(crate) fn parse_dim(s: &str) -> Result<ShapeDim, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match util::read_to_string(path).map_err(|e| e.to_string()).and_then(
            |text| ToolConfig::from_json(&text).map_err(|e| e.to_string()),
        ) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => ToolConfig::default(),
    };
    let result = match cli.command {
        Cmd::Cost(c) => cmds::cost(c, &config),
        Cmd::PlanStar(c) => cmds::plan_star(c, &config),
        Cmd::PlanGrid(c) => cmds::plan_grid(c, &config),
        Cmd::Simulate(c) => cmds::simulate(c, &config),
        Cmd::Fit(c) => cmds::fit(c, &config),
        Cmd::Exponents(c) => cmds::exponents(c, &config),
        Cmd::SelectSeed(c) => cmds::select_seed(c, &config),
        Cmd::OptimizeShape(c) => cmds::optimize_shape(c, &config),
        Cmd::Frontier(c) => cmds::frontier(c, &config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
