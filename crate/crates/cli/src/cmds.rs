use crate::util::*;
use crate::CostArgs;
use anyhow::{anyhow, bail, Result};
use clap::Args;
use serde_json::json;
use shapescale::io::{
    self, fmt_f64, CostSettings, RecordFormat, RunRecord, ToolConfig,
};
use shapescale::oracle::{self, GroundTruth, NoiseModel, NoiseSpec};
use shapescale::sweeps::{self, ComputeBins, SweepDesign, SweepManifest};
use shapescale::{cost, fit, scaler, Shape, ShapeDim};
use std::collections::BTreeMap;
use std::path::PathBuf;

const EXIT_OK: u8 = 0;
const EXIT_SOFT: u8 = 2;

fn to_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- cost

#[derive(Args, Debug)]
pub struct CostCmd {
    /// Width (internal representation size)
    #[arg(long)]
    width: u32,
    /// Depth (number of encoder blocks)
    #[arg(long)]
    depth: u32,
    /// MLP hidden dimension
    #[arg(long)]
    mlp: u32,
    /// Also report training compute for this many examples (e.g. 40e9)
    #[arg(long, value_name = "EXAMPLES", value_parser = parse_count)]
    examples: Option<u64>,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON report (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn cost(cmd: CostCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let model = settings.config_for(Shape::new(cmd.width, cmd.depth, cmd.mlp));
    let breakdown = cost::cost_breakdown(&model)?;
    let mut out = json!({
        "config": model,
        "breakdown": breakdown,
    });
    if let Some(examples) = cmd.examples {
        let t = cost::training_compute(&model, examples, settings.flops_multiplier)?;
        out["training"] = json!({
            "examples_seen": examples,
            "compute_gflops": t,
        });
    }
    write_output(&cmd.out, &to_pretty(&out))?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- plan-star

#[derive(Args, Debug)]
pub struct PlanStarCmd {
    /// Star center as width,depth,mlp (e.g. 1968,40,6144)
    #[arg(long, value_parser = parse_shape)]
    center: Shape,
    /// Geometric step between consecutive grid values
    #[arg(long, default_value_t = 1.2)]
    step: f64,
    /// Grid points per dimension
    #[arg(long, default_value_t = 6)]
    points: u32,
    /// Grid maxima as a fraction of the center coordinate
    #[arg(long, default_value_t = 0.85)]
    ceiling: f64,
    /// Per-dimension ceiling overrides: width,depth,mlp fractions
    #[arg(long, value_name = "W,D,M", value_parser = parse_weights)]
    ceilings: Option<[f64; 3]>,
    /// Example-count checkpoints per run (e.g. 64e6,128e6,256e6)
    #[arg(long, value_name = "LIST", value_delimiter = ',', value_parser = parse_count)]
    checkpoints: Option<Vec<u64>>,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON manifest (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn plan_star(cmd: PlanStarCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let mut options = sweeps::StarPlanOptions {
        step_factor: cmd.step,
        points_per_dim: cmd.points,
        ceiling_ratio: cmd.ceiling,
        per_dim_ceilings: cmd.ceilings,
        ..sweeps::StarPlanOptions::default()
    };
    if let Some(cp) = cmd.checkpoints {
        options.checkpoints = cp;
    }
    let spec = sweeps::plan_star(cmd.center, &options, &settings)?;
    let manifest = SweepManifest::new(SweepDesign::Star(spec));
    write_output(&cmd.out, &to_pretty(&manifest))?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- plan-grid

#[derive(Args, Debug)]
pub struct PlanGridCmd {
    /// Ascending width values (e.g. 416,512,608,768)
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    widths: Vec<u32>,
    /// Ascending depth values
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    depths: Vec<u32>,
    /// Ascending MLP-dimension values
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    mlps: Vec<u32>,
    /// Training examples per run (e.g. 600e6)
    #[arg(long, value_name = "EXAMPLES", value_parser = parse_count)]
    examples_per_run: u64,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON manifest (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn plan_grid(cmd: PlanGridCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let ranges = [cmd.widths, cmd.depths, cmd.mlps];
    let spec = sweeps::plan_grid(&ranges, cmd.examples_per_run, &settings)?;
    let manifest = SweepManifest::new(SweepDesign::Grid(spec));
    write_output(&cmd.out, &to_pretty(&manifest))?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- simulate

#[derive(Args, Debug)]
pub struct SimulateCmd {
    /// Sweep manifest or bare design JSON produced by plan-star/plan-grid
    #[arg(long, value_name = "FILE")]
    design: PathBuf,
    /// RNG seed for observation noise (mandatory; no hidden entropy)
    #[arg(long)]
    seed: u64,
    /// Noise level: log-scale std for lognormal, metric std for additive
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Noise model
    #[arg(long, value_name = "MODEL", default_value = "lognormal")]
    noise_model: String,
    /// Metric name stamped on every record
    #[arg(long, default_value = "synthetic_loss")]
    metric: String,
    /// Ground truth: preset name ("classification") or a JSON file
    #[arg(long, default_value = "classification", value_name = "PRESET|FILE")]
    gt: String,
    /// Also emit the star-center runs (extrapolation holdout; star designs only)
    #[arg(long)]
    include_center: bool,
    /// Output format: csv or jsonl
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path for the records (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn load_ground_truth(spec: &str) -> Result<GroundTruth> {
    match spec {
        "classification" => Ok(GroundTruth::classification_preset()),
        path => {
            let text = read_to_string(std::path::Path::new(path))?;
            serde_json::from_str(&text)
                .map_err(|e| anyhow!("ground-truth file {path}: {e}"))
        }
    }
}

fn parse_format(s: &str) -> Result<RecordFormat> {
    match s {
        "csv" => Ok(RecordFormat::Csv),
        "jsonl" => Ok(RecordFormat::JsonLines),
        other => bail!("unknown format {other:?} (expected csv or jsonl)"),
    }
}

fn load_design(path: &PathBuf) -> Result<SweepDesign> {
    let text = read_to_string(path)?;
    if let Ok(manifest) = serde_json::from_str::<SweepManifest>(&text) {
        return Ok(manifest.design);
    }
    serde_json::from_str::<SweepDesign>(&text)
        .map_err(|e| anyhow!("{}: not a sweep manifest or design: {e}", path.display()))
}

pub fn simulate(cmd: SimulateCmd, _config: &ToolConfig) -> Result<u8> {
    let design = load_design(&cmd.design)?;
    let gt = load_ground_truth(&cmd.gt)?;
    let model = match cmd.noise_model.as_str() {
        "none" => NoiseModel::None,
        "lognormal" => NoiseModel::MultiplicativeLognormal,
        "additive" => NoiseModel::AdditiveGaussian,
        other => bail!("unknown noise model {other:?}"),
    };
    let noise = NoiseSpec {
        model,
        sigma: cmd.sigma,
        seed: cmd.seed,
    };
    let mut records = oracle::gen_runs(&gt, &design, &noise, &cmd.metric)?;
    if cmd.include_center {
        let SweepDesign::Star(spec) = &design else {
            bail!("--include-center only applies to star designs");
        };
        records.extend(oracle::gen_center_runs(&gt, spec, &noise, &cmd.metric)?);
    }
    let format = parse_format(&cmd.format)?;
    let mut buf = Vec::new();
    io::emit_records(&mut buf, &records, format)?;
    write_output(&cmd.out, std::str::from_utf8(&buf)?)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- fit

#[derive(Args, Debug)]
pub struct FitCmd {
    /// Run-record file (CSV or JSON lines, by extension)
    #[arg(long, value_name = "FILE")]
    records: PathBuf,
    /// Shape dimension to fit: width, depth, or mlp_dim
    #[arg(long, value_parser = crate::parse_dim)]
    dimension: ShapeDim,
    /// RNG seed for the restart schedule (mandatory; no hidden entropy)
    #[arg(long)]
    seed: u64,
    /// Number of deterministic restarts
    #[arg(long)]
    restarts: Option<u32>,
    /// Objective: squared (mean squared relative error) or absolute
    #[arg(long)]
    objective: Option<String>,
    /// Holdout record file for the extrapolation check
    #[arg(long, value_name = "FILE")]
    holdout: Option<PathBuf>,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON fit report (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn load_records(path: &PathBuf, settings: &CostSettings) -> Result<Vec<RunRecord>> {
    let format = RecordFormat::from_path(path);
    let file = std::fs::File::open(path)
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let mut records = io::parse_records(
        std::io::BufReader::new(file),
        format,
        &path.display().to_string(),
    )?;
    io::resolve_compute(&mut records, settings)?;
    Ok(records)
}

fn fit_options(
    config: &ToolConfig,
    seed: u64,
    restarts: Option<u32>,
    objective: Option<&str>,
) -> Result<fit::FitOptions> {
    let mut options = config.fit;
    options.seed = seed;
    if let Some(r) = restarts {
        options.restarts = r;
    }
    if let Some(obj) = objective {
        options.objective = match obj {
            "squared" => fit::FitObjective::SquaredRelative,
            "absolute" => fit::FitObjective::AbsoluteRelative,
            other => bail!("unknown objective {other:?} (expected squared or absolute)"),
        };
    }
    Ok(options)
}

pub fn fit(cmd: FitCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let records = load_records(&cmd.records, &settings)?;
    let options = fit_options(config, cmd.seed, cmd.restarts, cmd.objective.as_deref())?;
    let mut report = fit::fit_dimension(&records, cmd.dimension, &options)?;
    if let Some(holdout_path) = &cmd.holdout {
        let holdout = load_records(holdout_path, &settings)?;
        fit::extrapolation_check(&mut report, &holdout)?;
    }
    let code = if report.converged { EXIT_OK } else { EXIT_SOFT };
    write_output(&cmd.out, &to_pretty(&report))?;
    Ok(code)
}

// ---------------------------------------------------------------- exponents

#[derive(Args, Debug)]
pub struct ExponentsCmd {
    /// Run-record files; records are grouped by metric_name across all files
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    records: Vec<PathBuf>,
    /// Shape dimension to fit: width, depth, or mlp_dim
    #[arg(long, value_parser = crate::parse_dim)]
    dimension: ShapeDim,
    /// RNG seed for the restart schedule (mandatory; no hidden entropy)
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON stability report (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn exponents(cmd: ExponentsCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let mut sets: BTreeMap<String, Vec<RunRecord>> = BTreeMap::new();
    for path in &cmd.records {
        for record in load_records(path, &settings)? {
            sets.entry(record.metric_name.clone()).or_default().push(record);
        }
    }
    let options = fit_options(config, cmd.seed, None, None)?;
    let report = fit::exponent_stability(&sets, cmd.dimension, &options)?;
    let code = if report.rows.is_empty() {
        bail!("every metric failed to fit");
    } else if report.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_SOFT
    };
    write_output(&cmd.out, &to_pretty(&report))?;
    Ok(code)
}

// ---------------------------------------------------------------- select-seed

#[derive(Args, Debug)]
pub struct SelectSeedCmd {
    /// Grid-sweep run-record file
    #[arg(long, value_name = "FILE")]
    records: PathBuf,
    /// Compute bins: "distinct" or a log-spaced bin count
    #[arg(long, default_value = "distinct")]
    bins: String,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON selection (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn select_seed(cmd: SelectSeedCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let records = load_records(&cmd.records, &settings)?;
    let bins = match cmd.bins.as_str() {
        "distinct" => ComputeBins::Distinct,
        n => ComputeBins::LogCount(
            n.parse()
                .map_err(|_| anyhow!("bins must be \"distinct\" or an integer"))?,
        ),
    };
    let selection = sweeps::select_seed_shape(&records, bins)?;
    let code = if selection.non_conclusive {
        EXIT_SOFT
    } else {
        EXIT_OK
    };
    write_output(&cmd.out, &to_pretty(&selection))?;
    Ok(code)
}

// ---------------------------------------------------------------- optimize-shape

#[derive(Args, Debug)]
pub struct OptimizeShapeCmd {
    /// Seed shape as width,depth,mlp (e.g. 608,10,928)
    #[arg(long, value_parser = parse_shape)]
    x0: Shape,
    /// Seed compute in GFLOPs (the least compute x0 is optimal for)
    #[arg(long, value_name = "GFLOPS", value_parser = parse_scaled)]
    t0: Option<f64>,
    /// Alternative: seed training duration in examples; converted via the cost model
    #[arg(long, value_name = "EXAMPLES", value_parser = parse_count)]
    t0_examples: Option<u64>,
    /// Target compute budget in GFLOPs (e.g. 9T)
    #[arg(long, value_name = "GFLOPS", value_parser = parse_scaled)]
    target: f64,
    /// Exponent preset: classification (0.22,0.45,0.60) or multitask (0.25,0.49,0.62)
    #[arg(long)]
    preset: Option<String>,
    /// Explicit per-dimension exponents width,depth,mlp (overrides --preset)
    #[arg(long, value_name = "W,D,M", value_parser = parse_weights)]
    s: Option<[f64; 3]>,
    /// Per-dimension compute allocation weights, summing to 1
    #[arg(long, value_name = "W,D,M", value_parser = parse_weights)]
    w: Option<[f64; 3]>,
    /// Round the MLP dimension to a multiple of this
    #[arg(long, value_name = "COUNT")]
    mlp_multiple: Option<u32>,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the JSON result (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

struct ScaleBase {
    t0: f64,
    s: [f64; 3],
    w: [f64; 3],
    mlp_multiple: u32,
}

fn resolve_scale_base(
    config: &ToolConfig,
    settings: &CostSettings,
    x0: Shape,
    t0: Option<f64>,
    t0_examples: Option<u64>,
    preset: Option<&str>,
    s: Option<[f64; 3]>,
    w: Option<[f64; 3]>,
    mlp_multiple: Option<u32>,
) -> Result<ScaleBase> {
    let t0 = match (t0, t0_examples) {
        (Some(t), None) => t,
        (None, Some(examples)) => settings.training_compute(x0, examples)?,
        (Some(_), Some(_)) => bail!("give either --t0 or --t0-examples, not both"),
        (None, None) => bail!("one of --t0 or --t0-examples is required"),
    };
    let s = match (s, preset) {
        (Some(s), _) => s,
        (None, Some(name)) => scaler::exponent_preset(name)
            .ok_or_else(|| anyhow!("unknown preset {name:?}"))?,
        (None, None) => scaler::exponent_preset(&config.scaler.exponent_preset)
            .ok_or_else(|| anyhow!("config preset {:?} unknown", config.scaler.exponent_preset))?,
    };
    Ok(ScaleBase {
        t0,
        s,
        w: w.unwrap_or(config.scaler.weights),
        mlp_multiple: mlp_multiple.unwrap_or(config.scaler.mlp_multiple),
    })
}

pub fn optimize_shape(cmd: OptimizeShapeCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let base = resolve_scale_base(
        config,
        &settings,
        cmd.x0,
        cmd.t0,
        cmd.t0_examples,
        cmd.preset.as_deref(),
        cmd.s,
        cmd.w,
        cmd.mlp_multiple,
    )?;
    let plan = scaler::ScalingPlan {
        x0: cmd.x0,
        t0: base.t0,
        s: base.s,
        w: base.w,
        target_compute: cmd.target,
    };
    let model = scaler::scale_to_compute(&plan, &settings, base.mlp_multiple)?;
    let out = json!({
        "plan": plan,
        "scaling_rule": "x_k = x0_k * tau^(w_k * s_k), tau = target / t0",
        "tau": cmd.target / base.t0,
        "model": model,
    });
    write_output(&cmd.out, &to_pretty(&out))?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- frontier

#[derive(Args, Debug)]
pub struct FrontierCmd {
    /// Seed shape as width,depth,mlp
    #[arg(long, value_parser = parse_shape)]
    x0: Shape,
    /// Seed compute in GFLOPs
    #[arg(long, value_name = "GFLOPS", value_parser = parse_scaled)]
    t0: Option<f64>,
    /// Alternative: seed training duration in examples
    #[arg(long, value_name = "EXAMPLES", value_parser = parse_count)]
    t0_examples: Option<u64>,
    /// Ascending compute budgets in GFLOPs (e.g. 1e10,1e11,1e12); all >= t0
    #[arg(long, value_name = "LIST", value_delimiter = ',', value_parser = parse_scaled, required = true)]
    grid: Vec<f64>,
    /// Exponent preset: classification or multitask
    #[arg(long)]
    preset: Option<String>,
    /// Explicit per-dimension exponents width,depth,mlp (overrides --preset)
    #[arg(long, value_name = "W,D,M", value_parser = parse_weights)]
    s: Option<[f64; 3]>,
    /// Per-dimension compute allocation weights, summing to 1
    #[arg(long, value_name = "W,D,M", value_parser = parse_weights)]
    w: Option<[f64; 3]>,
    /// Round the MLP dimension to a multiple of this
    #[arg(long, value_name = "COUNT")]
    mlp_multiple: Option<u32>,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    #[command(flatten)]
    cost: CostArgs,
    /// Output path for the table (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

pub fn frontier(cmd: FrontierCmd, config: &ToolConfig) -> Result<u8> {
    let settings = cmd.cost.resolve(config.cost);
    let base = resolve_scale_base(
        config,
        &settings,
        cmd.x0,
        cmd.t0,
        cmd.t0_examples,
        cmd.preset.as_deref(),
        cmd.s,
        cmd.w,
        cmd.mlp_multiple,
    )?;
    let table = scaler::frontier_table(
        cmd.x0,
        base.t0,
        base.s,
        base.w,
        &cmd.grid,
        &settings,
        base.mlp_multiple,
    )?;
    if !table.monotone_after_rounding {
        eprintln!("warning: integer rounding broke per-dimension monotonicity");
    }
    let text = match cmd.format.as_str() {
        "json" => to_pretty(&table),
        "csv" => {
            let mut s = String::from("compute_gflops,width,depth,mlp_dim,params,examples\n");
            for row in &table.rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_f64(row.compute_gflops),
                    row.shape.width,
                    row.shape.depth,
                    row.shape.mlp_dim,
                    row.params,
                    row.examples
                ));
            }
            s
        }
        other => bail!("unknown format {other:?} (expected csv or json)"),
    };
    write_output(&cmd.out, &text)?;
    Ok(EXIT_OK)
}
