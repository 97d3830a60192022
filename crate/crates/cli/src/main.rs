use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use mudforce::analysis::{comparison_row, relative_rmse, write_comparison_csv, ComparisonRow, GaitMetrics};
use mudforce::calibration::{
    builtin_lookup, calibrate, synthetic_record, Direction, IntrusionRecord, SyntheticProtocol,
    TABLE_CHARACTERISTIC_LENGTH,
};
use mudforce::config::{ParamsFile, Scenario, ScenarioConfig, ShapeKind};
use mudforce::trajectory::{ForceModel, SimulationOptions};
use mudforce::{simulate, FootShape, ForceTrace};

#[derive(Parser)]
#[command(name = "mudforce", version, about = "Foot–mud resistive force simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its force trace and metrics.
    Simulate(SimulateArgs),
    /// Fit constitutive constants to plate-intrusion records.
    Calibrate(CalibrateArgs),
    /// Run several scenarios and tabulate their metrics side by side.
    Compare(CompareArgs),
    /// Run one scenario over a list of values of one input.
    Sweep(SweepArgs),
    /// Print built-in parameters, or write a synthetic intrusion record.
    Params(ParamsArgs),
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time step in seconds (overrides `[solver] dt_s`).
    #[arg(long)]
    dt: Option<f64>,
    /// Facet count for mesh integration.
    #[arg(long = "mesh-res")]
    mesh_res: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also integrate over a tessellated foot and report the difference.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Record files with header `t,disp,rate,stress,phase`.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "vertical")]
    direction: DirectionArg,
    /// Plate characteristic length of the records, m.
    #[arg(long = "l-c", default_value_t = TABLE_CHARACTERISTIC_LENGTH)]
    l_c: f64,
    /// Built-in row supplying the constants the records cannot identify.
    #[arg(long = "water-content", conflicts_with = "params")]
    water_content: Option<f64>,
    /// Parameter file supplying the constants the records cannot identify.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with an error if any fit raised a warning.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more scenario files.
    #[arg(long = "config", required = true, num_args = 1..)]
    configs: Vec<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    axis: SweepAxis,
    /// Comma-separated values in SI units.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Vec<f64>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long = "water-content", default_value_t = 0.25)]
    water_content: f64,
    /// Write the parameter file here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a synthetic plate-intrusion record generated from the parameters.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "vertical")]
    direction: DirectionArg,
    /// Plate speed of the synthetic record, m/s.
    #[arg(long, default_value_t = 0.02)]
    speed: f64,
    /// Relative Gaussian noise on the synthetic stress.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop the retraction branch from the synthetic record.
    #[arg(long)]
    no_retraction: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Vertical,
    Horizontal,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Vertical => Direction::Vertical,
            DirectionArg::Horizontal => Direction::Horizontal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum SweepAxis {
    Speed,
    #[value(name = "water_content", alias = "water-content")]
    WaterContent,
    Depth,
    Radius,
    Width,
    Length,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Params(a) => cmd_params(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: &Path) -> Result<(ScenarioConfig, Option<PathBuf>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = ScenarioConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

fn build(cfg: &ScenarioConfig, base: Option<&Path>, flags: &RunFlags) -> Result<Scenario> {
    let mut cfg = cfg.clone();
    if let Some(n) = flags.mesh_res {
        cfg.solver.mesh_resolution = Some(n);
    }
    Ok(cfg.build(base, flags.dt)?)
}

fn out_dir(cfg: &ScenarioConfig, base: Option<&Path>, flags: &RunFlags) -> Result<PathBuf> {
    let dir = match (&flags.out, &cfg.output.dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_relative() => base.map(|b| b.join(d)).unwrap_or_else(|| d.clone()),
        (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("out"),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn run(s: &Scenario) -> Result<ForceTrace> {
    Ok(simulate(&s.shape, &s.profile, &s.params_v, &s.params_h, &s.options)?)
}

fn write_trace(trace: &ForceTrace, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    trace.write_csv(BufWriter::new(f))?;
    Ok(())
}

#[derive(Serialize)]
struct Summary {
    scenario: String,
    shape: String,
    dt_s: f64,
    samples: usize,
    peak_normalized_stress_pa: f64,
    peak_sigma_b_pa: f64,
    peak_sigma_z_pa: f64,
    metrics: GaitMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleReport>,
}

#[derive(Serialize)]
struct OracleReport {
    resolution: usize,
    /// Relative RMSE per axis; absent where both traces are identically zero.
    relative_rmse_x: Option<f64>,
    relative_rmse_y: Option<f64>,
    relative_rmse_z: Option<f64>,
}

fn summary(s: &Scenario, trace: &ForceTrace, row: ComparisonRow, oracle: Option<OracleReport>) -> Summary {
    Summary {
        scenario: s.name.clone(),
        shape: s.shape.name().to_string(),
        dt_s: trace.dt,
        samples: trace.len(),
        peak_normalized_stress_pa: row.peak_normalized_stress,
        peak_sigma_b_pa: row.peak_sigma_b,
        peak_sigma_z_pa: row.peak_sigma_z,
        metrics: row.metrics,
        oracle,
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let (cfg, base) = load_config(&a.config)?;
    let scenario = build(&cfg, base.as_deref(), &a.run)?;
    let dir = out_dir(&cfg, base.as_deref(), &a.run)?;
    let trace = run(&scenario)?;
    let trace_name = cfg.output.trace_file.clone().unwrap_or_else(|| "trace.csv".into());
    write_trace(&trace, &dir.join(&trace_name))?;

    let oracle = if a.oracle || scenario.oracle {
        Some(run_oracle(&scenario, &trace, &dir)?)
    } else {
        None
    };
    let row = comparison_row(&scenario.name, &scenario.shape, &trace);
    for w in &row.metrics.warnings {
        eprintln!("warning: {w}");
    }
    let text = toml::to_string(&summary(&scenario, &trace, row, oracle))?;
    let summary_name = cfg.output.summary_file.clone().unwrap_or_else(|| "summary.toml".into());
    fs::write(dir.join(summary_name), &text)?;
    print!("{text}");
    Ok(())
}

fn run_oracle(s: &Scenario, trace: &ForceTrace, dir: &Path) -> Result<OracleReport> {
    if matches!(s.shape, FootShape::VariableAreaFlat(_) | FootShape::Mesh(_)) {
        bail!("the oracle needs a flat, semi-cylindrical or semi-spherical foot");
    }
    if !matches!(s.options.force_model, ForceModel::ClosedForm) {
        bail!("the oracle compares against the closed forms; disable `[solver] mesh`");
    }
    let options = SimulationOptions {
        force_model: ForceModel::Mesh {
            resolution: s.mesh_resolution,
        },
        ..s.options
    };
    let mesh = simulate(&s.shape, &s.profile, &s.params_v, &s.params_h, &options)?;
    write_trace(&mesh, &dir.join("trace_oracle.csv"))?;
    let e = relative_rmse(trace, &mesh)?;
    Ok(OracleReport {
        resolution: s.mesh_resolution,
        relative_rmse_x: e[0],
        relative_rmse_y: e[1],
        relative_rmse_z: e[2],
    })
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<()> {
    let direction: Direction = a.direction.into();
    let mut records = Vec::new();
    for p in &a.records {
        let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        records.push(
            IntrusionRecord::read_csv(f, direction, a.l_c).with_context(|| format!("in {}", p.display()))?,
        );
    }
    let mut file = match &a.params {
        Some(p) => ParamsFile::load(p).with_context(|| format!("in {}", p.display()))?,
        None => ParamsFile::builtin(a.water_content.unwrap_or(0.25))?,
    };
    let base = file.get(direction).with_characteristic_length(a.l_c, mudforce::rheology::DEFAULT_REFERENCE_SPEED);
    let cal = calibrate(&records, &base)?;
    file.set(direction, cal.params);

    let dir = a.out.unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("params.toml"), file.to_toml()?)?;
    let report = toml::to_string(&cal.report)?;
    fs::write(dir.join("fit_report.toml"), &report)?;
    print!("{report}");
    for w in &cal.report.warnings {
        eprintln!("warning: {w}");
    }
    if a.strict && !cal.report.warnings.is_empty() {
        bail!("{} fit warning(s) with --strict", cal.report.warnings.len());
    }
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MUDFORCE_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("MUDFORCE_THREADS must be a positive integer, got `{v}`"))?;
        b = b.num_threads(n.max(1));
    }
    Ok(b.build()?)
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    if a.configs.len() < 2 {
        bail!("compare needs at least two scenarios");
    }
    let scenarios = a
        .configs
        .iter()
        .map(|p| {
            let (cfg, base) = load_config(p)?;
            build(&cfg, base.as_deref(), &a.run)
        })
        .collect::<Result<Vec<_>>>()?;
    let dts: Vec<f64> = scenarios.iter().map(|s| s.profile.dt).collect();
    if dts.iter().any(|d| (d - dts[0]).abs() > 1e-12 * dts[0]) {
        eprintln!("note: scenarios run on different time grids; metrics are integrated per scenario");
    }
    let pool = thread_pool()?;
    let rows = pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| Ok(comparison_row(&s.name, &s.shape, &run(s)?)))
            .collect::<Result<Vec<_>>>()
    })?;
    let dir = a.run.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    write_comparison_csv(&rows, BufWriter::new(File::create(dir.join("compare.csv"))?))?;
    print_table(&rows);
    Ok(())
}

fn print_table(rows: &[ComparisonRow]) {
    println!(
        "{:<24} {:>14} {:>14} {:>12} {:>12} {:>12}",
        "scenario", "peak_norm_kpa", "peak_sig_b_kpa", "suction_n", "impulse_z", "energy_j"
    );
    for r in rows {
        println!(
            "{:<24} {:>14.3} {:>14.3} {:>12.3} {:>12.4} {:>12.4}",
            r.label,
            r.peak_normalized_stress / 1e3,
            r.peak_sigma_b / 1e3,
            r.metrics.max_suction,
            r.metrics.impulse[2],
            r.metrics.hysteresis_energy
        );
    }
}

fn apply_axis(cfg: &mut ScenarioConfig, axis: SweepAxis, v: f64) -> Result<()> {
    match axis {
        SweepAxis::Speed => cfg.trajectory.speed_m_s = v,
        SweepAxis::Depth => cfg.trajectory.depth_m = v,
        SweepAxis::WaterContent => {
            if cfg.mud.params_path.is_some() {
                bail!("a water-content sweep needs built-in parameters, not `mud.params_path`");
            }
            cfg.mud.water_content = Some(v);
        }
        SweepAxis::Radius => {
            if !matches!(cfg.foot.shape, ShapeKind::SemiCylinder | ShapeKind::SemiSphere) {
                bail!("radius sweep needs a semi-cylinder or semi-sphere");
            }
            cfg.foot.radius_m = Some(v);
        }
        SweepAxis::Width => cfg.foot.width_m = Some(v),
        SweepAxis::Length => cfg.foot.length_m = Some(v),
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    if a.values.is_empty() {
        bail!("sweep needs at least one value");
    }
    let (cfg, base) = load_config(&a.config)?;
    let dir = out_dir(&cfg, base.as_deref(), &a.run)?;
    let scenarios = a
        .values
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            apply_axis(&mut c, a.axis, v)?;
            build(&c, base.as_deref(), &a.run).with_context(|| format!("at value {v}"))
        })
        .collect::<Result<Vec<_>>>()?;

    let pool = thread_pool()?;
    let traces = pool.install(|| scenarios.par_iter().map(run).collect::<Result<Vec<_>>>())?;

    let mut rows = Vec::with_capacity(traces.len());
    for (i, ((s, t), v)) in scenarios.iter().zip(&traces).zip(&a.values).enumerate() {
        write_trace(t, &dir.join(format!("trace_{i:03}.csv")))?;
        let mut row = comparison_row(&s.name, &s.shape, t);
        row.label = format!("{v}");
        rows.push(row);
    }
    write_comparison_csv(&rows, BufWriter::new(File::create(dir.join("sweep.csv"))?))?;
    print_table(&rows);
    Ok(())
}

fn cmd_params(a: ParamsArgs) -> Result<()> {
    let direction: Direction = a.direction.into();
    let lookup = builtin_lookup(a.water_content, direction)?;
    if lookup.interpolated {
        eprintln!(
            "note: water content {} lies between table rows; values are interpolated",
            a.water_content
        );
    }
    let file = ParamsFile::builtin(a.water_content)?;
    if let Some(path) = &a.record {
        if !(a.noise >= 0.0) {
            bail!("--noise must be >= 0");
        }
        let proto = SyntheticProtocol {
            speed: a.speed,
            ..SyntheticProtocol::default()
        };
        let noise = (a.noise > 0.0).then_some((a.noise, a.seed));
        let mut rec = synthetic_record(file.get(direction), direction, &proto, noise);
        if a.no_retraction {
            rec.samples.retain(|s| s.phase != mudforce::Phase::Retract);
        }
        rec.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let text = file.to_toml()?;
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None if a.record.is_none() => print!("{text}"),
        None => {}
    }
    Ok(())
}
