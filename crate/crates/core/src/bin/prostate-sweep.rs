use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use prostate_sweep::cloud_io::{read_cloud, CloudFormat};
use prostate_sweep::config::SimConfig;
use prostate_sweep::experiment::{emit_traces, run_experiment, write_trace_csv, ExperimentPlan};
use prostate_sweep::motion::{write_disturbance_csv, Scenario};
use prostate_sweep::reconstruction::{export_cloud, reconstruct};
use prostate_sweep::registration::{register, IcpConfig};
use prostate_sweep::sweep::{read_sweep, run_sweep, simulate_compensation, write_sweep, TrackingSummary};

/// Robotic TRUS sweep simulator: sweeps, reconstruction, registration and
/// the batch validation protocol.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed of a single sweep, or the base seed of an experiment.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file or directory (per subcommand).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sweep and write its record directory.
    Sweep {
        #[arg(long, default_value = "S")]
        scenario: Scenario,
    },
    /// Turn a sweep directory into a point cloud (.ply or .xyz by extension).
    Reconstruct { sweep_dir: PathBuf },
    /// ICP-register a source cloud onto a target cloud; prints a JSON report.
    Register(RegisterArgs),
    /// Full protocol: sweeps, pairwise registration, aggregate tables.
    Experiment(ExperimentArgs),
    /// Plot-ready traces: compensation-only run (or a full sweep) plus the
    /// commanded disturbance.
    Traces {
        #[arg(long, default_value = "C")]
        scenario: Scenario,
        /// Simulated seconds of the compensation-only run.
        #[arg(long, default_value_t = 8.0 * std::f64::consts::PI)]
        duration: f64,
        /// Record a complete sweep instead of compensation only.
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Args)]
struct RegisterArgs {
    source: PathBuf,
    target: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    threshold: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Also report the symmetric Hausdorff distance.
    #[arg(long)]
    symmetric: bool,
    /// Voxel-downsample both clouds first (mm).
    #[arg(long)]
    voxel: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    sweeps: Option<usize>,
    /// Comma-separated subset of S,H,V,C.
    #[arg(long, value_delimiter = ',')]
    scenarios: Option<Vec<Scenario>>,
    /// Comma-separated ICP thresholds (mm).
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Skip writing clouds/*.ply.
    #[arg(long)]
    no_clouds: bool,
}

/// Optional `[experiment]` table of the config file.
#[derive(Default, Deserialize)]
#[serde(default)]
struct ConfigFile {
    experiment: PlanSection,
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PlanSection {
    scenarios: Option<Vec<Scenario>>,
    sweeps_per_scenario: Option<usize>,
    thresholds: Option<Vec<f64>>,
    reference_threshold: Option<f64>,
    write_clouds: Option<bool>,
    icp: Option<IcpConfig>,
}

fn load_config(path: Option<&Path>) -> Result<(SimConfig, PlanSection)> {
    let Some(path) = path else {
        return Ok((SimConfig::default(), PlanSection::default()));
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sim = SimConfig::from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    sim.validate().with_context(|| format!("validating {}", path.display()))?;
    let file: ConfigFile = toml::from_str(&text).with_context(|| format!("parsing [experiment] in {}", path.display()))?;
    Ok((sim, file.experiment))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (cfg, section) = load_config(cli.config.as_deref())?;
    let out = cli.out.clone();
    match cli.command {
        Command::Sweep { scenario } => {
            let dir = out.unwrap_or_else(|| PathBuf::from(format!("sweep_{scenario}_seed{}", cli.seed)));
            let record = run_sweep(scenario, &cfg, cli.seed)?;
            write_sweep(&record, &dir)?;
            let (lo, hi) = record.phi_range().unwrap_or((0.0, 0.0));
            println!(
                "{scenario} seed {}: {:.2} s, {} slices with prostate, phi [{lo:.3}, {hi:.3}] rad, {} pauses -> {}",
                cli.seed,
                record.duration,
                record.present_slices().count(),
                record.pause_events.len(),
                dir.display()
            );
        }
        Command::Reconstruct { sweep_dir } => {
            let path = out.unwrap_or_else(|| sweep_dir.join("cloud.ply"));
            let format = CloudFormat::from_path(&path)
                .with_context(|| format!("{}: use a .ply or .xyz extension", path.display()))?;
            let record = read_sweep(&sweep_dir)?;
            let t0 = Instant::now();
            let cloud = reconstruct(&record, record.config.sweep.probe_radius)?;
            let elapsed = t0.elapsed();
            export_cloud(&cloud, &path, format)?;
            println!("{} points in {:.2?} -> {}", cloud.len(), elapsed, path.display());
        }
        Command::Register(args) => {
            let source = read_cloud(&args.source)?;
            let target = read_cloud(&args.target)?;
            let icp = IcpConfig {
                max_iter: args.max_iter,
                eps: args.eps,
                symmetric_hausdorff: args.symmetric,
                voxel_size: args.voxel,
            };
            let report = register(&source, &target, args.threshold, &icp)?;
            let json = serde_json::to_string_pretty(&report)?;
            match out {
                Some(path) => fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
        Command::Experiment(args) => {
            let mut plan = ExperimentPlan::desk_scale(out.unwrap_or_else(|| PathBuf::from("experiment_out")));
            plan.base_seed = cli.seed;
            if let Some(v) = section.scenarios {
                plan.scenarios = v;
            }
            if let Some(v) = section.sweeps_per_scenario {
                plan.sweeps_per_scenario = v;
            }
            if let Some(v) = section.thresholds {
                plan.thresholds = v;
            }
            if let Some(v) = section.reference_threshold {
                plan.reference_threshold = v;
            }
            if let Some(v) = section.write_clouds {
                plan.write_clouds = v;
            }
            if let Some(v) = section.icp {
                plan.icp = v;
            }
            if let Some(v) = args.sweeps {
                plan.sweeps_per_scenario = v;
            }
            if let Some(v) = args.scenarios {
                plan.scenarios = v;
            }
            if let Some(v) = args.thresholds {
                plan.thresholds = v;
            }
            if args.no_clouds {
                plan.write_clouds = false;
            }
            let t0 = Instant::now();
            let outcome = run_experiment(&plan, &cfg)?;
            println!("{}", outcome.table.to_markdown(plan.reference_threshold));
            println!(
                "{} sweeps, {} registrations in {:.1?} -> {}",
                outcome.sweeps.len(),
                outcome.pairs.len(),
                t0.elapsed(),
                plan.output_dir.display()
            );
        }
        Command::Traces { scenario, duration, sweep } => {
            let dir = out.unwrap_or_else(|| PathBuf::from("traces"));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            if !(duration > 0.0 && duration.is_finite()) {
                bail!("--duration must be positive");
            }
            let (trace_path, span) = if sweep {
                let record = run_sweep(scenario, &cfg, cli.seed)?;
                (emit_traces(&record, &dir)?, record.duration)
            } else {
                let trace = simulate_compensation(scenario, &cfg, cli.seed, duration)?;
                let summary = TrackingSummary::from_trace(&trace, scenario, &cfg);
                println!(
                    "{scenario}: max tracking gap {:.3} mm, delay {:.2} s, max force deviation {:.3} N",
                    summary.max_gap, summary.delay, summary.max_force_deviation
                );
                let path = dir.join(format!("{scenario}_compensation_seed{}.csv", cli.seed));
                write_trace_csv(&trace, &path)?;
                (path, duration)
            };
            let motion_path = dir.join(format!("{scenario}_disturbance.csv"));
            let motion = prostate_sweep::motion::MotionConfig { duration: span, ..cfg.motion.clone() };
            write_disturbance_csv(&motion_path, scenario, &motion, cfg.sweep.dt)?;
            println!("{} and {}", trace_path.display(), motion_path.display());
        }
    }
    Ok(())
}
