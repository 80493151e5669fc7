//! Batch protocol: many sweeps per scenario, pairwise ICP against the
//! stationary set, and mean ± std tables.
//!
//! Pairing rules:
//! * `S-S` — every unordered pair of distinct stationary clouds, the lower
//!   index acting as source;
//! * `S-X` — the full cross product, moving-scenario clouds as sources and
//!   stationary clouds as targets (fitness is normalised by the source).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud_io::CloudFormat;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::motion::Scenario;
use crate::reconstruction::{export_cloud, reconstruct};
use crate::registration::{icp_thresholds, IcpConfig, PreparedTarget, RegistrationReport};
use crate::sweep::{record::write_csv, run_sweep, SweepRecord, TraceSample};

pub const PROTOCOL_THRESHOLDS: [f64; 5] = [0.4, 0.6, 0.8, 1.0, 1.2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub scenarios: Vec<Scenario>,
    pub sweeps_per_scenario: usize,
    pub thresholds: Vec<f64>,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Threshold whose Hausdorff distances form the summary table.
    pub reference_threshold: f64,
    /// Write every reconstructed cloud to `clouds/` (large files).
    pub write_clouds: bool,
    pub icp: IcpConfig,
}

impl ExperimentPlan {
    /// Desk-scale protocol: 5 sweeps of each scenario, the five thresholds.
    pub fn desk_scale(output_dir: impl Into<PathBuf>) -> Self {
        ExperimentPlan {
            scenarios: Scenario::ALL.to_vec(),
            sweeps_per_scenario: 5,
            thresholds: PROTOCOL_THRESHOLDS.to_vec(),
            base_seed: 0,
            output_dir: output_dir.into(),
            reference_threshold: 0.8,
            write_clouds: true,
            icp: IcpConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.scenarios.contains(&Scenario::S) {
            return Err(Error::InvalidInput("plan must include the stationary scenario S".into()));
        }
        if self.sweeps_per_scenario < 2 {
            return Err(Error::InvalidInput("sweeps_per_scenario must be >= 2".into()));
        }
        if self.thresholds.is_empty() || self.thresholds.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput("thresholds must be positive".into()));
        }
        Ok(())
    }

    /// Sweep jobs in execution order: `(name, scenario, seed)`.
    pub fn sweep_jobs(&self) -> Vec<(String, Scenario, u64)> {
        let mut jobs = Vec::new();
        for (k, &sc) in self.scenarios.iter().enumerate() {
            for i in 0..self.sweeps_per_scenario {
                let index = (k * self.sweeps_per_scenario + i) as u64;
                jobs.push((format!("{sc}{i:02}"), sc, self.base_seed + index));
            }
        }
        jobs
    }

    /// Registration pairs `(set, source name, target name)` in a fixed order.
    pub fn pairs(&self) -> Vec<(String, String, String)> {
        let n = self.sweeps_per_scenario;
        let name = |sc: Scenario, i: usize| format!("{sc}{i:02}");
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(("S-S".to_string(), name(Scenario::S, i), name(Scenario::S, j)));
            }
        }
        for &sc in self.scenarios.iter().filter(|&&s| s != Scenario::S) {
            for k in 0..n {
                for i in 0..n {
                    out.push((format!("S-{sc}"), name(sc, k), name(Scenario::S, i)));
                }
            }
        }
        out
    }
}

/// One registration result as written to `pairs/*.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub set: String,
    pub source: String,
    pub target: String,
    pub source_file: Option<PathBuf>,
    pub target_file: Option<PathBuf>,
    pub report: RegistrationReport,
    pub icp: IcpConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub name: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub duration: f64,
    pub slices: usize,
    pub points: usize,
    pub pause_events: usize,
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub set: String,
    pub threshold: f64,
    pub samples: usize,
    pub fitness: Stat,
    pub rmse: Stat,
    pub hausdorff: Stat,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub rows: Vec<AggregateRow>,
}

impl AggregateTable {
    /// Groups pair results by `(set, threshold)`, keeping first-seen order.
    pub fn from_pairs(pairs: &[PairResult]) -> Self {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for p in pairs {
            let key = (p.set.clone(), p.report.threshold);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let rows = keys
            .into_iter()
            .map(|(set, threshold)| {
                let group: Vec<&PairResult> =
                    pairs.iter().filter(|p| p.set == set && p.report.threshold == threshold).collect();
                let col = |f: fn(&RegistrationReport) -> f64| group.iter().map(|p| f(&p.report)).collect::<Vec<_>>();
                AggregateRow {
                    samples: group.len(),
                    fitness: Stat::of(&col(|r| r.fitness)),
                    rmse: Stat::of(&col(|r| r.inlier_rmse)),
                    hausdorff: Stat::of(&col(|r| r.hausdorff)),
                    set,
                    threshold,
                }
            })
            .collect();
        AggregateTable { rows }
    }

    pub fn get(&self, set: &str, threshold: f64) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.set == set && (r.threshold - threshold).abs() < 1e-12)
    }

    pub fn sets(&self) -> Vec<String> {
        let mut sets: Vec<String> = Vec::new();
        for r in &self.rows {
            if !sets.contains(&r.set) {
                sets.push(r.set.clone());
            }
        }
        sets
    }

    pub fn thresholds(&self) -> Vec<f64> {
        let mut ths: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !ths.contains(&r.threshold) {
                ths.push(r.threshold);
            }
        }
        ths.sort_by(f64::total_cmp);
        ths
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "set,threshold,samples,fitness_mean,fitness_std,rmse_mean,rmse_std,hausdorff_mean,hausdorff_std\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.set, r.threshold, r.samples, r.fitness.mean, r.fitness.std, r.rmse.mean, r.rmse.std,
                r.hausdorff.mean, r.hausdorff.std
            );
        }
        s
    }

    /// Markdown tables: Hausdorff at the reference threshold, then fitness
    /// and RMSE for every threshold.
    pub fn to_markdown(&self, reference_threshold: f64) -> String {
        let sets = self.sets();
        let mut s = String::new();
        let _ = writeln!(s, "## Hausdorff distance (threshold {reference_threshold} mm)\n");
        let _ = writeln!(s, "| Set | Samples | Hausdorff (mm) |");
        let _ = writeln!(s, "|---|---|---|");
        for set in &sets {
            if let Some(r) = self.get(set, reference_threshold) {
                let _ = writeln!(s, "| {} | {} | {:.3} ± {:.3} |", set, r.samples, r.hausdorff.mean, r.hausdorff.std);
            }
        }
        let _ = writeln!(s, "\n## ICP fitness and inlier RMSE\n");
        let mut header = String::from("| Threshold (mm) |");
        let mut rule = String::from("|---|");
        for set in &sets {
            let _ = write!(header, " {set} fitness | {set} RMSE (mm) |");
            rule.push_str("---|---|");
        }
        let _ = writeln!(s, "{header}\n{rule}");
        for th in self.thresholds() {
            let _ = write!(s, "| {th} |");
            for set in &sets {
                match self.get(set, th) {
                    Some(r) => {
                        let _ = write!(
                            s,
                            " {:.3} ± {:.3} | {:.3} ± {:.3} |",
                            r.fitness.mean, r.fitness.std, r.rmse.mean, r.rmse.std
                        );
                    }
                    None => s.push_str(" – | – |"),
                }
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub table: AggregateTable,
    pub pairs: Vec<PairResult>,
    pub sweeps: Vec<SweepSummary>,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn threshold_tag(th: f64) -> String {
    format!("{th:.2}").replace('.', "p")
}

/// Runs the whole protocol and writes `clouds/`, `pairs/`, `traces/`,
/// `sweeps.json`, `aggregate.csv` and `aggregate.md` under the output dir.
pub fn run_experiment(plan: &ExperimentPlan, cfg: &SimConfig) -> Result<ExperimentOutcome> {
    plan.validate()?;
    cfg.validate()?;
    let out = &plan.output_dir;
    let (clouds_dir, pairs_dir, traces_dir) = (out.join("clouds"), out.join("pairs"), out.join("traces"));
    for d in [&pairs_dir, &traces_dir] {
        create_dir(d)?;
    }
    if plan.write_clouds {
        create_dir(&clouds_dir)?;
    }

    let jobs = plan.sweep_jobs();
    let results: Vec<(SweepSummary, PointCloud)> = jobs
        .par_iter()
        .map(|(name, scenario, seed)| {
            let fail = |e: Error| Error::SweepFailed { seed: *seed, source: Box::new(e) };
            let record = run_sweep(*scenario, cfg, *seed).map_err(fail)?;
            let cloud = reconstruct(&record, cfg.sweep.probe_radius).map_err(fail)?;
            emit_traces_named(&record, &traces_dir, name)?;
            if plan.write_clouds {
                export_cloud(&cloud, &clouds_dir.join(format!("{name}.ply")), CloudFormat::Ply)?;
            }
            let summary = SweepSummary {
                name: name.clone(),
                scenario: *scenario,
                seed: *seed,
                duration: record.duration,
                slices: record.present_slices().count(),
                points: cloud.len(),
                pause_events: record.pause_events.len(),
            };
            Ok((summary, cloud))
        })
        .collect::<Result<_>>()?;
    let (sweeps, clouds): (Vec<SweepSummary>, Vec<PointCloud>) = results.into_iter().unzip();
    let sweeps_path = out.join("sweeps.json");
    fs::write(&sweeps_path, serde_json::to_string_pretty(&sweeps).expect("serializable"))
        .map_err(|e| Error::io(&sweeps_path, e))?;

    let cloud_of = |name: &str| -> &PointCloud {
        let k = sweeps.iter().position(|s| s.name == name).expect("pair refers to a planned sweep");
        &clouds[k]
    };
    let targets: Vec<(String, PreparedTarget<'_>)> = sweeps
        .iter()
        .zip(&clouds)
        .filter(|(s, _)| s.scenario == Scenario::S)
        .map(|(s, c)| Ok((s.name.clone(), PreparedTarget::new(c)?)))
        .collect::<Result<_>>()?;
    let target_of = |name: &str| &targets.iter().find(|(n, _)| n == name).expect("targets are stationary").1;

    let file_of = |name: &str| plan.write_clouds.then(|| clouds_dir.join(format!("{name}.ply")));
    let mut pairs = Vec::new();
    for (set, src, tgt) in plan.pairs() {
        let source = cloud_of(&src);
        let target = target_of(&tgt);
        let reports: Vec<RegistrationReport> = icp_thresholds(source, target, &plan.thresholds, &plan.icp)?;
        for report in reports {
            let pair = PairResult {
                set: set.clone(),
                source: src.clone(),
                target: tgt.clone(),
                source_file: file_of(&src),
                target_file: file_of(&tgt),
                icp: plan.icp.clone(),
                report,
            };
            let path = pairs_dir.join(format!("{}_{}_{}_th{}.json", set, src, tgt, threshold_tag(pair.report.threshold)));
            fs::write(&path, serde_json::to_string_pretty(&pair).expect("serializable"))
                .map_err(|e| Error::io(&path, e))?;
            pairs.push(pair);
        }
    }

    let table = AggregateTable::from_pairs(&pairs);
    let csv_path = out.join("aggregate.csv");
    fs::write(&csv_path, table.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
    let md_path = out.join("aggregate.md");
    fs::write(&md_path, table.to_markdown(plan.reference_threshold)).map_err(|e| Error::io(&md_path, e))?;
    Ok(ExperimentOutcome { table, pairs, sweeps })
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    phi: f64,
    probe_x: f64,
    probe_y: f64,
    probe_z: f64,
    phantom_x: f64,
    phantom_y: f64,
    phantom_z: f64,
    fx: f64,
    fy: f64,
    fz: f64,
}

/// Writes `t, phi, probe_xyz, phantom_xyz, fx, fy, fz`, one row per step.
pub fn write_trace_csv(trace: &[TraceSample], path: &Path) -> Result<()> {
    write_csv(
        path,
        trace.iter().map(|s| TraceRow {
            t: s.t,
            phi: s.phi,
            probe_x: s.probe.x,
            probe_y: s.probe.y,
            probe_z: s.probe.z,
            phantom_x: s.phantom.x,
            phantom_y: s.phantom.y,
            phantom_z: s.phantom.z,
            fx: s.force.x,
            fy: s.force.y,
            fz: s.force.z,
        }),
    )
}

/// Writes the plot-ready trace of a sweep to `out_dir/<scenario>_seed<seed>.csv`.
pub fn emit_traces(record: &SweepRecord, out_dir: &Path) -> Result<PathBuf> {
    emit_traces_named(record, out_dir, &format!("{}_seed{}", record.scenario, record.seed))
}

fn emit_traces_named(record: &SweepRecord, out_dir: &Path, stem: &str) -> Result<PathBuf> {
    create_dir(out_dir)?;
    let path = out_dir.join(format!("{stem}.csv"));
    write_trace_csv(&record.trace, &path)?;
    Ok(path)
}
