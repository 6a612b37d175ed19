//! `run`: load a scenario, apply the obstacles, write traces and timelines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use blockage_core::diffraction::LossModelKind;
use blockage_core::environment::{SimulationConfig, SimulationOutput, Simulator, DEFAULT_REMOVAL_FLOOR_DB};
use blockage_core::linkeval::{snr, LinkBudget};
use blockage_core::trace::{ChannelTrace, PairId};
use blockage_core::Diagnostics;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qd::{export_scenario, import_scenario, DEFAULT_EXPORT_FLOOR_DB};
use crate::spec::{ModelSpec, RunSpec};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "BLOCKAGE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Work items processed in order on the calling thread.
    Sequential,
    /// Rayon pool with the given number of workers, or the available
    /// parallelism.
    #[default]
    Parallel,
    Workers(usize),
}

impl Execution {
    /// From the worker environment variable; `1` means sequential.
    pub fn from_env() -> Result<Self> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => Self::from_workers(
                v.trim()
                    .parse()
                    .map_err(|_| Error::config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?,
            ),
            Err(_) => Ok(Execution::Parallel),
        }
    }

    pub fn from_workers(n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::config("worker count must be >= 1")),
            1 => Ok(Execution::Sequential),
            n => Ok(Execution::Workers(n)),
        }
    }
}

/// Run `sim` over every (pair, step) of `trace`.
pub fn simulate(sim: &Simulator, trace: &ChannelTrace, exec: Execution) -> Result<SimulationOutput> {
    let threads = match exec {
        Execution::Sequential => return Ok(sim.run(trace)),
        Execution::Parallel => 0,
        Execution::Workers(n) => n,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let items = Simulator::work_items(trace);
    let results = pool.install(|| items.par_iter().map(|&(p, s)| sim.step(trace, p, s)).collect());
    Ok(sim.assemble(trace, results))
}

/// One simulated variant of the scenario.
#[derive(Debug, Clone)]
pub struct Variant {
    /// Column suffix; empty for the configured obstacles.
    pub label: String,
    pub output: SimulationOutput,
    pub snr: BTreeMap<PairId, Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub input: ChannelTrace,
    pub baseline_snr: BTreeMap<PairId, Vec<f64>>,
    /// Configured obstacles first, then one per compared model.
    pub variants: Vec<Variant>,
    pub diagnostics: Diagnostics,
}

/// Load the scenario named by `spec`, honoring its sampling overrides.
pub fn load_trace(spec: &RunSpec) -> Result<ChannelTrace> {
    let mut trace = import_scenario(&spec.scenario_dir)?;
    if let Some(dt) = spec.sampling.time_step {
        trace.set_timestep(dt).map_err(Error::config)?;
    }
    if let Some(n) = spec.sampling.num_steps {
        trace = trace.truncated(n).map_err(Error::config)?;
    }
    Ok(trace)
}

fn snr_series(trace: &ChannelTrace, budget: &LinkBudget) -> Result<BTreeMap<PairId, Vec<f64>>> {
    trace
        .pairs()
        .iter()
        .map(|(pair, steps)| {
            let series = steps
                .iter()
                .map(|rays| snr(rays, budget).map_err(|e| Error::Numeric(format!("pair {pair:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            Ok((*pair, series))
        })
        .collect()
}

/// All computation for `spec` on an already loaded trace.
pub fn compute(spec: &RunSpec, trace: ChannelTrace, exec: Execution) -> Result<RunResult> {
    let budget = spec.budget();
    let base_cfg = SimulationConfig {
        time_step: trace.timestep(),
        removal_floor: spec.removal_floor.unwrap_or(DEFAULT_REMOVAL_FLOOR_DB),
        carrier_frequency: budget.carrier_frequency,
        ..SimulationConfig::new(trace.timestep())
    };
    let mut runs: Vec<(String, Option<LossModelKind>)> = vec![(String::new(), None)];
    runs.extend(spec.models_to_compare.iter().map(|m: &ModelSpec| (m.column(), Some(m.0))));

    let mut variants = Vec::with_capacity(runs.len());
    let mut diagnostics = Diagnostics::default();
    for (label, model) in runs {
        let cfg = base_cfg.clone().with_obstacles(spec.build_obstacles(model)?);
        let sim = Simulator::new(cfg, &trace).map_err(Error::config)?;
        let output = simulate(&sim, &trace, exec)?;
        diagnostics.merge(&output.diagnostics);
        let snr = snr_series(&output.trace, &budget)?;
        variants.push(Variant { label, output, snr });
    }
    if let Some(max) = spec.max_clamp_events {
        if diagnostics.clamp_events > max {
            return Err(Error::Numeric(format!(
                "{} loss clamp events exceed the budget of {max}",
                diagnostics.clamp_events
            )));
        }
    }
    Ok(RunResult {
        baseline_snr: snr_series(&trace, &budget)?,
        input: trace,
        variants,
        diagnostics,
    })
}

fn number(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

fn column_name(base: &str, label: &str) -> String {
    if label.is_empty() {
        base.to_string()
    } else {
        format!("{base}_{label}")
    }
}

/// `t_seconds,tx,rx,snr_db,snr_db_baseline,snr_db_<model>...`
pub fn snr_csv(r: &RunResult) -> String {
    let mut out = String::from("t_seconds,tx,rx,snr_db,snr_db_baseline");
    for v in &r.variants[1..] {
        let _ = write!(out, ",{}", column_name("snr_db", &v.label));
    }
    out.push('\n');
    for (pair, base) in &r.baseline_snr {
        for (step, b) in base.iter().enumerate() {
            let _ = write!(out, "{},{},{},{}", r.input.time_at(step), pair.0, pair.1, number(r.variants[0].snr[pair][step]));
            let _ = write!(out, ",{}", number(*b));
            for v in &r.variants[1..] {
                let _ = write!(out, ",{}", number(v.snr[pair][step]));
            }
            out.push('\n');
        }
    }
    out
}

/// `t_seconds,tx,rx,loss_db,loss_db_<model>...`: loss applied to the primary
/// ray of each step.
pub fn loss_csv(r: &RunResult) -> String {
    let mut out = String::from("t_seconds,tx,rx");
    for v in &r.variants {
        let _ = write!(out, ",{}", column_name("loss_db", &v.label));
    }
    out.push('\n');
    for pair in r.input.pair_ids() {
        for step in 0..r.input.num_steps() {
            let _ = write!(out, "{},{},{}", r.input.time_at(step), pair.0, pair.1);
            for v in &r.variants {
                let _ = write!(out, ",{}", number(v.output.primary_loss[&pair][step]));
            }
            out.push('\n');
        }
    }
    out
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// SHA-256 over the relative paths and contents of every file under `dir`.
pub fn hash_directory(dir: &Path) -> Result<String> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0u8]);
        h.update(fs::read(&f).map_err(|e| Error::io(&f, e))?);
    }
    Ok(hex(&h.finalize()))
}

pub fn manifest(spec: &RunSpec, trace_hash: &str) -> String {
    let spec_hash = hex(&Sha256::digest(spec.to_toml().as_bytes()));
    format!(
        "tool = \"blockage\"\nversion = \"{}\"\nspec_sha256 = \"{spec_hash}\"\ntrace_sha256 = \"{trace_hash}\"\n",
        env!("CARGO_PKG_VERSION")
    )
}

/// Counts printed after a run.
#[derive(Debug, Clone)]
pub struct Summary {
    pub pairs: usize,
    pub steps: usize,
    pub rays_in: usize,
    pub rays_out: usize,
    pub diagnostics: Diagnostics,
    pub output_dir: PathBuf,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d = &self.diagnostics;
        write!(
            f,
            "pairs={} steps={} rays_in={} rays_out={} rays_dropped={} clamp_events={} degenerate_segments={} diffraction_evals={} obstruction_evals={} output={}",
            self.pairs,
            self.steps,
            self.rays_in,
            self.rays_out,
            d.rays_dropped,
            d.clamp_events,
            d.degenerate_segments,
            d.diffraction_evaluations,
            d.obstruction_evaluations,
            self.output_dir.display()
        )
    }
}

/// Full `run` command: compute, then write everything under the output dir.
pub fn run(spec: &RunSpec, exec: Execution) -> Result<Summary> {
    let trace = load_trace(spec)?;
    let trace_hash = hash_directory(&spec.scenario_dir)?;
    let result = compute(spec, trace, exec)?;

    let out = &spec.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let configured = &result.variants[0].output;
    let stats = export_scenario(&configured.trace, &out.join("trace"), DEFAULT_EXPORT_FLOOR_DB)?;
    let write = |name: &str, text: String| {
        let p = out.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("snr_timeline.csv", snr_csv(&result))?;
    write("loss_timeline.csv", loss_csv(&result))?;
    write("manifest.toml", manifest(spec, &trace_hash))?;

    let mut diagnostics = configured.diagnostics;
    diagnostics.rays_dropped += stats.rays_dropped as u64;
    Ok(Summary {
        pairs: result.input.pairs().len(),
        steps: result.input.num_steps(),
        rays_in: result.input.total_rays(),
        rays_out: stats.rays_written,
        diagnostics,
        output_dir: out.clone(),
    })
}
