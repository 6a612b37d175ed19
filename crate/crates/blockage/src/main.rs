use std::path::PathBuf;
use std::process::ExitCode;

use blockage::error::{Error, Result};
use blockage::qd::import_scenario;
use blockage::runner::{self, Execution, WORKERS_ENV};
use blockage::spec::{ModelSpec, RunSpec};
use blockage::sweeps;
use blockage_core::geometry::Vec3;
use blockage_core::sweep::{default_models, linspace, SweepGeometry};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "blockage", version, about = "Add mobile obstacles to ray-traced channel traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the obstacles of a run spec and write traces and timelines.
    Run {
        spec: PathBuf,
        #[arg(long)]
        scenario_dir: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads; 1 runs on the calling thread.
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
    /// Analytic single-ray loss curves for every model.
    Sweep {
        kind: SweepKind,
        #[command(flatten)]
        params: SweepParams,
    },
    /// Check a run spec and its scenario without running.
    Validate { spec: PathBuf },
    /// Summarize a scenario folder.
    Inspect { scenario_dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Crossing,
    Position,
    Frequency,
}

#[derive(Args)]
struct SweepParams {
    /// Carrier frequency, Hz.
    #[arg(long, default_value_t = 60e9)]
    frequency: f64,
    /// Frequencies for the frequency sweep, Hz.
    #[arg(long, value_delimiter = ',', default_values_t = [10e9, 30e9, 60e9, 100e9])]
    frequencies: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 1.6])]
    tx: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [8.0, 0.0, 1.6])]
    rx: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    width: f64,
    #[arg(long, default_value_t = 1.7)]
    height: f64,
    /// First sweep coordinate, m: lateral offset, or distance from TX.
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long, default_value_t = 601)]
    points: usize,
    /// Models to evaluate, e.g. `obstruction,dked,itu_se`.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<ModelSpec>>,
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn vec3(v: &[f64]) -> Result<Vec3> {
    match v {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Error::config("points take three comma-separated coordinates")),
    }
}

fn sweep(kind: SweepKind, p: &SweepParams) -> Result<()> {
    if p.points < 2 {
        return Err(Error::config("--points must be >= 2"));
    }
    let g = SweepGeometry {
        tx: vec3(&p.tx)?,
        rx: vec3(&p.rx)?,
        screen_width: p.width,
        screen_height: p.height,
        frequency: p.frequency,
        ..SweepGeometry::default()
    };
    let models = p
        .models
        .clone()
        .unwrap_or_else(|| default_models().into_iter().map(ModelSpec).collect());
    let csv = match kind {
        SweepKind::Crossing => {
            let axis = linspace(p.start.unwrap_or(-1.5), p.stop.unwrap_or(1.5), p.points);
            sweeps::crossing_csv(&g, &models, &axis)?
        }
        SweepKind::Position => {
            let d = g.rx - g.tx;
            let len = Vec3::new(d.x, d.y, 0.0).norm();
            let axis = linspace(p.start.unwrap_or(0.05 * len), p.stop.unwrap_or(0.95 * len), p.points);
            sweeps::position_csv(&g, &models, &axis)?
        }
        SweepKind::Frequency => {
            let axis = linspace(p.start.unwrap_or(-1.5), p.stop.unwrap_or(1.5), p.points);
            sweeps::frequency_csv(&g, &models, &p.frequencies, &axis)?
        }
    };
    match &p.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::io(path, e)),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            spec,
            scenario_dir,
            output_dir,
            workers,
        } => {
            let mut spec = RunSpec::load(&spec)?;
            if let Some(d) = scenario_dir {
                spec.scenario_dir = d;
            }
            if let Some(d) = output_dir {
                spec.output_dir = d;
            }
            let exec = match workers {
                Some(n) => Execution::from_workers(n)?,
                None => Execution::Parallel,
            };
            let summary = runner::run(&spec, exec)?;
            println!("{summary}");
            Ok(())
        }
        Command::Sweep { kind, params } => sweep(kind, &params),
        Command::Validate { spec } => {
            let spec = RunSpec::load(&spec)?;
            let trace = runner::load_trace(&spec)?;
            let sim_cfg = blockage_core::environment::SimulationConfig::new(trace.timestep())
                .with_obstacles(spec.build_obstacles(None)?);
            blockage_core::environment::Simulator::new(sim_cfg, &trace).map_err(Error::config)?;
            println!(
                "ok: {} obstacles, {} pairs, {} steps",
                spec.obstacles.len(),
                trace.pairs().len(),
                trace.num_steps()
            );
            Ok(())
        }
        Command::Inspect { scenario_dir } => {
            let trace = import_scenario(&scenario_dir)?;
            println!(
                "nodes={} pairs={} steps={} timestep={} rays={}",
                trace.node_positions().len(),
                trace.pairs().len(),
                trace.num_steps(),
                trace.timestep(),
                trace.total_rays()
            );
            for (pair, steps) in trace.pairs() {
                let counts: Vec<usize> = steps.iter().map(Vec::len).collect();
                let min = counts.iter().min().copied().unwrap_or(0);
                let max = counts.iter().max().copied().unwrap_or(0);
                println!("Tx{}Rx{}: rays per step {min}..{max}", pair.0, pair.1);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
