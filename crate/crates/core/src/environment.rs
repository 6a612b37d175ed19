//! Applies a set of obstacles to every ray of a trace, step by step.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::diffraction::DiffractionConfig;
use crate::math;
use crate::obstacles::{interact, InteractionContext, Obstacle};
use crate::trace::{ChannelTrace, PairId, Ray};
use crate::{wavelength, Diagnostics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    #[error("time step {config} s is not a positive integer multiple of the trace step {trace} s")]
    TimeBase { config: f64, trace: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub obstacles: Vec<Obstacle>,
    /// Obstacle pose update period, a multiple of the trace step.
    pub time_step: f64,
    /// Rays whose gain falls below this (dB) are dropped.
    pub removal_floor: f64,
    /// Reserved for stochastic mobility.
    pub rng_seed: u64,
    pub carrier_frequency: f64,
    pub diffraction: DiffractionConfig,
}

pub const DEFAULT_REMOVAL_FLOOR_DB: f64 = -500.0;
pub const DEFAULT_CARRIER_FREQUENCY: f64 = 60e9;

impl SimulationConfig {
    /// Config with no obstacles, updating poses at every trace step.
    pub fn new(time_step: f64) -> Self {
        SimulationConfig {
            obstacles: Vec::new(),
            time_step,
            removal_floor: DEFAULT_REMOVAL_FLOOR_DB,
            rng_seed: 0,
            carrier_frequency: DEFAULT_CARRIER_FREQUENCY,
            diffraction: DiffractionConfig::default(),
        }
    }

    pub fn with_obstacles(mut self, obstacles: Vec<Obstacle>) -> Self {
        self.obstacles = obstacles;
        self
    }
}

/// Index of the ray treated as primary: the LOS ray if any, else the
/// strongest (first on ties).
pub fn primary_ray_index(rays: &[Ray]) -> Option<usize> {
    if let Some(i) = rays.iter().position(Ray::is_los) {
        return Some(i);
    }
    let mut best: Option<usize> = None;
    for (i, r) in rays.iter().enumerate() {
        if best.is_none_or(|b| r.path_gain > rays[b].path_gain) {
            best = Some(i);
        }
    }
    best
}

/// Output of one (pair, step) work item.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepResult {
    pub rays: Vec<Ray>,
    /// Total loss applied to the primary ray, dB; 0 when the step has no rays.
    pub primary_loss: f64,
    pub diagnostics: Diagnostics,
}

/// Validated simulation, ready to process work items in any order.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimulationConfig,
    ctx: InteractionContext,
    hold: usize,
}

/// Modified trace plus the per-step primary-ray losses.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub trace: ChannelTrace,
    pub primary_loss: BTreeMap<PairId, Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl Simulator {
    pub fn new(cfg: SimulationConfig, trace: &ChannelTrace) -> Result<Self, EnvironmentError> {
        if !(cfg.time_step > 0.0) || !cfg.time_step.is_finite() {
            return Err(EnvironmentError::InvalidConfig("time_step must be > 0"));
        }
        if !cfg.removal_floor.is_finite() {
            return Err(EnvironmentError::InvalidConfig("removal_floor must be finite"));
        }
        if !(cfg.carrier_frequency > 0.0) || !cfg.carrier_frequency.is_finite() {
            return Err(EnvironmentError::InvalidConfig("carrier_frequency must be > 0"));
        }
        let ratio = cfg.time_step / trace.timestep();
        let hold = math::round(ratio);
        if hold < 1.0 || (ratio - hold).abs() > 1e-6 * hold {
            return Err(EnvironmentError::TimeBase {
                config: cfg.time_step,
                trace: trace.timestep(),
            });
        }
        let ctx = InteractionContext {
            wavelength: wavelength(cfg.carrier_frequency),
            diffraction: cfg.diffraction,
        };
        Ok(Simulator { cfg, ctx, hold: hold as usize })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    /// Time at which obstacle poses are sampled for trace step `step`.
    pub fn pose_time(&self, trace: &ChannelTrace, step: usize) -> f64 {
        trace.time_at(step - step % self.hold)
    }

    /// Process one (pair, step) work item. Unknown pairs or steps yield an
    /// empty result.
    pub fn step(&self, trace: &ChannelTrace, pair: PairId, step: usize) -> StepResult {
        let Some(input) = trace.rays(pair, step) else {
            return StepResult::default();
        };
        let t = self.pose_time(trace, step);
        let primary = primary_ray_index(input);
        let mut diag = Diagnostics::default();
        let mut primary_loss = 0.0;
        let mut rays = Vec::with_capacity(input.len());
        for (i, ray) in input.iter().enumerate() {
            let is_primary = primary == Some(i);
            let mut gain = ray.path_gain;
            let mut total = 0.0;
            for o in &self.cfg.obstacles {
                let loss = interact(o, ray, t, is_primary, &self.ctx, &mut diag).loss;
                // Sequential subtraction keeps split runs bit-identical.
                gain -= loss;
                total += loss;
            }
            if is_primary {
                primary_loss = total;
            }
            if gain < self.cfg.removal_floor {
                diag.rays_dropped += 1;
                continue;
            }
            rays.push(Ray {
                path_gain: gain,
                ..ray.clone()
            });
        }
        StepResult {
            rays,
            primary_loss,
            diagnostics: diag,
        }
    }

    /// All work items of `trace`, in pair-major order.
    pub fn work_items(trace: &ChannelTrace) -> Vec<(PairId, usize)> {
        let n = trace.num_steps();
        trace.pair_ids().flat_map(|p| (0..n).map(move |s| (p, s))).collect()
    }

    /// Assemble results given in [`Simulator::work_items`] order.
    pub fn assemble(&self, trace: &ChannelTrace, results: Vec<StepResult>) -> SimulationOutput {
        let n = trace.num_steps();
        let mut diagnostics = Diagnostics::default();
        let mut pairs = BTreeMap::new();
        let mut primary_loss = BTreeMap::new();
        let mut it = results.into_iter();
        for pair in trace.pair_ids() {
            let mut steps = Vec::with_capacity(n);
            let mut losses = Vec::with_capacity(n);
            for _ in 0..n {
                let r = it.next().unwrap_or_default();
                diagnostics.merge(&r.diagnostics);
                steps.push(r.rays);
                losses.push(r.primary_loss);
            }
            pairs.insert(pair, steps);
            primary_loss.insert(pair, losses);
        }
        SimulationOutput {
            trace: trace.with_pairs(pairs),
            primary_loss,
            diagnostics,
        }
    }

    /// Single-threaded run over every work item.
    pub fn run(&self, trace: &ChannelTrace) -> SimulationOutput {
        let results = Self::work_items(trace)
            .into_iter()
            .map(|(p, s)| self.step(trace, p, s))
            .collect();
        self.assemble(trace, results)
    }
}

/// Apply `cfg` to `trace`, returning the modified trace.
pub fn run(trace: &ChannelTrace, cfg: SimulationConfig) -> Result<ChannelTrace, EnvironmentError> {
    Ok(Simulator::new(cfg, trace)?.run(trace).trace)
}
