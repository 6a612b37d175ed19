//! In-memory channel trace: rays per node pair and timestep.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{GeometryError, Point3, Segment, Vec3, Vector3};
use crate::math;
use crate::SPEED_OF_LIGHT;

pub type NodeId = u32;

/// Ordered (transmitter, receiver) node ids.
pub type PairId = (NodeId, NodeId);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("ray needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("ray delay must be finite and >= 0, got {0}")]
    InvalidDelay(f64),
    #[error("ray has non-finite values")]
    NonFinite,
    #[error("consecutive ray vertices {0} and {1} coincide")]
    CoincidentVertices(usize, usize),
    #[error("timestep must be > 0, got {0}")]
    InvalidTimestep(f64),
    #[error("pair {0:?} has {1} timesteps, expected {2}")]
    StepCountMismatch(PairId, usize, usize),
    #[error("node {0} has {1} positions, expected {2}")]
    PositionCountMismatch(NodeId, usize, usize),
    #[error("pair {0:?} references node {1} without positions")]
    UnknownNode(PairId, NodeId),
    #[error("trace must have at least one timestep")]
    Empty,
    #[error("requested {0} timesteps, trace has {1}")]
    StepCount(usize, usize),
}

/// One multipath component.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    /// Propagation delay, s.
    pub delay: f64,
    /// Power gain relative to the transmitter, dB.
    pub path_gain: f64,
    /// rad
    pub phase: f64,
    /// Transmitter first, receiver last, reflection points between.
    pub vertices: Vec<Point3>,
}

/// Azimuth in (-π, π] from +x toward +y, elevation in [-π/2, π/2] from the
/// horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Angles {
    pub fn of(v: Vector3) -> Angles {
        let mut azimuth = math::atan2(v.y, v.x);
        if azimuth <= -PI {
            azimuth = PI;
        }
        Angles {
            azimuth,
            elevation: math::atan2(v.z, math::hypot(v.x, v.y)),
        }
    }

    /// Unit vector pointing in this direction.
    pub fn unit_vector(&self) -> Vector3 {
        let (sa, ca) = math::sincos(self.azimuth);
        let (se, ce) = math::sincos(self.elevation);
        Vec3::new(ce * ca, ce * sa, se)
    }
}

impl Ray {
    pub fn new(delay: f64, path_gain: f64, phase: f64, vertices: Vec<Point3>) -> Result<Ray, TraceError> {
        let ray = Ray { delay, path_gain, phase, vertices };
        ray.validate()?;
        Ok(ray)
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        if self.vertices.len() < 2 {
            return Err(TraceError::TooFewVertices(self.vertices.len()));
        }
        if !(self.delay >= 0.0) || !self.delay.is_finite() {
            return Err(TraceError::InvalidDelay(self.delay));
        }
        if self.path_gain.is_nan() || !self.phase.is_finite() || self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(TraceError::NonFinite);
        }
        Ok(())
    }

    pub fn is_los(&self) -> bool {
        self.vertices.len() == 2
    }

    pub fn reflection_order(&self) -> usize {
        self.vertices.len().saturating_sub(2)
    }

    /// Geometric length of the vertex path, m.
    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Whether `length / c` matches the delay within `tolerance` seconds.
    pub fn delay_consistent(&self, tolerance: f64) -> bool {
        (self.length() / SPEED_OF_LIGHT - self.delay).abs() <= tolerance
    }

    /// Path segments in order. Fails on coincident consecutive vertices.
    pub fn segments(&self) -> impl Iterator<Item = Result<Segment, TraceError>> + '_ {
        self.vertices.windows(2).enumerate().map(|(i, w)| {
            Segment::new(w[0], w[1]).map_err(|e| match e {
                GeometryError::NonFinite => TraceError::NonFinite,
                _ => TraceError::CoincidentVertices(i, i + 1),
            })
        })
    }

    /// Same path traversed from the receiver.
    pub fn reversed(&self) -> Ray {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Ray { vertices, ..*self }
    }
}

fn direction_between(ray: &Ray, from: usize, to: usize) -> Result<Angles, TraceError> {
    if ray.vertices.len() < 2 {
        return Err(TraceError::TooFewVertices(ray.vertices.len()));
    }
    let d = ray.vertices[to] - ray.vertices[from];
    if d.norm() <= crate::geometry::EPS {
        return Err(TraceError::CoincidentVertices(from.min(to), from.max(to)));
    }
    Ok(Angles::of(d))
}

/// Direction of the first segment, seen from the transmitter.
pub fn angles_of_departure(ray: &Ray) -> Result<Angles, TraceError> {
    direction_between(ray, 0, 1)
}

/// Direction toward the last reflection point (or transmitter), seen from the
/// receiver.
pub fn angles_of_arrival(ray: &Ray) -> Result<Angles, TraceError> {
    let n = ray.vertices.len();
    if n < 2 {
        return Err(TraceError::TooFewVertices(n));
    }
    direction_between(ray, n - 1, n - 2)
}

/// Rays for every node pair and timestep, plus node trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    node_positions: BTreeMap<NodeId, Vec<Point3>>,
    pairs: BTreeMap<PairId, Vec<Vec<Ray>>>,
    timestep: f64,
    num_steps: usize,
}

impl ChannelTrace {
    pub fn new(
        node_positions: BTreeMap<NodeId, Vec<Point3>>,
        pairs: BTreeMap<PairId, Vec<Vec<Ray>>>,
        timestep: f64,
    ) -> Result<Self, TraceError> {
        if !(timestep > 0.0) || !timestep.is_finite() {
            return Err(TraceError::InvalidTimestep(timestep));
        }
        let num_steps = pairs
            .values()
            .map(Vec::len)
            .chain(node_positions.values().map(Vec::len))
            .next()
            .ok_or(TraceError::Empty)?;
        if num_steps == 0 {
            return Err(TraceError::Empty);
        }
        for (pair, steps) in &pairs {
            if steps.len() != num_steps {
                return Err(TraceError::StepCountMismatch(*pair, steps.len(), num_steps));
            }
            for node in [pair.0, pair.1] {
                if !node_positions.contains_key(&node) {
                    return Err(TraceError::UnknownNode(*pair, node));
                }
            }
            for ray in steps.iter().flatten() {
                ray.validate()?;
            }
        }
        for (node, pos) in &node_positions {
            if pos.len() != num_steps {
                return Err(TraceError::PositionCountMismatch(*node, pos.len(), num_steps));
            }
        }
        Ok(ChannelTrace { node_positions, pairs, timestep, num_steps })
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn time_at(&self, step: usize) -> f64 {
        step as f64 * self.timestep
    }

    pub fn node_positions(&self) -> &BTreeMap<NodeId, Vec<Point3>> {
        &self.node_positions
    }

    pub fn pairs(&self) -> &BTreeMap<PairId, Vec<Vec<Ray>>> {
        &self.pairs
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = PairId> + '_ {
        self.pairs.keys().copied()
    }

    pub fn rays(&self, pair: PairId, step: usize) -> Option<&[Ray]> {
        self.pairs.get(&pair).and_then(|s| s.get(step)).map(Vec::as_slice)
    }

    pub fn total_rays(&self) -> usize {
        self.pairs.values().flatten().map(Vec::len).sum()
    }

    /// Replace the rays of every pair, keeping nodes and timing.
    pub(crate) fn with_pairs(&self, pairs: BTreeMap<PairId, Vec<Vec<Ray>>>) -> ChannelTrace {
        ChannelTrace { pairs, ..self.clone_without_pairs() }
    }

    fn clone_without_pairs(&self) -> ChannelTrace {
        ChannelTrace {
            node_positions: self.node_positions.clone(),
            pairs: BTreeMap::new(),
            timestep: self.timestep,
            num_steps: self.num_steps,
        }
    }

    /// The first `steps` time steps.
    pub fn truncated(&self, steps: usize) -> Result<ChannelTrace, TraceError> {
        if steps == 0 {
            return Err(TraceError::Empty);
        }
        if steps > self.num_steps {
            return Err(TraceError::StepCount(steps, self.num_steps));
        }
        Ok(ChannelTrace {
            node_positions: self.node_positions.iter().map(|(k, v)| (*k, v[..steps].to_vec())).collect(),
            pairs: self.pairs.iter().map(|(k, v)| (*k, v[..steps].to_vec())).collect(),
            timestep: self.timestep,
            num_steps: steps,
        })
    }

    /// Override the sampling period, e.g. when the scenario files omit it.
    pub fn set_timestep(&mut self, timestep: f64) -> Result<(), TraceError> {
        if !(timestep > 0.0) || !timestep.is_finite() {
            return Err(TraceError::InvalidTimestep(timestep));
        }
        self.timestep = timestep;
        Ok(())
    }
}
