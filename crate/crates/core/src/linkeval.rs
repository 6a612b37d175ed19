//! Link-level SNR: planar arrays with conjugate beamforming on the strongest
//! ray and thermal noise.

use alloc::vec::Vec;

use core::f64::consts::PI;
use num_complex::Complex64;
use thiserror::Error;

use crate::math;
use crate::trace::{angles_of_arrival, angles_of_departure, Angles, ChannelTrace, PairId, Ray, TraceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("invalid link parameter: {0}")]
    Invalid(&'static str),
    #[error("unknown pair {0:?}")]
    UnknownPair(PairId),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Uniform planar array in the y-z plane, boresight along +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArrayConfig {
    pub fn new(rows: usize, cols: usize) -> Result<Self, LinkError> {
        let a = ArrayConfig { rows, cols, spacing: 0.5 };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(LinkError::Invalid("array needs at least one row and column"));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(LinkError::Invalid("element spacing must be > 0"));
        }
        Ok(())
    }

    pub fn elements(&self) -> usize {
        self.rows * self.cols
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig { rows: 1, cols: 1, spacing: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub carrier_frequency: f64,
    pub bandwidth: f64,
    /// dBm.
    pub tx_power: f64,
    /// dB.
    pub noise_figure: f64,
    pub tx_array: ArrayConfig,
    pub rx_array: ArrayConfig,
}

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

impl Default for LinkBudget {
    /// 60 GHz, 2.16 GHz bandwidth, 20 dBm, 10 dB noise figure, 8x8 TX and 4x4 RX.
    fn default() -> Self {
        LinkBudget {
            carrier_frequency: 60e9,
            bandwidth: 2.16e9,
            tx_power: 20.0,
            noise_figure: 10.0,
            tx_array: ArrayConfig { rows: 8, cols: 8, spacing: 0.5 },
            rx_array: ArrayConfig { rows: 4, cols: 4, spacing: 0.5 },
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<(), LinkError> {
        if !(self.carrier_frequency > 0.0) || !self.carrier_frequency.is_finite() {
            return Err(LinkError::Invalid("carrier frequency must be > 0"));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(LinkError::Invalid("bandwidth must be > 0"));
        }
        if !self.tx_power.is_finite() || !self.noise_figure.is_finite() {
            return Err(LinkError::Invalid("tx power and noise figure must be finite"));
        }
        self.tx_array.validate()?;
        self.rx_array.validate()
    }

    /// Noise power in dBm.
    pub fn noise_power(&self) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * math::log10(self.bandwidth) + self.noise_figure
    }
}

/// Unit-norm steering vector, element index `row * cols + col`.
pub fn steering_vector(a: &ArrayConfig, azimuth: f64, elevation: f64) -> Vec<Complex64> {
    let (s_az, _) = math::sincos(azimuth);
    let (s_el, c_el) = math::sincos(elevation);
    let norm = 1.0 / math::sqrt(a.elements() as f64);
    let mut v = Vec::with_capacity(a.elements());
    for row in 0..a.rows {
        for col in 0..a.cols {
            let phase = 2.0 * PI * a.spacing * (col as f64 * c_el * s_az + row as f64 * s_el);
            let (s, c) = math::sincos(phase);
            v.push(Complex64::new(c * norm, s * norm));
        }
    }
    v
}

fn inner(w: &[Complex64], a: &[Complex64]) -> Complex64 {
    w.iter().zip(a).map(|(w, a)| w.conj() * a).sum()
}

/// Array gain amplitude seen by a ray arriving from `dir` with the beam
/// steered at `beam`.
fn array_factor(a: &ArrayConfig, beam: &[Complex64], dir: Angles) -> Complex64 {
    let response = steering_vector(a, dir.azimuth, dir.elevation);
    inner(beam, &response) * math::sqrt(a.elements() as f64)
}

/// SNR in dB for one set of rays; `-inf` when there are none.
pub fn snr(rays: &[Ray], budget: &LinkBudget) -> Result<f64, LinkError> {
    let Some(best) = rays.iter().reduce(|b, r| if r.path_gain > b.path_gain { r } else { b }) else {
        return Ok(f64::NEG_INFINITY);
    };
    let aod = angles_of_departure(best)?;
    let aoa = angles_of_arrival(best)?;
    let w_t = steering_vector(&budget.tx_array, aod.azimuth, aod.elevation);
    let w_r = steering_vector(&budget.rx_array, aoa.azimuth, aoa.elevation);
    let mut h = Complex64::new(0.0, 0.0);
    for ray in rays {
        let amp = math::pow10(ray.path_gain / 20.0);
        let phase = ray.phase - 2.0 * PI * budget.carrier_frequency * ray.delay;
        let (s, c) = math::sincos(phase);
        let g_t = array_factor(&budget.tx_array, &w_t, angles_of_departure(ray)?);
        let g_r = array_factor(&budget.rx_array, &w_r, angles_of_arrival(ray)?);
        h += Complex64::new(c, s) * amp * g_t * g_r;
    }
    let rx_power = budget.tx_power + 10.0 * math::log10(h.norm_sqr());
    Ok(rx_power - budget.noise_power())
}

/// `(t, snr_db)` for every step of `pair`.
pub fn snr_timeline(trace: &ChannelTrace, pair: PairId, budget: &LinkBudget) -> Result<Vec<(f64, f64)>, LinkError> {
    budget.validate()?;
    let steps = trace.pairs().get(&pair).ok_or(LinkError::UnknownPair(pair))?;
    steps
        .iter()
        .enumerate()
        .map(|(i, rays)| Ok((trace.time_at(i), snr(rays, budget)?)))
        .collect()
}
