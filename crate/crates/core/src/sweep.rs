//! Analytic single-ray sweeps: a screen crossing or sliding along a direct
//! TX-RX path, evaluated with every loss model.

use alloc::vec;
use alloc::vec::Vec;

use crate::diffraction::{DiffractionConfig, LossModelKind};
use crate::geometry::{Point3, Vec3};
use crate::obstacles::{interact, InteractionContext, MobilityModel, Obstacle, ObstacleError, ObstacleShape};
use crate::trace::Ray;
use crate::{wavelength, Diagnostics};

/// Direct path and screen used by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGeometry {
    pub tx: Point3,
    pub rx: Point3,
    pub screen_width: f64,
    pub screen_height: f64,
    pub frequency: f64,
    pub diffraction: DiffractionConfig,
}

impl Default for SweepGeometry {
    /// 8 m link at 1.6 m height, 0.2 x 1.7 m screen, 60 GHz.
    fn default() -> Self {
        SweepGeometry {
            tx: Vec3::new(0.0, 0.0, 1.6),
            rx: Vec3::new(8.0, 0.0, 1.6),
            screen_width: 0.2,
            screen_height: 1.7,
            frequency: 60e9,
            diffraction: DiffractionConfig::default(),
        }
    }
}

/// Obstruction(10), METIS, DKED, DKED+PC, ITU SE.
pub fn default_models() -> Vec<LossModelKind> {
    vec![
        LossModelKind::Obstruction(10.0),
        LossModelKind::Metis,
        LossModelKind::Dked,
        LossModelKind::DkedPc,
        LossModelKind::ItuSe,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Sweep coordinate (lateral offset or distance from TX), m.
    pub coordinate: f64,
    /// Whether the screen blocks the direct path.
    pub blocked: bool,
    /// Loss per model, in the order the models were given, dB.
    pub losses: Vec<f64>,
}

impl SweepGeometry {
    fn direct_ray(&self) -> Result<Ray, ObstacleError> {
        Ray::new(0.0, 0.0, 0.0, vec![self.tx, self.rx]).map_err(|_| ObstacleError::Invalid("degenerate direct path"))
    }

    // Horizontal unit vector across the link.
    fn lateral(&self) -> Result<Vec3, ObstacleError> {
        let d = self.rx - self.tx;
        Vec3::new(-d.y, d.x, 0.0)
            .normalized()
            .ok_or(ObstacleError::Invalid("link must not be vertical"))
    }

    fn evaluate(&self, anchor: Point3, models: &[LossModelKind], coordinate: f64) -> Result<SweepRow, ObstacleError> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(ObstacleError::Invalid("frequency must be > 0"));
        }
        let ray = self.direct_ray()?;
        let ctx = InteractionContext {
            wavelength: wavelength(self.frequency),
            diffraction: self.diffraction,
        };
        let shape = ObstacleShape::OrthoScreen {
            width: self.screen_width,
            height: self.screen_height,
        };
        let mut diag = Diagnostics::default();
        let mut blocked = false;
        let mut losses = Vec::with_capacity(models.len());
        for &m in models {
            let o = Obstacle::new(shape, MobilityModel::Static(anchor), m)?;
            let out = interact(&o, &ray, 0.0, true, &ctx, &mut diag);
            blocked |= out.blocked;
            losses.push(out.loss);
        }
        Ok(SweepRow { coordinate, blocked, losses })
    }

    /// Screen crossing the link halfway, one row per lateral offset of its
    /// center line from the direct path.
    pub fn crossing(&self, models: &[LossModelKind], offsets: &[f64]) -> Result<Vec<SweepRow>, ObstacleError> {
        let lateral = self.lateral()?;
        let mid = self.tx.lerp(self.rx, 0.5);
        offsets
            .iter()
            .map(|&y| self.evaluate(ground(mid + lateral * y), models, y))
            .collect()
    }

    /// Screen centered on the link, one row per distance from TX.
    pub fn position(&self, models: &[LossModelKind], distances: &[f64]) -> Result<Vec<SweepRow>, ObstacleError> {
        let d = self.rx - self.tx;
        let horizontal = Vec3::new(d.x, d.y, 0.0).norm();
        let dir = Vec3::new(d.x, d.y, 0.0)
            .normalized()
            .ok_or(ObstacleError::Invalid("link must not be vertical"))?;
        distances
            .iter()
            .map(|&x| {
                if !(x > 0.0 && x < horizontal) {
                    return Err(ObstacleError::Invalid("screen position must lie strictly between the nodes"));
                }
                self.evaluate(ground(self.tx + dir * x), models, x)
            })
            .collect()
    }

    /// Crossing sweep repeated for each carrier frequency.
    pub fn frequency(
        &self,
        models: &[LossModelKind],
        frequencies: &[f64],
        offsets: &[f64],
    ) -> Result<Vec<(f64, Vec<SweepRow>)>, ObstacleError> {
        frequencies
            .iter()
            .map(|&f| Ok((f, SweepGeometry { frequency: f, ..*self }.crossing(models, offsets)?)))
            .collect()
    }
}

fn ground(p: Point3) -> Point3 {
    Vec3::new(p.x, p.y, 0.0)
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Mean loss of model `index` over the rows where the path is blocked.
pub fn mean_in_shadow(rows: &[SweepRow], index: usize) -> Option<f64> {
    let shadow: Vec<f64> = rows.iter().filter(|r| r.blocked).map(|r| r.losses[index]).collect();
    if shadow.is_empty() {
        None
    } else {
        Some(shadow.iter().sum::<f64>() / shadow.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_obstruction_is_a_step() {
        let g = SweepGeometry::default();
        let rows = g.crossing(&default_models(), &linspace(-1.0, 1.0, 201)).unwrap();
        for r in &rows {
            let expected = if r.coordinate.abs() <= 0.1 + 1e-9 { 10.0 } else { 0.0 };
            assert_eq!(r.losses[0], expected, "offset {}", r.coordinate);
        }
    }

    #[test]
    fn position_rejects_endpoints() {
        let g = SweepGeometry::default();
        assert!(g.position(&default_models(), &[0.0]).is_err());
        assert!(g.position(&default_models(), &[8.0]).is_err());
    }

    #[test]
    fn linspace_ends() {
        let v = linspace(-2.0, 2.0, 5);
        assert_eq!(v, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }
}
