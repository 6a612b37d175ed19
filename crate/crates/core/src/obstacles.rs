//! Obstacles: a shape, a trajectory and the loss model applied to the rays
//! they interact with.

use alloc::vec::Vec;

use log::warn;
use thiserror::Error;

use crate::diffraction::{
    self, obstruction_loss, DiffractionConfig, DiffractionError, EdgeGeometry, LossModelKind,
    ScreenDiffractionGeometry,
};
use crate::geometry::{
    self, distance_line_segment, distance_point_line, distance_segment_rect, distance_segment_sphere,
    orthogonalize_screen, plane_crossing, segment_rect_intersection, segment_sphere_intersection, GeometryError,
    Point3, RectScreen, Segment, Sphere, Vec3, Vector3,
};
use crate::math;
use crate::trace::Ray;
use crate::Diagnostics;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObstacleError {
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("diffraction: {0}")]
    Diffraction(#[from] DiffractionError),
    #[error("invalid obstacle: {0}")]
    Invalid(&'static str),
}

/// Obstacle shape. Screens are anchored at the midpoint of their bottom edge,
/// spheres at their center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObstacleShape {
    /// Screen with a fixed orientation (see [`RectScreen`] for the angles).
    Screen {
        width: f64,
        height: f64,
        azimuth: f64,
        elevation: f64,
    },
    /// Vertical screen that turns to face every ray segment it is tested
    /// against.
    OrthoScreen { width: f64, height: f64 },
    Sphere { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MobilityModel {
    Static(Point3),
    /// `start + t * velocity`.
    Linear { start: Point3, velocity: Vector3 },
    /// Piecewise linear through `(time, position)`; clamps outside the span.
    Waypoints(Vec<(f64, Point3)>),
}

impl MobilityModel {
    pub fn validate(&self) -> Result<(), ObstacleError> {
        match self {
            MobilityModel::Static(p) if !p.is_finite() => Err(ObstacleError::Invalid("non-finite position")),
            MobilityModel::Linear { start, velocity } if !start.is_finite() || !velocity.is_finite() => {
                Err(ObstacleError::Invalid("non-finite start or velocity"))
            }
            MobilityModel::Waypoints(w) => {
                if w.is_empty() {
                    return Err(ObstacleError::Invalid("waypoint list is empty"));
                }
                if w.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
                    return Err(ObstacleError::Invalid("non-finite waypoint"));
                }
                if w.windows(2).any(|p| p[1].0 <= p[0].0) {
                    return Err(ObstacleError::Invalid("waypoint times must be strictly increasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn position_at(&self, t: f64) -> Point3 {
        match self {
            MobilityModel::Static(p) => *p,
            MobilityModel::Linear { start, velocity } => *start + *velocity * t,
            MobilityModel::Waypoints(w) => {
                let first = w[0];
                if t <= first.0 {
                    return first.1;
                }
                for pair in w.windows(2) {
                    let (t0, p0) = pair[0];
                    let (t1, p1) = pair[1];
                    if t <= t1 {
                        return p0.lerp(p1, (t - t0) / (t1 - t0));
                    }
                }
                w[w.len() - 1].1
            }
        }
    }
}

/// Obstacle specification. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    shape: ObstacleShape,
    mobility: MobilityModel,
    model: LossModelKind,
    distance_threshold: Option<f64>,
    obstruction_fallback: bool,
    fallback_loss_db: f64,
}

/// Loss used by the secondary-ray fallback unless configured otherwise.
pub const DEFAULT_FALLBACK_LOSS_DB: f64 = 10.0;

/// Default diffraction distance threshold, in first-Fresnel radii.
pub const DEFAULT_THRESHOLD_FRESNEL_RADII: f64 = 10.0;

impl Obstacle {
    pub fn new(shape: ObstacleShape, mobility: MobilityModel, model: LossModelKind) -> Result<Self, ObstacleError> {
        let o = Obstacle {
            shape,
            mobility,
            model,
            distance_threshold: None,
            obstruction_fallback: false,
            fallback_loss_db: DEFAULT_FALLBACK_LOSS_DB,
        };
        o.validate()?;
        Ok(o)
    }

    /// Fixed diffraction distance threshold in meters, replacing the
    /// per-segment Fresnel-based default.
    pub fn with_distance_threshold(mut self, meters: f64) -> Result<Self, ObstacleError> {
        if !(meters > 0.0) {
            return Err(ObstacleError::Invalid("distance threshold must be > 0"));
        }
        self.distance_threshold = Some(meters);
        Ok(self)
    }

    /// Use constant obstruction of `loss_db` on secondary rays.
    pub fn with_obstruction_fallback(mut self, loss_db: f64) -> Result<Self, ObstacleError> {
        if !(loss_db >= 0.0) || !loss_db.is_finite() {
            return Err(ObstacleError::Invalid("fallback loss must be >= 0 dB"));
        }
        self.obstruction_fallback = true;
        self.fallback_loss_db = loss_db;
        Ok(self)
    }

    /// Same obstacle with another loss model.
    pub fn with_model(&self, model: LossModelKind) -> Result<Self, ObstacleError> {
        let o = Obstacle { model, ..self.clone() };
        o.validate()?;
        Ok(o)
    }

    fn validate(&self) -> Result<(), ObstacleError> {
        self.model.validate()?;
        self.mobility.validate()?;
        match self.shape {
            ObstacleShape::Screen {
                width,
                height,
                azimuth,
                elevation,
            } => {
                RectScreen::new(Vec3::ZERO, width, height, azimuth, elevation)?;
                if elevation.abs() > geometry::EPS && self.model == LossModelKind::Metis {
                    return Err(ObstacleError::Invalid("METIS needs an untilted screen"));
                }
            }
            ObstacleShape::OrthoScreen { width, height } => {
                RectScreen::new(Vec3::ZERO, width, height, 0.0, 0.0)?;
            }
            ObstacleShape::Sphere { radius } => {
                Sphere::new(Vec3::ZERO, radius)?;
                if self.model.is_diffraction() {
                    return Err(ObstacleError::Invalid("spheres only support the obstruction model"));
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> ObstacleShape {
        self.shape
    }

    pub fn mobility(&self) -> &MobilityModel {
        &self.mobility
    }

    pub fn model(&self) -> LossModelKind {
        self.model
    }

    pub fn distance_threshold(&self) -> Option<f64> {
        self.distance_threshold
    }

    pub fn obstruction_fallback(&self) -> Option<f64> {
        self.obstruction_fallback.then_some(self.fallback_loss_db)
    }

    pub fn position_at(&self, t: f64) -> Point3 {
        self.mobility.position_at(t)
    }

    /// Shape placed at its pose at time `t`.
    pub fn pose_at(&self, t: f64) -> PlacedShape {
        let anchor = self.position_at(t);
        match self.shape {
            ObstacleShape::Screen {
                width,
                height,
                azimuth,
                elevation,
            } => {
                // Dimensions were validated at construction.
                let probe = RectScreen::new(anchor, width, height, azimuth, elevation).expect("validated screen");
                let center = anchor + probe.height_axis() * (height / 2.0);
                PlacedShape::Screen(RectScreen::new(center, width, height, azimuth, elevation).expect("validated screen"))
            }
            ObstacleShape::OrthoScreen { width, height } => PlacedShape::OrthoScreen {
                center: anchor + Vec3::Z * (height / 2.0),
                width,
                height,
            },
            ObstacleShape::Sphere { radius } => {
                PlacedShape::Sphere(Sphere::new(anchor, radius).expect("validated sphere"))
            }
        }
    }
}

/// An obstacle shape at a specific time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlacedShape {
    Screen(RectScreen),
    OrthoScreen { center: Point3, width: f64, height: f64 },
    Sphere(Sphere),
}

impl PlacedShape {
    /// The screen as seen by `segment`, orthogonalized when needed.
    fn screen_for(&self, segment: &Segment) -> Result<Option<RectScreen>, GeometryError> {
        match *self {
            PlacedShape::Screen(s) => Ok(Some(s)),
            PlacedShape::OrthoScreen { center, width, height } => {
                let s = RectScreen::new(center, width, height, 0.0, 0.0)?;
                orthogonalize_screen(&s, segment).map(Some)
            }
            PlacedShape::Sphere(_) => Ok(None),
        }
    }
}

/// Per-run evaluation settings shared by all obstacles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionContext {
    pub wavelength: f64,
    pub diffraction: DiffractionConfig,
}

impl InteractionContext {
    pub fn new(wavelength: f64) -> Self {
        InteractionContext {
            wavelength,
            diffraction: DiffractionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossOutcome {
    /// Sum over segments, dB.
    pub loss: f64,
    /// Whether any segment is geometrically obstructed.
    pub blocked: bool,
}

/// First Fresnel zone radius at the middle of a segment.
pub fn segment_fresnel_radius(segment: &Segment, wavelength: f64) -> f64 {
    math::sqrt(wavelength * segment.length()) / 2.0
}

/// Loss that `obstacle` imposes on `ray` at time `t`.
///
/// Segments with degenerate geometry are skipped and counted in `diag`.
pub fn interact(
    obstacle: &Obstacle,
    ray: &Ray,
    t: f64,
    is_primary_ray: bool,
    ctx: &InteractionContext,
    diag: &mut Diagnostics,
) -> LossOutcome {
    let placed = obstacle.pose_at(t);
    let mut out = LossOutcome::default();
    for segment in ray.segments() {
        let segment = match segment {
            Ok(s) => s,
            Err(e) => {
                warn!("skipping ray segment: {e}");
                diag.degenerate_segments += 1;
                continue;
            }
        };
        match segment_loss(obstacle, &placed, &segment, is_primary_ray, ctx, diag) {
            Ok((loss, blocked)) => {
                out.loss += loss;
                out.blocked |= blocked;
            }
            Err(e) => {
                warn!("skipping ray segment: {e}");
                diag.degenerate_segments += 1;
            }
        }
    }
    out
}

fn segment_loss(
    obstacle: &Obstacle,
    placed: &PlacedShape,
    segment: &Segment,
    is_primary_ray: bool,
    ctx: &InteractionContext,
    diag: &mut Diagnostics,
) -> Result<(f64, bool), ObstacleError> {
    let threshold = obstacle
        .distance_threshold
        .unwrap_or_else(|| DEFAULT_THRESHOLD_FRESNEL_RADII * segment_fresnel_radius(segment, ctx.wavelength));

    if let PlacedShape::Sphere(sphere) = placed {
        if distance_segment_sphere(segment, sphere) > threshold {
            return Ok((0.0, false));
        }
        let blocked = segment_sphere_intersection(segment, sphere);
        let LossModelKind::Obstruction(l) = obstacle.model else {
            return Err(ObstacleError::Invalid("spheres only support the obstruction model"));
        };
        diag.obstruction_evaluations += 1;
        return Ok((ctx.diffraction.cap(obstruction_loss(blocked, l), diag), blocked));
    }

    let screen = placed.screen_for(segment)?.expect("screen shape");
    if distance_segment_rect(segment, &screen) > threshold {
        return Ok((0.0, false));
    }
    let blocked = segment_rect_intersection(segment, &screen)?.is_some();

    let constant = match obstacle.model {
        LossModelKind::Obstruction(l) => Some(l),
        _ if !is_primary_ray && obstacle.obstruction_fallback => Some(obstacle.fallback_loss_db),
        _ => None,
    };
    if let Some(l) = constant {
        diag.obstruction_evaluations += 1;
        return Ok((ctx.diffraction.cap(obstruction_loss(blocked, l), diag), blocked));
    }

    let Some(g) = screen_geometry(&screen, segment, ctx.wavelength)? else {
        return Ok((0.0, false));
    };
    let loss = diffraction::screen_loss(obstacle.model, &g, &ctx.diffraction, diag)?;
    Ok((loss, blocked))
}

// Point on `edge` minimizing |tx - p| + |p - rx|; the sum is convex along the
// edge so golden-section search converges to the global minimum.
fn stationary_point(edge: &Segment, tx: Point3, rx: Point3) -> Point3 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    const TOL: f64 = 1e-6;
    let f = |s: f64| {
        let p = edge.point_at(s);
        tx.distance(p) + p.distance(rx)
    };
    let len = edge.length();
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) * len > TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    edge.point_at(0.5 * (a + b))
}

/// Edge geometry of a screen against one segment, `None` when the screen
/// plane does not cross the segment between its endpoints.
pub fn screen_geometry(
    screen: &RectScreen,
    segment: &Segment,
    wavelength: f64,
) -> Result<Option<ScreenDiffractionGeometry>, ObstacleError> {
    let Some(t) = plane_crossing(segment, screen)? else {
        return Ok(None);
    };
    if !(t > 0.0 && t < 1.0) {
        return Ok(None);
    }
    let crossing = segment.point_at(t);
    let los_blocked = segment_rect_intersection(segment, screen)?.is_some();

    let [a, b, c, d] = screen.corners();
    let u = screen.width_axis();
    let v = screen.height_axis();
    // (edge, direction into the screen) in W1, W2, H1, H2 order.
    let edges = [
        (Segment::new(a, d)?, u),
        (Segment::new(b, c)?, -u),
        (Segment::new(d, c)?, -v),
        (Segment::new(a, b)?, v),
    ];

    let tx = segment.start();
    let rx = segment.end();
    let r = segment.length();
    let mut geoms = [EdgeGeometry {
        d_t: 0.0,
        d_r: 0.0,
        r,
        h: 0.0,
        wavelength,
    }; 4];
    let mut line_distance = [0.0; 4];
    for (i, (edge, inward)) in edges.iter().enumerate() {
        let p = stationary_point(edge, tx, rx);
        let depth = distance_point_line(p, segment);
        let sign = if (crossing - edge.start()).dot(*inward) >= 0.0 { 1.0 } else { -1.0 };
        geoms[i] = EdgeGeometry::new(tx.distance(p), p.distance(rx), r, sign * depth, wavelength)?;
        line_distance[i] = distance_line_segment(segment, edge);
    }
    Ok(Some(ScreenDiffractionGeometry {
        edges: geoms,
        line_distance,
        los_blocked,
        clearance: distance_segment_rect(segment, screen),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffraction::{FresnelMethod, W1, W2};
    use alloc::vec;

    const LAMBDA: f64 = 0.005;

    fn los_ray() -> Ray {
        Ray::new(0.0, -80.0, 0.0, vec![Vec3::new(0.0, 0.0, 1.6), Vec3::new(8.0, 0.0, 1.6)]).unwrap()
    }

    fn ortho(y: f64, model: LossModelKind) -> Obstacle {
        Obstacle::new(
            ObstacleShape::OrthoScreen { width: 0.2, height: 1.7 },
            MobilityModel::Static(Vec3::new(4.0, y, 0.0)),
            model,
        )
        .unwrap()
    }

    #[test]
    fn mobility_examples() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(MobilityModel::Static(p).position_at(17.0), p);
        let lin = MobilityModel::Linear {
            start: Vec3::new(5.0, 0.0, 0.0),
            velocity: Vec3::new(0.0, 1.2, 0.0),
        };
        assert!(lin.position_at(2.5).distance(Vec3::new(5.0, 3.0, 0.0)) < 1e-12);
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(2.0, 4.0, 0.0);
        let w = MobilityModel::Waypoints(vec![(0.0, a), (2.0, b)]);
        assert_eq!(w.position_at(1.0), Vec3::new(1.0, 2.0, 0.0));
        assert_eq!(w.position_at(-1.0), a);
        assert_eq!(w.position_at(5.0), b);
        assert!(MobilityModel::Waypoints(vec![(1.0, a), (1.0, b)]).validate().is_err());
    }

    #[test]
    fn sphere_on_los_is_obstructed() {
        let o = Obstacle::new(
            ObstacleShape::Sphere { radius: 0.3 },
            MobilityModel::Static(Vec3::new(4.0, 0.0, 1.6)),
            LossModelKind::Obstruction(10.0),
        )
        .unwrap();
        let mut diag = Diagnostics::default();
        let out = interact(&o, &los_ray(), 0.0, true, &InteractionContext::new(LAMBDA), &mut diag);
        assert_eq!(out, LossOutcome { loss: 10.0, blocked: true });
    }

    #[test]
    fn invalid_combinations() {
        let sphere = Obstacle::new(
            ObstacleShape::Sphere { radius: 0.3 },
            MobilityModel::Static(Vec3::ZERO),
            LossModelKind::Dked,
        );
        assert!(sphere.is_err());
        let tilted = Obstacle::new(
            ObstacleShape::Screen {
                width: 1.0,
                height: 1.0,
                azimuth: 0.0,
                elevation: 0.2,
            },
            MobilityModel::Static(Vec3::ZERO),
            LossModelKind::Metis,
        );
        assert!(tilted.is_err());
        assert!(ortho(0.0, LossModelKind::Dked).with_distance_threshold(0.0).is_err());
    }

    #[test]
    fn far_screen_contributes_nothing() {
        // Nearest edge 10 Fresnel radii (1 m) plus a margin from the LOS.
        for model in [LossModelKind::Metis, LossModelKind::Dked, LossModelKind::DkedPc, LossModelKind::ItuSe] {
            let o = ortho(1.2, model);
            let mut diag = Diagnostics::default();
            let out = interact(&o, &los_ray(), 0.0, true, &InteractionContext::new(LAMBDA), &mut diag);
            assert_eq!(out, LossOutcome { loss: 0.0, blocked: false });
            assert_eq!(diag.diffraction_evaluations, 0);
        }
    }

    #[test]
    fn secondary_ray_falls_back_to_obstruction() {
        let o = Obstacle::new(
            ObstacleShape::OrthoScreen { width: 0.4, height: 1.7 },
            MobilityModel::Static(Vec3::new(5.0, 3.0, 0.0)),
            LossModelKind::Dked,
        )
        .unwrap()
        .with_obstruction_fallback(10.0)
        .unwrap();
        // Two bounces; only the middle segment crosses the screen.
        let ray = Ray::new(
            0.0,
            -90.0,
            0.0,
            vec![
                Vec3::new(1.0, 0.5, 1.6),
                Vec3::new(2.0, 3.0, 1.0),
                Vec3::new(8.0, 3.0, 1.0),
                Vec3::new(9.0, 0.5, 1.6),
            ],
        )
        .unwrap();
        let mut diag = Diagnostics::default();
        let out = interact(&o, &ray, 0.0, false, &InteractionContext::new(LAMBDA), &mut diag);
        assert_eq!(out, LossOutcome { loss: 10.0, blocked: true });
        assert_eq!(diag.fresnel_evaluations, 0);
        assert_eq!(diag.diffraction_evaluations, 0);
    }

    #[test]
    fn midpoint_crossing_matches_diffraction_module() {
        let o = ortho(0.0, LossModelKind::Dked);
        let ctx = InteractionContext::new(LAMBDA);
        let mut diag = Diagnostics::default();
        let out = interact(&o, &los_ray(), 0.0, true, &ctx, &mut diag);

        let seg = Segment::new(Vec3::new(0.0, 0.0, 1.6), Vec3::new(8.0, 0.0, 1.6)).unwrap();
        let screen = match o.pose_at(0.0).screen_for(&seg).unwrap() {
            Some(s) => s,
            None => unreachable!(),
        };
        let g = screen_geometry(&screen, &seg, LAMBDA).unwrap().unwrap();
        let direct = diffraction::dked_loss(g.nu(W1), g.nu(W2), FresnelMethod::Approximate);
        assert!(out.blocked);
        assert_eq!(out.loss, direct);
        // Lateral edges sit 0.1 m off the LOS at the midpoint.
        assert!((g.edges[W1].h - 0.1).abs() < 1e-6 && (g.edges[W2].h - 0.1).abs() < 1e-6);
        assert!((g.edges[W1].d_t - (16.0f64 + 0.01).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn offset_screen_signs() {
        let seg = Segment::new(Vec3::new(0.0, 0.0, 1.6), Vec3::new(8.0, 0.0, 1.6)).unwrap();
        let screen = RectScreen::new(Vec3::new(4.0, 0.5, 0.85), 0.2, 1.7, 0.0, 0.0).unwrap();
        let g = screen_geometry(&screen, &seg, LAMBDA).unwrap().unwrap();
        assert!(!g.los_blocked);
        // Width axis is +y: W1 is the near edge at y = 0.4, W2 the far one at 0.6.
        assert!((g.edges[W1].h + 0.4).abs() < 1e-6);
        assert!((g.edges[W2].h - 0.6).abs() < 1e-6);
        assert!((g.clearance - 0.4).abs() < 1e-9);
    }

    #[test]
    fn screen_behind_receiver_is_ignored() {
        let seg = Segment::new(Vec3::new(0.0, 0.0, 1.6), Vec3::new(8.0, 0.0, 1.6)).unwrap();
        let screen = RectScreen::new(Vec3::new(8.5, 0.0, 0.85), 0.2, 1.7, 0.0, 0.0).unwrap();
        assert_eq!(screen_geometry(&screen, &seg, LAMBDA).unwrap(), None);
    }
}
