//! 3D primitives and the predicates used for ray/obstacle interaction.
//!
//! All quantities are in meters and double precision. Comparisons use an
//! absolute tolerance of [`EPS`] unless a function says otherwise.

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::math;

/// Absolute geometric tolerance, meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("zero-length segment")]
    ZeroLength,
    #[error("invalid dimension {0} (must be > 0)")]
    InvalidDimension(f64),
    #[error("segment lies in the screen plane")]
    Coplanar,
    #[error("segment is vertical, horizontal projection is degenerate")]
    VerticalSegment,
}

/// A point or vector in 3D space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Positions and directions share one representation.
pub type Point3 = Vec3;
pub type Vector3 = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_squared())
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, k: f64) -> Vec3 {
        Vec3::new(self.x / k, self.y / k, self.z / k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A finite, non-degenerate line segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    start: Point3,
    end: Point3,
}

impl Segment {
    pub fn new(start: Point3, end: Point3) -> Result<Self, GeometryError> {
        if !start.is_finite() || !end.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if start.distance(end) <= EPS {
            return Err(GeometryError::ZeroLength);
        }
        Ok(Segment { start, end })
    }

    pub fn start(&self) -> Point3 {
        self.start
    }

    pub fn end(&self) -> Point3 {
        self.end
    }

    pub fn direction(&self) -> Vector3 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    pub fn reversed(&self) -> Segment {
        Segment {
            start: self.end,
            end: self.start,
        }
    }

    pub fn point_at(&self, t: f64) -> Point3 {
        self.start.lerp(self.end, t)
    }
}

/// A thin rectangular screen.
///
/// The orientation is given by two angles. With both at zero the screen
/// normal points along +x, the width runs along +y and the height along +z.
/// `azimuth` rotates the screen about the vertical axis; `elevation` tilts the
/// normal above the horizontal plane. The width axis always stays horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectScreen {
    center: Point3,
    width: f64,
    height: f64,
    azimuth: f64,
    elevation: f64,
}

impl RectScreen {
    pub fn new(
        center: Point3,
        width: f64,
        height: f64,
        azimuth: f64,
        elevation: f64,
    ) -> Result<Self, GeometryError> {
        if !center.is_finite() || !azimuth.is_finite() || !elevation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        for d in [width, height] {
            if !(d > 0.0) || !d.is_finite() {
                return Err(GeometryError::InvalidDimension(d));
            }
        }
        Ok(RectScreen {
            center,
            width,
            height,
            azimuth,
            elevation,
        })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    pub fn is_tilted(&self) -> bool {
        self.elevation.abs() > EPS
    }

    pub fn normal(&self) -> Vector3 {
        let (sa, ca) = math::sincos(self.azimuth);
        let (se, ce) = math::sincos(self.elevation);
        Vec3::new(ce * ca, ce * sa, se)
    }

    /// Horizontal unit vector along the width.
    pub fn width_axis(&self) -> Vector3 {
        let (sa, ca) = math::sincos(self.azimuth);
        Vec3::new(-sa, ca, 0.0)
    }

    /// Unit vector along the height, pointing "up" the screen.
    pub fn height_axis(&self) -> Vector3 {
        self.normal().cross(self.width_axis())
    }

    /// Corners in order: (-w,-h), (+w,-h), (+w,+h), (-w,+h) in local axes.
    pub fn corners(&self) -> [Point3; 4] {
        let u = self.width_axis() * (self.width / 2.0);
        let v = self.height_axis() * (self.height / 2.0);
        let c = self.center;
        [c - u - v, c + u - v, c + u + v, c - u + v]
    }

    /// Local (width, height) coordinates of the projection of `p` on the plane.
    pub fn local_coords(&self, p: Point3) -> (f64, f64) {
        let d = p - self.center;
        (d.dot(self.width_axis()), d.dot(self.height_axis()))
    }

    /// Closest point of the (filled) rectangle to `p`.
    pub fn closest_point(&self, p: Point3) -> Point3 {
        let (a, b) = self.local_coords(p);
        let a = a.clamp(-self.width / 2.0, self.width / 2.0);
        let b = b.clamp(-self.height / 2.0, self.height / 2.0);
        self.center + self.width_axis() * a + self.height_axis() * b
    }

    /// The four boundary edges as segments.
    pub fn edges(&self) -> [Segment; 4] {
        let [a, b, c, d] = self.corners();
        // Corners are distinct because width and height are positive.
        [
            Segment { start: a, end: b },
            Segment { start: b, end: c },
            Segment { start: c, end: d },
            Segment { start: d, end: a },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    center: Point3,
    radius: f64,
}

impl Sphere {
    pub fn new(center: Point3, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidDimension(radius));
        }
        Ok(Sphere { center, radius })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Distance from `p` to the segment and the parameter `t` of the closest point.
pub fn distance_point_segment(p: Point3, s: &Segment) -> (f64, f64) {
    let d = s.direction();
    let t = ((p - s.start).dot(d) / d.norm_squared()).clamp(0.0, 1.0);
    (p.distance(s.point_at(t)), t)
}

/// Distance from `p` to the infinite line through the segment.
pub fn distance_point_line(p: Point3, s: &Segment) -> f64 {
    let d = s.direction();
    (p - s.start).cross(d).norm() / d.norm()
}

/// Closest distance between two segments.
pub fn distance_segment_segment(a: &Segment, b: &Segment) -> f64 {
    let (s, t) = closest_params(a.start, a.direction(), b.start, b.direction(), true);
    a.point_at(s).distance(b.point_at(t))
}

/// Closest distance between the infinite line through `line` and segment `seg`.
pub fn distance_line_segment(line: &Segment, seg: &Segment) -> f64 {
    let (s, t) = closest_params(line.start, line.direction(), seg.start, seg.direction(), false);
    line.point_at(s).distance(seg.point_at(t))
}

// Closest-point parameters between p1 + s*d1 and p2 + t*d2, t in [0, 1].
// `s` is clamped to [0, 1] only when `clamp_first` is set.
fn closest_params(p1: Point3, d1: Vector3, p2: Point3, d2: Vector3, clamp_first: bool) -> (f64, f64) {
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(r);
    let c = d1.dot(r);
    let b = d1.dot(d2);
    let denom = a * e - b * b;
    let clamp_s = |s: f64| if clamp_first { s.clamp(0.0, 1.0) } else { s };

    let mut s = if denom > 1e-12 * a * e {
        clamp_s((b * f - c * e) / denom)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = clamp_s(-c / a);
    } else if t > 1.0 {
        t = 1.0;
        s = clamp_s((b - c) / a);
    }
    (s, t)
}

/// Where the segment crosses the screen, boundary inclusive.
///
/// Returns [`GeometryError::Coplanar`] when the segment lies in the screen
/// plane.
pub fn segment_rect_intersection(
    s: &Segment,
    r: &RectScreen,
) -> Result<Option<Point3>, GeometryError> {
    let Some(t) = plane_crossing(s, r)? else {
        return Ok(None);
    };
    let len = s.length();
    if t * len < -EPS || t * len > len + EPS {
        return Ok(None);
    }
    let p = s.point_at(t.clamp(0.0, 1.0));
    let (a, b) = r.local_coords(p);
    if a.abs() <= r.width / 2.0 + EPS && b.abs() <= r.height / 2.0 + EPS {
        Ok(Some(p))
    } else {
        Ok(None)
    }
}

/// Parameter along the infinite line through `s` where it meets the screen
/// plane; `None` when parallel and off-plane.
pub fn plane_crossing(s: &Segment, r: &RectScreen) -> Result<Option<f64>, GeometryError> {
    let n = r.normal();
    let d = s.direction();
    let denom = n.dot(d);
    let offset = n.dot(r.center - s.start);
    if denom.abs() <= 1e-12 * d.norm() {
        if offset.abs() <= EPS {
            return Err(GeometryError::Coplanar);
        }
        return Ok(None);
    }
    Ok(Some(offset / denom))
}

/// Whether the segment passes within `radius` of the sphere center (tangency
/// counts).
pub fn segment_sphere_intersection(s: &Segment, sp: &Sphere) -> bool {
    distance_point_segment(sp.center, s).0 <= sp.radius + EPS
}

/// Minimum distance between a segment and the filled screen rectangle.
pub fn distance_segment_rect(s: &Segment, r: &RectScreen) -> f64 {
    if let Ok(Some(_)) = segment_rect_intersection(s, r) {
        return 0.0;
    }
    let mut best = r.closest_point(s.start).distance(s.start);
    best = best.min(r.closest_point(s.end).distance(s.end));
    for e in r.edges() {
        best = best.min(distance_segment_segment(s, &e));
    }
    best
}

/// Minimum distance between a segment and the sphere surface (0 when it
/// enters the sphere).
pub fn distance_segment_sphere(s: &Segment, sp: &Sphere) -> f64 {
    (distance_point_segment(sp.center, s).0 - sp.radius).max(0.0)
}

/// Re-orient the screen so it stands vertical and faces the segment in the
/// horizontal projection. Center and extents are kept.
pub fn orthogonalize_screen(r: &RectScreen, s: &Segment) -> Result<RectScreen, GeometryError> {
    let d = s.direction();
    let horizontal = math::hypot(d.x, d.y);
    if horizontal <= 1e-12 * d.norm() {
        return Err(GeometryError::VerticalSegment);
    }
    Ok(RectScreen {
        azimuth: math::atan2(d.y, d.x),
        elevation: 0.0,
        ..*r
    })
}
