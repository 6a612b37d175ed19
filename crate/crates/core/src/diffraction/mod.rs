//! Blockage loss models for a thin screen crossing a ray segment.
//!
//! Every model works on an [`EdgeGeometry`] per screen edge. Lateral (width)
//! edges are the vertical ones on either side of the screen; height edges are
//! its top and bottom. The signed obstruction depth `h` of an edge is positive
//! when the half-plane spanned by that edge and the screen contains the LOS.
//!
//! Loss values are in dB; negative values are gains from constructive
//! interference.

mod fresnel;

pub use fresnel::{
    fresnel, fresnel_integral, fresnel_quadrature, FresnelMethod, FresnelResult,
    QUADRATURE_TOLERANCE,
};

use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::math;
use crate::Diagnostics;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DiffractionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("edge geometry violates d_T + d_R >= r by {0} m")]
    TriangleInequality(f64),
}

/// Slack allowed on `d_T + d_R >= r` before it is treated as an error.
const TRIANGLE_SLACK: f64 = 1e-9;

/// Radius of the n-th Fresnel zone at a point `d_t`/`d_r` from the ends.
pub fn fresnel_zone_radius(n: u32, wavelength: f64, d_t: f64, d_r: f64) -> Result<f64, DiffractionError> {
    if n == 0 {
        return Err(DiffractionError::InvalidArgument("zone order must be >= 1"));
    }
    if !(wavelength > 0.0 && d_t > 0.0 && d_r > 0.0) {
        return Err(DiffractionError::InvalidArgument("lengths must be positive"));
    }
    Ok(math::sqrt(n as f64 * wavelength * d_t * d_r / (d_t + d_r)))
}

/// Distances and obstruction depth of a single diffracting edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    /// Diffraction point to transmitter, m.
    pub d_t: f64,
    /// Diffraction point to receiver, m.
    pub d_r: f64,
    /// Transmitter to receiver, m.
    pub r: f64,
    /// Signed obstruction depth, m.
    pub h: f64,
    pub wavelength: f64,
}

impl EdgeGeometry {
    pub fn new(d_t: f64, d_r: f64, r: f64, h: f64, wavelength: f64) -> Result<Self, DiffractionError> {
        if !(d_t > 0.0 && d_r > 0.0 && r > 0.0 && wavelength > 0.0) || !h.is_finite() {
            return Err(DiffractionError::InvalidArgument("edge distances and wavelength must be positive"));
        }
        let excess = d_t + d_r - r;
        if excess < -TRIANGLE_SLACK {
            return Err(DiffractionError::TriangleInequality(-excess));
        }
        Ok(EdgeGeometry { d_t, d_r, r, h, wavelength })
    }

    /// Extra length of the path through the edge over the direct path.
    pub fn excess_path(&self) -> f64 {
        (self.d_t + self.d_r - self.r).max(0.0)
    }

    /// Same edge with transmitter and receiver swapped.
    pub fn reversed(&self) -> Self {
        EdgeGeometry { d_t: self.d_r, d_r: self.d_t, ..*self }
    }
}

/// Fresnel-Kirchhoff diffraction parameter of an edge.
pub fn diffraction_parameter(e: &EdgeGeometry) -> f64 {
    e.h * math::sqrt(2.0 / e.wavelength * (e.d_t + e.d_r) / (e.d_t * e.d_r))
}

/// Index of each edge in [`ScreenDiffractionGeometry::edges`].
pub const W1: usize = 0;
pub const W2: usize = 1;
pub const H1: usize = 2;
pub const H2: usize = 3;

/// Edge geometry of one screen against one ray segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenDiffractionGeometry {
    /// Lateral edges `W1`, `W2`, then top `H1` and bottom `H2`.
    pub edges: [EdgeGeometry; 4],
    /// Distance from the infinite LOS line to each edge segment.
    pub line_distance: [f64; 4],
    pub los_blocked: bool,
    /// Minimum distance between the screen and the LOS segment.
    pub clearance: f64,
}

impl ScreenDiffractionGeometry {
    pub fn wavelength(&self) -> f64 {
        self.edges[0].wavelength
    }

    pub fn los_length(&self) -> f64 {
        self.edges[0].r
    }

    /// First Fresnel zone radius at the middle of the segment (its maximum).
    pub fn max_fresnel_radius(&self) -> f64 {
        math::sqrt(self.wavelength() * self.los_length()) / 2.0
    }

    pub fn nu(&self, edge: usize) -> f64 {
        diffraction_parameter(&self.edges[edge])
    }

    /// Swap transmitter and receiver on every edge.
    pub fn reversed(&self) -> Self {
        let mut out = *self;
        for e in out.edges.iter_mut() {
            *e = e.reversed();
        }
        out
    }
}

/// Loss model assigned to an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossModelKind {
    /// Constant loss in dB while the path is obstructed.
    Obstruction(f64),
    Metis,
    Dked,
    DkedPc,
    ItuSe,
}

impl LossModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossModelKind::Obstruction(_) => "obstruction",
            LossModelKind::Metis => "metis",
            LossModelKind::Dked => "dked",
            LossModelKind::DkedPc => "dked_pc",
            LossModelKind::ItuSe => "itu_se",
        }
    }

    pub fn is_diffraction(&self) -> bool {
        !matches!(self, LossModelKind::Obstruction(_))
    }

    pub fn validate(&self) -> Result<(), DiffractionError> {
        match self {
            LossModelKind::Obstruction(l) if !(*l >= 0.0) || l.is_nan() => {
                Err(DiffractionError::InvalidArgument("obstruction loss must be >= 0 dB"))
            }
            _ => Ok(()),
        }
    }
}

/// Which length enters the phase correction of DKED+PC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathDifference {
    /// `d_T + d_R - r`: extra length over the direct ray.
    #[default]
    Excess,
    /// `d_T + d_R`: full length of the diffracted ray.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionConfig {
    pub fresnel: FresnelMethod,
    /// Upper bound on any model's loss, dB.
    pub loss_cap_db: f64,
    /// Unblocked screens farther than this many first-Fresnel radii from the
    /// LOS contribute nothing.
    pub far_field_cutoff: f64,
    pub path_difference: PathDifference,
}

impl Default for DiffractionConfig {
    fn default() -> Self {
        DiffractionConfig {
            fresnel: FresnelMethod::Approximate,
            loss_cap_db: 80.0,
            far_field_cutoff: 10.0,
            path_difference: PathDifference::Excess,
        }
    }
}

impl DiffractionConfig {
    pub(crate) fn cap(&self, loss: f64, diag: &mut Diagnostics) -> f64 {
        if loss > self.loss_cap_db || loss.is_nan() {
            diag.clamp_events += 1;
            self.loss_cap_db
        } else {
            loss
        }
    }
}

/// Constant loss while the path is obstructed.
pub fn obstruction_loss(blocked: bool, loss_db: f64) -> f64 {
    if blocked {
        loss_db
    } else {
        0.0
    }
}

/// Arctangent single-edge term of the METIS model.
pub fn metis_edge_term(e: &EdgeGeometry, positive: bool) -> Result<f64, DiffractionError> {
    let excess = e.d_t + e.d_r - e.r;
    if excess < -TRIANGLE_SLACK {
        return Err(DiffractionError::TriangleInequality(-excess));
    }
    let sign = if positive { 1.0 } else { -1.0 };
    let arg = sign * FRAC_PI_2 * math::sqrt(PI * excess.max(0.0) / e.wavelength);
    Ok(math::atan(arg) / PI)
}

/// Smallest argument of the METIS logarithm before clamping.
pub const METIS_LOG_FLOOR: f64 = 1e-8;

/// METIS four-edge loss. Returns the loss and whether the logarithm argument
/// had to be clamped.
pub fn metis_loss(g: &ScreenDiffractionGeometry) -> Result<(f64, bool), DiffractionError> {
    let signs = metis_signs(g);
    let mut terms = [0.0; 4];
    for (i, term) in terms.iter_mut().enumerate() {
        *term = metis_edge_term(&g.edges[i], signs[i])?;
    }
    let arg = 1.0 - (terms[H1] + terms[H2]) * (terms[W1] + terms[W2]);
    let clamped = !(arg >= METIS_LOG_FLOOR);
    Ok((-20.0 * math::log10(arg.max(METIS_LOG_FLOOR)), clamped))
}

// NLOS: all four terms positive. LOS: per edge pair only the edge farther from
// the LOS line is positive.
fn metis_signs(g: &ScreenDiffractionGeometry) -> [bool; 4] {
    if g.los_blocked {
        return [true; 4];
    }
    let d = &g.line_distance;
    let w1_far = d[W1] > d[W2];
    let h1_far = d[H1] > d[H2];
    [w1_far, !w1_far, h1_far, !h1_far]
}

/// Complex single knife-edge field relative to free space.
pub fn sked(nu: f64, method: FresnelMethod) -> Complex64 {
    let f = fresnel(nu, method);
    Complex64::new(0.5, 0.5) * Complex64::new(0.5 - f.c, -(0.5 - f.s))
}

fn db_from_field(field: f64) -> f64 {
    if field > 0.0 {
        -20.0 * math::log10(field)
    } else {
        f64::INFINITY
    }
}

/// Double knife-edge loss from the two lateral edge parameters. Infinite when
/// the contributions cancel exactly.
pub fn dked_loss(nu1: f64, nu2: f64, method: FresnelMethod) -> f64 {
    db_from_field((sked(nu1, method) + sked(nu2, method)).norm())
}

/// Double knife-edge loss with each edge rotated by its path-length phase.
pub fn dked_pc_loss(nu1: f64, nu2: f64, delta_d1: f64, delta_d2: f64, wavelength: f64, method: FresnelMethod) -> f64 {
    let rot = |dd: f64| {
        let (s, c) = math::sincos(-2.0 * PI * dd / wavelength);
        Complex64::new(c, s)
    };
    let field = sked(nu1, method) * rot(delta_d1) + sked(nu2, method) * rot(delta_d2);
    db_from_field(field.norm())
}

/// Single knife-edge loss approximation `J(v)` of ITU-R P.526, dB.
/// Zero for `v <= -0.78`.
pub fn itu_knife_edge_loss(nu: f64) -> f64 {
    if nu <= -0.78 {
        return 0.0;
    }
    let a = nu - 0.1;
    6.9 + 20.0 * math::log10(math::sqrt(a * a + 1.0) + a)
}

/// Semi-empirical edge field: amplitude from `J(v)`, phase from the excess
/// path `πv²/2`. Lit edges (`v < 0`) use the complement `1 - l(-v)`.
pub fn itu_edge_field(nu: f64) -> Complex64 {
    let v = nu.abs();
    let amplitude = math::pow10(-itu_knife_edge_loss(v) / 20.0);
    let (s, c) = math::sincos(-FRAC_PI_2 * v * v);
    let shadow = Complex64::new(amplitude * c, amplitude * s);
    if nu >= 0.0 {
        shadow
    } else {
        Complex64::new(1.0, 0.0) - shadow
    }
}

/// Semi-empirical thin-screen loss.
///
/// Follows the finite-width screen method of ITU-R P.526-15 (single isolated
/// obstacles, "Finite-width screen"): the screen is split into knife edges,
/// the two sides plus the horizontal edge facing the LOS, and each edge's
/// loss comes from the `J(v)` approximation so no Fresnel integral is
/// needed. The contributions are combined coherently over the screen
/// aperture, `E = 1 - (1 - l_w1 - l_w2)(1 - l_h)`, which reproduces the
/// interference fringes on both sides of the shadow.
pub fn itu_se_loss(g: &ScreenDiffractionGeometry) -> f64 {
    let lw = itu_edge_field(g.nu(W1)) + itu_edge_field(g.nu(W2));
    let h = if g.line_distance[H1] <= g.line_distance[H2] { H1 } else { H2 };
    let lh = itu_edge_field(g.nu(h));
    let one = Complex64::new(1.0, 0.0);
    db_from_field((one - (one - lw) * (one - lh)).norm())
}

fn phase_length(e: &EdgeGeometry, mode: PathDifference) -> f64 {
    match mode {
        PathDifference::Excess => e.excess_path(),
        PathDifference::Absolute => e.d_t + e.d_r,
    }
}

/// Loss of `model` for a screen, capped and with the far-field cutoff applied.
pub fn screen_loss(
    model: LossModelKind,
    g: &ScreenDiffractionGeometry,
    cfg: &DiffractionConfig,
    diag: &mut Diagnostics,
) -> Result<f64, DiffractionError> {
    if let LossModelKind::Obstruction(l) = model {
        diag.obstruction_evaluations += 1;
        return Ok(cfg.cap(obstruction_loss(g.los_blocked, l), diag));
    }
    if !g.los_blocked && g.clearance > cfg.far_field_cutoff * g.max_fresnel_radius() {
        return Ok(0.0);
    }
    diag.diffraction_evaluations += 1;
    let loss = match model {
        LossModelKind::Obstruction(_) => unreachable!(),
        LossModelKind::Metis => {
            let (loss, clamped) = metis_loss(g)?;
            if clamped {
                diag.clamp_events += 1;
            }
            loss
        }
        LossModelKind::Dked => {
            diag.fresnel_evaluations += 2;
            dked_loss(g.nu(W1), g.nu(W2), cfg.fresnel)
        }
        LossModelKind::DkedPc => {
            diag.fresnel_evaluations += 2;
            dked_pc_loss(
                g.nu(W1),
                g.nu(W2),
                phase_length(&g.edges[W1], cfg.path_difference),
                phase_length(&g.edges[W2], cfg.path_difference),
                g.wavelength(),
                cfg.fresnel,
            )
        }
        LossModelKind::ItuSe => itu_se_loss(g),
    };
    Ok(cfg.cap(loss, diag))
}
