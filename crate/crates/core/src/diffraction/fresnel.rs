//! Complex Fresnel integral `F(v) = C(v) + jS(v) = ∫₀^v exp(jπs²/2) ds`.
//!
//! Two evaluators share one contract: Boersma's rational approximation (the
//! one tabulated by the ITU, absolute error around 1e-9) and an adaptive
//! Simpson quadrature used as the reference.

use num_complex::Complex64;

use crate::math;

/// `C(v)` and `S(v)` for one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelResult {
    pub c: f64,
    pub s: f64,
}

impl FresnelResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.c, self.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FresnelMethod {
    /// Closed-form approximation.
    #[default]
    Approximate,
    /// Adaptive quadrature at [`QUADRATURE_TOLERANCE`].
    Quadrature,
}

pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

/// Evaluate with the selected method.
pub fn fresnel(nu: f64, method: FresnelMethod) -> FresnelResult {
    match method {
        FresnelMethod::Approximate => fresnel_integral(nu),
        FresnelMethod::Quadrature => fresnel_quadrature(nu, QUADRATURE_TOLERANCE),
    }
}

// Boersma (1960) coefficients, x < 4 branch.
const A: [f64; 12] = [
    1.595769140,
    -0.000001702,
    -6.808568854,
    -0.000576361,
    6.920691902,
    -0.016898657,
    -3.050485660,
    -0.075752419,
    0.850663781,
    -0.025639041,
    -0.150230960,
    0.034404779,
];
const B: [f64; 12] = [
    -0.000000033,
    4.255387524,
    -0.000092810,
    -7.780020400,
    -0.009520895,
    5.075161298,
    -0.138341947,
    -1.363729124,
    -0.403349276,
    0.702222016,
    -0.216195929,
    0.019547031,
];
// x >= 4 branch.
const C: [f64; 12] = [
    0.000000000,
    -0.024933975,
    0.000003936,
    0.005770956,
    0.000689892,
    -0.009497136,
    0.011948809,
    -0.006748873,
    0.000246420,
    0.002102967,
    -0.001217930,
    0.000233939,
];
const D: [f64; 12] = [
    0.199471140,
    0.000000023,
    -0.009351341,
    0.000023006,
    0.004851466,
    0.001903218,
    -0.017122914,
    0.029064067,
    -0.027928955,
    0.016497308,
    -0.005598515,
    0.000838386,
];

fn poly(re: &[f64; 12], im: &[f64; 12], z: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (0..12).rev() {
        acc = acc * z + Complex64::new(re[k], im[k]);
    }
    acc
}

/// Fast closed-form evaluation.
pub fn fresnel_integral(nu: f64) -> FresnelResult {
    if nu == 0.0 {
        return FresnelResult { c: 0.0, s: 0.0 };
    }
    let v = nu.abs();
    let x = core::f64::consts::FRAC_PI_2 * v * v;
    let (sx, cx) = math::sincos(x);
    // Boersma's series gives C - jS.
    let phase = Complex64::new(cx, -sx);
    let f = if x < 4.0 {
        phase * math::sqrt(x / 4.0) * poly(&A, &B, x / 4.0)
    } else {
        Complex64::new(0.5, -0.5) + phase * math::sqrt(4.0 / x) * poly(&C, &D, 4.0 / x)
    };
    let sign = nu.signum();
    FresnelResult {
        c: sign * f.re,
        s: -sign * f.im,
    }
}

/// Adaptive Simpson quadrature of the Fresnel integrand.
pub fn fresnel_quadrature(nu: f64, tolerance: f64) -> FresnelResult {
    if nu == 0.0 {
        return FresnelResult { c: 0.0, s: 0.0 };
    }
    let v = nu.abs();
    // Panels short enough that each spans well under one oscillation.
    let panels = (2.0 * v * v + 4.0) as usize;
    let h = v / panels as f64;
    let tol = tolerance / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..panels {
        let a = i as f64 * h;
        let b = if i + 1 == panels { v } else { a + h };
        let fa = integrand(a);
        let fb = integrand(b);
        let m = 0.5 * (a + b);
        let fm = integrand(m);
        let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
        sum += simpson(a, b, fa, fm, fb, whole, tol, 40);
    }
    let sign = nu.signum();
    FresnelResult {
        c: sign * sum.re,
        s: sign * sum.im,
    }
}

fn integrand(s: f64) -> Complex64 {
    let (sn, cs) = math::sincos(core::f64::consts::FRAC_PI_2 * s * s);
    Complex64::new(cs, sn)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = integrand(lm);
    let frm = integrand(rm);
    let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
    let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.re.abs().max(delta.im.abs()) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
