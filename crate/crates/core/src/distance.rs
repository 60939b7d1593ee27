//! Distribution of the distance between two uniform random points in a
//! cylinder.
//!
//! The horizontal separation `D_xy` (two points in a disk of radius `R`) and
//! the vertical separation `D_z` (two points on a segment of length `H`) are
//! independent, and `L² = D_xy² + D_z²`. Conditioning on the vertical
//! separation `z` gives
//!
//! ```text
//! f_L(l) = ∫ f_Dz(z) · f_Dxy(√(l² − z²)) · l / √(l² − z²) dz
//!        = 8l / (π R² H²) ∫ (H − z) · φ(√(l² − z²)) dz,
//! φ(v)   = arccos(v/2R) − (v/2R) √(1 − (v/2R)²),
//! ```
//!
//! over `max(0, l² − 4R²) ≤ z² ≤ min(l², H²)`. This is the squared-variable
//! convolution `2l ∫ f_XY(r) f_Z(l² − r) dr` after the substitution
//! `z = √(l² − r)`, which removes the `1/√z` endpoint singularity of `f_Z`.
//! [`cylinder_pair_pdf_numeric`] evaluates it by adaptive quadrature in the
//! angle `z = l sin θ`, where the integrand is smooth.
//!
//! [`cylinder_pair_pdf_closed`] evaluates the four-regime elliptic-integral
//! closed form. The first regime's bracket reads
//! `32l/(3πRH) · [(1 − l²/4R²) K(l/2R) − (1 + l²/4R²) E(l/2R)]`; the
//! alternative grouping with the `E` term outside the prefactor does not
//! integrate to one (see the regression test below).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::CylinderGeometry;
use crate::quadrature::{integrate, QuadSettings};
use crate::par::Execution;
use crate::special::{complete_e, complete_k, incomplete_e, incomplete_f, EllipticModulus};

/// Absolute accuracy requested from the numeric convolution.
pub const NUMERIC_PDF_TOL: f64 = 1e-12;

/// Density of the distance between two uniform points in a disk of radius `radius`.
pub fn disk_pair_pdf(v: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || v.is_nan() || v < 0.0 {
        return Err(Error::domain("disk_pair_pdf", format!("v = {v}, R = {radius}")));
    }
    if v >= 2.0 * radius {
        return Ok(0.0);
    }
    Ok(4.0 * v / (PI * radius * radius) * lens(v / (2.0 * radius)))
}

/// Density of the distance between two uniform points on a segment of length `height`.
pub fn segment_pair_pdf(z: f64, height: f64) -> Result<f64> {
    if !(height > 0.0) || z.is_nan() || z < 0.0 {
        return Err(Error::domain("segment_pair_pdf", format!("z = {z}, H = {height}")));
    }
    if z >= height {
        return Ok(0.0);
    }
    Ok(2.0 * (height - z) / (height * height))
}

/// `arccos x − x √(1 − x²)` for `x ∈ [0, 1]`, zero beyond.
#[inline]
fn lens(x: f64) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    x.acos() - x * ((1.0 - x) * (1.0 + x)).sqrt()
}

#[inline]
fn sqrt0(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

/// Inter-point distance density by numeric convolution of the horizontal
/// and vertical components.
pub fn cylinder_pair_pdf_numeric(l: f64, geom: &CylinderGeometry) -> f64 {
    let (r, h) = (geom.radius(), geom.height());
    if !(l > 0.0) || l >= geom.max_distance() {
        return 0.0;
    }
    let z_lo = sqrt0(l * l - 4.0 * r * r);
    let z_hi = l.min(h);
    if z_lo >= z_hi {
        return 0.0;
    }
    let theta_lo = (z_lo / l).min(1.0).asin();
    let theta_hi = (z_hi / l).min(1.0).asin();
    let two_r = 2.0 * r;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        (h - l * s) * lens(l * c / two_r) * l * c
    };
    let prefactor = 8.0 * l / (PI * r * r * h * h);
    let settings = QuadSettings {
        abs_tol: NUMERIC_PDF_TOL / prefactor,
        rel_tol: 1e-14,
        max_panels: 200,
    };
    let inner = integrate(integrand, &[theta_lo, theta_hi], settings, Execution::Sequential);
    (prefactor * inner.value).max(0.0)
}

/// Which analytic branch of the closed form applies at a distance `l`.
///
/// Exact boundaries `l = 2R` and `l = H` belong to the "≤" side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceRegime {
    /// `l ≤ 2R` and `l ≤ H`.
    WithinBoth,
    /// `2R < l ≤ H`.
    BeyondDiameter,
    /// `l ≤ 2R` and `H < l`.
    BeyondHeight,
    /// `2R < l` and `H < l`.
    BeyondBoth,
}

impl DistanceRegime {
    pub fn of(l: f64, geom: &CylinderGeometry) -> Self {
        let within_diameter = l <= 2.0 * geom.radius();
        let within_height = l <= geom.height();
        match (within_diameter, within_height) {
            (true, true) => DistanceRegime::WithinBoth,
            (false, true) => DistanceRegime::BeyondDiameter,
            (true, false) => DistanceRegime::BeyondHeight,
            (false, false) => DistanceRegime::BeyondBoth,
        }
    }

    pub const ALL: [DistanceRegime; 4] = [
        DistanceRegime::WithinBoth,
        DistanceRegime::BeyondDiameter,
        DistanceRegime::BeyondHeight,
        DistanceRegime::BeyondBoth,
    ];
}

/// Inter-point distance density from the closed-form elliptic-integral expression.
///
/// Returns 0 outside `(0, d_max)`.
pub fn cylinder_pair_pdf_closed(l: f64, geom: &CylinderGeometry) -> Result<f64> {
    if !(l > 0.0) || l >= geom.max_distance() {
        return Ok(0.0);
    }
    let (r, h) = (geom.radius(), geom.height());
    let v = match DistanceRegime::of(l, geom) {
        DistanceRegime::WithinBoth => closed_within_both(l, r, h)?,
        DistanceRegime::BeyondDiameter => closed_beyond_diameter(l, r, h)?,
        DistanceRegime::BeyondHeight => closed_beyond_height(l, r, h)?,
        DistanceRegime::BeyondBoth => closed_beyond_both(l, r, h)?,
    };
    Ok(v.max(0.0))
}

/// `coef · K(k)`, taking the limit 0 when `coef` vanishes at `k = 1`.
fn weighted_k(coef: f64, k: EllipticModulus) -> Result<f64> {
    if coef == 0.0 {
        return Ok(0.0);
    }
    Ok(coef * complete_k(k)?)
}

/// `coef · (K(k) − F(φ, k))`, with the same convention at `k = 1`.
fn weighted_k_tail(coef: f64, phi: f64, k: EllipticModulus) -> Result<f64> {
    if coef == 0.0 {
        return Ok(0.0);
    }
    Ok(coef * (complete_k(k)? - incomplete_f(phi, k)?))
}

fn closed_within_both(l: f64, r: f64, h: f64) -> Result<f64> {
    let (l2, r2, h2) = (l * l, r * r, h * h);
    let k = EllipticModulus::new(l / (2.0 * r))?;
    let q = l2 / (4.0 * r2);
    let elementary = 2.0 * l2 * (2.0 * h - l) / (r2 * h2)
        + l2 * (l2 + 2.0 * r2) * sqrt0(4.0 * r2 - l2) / (2.0 * PI * r2 * r2 * h2)
        + 4.0 * l * (l2 - r2) / (PI * r2 * h2) * k.value().asin();
    let elliptic = weighted_k(1.0 - q, k)? - (1.0 + q) * complete_e(k);
    Ok(elementary + 32.0 * l / (3.0 * PI * r * h) * elliptic)
}

fn closed_beyond_diameter(l: f64, r: f64, h: f64) -> Result<f64> {
    let (l2, r2, h2) = (l * l, r * r, h * h);
    let k = EllipticModulus::new(2.0 * r / l)?;
    let scale = 4.0 * l2 / (3.0 * PI * r2 * r2 * h);
    Ok(4.0 * l2 / (r2 * h) - 2.0 * l / h2 + scale * (l2 - 4.0 * r2) * complete_k(k)?
        - scale * (l2 + 4.0 * r2) * complete_e(k))
}

fn closed_beyond_height(l: f64, r: f64, h: f64) -> Result<f64> {
    let (l2, r2, h2) = (l * l, r * r, h * h);
    let r4 = r2 * r2;
    let k = EllipticModulus::new(l / (2.0 * r))?;
    let p = sqrt0(l2 - h2);
    let p2 = l2 - h2;
    // √((l² − H²)(4R² − l² + H²))
    let s = p * sqrt0(4.0 * r2 - p2);
    let acos_p = clamp_unit(p / (2.0 * r)).acos();
    // arccos(H/l) and arcsin(√(l²−H²)/l) name the same amplitude
    let amp_cos = clamp_unit(h / l).acos();
    let amp_sin = clamp_unit(p / l).asin();

    let a3_coef = l2 / (2.0 * r) - 2.0 * r;
    let a3 = weighted_k_tail(a3_coef, amp_cos, k)?;
    let b3 = complete_e(k) - incomplete_e(amp_cos, k)?;
    let c3 = complete_e(k) - incomplete_e(amp_sin, k)?;
    let d3 = weighted_k_tail(1.0 - l2 / (4.0 * r2), amp_sin, k)?;

    let t1 = 8.0 * l / (PI * r2 * h) * (h * acos_p - a3 - 2.0 * r * b3);
    let t2 = -4.0 * l / (PI * r2 * h2)
        * ((l2 - 2.0 * r2) * clamp_unit(l / (2.0 * r)).acos() - (p2 - 2.0 * r2) * acos_p
            - l * sqrt0(4.0 * r2 - l2) / 2.0
            + s / 2.0);
    let t3 = -16.0 * l / (3.0 * PI * r * h)
        * ((l2 / (2.0 * r2) - 1.0) * c3 + d3 + h * s / (8.0 * r2 * r));
    let t4 = 2.0 * l / (PI * h2)
        * (clamp_signed(l2 / (2.0 * r2) - 1.0).asin() - clamp_signed((p2 - 2.0 * r2) / (2.0 * r2)).asin())
        + l / (PI * r4 * h2)
            * (l * (l2 - 2.0 * r2) / 2.0 * sqrt0(4.0 * r2 - l2) - (p2 - 2.0 * r2) / 2.0 * s);
    Ok(t1 + t2 + t3 + t4)
}

fn closed_beyond_both(l: f64, r: f64, h: f64) -> Result<f64> {
    let (l2, r2, h2) = (l * l, r * r, h * h);
    let r4 = r2 * r2;
    let k = EllipticModulus::new(2.0 * r / l)?;
    let p = sqrt0(l2 - h2);
    let s = p * sqrt0(4.0 * r2 - p * p);
    let x = clamp_unit(p / (2.0 * r));
    let amp = x.asin();
    let a4 = complete_k(k)? - incomplete_f(amp, k)?;
    let b4 = complete_e(k) - incomplete_e(amp, k)?;
    Ok(-l * (3.0 * l2 + 6.0 * r2 + h2) / (6.0 * PI * r4 * h2) * s
        + 4.0 * l * (l2 + h2) / (PI * r2 * h2) * x.acos()
        - 2.0 * l / h2
        + 4.0 * l / (PI * h2) * amp
        - 4.0 * l2 * (4.0 * r2 - l2) / (3.0 * PI * h * r4) * a4
        - 4.0 * l2 * (l2 + 4.0 * r2) / (3.0 * PI * h * r4) * b4)
}

#[inline]
fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

#[inline]
fn clamp_signed(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}
