//! Elliptic integrals and the integer-shape Gamma tail.
//!
//! All elliptic integrals use the **modulus** convention: the integrand
//! contains `k² sin²θ`. Many references (and `scipy.special.ellipk`,
//! `mpmath.ellipk`) take the *parameter* `m = k²` instead, so
//! `complete_k(k) == ellipk(k * k)` in those libraries.
//!
//! Evaluation goes through Carlson's symmetric forms `R_F` and `R_D`
//! (duplication algorithm, B. C. Carlson, Numer. Algorithms 10, 1995):
//!
//! ```text
//! F(φ, k) = sin φ · R_F(cos²φ, 1 − k² sin²φ, 1)
//! E(φ, k) = F(φ, k) − (k²/3) sin³φ · R_D(cos²φ, 1 − k² sin²φ, 1)
//! ```

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Slack for arguments that leave their interval only through rounding.
pub const CLAMP_SLACK: f64 = 1e-12;

/// Elliptic modulus `k ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    /// Validates `k`, clamping excursions of at most [`CLAMP_SLACK`] back into `[0, 1]`.
    pub fn new(k: f64) -> Result<Self> {
        clamp_unit("elliptic modulus", k).map(EllipticModulus)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn clamp_unit(what: &'static str, x: f64) -> Result<f64> {
    if !x.is_finite() || x < -CLAMP_SLACK || x > 1.0 + CLAMP_SLACK {
        return Err(Error::domain(what, format!("{x} outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

fn clamp_amplitude(phi: f64) -> Result<f64> {
    if !phi.is_finite() || phi < -CLAMP_SLACK || phi > FRAC_PI_2 + CLAMP_SLACK {
        return Err(Error::domain(
            "elliptic amplitude",
            format!("{phi} outside [0, π/2]"),
        ));
    }
    Ok(phi.clamp(0.0, FRAC_PI_2))
}

/// Carlson's symmetric integral of the first kind,
/// `R_F(x,y,z) = ½∫₀^∞ dt / √((t+x)(t+y)(t+z))`.
///
/// Requires nonnegative arguments with at most one of them zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    debug_assert!(x >= 0.0 && y >= 0.0 && z >= 0.0);
    let (x0, y0) = (x, y);
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    let mut a = a0;
    let spread = (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut q = spread / (3.0 * f64::EPSILON).powf(1.0 / 6.0);
    let mut scale = 1.0;
    while q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        q *= 0.25;
        scale *= 0.25;
    }
    let dx = (a0 - x0) * scale / a;
    let dy = (a0 - y0) * scale / a;
    let dz = -dx - dy;
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}

/// Carlson's degenerate integral of the second kind,
/// `R_D(x,y,z) = 3/2 ∫₀^∞ dt / ((t+z) √((t+x)(t+y)(t+z)))`.
///
/// Requires `x, y ≥ 0` (not both zero) and `z > 0`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    debug_assert!(x >= 0.0 && y >= 0.0 && z > 0.0);
    let (x0, y0) = (x, y);
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + 3.0 * z) / 5.0;
    let mut a = a0;
    let spread = (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut q = spread / (0.25 * f64::EPSILON).powf(1.0 / 6.0);
    let mut scale = 1.0;
    let mut sum = 0.0;
    while q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        sum += scale / (sz * (z + lambda));
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = 0.25 * (a + lambda);
        q *= 0.25;
        scale *= 0.25;
    }
    let dx = (a0 - x0) * scale / a;
    let dy = (a0 - y0) * scale / a;
    let dz = -(dx + dy) / 3.0;
    let xy = dx * dy;
    let z2 = dz * dz;
    let e2 = xy - 6.0 * z2;
    let e3 = (3.0 * xy - 8.0 * z2) * dz;
    let e4 = 3.0 * (xy - z2) * z2;
    let e5 = xy * z2 * dz;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    scale * series / (a * a.sqrt()) + 3.0 * sum
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn complete_k(k: EllipticModulus) -> Result<f64> {
    let k = k.value();
    if k >= 1.0 {
        return Err(Error::domain("complete_k", "K diverges at k = 1"));
    }
    if k == 0.0 {
        return Ok(FRAC_PI_2);
    }
    Ok(carlson_rf(0.0, (1.0 - k) * (1.0 + k), 1.0))
}

/// Complete elliptic integral of the second kind `E(k)`.
pub fn complete_e(k: EllipticModulus) -> f64 {
    let k = k.value();
    if k == 0.0 {
        return FRAC_PI_2;
    }
    if k >= 1.0 {
        return 1.0;
    }
    let k2 = k * k;
    let kc2 = (1.0 - k) * (1.0 + k);
    carlson_rf(0.0, kc2, 1.0) - k2 / 3.0 * carlson_rd(0.0, kc2, 1.0)
}

/// Incomplete elliptic integral of the first kind `F(φ, k)`.
pub fn incomplete_f(phi: f64, k: EllipticModulus) -> Result<f64> {
    let phi = clamp_amplitude(phi)?;
    let k = k.value();
    if phi == 0.0 {
        return Ok(0.0);
    }
    if phi == FRAC_PI_2 {
        return complete_k(EllipticModulus(k));
    }
    let (s, c) = phi.sin_cos();
    let delta = (1.0 - k * s) * (1.0 + k * s);
    Ok(s * carlson_rf(c * c, delta, 1.0))
}

/// Incomplete elliptic integral of the second kind `E(φ, k)`.
pub fn incomplete_e(phi: f64, k: EllipticModulus) -> Result<f64> {
    let phi = clamp_amplitude(phi)?;
    let k = k.value();
    if phi == 0.0 {
        return Ok(0.0);
    }
    if phi == FRAC_PI_2 {
        return Ok(complete_e(EllipticModulus(k)));
    }
    let (s, c) = phi.sin_cos();
    let delta = (1.0 - k * s) * (1.0 + k * s);
    let c2 = c * c;
    Ok(s * carlson_rf(c2, delta, 1.0) - k * k / 3.0 * s * s * s * carlson_rd(c2, delta, 1.0))
}

/// Returns `m` as an integer if it is a positive whole number.
pub fn integer_shape(m: f64) -> Option<u32> {
    (m.is_finite() && m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64).then_some(m as u32)
}

/// `P(G > x)` for `G ~ Gamma(shape m, scale 1/m)` with integer `m`:
/// `e^{−mx} Σ_{k<m} (mx)^k / k!`.
pub fn gamma_tail_series(x: f64, m: f64) -> Result<f64> {
    let Some(shape) = integer_shape(m) else {
        return Err(Error::Unsupported(format!(
            "Gamma tail series needs a positive integer shape, got m = {m}"
        )));
    };
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("gamma_tail_series", format!("x = {x} < 0")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let y = m * x;
    let log_y = y.ln();
    // log-space terms keep e^{-y} from underflowing before the sum catches up
    let mut log_fact = 0.0;
    let mut total = 0.0;
    for k in 0..shape {
        if k > 0 {
            log_fact += f64::from(k).ln();
        }
        total += (f64::from(k) * log_y - y - log_fact).exp();
    }
    Ok(total.min(1.0))
}

/// Rising factorial `m (m+1) ··· (m+j−1) = Γ(m+j)/Γ(m)`.
pub fn rising_factorial(m: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m + f64::from(i)))
}
