//! Infinite-space Poisson baseline.
//!
//! Nodes form a homogeneous Poisson field of intensity `λ` in all of R³, the
//! receiver sits at the origin and is served by its nearest node; every other
//! node interferes with the same fading and path-loss laws as the finite
//! network. The intensity is matched to a finite scenario as `λ = N/(πR²H)`.
//!
//! Writing `μ = (4/3)πλl³` and `v = u/l`, the log-Laplace transform of the
//! interference beyond `l` evaluated at `t = mβl^α` and its scaled derivatives
//! are all `μ` times constants:
//!
//! ```text
//! ln L_I(t|l)        = −3μ A_0,   A_0 = ∫_1^∞ v² [1 − (1 + x)^{−m}] dv
//! t^j ψ^{(j)}(t)/j!  = 3μ (−1)^j (m)_j/j! A_j,   A_j = ∫_1^∞ v² x^j (1 + x)^{−m−j} dv
//! ```
//!
//! with `x = β v^{−α}`. The coverage series is then `e^{−3μA_0}` times a
//! polynomial in `μ`, and since `μ` is Exp(1) under the nearest-neighbour law
//! the outer average is a finite sum of `n!/(1 + 3A_0)^{n+1}` terms. The
//! result does not depend on `λ`.
//!
//! For `α ≤ 3` the aggregate interference of a 3D field is almost surely
//! infinite and the coverage probability is 0.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::coverage::{CoverageResult, Method};
use crate::error::{Error, Result};
use crate::interference::analytic_m;
use crate::model::{ChannelModel, NetworkScenario};
use crate::par::{self, Execution};
use crate::quadrature::{integrate, QuadSettings};
use crate::simulation::{substream, FadingSampler, SimulationEstimate, Z_95};
use crate::special::rising_factorial;

const RADIAL_TOLERANCE: f64 = 1e-13;
const PPP_STREAMS: u64 = 1 << 61;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PppModel {
    lambda: f64,
    channel: ChannelModel,
    beta: f64,
}

impl PppModel {
    pub fn new(lambda: f64, channel: ChannelModel, beta: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::domain("intensity", format!("lambda = {lambda} must be > 0")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::domain("SIR threshold", format!("beta = {beta} must be > 0")));
        }
        Ok(PppModel { lambda, channel, beta })
    }

    /// Intensity-matched to the finite network: `λ = N/(πR²H)`.
    pub fn matched(scenario: &NetworkScenario) -> Self {
        PppModel {
            lambda: f64::from(scenario.nodes()) / scenario.geometry().volume(),
            channel: *scenario.channel(),
            beta: scenario.beta(),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `4πλl² e^{−(4/3)πλl³}`.
    pub fn serving_distance_pdf(&self, l: f64) -> f64 {
        if l < 0.0 {
            return 0.0;
        }
        4.0 * PI * self.lambda * l * l * (-4.0 / 3.0 * PI * self.lambda * l.powi(3)).exp()
    }
}

/// The radial constants `A_0 .. A_{m−1}` and the summed quadrature error.
fn radial_constants(alpha: f64, m: u32, beta: f64) -> (Vec<f64>, f64) {
    // s = v^{3−α} maps [1, ∞) onto (0, 1] and v² dv = v^α ds/(α−3) = (β/x) ds/(α−3)
    let q = alpha / (alpha - 3.0);
    let scale = beta / (alpha - 3.0);
    let mf = f64::from(m);
    let mut error = 0.0;
    let values = (0..m)
        .map(|j| {
            let integrand = |s: f64| {
                let x = beta * s.powf(q);
                if j == 0 {
                    // [1 − (1+x)^{−m}]/x, finite as x → 0
                    if x == 0.0 {
                        mf
                    } else {
                        -(-mf * x.ln_1p()).exp_m1() / x
                    }
                } else {
                    x.powi(j as i32 - 1) * (1.0 + x).powf(-mf - f64::from(j))
                }
            };
            let r = integrate(integrand, &[0.0, 1.0], QuadSettings::absolute(RADIAL_TOLERANCE), Execution::Sequential);
            error += scale * r.error;
            scale * r.value
        })
        .collect();
    (values, error)
}

/// Polynomials `(−1)^k P_k(μ)`, `k < m`, with `c_k = e^ψ P_k(μ)` the scaled Taylor coefficients.
fn series_polynomials(m: u32, a: &[f64]) -> Vec<Vec<f64>> {
    let mf = f64::from(m);
    // a_j = μ·w_j
    let w: Vec<f64> = (0..m as usize)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            3.0 * sign * rising_factorial(mf, j as u32) / factorial(j) * a[j]
        })
        .collect();
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 1..m as usize {
        let mut pk = vec![0.0; k + 1];
        for j in 1..=k {
            for (n, c) in p[k - j].iter().enumerate() {
                pk[n + 1] += j as f64 * w[j] * c / k as f64;
            }
        }
        p.push(pk);
    }
    p.into_iter()
        .enumerate()
        .map(|(k, pk)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            pk.into_iter().map(|c| sign * c).collect()
        })
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `P(SIR > β | L_s = l)` in the Poisson field.
pub fn ppp_conditional_coverage(l: f64, model: &PppModel) -> Result<f64> {
    let m = analytic_m(&model.channel)?;
    if l < 0.0 {
        return Err(Error::domain("serving distance", format!("l = {l} < 0")));
    }
    let alpha = model.channel.alpha();
    if alpha <= 3.0 {
        return Ok(0.0);
    }
    let (a, _) = radial_constants(alpha, m, model.beta);
    let mu = 4.0 / 3.0 * PI * model.lambda * l.powi(3);
    let poly_sum: f64 = series_polynomials(m, &a)
        .iter()
        .flat_map(|p| p.iter().enumerate())
        .map(|(n, c)| c * mu.powi(n as i32))
        .sum();
    Ok(((-3.0 * mu * a[0]).exp() * poly_sum).clamp(0.0, 1.0))
}

pub fn ppp_coverage(model: &PppModel) -> Result<CoverageResult> {
    let m = analytic_m(&model.channel)?;
    let done = |pc: f64, error_estimate| CoverageResult {
        pc: pc.clamp(0.0, 1.0),
        method: Method::PppBaseline,
        error_estimate,
        scenario: None,
        trials: None,
        seed: None,
    };
    let alpha = model.channel.alpha();
    if alpha <= 3.0 {
        return Ok(done(0.0, 0.0));
    }
    let (a, error) = radial_constants(alpha, m, model.beta);
    let s = 1.0 + 3.0 * a[0];
    // ∫_0^∞ μ^n e^{−sμ} dμ = n!/s^{n+1}
    let pc = series_polynomials(m, &a)
        .iter()
        .flat_map(|p| p.iter().enumerate())
        .map(|(n, c)| c * factorial(n) / s.powi(n as i32 + 1))
        .sum();
    Ok(done(pc, 3.0 * f64::from(m) * error))
}

/// Monte Carlo coverage of the Poisson field truncated to a ball of `radius`
/// around the receiver. Trials with no node in the ball count as not covered.
pub fn simulate_ppp_coverage(
    model: &PppModel,
    radius: f64,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<SimulationEstimate> {
    if trials == 0 {
        return Err(Error::domain("simulate_ppp_coverage", "trials must be >= 1"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::domain("simulate_ppp_coverage", format!("radius = {radius} must be > 0")));
    }
    let fading = FadingSampler::new(model.channel.m())?;
    let mean_count = model.lambda * 4.0 / 3.0 * PI * radius.powi(3);
    let count = Poisson::new(mean_count).map_err(|e| Error::domain("simulate_ppp_coverage", e.to_string()))?;
    let alpha = model.channel.alpha();
    let beta = model.beta;
    let successes = par::count_range(exec, trials, |trial| {
        let mut rng = substream(seed, PPP_STREAMS | trial);
        let k = count.sample(&mut rng) as u64;
        let mut serving = f64::INFINITY;
        let mut signal = 0.0;
        let mut interference = 0.0;
        for _ in 0..k {
            // isotropic field: only the distance to the origin matters
            let d = radius * rng.random::<f64>().cbrt();
            let power = fading.sample(&mut rng) * d.powf(-alpha);
            if d < serving {
                interference += signal;
                serving = d;
                signal = power;
            } else {
                interference += power;
            }
        }
        k > 0 && (interference == 0.0 || signal > beta * interference)
    });
    let p = successes as f64 / trials as f64;
    Ok(SimulationEstimate {
        mean: p,
        ci_half_width: Z_95 * (p * (1.0 - p) / trials as f64).sqrt(),
        successes,
        trials,
        seed,
        scenario: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CylinderGeometry;
    use crate::quadrature::integrate_simple;

    fn model(lambda: f64, alpha: f64, m: f64, beta: f64) -> PppModel {
        PppModel::new(lambda, ChannelModel::new(alpha, m).unwrap(), beta).unwrap()
    }

    #[test]
    fn rayleigh_closed_form() {
        // m = 1: pc = 1/(1 + 3 ∫_1^∞ v² β/(v^α + β) dv)
        let (alpha, beta) = (4.0, 1.0);
        let tail = integrate_simple(|y: f64| {
            let v = 1.0 / y;
            v * v * beta / (v.powf(alpha) + beta) / (y * y)
        }, 0.0, 1.0, 1e-14).value;
        let expect = 1.0 / (1.0 + 3.0 * tail);
        let got = ppp_coverage(&model(0.3, alpha, 1.0, beta)).unwrap().pc;
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn outer_sum_matches_quadrature() {
        let md = model(2.0, 4.5, 3.0, 0.5);
        let direct = integrate_simple(
            |l| md.serving_distance_pdf(l) * ppp_conditional_coverage(l, &md).unwrap(),
            0.0,
            3.0,
            1e-12,
        )
        .value;
        let closed = ppp_coverage(&md).unwrap().pc;
        assert!((direct - closed).abs() < 1e-8, "{direct} vs {closed}");
    }

    #[test]
    fn independent_of_intensity() {
        let a = ppp_coverage(&model(1e-6, 4.0, 2.0, 1.0)).unwrap().pc;
        let b = ppp_coverage(&model(1e3, 4.0, 2.0, 1.0)).unwrap().pc;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn vanishing_threshold_and_monotonicity() {
        assert!(ppp_coverage(&model(1.0, 4.0, 2.0, 1e-9)).unwrap().pc > 0.999);
        let mut prev = 1.0;
        for beta in [0.01, 0.1, 1.0, 10.0] {
            let pc = ppp_coverage(&model(1.0, 4.0, 2.0, beta)).unwrap().pc;
            assert!(pc < prev);
            prev = pc;
        }
        let mut prev = 0.0;
        for m in [1.0, 2.0, 3.0, 4.0, 5.0] {
            let pc = ppp_coverage(&model(1.0, 4.0, m, 1.0)).unwrap().pc;
            assert!(pc > prev);
            prev = pc;
        }
    }

    #[test]
    fn cubic_path_loss_has_no_coverage() {
        assert_eq!(ppp_coverage(&model(1.0, 3.0, 1.0, 1.0)).unwrap().pc, 0.0);
        assert!(ppp_coverage(&model(1.0, 3.05, 1.0, 1.0)).unwrap().pc < 0.1);
    }

    #[test]
    fn matched_intensity() {
        let g = CylinderGeometry::new(120.0, 20.0).unwrap();
        let s = NetworkScenario::new(10, g, ChannelModel::new(3.0, 1.0).unwrap(), 1.0).unwrap();
        let md = PppModel::matched(&s);
        assert!((md.lambda() - 10.0 / (PI * 120.0 * 120.0 * 20.0)).abs() < 1e-18);
        assert!(PppModel::new(0.0, *s.channel(), 1.0).is_err());
        assert!(ppp_coverage(&model(1.0, 4.0, 2.5, 1.0)).is_err());
    }

    #[test]
    fn serving_density_normalizes() {
        let md = model(0.7, 4.0, 1.0, 1.0);
        let total = integrate_simple(|l| md.serving_distance_pdf(l), 0.0, 5.0, 1e-13).value;
        assert!((total - 1.0).abs() < 1e-10);
    }
}
