//! Conditional Laplace transform of the aggregate interference and its
//! `t`-derivatives.
//!
//! Given the serving distance `l`, each of the `N − 2` interferers contributes
//! `G·U^{−α}` with `G ~ Gamma(m, 1/m)` and `U ~ f_{U|Ls}(·|l)`, independently.
//! Averaging `e^{−tGw}` over `G` gives `(1 + tw/m)^{−m}`, hence
//!
//! ```text
//! g(t|l)     = ∫_l^{d_max} (1 + t u^{−α}/m)^{−m} f_{U|Ls}(u|l) du
//! g^{(j)}    = (−1)^j m^{(j)} ∫ (u^{−α}/m)^j (1 + t u^{−α}/m)^{−m−j} f_{U|Ls} du
//! L_I(t|l)   = g(t|l)^{N−2}
//! ```
//!
//! with `m^{(j)} = Γ(m+j)/Γ(m)`. The derivatives of the power are assembled
//! exactly from those of `g` through the power-series recurrence for `g^n`
//! (equivalent to Faà di Bruno's formula): with Taylor coefficients
//! `a_j = g^{(j)}/j!` and `b_k = L^{(k)}/k!`,
//! `k a_0 b_k = Σ_{j=1..k} ((n+1) j − k) a_j b_{k−j}`.
//!
//! The `u`-integral is a composite 8-point Gauss–Legendre rule aligned with
//! the knots of the [`TabulatedDistribution`], on which the interpolated
//! density is a quadratic, so the result is a smooth function of `t`.

use crate::error::{Error, Result};
use crate::link::{check_table, conditioning_survival};
use crate::model::{ChannelModel, NetworkScenario};
use crate::quadrature::for_each_gl8_node;
use crate::special::rising_factorial;
use crate::tabulated::TabulatedDistribution;

/// Largest Nakagami `m` handled by the analytic path.
pub const MAX_ANALYTIC_M: u32 = 5;

/// `L_I(t|l)` and its first `m` derivatives in `t` (index 0 is the value).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceEvaluation {
    pub t: f64,
    pub value: f64,
    pub derivatives: Vec<f64>,
}

impl LaplaceEvaluation {
    /// `Σ_{k<m} (−t)^k / k! · L^{(k)}(t)`, the conditional coverage series.
    pub fn coverage_series(&self) -> f64 {
        let mut factor = 1.0;
        let mut sum = 0.0;
        for (k, d) in self.derivatives.iter().enumerate() {
            if k > 0 {
                factor *= -self.t / k as f64;
            }
            sum += factor * d;
        }
        sum
    }
}

/// Returns the integer `m` if the analytic path supports this channel.
pub fn analytic_m(channel: &ChannelModel) -> Result<u32> {
    match channel.integer_m() {
        Some(m) if m <= MAX_ANALYTIC_M => Ok(m),
        _ => Err(Error::Unsupported(format!(
            "analytic coverage needs integer m in [1, {MAX_ANALYTIC_M}], got m = {}; use the Monte Carlo path",
            channel.m()
        ))),
    }
}

/// Precomputed quadrature nodes of the tabulated density for one path-loss exponent.
#[derive(Debug, Clone)]
pub struct InterferenceKernel<'a> {
    dist: &'a TabulatedDistribution,
    alpha: f64,
    /// `u^{−α}` at each node.
    path_gain: Vec<f64>,
    /// quadrature weight times `f_L(u)` at each node.
    weight: Vec<f64>,
}

const NODES_PER_INTERVAL: usize = 8;

impl<'a> InterferenceKernel<'a> {
    pub fn new(dist: &'a TabulatedDistribution, alpha: f64) -> Self {
        let knots = dist.knots();
        let n = (knots.len() - 1) * NODES_PER_INTERVAL;
        let mut path_gain = Vec::with_capacity(n);
        let mut weight = Vec::with_capacity(n);
        for w in knots.windows(2) {
            for_each_gl8_node(w[0], w[1], |u, wq| {
                path_gain.push(u.powf(-alpha));
                weight.push(wq * dist.pdf(u));
            });
        }
        InterferenceKernel {
            dist,
            alpha,
            path_gain,
            weight,
        }
    }

    pub fn distribution(&self) -> &TabulatedDistribution {
        self.dist
    }

    /// `g^{(j)}(t|l)` for `j = 0..orders`, written into `out[..orders]`.
    ///
    /// The integral runs over `[l, d_max]`; the density vanishes beyond `d_max`.
    pub fn inner_integrals(&self, t: f64, l: f64, m: u32, orders: usize, out: &mut [f64]) -> Result<()> {
        let survival = conditioning_survival(l, self.dist)?;
        let mf = f64::from(m);
        let coef: Vec<f64> = (0..orders)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * rising_factorial(mf, j as u32)
            })
            .collect();
        let acc = &mut out[..orders];
        acc.fill(0.0);
        // acc[0] collects ∫ ((1 + x)^{−m} − 1) f_L, so that g = 1 + acc[0]/S
        // stays exact at t = 0 and smooth in t when x = t u^{−α}/m is tiny.
        let mut add = |w: f64, weight: f64| {
            let x = t * w / mf;
            let base = 1.0 + x;
            let inv_pow = base.powi(-(m as i32));
            let deviation = if x < 1e-3 {
                (-mf * x.ln_1p()).exp_m1()
            } else {
                inv_pow - 1.0
            };
            acc[0] += weight * deviation;
            let ratio = w / (mf * base);
            let mut term = weight * inv_pow;
            for a in acc[1..].iter_mut() {
                term *= ratio;
                *a += term;
            }
        };
        let i0 = self.dist.interval_of(l);
        let next_knot = self.dist.knots()[i0 + 1];
        if next_knot > l {
            for_each_gl8_node(l, next_knot, |u, wq| add(u.powf(-self.alpha), wq * self.dist.pdf(u)));
        }
        let start = (i0 + 1) * NODES_PER_INTERVAL;
        for (&w, &weight) in self.path_gain[start..].iter().zip(&self.weight[start..]) {
            add(w, weight);
        }
        for (a, c) in out[..orders].iter_mut().zip(&coef) {
            *a *= c / survival;
        }
        out[0] += 1.0;
        Ok(())
    }

    /// `L_I(t|l) = g^{N−2}` with its first `m` derivatives.
    pub fn laplace(&self, t: f64, l: f64, interferers: u32, m: u32) -> Result<LaplaceEvaluation> {
        let orders = m as usize;
        if interferers == 0 {
            let mut derivatives = vec![0.0; orders];
            derivatives[0] = 1.0;
            return Ok(LaplaceEvaluation {
                t,
                value: 1.0,
                derivatives,
            });
        }
        let mut g = [0.0; MAX_ANALYTIC_M as usize];
        self.inner_integrals(t, l, m, orders, &mut g)?;
        let derivatives = power_derivatives(&g[..orders], f64::from(interferers));
        Ok(LaplaceEvaluation {
            t,
            value: derivatives[0],
            derivatives,
        })
    }
}

/// Derivatives of `g(t)^n` from those of `g` (both including order 0).
pub fn power_derivatives(g: &[f64], n: f64) -> Vec<f64> {
    let orders = g.len();
    let mut a = Vec::with_capacity(orders);
    let mut fact = 1.0;
    for (j, gj) in g.iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        a.push(gj / fact);
    }
    let mut b = vec![0.0; orders];
    b[0] = a[0].powf(n);
    for k in 1..orders {
        let kf = k as f64;
        let s: f64 = (1..=k)
            .map(|j| ((n + 1.0) * j as f64 - kf) * a[j] * b[k - j])
            .sum();
        b[k] = s / (kf * a[0]);
    }
    let mut fact = 1.0;
    for (k, bk) in b.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *bk *= fact;
    }
    b
}

/// `g^{(j)}(t|l)`: the `j`-th `t`-derivative of the single-interferer transform.
pub fn inner_integral(
    t: f64,
    l: f64,
    j: u32,
    scenario: &NetworkScenario,
    dist: &TabulatedDistribution,
) -> Result<f64> {
    check_table(scenario, dist)?;
    let m = analytic_m(scenario.channel())?;
    if j >= m {
        return Err(Error::domain("inner_integral", format!("derivative order {j} >= m = {m}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain("inner_integral", format!("t = {t} < 0")));
    }
    let kernel = InterferenceKernel::new(dist, scenario.channel().alpha());
    let mut out = [0.0; MAX_ANALYTIC_M as usize];
    kernel.inner_integrals(t, l, m, j as usize + 1, &mut out)?;
    Ok(out[j as usize])
}

/// `L_I(t|l)` and its derivatives up to order `m − 1`.
pub fn laplace_with_derivatives(
    t: f64,
    l: f64,
    scenario: &NetworkScenario,
    dist: &TabulatedDistribution,
) -> Result<LaplaceEvaluation> {
    check_table(scenario, dist)?;
    let m = analytic_m(scenario.channel())?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::domain("laplace_with_derivatives", format!("t = {t} < 0")));
    }
    InterferenceKernel::new(dist, scenario.channel().alpha()).laplace(t, l, scenario.interferers(), m)
}
