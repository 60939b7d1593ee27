//! Coverage probability of the typical receiver.
//!
//! Conditioned on the serving distance `l`, the serving gain must beat
//! `β l^α I`. For integer `m` the Gamma tail is a finite series, and
//! `E[I^k e^{−tI}] = (−1)^k L_I^{(k)}(t)` turns it into
//!
//! ```text
//! P(SIR > β | l) = Σ_{k<m} (−t)^k / k! · L_I^{(k)}(t|l),   t = m β l^α,
//! ```
//!
//! which is then averaged over the serving-distance density on `[0, d_max]`.

use std::fmt;

use crate::error::Result;
use crate::interference::{analytic_m, InterferenceKernel};
use crate::link::{check_table, serving_pdf_unchecked, MIN_SURVIVAL};
use crate::model::NetworkScenario;
use crate::par::Execution;
use crate::quadrature::{integrate, QuadSettings};
use crate::tabulated::TabulatedDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic,
    MonteCarlo,
    PppBaseline,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
            Method::PppBaseline => "ppp-baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub pc: f64,
    pub method: Method,
    /// Quadrature error bound (analytic, ppp) or 95% half-width (Monte Carlo).
    pub error_estimate: f64,
    pub scenario: Option<NetworkScenario>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

/// Requested accuracy of the outer integral over the serving distance.
pub const OUTER_TOLERANCE: f64 = 1e-6;

/// `P(SIR > β | L_s = l)`.
pub fn conditional_coverage(l: f64, scenario: &NetworkScenario, dist: &TabulatedDistribution) -> Result<f64> {
    check_table(scenario, dist)?;
    if scenario.interferers() == 0 {
        return Ok(1.0);
    }
    let m = analytic_m(scenario.channel())?;
    let kernel = InterferenceKernel::new(dist, scenario.channel().alpha());
    conditional_with_kernel(&kernel, l, scenario, m)
}

fn conditional_with_kernel(kernel: &InterferenceKernel<'_>, l: f64, scenario: &NetworkScenario, m: u32) -> Result<f64> {
    let t = f64::from(m) * scenario.beta() * l.powf(scenario.channel().alpha());
    let ev = kernel.laplace(t, l, scenario.interferers(), m)?;
    Ok(ev.coverage_series().clamp(0.0, 1.0))
}

pub fn coverage_probability(scenario: &NetworkScenario, dist: &TabulatedDistribution) -> Result<CoverageResult> {
    coverage_probability_with(scenario, dist, Execution::default())
}

/// Coverage probability by adaptive quadrature over the serving distance.
///
/// The integrand is forced to zero where `1 − F_L(l)` has underflowed.
pub fn coverage_probability_with(
    scenario: &NetworkScenario,
    dist: &TabulatedDistribution,
    exec: Execution,
) -> Result<CoverageResult> {
    check_table(scenario, dist)?;
    let done = |pc, error_estimate| CoverageResult {
        pc,
        method: Method::Analytic,
        error_estimate,
        scenario: Some(*scenario),
        trials: None,
        seed: None,
    };
    if scenario.interferers() == 0 {
        return Ok(done(1.0, 0.0));
    }
    let m = analytic_m(scenario.channel())?;
    let kernel = InterferenceKernel::new(dist, scenario.channel().alpha());
    let nodes = scenario.nodes();
    let integrand = |l: f64| {
        if dist.survival(l) < MIN_SURVIVAL {
            return 0.0;
        }
        let weight = serving_pdf_unchecked(l, nodes, dist);
        if weight == 0.0 {
            return 0.0;
        }
        conditional_with_kernel(&kernel, l, scenario, m).map_or(0.0, |c| c * weight)
    };
    let mut points = vec![0.0];
    points.extend(dist.geometry().regime_breaks());
    points.push(dist.max_distance());
    let settings = QuadSettings {
        abs_tol: OUTER_TOLERANCE,
        rel_tol: 0.0,
        max_panels: 400,
    };
    let integral = integrate(integrand, &points, settings, exec);
    Ok(done(integral.value.clamp(0.0, 1.0), integral.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::laplace_with_derivatives;
    use crate::model::{ChannelModel, CylinderGeometry};
    use crate::tabulated::build_cdf;

    fn setup(n: u32, r: f64, h: f64, m: f64, beta: f64) -> (NetworkScenario, TabulatedDistribution) {
        let g = CylinderGeometry::new(r, h).unwrap();
        let s = NetworkScenario::new(n, g, ChannelModel::new(3.0, m).unwrap(), beta).unwrap();
        (s, build_cdf(&g, 1024).unwrap())
    }

    #[test]
    fn rayleigh_is_the_bare_transform() {
        let (s, d) = setup(8, 20.0, 120.0, 1.0, 0.7);
        let l: f64 = 9.0;
        let t = 0.7 * l.powi(3);
        let lt = laplace_with_derivatives(t, l, &s, &d).unwrap().value;
        assert!((conditional_coverage(l, &s, &d).unwrap() - lt).abs() < 1e-15);
    }

    #[test]
    fn tiny_argument_is_covered() {
        let (s, d) = setup(8, 20.0, 120.0, 3.0, 1.0);
        // t = 3 l³ ≤ 1e-12
        let l = (1e-12f64 / 3.0).cbrt();
        assert!((conditional_coverage(l, &s, &d).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_nodes_always_covered() {
        let (s, d) = setup(2, 120.0, 20.0, 2.0, 100.0);
        assert_eq!(conditional_coverage(50.0, &s, &d).unwrap(), 1.0);
        assert_eq!(coverage_probability(&s, &d).unwrap().pc, 1.0);
    }

    #[test]
    fn vanishing_threshold() {
        let (s, d) = setup(10, 20.0, 120.0, 2.0, 1e-9);
        let r = coverage_probability(&s, &d).unwrap();
        assert!(r.pc > 1.0 - 1e-3, "{}", r.pc);
        assert!(r.error_estimate <= 1e-4);
    }

    #[test]
    fn monotone_in_beta() {
        let mut prev = 1.0;
        for beta in [0.01, 0.1, 1.0, 10.0] {
            let (s, d) = setup(10, 20.0, 120.0, 2.0, beta);
            let pc = coverage_probability(&s, &d).unwrap().pc;
            assert!(pc <= prev, "beta={beta}: {pc} > {prev}");
            prev = pc;
        }
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let (s, d) = setup(6, 50.0, 50.0, 2.0, 1.0);
        let a = coverage_probability_with(&s, &d, Execution::Sequential).unwrap();
        let b = coverage_probability_with(&s, &d, Execution::default()).unwrap();
        assert_eq!(a.pc.to_bits(), b.pc.to_bits());
    }
}
