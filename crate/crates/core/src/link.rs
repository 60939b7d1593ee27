//! Serving-link and interferer distance distributions.
//!
//! The receiver associates with the nearest of the other `N − 1` nodes. Its
//! distances to them are treated as i.i.d. draws from `F_L`, so the serving
//! distance is their minimum and, given the serving distance `l`, each of the
//! remaining `N − 2` interferer distances follows `F_L` truncated to `[l, d_max]`.

use crate::error::{Error, Result};
use crate::model::NetworkScenario;
use crate::tabulated::TabulatedDistribution;

/// Below this survival probability conditioning on `L_s = l` is refused.
pub const MIN_SURVIVAL: f64 = 1e-12;

pub(crate) fn check_table(scenario: &NetworkScenario, dist: &TabulatedDistribution) -> Result<()> {
    if scenario.geometry() != dist.geometry() {
        return Err(Error::domain(
            "distance table",
            format!(
                "table built for {:?}, scenario uses {:?}",
                dist.geometry(),
                scenario.geometry()
            ),
        ));
    }
    Ok(())
}

/// `f_Ls(l) = (N − 1) (1 − F_L(l))^{N−2} f_L(l)`.
pub fn serving_distance_pdf(l: f64, scenario: &NetworkScenario, dist: &TabulatedDistribution) -> Result<f64> {
    check_table(scenario, dist)?;
    Ok(serving_pdf_unchecked(l, scenario.nodes(), dist))
}

#[inline]
pub(crate) fn serving_pdf_unchecked(l: f64, nodes: u32, dist: &TabulatedDistribution) -> f64 {
    let f = dist.pdf(l);
    if f == 0.0 {
        return 0.0;
    }
    f64::from(nodes - 1) * dist.survival(l).powi(nodes as i32 - 2) * f
}

/// `P(L_s ≤ l) = 1 − (1 − F_L(l))^{N−1}`.
pub fn serving_distance_cdf(l: f64, nodes: u32, dist: &TabulatedDistribution) -> f64 {
    1.0 - dist.survival(l).powi(nodes as i32 - 1)
}

/// `f_{U|Ls}(u | l) = f_L(u) / (1 − F_L(l))` for `u ≥ l`, zero below.
pub fn conditional_interferer_pdf(u: f64, l: f64, dist: &TabulatedDistribution) -> Result<f64> {
    let survival = conditioning_survival(l, dist)?;
    if u < l {
        return Ok(0.0);
    }
    Ok(dist.pdf(u) / survival)
}

/// `1 − F_L(l)`, or the degenerate-condition error when it is too small to divide by.
pub fn conditioning_survival(l: f64, dist: &TabulatedDistribution) -> Result<f64> {
    if l.is_nan() || l < 0.0 {
        return Err(Error::domain("serving distance", format!("l = {l} < 0")));
    }
    let survival = dist.survival(l);
    if l >= dist.max_distance() || survival < MIN_SURVIVAL {
        return Err(Error::DegenerateCondition { l, survival });
    }
    Ok(survival)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelModel, CylinderGeometry};
    use crate::quadrature::{integrate, QuadSettings};
    use crate::par::Execution;
    use crate::tabulated::build_cdf;

    fn setup(n: u32, r: f64, h: f64) -> (NetworkScenario, TabulatedDistribution) {
        let g = CylinderGeometry::new(r, h).unwrap();
        let s = NetworkScenario::new(n, g, ChannelModel::new(3.0, 1.0).unwrap(), 1.0).unwrap();
        (s, build_cdf(&g, 2048).unwrap())
    }

    fn span(dist: &TabulatedDistribution, from: f64) -> Vec<f64> {
        let mut pts = vec![from];
        pts.extend(dist.geometry().regime_breaks().into_iter().filter(|&x| x > from));
        pts.push(dist.max_distance());
        pts
    }

    #[test]
    fn two_nodes_reduce_to_pair_density() {
        let (s, d) = setup(2, 20.0, 120.0);
        for i in 1..50 {
            let l = i as f64 * 2.5;
            assert_eq!(serving_distance_pdf(l, &s, &d).unwrap(), d.pdf(l));
        }
    }

    #[test]
    fn serving_density_normalizes() {
        let (s, d) = setup(10, 20.0, 120.0);
        let total = integrate(
            |l| serving_distance_pdf(l, &s, &d).unwrap(),
            &span(&d, 0.0),
            QuadSettings::absolute(1e-9),
            Execution::default(),
        );
        assert!((total.value - 1.0).abs() < 1e-5, "{}", total.value);
    }

    #[test]
    fn survival_consistency() {
        let (s, d) = setup(7, 120.0, 20.0);
        for frac in [0.05, 0.1, 0.2, 0.4] {
            let l = frac * d.max_distance();
            let tail = integrate(
                |x| serving_distance_pdf(x, &s, &d).unwrap(),
                &span(&d, l),
                QuadSettings::absolute(1e-10),
                Execution::default(),
            );
            assert!((tail.value - d.survival(l).powi(6)).abs() < 1e-5);
        }
    }

    #[test]
    fn conditional_density() {
        let (_, d) = setup(10, 120.0, 20.0);
        for i in 1..40 {
            let u = i as f64 * 6.0;
            assert_eq!(conditional_interferer_pdf(u, 0.0, &d).unwrap(), d.pdf(u));
        }
        let l = 0.3 * d.max_distance();
        assert_eq!(conditional_interferer_pdf(l * 0.5, l, &d).unwrap(), 0.0);
        let total = integrate(
            |u| conditional_interferer_pdf(u, l, &d).unwrap(),
            &span(&d, l),
            QuadSettings::absolute(1e-11),
            Execution::default(),
        );
        assert!((total.value - 1.0).abs() < 1e-6, "{}", total.value);
    }

    #[test]
    fn degenerate_conditioning() {
        let (_, d) = setup(10, 120.0, 20.0);
        assert!(matches!(
            conditional_interferer_pdf(1.0, d.max_distance(), &d),
            Err(Error::DegenerateCondition { .. })
        ));
        assert!(matches!(
            conditional_interferer_pdf(1.0, d.max_distance() * (1.0 - 1e-9), &d),
            Err(Error::DegenerateCondition { .. })
        ));
    }

    #[test]
    fn table_mismatch_is_rejected() {
        let (s, _) = setup(4, 20.0, 120.0);
        let other = build_cdf(&CylinderGeometry::new(20.0, 60.0).unwrap(), 64).unwrap();
        assert!(serving_distance_pdf(1.0, &s, &other).is_err());
    }

    #[test]
    fn more_nodes_shrink_the_serving_distance() {
        let (_, d) = setup(3, 50.0, 50.0);
        for i in 0..=200 {
            let l = d.max_distance() * i as f64 / 200.0;
            let mut prev = -1.0;
            for n in 2..30 {
                let c = serving_distance_cdf(l, n, &d);
                assert!(c >= prev);
                prev = c;
            }
        }
    }
}
