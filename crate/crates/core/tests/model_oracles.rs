//! Monte Carlo oracles for the analytic chain.

use rand::Rng;

use cylcov::coverage::coverage_probability;
use cylcov::interference::laplace_with_derivatives;
use cylcov::model::{ChannelModel, CylinderGeometry, NetworkScenario};
use cylcov::par::{self, Execution};
use cylcov::ppp::{ppp_coverage, simulate_ppp_coverage, PppModel};
use cylcov::simulation::{ks_statistic, sample_pair_distances, simulate_independent_links, substream, FadingSampler};
use cylcov::tabulated::build_cdf;

fn scenario(n: u32, r: f64, h: f64, m: f64, beta: f64) -> NetworkScenario {
    let g = CylinderGeometry::new(r, h).unwrap();
    NetworkScenario::new(n, g, ChannelModel::new(3.0, m).unwrap(), beta).unwrap()
}

#[test]
fn pair_distances_follow_tabulated_cdf() {
    for (r, h) in [(50.0, 50.0), (10.0, 200.0)] {
        let g = CylinderGeometry::new(r, h).unwrap();
        let table = build_cdf(&g, 2048).unwrap();
        let n = 200_000;
        let mut xs = sample_pair_distances(&g, n, 11, Execution::default());
        let d = ks_statistic(&mut xs, |x| table.cdf(x));
        // 1% critical value
        assert!(d < 1.63 / (n as f64).sqrt(), "R={r} H={h}: D = {d}");
    }
}

/// Empirical `E[e^{−tI}]` and `E[−I e^{−tI}]` with interferer distances drawn
/// from `F_L` truncated to `[l, d_max]`.
fn conditioned_transform(s: &NetworkScenario, l: f64, t: f64, samples: u64) -> [(f64, f64); 2] {
    let table = build_cdf(s.geometry(), 2048).unwrap();
    let fading = FadingSampler::new(s.channel().m()).unwrap();
    let f_l = table.cdf(l);
    let alpha = s.channel().alpha();
    let draws = par::map_range(Execution::default(), samples as usize, |i| {
        let mut rng = substream(99, i as u64);
        let mut interference = 0.0;
        for _ in 0..s.interferers() {
            let u = table.quantile(f_l + rng.random::<f64>() * (1.0 - f_l));
            interference += fading.sample(&mut rng) * u.powf(-alpha);
        }
        let e = (-t * interference).exp();
        (e, -interference * e)
    });
    let n = samples as f64;
    let stats = |pick: fn(&(f64, f64)) -> f64| {
        let mean = draws.iter().map(pick).sum::<f64>() / n;
        let var = draws.iter().map(|d| (pick(d) - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    [stats(|d| d.0), stats(|d| d.1)]
}

#[test]
fn laplace_transform_matches_conditioned_deployments() {
    for (n, r, h) in [(5, 120.0, 20.0), (6, 20.0, 120.0)] {
        let s = scenario(n, r, h, 2.0, 1.0);
        let table = build_cdf(s.geometry(), 2048).unwrap();
        let l = 0.2 * s.geometry().max_distance();
        let t = 2.0 * l.powi(3);
        let ev = laplace_with_derivatives(t, l, &s, &table).unwrap();
        let [(v, v_se), (d, d_se)] = conditioned_transform(&s, l, t, 1_000_000);
        assert!((ev.value - v).abs() < 3.0 * v_se, "N={n}: {} vs {v} ± {v_se}", ev.value);
        assert!((ev.derivatives[1] - d).abs() < 3.0 * d_se, "N={n}: {} vs {d} ± {d_se}", ev.derivatives[1]);
    }
}

#[test]
fn analytic_matches_independent_link_simulation() {
    // The analytic chain treats the N − 1 receiver distances as independent;
    // simulating exactly that model must agree to sampling error.
    for (r, h) in [(120.0, 20.0), (20.0, 120.0)] {
        let table = build_cdf(&CylinderGeometry::new(r, h).unwrap(), 2048).unwrap();
        for (n, m, beta) in [(3, 1.0, 10.0), (3, 3.0, 1.0), (5, 2.0, 1.0), (10, 2.0, 0.1), (20, 3.0, 10.0)] {
            let s = scenario(n, r, h, m, beta);
            let a = coverage_probability(&s, &table).unwrap().pc;
            let e = simulate_independent_links(&s, 200_000, 3, Execution::default()).unwrap();
            assert!(
                (a - e.mean).abs() <= 4.0 * e.std_error() + 5e-4,
                "R={r} H={h} N={n} m={m} beta={beta}: {a} vs {} ± {}",
                e.mean,
                e.std_error()
            );
        }
    }
}

#[test]
fn coarse_grid_changes_coverage_little() {
    let s = scenario(10, 120.0, 20.0, 2.0, 1.0);
    let coarse = build_cdf(s.geometry(), 64).unwrap();
    let fine = build_cdf(s.geometry(), 2048).unwrap();
    let a = coverage_probability(&s, &coarse).unwrap().pc;
    let b = coverage_probability(&s, &fine).unwrap().pc;
    assert!((a - b).abs() <= 1e-3, "{a} vs {b}");
}

#[test]
fn poisson_baseline_matches_its_simulation() {
    // α = 6: interference from beyond radius 8 has mean 4π·8^{−3}/3 ≈ 0.008
    for m in [1.0, 2.0] {
        let model = PppModel::new(1.0, ChannelModel::new(6.0, m).unwrap(), 1.0).unwrap();
        let analytic = ppp_coverage(&model).unwrap().pc;
        let near = simulate_ppp_coverage(&model, 6.0, 20_000, 17, Execution::default()).unwrap();
        let far = simulate_ppp_coverage(&model, 8.0, 20_000, 17, Execution::default()).unwrap();
        assert!(
            (analytic - far.mean).abs() <= (3.0 * far.std_error()).max(0.01),
            "m={m}: {analytic} vs {}",
            far.mean
        );
        assert!((near.mean - far.mean).abs() <= 0.01);
    }
}
