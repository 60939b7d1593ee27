use std::sync::OnceLock;

use proptest::prelude::*;

use cylcov::coverage::conditional_coverage;
use cylcov::distance::{cylinder_pair_pdf_closed, cylinder_pair_pdf_numeric};
use cylcov::interference::laplace_with_derivatives;
use cylcov::model::{db_to_linear, linear_to_db, ChannelModel, CylinderGeometry, NetworkScenario};
use cylcov::special::{complete_e, complete_k, EllipticModulus};
use cylcov::tabulated::{build_cdf, TabulatedDistribution};

fn table() -> &'static TabulatedDistribution {
    static T: OnceLock<TabulatedDistribution> = OnceLock::new();
    T.get_or_init(|| build_cdf(&CylinderGeometry::new(40.0, 70.0).unwrap(), 512).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn db_round_trip(beta_db in -60.0f64..60.0) {
        let back = linear_to_db(db_to_linear(beta_db));
        prop_assert!((back - beta_db).abs() <= 1e-12);
        let beta = db_to_linear(beta_db);
        prop_assert!((db_to_linear(linear_to_db(beta)) - beta).abs() <= 1e-12 * beta);
    }

    #[test]
    fn closed_form_tracks_numeric(r in 1.0f64..200.0, h in 1.0f64..200.0, frac in 0.001f64..0.999) {
        let g = CylinderGeometry::new(r, h).unwrap();
        let l = frac * g.max_distance();
        let closed = cylinder_pair_pdf_closed(l, &g).unwrap();
        let numeric = cylinder_pair_pdf_numeric(l, &g);
        // densities scale as 1/length
        let scale = 1.0 / g.max_distance();
        prop_assert!((closed - numeric).abs() <= 1e-8 * scale, "{} vs {}", closed, numeric);
        prop_assert!(closed >= -1e-15);
    }

    #[test]
    fn legendre_relation(k in 0.01f64..0.99) {
        let kk = EllipticModulus::new(k).unwrap();
        let kp = EllipticModulus::new((1.0 - k * k).sqrt()).unwrap();
        let lhs = complete_e(kk) * complete_k(kp).unwrap() + complete_e(kp) * complete_k(kk).unwrap()
            - complete_k(kk).unwrap() * complete_k(kp).unwrap();
        prop_assert!((lhs - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_monotone_and_bounded(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let t = table();
        let (x, y) = (a.min(b) * t.max_distance(), a.max(b) * t.max_distance());
        prop_assert!(t.cdf(x) <= t.cdf(y));
        prop_assert!((0.0..=1.0).contains(&t.cdf(y)));
        prop_assert!(t.pdf(x) >= 0.0);
    }

    #[test]
    fn transform_is_completely_monotone(frac in 0.01f64..0.9, tau in 0.0f64..20.0, n in 3u32..25) {
        let t = table();
        let s = NetworkScenario::new(n, *t.geometry(), ChannelModel::new(3.0, 5.0).unwrap(), 1.0).unwrap();
        let l = frac * t.max_distance();
        let ev = laplace_with_derivatives(tau * l.powi(3) / 5.0, l, &s, t).unwrap();
        for (k, d) in ev.derivatives.iter().enumerate() {
            let signed = if k % 2 == 0 { *d } else { -*d };
            prop_assert!(signed >= -1e-15 * ev.derivatives[0].abs().max(1e-300), "k={}: {}", k, d);
        }
        prop_assert!(ev.value <= 1.0);
    }

    #[test]
    fn conditional_coverage_is_a_probability(frac in 0.0f64..0.95, m in 1u32..=5, beta_db in -20.0f64..20.0) {
        let t = table();
        let s = NetworkScenario::new(8, *t.geometry(), ChannelModel::new(3.5, f64::from(m)).unwrap(), db_to_linear(beta_db)).unwrap();
        let c = conditional_coverage(frac * t.max_distance(), &s, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }
}
