use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;

use geotime::config::ExperimentConfig;
use geotime::data::io::{decode_dataset, encode_dataset};
use geotime::data::TravelTimeDataset;
use geotime::distance::{boundary_distances, FanOptions};
use geotime::geodesic::GeodesicSolver;
use geotime::manifold::catalog::Preset;
use geotime::reconstruct::fit_cosphere;
use geotime::Point;

fn dataset(m: usize, vals: Vec<f64>) -> TravelTimeDataset {
    let u: Vec<f64> = (0..m).map(|j| j as f64 / m as f64).collect();
    let n = vals.len() / m;
    TravelTimeDataset::new(u, vals[..n * m].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dataset_bytes_round_trip(m in 1usize..8, vals in prop::collection::vec(0.0f64..5.0, 8..64)) {
        let ds = dataset(m, vals);
        let back = decode_dataset(&encode_dataset(&ds)).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn truncation_never_decodes(m in 1usize..6, vals in prop::collection::vec(0.0f64..5.0, 6..36), cut in 1usize..64) {
        let bytes = encode_dataset(&dataset(m, vals));
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_dataset(&bytes[..keep]).is_err());
    }

    #[test]
    fn sup_gap_is_a_metric(vals in prop::collection::vec(0.0f64..5.0, 12..13)) {
        let ds = dataset(4, vals);
        for a in 0..3 {
            prop_assert_eq!(ds.sup_gap(a, a), 0.0);
            for b in 0..3 {
                prop_assert_eq!(ds.sup_gap(a, b), ds.sup_gap(b, a));
                for c in 0..3 {
                    prop_assert!(ds.sup_gap(a, c) <= ds.sup_gap(a, b) + ds.sup_gap(b, c) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn cosphere_fit_recovers_metric(a in 0.5f64..3.0, b in 0.5f64..3.0, rot in 0.0f64..3.1, k in 6usize..20) {
        let r = Matrix2::new(rot.cos(), -rot.sin(), rot.sin(), rot.cos());
        let g = r * Matrix2::new(a, 0.0, 0.0, b) * r.transpose();
        let q = g.try_inverse().unwrap();
        let cov: Vec<Vector2<f64>> = (0..k)
            .map(|i| {
                let t = 1.4 * i as f64 / k as f64;
                let xi = Vector2::new(t.cos(), t.sin());
                xi / xi.dot(&(q * xi)).sqrt()
            })
            .collect();
        let fit = fit_cosphere(&cov).unwrap();
        prop_assert!((fit.g - g).norm() / g.norm() < 1e-8);
    }

    #[test]
    fn config_parser_rejects_without_panicking(body in "[a-z_. =0-9#\n-]{0,80}") {
        let _ = ExperimentConfig::parse(&format!("geotime-config v1\n{body}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn disk_boundary_times_are_euclidean(r in 0.0f64..0.9, phi in 0.0f64..std::f64::consts::TAU) {
        let (spec, domain) = Preset::Disk.build().unwrap();
        let solver = GeodesicSolver::new(&spec, &domain);
        let p = Point::new(r * phi.cos(), r * phi.sin());
        let targets: Vec<f64> = (0..12).map(|k| 0.5 * k as f64).collect();
        let d = boundary_distances(&solver, &p, &targets, &FanOptions::default()).unwrap();
        for (t, d) in targets.iter().zip(d) {
            let z = domain.curve.eval(*t).p;
            prop_assert!((d - (z - p).norm()).abs() < 1e-8, "{} vs {}", d, (z - p).norm());
        }
    }
}
