use std::f64::consts::PI;

use proptest::prelude::*;
use robin_rect::spectrum::{
    counting_function, eigenvalue, enumerate_band, enumerate_spectrum, multiplicity_scan, n_mult,
    spectrum_with_rank, MultTolerance, DEFAULT_RECORD_BUDGET,
};
use robin_rect::{Error, Real};

/// Every `(n, m)` in the box `n ≤ ⌈√Λ/π⌉ + 1`, `m ≤ ⌈L√Λ/π⌉ + 1` with `Λ ≤ cutoff`.
fn brute_force(l: f64, sigma: f64, cutoff: f64) -> Vec<(u32, u32, f64)> {
    let n_box = (cutoff.sqrt() / PI).ceil() as u32 + 1;
    let m_box = (l * cutoff.sqrt() / PI).ceil() as u32 + 1;
    let mut out = Vec::new();
    for n in 0..=n_box {
        for m in 0..=m_box {
            let r = eigenvalue(l, sigma, n, m).unwrap();
            if r.lambda <= cutoff {
                out.push((n, m, r.lambda));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_is_complete(l in 0.3f64..3.0, sigma in 0.0f64..20.0, cutoff in 1.0f64..3000.0) {
        let spec = enumerate_spectrum(l, sigma, cutoff).unwrap();
        let got: Vec<_> = spec.records.iter().map(|r| (r.n, r.m, r.lambda)).collect();
        prop_assert_eq!(got, brute_force(l, sigma, cutoff));
    }

    #[test]
    fn band_is_a_slice_of_the_full_spectrum(l in 0.5f64..2.0, sigma in 0.0f64..5.0, lo in 0.0f64..2000.0, width in 0.0f64..500.0) {
        let full = enumerate_spectrum(l, sigma, lo + width + 1.0).unwrap();
        let band = enumerate_band(l, sigma, lo, lo + width + 1.0, DEFAULT_RECORD_BUDGET).unwrap();
        let expected: Vec<_> = full.records.iter().filter(|r| r.lambda >= lo).cloned().collect();
        prop_assert_eq!(band.records, expected);
    }

    #[test]
    fn square_is_symmetric(sigma in 0.0f64..50.0, n in 0u32..300, m in 0u32..300) {
        let a = eigenvalue(1.0, sigma, n, m).unwrap().lambda;
        let b = eigenvalue(1.0, sigma, m, n).unwrap().lambda;
        prop_assert!((a - b).abs() <= 2.0 * f64::tol_secular() * (1.0 + a));
    }

    #[test]
    fn levels_increase_with_sigma(l in 0.3f64..3.0, s in 1e-3f64..50.0, ratio in 1.01f64..4.0, n in 0u32..200, m in 0u32..200) {
        let a = eigenvalue(l, s, n, m).unwrap().lambda;
        let b = eigenvalue(l, s * ratio, n, m).unwrap().lambda;
        prop_assert!(a < b);
        let z = eigenvalue(l, 0.0, n, m).unwrap().lambda;
        prop_assert!(z < a);
    }

    #[test]
    fn clusters_are_sound(l in prop_oneof![Just(1.0f64), 0.5f64..2.0], sigma in 0.0f64..2.0, tol in 1e-9f64..1e-3) {
        let spec = enumerate_spectrum(l, sigma, 2500.0).unwrap();
        let tol = MultTolerance::Absolute(tol);
        let clusters = multiplicity_scan(&spec, tol, false).unwrap();
        for c in &clusters {
            prop_assert!(c.members.len() >= 2);
            prop_assert!(c.spread <= (c.members.len() - 1) as f64 * tol.threshold(c.lambda_mean));
        }
        // adjacent levels share a cluster exactly when they are within tolerance
        let id: std::collections::HashMap<_, _> = clusters
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.members.iter().map(move |&p| (p, i)))
            .collect();
        for w in spec.records.windows(2) {
            let same = matches!(
                (id.get(&(w[0].n, w[0].m)), id.get(&(w[1].n, w[1].m))),
                (Some(a), Some(b)) if a == b
            );
            prop_assert_eq!(same, w[1].lambda - w[0].lambda <= tol.threshold(w[0].lambda));
        }
    }
}

#[test]
fn weyl_consistency() {
    for &l in &[1.0, 2f64.powf(0.25), 2.0] {
        let spec = enumerate_spectrum(l, 1.0, 2e5).unwrap();
        let rep = counting_function(&spec, 1e5).unwrap();
        let ratio = rep.count as f64 / (l * 1e5 / (4.0 * PI));
        assert!((ratio - 1.0).abs() < 0.02, "L = {l}: {ratio}");
        assert!(rep.relative_error.abs() < 0.02);
    }
}

#[test]
fn rank_spectrum_reaches_its_count() {
    let spec = spectrum_with_rank(0.7f64, 2.0, 12_345).unwrap();
    assert!(spec.len() >= 12_345);
    assert!(!spec.is_band());
}

#[test]
fn counting_outside_the_range_is_an_error() {
    let spec = enumerate_spectrum(1.0f64, 1.0, 100.0).unwrap();
    assert!(matches!(counting_function(&spec, 200.0), Err(Error::OutOfRange { .. })));
    let tol = MultTolerance::Relative(1e-9);
    assert!(matches!(n_mult(&spec, 200.0, tol, true), Err(Error::OutOfRange { .. })));
}

#[test]
fn neumann_square_multiplicities() {
    let spec = enumerate_spectrum(1.0f64, 0.0, 30.0 * PI * PI).unwrap();
    let tol = MultTolerance::Relative(1e-9);
    let clusters = multiplicity_scan(&spec, tol, true).unwrap();
    // 25 = 0² + 5² = 3² + 4² is the first mirror-free coincidence
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0].members, vec![(0, 5), (3, 4)]);
    assert_eq!(n_mult(&spec, 30.0 * PI * PI, tol, true).unwrap(), 2);
    assert!(multiplicity_scan(&enumerate_spectrum(1.5f64, 0.0, 100.0).unwrap(), tol, true).is_err());
}

#[test]
fn generic_over_single_precision() {
    let spec = enumerate_spectrum(1.0f32, 0.5, 500.0).unwrap();
    let wide = enumerate_spectrum(1.0f64, 0.5, 500.0).unwrap();
    assert_eq!(spec.len(), wide.len());
    for (a, b) in spec.records.iter().zip(&wide.records) {
        assert!(((a.lambda as f64) - b.lambda).abs() < 1e-3 * (1.0 + b.lambda));
    }
}
