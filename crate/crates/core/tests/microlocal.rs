mod common;

use common::gl_integrate;
use num_complex::Complex64;
use paqft_core::eg_renorm::{pair_probe, parse_distribution, Probe};
use paqft_core::lattice::{Lattice1p1, PropagatorSet};
use paqft_core::microlocal::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn symbolic(s: &str) -> SampledDistribution {
    SampledDistribution::Symbolic(parse_distribution(s).unwrap())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn wave_packet_pairing_matches_principal_value_oracle() {
    let t = parse_distribution("xpi0(-1)").unwrap();
    for (centre, k) in [(0.02, -60.0), (-0.05, 35.0), (0.1, -300.0)] {
        let g = GaussExp::new(centre, 0.05, k, 6.0);
        let v = pair_probe(&t, &g, true).unwrap();
        let reach = centre.abs() + 0.3;
        let n = 4000;
        let pts: Vec<f64> = (0..=n).map(|j| reach * j as f64 / n as f64).collect();
        let pv = gl_integrate(&pts, 1, |x| (g.value(x) - g.value(-x)) / x);
        let oracle = Complex64::new(0.0, -PI) * g.value(0.0) + pv;
        assert!((v - oracle).norm() < 1e-9 * oracle.norm().max(1.0), "{v} vs {oracle}");
    }
}

#[test]
fn delta_is_singular_in_all_directions_at_origin_only() {
    let est = wf_estimate(&symbolic("delta(0)"), &[vec![0.0], vec![0.5], vec![-0.7]], &WfConfig::default()).unwrap();
    let at0 = est.singular_at(&[0.0]);
    assert_eq!(at0.len(), 2);
    assert!(at0.iter().all(|e| e.exponent.abs() < 1e-6));
    assert!(est.singular_at(&[0.5]).is_empty() && est.singular_at(&[-0.7]).is_empty());

    // sampled δ on a grid
    let dx = 1e-3;
    let n = 2001;
    let grid = SampledDistribution::sample_1d(-1.0, dx, n, |x| if x.abs() < dx / 2.0 { c(1.0 / dx) } else { c(0.0) }).unwrap();
    let est = wf_estimate(&grid, &[vec![0.0], vec![0.5]], &WfConfig::default()).unwrap();
    assert_eq!(est.singular_at(&[0.0]).len(), 2);
    assert!(est.singular_at(&[0.5]).is_empty());
}

#[test]
fn plus_i0_is_singular_only_for_negative_covectors() {
    let est = wf_estimate(&symbolic("xpi0(-1)"), &[vec![0.0], vec![0.6]], &WfConfig::default()).unwrap();
    let s = est.singular_at(&[0.0]);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].direction, vec![-1.0]);
    assert!(est.singular_at(&[0.6]).is_empty());

    // the same from sampled (x + iε)^{-1}, extrapolated in ε
    let dx = 1e-3;
    let family = |eps: f64| SampledDistribution::sample_1d(-1.0, dx, 2001, move |x| Complex64::new(x, eps).inv());
    let est = wf_estimate_extrapolated(family, (8.0 * dx, 4.0 * dx), &[vec![0.0], vec![0.6]], &WfConfig::default()).unwrap();
    let s = est.singular_at(&[0.0]);
    assert_eq!(s.len(), 1, "{:?}", est.entries);
    assert_eq!(s[0].direction, vec![-1.0]);
    assert!(est.singular_at(&[0.6]).is_empty());
}

#[test]
fn minus_i0_mirrors_plus_i0() {
    let est = wf_estimate(&symbolic("xmi0(-1)"), &[vec![0.0]], &WfConfig::default()).unwrap();
    let s = est.singular_at(&[0.0]);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].direction, vec![1.0]);
}

#[test]
fn smooth_inputs_have_empty_estimates() {
    let est = wf_estimate(&symbolic("mono(2) + 3*mono(0)"), &[vec![0.0], vec![0.4]], &WfConfig::default()).unwrap();
    assert!(est.is_empty(), "{:?}", est.entries);
    let (dt, dx) = (0.05, 0.05);
    let (nt, nx) = (120, 120);
    let samples = (0..nt * nx)
        .map(|s| {
            let (t, x) = ((s / nx) as f64 * dt - 3.0, (s % nx) as f64 * dx - 3.0);
            c((-(t * t + 2.0 * x * x) / 2.0).exp() * (1.0 + 0.3 * t))
        })
        .collect();
    let grid = SampledDistribution::grid_2d((-3.0, -3.0), (dt, dx), (nt, nx), samples).unwrap();
    let est = wf_estimate(&grid, &[vec![0.0, 0.0], vec![0.5, -0.4]], &WfConfig::default()).unwrap();
    assert!(est.is_empty());
}

#[test]
fn seminorms_separate_delta_from_smooth() {
    let cfg = WfConfig::default();
    let d = wf_estimate(&symbolic("delta(0)"), &[vec![0.0]], &cfg).unwrap();
    let rmax = *d.radii.last().unwrap();
    // ⟨δ, g⟩ = g(0) = 1 for a packet centred at 0
    assert!((d.seminorm(&[0.0], 0, |_| true) - 1.0).abs() < 1e-12);
    assert!((d.seminorm(&[0.0], 2, |_| true) - (1.0 + rmax).powi(2)).abs() < 1e-9 * rmax * rmax);
    let s = wf_estimate(&symbolic("mono(0)"), &[vec![0.0]], &cfg).unwrap();
    assert!(s.seminorm(&[0.0], 4, |_| true) < 1e-3 * d.seminorm(&[0.0], 4, |_| true));
}

#[test]
fn products_of_estimated_cones() {
    let cfg = WfConfig::default();
    let at0 = [vec![0.0]];
    let delta = wf_estimate(&symbolic("delta(0)"), &at0, &cfg).unwrap();
    let plus = wf_estimate(&symbolic("xpi0(-1)"), &at0, &cfg).unwrap();
    let smooth = wf_estimate(&symbolic("mono(1)"), &at0, &cfg).unwrap();
    let dd = product_compatible(&delta, &delta);
    assert!(!dd.compatible);
    assert!(dd.witness.iter().all(|w| w.base == vec![0.0]));
    assert!(product_compatible(&plus, &plus).compatible);
    let sq = whitney_sum(&plus, &plus);
    assert!(sq.entries.iter().all(|e| e.direction == vec![-1.0]));
    assert!(product_compatible(&smooth, &delta).compatible);
    assert!(!product_compatible(&plus, &wf_estimate(&symbolic("xmi0(-1)"), &at0, &cfg).unwrap()).compatible);
}

#[test]
fn window_outside_grid_is_rejected() {
    let grid = SampledDistribution::sample_1d(0.0, 0.01, 50, |_| c(1.0)).unwrap();
    assert!(matches!(
        wf_estimate(&grid, &[vec![0.25]], &WfConfig::default()),
        Err(MicrolocalError::WindowTooWide { .. })
    ));
}

#[test]
fn flat_bicharacteristics() {
    let m = ConstantMetric::minkowski();
    let b = bicharacteristic_flow(&m, [0.0, 0.0], [1.0, -1.0], 10_000, 1e-3);
    assert!(b.is_null());
    for p in &b.points {
        assert!((p.x[0] - p.x[1]).abs() < 1e-12 && p.sigma == 0.0);
    }
    let b = bicharacteristic_flow(&m, [0.0, 0.0], [3.0, 1.0], 10_000, 1e-3);
    assert!(!b.is_null() && b.max_drift < 1e-12);
    let end = b.points.last().unwrap();
    assert!((end.x[0] - 60.0).abs() < 1e-9 && (end.x[1] + 20.0).abs() < 1e-9);
}

#[test]
fn conformal_null_rays_stay_null_and_straight() {
    // null geodesics are conformally invariant
    let m = ConformallyFlat { amplitude: 0.3, wave: [0.5, -0.9] };
    let b = bicharacteristic_flow(&m, [0.2, 0.1], [2.0, 2.0], 10_000, 1e-3);
    assert!(b.is_null() && b.max_drift < 1e-12);
    for p in &b.points {
        assert!(((p.x[0] - 0.2) + (p.x[1] - 0.1)).abs() < 1e-9);
    }
}

#[test]
fn lattice_commutator_singularities_follow_light_rays() {
    let lat = Lattice1p1::new(128, 128, 0.09, 0.1, 1.0).unwrap();
    let ps = PropagatorSet::green_only(&lat).unwrap();
    let r = propagation_check(&ps, &PropagationConfig::default()).unwrap();
    assert!(r.singular_entries > 0);
    assert!(r.cone_fraction >= 0.9, "{}", r.cone_fraction);
    assert!(r.source_null_singular);
    assert!(r.off_cone.regular, "{:?}", r.off_cone);
    assert!(r.passed);
}

fn cone_strategy() -> impl Strategy<Value = WfEstimate> {
    let rays = prop::collection::vec(0usize..16, 0..6);
    prop::collection::vec((0usize..3, rays), 0..4).prop_map(|cones| {
        let cones: Vec<(Vec<f64>, Vec<Vec<f64>>)> = cones
            .into_iter()
            .map(|(b, rays)| {
                let dirs = rays
                    .into_iter()
                    .map(|m| {
                        let th = 2.0 * PI * m as f64 / 16.0;
                        vec![th.cos(), th.sin()]
                    })
                    .collect();
                (vec![b as f64, 0.0], dirs)
            })
            .collect();
        WfEstimate::from_cones(4.0, &cones)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_compatibility_is_symmetric(a in cone_strategy(), b in cone_strategy()) {
        prop_assert_eq!(product_compatible(&a, &b).compatible, product_compatible(&b, &a).compatible);
    }

    #[test]
    fn shrinking_cones_preserves_compatibility(a in cone_strategy(), b in cone_strategy(), keep in prop::collection::vec(any::<bool>(), 32)) {
        let mut small = a.clone();
        let mut i = 0;
        small.entries.retain(|_| { i += 1; keep[(i - 1) % keep.len()] });
        if product_compatible(&a, &b).compatible {
            prop_assert!(product_compatible(&small, &b).compatible);
        }
    }

    #[test]
    fn local_patterns_are_microcausal(ks in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..5)) {
        let mut tuple: Vec<[f64; 2]> = ks.iter().map(|&(a, b)| [a, b]).collect();
        let s = tuple.iter().fold([0.0, 0.0], |acc, k| [acc[0] + k[0], acc[1] + k[1]]);
        tuple.push([-s[0], -s[1]]);
        prop_assume!(tuple.iter().any(|k| k[0].abs().max(k[1].abs()) > 1e-6));
        prop_assert!(microcausal_check(&cone_pattern(&[tuple])));
    }

    #[test]
    fn same_cone_patterns_are_excluded(ks in prop::collection::vec((0.0f64..5.0, -1.0f64..1.0), 1..5), past in any::<bool>()) {
        let sign = if past { -1.0 } else { 1.0 };
        let tuple: Vec<[f64; 2]> = ks.iter().map(|&(a, u)| [sign * (a + 0.01), u * (a + 0.01)]).collect();
        prop_assert!(!microcausal_check(&cone_pattern(&[tuple])));
    }

    #[test]
    fn symbol_is_conserved_along_flow(a in 0.0f64..0.4, q0 in -1.5f64..1.5, q1 in -1.5f64..1.5,
                                      k0 in -2.0f64..2.0, k1 in -2.0f64..2.0) {
        let m = ConformallyFlat { amplitude: a, wave: [q0, q1] };
        let b = bicharacteristic_flow(&m, [0.0, 0.0], [k0, k1], 2000, 1e-3);
        prop_assert!(b.drift_per_unit_time < 1e-8, "{}", b.drift_per_unit_time);
    }
}
