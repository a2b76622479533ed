mod common;

use common::{close, fd_gradient, functional, hbar_coeff};
use num_complex::Complex64;
use paqft_core::functionals::{peierls_bracket, FunctionalSpace, GeneralizedLagrangian, PolyFunctional};
use paqft_core::lattice::{discrete_plane_wave, Lattice1p1, PropagatorSet};
use paqft_core::scalar;
use proptest::prelude::*;
use std::sync::OnceLock;

fn lattice() -> Lattice1p1 {
    Lattice1p1::new(10, 6, 0.5, 1.0, 1.0).unwrap()
}

fn props() -> &'static PropagatorSet {
    static PS: OnceLock<PropagatorSet> = OnceLock::new();
    PS.get_or_init(|| PropagatorSet::new(&lattice()).unwrap())
}

fn pool() -> Vec<usize> {
    let lat = lattice();
    vec![lat.site(3, 0), lat.site(4, 2), lat.site(5, 1), lat.site(6, 4)]
}

fn space() -> FunctionalSpace {
    FunctionalSpace::for_lattice(&lattice(), 0, 0)
}

fn field() -> impl Strategy<Value = PolyFunctional> {
    functional(space(), pool(), 3, 3)
}

fn config(values: &[f64]) -> Vec<f64> {
    let mut phi = vec![0.0; lattice().n_sites()];
    for (&s, &v) in pool().iter().zip(values) {
        phi[s] = v;
    }
    phi
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 4)
}

fn value(f: &PolyFunctional, phi: &[f64]) -> Complex64 {
    hbar_coeff(f, 0, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evaluation_matches_the_kernel_picture(f in field(), vals in values()) {
        let phi = config(&vals);
        let sites = pool();
        let v = scalar::to_f64(&space().volume);
        let mut want = Complex64::default();
        // Σ_n Σ over ordered n-tuples of v^n f_n(x_1…x_n) φ(x_1)…φ(x_n)
        for n in 1..=3u32 {
            let count = sites.len().pow(n);
            for code in 0..count {
                let tuple: Vec<usize> = (0..n).map(|k| sites[code / sites.len().pow(k) % sites.len()]).collect();
                let kernel = scalar::to_c64(&f.kernel(&tuple).constant_term());
                let p: f64 = tuple.iter().map(|&s| phi[s] * v).product();
                want += kernel * p;
            }
        }
        prop_assert!(close(value(&f, &phi), want, 1e-12));
    }

    #[test]
    fn first_derivative_matches_finite_differences(f in field(), vals in values()) {
        let phi = config(&vals);
        let v = scalar::to_f64(&space().volume);
        let d = f.derivative(1);
        for (s, fd) in pool().into_iter().zip(fd_gradient(&f, &phi, &pool())) {
            let got = d.at(&[s]).map(|g| value(g, &phi)).unwrap_or_default();
            prop_assert!(close(got * v, fd, 1e-6), "site {}: {} vs {}", s, got * v, fd);
        }
    }

    #[test]
    fn bracket_is_the_gradient_pairing(f in field(), g in field(), vals in values()) {
        let phi = config(&vals);
        let sites = pool();
        let (df, dg) = (fd_gradient(&f, &phi, &sites), fd_gradient(&g, &phi, &sites));
        let mut want = Complex64::default();
        for (a, &x) in sites.iter().enumerate() {
            for (b, &y) in sites.iter().enumerate() {
                want += df[a] * props().causal(x, y) * dg[b];
            }
        }
        let got = value(&peierls_bracket(&f, &g, props()).unwrap(), &phi);
        prop_assert!(close(got, want, 1e-6), "{} vs {}", got, want);
    }

    #[test]
    fn bracket_is_antisymmetric_and_a_derivation(f in field(), g in functional(space(), pool(), 2, 2), h in functional(space(), pool(), 2, 2)) {
        let br = |a: &PolyFunctional, b: &PolyFunctional| peierls_bracket(a, b, props()).unwrap();
        prop_assert!(br(&f, &g).add(&br(&g, &f)).is_zero());
        let lhs = br(&f, &g.mul(&h).unwrap());
        let rhs = br(&f, &g).mul(&h).unwrap().add(&g.mul(&br(&f, &h)).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_identity(f in field(), g in field(), h in field(), vals in values()) {
        let br = |a: &PolyFunctional, b: &PolyFunctional| peierls_bracket(a, b, props()).unwrap();
        let phi = config(&vals);
        let terms = [br(&f, &br(&g, &h)), br(&g, &br(&h, &f)), br(&h, &br(&f, &g))].map(|t| value(&t, &phi));
        let size = terms.iter().map(|t| t.norm()).fold(1.0, f64::max);
        prop_assert!(terms.iter().sum::<Complex64>().norm() < 1e-9 * size);
    }

    #[test]
    fn json_roundtrip(f in field()) {
        prop_assert_eq!(PolyFunctional::from_json(&f.to_json()).unwrap(), f);
    }
}

#[test]
fn brackets_with_the_ideal_vanish_on_shell() {
    let lat = lattice();
    let sp = space();
    let action = GeneralizedLagrangian::free(&lat, vec![1.0; lat.n_sites()], 0, 0).action(0, 0).unwrap();
    // I(φ) = Σ_x S′(φ)(x) X(x) with X supported well inside the time interval
    let mut ideal = sp.zero();
    for (t, x, w) in [(4, 1, 0.5), (5, 3, -0.75), (6, 0, 1.0)] {
        ideal = ideal.add(&action.partial(lat.site(t, x)).scale(&scalar::real(scalar::exact_f64(w))));
    }
    let f = sp.local_power(&{
        let mut w = vec![0.0; lat.n_sites()];
        w[lat.site(5, 1)] = 0.5;
        w[lat.site(3, 2)] = -1.0;
        w
    }, 3);
    let g = sp.smeared_field(&{
        let mut w = vec![0.0; lat.n_sites()];
        w[lat.site(7, 4)] = 0.25;
        w
    });
    let element = ideal.mul(&g).unwrap();
    let br = peierls_bracket(&f, &element, props()).unwrap();
    for (mode, phase) in [(0, 0.3), (1, -1.1), (2, 0.7)] {
        let sol = discrete_plane_wave(&lat, mode, phase);
        assert!(value(&ideal, &sol).norm() < 1e-10);
        let v = value(&br, &sol);
        assert!(v.norm() < 1e-8, "mode {mode}: {v}");
    }
    // off shell the same bracket does not vanish
    let off: Vec<f64> = (0..lat.n_sites()).map(|s| ((s * 7 % 11) as f64 - 5.0) / 5.0).collect();
    assert!(value(&br, &off).norm() > 1e-3);
}

#[test]
fn supports_of_products_and_locality() {
    let lat = lattice();
    let sp = space();
    let mut w = vec![0.0; lat.n_sites()];
    w[lat.site(2, 2)] = 1.0;
    w[lat.site(7, 5)] = -0.5;
    let local = sp.local_power(&w, 3);
    assert!(local.is_local());
    let pair = sp.monomial(&[lat.site(2, 2), lat.site(3, 3)], sp.series(scalar::sc_one()));
    assert!(!pair.is_local());
    let prod = local.mul(&pair).unwrap();
    let union: std::collections::BTreeSet<usize> = local.support().union(&pair.support()).copied().collect();
    assert_eq!(prod.support(), union);
}
