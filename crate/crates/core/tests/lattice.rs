use nalgebra::DMatrix;
use num_complex::Complex64;
use paqft_core::lattice::{apply_kg, GreenPair, Lattice1p1, PropagatorSet};
use proptest::prelude::*;
use std::f64::consts::PI;

/// `Δ^R` at time lag `dn`, spatial lag `dj`, summed over spatial Fourier modes.
///
/// Each mode obeys the three-term recurrence `u_{n+1} = 2c u_n − u_{n−1}` with
/// `c = 1 − (a_t ω)²/2`, started from `u_0 = 0`, `u_1 = 1`; so `u_n = U_{n−1}(c)`.
fn retarded_oracle(lat: &Lattice1p1, dn: usize, dj: usize) -> f64 {
    let nx = lat.n_x as f64;
    let mut acc = 0.0;
    for j in 0..lat.n_x {
        let s = 2.0 / lat.a_x * (PI * j as f64 / nx).sin();
        let w2 = lat.mass * lat.mass + s * s;
        let c = 1.0 - lat.a_t * lat.a_t * w2 / 2.0;
        let (mut prev, mut cur) = (0.0, 1.0);
        let u = if dn == 0 {
            0.0
        } else {
            for _ in 1..dn {
                let next = 2.0 * c * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        };
        acc += u * (2.0 * PI * j as f64 * dj as f64 / nx).cos();
    }
    -lat.a_t / (lat.a_x * nx) * acc
}

fn lattices() -> impl Strategy<Value = Lattice1p1> {
    (4usize..14, 2usize..6, 0.1f64..0.65, 0.5f64..1.5, 0.2f64..1.5)
        .prop_map(|(nt, half, ct, ax, m)| Lattice1p1 { n_t: nt, n_x: 2 * half, a_t: ct * ax, a_x: ax, mass: m })
        .prop_filter("stable", |l| l.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn retarded_support_and_antisymmetry(lat in lattices()) {
        let g = GreenPair::new(&lat).unwrap();
        let n = lat.n_sites();
        for x in 0..n {
            for y in 0..n {
                if !lat.in_past_cone(x, y) {
                    prop_assert_eq!(g.retarded(x, y), 0.0);
                }
                prop_assert_eq!(g.advanced(x, y), g.retarded(y, x));
                prop_assert_eq!(g.causal(x, y), -g.causal(y, x));
            }
        }
    }

    #[test]
    fn retarded_matches_the_mode_recurrence(lat in lattices()) {
        let g = GreenPair::new(&lat).unwrap();
        let scale = lat.a_t / lat.a_x;
        for x in 0..lat.n_sites() {
            let (t, i) = lat.coords(x);
            let want = retarded_oracle(&lat, t, i);
            let got = g.retarded(x, lat.site(0, 0));
            prop_assert!((got - want).abs() < 1e-8 * scale.max(want.abs()), "t {} x {}: {} vs {}", t, i, got, want);
        }
    }

    #[test]
    fn retarded_solution_solves_the_stencil(lat in lattices(), ts in 0usize..4, xs in 0usize..12) {
        let g = GreenPair::new(&lat).unwrap();
        let src = lat.site(ts.min(lat.n_t - 1), xs % lat.n_x);
        let col: Vec<f64> = (0..lat.n_sites()).map(|x| g.retarded(x, src)).collect();
        let kg = apply_kg(&lat, &col);
        for s in (0..lat.n_sites()).filter(|&s| lat.is_interior(s)) {
            let want = if s == src { -1.0 / lat.volume() } else { 0.0 };
            prop_assert!((kg[s] - want).abs() < 1e-9 / lat.volume(), "site {}: {}", s, kg[s]);
        }
    }
}

#[test]
fn equal_time_commutator_is_a_lattice_delta() {
    let lat = Lattice1p1::new(16, 10, 0.4, 0.8, 1.3).unwrap();
    let ps = PropagatorSet::new(&lat).unwrap();
    for t in 2..lat.n_t - 2 {
        for x in 0..lat.n_x {
            for y in 0..lat.n_x {
                let (here, next) = (lat.site(t, x), lat.site(t + 1, x));
                let y = lat.site(t, y);
                assert_eq!(ps.causal(here, y), 0.0);
                let dt = (ps.causal(next, y) - ps.causal(here, y)) / lat.a_t;
                let want = if lat.coords(y).1 == x { -1.0 / lat.a_x } else { 0.0 };
                assert!((dt - want).abs() < 1e-8, "({t},{x},{y}) {dt}");
            }
        }
    }
}

#[test]
fn two_point_function_is_positive() {
    let lat = Lattice1p1::new(8, 6, 0.5, 1.0, 1.0).unwrap();
    let ps = PropagatorSet::new(&lat).unwrap();
    let n = lat.n_sites();
    let w = DMatrix::from_fn(n, n, |x, y| ps.plus(x, y));
    assert!((&w - w.adjoint()).camax() < 1e-12);
    let ev = w.clone().symmetric_eigen().eigenvalues;
    let (min, max) = (ev.min(), ev.max());
    assert!(min > -1e-10 * max, "min eigenvalue {min} (max {max})");
    // H alone is real symmetric and Δ⁺ − (Δ⁺)ᵀ = iΔ
    for x in 0..n {
        for y in 0..n {
            assert_eq!(ps.hadamard(x, y), ps.hadamard(y, x));
            let d = ps.plus(x, y) - ps.plus(y, x);
            assert!((d - Complex64::new(0.0, ps.causal(x, y))).norm() < 1e-14);
        }
    }
}

#[test]
fn hadamard_part_solves_the_field_equation() {
    let lat = Lattice1p1::new(14, 8, 0.5, 1.0, 0.7).unwrap();
    let ps = PropagatorSet::new(&lat).unwrap();
    let src = lat.site(7, 3);
    let col: Vec<f64> = (0..lat.n_sites()).map(|x| ps.hadamard(x, src)).collect();
    let kg = apply_kg(&lat, &col);
    for s in (0..lat.n_sites()).filter(|&s| lat.is_interior(s)) {
        assert!(kg[s].abs() < 1e-10, "site {s}: {}", kg[s]);
    }
}
