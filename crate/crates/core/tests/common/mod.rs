//! Shared test oracles.
#![allow(dead_code)]

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite 20-point Gauss–Legendre over the given breakpoints, each gap split `sub` times.
pub fn gl_integrate(breaks: &[f64], sub: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let rule = gauss_legendre(20);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for s in 0..sub {
            let a = w[0] + s as f64 * h;
            for &(x, wt) in &rule {
                acc += f(a + 0.5 * h * (x + 1.0)) * (0.5 * h * wt);
            }
        }
    }
    acc
}

/// Breakpoints refined geometrically towards `0` on `[0, b]`.
pub fn graded(b: f64, levels: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..levels).map(|k| b * 0.5f64.powi((levels - k) as i32)).collect();
    v.insert(0, 0.0);
    v.push(b);
    v
}

use paqft_core::formal_series::FormalSeries;
use paqft_core::functionals::{FunctionalSpace, PolyFunctional};
use paqft_core::scalar::{rat, Scalar};
use proptest::prelude::*;

/// Coefficient of `ħ^h λ^0` at `φ`.
pub fn hbar_coeff(f: &PolyFunctional, h: u32, phi: &[f64]) -> Complex64 {
    f.evaluate_f64(phi).unwrap().get(&(h, 0)).copied().unwrap_or_default()
}

/// Central-difference gradient of the `ħ⁰` coefficient.
pub fn fd_gradient(f: &PolyFunctional, phi: &[f64], sites: &[usize]) -> Vec<Complex64> {
    let step = 1e-4;
    sites
        .iter()
        .map(|&s| {
            let (mut up, mut dn) = (phi.to_vec(), phi.to_vec());
            up[s] += step;
            dn[s] -= step;
            (hbar_coeff(f, 0, &up) - hbar_coeff(f, 0, &dn)) / (2.0 * step)
        })
        .collect()
}

/// Central-difference Hessian of the `ħ⁰` coefficient.
pub fn fd_hessian(f: &PolyFunctional, phi: &[f64], sites: &[usize]) -> Vec<Vec<Complex64>> {
    let step = 1e-3;
    let at = |a: usize, da: f64, b: usize, db: f64| {
        let mut p = phi.to_vec();
        p[a] += da;
        p[b] += db;
        hbar_coeff(f, 0, &p)
    };
    sites
        .iter()
        .map(|&a| {
            sites
                .iter()
                .map(|&b| {
                    (at(a, step, b, step) - at(a, step, b, -step) - at(a, -step, b, step) + at(a, -step, b, -step))
                        / (4.0 * step * step)
                })
                .collect()
        })
        .collect()
}

/// Monomials of degree `1..=max_degree` over `pool` with coefficients `(p + iq)/4`.
pub fn functional(sp: FunctionalSpace, pool: Vec<usize>, max_degree: usize, max_terms: usize) -> impl Strategy<Value = PolyFunctional> {
    let term = (proptest::collection::vec(0..pool.len(), 1..=max_degree), -4i64..=4, -2i64..=2);
    proptest::collection::vec(term, 1..=max_terms).prop_map(move |terms| {
        let mut f = sp.zero();
        for (idx, re, im) in terms {
            let sites: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
            let c = if re == 0 && im == 0 { Scalar::new(rat(1, 4), rat(0, 1)) } else { Scalar::new(rat(re, 4), rat(im, 4)) };
            f = f.add(&sp.monomial(&sites, FormalSeries::constant(c, sp.trunc_h, sp.trunc_l)));
        }
        f
    })
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}
