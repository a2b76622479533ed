//! Compactly supported test functions on ℝ built from polynomials times
//! smooth windows.
//!
//! A piece is `p(x) χ(x)` with `p(x) = Σ_k d_k x^k / k!` stored by its
//! derivatives at the origin, and
//! `χ(x) = ψ(1 − s) / (ψ(1 − s) + ψ(s))`, `s = (|x−c| − r₀)/(R − r₀)`, `ψ(t) = e^{−1/t}`,
//! which equals one for `|x−c| ≤ r₀`, vanishes for `|x−c| ≥ R`, and dilates exactly
//! with its parameters.

use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub centre: f64,
    pub flat: f64,
    pub support: f64,
}

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn psi_c(w: Complex64) -> Complex64 {
    (-w.inv()).exp()
}

impl Window {
    pub fn new(centre: f64, flat: f64, support: f64) -> Self {
        assert!(flat > 0.0 && support > flat, "window needs 0 < flat < support");
        Self { centre, flat, support }
    }

    /// Unit window around the origin, flat on `[-1/2, 1/2]`, supported in `[-1, 1]`.
    pub fn standard() -> Self {
        Self::new(0.0, 0.5, 1.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        let r = (x - self.centre).abs();
        if r <= self.flat {
            1.0
        } else if r >= self.support {
            0.0
        } else {
            let s = (r - self.flat) / (self.support - self.flat);
            let a = psi(1.0 - s);
            let b = psi(s);
            a / (a + b)
        }
    }

    /// Continuation near a transition point, with `|x − c|` replaced by `σ(z − c)`.
    fn value_c(&self, z: Complex64, sigma: f64) -> Complex64 {
        let s = ((z - self.centre) * sigma - self.flat) / (self.support - self.flat);
        let a = psi_c(1.0 - s);
        let b = psi_c(s);
        a / (a + b)
    }

    pub fn is_flat_at(&self, x: f64) -> bool {
        (x - self.centre).abs() < self.flat
    }

    pub fn vanishes_near(&self, x: f64) -> bool {
        (x - self.centre).abs() >= self.support
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        let c = self.centre;
        [c - self.support, c - self.flat, c + self.flat, c + self.support]
    }

    fn scaled(&self, lambda: f64) -> Self {
        Self { centre: self.centre * lambda, flat: self.flat * lambda, support: self.support * lambda }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    /// `d_k = p^{(k)}(0)`.
    pub coeffs: Vec<Complex64>,
    pub window: Window,
}

fn poly_eval(d: &[Complex64], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = 1.0;
    for (k, c) in d.iter().enumerate() {
        if k > 0 {
            term *= x / k as f64;
        }
        acc += c * term;
    }
    acc
}

fn poly_eval_c(d: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for (k, c) in d.iter().enumerate() {
        if k > 0 {
            term *= z / k as f64;
        }
        acc += c * term;
    }
    acc
}

impl Piece {
    pub fn value(&self, x: f64) -> Complex64 {
        let w = self.window.value(x);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        poly_eval(&self.coeffs, x) * w
    }

    /// `k`-th derivative at the origin.
    pub fn derivative_at_zero(&self, k: usize) -> Complex64 {
        if self.window.is_flat_at(0.0) {
            return self.coeffs.get(k).copied().unwrap_or_default();
        }
        if self.window.vanishes_near(0.0) {
            return Complex64::new(0.0, 0.0);
        }
        // Cauchy integral inside the analytic transition region
        let u0 = self.window.centre.abs();
        let rho = 0.5 * (u0 - self.window.flat).min(self.window.support - u0);
        let sigma = if self.window.centre > 0.0 { -1.0 } else { 1.0 };
        let n = 64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let th = 2.0 * PI * j as f64 / n as f64;
            let z = Complex64::from_polar(rho, th);
            let g = poly_eval_c(&self.coeffs, z) * self.window.value_c(z, sigma);
            acc += g * Complex64::from_polar(1.0, -(k as f64) * th);
        }
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        acc * fact / (n as f64 * rho.powi(k as i32))
    }
}

/// Finite sum of polynomial-times-window pieces.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TestFunction1D {
    pub pieces: Vec<Piece>,
}

/// Taylor data at the origin used to subtract low orders without cancellation.
#[derive(Clone, Debug)]
pub struct TaylorSplit {
    /// Highest subtracted order; `-1` subtracts nothing.
    pub order: isize,
    /// `f^{(k)}(0)` for `k ≤ order + EXTRA`.
    pub derivs: Vec<Complex64>,
    /// Sum of `d_k` over pieces flat at the origin.
    pub flat_derivs: Vec<Complex64>,
    /// Within this radius the non-flat part is expanded by its Taylor series.
    pub near: f64,
    pub has_transition: bool,
}

const EXTRA: usize = 3;

impl TestFunction1D {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Self { pieces }
    }

    /// `p(x) χ(x)` for a single window.
    pub fn poly_window(coeffs: Vec<Complex64>, window: Window) -> Self {
        Self { pieces: vec![Piece { coeffs, window }] }
    }

    /// Real polynomial times window, coefficients given as derivatives at zero.
    pub fn real_poly_window(coeffs: &[f64], window: Window) -> Self {
        Self::poly_window(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(), window)
    }

    /// `x^α/α! · χ`.
    pub fn monomial_window(alpha: usize, window: Window) -> Self {
        let mut d = vec![Complex64::new(0.0, 0.0); alpha + 1];
        d[alpha] = Complex64::new(1.0, 0.0);
        Self::poly_window(d, window)
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.pieces.iter().map(|p| p.value(x)).sum()
    }

    pub fn derivative_at_zero(&self, k: usize) -> Complex64 {
        self.pieces.iter().map(|p| p.derivative_at_zero(k)).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self { pieces }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { coeffs: p.coeffs.iter().map(|d| d * c).collect(), window: p.window })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `x ↦ f(x/λ)`.
    pub fn dilated(&self, lambda: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    coeffs: p
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, d)| d / lambda.powi(k as i32))
                        .collect(),
                    window: p.window.scaled(lambda),
                })
                .collect(),
        }
    }

    /// `(lo, hi)` enclosing the support; `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pieces {
            if p.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                continue;
            }
            lo = lo.min(p.window.centre - p.window.support);
            hi = hi.max(p.window.centre + p.window.support);
        }
        if lo < hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().flat_map(|p| p.window.breakpoints()).collect();
        b.sort_by(|a, c| a.partial_cmp(c).expect("finite breakpoints"));
        b.dedup();
        b
    }

    /// True when the function vanishes identically on `(-r, r)`.
    pub fn vanishes_near_zero(&self, r: f64) -> bool {
        self.pieces.iter().all(|p| (p.window.centre.abs() - p.window.support) >= r)
    }

    pub fn taylor_split(&self, order: isize) -> TaylorSplit {
        let n = (order + 1).max(0) as usize + EXTRA;
        let derivs: Vec<Complex64> = (0..n).map(|k| self.derivative_at_zero(k)).collect();
        let mut flat_derivs = vec![Complex64::new(0.0, 0.0); n];
        let mut near = f64::INFINITY;
        let mut has_transition = false;
        for p in &self.pieces {
            let w = &p.window;
            let c = w.centre.abs();
            if w.is_flat_at(0.0) {
                for (k, fd) in flat_derivs.iter_mut().enumerate() {
                    *fd += p.coeffs.get(k).copied().unwrap_or_default();
                }
                near = near.min(w.flat - c);
            } else if w.vanishes_near(0.0) {
                near = near.min(c - w.support);
            } else {
                has_transition = true;
                near = near.min(0.1 * (c - w.flat).min(w.support - c));
            }
        }
        TaylorSplit { order, derivs, flat_derivs, near, has_transition }
    }

    /// `f(x) − Σ_{k ≤ order} f^{(k)}(0) x^k/k!`, evaluated so that exactly cancelling
    /// polynomial parts never meet in floating point.
    pub fn remainder(&self, x: f64, ts: &TaylorSplit) -> Complex64 {
        if ts.order < 0 {
            return self.value(x);
        }
        let kmax = ts.order as usize;
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = zero;
        // pieces flat at both 0 and x contribute only their high-order part
        let mut flat_both = vec![zero; kmax + 1];
        let mut term = 1.0;
        let mut powers = Vec::with_capacity(kmax + EXTRA + 1);
        for k in 0..=kmax + EXTRA {
            if k > 0 {
                term *= x / k as f64;
            }
            powers.push(term);
        }
        for p in &self.pieces {
            if p.window.is_flat_at(0.0) && p.window.is_flat_at(x) {
                let mut t = 1.0;
                for (k, d) in p.coeffs.iter().enumerate() {
                    if k > 0 {
                        t *= x / k as f64;
                    }
                    if k > kmax {
                        acc += d * t;
                    } else {
                        flat_both[k] += d;
                    }
                }
            } else if x.abs() >= ts.near || !ts.has_transition {
                acc += p.value(x);
            }
        }
        if x.abs() < ts.near && ts.has_transition {
            for k in kmax + 1..ts.derivs.len() {
                acc += (ts.derivs[k] - ts.flat_derivs[k]) * powers[k];
            }
            return acc;
        }
        for k in 0..=kmax {
            acc -= (ts.derivs[k] - flat_both[k]) * powers[k];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_values() {
        let w = Window::standard();
        assert_eq!(w.value(0.3), 1.0);
        assert_eq!(w.value(1.0), 0.0);
        let v = w.value(0.75);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_in_flat_and_transition_regions() {
        let f = TestFunction1D::real_poly_window(&[1.0, 2.0, 3.0], Window::standard());
        assert_eq!(f.derivative_at_zero(1).re, 2.0);
        let g = TestFunction1D::real_poly_window(&[1.0, -0.5], Window::new(0.7, 0.3, 1.2));
        let h = 1e-4;
        for k in 0..3 {
            let fd = match k {
                0 => g.value(0.0).re,
                1 => (g.value(h).re - g.value(-h).re) / (2.0 * h),
                _ => (g.value(h).re - 2.0 * g.value(0.0).re + g.value(-h).re) / (h * h),
            };
            let an = g.derivative_at_zero(k).re;
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "k={k} fd={fd} an={an}");
        }
    }

    #[test]
    fn dilation() {
        let f = TestFunction1D::real_poly_window(&[0.5, 1.0, -2.0], Window::new(0.1, 0.4, 0.9));
        let g = f.dilated(0.25);
        for x in [-0.2, 0.01, 0.1, 0.14, -0.1, 0.2, 0.3] {
            assert!((g.value(x) - f.value(x / 0.25)).norm() < 1e-14);
        }
    }

    #[test]
    fn remainder_matches_direct_difference() {
        let f = TestFunction1D::real_poly_window(&[1.0, 2.0, 3.0, 4.0], Window::standard())
            .add(&TestFunction1D::real_poly_window(&[0.3, -1.0], Window::new(0.8, 0.2, 0.9)));
        let ts = f.taylor_split(1);
        for x in [0.3, -0.4, 0.6, 0.95] {
            let direct = f.value(x) - f.derivative_at_zero(0) - f.derivative_at_zero(1) * x;
            assert!((f.remainder(x, &ts) - direct).norm() < 1e-13);
        }
        // the off-centre piece is in its transition zone at the origin, so it enters through f''(0)
        let x = 1e-9;
        let taylor = f.derivative_at_zero(2) * (x * x / 2.0) + f.derivative_at_zero(3) * (x * x * x / 6.0);
        assert!((f.remainder(x, &ts) - taylor).norm() < 1e-9 * taylor.norm());
    }
}
