//! Truncated Gaussian wave packets as exact probes for symbolic distributions.

use crate::eg_renorm::Probe;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `g(x) = exp(−(x−c)²/(2σ²) + ikx)` on `|x − c| ≤ cut·σ`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussExp {
    pub centre: f64,
    pub sigma: f64,
    pub k: f64,
    pub cut: f64,
}

const SERIES_TERMS: usize = 30;
const MAX_PIECES: usize = 4096;

impl GaussExp {
    pub fn new(centre: f64, sigma: f64, k: f64, cut: f64) -> Self {
        Self { centre, sigma, k, cut }
    }

    fn half_width(&self) -> f64 {
        self.cut * self.sigma
    }

    fn inside(&self, x: f64) -> bool {
        (x - self.centre).abs() <= self.half_width()
    }

    fn raw(&self, x: f64) -> Complex64 {
        let d = x - self.centre;
        Complex64::new(-d * d / (2.0 * self.sigma * self.sigma), self.k * x).exp()
    }

    /// `g^{(n)}(0)` for `n ≤ m` via `g^{(n+1)} = q′g^{(n)} + n q″ g^{(n−1)}`.
    fn derivatives(&self, m: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(m + 1);
        if !self.inside(0.0) {
            out.resize(m + 1, Complex64::default());
            return out;
        }
        let q1 = Complex64::new(self.centre / (self.sigma * self.sigma), self.k);
        let q2 = -1.0 / (self.sigma * self.sigma);
        out.push(self.raw(0.0));
        for n in 0..m {
            let next = q1 * out[n] + if n > 0 { out[n - 1] * (n as f64 * q2) } else { Complex64::default() };
            out.push(next);
        }
        out
    }

    /// Radius below which the tail series is used instead of direct subtraction.
    fn series_radius(&self) -> f64 {
        let q1 = Complex64::new(self.centre / (self.sigma * self.sigma), self.k).norm();
        0.5 / q1.max(1.0 / self.sigma)
    }
}

impl Probe for GaussExp {
    fn support(&self) -> Option<(f64, f64)> {
        Some((self.centre - self.half_width(), self.centre + self.half_width()))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = (self.centre - self.half_width(), self.centre + self.half_width());
        // quarter periods of the carrier
        let step = if self.k == 0.0 { b - a } else { 0.5 * PI / self.k.abs() };
        let n = (((b - a) / step).ceil() as usize).clamp(1, MAX_PIECES);
        (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
    }

    fn value(&self, x: f64) -> Complex64 {
        if self.inside(x) {
            self.raw(x)
        } else {
            Complex64::default()
        }
    }

    fn derivative_at_zero(&self, k: usize) -> Complex64 {
        self.derivatives(k)[k]
    }

    fn taylor(&self, order: isize) -> (Vec<Complex64>, Box<dyn Fn(f64) -> Complex64 + '_>) {
        if order < 0 {
            return (Vec::new(), Box::new(move |x| self.value(x)));
        }
        let m = order as usize;
        let all = self.derivatives(m + SERIES_TERMS);
        let head = all[..=m].to_vec();
        let rho = self.series_radius();
        let rem = move |x: f64| {
            if x.abs() < rho && self.inside(x) {
                let mut term = Complex64::new(1.0, 0.0);
                let mut s = Complex64::default();
                for (n, d) in all.iter().enumerate() {
                    if n > 0 {
                        term *= x / n as f64;
                    }
                    if n > m {
                        s += d * term;
                    }
                }
                s
            } else {
                let mut term = Complex64::new(1.0, 0.0);
                let mut poly = Complex64::default();
                for (n, d) in all[..=m].iter().enumerate() {
                    if n > 0 {
                        term *= x / n as f64;
                    }
                    poly += d * term;
                }
                self.value(x) - poly
            }
        };
        (head, Box::new(rem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let g = GaussExp::new(0.03, 0.05, 40.0, 6.0);
        let d = g.derivatives(2);
        let h = 1e-5;
        let fd1 = (g.value(h) - g.value(-h)) / (2.0 * h);
        let fd2 = (g.value(h) - g.value(0.0) * 2.0 + g.value(-h)) / (h * h);
        assert!((d[1] - fd1).norm() < 1e-6 * d[1].norm().max(1.0));
        assert!((d[2] - fd2).norm() < 1e-3 * d[2].norm().max(1.0));
    }

    #[test]
    fn remainder_is_continuous_across_series_radius() {
        let g = GaussExp::new(-0.02, 0.05, 120.0, 6.0);
        let (_, rem) = g.taylor(2);
        let rho = g.series_radius();
        for x in [rho * (1.0 - 1e-9), -rho * (1.0 - 1e-9)] {
            let inner = rem(x);
            let outer = rem(x * (1.0 + 2e-9));
            assert!((inner - outer).norm() < 1e-7 * inner.norm().max(1e-12), "{inner} {outer}");
        }
    }

    #[test]
    fn vanishes_off_support() {
        let g = GaussExp::new(1.0, 0.05, 10.0, 6.0);
        assert_eq!(g.value(0.0), Complex64::default());
        assert_eq!(g.derivative_at_zero(3), Complex64::default());
    }
}
