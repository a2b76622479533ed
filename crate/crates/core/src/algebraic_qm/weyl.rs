//! Weyl operators in the Schrödinger representation on a uniform grid.

use super::AlgebraError;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

type C = Complex64;

/// `e^{iħ(αβ′ − α′β)/2}`.
pub fn weyl_phase(alpha: f64, beta: f64, alpha2: f64, beta2: f64, hbar: f64) -> C {
    C::from_polar(1.0, 0.5 * hbar * (alpha * beta2 - alpha2 * beta))
}

/// Points `x_j = x0 + j·h`, `j < n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylGrid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
    /// Band-limited shifts for offsets that are not multiples of `h`.
    pub interpolate: bool,
}

impl WeylGrid {
    pub fn new(x0: f64, h: f64, n: usize) -> Self {
        Self { x0, h, n, interpolate: false }
    }

    pub fn with_interpolation(mut self) -> Self {
        self.interpolate = true;
        self
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }

    pub fn sample(&self, f: impl Fn(f64) -> C) -> Vec<C> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    /// `x ↦ Φ(x + s)`; zero where `x + s` leaves the grid.
    fn shift(&self, phi: &[C], s: f64) -> Result<Vec<C>, AlgebraError> {
        let m = s / self.h;
        let mr = m.round();
        if (m - mr).abs() <= 1e-9 * mr.abs().max(1.0) {
            let m = mr as i64;
            return Ok((0..self.n as i64)
                .map(|j| {
                    let k = j + m;
                    if k >= 0 && (k as usize) < self.n {
                        phi[k as usize]
                    } else {
                        C::default()
                    }
                })
                .collect());
        }
        if !self.interpolate {
            return Err(AlgebraError::ShiftOffGrid { shift: s, spacing: self.h });
        }
        Ok(self.spectral_shift(phi, s))
    }

    /// Periodic band-limited translation by multiplying Fourier modes with `e^{iks}`.
    fn spectral_shift(&self, phi: &[C], s: f64) -> Vec<C> {
        let n = self.n;
        let mut planner = FftPlanner::<f64>::new();
        let mut buf = phi.to_vec();
        planner.plan_fft_forward(n).process(&mut buf);
        let span = n as f64 * self.h;
        for (j, b) in buf.iter_mut().enumerate() {
            let q = if 2 * j < n {
                j as f64
            } else if 2 * j == n {
                0.0
            } else {
                j as f64 - n as f64
            };
            *b *= C::from_polar(1.0, 2.0 * PI * q * s / span);
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|z| z / n as f64).collect()
    }

    /// `(π(W(α, β))Φ)(x) = e^{iħαβ/2} e^{iβx} Φ(x + ħα)`.
    pub fn apply(&self, alpha: f64, beta: f64, hbar: f64, phi: &[C]) -> Result<Vec<C>, AlgebraError> {
        if phi.len() != self.n {
            return Err(AlgebraError::DimensionMismatch);
        }
        let shifted = self.shift(phi, hbar * alpha)?;
        let c = 0.5 * hbar * alpha * beta;
        Ok(shifted.iter().enumerate().map(|(j, v)| v * C::from_polar(1.0, c + beta * self.x(j))).collect())
    }

    /// `Σ_j conj(a_j) b_j h`.
    pub fn inner(&self, a: &[C], b: &[C]) -> C {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C>() * self.h
    }
}

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max_x |π(W(α,β))π(W(α′,β′))Φ − phase · π(W(α+α′, β+β′))Φ|`.
pub fn weyl_rep_check(
    grid: &WeylGrid,
    (alpha, beta): (f64, f64),
    (alpha2, beta2): (f64, f64),
    hbar: f64,
    phi: &[C],
) -> Result<f64, AlgebraError> {
    let lhs = grid.apply(alpha, beta, hbar, &grid.apply(alpha2, beta2, hbar, phi)?)?;
    let rhs = grid.apply(alpha + alpha2, beta + beta2, hbar, phi)?;
    let ph = weyl_phase(alpha, beta, alpha2, beta2, hbar);
    let rhs: Vec<C> = rhs.iter().map(|v| v * ph).collect();
    Ok(max_diff(&lhs, &rhs))
}

/// `|⟨Ψ, π(W(α,β))Φ⟩ − ⟨π(W(−α,−β))Ψ, Φ⟩|`.
pub fn weyl_adjoint_check(grid: &WeylGrid, alpha: f64, beta: f64, hbar: f64, phi: &[C], psi: &[C]) -> Result<f64, AlgebraError> {
    let a = grid.inner(psi, &grid.apply(alpha, beta, hbar, phi)?);
    let b = grid.inner(&grid.apply(-alpha, -beta, hbar, psi)?, phi);
    Ok((a - b).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_examples() {
        assert!((weyl_phase(1.0, 0.0, 0.0, 1.0, 1.0) - C::from_polar(1.0, 0.5)).norm() < 1e-15);
        assert_eq!(weyl_phase(0.7, -0.2, 0.0, 0.0, 1.3), C::new(1.0, 0.0));
        let p = weyl_phase(0.3, 0.4, -1.1, 0.9, 0.8);
        assert!((weyl_phase(-1.1, 0.9, 0.3, 0.4, 0.8) - p.conj()).norm() < 1e-15);
    }

    #[test]
    fn off_grid_shift_needs_interpolation() {
        let g = WeylGrid::new(-5.0, 0.1, 100);
        let phi = g.sample(|x| C::new((-x * x).exp(), 0.0));
        assert!(matches!(g.apply(0.05, 0.0, 1.0, &phi), Err(AlgebraError::ShiftOffGrid { .. })));
        let s = g.with_interpolation().apply(0.05, 0.0, 1.0, &phi).unwrap();
        let exact = g.sample(|x| C::new((-(x + 0.05) * (x + 0.05)).exp(), 0.0));
        assert!(max_diff(&s, &exact) < 1e-10);
    }
}
