//! Analytic regularization: Laurent data of `ζ ↦ ⟨t^ζ, f⟩` and minimal subtraction.

use super::distribution::SymbolicDistribution1D;
use super::pairing::pair_family;
use super::testfn::TestFunction1D;
use super::EgError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentConfig {
    pub radii: Vec<f64>,
    pub points_per_circle: usize,
    /// Highest admissible pole order.
    pub pole_cap: usize,
    /// Highest regular order kept in the fit.
    pub regular_order: usize,
    pub residual_tol: f64,
}

impl Default for LaurentConfig {
    fn default() -> Self {
        Self { radii: vec![0.1, 0.05], points_per_circle: 8, pole_cap: 3, regular_order: 9, residual_tol: 1e-9 }
    }
}

impl LaurentConfig {
    pub fn samples(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for (c, &r) in self.radii.iter().enumerate() {
            let offset = 0.5 * c as f64 + 0.25;
            for j in 0..self.points_per_circle {
                let th = 2.0 * PI * (j as f64 + offset) / self.points_per_circle as f64;
                out.push(Complex64::from_polar(r, th));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentData {
    /// `(k, c_k)` for `k = −pole_cap, …, regular_order`.
    pub coefficients: Vec<(i32, Complex64)>,
    pub samples: Vec<(Complex64, Complex64)>,
    /// Max sample misfit relative to `max(1, max |value|)`.
    pub residual: f64,
}

/// Coefficients below this (relative to the regular value) count as zero.
pub const LAURENT_ZERO_TOL: f64 = 1e-7;

impl LaurentData {
    pub fn coefficient(&self, k: i32) -> Complex64 {
        self.coefficients.iter().find(|(j, _)| *j == k).map(|c| c.1).unwrap_or_default()
    }

    /// Principal-part coefficients `c_{-1}, c_{-2}, …`.
    pub fn principal(&self) -> Vec<Complex64> {
        let mut v: Vec<(i32, Complex64)> = self.coefficients.iter().copied().filter(|(k, _)| *k < 0).collect();
        v.sort_by_key(|(k, _)| -k);
        v.into_iter().map(|c| c.1).collect()
    }

    pub fn regular_value(&self) -> Complex64 {
        self.coefficient(0)
    }

    pub fn pole_order(&self) -> usize {
        let scale = self.samples.iter().map(|s| s.1.norm()).fold(1.0, f64::max);
        self.principal()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > LAURENT_ZERO_TOL * scale)
            .map(|(i, _)| i + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn principal_part(&self, zeta: Complex64) -> Complex64 {
        self.coefficients.iter().filter(|(k, _)| *k < 0).map(|(k, c)| c * zeta.powi(*k)).sum()
    }

    pub fn regular_part(&self, zeta: Complex64) -> Complex64 {
        self.coefficients.iter().filter(|(k, _)| *k >= 0).map(|(k, c)| c * zeta.powi(*k)).sum()
    }
}

/// Fits a truncated Laurent series to sampled values.
pub fn fit_laurent(samples: &[(Complex64, Complex64)], cfg: &LaurentConfig) -> Result<LaurentData, EgError> {
    let lo = -(cfg.pole_cap as i32);
    let hi = cfg.regular_order as i32;
    let orders: Vec<i32> = (lo..=hi).collect();
    let rmean = cfg.radii.iter().map(|r| r.ln()).sum::<f64>() / cfg.radii.len().max(1) as f64;
    let rmean = rmean.exp();
    let n = samples.len();
    let mut a = DMatrix::<Complex64>::zeros(n, orders.len());
    let mut b = DVector::<Complex64>::zeros(n);
    for (j, (z, v)) in samples.iter().enumerate() {
        b[j] = *v;
        for (c, &k) in orders.iter().enumerate() {
            a[(j, c)] = (z / rmean).powi(k);
        }
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).map_err(|_| EgError::PoleOrderExceeded { residual: f64::INFINITY, cap: cfg.pole_cap })?;
    let scale = samples.iter().map(|s| s.1.norm()).fold(1.0, f64::max);
    let residual = (&a * &x - &b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    if residual > cfg.residual_tol {
        return Err(EgError::PoleOrderExceeded { residual, cap: cfg.pole_cap });
    }
    let coefficients = orders.iter().zip(x.iter()).map(|(&k, c)| (k, c / Complex64::new(rmean, 0.0).powi(k))).collect();
    Ok(LaurentData { coefficients, samples: samples.to_vec(), residual })
}

/// Laurent data of `ζ ↦ ⟨t^ζ, f⟩` around `ζ = 0`.
pub fn analytic_regularization(
    family: &SymbolicDistribution1D,
    f: &TestFunction1D,
    cfg: &LaurentConfig,
) -> Result<LaurentData, EgError> {
    let samples = cfg
        .samples()
        .into_iter()
        .map(|z| Ok((z, pair_family(family, f, z)?)))
        .collect::<Result<Vec<_>, EgError>>()?;
    fit_laurent(&samples, cfg)
}

/// `lim_{ζ→0} rp⟨t^ζ, f⟩`.
pub fn minimal_subtraction(family: &SymbolicDistribution1D, f: &TestFunction1D, cfg: &LaurentConfig) -> Result<Complex64, EgError> {
    Ok(analytic_regularization(family, f, cfg)?.regular_value())
}
