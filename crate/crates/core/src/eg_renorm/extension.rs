//! Extensions through W-projections, their δ-type ambiguities and the
//! numerical scaling degree.

use super::distribution::SymbolicDistribution1D;
use super::pairing::{pair, pair_continued};
use super::regularization::{minimal_subtraction, LaurentConfig};
use super::testfn::{TestFunction1D, Window};
use super::EgError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Anything that can be paired with a test function.
pub trait Pairing {
    fn pair_with(&self, f: &TestFunction1D) -> Result<Complex64, EgError>;
}

impl Pairing for SymbolicDistribution1D {
    fn pair_with(&self, f: &TestFunction1D) -> Result<Complex64, EgError> {
        Ok(pair_continued(self, f)?)
    }
}

/// `λ` together with `w_α`, `|α| ≤ λ`, dual to the derivatives at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct WProjection {
    pub lambda: i64,
    pub w: Vec<TestFunction1D>,
}

pub const DUALITY_TOL: f64 = 1e-10;

impl WProjection {
    pub fn new(lambda: i64, w: Vec<TestFunction1D>) -> Result<Self, EgError> {
        let p = Self { lambda, w };
        let err = p.duality_error();
        if p.w.len() != (lambda + 1).max(0) as usize || err > DUALITY_TOL {
            return Err(EgError::DualityViolated(err));
        }
        Ok(p)
    }

    /// `w_α = x^α/α! · χ` with `χ = 1` near the origin.
    pub fn with_window(lambda: i64, window: Window) -> Self {
        let w = (0..=lambda).map(|a| TestFunction1D::monomial_window(a as usize, window)).collect();
        Self::new(lambda, w).expect("window is flat at the origin")
    }

    pub fn standard(lambda: i64) -> Self {
        Self::with_window(lambda, Window::standard())
    }

    /// An alternative, off-centre choice of window.
    pub fn shifted(lambda: i64) -> Self {
        Self::with_window(lambda, Window::new(0.1, 0.5, 1.2))
    }

    /// `max |∂^β w_α(0) − δ_αβ|` over `α, β ≤ λ`.
    pub fn duality_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for (a, w) in self.w.iter().enumerate() {
            for b in 0..self.w.len() {
                let target = if a == b { 1.0 } else { 0.0 };
                err = err.max((w.derivative_at_zero(b) - target).norm());
            }
        }
        err
    }
}

/// `Wf = f − Σ_{α ≤ λ} f^{(α)}(0) w_α`.
pub fn w_project(f: &TestFunction1D, w: &WProjection) -> TestFunction1D {
    let mut out = f.clone();
    for (a, wa) in w.w.iter().enumerate() {
        let c = f.derivative_at_zero(a);
        if c != Complex64::new(0.0, 0.0) {
            out = out.sub(&wa.scale(c));
        }
    }
    out
}

/// `⌊div⌋`, or `None` when the divergence degree is negative.
pub fn projection_order(div: f64) -> Option<i64> {
    if div < 0.0 {
        None
    } else {
        Some((div + 1e-12).floor() as i64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtensionMethod {
    /// `sd < 1`: the extension by continuity.
    Unique,
    Projected(WProjection),
    /// Regular part at `ζ = 0` of a regularizing family.
    MinimalSubtraction(LaurentConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedDistribution {
    pub base: SymbolicDistribution1D,
    pub method: ExtensionMethod,
    /// Coefficients `c_k` of an added `Σ c_k δ^{(k)}`.
    pub local: Vec<Complex64>,
}

impl ExtendedDistribution {
    pub fn is_unique(&self) -> bool {
        matches!(self.method, ExtensionMethod::Unique)
    }

    /// `self + Σ c_k δ^{(k)}`.
    pub fn plus_local(&self, coeffs: &[Complex64]) -> Self {
        let mut local = self.local.clone();
        if local.len() < coeffs.len() {
            local.resize(coeffs.len(), Complex64::new(0.0, 0.0));
        }
        for (l, c) in local.iter_mut().zip(coeffs) {
            *l += c;
        }
        Self { local, ..self.clone() }
    }

    /// Minimal-subtraction extension for a family `t^ζ`.
    pub fn minimal_subtraction(family: SymbolicDistribution1D, cfg: LaurentConfig) -> Self {
        Self { base: family, method: ExtensionMethod::MinimalSubtraction(cfg), local: Vec::new() }
    }
}

impl Pairing for ExtendedDistribution {
    fn pair_with(&self, f: &TestFunction1D) -> Result<Complex64, EgError> {
        let main = match &self.method {
            ExtensionMethod::Unique => pair(&self.base, f)?,
            ExtensionMethod::Projected(w) => pair(&self.base, &w_project(f, w))?,
            ExtensionMethod::MinimalSubtraction(cfg) => minimal_subtraction(&self.base, f, cfg)?,
        };
        let local: Complex64 = self
            .local
            .iter()
            .enumerate()
            .map(|(k, c)| c * f.derivative_at_zero(k) * if k % 2 == 0 { 1.0 } else { -1.0 })
            .sum();
        Ok(main + local)
    }
}

/// `⟨t_ext, f⟩ := ⟨t, Wf⟩`, or the unique extension when `div < 0`.
pub fn extend(t: &SymbolicDistribution1D, w: &WProjection) -> Result<ExtendedDistribution, EgError> {
    let div = t.divergence_degree(1)?;
    let method = match projection_order(div) {
        None => ExtensionMethod::Unique,
        Some(l) if l == w.lambda => ExtensionMethod::Projected(w.clone()),
        Some(l) => return Err(EgError::WrongProjectionOrder { expected: l, got: w.lambda }),
    };
    Ok(ExtendedDistribution { base: t.clone(), method, local: Vec::new() })
}

/// Extension with the centred standard window of the right order.
pub fn extend_standard(t: &SymbolicDistribution1D) -> Result<ExtendedDistribution, EgError> {
    let div = t.divergence_degree(1)?;
    extend(t, &WProjection::standard(projection_order(div).unwrap_or(0)))
}

/// Fixed probe family with generic derivatives at the origin.
pub fn probe_family() -> Vec<TestFunction1D> {
    let mut out = Vec::new();
    for j in 0..10 {
        let jf = j as f64;
        let coeffs = [
            (0.7 * jf + 0.3).cos(),
            (1.3 * jf + 0.2).sin(),
            0.5 * (2.1 * jf).cos(),
            0.3 * (0.7 * jf + 1.0).sin(),
            0.2 * (1.7 * jf).cos(),
        ];
        let window = Window::new(0.05 * jf - 0.2, 0.3 + 0.02 * jf, 0.8 + 0.05 * jf);
        out.push(TestFunction1D::real_poly_window(&coeffs, window));
    }
    out.push(TestFunction1D::real_poly_window(&[1.0, -0.5], Window::new(1.5, 0.2, 0.6)));
    out.push(TestFunction1D::real_poly_window(&[0.4, 0.0, 1.0], Window::new(-2.0, 0.3, 0.9)));
    out
}

pub const AMBIGUITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct AmbiguityFit {
    /// `c_α` in `e1 − e2 = Σ c_α δ^{(α)}`.
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
}

impl AmbiguityFit {
    /// Number of coefficients above `tol`.
    pub fn dimension(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|c| c.norm() > tol).count()
    }
}

/// Least-squares fit of `⟨e1 − e2, f⟩ = Σ_{α ≤ max_order} c_α (−1)^α f^{(α)}(0)` on the probes.
pub fn extension_ambiguity_on(
    e1: &dyn Pairing,
    e2: &dyn Pairing,
    max_order: usize,
    probes: &[TestFunction1D],
) -> Result<AmbiguityFit, EgError> {
    let n = probes.len();
    let m = max_order + 1;
    let mut a = DMatrix::<Complex64>::zeros(n, m);
    let mut b = DVector::<Complex64>::zeros(n);
    for (j, f) in probes.iter().enumerate() {
        b[j] = e1.pair_with(f)? - e2.pair_with(f)?;
        for al in 0..m {
            let s = if al % 2 == 0 { 1.0 } else { -1.0 };
            a[(j, al)] = f.derivative_at_zero(al) * s;
        }
    }
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).map_err(|_| EgError::NonLocalDifference(f64::INFINITY))?;
    let r = &a * &c - &b;
    let residual = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > AMBIGUITY_TOL {
        return Err(EgError::NonLocalDifference(residual));
    }
    Ok(AmbiguityFit { coefficients: c.iter().copied().collect(), residual })
}

pub fn extension_ambiguity(e1: &dyn Pairing, e2: &dyn Pairing, max_order: usize) -> Result<AmbiguityFit, EgError> {
    extension_ambiguity_on(e1, e2, max_order, &probe_family())
}

/// `λ ↦ ⟨t_λ, f⟩ = λ^{-1}⟨t, f(·/λ)⟩` at `λ = 2^{-1}, …, 2^{-8}`.
pub fn scaled_pairings(t: &dyn Pairing, f: &TestFunction1D) -> Result<Vec<(f64, Complex64)>, EgError> {
    (1..=8)
        .map(|j| {
            let lam = 0.5f64.powi(j);
            Ok((lam, t.pair_with(&f.dilated(lam))? / lam))
        })
        .collect()
}

/// Minus the slope of `log|⟨t_λ, f⟩|` against `log λ`.
pub fn scaling_degree_numeric(t: &dyn Pairing, f: &TestFunction1D) -> Result<f64, EgError> {
    let pts: Vec<(f64, f64)> =
        scaled_pairings(t, f)?.into_iter().map(|(l, v)| (l.ln(), v.norm().max(f64::MIN_POSITIVE).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Relative misfit of `λ^s ⟨t_λ, f⟩` by `Σ_{k ≤ log_power, j ≤ corrections} c_{kj} λ^j log^k λ`.
fn rescaled_misfit(vals: &[(f64, Complex64)], s: f64, log_power: usize, corrections: usize) -> f64 {
    let n = vals.len();
    let m = (log_power + 1) * (corrections + 1);
    let mut a = DMatrix::<Complex64>::zeros(n, m);
    let mut y = DVector::<Complex64>::zeros(n);
    for (j, (l, v)) in vals.iter().enumerate() {
        y[j] = v * l.powf(s);
        for k in 0..=log_power {
            for p in 0..=corrections {
                a[(j, k * (corrections + 1) + p)] = Complex64::new(l.ln().powi(k as i32) * l.powi(p as i32), 0.0);
            }
        }
    }
    let norm = y.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let c = a.clone().svd(true, true).solve(&y, 1e-14).expect("full rank");
    (&a * c - &y).norm() / norm
}

/// Scaling degree allowing `⟨t_λ, f⟩ = λ^{-sd} Σ c_{kj} λ^j log^k λ` with
/// `k ≤ log_power` and `j ≤ corrections`: the exponent that makes the rescaled
/// values closest to that form. `(0, 0)` is a pure power law.
pub fn scaling_degree_numeric_corrected(
    t: &dyn Pairing,
    f: &TestFunction1D,
    log_power: usize,
    corrections: usize,
) -> Result<f64, EgError> {
    let vals = scaled_pairings(t, f)?;
    let misfit = |s: f64| rescaled_misfit(&vals, s, log_power, corrections);
    let grid: Vec<(f64, f64)> = (0..=1800).map(|i| -6.0 + 0.01 * i as f64).map(|s| (s, misfit(s))).collect();
    let golden = |mut lo: f64, mut hi: f64| {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if misfit(x1) < misfit(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let s = 0.5 * (lo + hi);
        (s, misfit(s))
    };
    let minima: Vec<(f64, f64)> = (1..grid.len() - 1)
        .filter(|&i| grid[i].1 <= grid[i - 1].1 && grid[i].1 <= grid[i + 1].1)
        .map(|i| golden(grid[i].0 - 0.01, grid[i].0 + 0.01))
        .collect();
    let best = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    // λ^{-s-1}(0 + cλ + …) reproduces λ^{-s}: the least singular exact fit is the degree
    let accept = (100.0 * best).max(1e-7);
    Ok(minima.iter().filter(|m| m.1 <= accept).map(|m| m.0).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eg_renorm::distribution::Side;

    fn probe() -> TestFunction1D {
        TestFunction1D::real_poly_window(&[1.0, 0.3, -0.7, 0.2], Window::new(0.1, 0.4, 0.9))
    }

    #[test]
    fn projection_kills_low_derivatives() {
        let w = WProjection::standard(1);
        let f = probe();
        let wf = w_project(&f, &w);
        assert!(wf.derivative_at_zero(0).norm() < 1e-12);
        assert!(wf.derivative_at_zero(1).norm() < 1e-12);
        let far = TestFunction1D::real_poly_window(&[1.0], Window::new(3.0, 0.5, 1.0));
        assert_eq!(w_project(&far, &w), far);
        let w0 = w_project(&w.w[0], &w);
        assert!(w0.value(0.0).norm() < 1e-15);
    }

    #[test]
    fn wrong_order_is_rejected() {
        let t = SymbolicDistribution1D::x_plus_i0(-2.0);
        assert!(matches!(
            extend(&t, &WProjection::standard(0)),
            Err(EgError::WrongProjectionOrder { expected: 1, got: 0 })
        ));
        let u = SymbolicDistribution1D::half_line(Side::Plus, -0.5);
        assert!(extend(&u, &WProjection::standard(0)).unwrap().is_unique());
    }

    #[test]
    fn constructed_delta_is_recovered() {
        let t = SymbolicDistribution1D::x_plus_i0(-2.0);
        let e1 = extend_standard(&t).unwrap();
        let e2 = e1.plus_local(&[Complex64::new(3.0, 0.0)]);
        let fit = extension_ambiguity(&e2, &e1, 1).unwrap();
        assert!((fit.coefficients[0] - 3.0).norm() < 1e-9);
        assert!(fit.coefficients[1].norm() < 1e-9);
    }

    #[test]
    fn numeric_scaling_degree_of_delta_and_power() {
        let d = SymbolicDistribution1D::delta(0);
        assert!((scaling_degree_numeric(&d, &probe()).unwrap() - 1.0).abs() < 1e-9);
        let p = SymbolicDistribution1D::x_plus_i0(-2.0);
        assert!((scaling_degree_numeric(&p, &probe()).unwrap() - 2.0).abs() < 0.05);
    }
}
