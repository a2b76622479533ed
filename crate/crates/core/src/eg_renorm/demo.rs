//! The square of the model propagator `(x + i0)^{-1}` and its extensions.

use super::distribution::SymbolicDistribution1D;
use super::extension::{
    extend, extension_ambiguity, scaling_degree_numeric, scaling_degree_numeric_corrected, w_project, AmbiguityFit, ExtendedDistribution, Pairing,
    WProjection,
};
use super::testfn::{TestFunction1D, Window};
use super::EgError;
use crate::graphs::{divergence_degree, Multigraph};

#[derive(Clone, Debug)]
pub struct FeynmanSquareReport {
    /// `(x + i0)^{-1} · (x + i0)^{-1}` on `ℝ∖{0}`, as half-line powers.
    pub square: SymbolicDistribution1D,
    pub scaling_degree: f64,
    pub divergence_degree: f64,
    pub lambda: i64,
    /// Regression estimate from `(x + i0)^{-2}`.
    pub scaling_degree_numeric: f64,
    /// Plain regression estimate from the centred W-extension.
    pub extension_scaling_degree_numeric: f64,
    /// Same data, allowing one log power and one subleading power.
    pub extension_scaling_degree_corrected: f64,
    pub extensions: [ExtendedDistribution; 2],
    /// Fit of `e1 − e2` against `δ, δ′, δ″`.
    pub ambiguity: AmbiguityFit,
    pub ambiguity_dimension: usize,
    /// Max `|⟨e1 − e2, f⟩|` over probes with `f(0) = f′(0) = 0`.
    pub d_lambda_discrepancy: f64,
    /// The fish graph in four dimensions: scaling degree, dimension, divergence.
    pub four_d: (i64, i64, i64),
}

pub const AMBIGUITY_ZERO_TOL: f64 = 1e-8;

/// Generic probe for scaling regressions.
pub fn scaling_probe() -> TestFunction1D {
    TestFunction1D::real_poly_window(&[1.0, 0.3, -0.7, 0.2], Window::new(0.1, 0.4, 0.9))
}

/// Probes whose derivatives at the origin vanish through order `lambda`.
pub fn d_lambda_probes(lambda: usize) -> Vec<TestFunction1D> {
    let w = WProjection::standard(lambda as i64);
    let mut out: Vec<TestFunction1D> = super::extension::probe_family().iter().map(|f| w_project(f, &w)).collect();
    out.push(TestFunction1D::monomial_window(lambda + 1, Window::new(0.0, 0.3, 0.7)));
    out.push(TestFunction1D::monomial_window(lambda + 2, Window::new(-0.2, 0.4, 1.1)));
    // windows in their transition zone at the origin: low derivatives vanish only to rounding
    out.push(TestFunction1D::monomial_window(lambda + 1, Window::new(0.6, 0.2, 1.0)));
    out.push(TestFunction1D::monomial_window(lambda + 1, Window::new(-0.5, 0.1, 0.9)));
    out
}

pub fn feynman_square_demo() -> Result<FeynmanSquareReport, EgError> {
    let prop = SymbolicDistribution1D::x_plus_i0(-1.0);
    let square = prop.product_off_origin(&prop)?;
    let sd = square.scaling_degree()?;
    let div = square.divergence_degree(1)?;
    let lambda = super::extension::projection_order(div).unwrap_or(0);
    let e1 = extend(&square, &WProjection::standard(lambda))?;
    let e2 = extend(&square, &WProjection::shifted(lambda))?;
    let probe = scaling_probe();
    let sd_num = scaling_degree_numeric(&SymbolicDistribution1D::x_plus_i0(-2.0), &probe)?;
    let sd_ext = scaling_degree_numeric(&e1, &probe)?;
    let sd_ext_corr = scaling_degree_numeric_corrected(&e1, &probe, 1, 1)?;
    let ambiguity = extension_ambiguity(&e1, &e2, lambda as usize + 1)?;
    let ambiguity_dimension = ambiguity.dimension(AMBIGUITY_ZERO_TOL);
    let mut d_lambda_discrepancy: f64 = 0.0;
    for f in d_lambda_probes(lambda as usize) {
        d_lambda_discrepancy = d_lambda_discrepancy.max((e1.pair_with(&f)? - e2.pair_with(&f)?).norm());
    }
    let fish = Multigraph::from_lines(2, &[((1, 2), 2)]).expect("no self-lines");
    let div4 = divergence_degree(&fish, 4);
    Ok(FeynmanSquareReport {
        square,
        scaling_degree: sd,
        divergence_degree: div,
        lambda,
        scaling_degree_numeric: sd_num,
        extension_scaling_degree_numeric: sd_ext,
        extension_scaling_degree_corrected: sd_ext_corr,
        extensions: [e1, e2],
        ambiguity,
        ambiguity_dimension,
        d_lambda_discrepancy,
        four_d: (div4 + 4, 4, div4),
    })
}
