//! `⟨t, f⟩` for closed-form distributions.
//!
//! Power-type terms are paired by subtracting the Taylor polynomial of `f`
//! on `[-1, 1]`, integrating the remainder numerically, and adding the
//! moments `∫_{-1}^{1} t(x) x^k dx` in closed form (analytically continued in
//! the exponent where the integral itself diverges).

use super::distribution::{Side, SymbolicDistribution1D, Term, TermKind};
use super::quad::{integrate_pieces, Node};
use super::testfn::TestFunction1D;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

pub const QUAD_TOL: f64 = 1e-12;
/// Taylor coefficients below this are treated as vanishing.
pub const VANISHING_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("divergent pairing: {0}")]
    DivergentPairing(String),
    #[error("distribution depends on ζ; evaluate the family first")]
    UnresolvedFamily,
}

/// What the pairing needs from a test function.
pub trait Probe {
    /// Enclosing interval of the support; `None` for the zero function.
    fn support(&self) -> Option<(f64, f64)>;
    /// Points where the function is not analytic, or where quadrature should split.
    fn breakpoints(&self) -> Vec<f64>;
    fn value(&self, x: f64) -> Complex64;
    fn derivative_at_zero(&self, k: usize) -> Complex64;
    /// `f^{(k)}(0)` for `k ≤ order` and `x ↦ f(x) − Σ_{k ≤ order} f^{(k)}(0) x^k/k!`.
    fn taylor(&self, order: isize) -> (Vec<Complex64>, Box<dyn Fn(f64) -> Complex64 + '_>);
}

impl Probe for TestFunction1D {
    fn support(&self) -> Option<(f64, f64)> {
        TestFunction1D::support(self)
    }

    fn breakpoints(&self) -> Vec<f64> {
        TestFunction1D::breakpoints(self)
    }

    fn value(&self, x: f64) -> Complex64 {
        TestFunction1D::value(self, x)
    }

    fn derivative_at_zero(&self, k: usize) -> Complex64 {
        TestFunction1D::derivative_at_zero(self, k)
    }

    fn taylor(&self, order: isize) -> (Vec<Complex64>, Box<dyn Fn(f64) -> Complex64 + '_>) {
        let ts = self.taylor_split(order);
        let derivs = ts.derivs[..(order + 1).max(0) as usize].to_vec();
        (derivs, Box::new(move |x| self.remainder(x, &ts)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Strict,
    Continued,
}

/// `(e^z − 1)/z`, stable near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for n in 1..30 {
            term *= z / (n as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `∫_{-1}^{1} (x ± i0)^b x^k dx = (1 + (−1)^k e^{±iπb})/(b + k + 1)`, entire in `b`.
fn boundary_moment0(b: Complex64, k: usize, sigma: f64) -> Complex64 {
    let eps = b + (k as f64 + 1.0);
    let ispi = Complex64::new(0.0, sigma * PI);
    if eps.norm() < 0.25 {
        // 1 + (−1)^k e^{iσπb} = 1 − e^{iσπε}
        -ispi * phi1(ispi * eps)
    } else {
        let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
        (1.0 + sgn * (ispi * b).exp()) / eps
    }
}

/// `p`-th derivative in `b` of [`boundary_moment0`], by a Cauchy integral.
fn boundary_moment(a: Complex64, k: usize, p: usize, sigma: f64) -> Complex64 {
    if p == 0 {
        return boundary_moment0(a, k, sigma);
    }
    let r = 0.5;
    let n = 64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        let e = Complex64::from_polar(1.0, th);
        acc += boundary_moment0(a + e * r, k, sigma) * Complex64::from_polar(1.0, -(p as f64) * th);
    }
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    acc * fact / (n as f64 * r.powi(p as i32))
}

/// `∫_0^1 x^{a+k} log^p x dx = (−1)^p p!/(a+k+1)^{p+1}`, or `None` at the pole.
fn half_line_moment(a: Complex64, k: usize, p: usize) -> Option<Complex64> {
    let e = a + (k as f64 + 1.0);
    if e.norm() < 1e-12 {
        return None;
    }
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    let sgn = if p % 2 == 0 { 1.0 } else { -1.0 };
    Some(Complex64::new(sgn * fact, 0.0) / e.powu(p as u32 + 1))
}

fn cpow_abs(x: f64, a: Complex64) -> Complex64 {
    (a * x.abs().ln()).exp()
}

/// Pointwise value of a power-type term at `x ≠ 0`.
fn power_value(kind: &TermKind, x: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        TermKind::PowerPlusI0(a, p) | TermKind::PowerMinusI0(a, p) => {
            let sigma = if matches!(kind, TermKind::PowerPlusI0(..)) { 1.0 } else { -1.0 };
            let a = a.base;
            let l = x.abs().ln();
            if x > 0.0 {
                cpow_abs(x, a) * Complex64::new(l, 0.0).powu(*p as u32)
            } else {
                let ispi = Complex64::new(0.0, sigma * PI);
                (ispi * a).exp() * cpow_abs(x, a) * (Complex64::new(l, 0.0) + ispi).powu(*p as u32)
            }
        }
        TermKind::HalfLinePower(side, a, p) => {
            let on = match side {
                Side::Plus => x > 0.0,
                Side::Minus => x < 0.0,
            };
            if on {
                cpow_abs(x, a.base) * x.abs().ln().powi(*p as i32)
            } else {
                zero
            }
        }
        TermKind::Monomial(m) => Complex64::new(x.powi(*m as i32), 0.0),
        TermKind::HeavisideMonomial(m) => {
            if x > 0.0 {
                Complex64::new(x.powi(*m as i32), 0.0)
            } else {
                zero
            }
        }
        TermKind::Delta(_) => zero,
    }
}

fn breaks_within(f: &dyn Probe, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = f.breakpoints().into_iter().filter(|&x| x > lo && x < hi).collect();
    b.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    b.push(lo);
    b.push(hi);
    b.sort_by(|a, c| a.partial_cmp(c).expect("finite"));
    b.dedup();
    b
}

/// Abscissa with full relative precision next to the origin.
fn abscissa(node: Node, lo: f64, hi: f64) -> f64 {
    if lo == 0.0 {
        node.from_a
    } else if hi == 0.0 {
        -node.from_b
    } else {
        node.x
    }
}

fn integrate_product(kind: &TermKind, lo: f64, hi: f64, mut g: impl FnMut(f64) -> Complex64, f: &dyn Probe) -> Complex64 {
    let breaks = breaks_within(f, lo, hi, &[0.0]);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        acc += integrate_pieces(&[a, b], QUAD_TOL, |n| {
            let x = abscissa(n, a, b);
            if x == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            power_value(kind, x) * g(x)
        });
    }
    acc
}

/// Smallest order leaving an integrand no worse than `|x|^{-1/2}` at the origin.
fn taylor_order(re_a: f64) -> isize {
    ((-re_a - 1.5).ceil() as isize).max(-1)
}

fn pair_power(term: &TermKind, f: &dyn Probe, mode: Mode) -> Result<Complex64, PairingError> {
    let (a, p) = match term {
        TermKind::PowerPlusI0(a, p) | TermKind::PowerMinusI0(a, p) | TermKind::HalfLinePower(_, a, p) => (a.base, *p),
        _ => unreachable!("power-type term expected"),
    };
    let Some((lo, hi)) = f.support() else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let order = taylor_order(a.re);
    let (derivs, remainder) = f.taylor(order);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut fact = 1.0;
    for k in 0..(order + 1).max(0) as usize {
        if k > 0 {
            fact *= k as f64;
        }
        let c = derivs[k] / fact;
        let small = derivs[k].norm() <= VANISHING_TOL;
        let moment = match term {
            TermKind::PowerPlusI0(..) => Some(boundary_moment(a, k, p, 1.0)),
            TermKind::PowerMinusI0(..) => Some(boundary_moment(a, k, p, -1.0)),
            TermKind::HalfLinePower(side, ..) => {
                let integrable = a.re + k as f64 + 1.0 > 0.0;
                if mode == Mode::Strict && !integrable && !small {
                    return Err(PairingError::DivergentPairing(format!(
                        "f^({k})(0) = {:.3e} meets a non-integrable half-line power {a}",
                        derivs[k].norm()
                    )));
                }
                let sgn = match side {
                    Side::Plus => 1.0,
                    Side::Minus => {
                        if k % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                half_line_moment(a, k, p).map(|m| m * sgn)
            }
            _ => unreachable!(),
        };
        match moment {
            Some(m) => acc += c * m,
            None if small => {}
            None => {
                return Err(PairingError::DivergentPairing(format!(
                    "pole of the continued moment at order {k} with f^({k})(0) = {:.3e}",
                    derivs[k].norm()
                )))
            }
        }
    }
    acc += integrate_product(term, -1.0, 1.0, |x| remainder(x), f);
    if lo < -1.0 {
        acc += integrate_product(term, lo, -1.0, |x| f.value(x), f);
    }
    if hi > 1.0 {
        acc += integrate_product(term, 1.0, hi, |x| f.value(x), f);
    }
    Ok(acc)
}

fn pair_term(t: &Term, f: &dyn Probe, mode: Mode) -> Result<Complex64, PairingError> {
    let v = match &t.kind {
        TermKind::Delta(k) => {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            f.derivative_at_zero(*k) * s
        }
        TermKind::Monomial(_) | TermKind::HeavisideMonomial(_) => match f.support() {
            Some((lo, hi)) => integrate_product(&t.kind, lo, hi, |x| f.value(x), f),
            None => Complex64::new(0.0, 0.0),
        },
        _ => pair_power(&t.kind, f, mode)?,
    };
    Ok(t.coeff * v)
}

fn pair_with(t: &SymbolicDistribution1D, f: &dyn Probe, mode: Mode) -> Result<Complex64, PairingError> {
    if t.is_family() {
        return Err(PairingError::UnresolvedFamily);
    }
    t.terms.iter().map(|term| pair_term(term, f, mode)).sum()
}

/// Pairing of a distribution that is defined on `f`: half-line powers whose
/// non-integrable Taylor orders meet nonvanishing derivatives are rejected.
pub fn pair(t: &SymbolicDistribution1D, f: &TestFunction1D) -> Result<Complex64, PairingError> {
    pair_with(t, f, Mode::Strict)
}

/// Pairing by analytic continuation in the exponents; fails only at poles.
pub fn pair_continued(t: &SymbolicDistribution1D, f: &TestFunction1D) -> Result<Complex64, PairingError> {
    pair_with(t, f, Mode::Continued)
}

/// [`pair`] for any [`Probe`]; `strict = false` continues in the exponents.
pub fn pair_probe(t: &SymbolicDistribution1D, f: &dyn Probe, strict: bool) -> Result<Complex64, PairingError> {
    pair_with(t, f, if strict { Mode::Strict } else { Mode::Continued })
}

/// `⟨t^ζ, f⟩` for a family.
pub fn pair_family(t: &SymbolicDistribution1D, f: &TestFunction1D, zeta: Complex64) -> Result<Complex64, PairingError> {
    pair_continued(&t.at(zeta), f)
}
