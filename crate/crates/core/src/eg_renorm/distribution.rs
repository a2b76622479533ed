//! Closed-form distributions on ℝ and families depending linearly on a
//! regularization parameter `ζ` through their exponents.

use num_complex::Complex64;
use std::fmt;

/// `a₀ + s ζ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    pub base: Complex64,
    pub slope: Complex64,
}

impl Exponent {
    pub fn constant(a: f64) -> Self {
        Self { base: Complex64::new(a, 0.0), slope: Complex64::new(0.0, 0.0) }
    }

    pub fn complex(a: Complex64) -> Self {
        Self { base: a, slope: Complex64::new(0.0, 0.0) }
    }

    pub fn family(base: f64, slope: f64) -> Self {
        Self { base: Complex64::new(base, 0.0), slope: Complex64::new(slope, 0.0) }
    }

    pub fn at(&self, zeta: Complex64) -> Complex64 {
        self.base + self.slope * zeta
    }

    pub fn is_constant(&self) -> bool {
        self.slope == Complex64::new(0.0, 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
    /// `δ^{(k)}`.
    Delta(usize),
    /// `x^m`.
    Monomial(usize),
    /// `θ(x) x^m`.
    HeavisideMonomial(usize),
    /// `(x + i0)^a log^p(x + i0)`.
    PowerPlusI0(Exponent, usize),
    /// `(x − i0)^a log^p(x − i0)`.
    PowerMinusI0(Exponent, usize),
    /// `x_±^a log^p|x|`.
    HalfLinePower(Side, Exponent, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub kind: TermKind,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SymbolicDistribution1D {
    pub terms: Vec<Term>,
}

impl Term {
    pub fn new(coeff: Complex64, kind: TermKind) -> Self {
        Self { coeff, kind }
    }

    fn exponent(&self) -> Option<&Exponent> {
        match &self.kind {
            TermKind::PowerPlusI0(a, _) | TermKind::PowerMinusI0(a, _) | TermKind::HalfLinePower(_, a, _) => Some(a),
            _ => None,
        }
    }

    /// Concrete term at a value of `ζ`.
    pub fn at(&self, zeta: Complex64) -> Term {
        let fix = |a: &Exponent| Exponent::complex(a.at(zeta));
        let kind = match &self.kind {
            TermKind::PowerPlusI0(a, p) => TermKind::PowerPlusI0(fix(a), *p),
            TermKind::PowerMinusI0(a, p) => TermKind::PowerMinusI0(fix(a), *p),
            TermKind::HalfLinePower(s, a, p) => TermKind::HalfLinePower(*s, fix(a), *p),
            k => k.clone(),
        };
        Term { coeff: self.coeff, kind }
    }

    /// Scaling degree on ℝ¹.
    pub fn scaling_degree(&self) -> f64 {
        match &self.kind {
            TermKind::Delta(k) => 1.0 + *k as f64,
            TermKind::Monomial(m) | TermKind::HeavisideMonomial(m) => -(*m as f64),
            TermKind::PowerPlusI0(a, _) | TermKind::PowerMinusI0(a, _) | TermKind::HalfLinePower(_, a, _) => -a.base.re,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistributionError {
    NotHomogeneousClass(String),
}

impl fmt::Display for DistributionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionError::NotHomogeneousClass(s) => write!(f, "not a homogeneous-type distribution: {s}"),
        }
    }
}

impl std::error::Error for DistributionError {}

impl SymbolicDistribution1D {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn single(coeff: Complex64, kind: TermKind) -> Self {
        Self { terms: vec![Term::new(coeff, kind)] }
    }

    pub fn delta(k: usize) -> Self {
        Self::single(Complex64::new(1.0, 0.0), TermKind::Delta(k))
    }

    pub fn x_plus_i0(a: f64) -> Self {
        Self::single(Complex64::new(1.0, 0.0), TermKind::PowerPlusI0(Exponent::constant(a), 0))
    }

    pub fn half_line(side: Side, a: f64) -> Self {
        Self::single(Complex64::new(1.0, 0.0), TermKind::HalfLinePower(side, Exponent::constant(a), 0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { terms: self.terms.iter().map(|t| Term::new(t.coeff * c, t.kind.clone())).collect() }
    }

    pub fn is_family(&self) -> bool {
        self.terms.iter().any(|t| t.exponent().is_some_and(|a| !a.is_constant()))
    }

    pub fn at(&self, zeta: Complex64) -> Self {
        Self { terms: self.terms.iter().map(|t| t.at(zeta)).collect() }
    }

    pub fn has_delta(&self) -> bool {
        self.terms.iter().any(|t| matches!(t.kind, TermKind::Delta(_)))
    }

    /// Symbolic scaling degree: the largest term degree.
    pub fn scaling_degree(&self) -> Result<f64, DistributionError> {
        if self.is_family() {
            return Err(DistributionError::NotHomogeneousClass("ζ-dependent exponents".into()));
        }
        let live: Vec<&Term> = self.terms.iter().filter(|t| t.coeff != Complex64::new(0.0, 0.0)).collect();
        if live.is_empty() {
            return Err(DistributionError::NotHomogeneousClass("zero distribution".into()));
        }
        Ok(live.iter().map(|t| t.scaling_degree()).fold(f64::NEG_INFINITY, f64::max))
    }

    /// `sd(t) − n`.
    pub fn divergence_degree(&self, n: usize) -> Result<f64, DistributionError> {
        Ok(self.scaling_degree()? - n as f64)
    }

    /// Rewrite every non-δ term as half-line powers, valid away from the origin.
    pub fn to_half_lines(&self) -> Result<Vec<(Complex64, Side, Complex64, usize)>, DistributionError> {
        let mut out = Vec::new();
        let i_pi = Complex64::new(0.0, std::f64::consts::PI);
        for t in &self.terms {
            match &t.kind {
                TermKind::Delta(_) => {}
                TermKind::Monomial(m) => {
                    let a = Complex64::new(*m as f64, 0.0);
                    out.push((t.coeff, Side::Plus, a, 0));
                    out.push((t.coeff * if m % 2 == 0 { 1.0 } else { -1.0 }, Side::Minus, a, 0));
                }
                TermKind::HeavisideMonomial(m) => out.push((t.coeff, Side::Plus, Complex64::new(*m as f64, 0.0), 0)),
                TermKind::HalfLinePower(s, a, p) => out.push((t.coeff, *s, a.base, *p)),
                TermKind::PowerPlusI0(a, p) | TermKind::PowerMinusI0(a, p) => {
                    if *p > 0 {
                        return Err(DistributionError::NotHomogeneousClass(
                            "log powers of boundary values do not split into single half-line terms".into(),
                        ));
                    }
                    let sign = if matches!(t.kind, TermKind::PowerPlusI0(..)) { 1.0 } else { -1.0 };
                    out.push((t.coeff, Side::Plus, a.base, 0));
                    out.push((t.coeff * (i_pi * sign * a.base).exp(), Side::Minus, a.base, 0));
                }
            }
        }
        Ok(out)
    }

    /// Pointwise product on ℝ∖{0}, expressed through half-line powers.
    pub fn product_off_origin(&self, other: &Self) -> Result<Self, DistributionError> {
        if self.is_family() || other.is_family() {
            return Err(DistributionError::NotHomogeneousClass("families".into()));
        }
        let a = self.to_half_lines()?;
        let b = other.to_half_lines()?;
        let mut terms: Vec<Term> = Vec::new();
        for (ca, sa, ea, pa) in &a {
            for (cb, sb, eb, pb) in &b {
                if sa != sb {
                    continue;
                }
                let c = ca * cb;
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let kind = TermKind::HalfLinePower(*sa, Exponent::complex(ea + eb), pa + pb);
                if let Some(t) = terms.iter_mut().find(|t| t.kind == kind) {
                    t.coeff += c;
                } else {
                    terms.push(Term::new(c, kind));
                }
            }
        }
        terms.retain(|t| t.coeff.norm() > 1e-15);
        Ok(Self { terms })
    }
}

impl fmt::Display for SymbolicDistribution1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let exp = |a: &Exponent| -> String {
            let b = if a.base.im == 0.0 { format!("{}", a.base.re) } else { format!("{}{:+}i", a.base.re, a.base.im) };
            if a.is_constant() {
                b
            } else if a.slope.im == 0.0 {
                format!("{b}{:+}z", a.slope.re)
            } else {
                format!("{b}+({}{:+}i)z", a.slope.re, a.slope.im)
            }
        };
        let with_p = |a: &Exponent, p: usize| if p == 0 { exp(a) } else { format!("{},{p}", exp(a)) };
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i) * ", t.coeff.re, t.coeff.im)?;
            match &t.kind {
                TermKind::Delta(k) => write!(f, "delta({k})")?,
                TermKind::Monomial(m) => write!(f, "mono({m})")?,
                TermKind::HeavisideMonomial(m) => write!(f, "heaviside({m})")?,
                TermKind::PowerPlusI0(a, p) => write!(f, "xpi0({})", with_p(a, *p))?,
                TermKind::PowerMinusI0(a, p) => write!(f, "xmi0({})", with_p(a, *p))?,
                TermKind::HalfLinePower(Side::Plus, a, p) => write!(f, "xplus({})", with_p(a, *p))?,
                TermKind::HalfLinePower(Side::Minus, a, p) => write!(f, "xminus({})", with_p(a, *p))?,
            }
        }
        Ok(())
    }
}
