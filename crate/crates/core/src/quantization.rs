//! Deformation quantization of polynomial functionals: star products, normal
//! ordering, time-ordered products, the Bogoliubov map, the interacting star
//! product and the formal S-matrix.
//!
//! Conventions: `⋆` contracts with `(i/2)Δ`, `⋆_H` with `Δ⁺`, `·_T` with `iΔ^D`
//! and `·_{T′}` with `Δ^F`. A kernel `K` enters as
//! `F ⋆_K G = Σ_n ħ^n/n! ⟨F^{(n)}, K^{⊗n} G^{(n)}⟩`, and `α_K = e^{(ħ/2)Γ_K}`
//! with `Γ_K = ⟨K, δ²/δφ²⟩`.

use crate::formal_series::FormalSeries;
use crate::functionals::{contract_series, FunctionalError, KernelCache, Monomial, PolyFunctional};
use crate::lattice::{PropagatorKernel, PropagatorSet};
use crate::scalar::{self, Scalar};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("interaction has a λ⁰ component; the time-ordered exponential needs λ-grading")]
    NoLambdaGrading,
    #[error("propagator set lacks the Hadamard part required by {0:?}")]
    MissingHadamard(ProductKind),
    #[error("multiplication map has rank {rank} < {expected} after {probes} probes")]
    RankDeficient { rank: usize, expected: usize, probes: usize },
    #[error("basis element {0} does not vanish at φ = 0")]
    NotVanishingAtZero(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProductKind {
    Star,
    StarH,
    TimeOrderedD,
    TimeOrderedF,
}

impl ProductKind {
    pub fn kernel(self) -> PropagatorKernel {
        match self {
            ProductKind::Star => PropagatorKernel::star(),
            ProductKind::StarH => PropagatorKernel::plus(),
            ProductKind::TimeOrderedD => PropagatorKernel::dirac_i(),
            ProductKind::TimeOrderedF => PropagatorKernel::feynman(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProductKind::Star => "star",
            ProductKind::StarH => "star_H",
            ProductKind::TimeOrderedD => "timeordered_D",
            ProductKind::TimeOrderedF => "timeordered_F",
        }
    }
}

/// Kernel used by normal ordering and the time-ordering maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SelfKernel {
    /// `H`, giving `α_H`.
    Hadamard,
    /// `iΔ^D`, giving `T`.
    DiracI,
    /// `Δ^F`, giving `T′`.
    Feynman,
}

impl SelfKernel {
    fn kernel(self) -> PropagatorKernel {
        match self {
            SelfKernel::Hadamard => PropagatorKernel::hadamard(),
            SelfKernel::DiracI => PropagatorKernel::dirac_i(),
            SelfKernel::Feynman => PropagatorKernel::feynman(),
        }
    }
}

/// Product machinery bound to one propagator set; kernel values are memoized.
pub struct Quantizer<'a> {
    ps: &'a PropagatorSet,
    cache: RefCell<HashMap<(ProductKind, usize, usize), Scalar>>,
    self_cache: RefCell<HashMap<(SelfKernel, usize, usize), Scalar>>,
}

impl<'a> Quantizer<'a> {
    pub fn new(ps: &'a PropagatorSet) -> Self {
        Self { ps, cache: RefCell::new(HashMap::new()), self_cache: RefCell::new(HashMap::new()) }
    }

    pub fn propagators(&self) -> &PropagatorSet {
        self.ps
    }

    fn check_kind(&self, kind: ProductKind) -> Result<(), QuantError> {
        if kind.kernel().needs_hadamard() && !self.ps.has_hadamard() {
            return Err(QuantError::MissingHadamard(kind));
        }
        Ok(())
    }

    /// Exact kernel value of a product kind.
    pub fn kernel_value(&self, kind: ProductKind, x: usize, y: usize) -> Scalar {
        if let Some(v) = self.cache.borrow().get(&(kind, x, y)) {
            return v.clone();
        }
        let v = kind.kernel().eval(self.ps, x, y);
        self.cache.borrow_mut().insert((kind, x, y), v.clone());
        v
    }

    /// Symmetrized kernel `(K(x,y) + K(y,x))/2` for self-contractions.
    fn self_value(&self, k: SelfKernel, x: usize, y: usize) -> Scalar {
        let key = if x <= y { (k, x, y) } else { (k, y, x) };
        if let Some(v) = self.self_cache.borrow().get(&key) {
            return v.clone();
        }
        let kern = k.kernel();
        let v = if x == y {
            kern.eval(self.ps, x, y)
        } else {
            (kern.eval(self.ps, x, y) + kern.eval(self.ps, y, x)) * scalar::real(scalar::rat(1, 2))
        };
        self.self_cache.borrow_mut().insert(key, v.clone());
        v
    }

    /// `F ⋆_K G` for the kernel of `kind`.
    pub fn product(&self, kind: ProductKind, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        self.check_kind(kind)?;
        let mut cache = KernelCache::new(|x, y| self.kernel_value(kind, x, y));
        Ok(contract_series(f, g, &mut cache, 0)?)
    }

    pub fn star(&self, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        self.product(ProductKind::Star, f, g)
    }

    pub fn star_h(&self, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        self.product(ProductKind::StarH, f, g)
    }

    pub fn time_ordered(&self, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        self.product(ProductKind::TimeOrderedD, f, g)
    }

    pub fn time_ordered_f(&self, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        self.product(ProductKind::TimeOrderedF, f, g)
    }

    /// `[F, G]` with respect to a product kind.
    pub fn commutator(&self, kind: ProductKind, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        Ok(self.product(kind, f, g)?.sub(&self.product(kind, g, f)?))
    }

    /// `e^{±(ħ/2)Γ_K} F`: every partial matching of factor positions inside a monomial
    /// contributes `(±ħ)^{pairs} Π K_sym`.
    pub fn alpha(&self, k: SelfKernel, f: &PolyFunctional, sign: i32) -> Result<PolyFunctional, QuantError> {
        if k != SelfKernel::DiracI && !self.ps.has_hadamard() {
            return Err(QuantError::MissingHadamard(ProductKind::StarH));
        }
        let th = f.trunc_h() as usize;
        let sgn = scalar::sc(sign.signum() as i64, 0);
        let mut out = f.space().zero();
        for (m, c) in f.terms() {
            let h0 = c.min_hbar_order().unwrap_or(0) as usize;
            let max_pairs = th.saturating_sub(h0).min(m.len() / 2);
            for ((n, rest), w) in self.self_matchings(k, m, max_pairs) {
                let mut weight = w;
                for _ in 0..n {
                    weight *= &sgn;
                }
                out.add_term(rest, c.scale(&weight).shift_h(n as u32));
            }
        }
        Ok(out)
    }

    fn self_matchings(&self, k: SelfKernel, m: &[usize], max_pairs: usize) -> BTreeMap<(usize, Monomial), Scalar> {
        let mut out: BTreeMap<(usize, Monomial), Scalar> = BTreeMap::new();
        let mut used = vec![false; m.len()];
        let mut rest = Vec::new();
        self.self_rec(k, m, 0, 0, scalar::sc_one(), max_pairs, &mut used, &mut rest, &mut out);
        out.retain(|_, v| !scalar::is_zero(v));
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn self_rec(
        &self,
        k: SelfKernel,
        m: &[usize],
        i: usize,
        pairs: usize,
        weight: Scalar,
        max_pairs: usize,
        used: &mut Vec<bool>,
        rest: &mut Vec<usize>,
        out: &mut BTreeMap<(usize, Monomial), Scalar>,
    ) {
        if i == m.len() {
            let e = out.entry((pairs, rest.clone())).or_insert_with(scalar::sc_zero);
            *e += weight;
            return;
        }
        if used[i] {
            self.self_rec(k, m, i + 1, pairs, weight, max_pairs, used, rest, out);
            return;
        }
        rest.push(m[i]);
        self.self_rec(k, m, i + 1, pairs, weight.clone(), max_pairs, used, rest, out);
        rest.pop();
        if pairs < max_pairs {
            for j in i + 1..m.len() {
                if used[j] {
                    continue;
                }
                let kv = self.self_value(k, m[i], m[j]);
                if scalar::is_zero(&kv) {
                    continue;
                }
                used[j] = true;
                self.self_rec(k, m, i + 1, pairs + 1, &weight * &kv, max_pairs, used, rest, out);
                used[j] = false;
            }
        }
    }

    /// `Γ_K F = Σ_{x,y} K(x,y) ∂²F/∂φ_x∂φ_y`, without `ħ`.
    pub fn gamma(&self, k: SelfKernel, f: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        let two = scalar::sc(2, 0);
        let mut out = f.space().zero();
        for (m, c) in f.terms() {
            for ((n, rest), w) in self.self_matchings(k, m, 1) {
                if n == 1 {
                    out.add_term(rest, c.scale(&(&w * &two)));
                }
            }
        }
        Ok(out)
    }

    pub fn alpha_h(&self, f: &PolyFunctional, sign: i32) -> Result<PolyFunctional, QuantError> {
        self.alpha(SelfKernel::Hadamard, f, sign)
    }

    /// `F ⋆_H G − α_H(α_H⁻¹F ⋆ α_H⁻¹G)`.
    pub fn star_h_equivalence_residual(&self, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        let lhs = self.star_h(f, g)?;
        let rhs = self.alpha_h(&self.star(&self.alpha_h(f, -1)?, &self.alpha_h(g, -1)?)?, 1)?;
        Ok(lhs.sub(&rhs))
    }

    fn require_lambda(v: &PolyFunctional) -> Result<(), QuantError> {
        for (_, c) in v.terms() {
            if c.terms().any(|((_, l), _)| *l == 0) {
                return Err(QuantError::NoLambdaGrading);
            }
        }
        Ok(())
    }

    /// `Σ_n V^{·n}/n!` for a λ-graded `V` and a time-ordered product kind.
    pub fn exp_product(&self, kind: ProductKind, v: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        Self::require_lambda(v)?;
        let one = v.space().one();
        let mut acc = one.clone();
        let mut power = one;
        for n in 1..=v.trunc_l() {
            power = self.product(kind, &power, v)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power.scale(&scalar::real(scalar::factorial(n).recip())));
        }
        Ok(acc)
    }

    /// Time-ordered exponential `e_T(V)` with the Dirac propagator.
    pub fn exp_t(&self, v: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        self.exp_product(ProductKind::TimeOrderedD, v)
    }

    /// Inverse with respect to a star product, for `A = c + (λ-graded)`.
    pub fn star_inverse(&self, kind: ProductKind, a: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        let space = a.space();
        let mut c0 = FormalSeries::zero(a.trunc_h(), a.trunc_l());
        let mut rest = space.zero();
        for (m, c) in a.terms() {
            for ((h, l), v) in c.terms() {
                let piece = FormalSeries::monomial(*h, *l, v.clone(), a.trunc_h(), a.trunc_l());
                if *l == 0 {
                    if !m.is_empty() {
                        return Err(QuantError::NoLambdaGrading);
                    }
                    c0 = &c0 + &piece;
                } else {
                    rest.add_term(m.clone(), piece);
                }
            }
        }
        let c0_inv = c0.inv().map_err(FunctionalError::from)?;
        // A = c0 (1 + N) with N = c0⁻¹ rest; c0 is a constant functional so it is central
        let n = rest.scale_series(&c0_inv);
        let minus_n = n.neg();
        let one = space.one();
        let mut acc = one.clone();
        let mut power = one;
        for _ in 1..=a.trunc_l() {
            power = self.product(kind, &power, &minus_n)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.scale_series(&c0_inv))
    }

    /// Bogoliubov map `R(F) = (e_T S)^{⋆−1} ⋆ (e_T S ·_T F)`, or its inverse
    /// `R⁻¹(F) = e_T(−S) ·_T (e_T S ⋆ F)`.
    pub fn bogoliubov(&self, s: &PolyFunctional, f: &PolyFunctional, inverse: bool) -> Result<PolyFunctional, QuantError> {
        self.bogoliubov_with(ProductKind::Star, s, f, inverse)
    }

    pub fn bogoliubov_with(
        &self,
        star: ProductKind,
        s: &PolyFunctional,
        f: &PolyFunctional,
        inverse: bool,
    ) -> Result<PolyFunctional, QuantError> {
        Self::require_lambda(s)?;
        let es = self.exp_t(s)?;
        if inverse {
            let ems = self.exp_t(&s.neg())?;
            self.time_ordered(&ems, &self.product(star, &es, f)?)
        } else {
            let inv = self.star_inverse(star, &es)?;
            self.product(star, &inv, &self.time_ordered(&es, f)?)
        }
    }

    /// `F ⋆_S G = R⁻¹(R F ⋆ R G)`.
    pub fn star_interacting(&self, s: &PolyFunctional, f: &PolyFunctional, g: &PolyFunctional) -> Result<PolyFunctional, QuantError> {
        let rf = self.bogoliubov(s, f, false)?;
        let rg = self.bogoliubov(s, g, false)?;
        self.bogoliubov(s, &self.star(&rf, &rg)?, true)
    }

    /// `𝒮(V) = Σ_{n ≤ order} V^{·_{T′} n}/n!`.
    pub fn s_matrix(&self, v: &PolyFunctional, order: u32) -> Result<PolyFunctional, QuantError> {
        self.s_matrix_with(ProductKind::TimeOrderedF, v, order)
    }

    pub fn s_matrix_with(&self, kind: ProductKind, v: &PolyFunctional, order: u32) -> Result<PolyFunctional, QuantError> {
        let one = v.space().one();
        let mut acc = one.clone();
        let mut power = one;
        for n in 1..=order {
            power = self.product(kind, &power, v)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power.scale(&scalar::real(scalar::factorial(n).recip())));
        }
        Ok(acc)
    }

    /// Term-by-term check of the ⋆_H expansion of `∫φ²f₁ ⋆_H ∫φ²f₂`.
    pub fn wick_theorem_demo(&self, f1: &[f64], f2: &[f64], trunc_h: u32) -> Result<WickReport, QuantError> {
        self.check_kind(ProductKind::StarH)?;
        let space = crate::functionals::FunctionalSpace::for_lattice(self.ps.lattice(), trunc_h, 0);
        let a = space.local_power(f1, 2);
        let b = space.local_power(f2, 2);
        let product = self.star_h(&a, &b)?;
        let v = &space.volume;
        let v2 = scalar::real(v * v);
        // independently assembled three-term form with coefficients 4 and 2
        let mut one_line = space.zero();
        let mut two_line = scalar::sc_zero();
        let mut one_line_norm = scalar::sc_zero();
        for (x, &wx) in f1.iter().enumerate() {
            if wx == 0.0 {
                continue;
            }
            for (y, &wy) in f2.iter().enumerate() {
                if wy == 0.0 {
                    continue;
                }
                let k = self.kernel_value(ProductKind::StarH, x, y);
                let w = &v2 * scalar::real(scalar::exact_f64(wx) * scalar::exact_f64(wy));
                let kw = &k * &w;
                one_line.add_term(
                    if x <= y { vec![x, y] } else { vec![y, x] },
                    FormalSeries::monomial(1, 0, &kw * scalar::sc(4, 0), trunc_h, 0),
                );
                one_line_norm += &kw;
                two_line += &kw * &k;
            }
        }
        let square = a.mul(&b)?;
        let expected = square
            .add(&one_line)
            .add(&space.constant(FormalSeries::monomial(2, 0, &two_line * scalar::sc(2, 0), trunc_h, 0)));
        let matches = product == expected;
        let ratio = |num: Scalar, den: &Scalar| -> Option<Scalar> {
            if scalar::is_zero(den) {
                None
            } else {
                Some(num / den.clone())
            }
        };
        // extracted coefficients: evaluate the ħ¹ quadratic part at φ ≡ 1
        let ones = vec![1.0; space.n_sites];
        let h1 = product.hbar_component(1).homogeneous_part(2);
        let h1_val = h1.evaluate(&ones)?.coeff(1, 0);
        let h2_val = product.hbar_component(2).constant_part().coeff(2, 0);
        Ok(WickReport {
            classical_matches: product.hbar_component(0) == square,
            one_contraction_coefficient: ratio(h1_val, &one_line_norm),
            two_contraction_coefficient: ratio(h2_val, &two_line),
            matches_product: matches,
            product,
        })
    }
}

#[derive(Clone, Debug)]
pub struct WickReport {
    pub product: PolyFunctional,
    pub classical_matches: bool,
    /// Coefficient of `ħ Σ :φφ: Δ⁺ f₁f₂`; `None` when that term is absent.
    pub one_contraction_coefficient: Option<Scalar>,
    /// Coefficient of `ħ² Σ (Δ⁺)² f₁f₂`.
    pub two_contraction_coefficient: Option<Scalar>,
    pub matches_product: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub degree: usize,
    pub n_products: usize,
    pub rank: usize,
    pub probes: usize,
}

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Numerical rank of the multiplication map on symmetric tensors of exact degree
/// `degree` over the basis, from evaluations at random configurations.
pub fn multilocal_injectivity_check(
    basis: &[PolyFunctional],
    degree: usize,
    seed: u64,
) -> Result<RankReport, QuantError> {
    if basis.is_empty() || degree == 0 {
        return Ok(RankReport { degree, n_products: 0, rank: 0, probes: 0 });
    }
    let n_sites = basis[0].n_sites();
    for (i, b) in basis.iter().enumerate() {
        if !b.constant_part().is_zero() {
            return Err(QuantError::NotVanishingAtZero(i));
        }
    }
    let combos = multisets(basis.len(), degree);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hbar, lambda) = (0.37, 0.61);
    let mut probes = 2 * combos.len() + 4;
    let mut rank = 0;
    for _ in 0..4 {
        let mut m = DMatrix::<f64>::zeros(probes, 2 * combos.len());
        for p in 0..probes {
            let phi: Vec<f64> = (0..n_sites).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let vals: Vec<num_complex::Complex64> = basis
                .iter()
                .map(|b| b.evaluate_numeric(&phi, hbar, lambda))
                .collect::<Result<_, _>>()?;
            for (c, combo) in combos.iter().enumerate() {
                let v: num_complex::Complex64 = combo.iter().map(|&i| vals[i]).product();
                m[(p, 2 * c)] = v.re;
                m[(p, 2 * c + 1)] = v.im;
            }
        }
        // real and imaginary parts of one product span a complex line; keep the real rank of
        // the complex matrix by counting through its realification
        rank = complex_rank(&m, combos.len());
        if rank == combos.len() {
            return Ok(RankReport { degree, n_products: combos.len(), rank, probes });
        }
        probes *= 2;
    }
    Err(QuantError::RankDeficient { rank, expected: combos.len(), probes: probes / 2 })
}

/// Rank over ℂ of a matrix stored as interleaved real/imaginary columns.
fn complex_rank(m: &DMatrix<f64>, n_cols: usize) -> usize {
    let rows = m.nrows();
    // realification [[Re, −Im], [Im, Re]] has twice the complex rank
    let mut big = DMatrix::<f64>::zeros(2 * rows, 2 * n_cols);
    for r in 0..rows {
        for c in 0..n_cols {
            let (re, im) = (m[(r, 2 * c)], m[(r, 2 * c + 1)]);
            big[(r, c)] = re;
            big[(r, n_cols + c)] = -im;
            big[(rows + r, c)] = im;
            big[(rows + r, n_cols + c)] = re;
        }
    }
    let sv = big.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > 1e-9 * max).count() / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{peierls_bracket, FunctionalSpace};
    use crate::lattice::Lattice1p1;
    use rand::Rng;

    fn setup() -> (Lattice1p1, PropagatorSet) {
        let lat = Lattice1p1::new(10, 6, 0.5, 1.0, 1.0).unwrap();
        let ps = PropagatorSet::new(&lat).unwrap();
        (lat, ps)
    }

    fn weights(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
        let mut f = vec![0.0; n];
        for _ in 0..k {
            f[rng.gen_range(0..n)] = rng.gen_range(-1.0..1.0);
        }
        f
    }

    #[test]
    fn unit_and_canonical_commutator() {
        let (lat, ps) = setup();
        let q = Quantizer::new(&ps);
        let sp = FunctionalSpace::for_lattice(&lat, 2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = weights(&mut rng, sp.n_sites, 4);
        let g = weights(&mut rng, sp.n_sites, 4);
        let (pf, pg) = (sp.smeared_field(&f), sp.smeared_field(&g));
        assert_eq!(q.star(&pf, &sp.one()).unwrap(), pf);
        let comm = q.commutator(ProductKind::StarH, &pf, &pg).unwrap();
        let br = peierls_bracket(&pf, &pg, &ps).unwrap();
        let expected = br.scale_series(&FormalSeries::monomial(1, 0, scalar::sc_i(), 2, 0));
        assert_eq!(comm, expected);
    }

    #[test]
    fn alpha_examples() {
        let (lat, ps) = setup();
        let q = Quantizer::new(&ps);
        let sp = FunctionalSpace::for_lattice(&lat, 2, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = weights(&mut rng, sp.n_sites, 3);
        let sq = sp.local_power(&f, 2);
        let normal = q.alpha_h(&sq, -1).unwrap();
        let mut subtraction = scalar::sc_zero();
        for (x, w) in f.iter().enumerate() {
            if *w != 0.0 {
                subtraction += scalar::real(&sp.volume * scalar::exact_f64(*w)) * q.self_value(SelfKernel::Hadamard, x, x);
            }
        }
        let expected = sq.sub(&sp.constant(FormalSeries::monomial(1, 0, subtraction, 2, 0)));
        assert_eq!(normal, expected);
        assert_eq!(q.alpha_h(&normal, 1).unwrap(), sq);
    }

    #[test]
    fn wick_coefficients() {
        let (lat, ps) = setup();
        let q = Quantizer::new(&ps);
        let n = lat.n_sites();
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];
        f1[lat.site(3, 1)] = 0.75;
        f1[lat.site(4, 2)] = -0.5;
        f2[lat.site(6, 4)] = 1.25;
        let rep = q.wick_theorem_demo(&f1, &f2, 2).unwrap();
        assert!(rep.matches_product && rep.classical_matches);
        assert_eq!(rep.one_contraction_coefficient, Some(scalar::sc(4, 0)));
        assert_eq!(rep.two_contraction_coefficient, Some(scalar::sc(2, 0)));
        let zero = q.wick_theorem_demo(&f1, &vec![0.0; n], 2).unwrap();
        assert!(zero.product.is_zero());
    }

    #[test]
    fn lambda_grading_is_required() {
        let (lat, ps) = setup();
        let q = Quantizer::new(&ps);
        let sp = FunctionalSpace::for_lattice(&lat, 1, 2);
        let v = sp.local_power(&[1.0; 60], 2);
        assert_eq!(q.exp_t(&v), Err(QuantError::NoLambdaGrading));
        assert_eq!(q.exp_t(&sp.zero()).unwrap(), sp.one());
    }

    #[test]
    fn injectivity_examples() {
        let (lat, _) = setup();
        let sp = FunctionalSpace::for_lattice(&lat, 0, 0);
        let n = lat.n_sites();
        let mut f = vec![0.0; n];
        f[3] = 1.0;
        let mut g = vec![0.0; n];
        g[40] = 1.0;
        let a = sp.smeared_field(&f);
        let b = sp.smeared_field(&g);
        assert_eq!(multilocal_injectivity_check(&[a.clone()], 2, 1).unwrap().rank, 1);
        assert_eq!(multilocal_injectivity_check(&[a.clone(), b], 2, 1).unwrap().rank, 3);
        assert_eq!(multilocal_injectivity_check(&[], 2, 1).unwrap().rank, 0);
        assert_eq!(
            multilocal_injectivity_check(&[sp.one()], 2, 1),
            Err(QuantError::NotVanishingAtZero(0))
        );
    }
}
