//! Polynomial functionals of a lattice field.
//!
//! A functional is stored as `F(φ) = Σ_m c_m Π_{s ∈ m} φ_s` where each
//! monomial `m` is a sorted multiset of sites and `c_m` is a formal series.
//! The symmetric kernel picture `F = Σ_n ⟨f_n, φ^{⊗n}⟩` (one volume factor per
//! integration variable) is recovered through [`PolyFunctional::kernel`].

use crate::formal_series::{FormalSeries, SeriesError};
use crate::lattice::{Lattice1p1, PropagatorKernel, PropagatorSet};
use crate::scalar::{self, Rational, Scalar};
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

pub const DEFAULT_MAX_DEGREE: usize = 8;

pub type Monomial = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("configuration has {got} sites, functional expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degree {degree} exceeds the cap {cap}")]
    MaxDegreeExceeded { degree: usize, cap: usize },
    #[error("cutoff is not identically one around site {0}")]
    CutoffTooSmall(usize),
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("malformed functional record: {0}")]
    Parse(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFunctional {
    n_sites: usize,
    volume: Rational,
    trunc_h: u32,
    trunc_l: u32,
    max_degree: usize,
    terms: BTreeMap<Monomial, FormalSeries>,
}

/// Sites, weights and truncation shared by all functionals of one computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalSpace {
    pub n_sites: usize,
    pub volume: Rational,
    pub trunc_h: u32,
    pub trunc_l: u32,
    pub max_degree: usize,
}

impl FunctionalSpace {
    pub fn new(n_sites: usize, volume: Rational, trunc_h: u32, trunc_l: u32) -> Self {
        Self { n_sites, volume, trunc_h, trunc_l, max_degree: DEFAULT_MAX_DEGREE }
    }

    pub fn for_lattice(lat: &Lattice1p1, trunc_h: u32, trunc_l: u32) -> Self {
        let v = scalar::exact_f64(lat.a_t) * scalar::exact_f64(lat.a_x);
        Self::new(lat.n_sites(), v, trunc_h, trunc_l)
    }

    pub fn with_max_degree(mut self, cap: usize) -> Self {
        self.max_degree = cap;
        self
    }

    pub fn zero(&self) -> PolyFunctional {
        PolyFunctional {
            n_sites: self.n_sites,
            volume: self.volume.clone(),
            trunc_h: self.trunc_h,
            trunc_l: self.trunc_l,
            max_degree: self.max_degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn series(&self, c: Scalar) -> FormalSeries {
        FormalSeries::constant(c, self.trunc_h, self.trunc_l)
    }

    pub fn constant(&self, c: FormalSeries) -> PolyFunctional {
        let mut f = self.zero();
        f.add_term(Vec::new(), c);
        f
    }

    pub fn one(&self) -> PolyFunctional {
        self.constant(FormalSeries::one(self.trunc_h, self.trunc_l))
    }

    /// `c · Π φ_s` for the given sites.
    pub fn monomial(&self, sites: &[usize], c: FormalSeries) -> PolyFunctional {
        let mut f = self.zero();
        let mut m = sites.to_vec();
        m.sort_unstable();
        f.add_term(m, c);
        f
    }

    /// `Φ(f) = Σ_x a_t a_x f(x) φ(x)`.
    pub fn smeared_field(&self, f: &[f64]) -> PolyFunctional {
        self.local_power(f, 1)
    }

    /// `Σ_x a_t a_x f(x) φ(x)^n`.
    pub fn local_power(&self, f: &[f64], n: usize) -> PolyFunctional {
        let mut out = self.zero();
        for (s, &w) in f.iter().enumerate() {
            if w != 0.0 {
                let c = scalar::real(&self.volume * scalar::exact_f64(w));
                out.add_term(vec![s; n], self.series(c));
            }
        }
        out
    }

    /// Build a functional from symmetric kernel values: each tuple sets `f_n` on its whole permutation orbit.
    pub fn from_kernel_entries(
        &self,
        entries: impl IntoIterator<Item = (Vec<usize>, FormalSeries)>,
    ) -> Result<PolyFunctional, FunctionalError> {
        let mut out = self.zero();
        for (mut tuple, val) in entries {
            for &s in &tuple {
                if s >= self.n_sites {
                    return Err(FunctionalError::SiteOutOfRange { site: s, n_sites: self.n_sites });
                }
            }
            if tuple.len() > self.max_degree {
                return Err(FunctionalError::MaxDegreeExceeded { degree: tuple.len(), cap: self.max_degree });
            }
            tuple.sort_unstable();
            let n = tuple.len();
            let orbit = scalar::factorial(n as u32) / multiplicity_factorial(&tuple);
            let factor = orbit * pow_rational(&self.volume, n);
            out.add_term(tuple, val.scale(&scalar::real(factor)));
        }
        Ok(out)
    }
}

fn pow_rational(r: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..n {
        acc *= r;
    }
    acc
}

/// `Π_s (mult_s)!` for a sorted monomial.
pub fn multiplicity_factorial(m: &[usize]) -> Rational {
    let mut acc = Rational::one();
    let mut i = 0;
    while i < m.len() {
        let mut j = i;
        while j < m.len() && m[j] == m[i] {
            j += 1;
        }
        acc *= scalar::factorial((j - i) as u32);
        i = j;
    }
    acc
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl PolyFunctional {
    pub fn space(&self) -> FunctionalSpace {
        FunctionalSpace {
            n_sites: self.n_sites,
            volume: self.volume.clone(),
            trunc_h: self.trunc_h,
            trunc_l: self.trunc_l,
            max_degree: self.max_degree,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn volume(&self) -> &Rational {
        &self.volume
    }

    pub fn trunc_h(&self) -> u32 {
        self.trunc_h
    }

    pub fn trunc_l(&self) -> u32 {
        self.trunc_l
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &FormalSeries)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[usize]) -> FormalSeries {
        let mut key = m.to_vec();
        key.sort_unstable();
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| FormalSeries::zero(self.trunc_h, self.trunc_l))
    }

    /// Adds `c · Π_{s∈m} φ_s`; `m` must be sorted.
    pub fn add_term(&mut self, m: Monomial, c: FormalSeries) {
        let c = c.truncated(self.trunc_h, self.trunc_l);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).min().unwrap_or(0)
    }

    /// Every stored monomial sits on a single site.
    pub fn is_local(&self) -> bool {
        self.terms.keys().all(|m| m.windows(2).all(|w| w[0] == w[1]))
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.iter().copied()).collect()
    }

    pub fn homogeneous_part(&self, n: usize) -> Self {
        let mut out = self.space().zero();
        for (m, c) in &self.terms {
            if m.len() == n {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn constant_part(&self) -> FormalSeries {
        self.coefficient(&[])
    }

    /// Restrict every coefficient to its `ħ^h` component.
    pub fn hbar_component(&self, h: u32) -> Self {
        let mut out = self.space().zero();
        for (m, c) in &self.terms {
            let mut s = FormalSeries::zero(self.trunc_h, self.trunc_l);
            for ((hh, l), v) in c.terms() {
                if *hh == h {
                    s = &s + &FormalSeries::monomial(*hh, *l, v.clone(), self.trunc_h, self.trunc_l);
                }
            }
            out.add_term(m.clone(), s);
        }
        out
    }

    pub fn min_lambda_order(&self) -> Option<u32> {
        self.terms.values().filter_map(|c| c.min_lambda_order()).min()
    }

    pub fn truncated(&self, trunc_h: u32, trunc_l: u32) -> Self {
        let mut out = self.space().zero();
        out.trunc_h = trunc_h.min(self.trunc_h);
        out.trunc_l = trunc_l.min(self.trunc_l);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn combine_space(&self, other: &Self) -> Self {
        let mut out = self.space().zero();
        out.trunc_h = self.trunc_h.min(other.trunc_h);
        out.trunc_l = self.trunc_l.min(other.trunc_l);
        out.max_degree = self.max_degree.max(other.max_degree);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.combine_space(other);
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&(-scalar::sc_one()))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = self.space().zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.scale(c));
        }
        out
    }

    pub fn scale_series(&self, c: &FormalSeries) -> Self {
        let mut out = self.space().zero();
        out.trunc_h = self.trunc_h.min(c.trunc_h());
        out.trunc_l = self.trunc_l.min(c.trunc_l());
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.space().zero();
        for (m, v) in &self.terms {
            out.terms.insert(m.clone(), v.conj());
        }
        out
    }

    /// Pointwise product `(F·G)(φ) = F(φ) G(φ)`.
    pub fn mul(&self, other: &Self) -> Result<Self, FunctionalError> {
        let mut out = self.combine_space(other);
        let cap = out.max_degree;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let prod = ca * cb;
                if prod.is_zero() {
                    continue;
                }
                let d = ma.len() + mb.len();
                if d > cap {
                    return Err(FunctionalError::MaxDegreeExceeded { degree: d, cap });
                }
                out.add_term(merge_sorted(ma, mb), prod);
            }
        }
        Ok(out)
    }

    fn check_dim(&self, phi: &[f64]) -> Result<(), FunctionalError> {
        if phi.len() != self.n_sites {
            return Err(FunctionalError::DimensionMismatch { expected: self.n_sites, got: phi.len() });
        }
        Ok(())
    }

    /// Exact value at a configuration (the doubles are taken at face value).
    pub fn evaluate(&self, phi: &[f64]) -> Result<FormalSeries, FunctionalError> {
        self.check_dim(phi)?;
        let mut cache: HashMap<usize, Rational> = HashMap::new();
        let mut acc = FormalSeries::zero(self.trunc_h, self.trunc_l);
        for (m, c) in &self.terms {
            let mut p = Rational::one();
            for &s in m {
                let v = cache.entry(s).or_insert_with(|| scalar::exact_f64(phi[s]));
                p *= &*v;
                if p.is_zero() {
                    break;
                }
            }
            if !p.is_zero() {
                acc = &acc + &c.scale(&scalar::real(p));
            }
        }
        Ok(acc)
    }

    /// Floating value of each `(ħ, λ)` coefficient.
    pub fn evaluate_f64(&self, phi: &[f64]) -> Result<BTreeMap<(u32, u32), Complex64>, FunctionalError> {
        self.check_dim(phi)?;
        let mut out: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (m, c) in &self.terms {
            let p: f64 = m.iter().map(|&s| phi[s]).product();
            if p == 0.0 {
                continue;
            }
            for (k, v) in c.terms() {
                *out.entry(*k).or_default() += scalar::to_c64(v) * p;
            }
        }
        Ok(out)
    }

    /// Value with numeric `ħ` and `λ` substituted.
    pub fn evaluate_numeric(&self, phi: &[f64], hbar: f64, lambda: f64) -> Result<Complex64, FunctionalError> {
        Ok(self
            .evaluate_f64(phi)?
            .into_iter()
            .map(|((h, l), v)| v * hbar.powi(h as i32) * lambda.powi(l as i32))
            .sum())
    }

    /// `∂F/∂φ_s` (no volume factor).
    pub fn partial(&self, s: usize) -> Self {
        let mut out = self.space().zero();
        for (m, c) in &self.terms {
            let k = m.iter().filter(|&&x| x == s).count();
            if k == 0 {
                continue;
            }
            let mut rest = m.clone();
            let pos = rest.iter().position(|&x| x == s).expect("site present");
            rest.remove(pos);
            out.add_term(rest, c.scale(&scalar::real(scalar::int(k as i64))));
        }
        out
    }

    /// `∂^n F/∂φ_{s_1}…∂φ_{s_n}` (no volume factor).
    pub fn partial_multi(&self, sites: &[usize]) -> Self {
        let mut out = self.clone();
        for &s in sites {
            out = out.partial(s);
            if out.is_zero() {
                break;
            }
        }
        out
    }

    /// Functional derivative `F^{(n)}(x_1…x_n) = (a_t a_x)^{−n} ∂^n F`, as a symmetric tensor of functionals.
    pub fn derivative(&self, n: usize) -> DerivativeKernel {
        let inv_v = scalar::real(pow_rational(&self.volume, n).recip());
        let mut entries: BTreeMap<Monomial, PolyFunctional> = BTreeMap::new();
        let mut tuples: BTreeSet<Monomial> = BTreeSet::new();
        for m in self.terms.keys() {
            if m.len() >= n {
                sub_multisets(m, n, &mut tuples);
            }
        }
        for t in tuples {
            let d = self.partial_multi(&t).scale(&inv_v);
            if !d.is_zero() {
                entries.insert(t, d);
            }
        }
        DerivativeKernel { order: n, entries }
    }

    /// The symmetric kernel `f_n` at a sorted tuple: `c_m Π(mult!)/(n! v^n)`.
    pub fn kernel(&self, tuple: &[usize]) -> FormalSeries {
        let mut m = tuple.to_vec();
        m.sort_unstable();
        let n = m.len();
        let c = self.coefficient(&m);
        let f = multiplicity_factorial(&m) / (scalar::factorial(n as u32) * pow_rational(&self.volume, n));
        c.scale(&scalar::real(f))
    }

    pub fn to_record(&self) -> FunctionalRecord {
        let mut terms = Vec::new();
        for m in self.terms.keys() {
            let kernel = self.kernel(m);
            for ((h, l), v) in kernel.terms() {
                terms.push(KernelTermRecord {
                    degree: m.len(),
                    sites: vec![m.clone()],
                    h: *h,
                    l: *l,
                    re: scalar::format_rational(&v.re),
                    im: scalar::format_rational(&v.im),
                });
            }
        }
        FunctionalRecord {
            trunc_h: self.trunc_h,
            trunc_l: self.trunc_l,
            n_sites: self.n_sites,
            volume: Some(scalar::format_rational(&self.volume)),
            terms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("functional record serializes")
    }

    pub fn from_record(rec: &FunctionalRecord) -> Result<Self, FunctionalError> {
        let volume = match &rec.volume {
            Some(v) => scalar::parse_rational(v)
                .filter(|r| !r.is_zero())
                .ok_or_else(|| FunctionalError::Parse(format!("bad volume '{v}'")))?,
            None => Rational::one(),
        };
        if rec.n_sites == 0 || rec.n_sites > 1 << 24 {
            return Err(FunctionalError::Parse(format!("unsupported n_sites {}", rec.n_sites)));
        }
        let space = FunctionalSpace::new(rec.n_sites, volume, rec.trunc_h, rec.trunc_l);
        let mut entries = Vec::new();
        for t in &rec.terms {
            if t.h > rec.trunc_h || t.l > rec.trunc_l {
                return Err(FunctionalError::Parse("term beyond truncation".into()));
            }
            let re = scalar::parse_rational(&t.re)
                .ok_or_else(|| FunctionalError::Parse(format!("bad rational '{}'", t.re)))?;
            let im = scalar::parse_rational(&t.im)
                .ok_or_else(|| FunctionalError::Parse(format!("bad rational '{}'", t.im)))?;
            let val = FormalSeries::monomial(t.h, t.l, Scalar::new(re, im), rec.trunc_h, rec.trunc_l);
            for tuple in &t.sites {
                if tuple.len() != t.degree {
                    return Err(FunctionalError::Parse(format!(
                        "tuple of length {} in a degree-{} record",
                        tuple.len(),
                        t.degree
                    )));
                }
                entries.push((tuple.clone(), val.clone()));
            }
        }
        space.from_kernel_entries(entries)
    }

    pub fn from_json(text: &str) -> Result<Self, FunctionalError> {
        let rec: FunctionalRecord =
            serde_json::from_str(text).map_err(|e| FunctionalError::Parse(e.to_string()))?;
        Self::from_record(&rec)
    }
}

fn sub_multisets(m: &[usize], n: usize, out: &mut BTreeSet<Monomial>) {
    fn rec(m: &[usize], start: usize, n: usize, cur: &mut Vec<usize>, out: &mut BTreeSet<Monomial>) {
        if cur.len() == n {
            out.insert(cur.clone());
            return;
        }
        let mut i = start;
        while i < m.len() {
            cur.push(m[i]);
            rec(m, i + 1, n, cur, out);
            cur.pop();
            let v = m[i];
            while i < m.len() && m[i] == v {
                i += 1;
            }
        }
    }
    rec(m, 0, n, &mut Vec::new(), out);
}

/// `F^{(n)}` as a sparse symmetric tensor; missing tuples are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeKernel {
    pub order: usize,
    /// Keyed by sorted site tuples.
    pub entries: BTreeMap<Monomial, PolyFunctional>,
}

impl DerivativeKernel {
    pub fn at(&self, tuple: &[usize]) -> Option<&PolyFunctional> {
        let mut t = tuple.to_vec();
        t.sort_unstable();
        self.entries.get(&t)
    }

    pub fn evaluate(&self, phi: &[f64]) -> Result<BTreeMap<Monomial, FormalSeries>, FunctionalError> {
        self.entries.iter().map(|(k, f)| Ok((k.clone(), f.evaluate(phi)?))).collect()
    }

    /// True when every entry is a constant functional.
    pub fn is_field_independent(&self) -> bool {
        self.entries.values().all(|f| f.degree() == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Memoized exact values of a two-point kernel.
pub struct KernelCache<'a> {
    eval: Box<dyn Fn(usize, usize) -> Scalar + 'a>,
    cache: HashMap<(usize, usize), Scalar>,
}

impl<'a> KernelCache<'a> {
    pub fn new(eval: impl Fn(usize, usize) -> Scalar + 'a) -> Self {
        Self { eval: Box::new(eval), cache: HashMap::new() }
    }

    pub fn from_propagator(kernel: &'a PropagatorKernel, ps: &'a PropagatorSet) -> Self {
        Self::new(move |x, y| kernel.eval(ps, x, y))
    }

    pub fn get(&mut self, x: usize, y: usize) -> Scalar {
        if let Some(v) = self.cache.get(&(x, y)) {
            return v.clone();
        }
        let v = (self.eval)(x, y);
        self.cache.insert((x, y), v.clone());
        v
    }
}

/// Sum over matchings between factor positions of `a` and `b` with exactly `n` pairs.
/// Returns the residual monomial and the weight `Π K(a_p, b_q)`.
fn matchings_between(
    a: &[usize],
    b: &[usize],
    max_pairs: usize,
    k: &mut KernelCache<'_>,
) -> BTreeMap<(usize, Monomial), Scalar> {
    let mut out: BTreeMap<(usize, Monomial), Scalar> = BTreeMap::new();
    let mut used = vec![false; b.len()];
    let mut rest_a: Vec<usize> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        pairs: usize,
        weight: Scalar,
        a: &[usize],
        b: &[usize],
        max_pairs: usize,
        used: &mut Vec<bool>,
        rest_a: &mut Vec<usize>,
        k: &mut KernelCache<'_>,
        out: &mut BTreeMap<(usize, Monomial), Scalar>,
    ) {
        if i == a.len() {
            let rest_b: Vec<usize> = b.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(s, _)| *s).collect();
            let key = (pairs, merge_sorted(rest_a, &rest_b));
            let e = out.entry(key).or_insert_with(scalar::sc_zero);
            *e += weight;
            return;
        }
        rest_a.push(a[i]);
        rec(i + 1, pairs, weight.clone(), a, b, max_pairs, used, rest_a, k, out);
        rest_a.pop();
        if pairs < max_pairs {
            for j in 0..b.len() {
                if used[j] {
                    continue;
                }
                let kv = k.get(a[i], b[j]);
                if scalar::is_zero(&kv) {
                    continue;
                }
                used[j] = true;
                rec(i + 1, pairs + 1, &weight * &kv, a, b, max_pairs, used, rest_a, k, out);
                used[j] = false;
            }
        }
    }
    rec(0, 0, scalar::sc_one(), a, b, max_pairs, &mut used, &mut rest_a, k, &mut out);
    out.retain(|_, v| !scalar::is_zero(v));
    out
}

/// `Σ_n ħ^n/n! Σ Π K(x_i, y_i) ∂^n F/∂φ_x ∂^n G/∂φ_y` with `n` running from `min_order`.
///
/// Volume factors cancel between the kernel pairing and the derivative normalization.
pub fn contract_series(
    f: &PolyFunctional,
    g: &PolyFunctional,
    k: &mut KernelCache<'_>,
    min_order: usize,
) -> Result<PolyFunctional, FunctionalError> {
    let mut out = f.combine_space(g);
    let th = out.trunc_h as usize;
    let cap = out.max_degree;
    for (ma, ca) in &f.terms {
        for (mb, cb) in &g.terms {
            let prod = ca * cb;
            if prod.is_zero() {
                continue;
            }
            let h0 = prod.min_hbar_order().unwrap_or(0) as usize;
            if h0 + min_order > th {
                continue;
            }
            let max_pairs = (th - h0).min(ma.len()).min(mb.len());
            for ((n, rest), w) in matchings_between(ma, mb, max_pairs, k) {
                if n < min_order {
                    continue;
                }
                if rest.len() > cap {
                    return Err(FunctionalError::MaxDegreeExceeded { degree: rest.len(), cap });
                }
                out.add_term(rest, prod.scale(&w).shift_h(n as u32));
            }
        }
    }
    Ok(out)
}

/// `Σ_{x,y} K(x,y) ∂F/∂φ_x ∂G/∂φ_y`, one contraction without `ħ`.
pub fn contract_once(
    f: &PolyFunctional,
    g: &PolyFunctional,
    k: &mut KernelCache<'_>,
) -> Result<PolyFunctional, FunctionalError> {
    let mut out = f.combine_space(g);
    for (ma, ca) in &f.terms {
        for (mb, cb) in &g.terms {
            let prod = ca * cb;
            if prod.is_zero() {
                continue;
            }
            for ((n, rest), w) in matchings_between(ma, mb, 1, k) {
                if n == 1 {
                    out.add_term(rest, prod.scale(&w));
                }
            }
        }
    }
    Ok(out)
}

/// Peierls bracket `{F,G} = ⟨F^{(1)}, Δ G^{(1)}⟩` with `Δ = Δ^R − Δ^A`.
pub fn peierls_bracket(
    f: &PolyFunctional,
    g: &PolyFunctional,
    ps: &PropagatorSet,
) -> Result<PolyFunctional, FunctionalError> {
    let kernel = PropagatorKernel::causal();
    let mut cache = KernelCache::from_propagator(&kernel, ps);
    contract_once(f, g, &mut cache)
}

/// Local jet variable of a density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetVar {
    Phi,
    /// Forward time difference `(φ(t+1,x) − φ(t,x))/a_t`.
    DtPhi,
    /// Forward space difference `(φ(t,x+1) − φ(t,x))/a_x`.
    DxPhi,
}

/// `coeff · Π vars` in a Lagrangian density.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTerm {
    pub coeff: FormalSeries,
    pub vars: Vec<JetVar>,
}

/// A polynomial Lagrangian density together with a cutoff function.
#[derive(Clone, Debug)]
pub struct GeneralizedLagrangian {
    pub lat: Lattice1p1,
    pub density: Vec<DensityTerm>,
    pub cutoff: Vec<f64>,
}

impl GeneralizedLagrangian {
    /// `½(∂φ)² − ½m²φ² − (λ/4!)φ⁴` with `λ` the formal coupling.
    pub fn phi4(lat: &Lattice1p1, cutoff: Vec<f64>, trunc_h: u32, trunc_l: u32) -> Self {
        let half = scalar::real(scalar::rat(1, 2));
        let s = |c: Scalar| FormalSeries::constant(c, trunc_h, trunc_l);
        let m2 = scalar::real(scalar::exact_f64(lat.mass) * scalar::exact_f64(lat.mass));
        let mut density = vec![
            DensityTerm { coeff: s(half.clone()), vars: vec![JetVar::DtPhi, JetVar::DtPhi] },
            DensityTerm { coeff: s(-half.clone()), vars: vec![JetVar::DxPhi, JetVar::DxPhi] },
            DensityTerm { coeff: s(-(half * m2)), vars: vec![JetVar::Phi, JetVar::Phi] },
        ];
        let quartic = FormalSeries::monomial(0, 1, scalar::real(scalar::rat(-1, 24)), trunc_h, trunc_l);
        if !quartic.is_zero() {
            density.push(DensityTerm { coeff: quartic, vars: vec![JetVar::Phi; 4] });
        }
        Self { lat: *lat, density, cutoff }
    }

    /// Free part only.
    pub fn free(lat: &Lattice1p1, cutoff: Vec<f64>, trunc_h: u32, trunc_l: u32) -> Self {
        let mut l = Self::phi4(lat, cutoff, trunc_h, trunc_l);
        l.density.truncate(3);
        l
    }

    fn jet(&self, space: &FunctionalSpace, var: JetVar, s: usize) -> PolyFunctional {
        let (t, x) = self.lat.coords(s);
        let one = scalar::sc_one();
        let mono = |site: usize, c: Scalar| space.monomial(&[site], space.series(c));
        match var {
            JetVar::Phi => mono(s, one),
            JetVar::DtPhi => {
                let inv = scalar::real(scalar::exact_f64(self.lat.a_t).recip());
                let here = mono(s, -inv.clone());
                if t + 1 < self.lat.n_t {
                    here.add(&mono(self.lat.site(t + 1, x), inv))
                } else {
                    here
                }
            }
            JetVar::DxPhi => {
                let inv = scalar::real(scalar::exact_f64(self.lat.a_x).recip());
                mono(self.lat.site(t, x + 1), inv.clone()).add(&mono(s, -inv))
            }
        }
    }

    /// `L(f) = Σ_x a_t a_x f(x) 𝓛(x)` as a polynomial functional.
    pub fn action(&self, trunc_h: u32, trunc_l: u32) -> Result<PolyFunctional, FunctionalError> {
        let space = FunctionalSpace::for_lattice(&self.lat, trunc_h, trunc_l);
        let mut out = space.zero();
        for (s, &w) in self.cutoff.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let weight = scalar::real(&space.volume * scalar::exact_f64(w));
            for term in &self.density {
                let mut p = space.constant(term.coeff.scale(&weight));
                for v in &term.vars {
                    p = p.mul(&self.jet(&space, *v, s))?;
                }
                out = out.add(&p);
            }
        }
        Ok(out)
    }

    /// Sites whose derivative of `L(f)` equals the field-equation value only if `f ≡ 1` nearby.
    fn cutoff_is_one_around(&self, s: usize) -> bool {
        let (t, x) = self.lat.coords(s);
        let nx = self.lat.n_x;
        let mut nbrs = vec![s, self.lat.site(t, x + 1), self.lat.site(t, x + nx - 1)];
        if t > 0 {
            nbrs.push(self.lat.site(t - 1, x));
        }
        if t + 1 < self.lat.n_t {
            nbrs.push(self.lat.site(t + 1, x));
        }
        nbrs.iter().all(|&n| self.cutoff[n] == 1.0)
    }
}

/// `S′(φ)(x) = (a_t a_x)^{−1} ∂L(f)/∂φ(x)` at the probe sites, with the coupling set to `lambda`.
pub fn euler_lagrange(
    l: &GeneralizedLagrangian,
    phi: &[f64],
    probes: &[usize],
    lambda: f64,
) -> Result<Vec<f64>, FunctionalError> {
    if phi.len() != l.lat.n_sites() {
        return Err(FunctionalError::DimensionMismatch { expected: l.lat.n_sites(), got: phi.len() });
    }
    for &s in probes {
        if s >= phi.len() {
            return Err(FunctionalError::SiteOutOfRange { site: s, n_sites: phi.len() });
        }
        if !l.cutoff_is_one_around(s) {
            return Err(FunctionalError::CutoffTooSmall(s));
        }
    }
    let action = l.action(0, 1)?;
    let v = l.lat.volume();
    probes
        .iter()
        .map(|&s| Ok(action.partial(s).evaluate_numeric(phi, 0.0, lambda)?.re / v))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelTermRecord {
    pub degree: usize,
    pub sites: Vec<Vec<usize>>,
    pub h: u32,
    pub l: u32,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub trunc_h: u32,
    pub trunc_l: u32,
    pub n_sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<String>,
    pub terms: Vec<KernelTermRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::discrete_plane_wave;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lat() -> Lattice1p1 {
        Lattice1p1::new(10, 6, 0.5, 1.0, 1.0).unwrap()
    }

    fn space() -> FunctionalSpace {
        FunctionalSpace::for_lattice(&lat(), 2, 2)
    }

    fn sparse_weights(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
        let mut f = vec![0.0; n];
        for _ in 0..k {
            f[rng.gen_range(0..n)] = rng.gen_range(-1.0..1.0);
        }
        f
    }

    fn random_phi(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn value(f: &PolyFunctional, phi: &[f64]) -> f64 {
        f.evaluate_numeric(phi, 0.0, 0.0).unwrap().re
    }

    #[test]
    fn evaluate_examples() {
        let sp = space();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = sparse_weights(&mut rng, sp.n_sites, 5);
        let g = random_phi(&mut rng, sp.n_sites);
        let phi_f = sp.smeared_field(&f);
        assert!(phi_f.evaluate(&vec![0.0; sp.n_sites]).unwrap().is_zero());
        let direct: f64 = f.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() * lat().volume();
        assert!((value(&phi_f, &g) - direct).abs() < 1e-12);
        let c = sp.constant(sp.series(scalar::sc(3, 1)));
        assert_eq!(c.evaluate(&g).unwrap(), sp.series(scalar::sc(3, 1)));
        assert!(matches!(phi_f.evaluate(&[1.0]), Err(FunctionalError::DimensionMismatch { .. })));
    }

    #[test]
    fn derivative_of_quadratic_form() {
        let sp = space();
        let (a, b) = (3, 17);
        // F = ½⟨f₂, φ⊗φ⟩ with f₂ symmetric and supported on {a,b}
        let half = sp.series(scalar::real(scalar::rat(1, 2)));
        let f2 = sp
            .from_kernel_entries(vec![
                (vec![a, a], half.scale(&scalar::sc(2, 0))),
                (vec![a, b], half.scale(&scalar::sc(-1, 0))),
                (vec![b, b], half.clone()),
            ])
            .unwrap();
        let d2 = f2.derivative(2);
        assert!(d2.is_field_independent());
        assert_eq!(d2.at(&[b, a]).unwrap().constant_part(), sp.series(scalar::sc(-1, 0)));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random_phi(&mut rng, sp.n_sites);
        let d1 = f2.derivative(1);
        let h = 1e-4;
        for s in [a, b] {
            let mut p = phi.clone();
            p[s] += h;
            let up = value(&f2, &p);
            p[s] -= 2.0 * h;
            let dn = value(&f2, &p);
            let fd = (up - dn) / (2.0 * h) / lat().volume();
            let an = value(d1.at(&[s]).unwrap(), &phi);
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0));
        }
        assert!(sp.smeared_field(&[1.0; 60]).derivative(2).is_zero());
    }

    #[test]
    fn kernel_roundtrip_and_json() {
        let sp = space();
        let f = sp
            .from_kernel_entries(vec![
                (vec![4, 1, 1], sp.series(scalar::sc(2, -1))),
                (vec![5], FormalSeries::monomial(1, 1, scalar::sc(1, 0), 2, 2)),
            ])
            .unwrap();
        assert_eq!(f.kernel(&[1, 4, 1]), sp.series(scalar::sc(2, -1)));
        assert_eq!(PolyFunctional::from_json(&f.to_json()).unwrap(), f);
        assert!(PolyFunctional::from_json("{\"trunc_h\":1,\"trunc_l\":1,\"n_sites\":4,\"terms\":[{\"degree\":2,\"sites\":[[0]],\"h\":0,\"l\":0,\"re\":\"1\",\"im\":\"0\"}]}").is_err());
    }

    #[test]
    fn pointwise_product_and_support() {
        let sp = space();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = sp.smeared_field(&sparse_weights(&mut rng, sp.n_sites, 3));
        let g = sp.local_power(&sparse_weights(&mut rng, sp.n_sites, 3), 2);
        let fg = f.mul(&g).unwrap();
        let phi = random_phi(&mut rng, sp.n_sites);
        assert!((value(&fg, &phi) - value(&f, &phi) * value(&g, &phi)).abs() < 1e-12);
        assert_eq!(f.mul(&sp.one()).unwrap(), f);
        assert!(fg.support().is_subset(&f.support().union(&g.support()).copied().collect()));
        assert!(g.is_local());
        assert!(!fg.is_local() || f.support() == g.support());
        let capped = sp.clone().with_max_degree(2);
        let h = capped.local_power(&[1.0; 60], 2);
        assert!(matches!(h.mul(&h), Err(FunctionalError::MaxDegreeExceeded { .. })));
        assert!(sp.one().support().is_empty());
    }

    #[test]
    fn peierls_of_linear_fields_is_pairing() {
        let l = lat();
        let ps = PropagatorSet::new(&l).unwrap();
        let sp = space();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = sparse_weights(&mut rng, sp.n_sites, 4);
        let g = sparse_weights(&mut rng, sp.n_sites, 4);
        let br = peierls_bracket(&sp.smeared_field(&f), &sp.smeared_field(&g), &ps).unwrap();
        assert_eq!(br.degree(), 0);
        let v = l.volume();
        let mut want = 0.0;
        for x in 0..sp.n_sites {
            for y in 0..sp.n_sites {
                want += f[x] * ps.causal(x, y) * g[y] * v * v;
            }
        }
        let got = scalar::to_c64(&br.constant_part().constant_term()).re;
        assert!((got - want).abs() < 1e-12);
        let ff = sp.smeared_field(&f);
        assert!(peierls_bracket(&ff, &ff, &ps).unwrap().is_zero());
    }

    #[test]
    fn euler_lagrange_examples() {
        let l = lat();
        let cut = vec![1.0; l.n_sites()];
        let free = GeneralizedLagrangian::free(&l, cut.clone(), 0, 1);
        let probes: Vec<usize> = (0..l.n_sites()).filter(|&s| l.is_interior(s)).collect();
        let wave = discrete_plane_wave(&l, 1, 0.2);
        for r in euler_lagrange(&free, &wave, &probes, 0.0).unwrap() {
            assert!(r.abs() < 1e-8);
        }
        assert!(euler_lagrange(&free, &vec![0.0; l.n_sites()], &probes, 0.0).unwrap().iter().all(|r| *r == 0.0));
        // quartic density alone at constant field
        let mut quartic = GeneralizedLagrangian::phi4(&l, cut.clone(), 0, 1);
        quartic.density.drain(0..3);
        let c = 0.7;
        let lam = 1.3;
        for r in euler_lagrange(&quartic, &vec![c; l.n_sites()], &probes, lam).unwrap() {
            assert!((r + lam / 6.0 * c * c * c).abs() < 1e-12);
        }
        let mut small = cut;
        small[l.site(5, 2)] = 0.5;
        assert!(matches!(
            euler_lagrange(&free, &wave, &[l.site(5, 3)], 0.0),
            Ok(_)
        ));
        let free_small = GeneralizedLagrangian::free(&l, small, 0, 1);
        assert_eq!(
            euler_lagrange(&free_small, &wave, &[l.site(5, 3)], 0.0),
            Err(FunctionalError::CutoffTooSmall(l.site(5, 3)))
        );
    }
}
