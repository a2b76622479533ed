//! Multigraphs, symmetry factors and the graph expansion of time-ordered
//! products, plus divergence counting for Epstein-Glaser subgraphs.

use crate::formal_series::FormalSeries;
use crate::functionals::{FunctionalError, Monomial, PolyFunctional};
use crate::quantization::{ProductKind, QuantError, Quantizer, SelfKernel};
use crate::scalar::{self, Scalar};
use std::collections::BTreeMap;
use std::fmt;

/// Vertices are `1..=n_vertices`; lines are keyed by `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multigraph {
    pub n_vertices: usize,
    lines: BTreeMap<(usize, usize), u32>,
}

impl Multigraph {
    pub fn empty(n_vertices: usize) -> Self {
        Self { n_vertices, lines: BTreeMap::new() }
    }

    /// Self-lines and out-of-range vertices are rejected.
    pub fn from_lines(n_vertices: usize, lines: &[((usize, usize), u32)]) -> Option<Self> {
        let mut g = Self::empty(n_vertices);
        for &((i, j), l) in lines {
            if i == j || i == 0 || j == 0 || i > n_vertices || j > n_vertices {
                return None;
            }
            if l > 0 {
                *g.lines.entry((i.min(j), i.max(j))).or_insert(0) += l;
            }
        }
        Some(g)
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> u32 {
        self.lines.get(&(i.min(j), i.max(j))).copied().unwrap_or(0)
    }

    pub fn lines(&self) -> impl Iterator<Item = (&(usize, usize), &u32)> {
        self.lines.iter()
    }

    pub fn n_lines(&self) -> u32 {
        self.lines.values().sum()
    }

    /// Vertices of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let mut g = self.clone();
        g.n_vertices += other.n_vertices;
        for (&(i, j), &l) in &other.lines {
            g.lines.insert((i + self.n_vertices, j + self.n_vertices), l);
        }
        g
    }

    pub fn with_extra_line(&self, i: usize, j: usize) -> Option<Self> {
        Self::from_lines(self.n_vertices, &[((i, j), 1)]).map(|extra| {
            let mut g = self.clone();
            for (k, l) in extra.lines {
                *g.lines.entry(k).or_insert(0) += l;
            }
            g
        })
    }
}

impl fmt::Display for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V={}", self.n_vertices)?;
        for ((i, j), l) in &self.lines {
            write!(f, " l{i}{j}={l}")?;
        }
        Ok(())
    }
}

fn vertex_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            out.push((i, j));
        }
    }
    out
}

/// All line assignments on `n` vertices with at most `max_total_lines` lines, in
/// lexicographic order of the multiplicity vector over pairs `(1,2), (1,3), …`.
pub fn enumerate_graphs(n: usize, max_total_lines: u32) -> Vec<Multigraph> {
    let pairs = vertex_pairs(n);
    let mut out = Vec::new();
    let mut mult = vec![0u32; pairs.len()];
    fn rec(k: usize, left: u32, pairs: &[(usize, usize)], mult: &mut Vec<u32>, n: usize, out: &mut Vec<Multigraph>) {
        if k == pairs.len() {
            let mut g = Multigraph::empty(n);
            for (p, &l) in pairs.iter().zip(mult.iter()) {
                if l > 0 {
                    g.lines.insert(*p, l);
                }
            }
            out.push(g);
            return;
        }
        for l in 0..=left {
            mult[k] = l;
            rec(k + 1, left - l, pairs, mult, n, out);
        }
        mult[k] = 0;
    }
    rec(0, max_total_lines, &pairs, &mut mult, n, &mut out);
    out
}

/// `Sym(Γ) = Π l_ij!`.
pub fn symmetry_factor(g: &Multigraph) -> u64 {
    g.lines.values().map(|&l| (1..=l as u64).product::<u64>()).product()
}

/// `|E|(d−2) − (|V|−1)d`.
pub fn divergence_degree(g: &Multigraph, d: i64) -> i64 {
    g.n_lines() as i64 * (d - 2) - (g.n_vertices as i64 - 1) * d
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EgSubgraph {
    /// Original vertex labels, ascending.
    pub vertices: Vec<usize>,
    /// Induced multigraph relabelled to `1..=vertices.len()`.
    pub graph: Multigraph,
}

/// Induced subgraphs on every vertex subset (including the empty one), ordered by bitmask.
pub fn eg_subgraphs(g: &Multigraph) -> Vec<EgSubgraph> {
    let n = g.n_vertices;
    assert!(n < 31, "too many vertices for subset enumeration");
    (0u32..1 << n)
        .map(|mask| {
            let vertices: Vec<usize> = (1..=n).filter(|v| mask & (1 << (v - 1)) != 0).collect();
            let pos = |v: usize| vertices.iter().position(|&w| w == v).map(|p| p + 1);
            let mut sub = Multigraph::empty(vertices.len());
            for (&(i, j), &l) in &g.lines {
                if let (Some(a), Some(b)) = (pos(i), pos(j)) {
                    sub.lines.insert((a, b), l);
                }
            }
            EgSubgraph { vertices, graph: sub }
        })
        .collect()
}

type Tensor = BTreeMap<Vec<Monomial>, FormalSeries>;

fn tensor_add(t: &mut Tensor, key: Vec<Monomial>, c: FormalSeries) {
    if c.is_zero() {
        return;
    }
    match t.get_mut(&key) {
        Some(v) => {
            *v = &*v + &c;
            if v.is_zero() {
                t.remove(&key);
            }
        }
        None => {
            t.insert(key, c);
        }
    }
}

fn tensor_product(factors: &[PolyFunctional]) -> Tensor {
    let th = factors.iter().map(|f| f.trunc_h()).min().unwrap_or(0);
    let tl = factors.iter().map(|f| f.trunc_l()).min().unwrap_or(0);
    let mut t: Tensor = BTreeMap::new();
    t.insert(Vec::new(), FormalSeries::one(th, tl));
    for f in factors {
        let mut next = Tensor::new();
        for (key, c) in &t {
            for (m, cf) in f.terms() {
                let mut k = key.clone();
                k.push(m.clone());
                tensor_add(&mut next, k, c * cf);
            }
        }
        t = next;
    }
    t
}

/// Matchings of exactly `l` pairs between factor positions of `a` and `b`.
fn exact_matchings(
    a: &[usize],
    b: &[usize],
    l: usize,
    k: &dyn Fn(usize, usize) -> Scalar,
) -> Vec<(Monomial, Monomial, Scalar)> {
    let mut out = Vec::new();
    let mut used = vec![false; b.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        left: usize,
        w: Scalar,
        a: &[usize],
        b: &[usize],
        rest_a: &mut Vec<usize>,
        used: &mut Vec<bool>,
        k: &dyn Fn(usize, usize) -> Scalar,
        out: &mut Vec<(Monomial, Monomial, Scalar)>,
    ) {
        if left > a.len() - i {
            return;
        }
        if i == a.len() {
            let rb = b.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(s, _)| *s).collect();
            out.push((rest_a.clone(), rb, w));
            return;
        }
        rest_a.push(a[i]);
        rec(i + 1, left, w.clone(), a, b, rest_a, used, k, out);
        rest_a.pop();
        if left > 0 {
            for j in 0..b.len() {
                if used[j] {
                    continue;
                }
                let kv = k(a[i], b[j]);
                if scalar::is_zero(&kv) {
                    continue;
                }
                used[j] = true;
                rec(i + 1, left - 1, &w * &kv, a, b, rest_a, used, k, out);
                used[j] = false;
            }
        }
    }
    rec(0, l, scalar::sc_one(), a, b, &mut Vec::new(), &mut used, k, &mut out);
    out
}

fn multiply_out(t: &Tensor, template: &PolyFunctional) -> Result<PolyFunctional, FunctionalError> {
    let mut out = template.space().zero();
    let cap = out.max_degree();
    for (key, c) in t {
        let mut m: Monomial = key.iter().flatten().copied().collect();
        if m.len() > cap {
            return Err(FunctionalError::MaxDegreeExceeded { degree: m.len(), cap });
        }
        m.sort_unstable();
        out.add_term(m, c.clone());
    }
    Ok(out)
}

fn common_template(factors: &[PolyFunctional]) -> PolyFunctional {
    let mut t = factors[0].space().zero();
    for f in &factors[1..] {
        t = t.add(&f.space().zero());
    }
    t
}

/// `T_n(F_1,…,F_n) = Σ_Γ (1/Sym Γ) ⟨ħΔ^F lines, δ_Γ(F_1,…,F_n)⟩`, summed graph by graph.
pub fn graph_expand_tn(q: &Quantizer<'_>, factors: &[PolyFunctional]) -> Result<PolyFunctional, QuantError> {
    if factors.is_empty() {
        return Err(QuantError::Functional(FunctionalError::Parse("no factors".into())));
    }
    let template = common_template(factors);
    let th = template.trunc_h();
    let n = factors.len();
    let base = tensor_product(factors);
    let k = |x: usize, y: usize| q.kernel_value(ProductKind::TimeOrderedF, x, y);
    let mut total = Tensor::new();
    for g in enumerate_graphs(n, th) {
        // Π D_ij^{l_ij} / l_ij! applied pair by pair; matchings already absorb the 1/l!
        let mut t = base.clone();
        for (&(i, j), &l) in g.lines() {
            let mut next = Tensor::new();
            for (key, c) in &t {
                for (ra, rb, w) in exact_matchings(&key[i - 1], &key[j - 1], l as usize, &k) {
                    let mut nk = key.clone();
                    nk[i - 1] = ra;
                    nk[j - 1] = rb;
                    tensor_add(&mut next, nk, c.scale(&w).shift_h(l));
                }
            }
            t = next;
            if t.is_empty() {
                break;
            }
        }
        for (key, c) in t {
            tensor_add(&mut total, key, c);
        }
    }
    Ok(multiply_out(&total, &template)?)
}

/// The same `T_n` from `e^{Σ_{i<j} D_ij}` expanded as `Σ_m (Σ D_ij)^m / m!`, one
/// derivative pair at a time.
pub fn operator_expand_tn(q: &Quantizer<'_>, factors: &[PolyFunctional]) -> Result<PolyFunctional, QuantError> {
    if factors.is_empty() {
        return Err(QuantError::Functional(FunctionalError::Parse("no factors".into())));
    }
    let template = common_template(factors);
    let th = template.trunc_h();
    let n = factors.len();
    let pairs = vertex_pairs(n);
    let mut power = tensor_product(factors);
    let mut total = power.clone();
    for m in 1..=th {
        let mut next = Tensor::new();
        for (key, c) in &power {
            for &(i, j) in &pairs {
                let (a, b) = (&key[i - 1], &key[j - 1]);
                for p in 0..a.len() {
                    for r in 0..b.len() {
                        let kv = q.kernel_value(ProductKind::TimeOrderedF, a[p], b[r]);
                        if scalar::is_zero(&kv) {
                            continue;
                        }
                        let mut nk = key.clone();
                        nk[i - 1].remove(p);
                        nk[j - 1].remove(r);
                        tensor_add(&mut next, nk, c.scale(&kv).shift_h(1));
                    }
                }
            }
        }
        power = next;
        if power.is_empty() {
            break;
        }
        let inv = scalar::real(scalar::factorial(m).recip());
        for (key, c) in &power {
            tensor_add(&mut total, key.clone(), c.scale(&inv));
        }
    }
    Ok(multiply_out(&total, &template)?)
}

#[derive(Clone, Debug)]
pub struct TadpoleReport {
    /// `(1+½D)[(1−½D)F·(1−½D)G]` truncated at `ħ¹`.
    pub result: PolyFunctional,
    /// `F·G + ħ⟨Δ^F, F^{(1)}⊗G^{(1)}⟩`.
    pub expected: PolyFunctional,
    /// The surviving single-line term.
    pub line_term: PolyFunctional,
    /// Number of self-line monomials produced by `D` on `F` and on `G`.
    pub loop_terms_created: usize,
    pub loops_cancel: bool,
}

/// Removal of self-lines by conjugating the pointwise product with `1 ∓ ½D`, `D = ħΓ_{Δ^F}`.
pub fn tadpole_demo(q: &Quantizer<'_>, f: &PolyFunctional, g: &PolyFunctional) -> Result<TadpoleReport, QuantError> {
    let f = f.truncated(1, f.trunc_l());
    let g = g.truncated(1, g.trunc_l());
    let half_hbar = FormalSeries::monomial(1, 0, scalar::real(scalar::rat(1, 2)), 1, f.trunc_l().min(g.trunc_l()));
    let d_half = |x: &PolyFunctional| -> Result<PolyFunctional, QuantError> {
        Ok(q.gamma(SelfKernel::Feynman, x)?.scale_series(&half_hbar))
    };
    let df = d_half(&f)?;
    let dg = d_half(&g)?;
    let loop_terms_created = df.n_terms() + dg.n_terms();
    let inner = f.sub(&df).mul(&g.sub(&dg))?;
    let result = inner.add(&d_half(&inner)?);
    let k = |x: usize, y: usize| q.kernel_value(ProductKind::TimeOrderedF, x, y);
    let mut cache = crate::functionals::KernelCache::new(k);
    let line = crate::functionals::contract_once(&f, &g, &mut cache)?;
    let line_term = line.scale_series(&FormalSeries::hbar(1, f.trunc_l().min(g.trunc_l())));
    let expected = f.mul(&g)?.add(&line_term);
    let loops_cancel = result == expected;
    Ok(TadpoleReport { result, expected, line_term, loop_terms_created, loops_cancel })
}

/// Number of length-`L` ordered pair sequences realizing a multiplicity pattern,
/// counted by brute force; `L!/count` is the symmetry factor.
pub fn brute_force_symmetry_factor(g: &Multigraph) -> u64 {
    let pairs = vertex_pairs(g.n_vertices);
    let total = g.n_lines() as usize;
    if total == 0 {
        return 1;
    }
    let target: Vec<u32> = pairs.iter().map(|&(i, j)| g.multiplicity(i, j)).collect();
    let mut count = 0u64;
    let mut seq = vec![0usize; total];
    loop {
        let mut hist = vec![0u32; pairs.len()];
        for &s in &seq {
            hist[s] += 1;
        }
        if hist == target {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == total {
                let l_fact: u64 = (1..=total as u64).product();
                return l_fact / count;
            }
            seq[k] += 1;
            if seq[k] < pairs.len() {
                break;
            }
            seq[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FunctionalSpace;
    use crate::lattice::{Lattice1p1, PropagatorSet};

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_graphs(2, 2).len(), 3);
        assert_eq!(enumerate_graphs(1, 5), vec![Multigraph::empty(1)]);
        assert_eq!(enumerate_graphs(3, 1).len(), 4);
        let gs = enumerate_graphs(3, 3);
        let mut sorted = gs.clone();
        sorted.sort_by_key(|g| vertex_pairs(3).iter().map(|&(i, j)| g.multiplicity(i, j)).collect::<Vec<_>>());
        assert_eq!(gs, sorted);
    }

    #[test]
    fn symmetry_and_divergence() {
        let fish = Multigraph::from_lines(2, &[((1, 2), 2)]).unwrap();
        let sun = Multigraph::from_lines(2, &[((1, 2), 3)]).unwrap();
        let edge = Multigraph::from_lines(2, &[((1, 2), 1)]).unwrap();
        assert_eq!(symmetry_factor(&fish), 2);
        assert_eq!(symmetry_factor(&sun), 6);
        assert_eq!(symmetry_factor(&edge), 1);
        assert_eq!(divergence_degree(&fish, 4), 0);
        assert_eq!(divergence_degree(&sun, 4), 2);
        assert_eq!(divergence_degree(&edge, 4), -2);
        assert!(Multigraph::from_lines(2, &[((1, 1), 1)]).is_none());
        for g in enumerate_graphs(4, 4) {
            assert_eq!(symmetry_factor(&g), brute_force_symmetry_factor(&g));
        }
    }

    #[test]
    fn eg_subgraph_examples() {
        let tri = Multigraph::from_lines(3, &[((1, 2), 1), ((2, 3), 1), ((1, 3), 1)]).unwrap();
        let subs = eg_subgraphs(&tri);
        assert_eq!(subs.len(), 8);
        let pair = subs.iter().find(|s| s.vertices == vec![1, 2]).unwrap();
        assert_eq!(pair.graph, Multigraph::from_lines(2, &[((1, 2), 1)]).unwrap());
        assert_eq!(subs.last().unwrap().graph, tri);
        assert!(subs.iter().filter(|s| s.vertices.len() == 1).all(|s| s.graph.n_lines() == 0));
    }

    #[test]
    fn graph_sum_matches_operator_and_product() {
        let lat = Lattice1p1::new(8, 6, 0.5, 1.0, 1.0).unwrap();
        let ps = PropagatorSet::new(&lat).unwrap();
        let q = Quantizer::new(&ps);
        let sp = FunctionalSpace::for_lattice(&lat, 2, 0);
        let mut w1 = vec![0.0; lat.n_sites()];
        let mut w2 = vec![0.0; lat.n_sites()];
        let mut w3 = vec![0.0; lat.n_sites()];
        w1[lat.site(2, 1)] = 0.5;
        w1[lat.site(3, 2)] = -1.0;
        w2[lat.site(5, 4)] = 0.25;
        w3[lat.site(4, 0)] = 2.0;
        let f1 = sp.local_power(&w1, 2).add(&sp.smeared_field(&w2));
        let f2 = sp.local_power(&w2, 3);
        let f3 = sp.smeared_field(&w3);
        let t2 = graph_expand_tn(&q, &[f1.clone(), f2.clone()]).unwrap();
        assert_eq!(t2, q.time_ordered_f(&f1, &f2).unwrap());
        assert_eq!(t2, operator_expand_tn(&q, &[f1.clone(), f2.clone()]).unwrap());
        let t3 = graph_expand_tn(&q, &[f1.clone(), f2.clone(), f3.clone()]).unwrap();
        assert_eq!(t3, operator_expand_tn(&q, &[f1, f2, f3]).unwrap());
    }

    #[test]
    fn tadpoles_cancel() {
        let lat = Lattice1p1::new(8, 6, 0.5, 1.0, 1.0).unwrap();
        let ps = PropagatorSet::new(&lat).unwrap();
        let q = Quantizer::new(&ps);
        let sp = FunctionalSpace::for_lattice(&lat, 1, 0);
        let mut w1 = vec![0.0; lat.n_sites()];
        let mut w2 = vec![0.0; lat.n_sites()];
        w1[lat.site(2, 1)] = 0.5;
        w2[lat.site(5, 3)] = -0.75;
        let rep = tadpole_demo(&q, &sp.local_power(&w1, 2), &sp.local_power(&w2, 2)).unwrap();
        assert!(rep.loops_cancel);
        assert!(rep.loop_terms_created > 0);
        let lin = tadpole_demo(&q, &sp.smeared_field(&w1), &sp.smeared_field(&w2)).unwrap();
        assert_eq!(lin.loop_terms_created, 0);
        assert!(lin.loops_cancel);
    }
}
