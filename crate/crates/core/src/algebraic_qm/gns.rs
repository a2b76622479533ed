//! The GNS representation of a state, built by quotienting the null space of the Gram form.

use super::algebra::{AlgebraState, FiniteStarAlgebra};
use super::{AlgebraError, TOL};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Residuals of the defining properties, measured after construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GnsResiduals {
    /// `max |ω(b_k) − ⟨Ω, π(b_k)Ω⟩|`.
    pub state: f64,
    pub star: f64,
    pub product: f64,
    pub unit: f64,
    /// `max ω((b n)*(b n))` over basis `b` and unit null vectors `n`.
    pub left_ideal: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnsData {
    pub rep_dim: usize,
    /// `π(b_k)` in an orthonormal basis of `𝔄/𝔑`.
    pub pi: Vec<DMatrix<C>>,
    pub omega: DVector<C>,
    /// Basis indices whose classes span `𝔄/𝔑`.
    pub quotient_basis: Vec<usize>,
    /// `A ↦ π(A)Ω` on algebra coordinates.
    pub coordinates: DMatrix<C>,
    pub residuals: GnsResiduals,
}

fn hermitian_eigen(h: &DMatrix<C>) -> (Vec<f64>, DMatrix<C>) {
    let e = h.clone().symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// `G_ij = ω(b_i* b_j)`.
pub fn gram_matrix(alg: &FiniteStarAlgebra, st: &AlgebraState) -> Result<DMatrix<C>, AlgebraError> {
    let d = alg.dim();
    if st.omega.len() != d {
        return Err(AlgebraError::DimensionMismatch);
    }
    let stars: Vec<Vec<C>> = (0..d).map(|i| alg.star(&alg.basis(i))).collect();
    let g = DMatrix::from_fn(d, d, |i, j| st.eval(&alg.mul(&stars[i], &alg.basis(j))));
    let scale = g.camax().max(1.0);
    let defect = (&g - g.adjoint()).camax();
    if defect > TOL * scale {
        return Err(AlgebraError::InvalidState(format!("Gram matrix is not Hermitian (defect {defect:e})")));
    }
    let h = (&g + g.adjoint()) * C::new(0.5, 0.0);
    let (ev, _) = hermitian_eigen(&h);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -TOL {
        return Err(AlgebraError::StateNotPositive(min));
    }
    Ok(h)
}

/// Number of Gram eigenvalues above `1e−10` of the largest.
pub fn gram_rank(g: &DMatrix<C>) -> usize {
    let (ev, _) = hermitian_eigen(g);
    let top = ev.iter().copied().fold(0.0, f64::max);
    ev.iter().filter(|e| **e > TOL * top).count()
}

pub fn gns_construct(alg: &FiniteStarAlgebra, st: &AlgebraState) -> Result<GnsData, AlgebraError> {
    build(alg, st, None)
}

/// As [`gns_construct`], preferring quotient representatives in the given order.
pub fn gns_construct_with_order(
    alg: &FiniteStarAlgebra,
    st: &AlgebraState,
    order: &[usize],
) -> Result<GnsData, AlgebraError> {
    let mut seen = vec![false; alg.dim()];
    if order.len() != alg.dim() || order.iter().any(|&i| i >= alg.dim() || std::mem::replace(&mut seen[i], true)) {
        return Err(AlgebraError::InvalidState("pivot order must be a permutation of the basis".into()));
    }
    build(alg, st, Some(order))
}

/// Greedy pivoted Cholesky of `G`; returns the pivots and `L` with `G_QQ = L L†`.
fn pivoted_cholesky(g: &DMatrix<C>, rank: usize, order: Option<&[usize]>) -> (Vec<usize>, DMatrix<C>) {
    let d = g.nrows();
    let mut diag: Vec<f64> = (0..d).map(|i| g[(i, i)].re).collect();
    let mut cols: Vec<Vec<C>> = Vec::new();
    let mut piv = Vec::new();
    while piv.len() < rank {
        let top = diag.iter().enumerate().filter(|(i, _)| !piv.contains(i)).map(|(_, v)| *v).fold(0.0, f64::max);
        let p = match order {
            None => (0..d).filter(|i| !piv.contains(i)).find(|&i| diag[i] == top),
            Some(o) => o.iter().copied().filter(|i| !piv.contains(i)).find(|&i| diag[i] >= 1e-5 * top),
        };
        let Some(p) = p else { break };
        let lpp = diag[p].max(0.0).sqrt();
        let col: Vec<C> = (0..d)
            .map(|i| {
                let mut v = g[(i, p)];
                for c in &cols {
                    v -= c[i] * c[p].conj();
                }
                v / lpp
            })
            .collect();
        for (i, dv) in diag.iter_mut().enumerate() {
            *dv -= col[i].norm_sqr();
        }
        cols.push(col);
        piv.push(p);
    }
    let r = piv.len();
    let l = DMatrix::from_fn(r, r, |a, b| cols[b][piv[a]]);
    (piv, l)
}

fn build(alg: &FiniteStarAlgebra, st: &AlgebraState, order: Option<&[usize]>) -> Result<GnsData, AlgebraError> {
    let g = gram_matrix(alg, st)?;
    let d = alg.dim();
    let rank = gram_rank(&g);
    let (piv, l) = pivoted_cholesky(&g, rank, order);
    let r = piv.len();
    let linv = l.clone().try_inverse().ok_or(AlgebraError::GnsInvariant { what: "quotient basis".into(), residual: f64::INFINITY })?;
    // orthonormal classes E_a = Σ_i M_ia b_{q_i}, M = L^{−†}
    let m = linv.adjoint();
    let gq = DMatrix::from_fn(r, d, |a, j| g[(piv[a], j)]);
    let coords = &linv * gq;
    let elem = |a: usize| -> Vec<C> {
        let mut v = vec![C::default(); d];
        for (i, &q) in piv.iter().enumerate() {
            v[q] += m[(i, a)];
        }
        v
    };
    let es: Vec<Vec<C>> = (0..r).map(elem).collect();
    let pi: Vec<DMatrix<C>> = (0..d)
        .map(|k| {
            let bk = alg.basis(k);
            let mut mat = DMatrix::zeros(r, r);
            for (a, e) in es.iter().enumerate() {
                let v = DVector::from_vec(alg.mul(&bk, e));
                mat.set_column(a, &(&coords * v));
            }
            mat
        })
        .collect();
    let omega: DVector<C> = &coords * DVector::from_vec(alg.unit());
    let residuals = measure(alg, st, &g, &pi, &omega);
    let scale = 1.0 + pi.iter().map(|p| p.camax()).fold(0.0, f64::max);
    for (what, v) in [
        ("state", residuals.state),
        ("star", residuals.star),
        ("product", residuals.product),
        ("unit", residuals.unit),
        ("left ideal", residuals.left_ideal),
    ] {
        if v > TOL * scale {
            return Err(AlgebraError::GnsInvariant { what: what.into(), residual: v });
        }
    }
    let cyc = gram_rank(&(&coords * coords.adjoint()));
    if cyc != r {
        return Err(AlgebraError::GnsInvariant { what: "cyclicity".into(), residual: (r - cyc) as f64 });
    }
    Ok(GnsData { rep_dim: r, pi, omega, quotient_basis: piv, coordinates: coords, residuals })
}

fn measure(alg: &FiniteStarAlgebra, st: &AlgebraState, g: &DMatrix<C>, pi: &[DMatrix<C>], omega: &DVector<C>) -> GnsResiduals {
    let d = alg.dim();
    let combo = |v: &[C]| -> DMatrix<C> {
        let mut m = DMatrix::zeros(pi[0].nrows(), pi[0].ncols());
        for (c, p) in v.iter().zip(pi) {
            m += p * *c;
        }
        m
    };
    let mut res = GnsResiduals::default();
    for k in 0..d {
        res.state = res.state.max((st.omega[k] - omega.dotc(&(&pi[k] * omega))).norm());
        res.star = res.star.max((combo(&alg.star(&alg.basis(k))) - pi[k].adjoint()).camax());
        for j in 0..d {
            let prod = combo(&alg.mul(&alg.basis(k), &alg.basis(j)));
            res.product = res.product.max((prod - &pi[k] * &pi[j]).camax());
        }
    }
    let n = pi[0].nrows();
    res.unit = (&pi[alg.unit_index()] - DMatrix::<C>::identity(n, n)).camax();
    let (ev, vecs) = hermitian_eigen(g);
    let top = ev.iter().copied().fold(0.0, f64::max);
    for (i, _) in ev.iter().enumerate().filter(|(_, e)| **e <= TOL * top) {
        let nv: Vec<C> = vecs.column(i).iter().copied().collect();
        for k in 0..d {
            let v = DVector::from_vec(alg.mul(&alg.basis(k), &nv));
            res.left_ideal = res.left_ideal.max(v.dotc(&(g * &v)).norm());
        }
    }
    res
}

/// The isometry `V` with `V π(A)Ω = π′(A)ψ`, checked to intertwine the representations.
pub fn intertwiner(g: &GnsData, pi: &[DMatrix<C>], psi: &DVector<C>) -> Result<DMatrix<C>, AlgebraError> {
    let d = g.pi.len();
    let n = psi.len();
    if pi.len() != d || pi.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(AlgebraError::DimensionMismatch);
    }
    let v1 = &g.coordinates;
    let v2 = DMatrix::from_fn(n, d, |i, k| (&pi[k] * psi)[i]);
    let gram = v1 * v1.adjoint();
    let inv = gram.try_inverse().ok_or(AlgebraError::NoIntertwiner(f64::INFINITY))?;
    let u = &v2 * v1.adjoint() * inv;
    let r = g.rep_dim;
    let mut residual = (&u * v1 - &v2).camax();
    residual = residual.max((u.adjoint() * &u - DMatrix::<C>::identity(r, r)).camax());
    residual = residual.max((&u * &g.omega - psi).camax());
    for (a, b) in g.pi.iter().zip(pi) {
        residual = residual.max((&u * a - b * &u).camax());
    }
    if residual > TOL * (1.0 + u.camax()) {
        return Err(AlgebraError::NoIntertwiner(residual));
    }
    Ok(u)
}

/// The unitary `U` with `U π₁(A) = π₂(A) U` and `U Ω₁ = Ω₂`.
pub fn gns_uniqueness_check(g1: &GnsData, g2: &GnsData) -> Result<DMatrix<C>, AlgebraError> {
    if g1.rep_dim != g2.rep_dim {
        return Err(AlgebraError::NoIntertwiner(f64::INFINITY));
    }
    let u = intertwiner(g1, &g2.pi, &g2.omega)?;
    let n = g1.rep_dim;
    let co = (&u * u.adjoint() - DMatrix::<C>::identity(n, n)).camax();
    if co > TOL {
        return Err(AlgebraError::NoIntertwiner(co));
    }
    Ok(u)
}

/// `π₁ ⊕ π₂` on the basis.
pub fn direct_sum(pi1: &[DMatrix<C>], pi2: &[DMatrix<C>]) -> Vec<DMatrix<C>> {
    pi1.iter()
        .zip(pi2)
        .map(|(a, b)| {
            let (n1, n2) = (a.nrows(), b.nrows());
            let mut m = DMatrix::zeros(n1 + n2, n1 + n2);
            m.view_mut((0, 0), (n1, n1)).copy_from(a);
            m.view_mut((n1, n1), (n2, n2)).copy_from(b);
            m
        })
        .collect()
}

/// `(ψ₁, ψ₂)/√2`.
pub fn balanced_vector(psi1: &DVector<C>, psi2: &DVector<C>) -> DVector<C> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_iterator(psi1.len() + psi2.len(), psi1.iter().chain(psi2.iter()).map(|z| z * s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutative_evaluation_state() {
        let alg = FiniteStarAlgebra::commutative(2).unwrap();
        let st = AlgebraState::new(&alg, vec![C::new(1.0, 0.0), C::default()]).unwrap();
        let g = gram_matrix(&alg, &st).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[C::new(1.0, 0.0), C::default(), C::default(), C::default()]));
        let gns = gns_construct(&alg, &st).unwrap();
        assert_eq!(gns.rep_dim, 1);
        assert!((gns.pi[1][(0, 0)]).norm() < 1e-14);
    }

    #[test]
    fn negative_functional_is_rejected() {
        let alg = FiniteStarAlgebra::commutative(2).unwrap();
        // ω(𝟙 − e_1) = −1 while 𝟙 − e_1 is a projection
        let st = AlgebraState::new(&alg, vec![C::new(1.0, 0.0), C::new(2.0, 0.0)]).unwrap();
        assert!(matches!(gram_matrix(&alg, &st), Err(AlgebraError::StateNotPositive(_))));
    }
}
