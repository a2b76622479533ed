//! Finite-dimensional involutive algebras in a fixed basis.

use super::{AlgebraError, TOL};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type C = Complex64;

/// `b_i b_j = Σ_k c[i][j][k] b_k`, `b_i* = Σ_j s[i][j] b_j`, `b_unit = 𝟙`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteStarAlgebra {
    dim: usize,
    structure: Vec<C>,
    involution: Vec<C>,
    unit: usize,
}

fn close(a: C, b: C) -> bool {
    (a - b).norm() <= TOL * (1.0 + a.norm().max(b.norm()))
}

/// Removes solver noise from coefficients that are integers up to rounding.
fn snap(v: f64) -> f64 {
    if (v - v.round()).abs() < 1e-12 {
        v.round() + 0.0
    } else {
        v
    }
}

impl FiniteStarAlgebra {
    /// Validates associativity, the involution laws and the unit laws on basis elements.
    pub fn new(dim: usize, structure: Vec<C>, involution: Vec<C>, unit: usize) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::InvalidAlgebra("dimension must be positive".into()));
        }
        if structure.len() != dim * dim * dim || involution.len() != dim * dim {
            return Err(AlgebraError::InvalidAlgebra(format!(
                "expected {} structure constants and {} involution entries",
                dim * dim * dim,
                dim * dim
            )));
        }
        if unit >= dim {
            return Err(AlgebraError::InvalidAlgebra(format!("unit index {unit} out of range")));
        }
        if structure.iter().chain(&involution).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::InvalidAlgebra("non-finite entry".into()));
        }
        let alg = Self { dim, structure, involution, unit };
        alg.check()?;
        Ok(alg)
    }

    /// The algebra spanned by `basis`, which must contain the identity and be closed under products and adjoints.
    pub fn from_matrices(basis: &[DMatrix<C>]) -> Result<Self, AlgebraError> {
        let dim = basis.len();
        let n = basis.first().map(|m| m.nrows()).unwrap_or(0);
        if dim == 0 || basis.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(AlgebraError::InvalidAlgebra("basis matrices must be square of one size".into()));
        }
        let flat = DMatrix::from_fn(n * n, dim, |r, c| basis[c][(r / n, r % n)]);
        let svd = flat.clone().svd(true, true);
        let coords = |m: &DMatrix<C>| -> Result<Vec<C>, AlgebraError> {
            let v = DVector::from_fn(n * n, |r, _| m[(r / n, r % n)]);
            let x = svd.solve(&v, 1e-13).map_err(|e| AlgebraError::InvalidAlgebra(e.to_string()))?;
            let miss = (&flat * &x - &v).camax();
            if miss > TOL * (1.0 + v.camax()) {
                return Err(AlgebraError::InvalidAlgebra(format!("basis is not closed (miss {miss:e})")));
            }
            Ok(x.iter().map(|z| C::new(snap(z.re), snap(z.im))).collect())
        };
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * svd.singular_values.max()).count();
        if rank < dim {
            return Err(AlgebraError::InvalidAlgebra("basis matrices are linearly dependent".into()));
        }
        let id = DMatrix::<C>::identity(n, n);
        let unit = basis
            .iter()
            .position(|m| (m - &id).camax() <= TOL)
            .ok_or_else(|| AlgebraError::InvalidAlgebra("the identity is not a basis element".into()))?;
        let mut structure = Vec::with_capacity(dim * dim * dim);
        for a in basis {
            for b in basis {
                structure.extend(coords(&(a * b))?);
            }
        }
        let mut involution = Vec::with_capacity(dim * dim);
        for a in basis {
            involution.extend(coords(&a.adjoint())?);
        }
        Self::new(dim, structure, involution, unit)
    }

    /// `ℂⁿ` with pointwise operations in the basis `𝟙, e_1, …, e_{n−1}`.
    pub fn commutative(n: usize) -> Result<Self, AlgebraError> {
        let mut basis = vec![DMatrix::<C>::identity(n, n)];
        for i in 1..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, i)] = C::new(1.0, 0.0);
            basis.push(m);
        }
        Self::from_matrices(&basis)
    }

    /// `M_n(ℂ)` in the basis `𝟙` followed by the matrix units `E_ab`, `(a, b) ≠ (0, 0)`.
    pub fn matrix_algebra(n: usize) -> Result<Self, AlgebraError> {
        Self::from_matrices(&matrix_units(n))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit_index(&self) -> usize {
        self.unit
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> C {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn s(&self, i: usize, j: usize) -> C {
        self.involution[i * self.dim + j]
    }

    pub fn structure_constants(&self) -> &[C] {
        &self.structure
    }

    pub fn involution_matrix(&self) -> &[C] {
        &self.involution
    }

    pub fn basis(&self, i: usize) -> Vec<C> {
        let mut v = vec![C::default(); self.dim];
        v[i] = C::new(1.0, 0.0);
        v
    }

    pub fn unit(&self) -> Vec<C> {
        self.basis(self.unit)
    }

    pub fn mul(&self, a: &[C], b: &[C]) -> Vec<C> {
        let d = self.dim;
        let mut out = vec![C::default(); d];
        for (i, ai) in a.iter().enumerate().filter(|(_, z)| **z != C::default()) {
            for (j, bj) in b.iter().enumerate().filter(|(_, z)| **z != C::default()) {
                let w = ai * bj;
                let row = &self.structure[(i * d + j) * d..(i * d + j + 1) * d];
                for (o, c) in out.iter_mut().zip(row) {
                    *o += w * c;
                }
            }
        }
        out
    }

    /// Antilinear: `(Σ a_i b_i)* = Σ ā_i b_i*`.
    pub fn star(&self, a: &[C]) -> Vec<C> {
        let d = self.dim;
        let mut out = vec![C::default(); d];
        for (i, ai) in a.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += ai.conj() * self.involution[i * d + j];
            }
        }
        out
    }

    fn check(&self) -> Result<(), AlgebraError> {
        let d = self.dim;
        let bad = |what: &str, i: usize, j: usize| Err(AlgebraError::InvalidAlgebra(format!("{what} fails at ({i}, {j})")));
        let same = |x: &[C], y: &[C]| x.iter().zip(y).all(|(a, b)| close(*a, *b));
        let u = self.unit();
        for i in 0..d {
            let bi = self.basis(i);
            if !same(&self.mul(&u, &bi), &bi) || !same(&self.mul(&bi, &u), &bi) {
                return bad("unit law", i, i);
            }
            if !same(&self.star(&self.star(&bi)), &bi) {
                return bad("(A*)* = A", i, i);
            }
            for j in 0..d {
                let bj = self.basis(j);
                let ij = self.mul(&bi, &bj);
                if !same(&self.star(&ij), &self.mul(&self.star(&bj), &self.star(&bi))) {
                    return bad("(AB)* = B*A*", i, j);
                }
                for k in 0..d {
                    let bk = self.basis(k);
                    if !same(&self.mul(&ij, &bk), &self.mul(&bi, &self.mul(&bj, &bk))) {
                        return Err(AlgebraError::InvalidAlgebra(format!("associativity fails at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Values of a linear functional on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraState {
    pub omega: Vec<C>,
}

impl AlgebraState {
    pub fn new(alg: &FiniteStarAlgebra, omega: Vec<C>) -> Result<Self, AlgebraError> {
        if omega.len() != alg.dim() {
            return Err(AlgebraError::InvalidState(format!("expected {} values, got {}", alg.dim(), omega.len())));
        }
        if !close(omega[alg.unit_index()], C::new(1.0, 0.0)) {
            return Err(AlgebraError::InvalidState(format!("ω(𝟙) = {} ≠ 1", omega[alg.unit_index()])));
        }
        Ok(Self { omega })
    }

    /// `A ↦ ⟨ψ, π(A)ψ⟩` for a representation given on the basis.
    pub fn vector_state(alg: &FiniteStarAlgebra, pi: &[DMatrix<C>], psi: &DVector<C>) -> Result<Self, AlgebraError> {
        if pi.len() != alg.dim() || pi.iter().any(|m| m.nrows() != psi.len() || m.ncols() != psi.len()) {
            return Err(AlgebraError::DimensionMismatch);
        }
        Self::new(alg, pi.iter().map(|m| psi.dotc(&(m * psi))).collect())
    }

    /// `A ↦ tr(ρA)` on an algebra built from matrices.
    pub fn density(basis: &[DMatrix<C>], rho: &DMatrix<C>, alg: &FiniteStarAlgebra) -> Result<Self, AlgebraError> {
        Self::new(alg, basis.iter().map(|b| (rho * b).trace()).collect())
    }

    pub fn eval(&self, a: &[C]) -> C {
        self.omega.iter().zip(a).map(|(w, x)| w * x).sum()
    }

    pub fn mix(&self, other: &Self, lambda: f64) -> Self {
        Self { omega: self.omega.iter().zip(&other.omega).map(|(a, b)| a * lambda + b * (1.0 - lambda)).collect() }
    }
}

/// Basis matrices of [`FiniteStarAlgebra::matrix_algebra`].
pub fn matrix_units(n: usize) -> Vec<DMatrix<C>> {
    let mut basis = vec![DMatrix::<C>::identity(n, n)];
    for a in 0..n {
        for b in 0..n {
            if (a, b) != (0, 0) {
                let mut m = DMatrix::zeros(n, n);
                m[(a, b)] = C::new(1.0, 0.0);
                basis.push(m);
            }
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_algebra_products() {
        let m = FiniteStarAlgebra::matrix_algebra(2).unwrap();
        assert_eq!(m.dim(), 4);
        // E_01 E_10 = E_00 = 𝟙 − E_11
        let p = m.mul(&m.basis(1), &m.basis(2));
        assert!(close(p[0], C::new(1.0, 0.0)) && close(p[3], C::new(-1.0, 0.0)));
        // E_01* = E_10
        assert_eq!(m.star(&m.basis(1)), m.basis(2));
    }

    #[test]
    fn rejects_non_associative_constants() {
        let mut alg = FiniteStarAlgebra::matrix_algebra(2).unwrap();
        alg.structure[(1 * 4 + 2) * 4 + 3] += C::new(0.5, 0.0);
        let r = FiniteStarAlgebra::new(4, alg.structure, alg.involution, 0);
        assert!(matches!(r, Err(AlgebraError::InvalidAlgebra(_))));
    }

    #[test]
    fn state_needs_normalization() {
        let alg = FiniteStarAlgebra::commutative(2).unwrap();
        assert!(AlgebraState::new(&alg, vec![C::new(2.0, 0.0), C::default()]).is_err());
    }
}
