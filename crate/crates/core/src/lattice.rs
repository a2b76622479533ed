//! Discretized 1+1D Minkowski spacetime, the Klein-Gordon stencil and the
//! family of propagators built from it.
//!
//! Sites are indexed `t * n_x + x`; space is periodic, time is open. Every
//! site sum that stands for an integral carries the weight `a_t * a_x`.
//!
//! Green operators are translation invariant, so they are stored as tables
//! over the difference `(t_x - t_y, x_x - x_y mod n_x)` rather than as full
//! site-by-site matrices.

use crate::scalar::{self, Scalar};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Dense matrices are only produced below this many sites.
pub const DENSE_SITE_LIMIT: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("unstable leapfrog step: a_t^2 (m^2/4 + 1/a_x^2) = {0} must be < 1")]
    UnstableStep(f64),
    #[error("massless k = 0 mode has vanishing frequency")]
    ZeroModeSingular,
    #[error("lattice with {0} sites is too large for a dense matrix")]
    TooLargeForDense(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice1p1 {
    pub n_t: usize,
    pub n_x: usize,
    pub a_t: f64,
    pub a_x: f64,
    pub mass: f64,
}

impl Lattice1p1 {
    pub fn new(n_t: usize, n_x: usize, a_t: f64, a_x: f64, mass: f64) -> Result<Self, LatticeError> {
        let lat = Self { n_t, n_x, a_t, a_x, mass };
        lat.validate()?;
        Ok(lat)
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        if self.n_t < 4 {
            return Err(LatticeError::InvalidLattice(format!("n_t = {} < 4", self.n_t)));
        }
        if self.n_x < 4 || self.n_x % 2 != 0 {
            return Err(LatticeError::InvalidLattice(format!("n_x = {} must be even and >= 4", self.n_x)));
        }
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.a_t) || !finite_pos(self.a_x) {
            return Err(LatticeError::InvalidLattice("spacings must be positive and finite".into()));
        }
        if !self.mass.is_finite() || self.mass < 0.0 {
            return Err(LatticeError::InvalidLattice("mass must be finite and >= 0".into()));
        }
        if self.a_t > self.a_x {
            return Err(LatticeError::UnstableStep(self.courant_number()));
        }
        let c = self.courant_number();
        if c >= 1.0 {
            return Err(LatticeError::UnstableStep(c));
        }
        Ok(())
    }

    /// `a_t^2 (m^2/4 + 1/a_x^2)`; the leapfrog scheme is stable below one.
    pub fn courant_number(&self) -> f64 {
        self.a_t * self.a_t * (self.mass * self.mass / 4.0 + 1.0 / (self.a_x * self.a_x))
    }

    pub fn n_sites(&self) -> usize {
        self.n_t * self.n_x
    }

    pub fn volume(&self) -> f64 {
        self.a_t * self.a_x
    }

    pub fn site(&self, t: usize, x: usize) -> usize {
        t * self.n_x + (x % self.n_x)
    }

    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s / self.n_x, s % self.n_x)
    }

    pub fn time(&self, s: usize) -> usize {
        s / self.n_x
    }

    /// Rows on which the stencil sees both time neighbours.
    pub fn is_interior(&self, s: usize) -> bool {
        let t = self.time(s);
        t >= 1 && t + 1 < self.n_t
    }

    /// Shortest periodic distance between two spatial indices.
    pub fn spatial_distance(&self, x: usize, y: usize) -> usize {
        let d = (x + self.n_x - y % self.n_x) % self.n_x;
        d.min(self.n_x - d)
    }

    /// `y` lies in the closed backward lattice cone of `x` (one cell per step).
    pub fn in_past_cone(&self, x: usize, y: usize) -> bool {
        let (tx, ix) = self.coords(x);
        let (ty, iy) = self.coords(y);
        tx >= ty && self.spatial_distance(ix, iy) <= tx - ty
    }

    pub fn in_future_cone(&self, x: usize, y: usize) -> bool {
        self.in_past_cone(y, x)
    }

    /// Lattice momentum of mode `j`.
    pub fn momentum(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / (self.n_x as f64 * self.a_x)
    }

    /// Spatially discretized frequency `sqrt(m^2 + (2/a_x sin(k a_x/2))^2)`.
    pub fn omega(&self, j: usize) -> f64 {
        let s = 2.0 / self.a_x * (self.momentum(j) * self.a_x / 2.0).sin();
        (self.mass * self.mass + s * s).sqrt()
    }

    /// Frequency seen by the leapfrog scheme: `sin(Omega a_t / 2) = a_t omega / 2`.
    pub fn time_stepped_omega(&self, j: usize) -> f64 {
        2.0 / self.a_t * (self.a_t * self.omega(j) / 2.0).asin()
    }
}

impl Default for Lattice1p1 {
    fn default() -> Self {
        Self { n_t: 16, n_x: 8, a_t: 0.5, a_x: 1.0, mass: 1.0 }
    }
}

/// `(□ + m²)φ` evaluated by the second-order stencil; values outside the time range are zero.
pub fn apply_kg(lat: &Lattice1p1, phi: &[f64]) -> Vec<f64> {
    let (nt, nx) = (lat.n_t, lat.n_x);
    let it2 = 1.0 / (lat.a_t * lat.a_t);
    let ix2 = 1.0 / (lat.a_x * lat.a_x);
    let m2 = lat.mass * lat.mass;
    let at = |t: isize, x: usize| -> f64 {
        if t < 0 || t as usize >= nt {
            0.0
        } else {
            phi[t as usize * nx + x]
        }
    };
    let mut out = vec![0.0; nt * nx];
    for t in 0..nt {
        for x in 0..nx {
            let c = phi[t * nx + x];
            let ti = t as isize;
            let dtt = (at(ti + 1, x) + at(ti - 1, x) - 2.0 * c) * it2;
            let dxx = (phi[t * nx + (x + 1) % nx] + phi[t * nx + (x + nx - 1) % nx] - 2.0 * c) * ix2;
            out[t * nx + x] = dtt - dxx + m2 * c;
        }
    }
    out
}

/// Dense matrix of the Klein-Gordon stencil `□ + m²` with signature (+,−).
pub fn kg_operator(lat: &Lattice1p1) -> Result<DMatrix<f64>, LatticeError> {
    let n = lat.n_sites();
    if n > DENSE_SITE_LIMIT {
        return Err(LatticeError::TooLargeForDense(n));
    }
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for s in 0..n {
        e[s] = 1.0;
        let col = apply_kg(lat, &e);
        for (r, v) in col.into_iter().enumerate() {
            m[(r, s)] = v;
        }
        e[s] = 0.0;
    }
    Ok(m)
}

/// The Euler-Lagrange operator of the free action, `E = −(□ + m²)`.
pub fn euler_lagrange_operator(lat: &Lattice1p1) -> Result<DMatrix<f64>, LatticeError> {
    Ok(-kg_operator(lat)?)
}

fn leapfrog_step(lat: &Lattice1p1, cur: &[f64], prev: &[f64]) -> Vec<f64> {
    let nx = lat.n_x;
    let r = (lat.a_t / lat.a_x).powi(2);
    let mt = (lat.a_t * lat.mass).powi(2);
    (0..nx)
        .map(|x| {
            // neighbours summed first so mirror-image entries come out bit-identical
            let lap = (cur[(x + 1) % nx] + cur[(x + nx - 1) % nx]) - 2.0 * cur[x];
            2.0 * cur[x] - prev[x] + r * lap - mt * cur[x]
        })
        .collect()
}

/// Translation-invariant table `g[dn][dj]` of a Green operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceTable {
    pub n_t: usize,
    pub n_x: usize,
    pub data: Vec<f64>,
}

impl DifferenceTable {
    pub fn get(&self, dn: usize, dj: usize) -> f64 {
        self.data[dn * self.n_x + dj]
    }
}

/// Retarded and advanced Green operators of `E`, built by leapfrog stepping.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenPair {
    pub lat: Lattice1p1,
    /// `Δ^R(x, y)` for `t_x − t_y = dn`, `x_x − x_y ≡ dj`.
    pub retarded: DifferenceTable,
    /// `Δ^A(x, y)` for `t_y − t_x = dn`, `x_x − x_y ≡ dj`.
    pub advanced: DifferenceTable,
}

fn retarded_table(lat: &Lattice1p1) -> DifferenceTable {
    let (nt, nx) = (lat.n_t, lat.n_x);
    let mut data = vec![0.0; nt * nx];
    // source at (0, 0); u solves (□+m²)u = δ/(a_t a_x) and Δ^R = −u
    let mut prev = vec![0.0; nx];
    let mut cur = vec![0.0; nx];
    if nt > 1 {
        cur[0] = lat.a_t / lat.a_x;
        for x in 0..nx {
            data[nx + x] = -cur[x];
        }
    }
    for t in 2..nt {
        let next = leapfrog_step(lat, &cur, &prev);
        for x in 0..nx {
            data[t * nx + x] = -next[x];
        }
        prev = cur;
        cur = next;
    }
    DifferenceTable { n_t: nt, n_x: nx, data }
}

fn advanced_table(lat: &Lattice1p1) -> DifferenceTable {
    let (nt, nx) = (lat.n_t, lat.n_x);
    // step backwards in absolute time from a source on the last slice
    let mut field = vec![vec![0.0; nx]; nt];
    let src = nt - 1;
    if nt > 1 {
        field[src - 1][0] = lat.a_t / lat.a_x;
    }
    for t in (0..nt.saturating_sub(2)).rev() {
        field[t] = leapfrog_step(lat, &field[t + 1], &field[t + 2]);
    }
    let mut data = vec![0.0; nt * nx];
    for (t, row) in field.iter().enumerate() {
        let dn = src - t;
        for x in 0..nx {
            data[dn * nx + x] = -row[x];
        }
    }
    DifferenceTable { n_t: nt, n_x: nx, data }
}

impl GreenPair {
    pub fn new(lat: &Lattice1p1) -> Result<Self, LatticeError> {
        lat.validate()?;
        Ok(Self { lat: *lat, retarded: retarded_table(lat), advanced: advanced_table(lat) })
    }

    fn diff(&self, x: usize, y: usize) -> (isize, usize) {
        let (tx, ix) = self.lat.coords(x);
        let (ty, iy) = self.lat.coords(y);
        (tx as isize - ty as isize, (ix + self.lat.n_x - iy) % self.lat.n_x)
    }

    pub fn retarded(&self, x: usize, y: usize) -> f64 {
        let (dn, dj) = self.diff(x, y);
        if dn < 0 {
            0.0
        } else {
            self.retarded.get(dn as usize, dj)
        }
    }

    pub fn advanced(&self, x: usize, y: usize) -> f64 {
        let (dn, dj) = self.diff(x, y);
        if dn > 0 {
            0.0
        } else {
            self.advanced.get((-dn) as usize, dj)
        }
    }

    /// `Δ = Δ^R − Δ^A`.
    pub fn causal(&self, x: usize, y: usize) -> f64 {
        self.retarded(x, y) - self.advanced(x, y)
    }

    /// `Δ^D = ½(Δ^R + Δ^A)`.
    pub fn dirac(&self, x: usize, y: usize) -> f64 {
        0.5 * (self.retarded(x, y) + self.advanced(x, y))
    }

    fn dense_of(&self, f: impl Fn(usize, usize) -> f64) -> Result<DMatrix<f64>, LatticeError> {
        let n = self.lat.n_sites();
        if n > DENSE_SITE_LIMIT {
            return Err(LatticeError::TooLargeForDense(n));
        }
        Ok(DMatrix::from_fn(n, n, f))
    }

    pub fn dense_retarded(&self) -> Result<DMatrix<f64>, LatticeError> {
        self.dense_of(|x, y| self.retarded(x, y))
    }

    pub fn dense_advanced(&self) -> Result<DMatrix<f64>, LatticeError> {
        self.dense_of(|x, y| self.advanced(x, y))
    }

    pub fn dense_causal(&self) -> Result<DMatrix<f64>, LatticeError> {
        self.dense_of(|x, y| self.causal(x, y))
    }

    /// `(Δ^R f)(x) = Σ_y Δ^R(x,y) f(y) a_t a_x`.
    pub fn apply_retarded(&self, f: &[f64]) -> Vec<f64> {
        let n = self.lat.n_sites();
        let v = self.lat.volume();
        (0..n)
            .map(|x| (0..n).map(|y| self.retarded(x, y) * f[y]).sum::<f64>() * v)
            .collect()
    }
}

/// Mode sum of the two-point function `W = H + (i/2)Δ` at time lag `dn`, spatial lag `dj`.
fn mode_sum(lat: &Lattice1p1, dn: isize, dj: usize) -> Complex64 {
    let nx = lat.n_x;
    let norm = lat.a_t / (2.0 * nx as f64 * lat.a_x);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nx {
        let om = lat.time_stepped_omega(j);
        let k = lat.momentum(j);
        let amp = norm / (om * lat.a_t).sin();
        let phase = -om * lat.a_t * dn as f64 + k * lat.a_x * dj as f64;
        acc += Complex64::from_polar(amp, phase);
    }
    acc
}

fn check_modes(lat: &Lattice1p1) -> Result<(), LatticeError> {
    lat.validate()?;
    if lat.mass == 0.0 {
        return Err(LatticeError::ZeroModeSingular);
    }
    Ok(())
}

/// Table of `H` indexed by `|dn|` and `dj`, from the positive-frequency mode sum.
pub fn hadamard_table(lat: &Lattice1p1) -> Result<DifferenceTable, LatticeError> {
    check_modes(lat)?;
    let (nt, nx) = (lat.n_t, lat.n_x);
    let mut data = vec![0.0; nt * nx];
    for dn in 0..nt {
        for dj in 0..nx {
            data[dn * nx + dj] = mode_sum(lat, dn as isize, dj).re;
        }
        for dj in 1..nx / 2 {
            let avg = 0.5 * (data[dn * nx + dj] + data[dn * nx + nx - dj]);
            data[dn * nx + dj] = avg;
            data[dn * nx + nx - dj] = avg;
        }
    }
    Ok(DifferenceTable { n_t: nt, n_x: nx, data })
}

/// `Δ` reconstructed from the antisymmetric part of the mode sum, `2 Im W`, indexed like the retarded table.
pub fn mode_sum_causal_table(lat: &Lattice1p1) -> Result<DifferenceTable, LatticeError> {
    check_modes(lat)?;
    let (nt, nx) = (lat.n_t, lat.n_x);
    let mut data = vec![0.0; nt * nx];
    for dn in 0..nt {
        for dj in 0..nx {
            data[dn * nx + dj] = 2.0 * mode_sum(lat, dn as isize, dj).im;
        }
    }
    Ok(DifferenceTable { n_t: nt, n_x: nx, data })
}

/// All propagators of one lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorSet {
    pub green: GreenPair,
    hadamard: Option<DifferenceTable>,
}

impl PropagatorSet {
    /// Full set including `H`; needs `m > 0`.
    pub fn new(lat: &Lattice1p1) -> Result<Self, LatticeError> {
        let green = GreenPair::new(lat)?;
        let had = hadamard_table(lat)?;
        Ok(Self { green, hadamard: Some(had) })
    }

    /// Retarded and advanced operators only; valid for any mass.
    pub fn green_only(lat: &Lattice1p1) -> Result<Self, LatticeError> {
        Ok(Self { green: GreenPair::new(lat)?, hadamard: None })
    }

    pub fn from_parts(green: GreenPair, hadamard: Option<DifferenceTable>) -> Self {
        Self { green, hadamard }
    }

    pub fn hadamard_table(&self) -> Option<&DifferenceTable> {
        self.hadamard.as_ref()
    }

    pub fn lattice(&self) -> &Lattice1p1 {
        &self.green.lat
    }

    pub fn has_hadamard(&self) -> bool {
        self.hadamard.is_some()
    }

    pub fn retarded(&self, x: usize, y: usize) -> f64 {
        self.green.retarded(x, y)
    }

    pub fn advanced(&self, x: usize, y: usize) -> f64 {
        self.green.advanced(x, y)
    }

    pub fn causal(&self, x: usize, y: usize) -> f64 {
        self.green.causal(x, y)
    }

    pub fn dirac(&self, x: usize, y: usize) -> f64 {
        self.green.dirac(x, y)
    }

    /// # Panics
    /// If the set was built without `H`.
    pub fn hadamard(&self, x: usize, y: usize) -> f64 {
        let table = self.hadamard.as_ref().expect("propagator set has no Hadamard part");
        let lat = &self.green.lat;
        let (tx, ix) = lat.coords(x);
        let (ty, iy) = lat.coords(y);
        table.get(tx.abs_diff(ty), (ix + lat.n_x - iy) % lat.n_x)
    }

    /// `Δ⁺ = (i/2)Δ + H`.
    pub fn plus(&self, x: usize, y: usize) -> Complex64 {
        Complex64::new(self.hadamard(x, y), 0.5 * self.causal(x, y))
    }

    /// `Δ^F = iΔ^D + H`.
    pub fn feynman(&self, x: usize, y: usize) -> Complex64 {
        Complex64::new(self.hadamard(x, y), self.dirac(x, y))
    }

    pub fn dense_complex(
        &self,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Result<DMatrix<Complex64>, LatticeError> {
        let n = self.green.lat.n_sites();
        if n > DENSE_SITE_LIMIT {
            return Err(LatticeError::TooLargeForDense(n));
        }
        Ok(DMatrix::from_fn(n, n, f))
    }
}

/// `(H, Δ⁺)` as dense matrices.
pub fn hadamard_split(lat: &Lattice1p1) -> Result<(DMatrix<f64>, DMatrix<Complex64>), LatticeError> {
    let ps = PropagatorSet::new(lat)?;
    let n = lat.n_sites();
    if n > DENSE_SITE_LIMIT {
        return Err(LatticeError::TooLargeForDense(n));
    }
    let h = DMatrix::from_fn(n, n, |x, y| ps.hadamard(x, y));
    let p = ps.dense_complex(|x, y| ps.plus(x, y))?;
    Ok((h, p))
}

pub fn feynman_propagator(ps: &PropagatorSet) -> Result<DMatrix<Complex64>, LatticeError> {
    ps.dense_complex(|x, y| ps.feynman(x, y))
}

/// Two-point kernel `α Δ^R(x,y) + β Δ^A(x,y) + γ H(x,y)` with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorKernel {
    pub alpha: Scalar,
    pub beta: Scalar,
    pub gamma: Scalar,
}

impl PropagatorKernel {
    pub fn new(alpha: Scalar, beta: Scalar, gamma: Scalar) -> Self {
        Self { alpha, beta, gamma }
    }

    fn half_i() -> Scalar {
        Scalar::new(scalar::int(0), scalar::rat(1, 2))
    }

    /// `Δ` itself.
    pub fn causal() -> Self {
        Self::new(scalar::sc_one(), -scalar::sc_one(), scalar::sc_zero())
    }

    /// `(i/2)Δ`, the kernel of the Moyal-type star product.
    pub fn star() -> Self {
        Self::new(Self::half_i(), -Self::half_i(), scalar::sc_zero())
    }

    /// `Δ⁺ = (i/2)Δ + H`.
    pub fn plus() -> Self {
        Self::new(Self::half_i(), -Self::half_i(), scalar::sc_one())
    }

    /// `iΔ^D`.
    pub fn dirac_i() -> Self {
        Self::new(Self::half_i(), Self::half_i(), scalar::sc_zero())
    }

    /// `Δ^F = iΔ^D + H`.
    pub fn feynman() -> Self {
        Self::new(Self::half_i(), Self::half_i(), scalar::sc_one())
    }

    /// `H` alone.
    pub fn hadamard() -> Self {
        Self::new(scalar::sc_zero(), scalar::sc_zero(), scalar::sc_one())
    }

    pub fn needs_hadamard(&self) -> bool {
        !scalar::is_zero(&self.gamma)
    }

    pub fn is_symmetric(&self) -> bool {
        self.alpha == self.beta
    }

    pub fn scaled(&self, c: &Scalar) -> Self {
        Self::new(&self.alpha * c, &self.beta * c, &self.gamma * c)
    }

    pub fn plus_kernel(&self, other: &Self) -> Self {
        Self::new(&self.alpha + &other.alpha, &self.beta + &other.beta, &self.gamma + &other.gamma)
    }

    /// Exact value; the floating entries are converted without rounding.
    pub fn eval(&self, ps: &PropagatorSet, x: usize, y: usize) -> Scalar {
        let mut acc = scalar::sc_zero();
        if !scalar::is_zero(&self.alpha) {
            let r = ps.retarded(x, y);
            if r != 0.0 {
                acc += &self.alpha * scalar::real(scalar::exact_f64(r));
            }
        }
        if !scalar::is_zero(&self.beta) {
            let a = ps.advanced(x, y);
            if a != 0.0 {
                acc += &self.beta * scalar::real(scalar::exact_f64(a));
            }
        }
        if self.needs_hadamard() {
            let h = ps.hadamard(x, y);
            if h != 0.0 {
                acc += &self.gamma * scalar::real(scalar::exact_f64(h));
            }
        }
        acc
    }

    pub fn eval_f64(&self, ps: &PropagatorSet, x: usize, y: usize) -> Complex64 {
        let c = |s: &Scalar| scalar::to_c64(s);
        let mut acc = c(&self.alpha) * ps.retarded(x, y) + c(&self.beta) * ps.advanced(x, y);
        if self.needs_hadamard() {
            acc += c(&self.gamma) * ps.hadamard(x, y);
        }
        acc
    }
}

/// Exact lattice solution `cos(Ω t a_t − k x a_x + phase)` of the free equation.
pub fn discrete_plane_wave(lat: &Lattice1p1, mode: usize, phase: f64) -> Vec<f64> {
    let om = lat.time_stepped_omega(mode);
    let k = lat.momentum(mode);
    (0..lat.n_sites())
        .map(|s| {
            let (t, x) = lat.coords(s);
            (om * t as f64 * lat.a_t - k * x as f64 * lat.a_x + phase).cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Lattice1p1 {
        Lattice1p1::new(12, 8, 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn lattice_validation() {
        assert!(Lattice1p1::new(3, 8, 0.5, 1.0, 1.0).is_err());
        assert!(Lattice1p1::new(8, 7, 0.5, 1.0, 1.0).is_err());
        assert!(matches!(Lattice1p1::new(8, 8, 1.5, 1.0, 1.0), Err(LatticeError::UnstableStep(_))));
        assert!(matches!(Lattice1p1::new(8, 8, 1.0, 1.0, 1.0), Err(LatticeError::UnstableStep(_))));
    }

    #[test]
    fn kg_annihilates_constants_when_massless() {
        let lat = Lattice1p1::new(8, 8, 0.5, 1.0, 0.0).unwrap();
        let out = apply_kg(&lat, &vec![1.0; lat.n_sites()]);
        for s in 0..lat.n_sites() {
            if lat.is_interior(s) {
                assert_eq!(out[s], 0.0);
            }
        }
        let lat1 = small();
        assert!(apply_kg(&lat1, &vec![0.0; lat1.n_sites()]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn static_plane_wave_eigenvalue() {
        let lat = Lattice1p1::new(8, 8, 0.5, 1.0, 0.0).unwrap();
        let j = 3;
        let k = lat.momentum(j);
        let phi: Vec<f64> = (0..lat.n_sites()).map(|s| (k * lat.coords(s).1 as f64).cos()).collect();
        let out = apply_kg(&lat, &phi);
        let eig = (2.0 / lat.a_x * (k * lat.a_x / 2.0).sin()).powi(2);
        for s in 0..lat.n_sites() {
            if lat.is_interior(s) {
                assert!((out[s] - eig * phi[s]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn retarded_support_and_reflection() {
        let lat = small();
        let g = GreenPair::new(&lat).unwrap();
        for x in 0..lat.n_sites() {
            for y in 0..lat.n_sites() {
                if !lat.in_past_cone(x, y) {
                    assert_eq!(g.retarded(x, y), 0.0);
                }
                assert_eq!(g.advanced(x, y), g.retarded(y, x));
            }
        }
    }

    #[test]
    fn green_operator_inverts_e_on_interior() {
        let lat = small();
        let g = GreenPair::new(&lat).unwrap();
        let e = euler_lagrange_operator(&lat).unwrap();
        let r = g.dense_retarded().unwrap() * lat.volume();
        let prod = &e * &r;
        for i in 0..lat.n_sites() {
            if !lat.is_interior(i) {
                continue;
            }
            for j in 0..lat.n_sites() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - want).abs() < 1e-10, "({i},{j}) {}", prod[(i, j)]);
            }
        }
    }

    #[test]
    fn mode_sum_reproduces_causal_propagator() {
        let lat = small();
        let g = GreenPair::new(&lat).unwrap();
        let ms = mode_sum_causal_table(&lat).unwrap();
        for dn in 0..lat.n_t {
            for dj in 0..lat.n_x {
                assert!((ms.get(dn, dj) - g.retarded.get(dn, dj)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn massless_hadamard_is_singular() {
        let lat = Lattice1p1::new(8, 8, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(PropagatorSet::new(&lat), Err(LatticeError::ZeroModeSingular));
        assert!(PropagatorSet::green_only(&lat).is_ok());
    }

    #[test]
    fn feynman_is_time_ordered_plus() {
        let lat = small();
        let ps = PropagatorSet::new(&lat).unwrap();
        for x in 0..lat.n_sites() {
            for y in 0..lat.n_sites() {
                let (tx, ty) = (lat.time(x), lat.time(y));
                let f = ps.feynman(x, y);
                if tx > ty {
                    assert!((f - ps.plus(x, y)).norm() < 1e-12);
                } else if ty > tx {
                    assert!((f - ps.plus(y, x)).norm() < 1e-12);
                }
                assert_eq!(f, ps.feynman(y, x));
                assert_eq!(ps.hadamard(x, y), ps.hadamard(y, x));
            }
        }
    }

    #[test]
    fn kernel_coefficients_match_named_propagators() {
        let lat = small();
        let ps = PropagatorSet::new(&lat).unwrap();
        let (x, y) = (lat.site(6, 2), lat.site(3, 1));
        let f = PropagatorKernel::feynman().eval_f64(&ps, x, y);
        assert!((f - ps.feynman(x, y)).norm() < 1e-14);
        let p = PropagatorKernel::plus().eval_f64(&ps, y, x);
        assert!((p - ps.plus(y, x)).norm() < 1e-14);
        let exact = PropagatorKernel::causal().eval(&ps, x, y);
        assert_eq!(scalar::to_c64(&exact).re, ps.causal(x, y));
    }

    #[test]
    fn discrete_plane_wave_solves_stencil() {
        let lat = small();
        let phi = discrete_plane_wave(&lat, 2, 0.3);
        let out = apply_kg(&lat, &phi);
        for s in 0..lat.n_sites() {
            if lat.is_interior(s) {
                assert!(out[s].abs() < 1e-10);
            }
        }
    }
}
