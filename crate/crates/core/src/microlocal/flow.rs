//! Hamiltonian flow of principal symbols on `T*ℝ²`, coordinates `(t, x)`.

use serde::{Deserialize, Serialize};

pub trait PrincipalSymbol {
    fn sigma(&self, x: [f64; 2], k: [f64; 2]) -> f64;
    fn grad_x(&self, x: [f64; 2], k: [f64; 2]) -> [f64; 2];
    fn grad_k(&self, x: [f64; 2], k: [f64; 2]) -> [f64; 2];
}

/// `σ(k) = g^{μν} k_μ k_ν` with a constant symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantMetric {
    pub inverse: [[f64; 2]; 2],
}

impl ConstantMetric {
    pub fn minkowski() -> Self {
        Self { inverse: [[1.0, 0.0], [0.0, -1.0]] }
    }

    pub fn new(inverse: [[f64; 2]; 2]) -> Self {
        let s = 0.5 * (inverse[0][1] + inverse[1][0]);
        Self { inverse: [[inverse[0][0], s], [s, inverse[1][1]]] }
    }
}

impl PrincipalSymbol for ConstantMetric {
    fn sigma(&self, _x: [f64; 2], k: [f64; 2]) -> f64 {
        let g = &self.inverse;
        g[0][0] * k[0] * k[0] + 2.0 * g[0][1] * k[0] * k[1] + g[1][1] * k[1] * k[1]
    }

    fn grad_x(&self, _x: [f64; 2], _k: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn grad_k(&self, _x: [f64; 2], k: [f64; 2]) -> [f64; 2] {
        let g = &self.inverse;
        [2.0 * (g[0][0] * k[0] + g[0][1] * k[1]), 2.0 * (g[1][0] * k[0] + g[1][1] * k[1])]
    }
}

/// `σ = e^{−2ω(x)}(k_t² − k_x²)` with `ω(x) = A sin(q·x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformallyFlat {
    pub amplitude: f64,
    pub wave: [f64; 2],
}

impl ConformallyFlat {
    fn omega(&self, x: [f64; 2]) -> (f64, [f64; 2]) {
        let ph = self.wave[0] * x[0] + self.wave[1] * x[1];
        let c = self.amplitude * ph.cos();
        (self.amplitude * ph.sin(), [c * self.wave[0], c * self.wave[1]])
    }
}

impl PrincipalSymbol for ConformallyFlat {
    fn sigma(&self, x: [f64; 2], k: [f64; 2]) -> f64 {
        (-2.0 * self.omega(x).0).exp() * (k[0] * k[0] - k[1] * k[1])
    }

    fn grad_x(&self, x: [f64; 2], k: [f64; 2]) -> [f64; 2] {
        let (w, dw) = self.omega(x);
        let s = -2.0 * (-2.0 * w).exp() * (k[0] * k[0] - k[1] * k[1]);
        [s * dw[0], s * dw[1]]
    }

    fn grad_k(&self, x: [f64; 2], k: [f64; 2]) -> [f64; 2] {
        let e = (-2.0 * self.omega(x).0).exp();
        [2.0 * e * k[0], -2.0 * e * k[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub s: f64,
    pub x: [f64; 2],
    pub k: [f64; 2],
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bicharacteristic {
    pub points: Vec<FlowPoint>,
    pub sigma0: f64,
    pub max_drift: f64,
    /// `max |σ − σ₀|` divided by the flow time.
    pub drift_per_unit_time: f64,
}

impl Bicharacteristic {
    pub fn is_null(&self) -> bool {
        self.sigma0 == 0.0
    }
}

const FIXED_POINT_ITERS: usize = 100;

fn close(a: [f64; 2], b: [f64; 2]) -> bool {
    let scale = 1.0 + a[0].abs().max(a[1].abs());
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) <= 1e-16 * scale
}

/// One Störmer–Verlet step for a general (non-separable) Hamiltonian.
fn verlet_step(p: &dyn PrincipalSymbol, x: [f64; 2], k: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let half = 0.5 * h;
    let mut kh = k;
    for _ in 0..FIXED_POINT_ITERS {
        let g = p.grad_x(x, kh);
        let next = [k[0] - half * g[0], k[1] - half * g[1]];
        let done = close(next, kh);
        kh = next;
        if done {
            break;
        }
    }
    let v0 = p.grad_k(x, kh);
    let mut x1 = [x[0] + h * v0[0], x[1] + h * v0[1]];
    for _ in 0..FIXED_POINT_ITERS {
        let v1 = p.grad_k(x1, kh);
        let next = [x[0] + half * (v0[0] + v1[0]), x[1] + half * (v0[1] + v1[1])];
        let done = close(next, x1);
        x1 = next;
        if done {
            break;
        }
    }
    let g = p.grad_x(x1, kh);
    (x1, [kh[0] - half * g[0], kh[1] - half * g[1]])
}

/// Triple-jump composition of three leapfrog steps, fourth order and symplectic.
fn composed_step(p: &dyn PrincipalSymbol, x: [f64; 2], k: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let c = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - c);
    let w0 = -c * w1;
    let (x, k) = verlet_step(p, x, k, w1 * h);
    let (x, k) = verlet_step(p, x, k, w0 * h);
    verlet_step(p, x, k, w1 * h)
}

/// Integrates `ẋ = ∂σ/∂k`, `k̇ = −∂σ/∂x` from `(x0, k0)`.
pub fn bicharacteristic_flow(p: &dyn PrincipalSymbol, x0: [f64; 2], k0: [f64; 2], steps: usize, dt: f64) -> Bicharacteristic {
    let sigma0 = p.sigma(x0, k0);
    let mut points = Vec::with_capacity(steps + 1);
    points.push(FlowPoint { s: 0.0, x: x0, k: k0, sigma: sigma0 });
    let (mut x, mut k) = (x0, k0);
    let mut max_drift: f64 = 0.0;
    for n in 1..=steps {
        (x, k) = composed_step(p, x, k, dt);
        let sigma = p.sigma(x, k);
        max_drift = max_drift.max((sigma - sigma0).abs());
        points.push(FlowPoint { s: n as f64 * dt, x, k, sigma });
    }
    let time = steps as f64 * dt.abs();
    let drift_per_unit_time = if time > 0.0 { max_drift / time } else { 0.0 };
    Bicharacteristic { points, sigma0, max_drift, drift_per_unit_time }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_null_ray_is_a_straight_light_line() {
        let b = bicharacteristic_flow(&ConstantMetric::minkowski(), [0.0, 0.0], [1.0, 1.0], 1000, 1e-3);
        assert!(b.is_null());
        let end = b.points.last().unwrap();
        assert!((end.x[0] - 2.0).abs() < 1e-12 && (end.x[1] + 2.0).abs() < 1e-12);
        assert!(b.max_drift < 1e-14);
    }

    #[test]
    fn flat_timelike_symbol_is_constant() {
        let b = bicharacteristic_flow(&ConstantMetric::minkowski(), [0.0, 0.0], [2.0, 0.5], 100, 0.01);
        assert!((b.sigma0 - 3.75).abs() < 1e-15);
        assert!(b.max_drift < 1e-12);
    }

    #[test]
    fn conformal_drift_is_small() {
        let m = ConformallyFlat { amplitude: 0.2, wave: [0.7, 1.1] };
        let b = bicharacteristic_flow(&m, [0.1, -0.2], [1.0, 0.4], 10_000, 1e-3);
        assert!(b.drift_per_unit_time < 1e-8, "{}", b.drift_per_unit_time);
    }
}
