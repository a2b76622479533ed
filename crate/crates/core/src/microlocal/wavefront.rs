//! Windowed Fourier decay estimates of wavefront sets.

use super::probe::GaussExp;
use super::MicrolocalError;
use crate::eg_renorm::{pair_probe, SymbolicDistribution1D};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A distribution known through grid samples or a symbolic expression.
#[derive(Clone, Debug, PartialEq)]
pub enum SampledDistribution {
    Grid1D { x0: f64, dx: f64, samples: Vec<Complex64> },
    /// Row-major in time: `samples[i·n_x + j]` sits at `(t0 + i·dt, x0 + j·dx)`.
    Grid2D { t0: f64, x0: f64, dt: f64, dx: f64, n_t: usize, n_x: usize, samples: Vec<Complex64> },
    Symbolic(SymbolicDistribution1D),
}

impl SampledDistribution {
    pub fn grid_1d(x0: f64, dx: f64, samples: Vec<Complex64>) -> Result<Self, MicrolocalError> {
        let d = Self::Grid1D { x0, dx, samples };
        d.validate()?;
        Ok(d)
    }

    pub fn grid_2d(
        (t0, x0): (f64, f64),
        (dt, dx): (f64, f64),
        (n_t, n_x): (usize, usize),
        samples: Vec<Complex64>,
    ) -> Result<Self, MicrolocalError> {
        let d = Self::Grid2D { t0, x0, dt, dx, n_t, n_x, samples };
        d.validate()?;
        Ok(d)
    }

    /// Samples `f` on a uniform 1D grid.
    pub fn sample_1d(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self, MicrolocalError> {
        Self::grid_1d(x0, dx, (0..n).map(|j| f(x0 + j as f64 * dx)).collect())
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Grid2D { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<(), MicrolocalError> {
        let bad = |m: &str| Err(MicrolocalError::InvalidGrid(m.into()));
        match self {
            Self::Grid1D { x0, dx, samples } => {
                if !(dx.is_finite() && *dx > 0.0 && x0.is_finite()) {
                    return bad("grid spacing must be positive and finite");
                }
                if samples.is_empty() {
                    return bad("no samples");
                }
                if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return bad("non-finite sample");
                }
            }
            Self::Grid2D { t0, x0, dt, dx, n_t, n_x, samples } => {
                if !(dt.is_finite() && dx.is_finite() && *dt > 0.0 && *dx > 0.0 && t0.is_finite() && x0.is_finite()) {
                    return bad("grid spacing must be positive and finite");
                }
                if *n_t == 0 || *n_x == 0 || samples.len() != n_t * n_x {
                    return bad("sample count does not match the grid shape");
                }
                if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return bad("non-finite sample");
                }
            }
            Self::Symbolic(_) => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WfConfig {
    /// Gaussian width in grid cells.
    pub sigma_cells: f64,
    /// Gaussian width for symbolic inputs.
    pub symbolic_sigma: f64,
    /// Truncation radius in units of σ.
    pub truncation: f64,
    /// Smallest sampled `|k|` in units of `1/σ`.
    pub k_min_factor: f64,
    /// Largest sampled `|k|`; defaults to half the Nyquist frequency on grids and `64/σ` otherwise.
    pub k_max: Option<f64>,
    pub n_radii: usize,
    /// Directions with decay exponent below this are singular.
    pub threshold: f64,
    /// Amplitudes below `floor · max|F|` at a centre count as fully decayed.
    pub floor: f64,
    /// Number of rays in two dimensions.
    pub n_rays: usize,
}

impl Default for WfConfig {
    fn default() -> Self {
        Self {
            sigma_cells: 8.0,
            symbolic_sigma: 0.05,
            truncation: 6.0,
            k_min_factor: 2.0,
            k_max: None,
            n_radii: 8,
            threshold: 4.0,
            floor: 1e-7,
            n_rays: 16,
        }
    }
}

impl WfConfig {
    pub fn validate(&self) -> Result<(), MicrolocalError> {
        let ok = self.sigma_cells > 0.0
            && self.symbolic_sigma > 0.0
            && self.truncation > 0.0
            && self.k_min_factor > 0.0
            && self.n_radii >= 2
            && self.n_rays >= 4
            && self.floor >= 0.0
            && self.k_max.map_or(true, |k| k > 0.0);
        if ok {
            Ok(())
        } else {
            Err(MicrolocalError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfEntry {
    pub base: Vec<f64>,
    /// Unit covector direction.
    pub direction: Vec<f64>,
    /// Fitted `p` in `|F(r k̂)| ~ r^{−p}`; infinite when the amplitude falls below the floor.
    pub exponent: f64,
    pub singular: bool,
    /// `|F(r k̂)|` at the sampled radii.
    pub amplitudes: Vec<f64>,
}

/// `(x, k, k′)` with `k + k′ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroHit {
    pub base: Vec<f64>,
    pub k: Vec<f64>,
    pub k_prime: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfEstimate {
    pub entries: Vec<WfEntry>,
    pub threshold: f64,
    pub radii: Vec<f64>,
    /// Zero vectors met while forming a Whitney sum.
    pub zero_hits: Vec<ZeroHit>,
}

fn angle(d: &[f64]) -> f64 {
    match d {
        [s] => {
            if *s < 0.0 {
                PI
            } else {
                0.0
            }
        }
        [a, b] => b.atan2(*a).rem_euclid(2.0 * PI),
        _ => 0.0,
    }
}

pub(crate) fn sort_entries(entries: &mut [WfEntry]) {
    entries.sort_by(|a, b| {
        a.base
            .partial_cmp(&b.base)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(angle(&a.direction).total_cmp(&angle(&b.direction)))
    });
}

impl WfEstimate {
    /// A cone given by directions at base points, every direction singular.
    pub fn from_cones(threshold: f64, cones: &[(Vec<f64>, Vec<Vec<f64>>)]) -> Self {
        let mut entries = Vec::new();
        for (base, dirs) in cones {
            for d in dirs {
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n == 0.0 {
                    continue;
                }
                entries.push(WfEntry {
                    base: base.clone(),
                    direction: d.iter().map(|v| v / n).collect(),
                    exponent: 0.0,
                    singular: true,
                    amplitudes: Vec::new(),
                });
            }
        }
        sort_entries(&mut entries);
        Self { entries, threshold, radii: Vec::new(), zero_hits: Vec::new() }
    }

    pub fn singular(&self) -> impl Iterator<Item = &WfEntry> {
        self.entries.iter().filter(|e| e.singular)
    }

    pub fn singular_at(&self, base: &[f64]) -> Vec<&WfEntry> {
        self.singular().filter(|e| same_point(&e.base, base)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.singular().next().is_none()
    }

    /// `sup (1 + |k|)^N |F(k)|` over sampled `k` at `base` whose direction passes `cone`.
    pub fn seminorm(&self, base: &[f64], order: u32, cone: impl Fn(&[f64]) -> bool) -> f64 {
        self.entries
            .iter()
            .filter(|e| same_point(&e.base, base) && cone(&e.direction))
            .flat_map(|e| e.amplitudes.iter().zip(&self.radii).map(|(a, r)| (1.0 + r).powi(order as i32) * a))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())))
}

/// Unit directions: `±1` in one dimension, `n_rays` equally spaced rays in two.
pub fn directions(dim: usize, n_rays: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        vec![vec![-1.0], vec![1.0]]
    } else {
        (0..n_rays)
            .map(|m| {
                let th = 2.0 * PI * m as f64 / n_rays as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()
    }
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo * (hi / lo).powf(j as f64 / (n - 1) as f64)).collect()
}

/// Localized transform at one centre.
enum Local<'a> {
    Grid1 { xs: Vec<f64>, w: Vec<Complex64> },
    Grid2 { ts: Vec<f64>, xs: Vec<f64>, w: Vec<Complex64> },
    Sym { t: &'a SymbolicDistribution1D, centre: f64, sigma: f64, cut: f64 },
}

impl Local<'_> {
    fn eval(&self, k: &[f64]) -> Result<Complex64, MicrolocalError> {
        Ok(match self {
            Self::Grid1 { xs, w } => xs.iter().zip(w).map(|(x, w)| w * Complex64::from_polar(1.0, k[0] * x)).sum(),
            Self::Grid2 { ts, xs, w } => {
                let px: Vec<Complex64> = xs.iter().map(|x| Complex64::from_polar(1.0, k[1] * x)).collect();
                let mut total = Complex64::default();
                for (i, t) in ts.iter().enumerate() {
                    let row: Complex64 = w[i * xs.len()..(i + 1) * xs.len()].iter().zip(&px).map(|(a, b)| a * b).sum();
                    total += row * Complex64::from_polar(1.0, k[0] * t);
                }
                total
            }
            Self::Sym { t, centre, sigma, cut } => pair_probe(t, &GaussExp::new(*centre, *sigma, k[0], *cut), true)?,
        })
    }
}

fn window_range(c: f64, origin: f64, h: f64, n: usize, half: f64) -> Option<(usize, usize)> {
    let lo = (c - half - origin) / h;
    let hi = (c + half - origin) / h;
    let slack = 1e-9;
    if lo < -slack || hi > (n - 1) as f64 + slack {
        return None;
    }
    Some((lo.max(0.0).ceil() as usize, (hi.floor().max(0.0) as usize).min(n - 1)))
}

/// `(σ, default k_max)` in physical units.
fn scales(t: &SampledDistribution, cfg: &WfConfig) -> (f64, f64) {
    match t {
        SampledDistribution::Grid1D { dx, .. } => (cfg.sigma_cells * dx, 0.5 * PI / dx),
        SampledDistribution::Grid2D { dt, dx, .. } => {
            let h = dt.max(*dx);
            (cfg.sigma_cells * h, 0.5 * PI / h)
        }
        SampledDistribution::Symbolic(_) => (cfg.symbolic_sigma, 64.0 / cfg.symbolic_sigma),
    }
}

fn localize<'a>(t: &'a SampledDistribution, c: &[f64], cfg: &WfConfig) -> Result<Local<'a>, MicrolocalError> {
    let too_wide = || MicrolocalError::WindowTooWide { centre: c.to_vec() };
    let gauss = |d: f64, s: f64| (-d * d / (2.0 * s * s)).exp();
    match t {
        SampledDistribution::Grid1D { x0, dx, samples } => {
            let s = cfg.sigma_cells * dx;
            let (a, b) = window_range(c[0], *x0, *dx, samples.len(), cfg.truncation * s).ok_or_else(too_wide)?;
            let xs: Vec<f64> = (a..=b).map(|j| x0 + j as f64 * dx).collect();
            let w = xs.iter().zip(&samples[a..=b]).map(|(x, v)| v * gauss(x - c[0], s) * *dx).collect();
            Ok(Local::Grid1 { xs, w })
        }
        SampledDistribution::Grid2D { t0, x0, dt, dx, n_t, n_x, samples } => {
            let (st, sx) = (cfg.sigma_cells * dt, cfg.sigma_cells * dx);
            let (ia, ib) = window_range(c[0], *t0, *dt, *n_t, cfg.truncation * st).ok_or_else(too_wide)?;
            let (ja, jb) = window_range(c[1], *x0, *dx, *n_x, cfg.truncation * sx).ok_or_else(too_wide)?;
            let ts: Vec<f64> = (ia..=ib).map(|i| t0 + i as f64 * dt).collect();
            let xs: Vec<f64> = (ja..=jb).map(|j| x0 + j as f64 * dx).collect();
            let mut w = Vec::with_capacity(ts.len() * xs.len());
            for (i, t) in (ia..=ib).zip(&ts) {
                let gt = gauss(t - c[0], st);
                for (j, x) in (ja..=jb).zip(&xs) {
                    let r = ((t - c[0]) / st).powi(2) + ((x - c[1]) / sx).powi(2);
                    let v = if r <= cfg.truncation * cfg.truncation { gt * gauss(x - c[1], sx) } else { 0.0 };
                    w.push(samples[i * n_x + j] * v * (dt * dx));
                }
            }
            Ok(Local::Grid2 { ts, xs, w })
        }
        SampledDistribution::Symbolic(d) => {
            Ok(Local::Sym { t: d, centre: c[0], sigma: cfg.symbolic_sigma, cut: cfg.truncation })
        }
    }
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Decay exponents of the localized transform along each direction at each centre.
pub fn wf_estimate(t: &SampledDistribution, centres: &[Vec<f64>], cfg: &WfConfig) -> Result<WfEstimate, MicrolocalError> {
    cfg.validate()?;
    t.validate()?;
    let dim = t.dimension();
    if let Some(c) = centres.iter().find(|c| c.len() != dim) {
        return Err(MicrolocalError::InvalidConfig(format!("centre {c:?} is not {dim}-dimensional")));
    }
    let (sigma, kmax_default) = scales(t, cfg);
    let (lo, hi) = (cfg.k_min_factor / sigma, cfg.k_max.unwrap_or(kmax_default));
    if hi <= lo {
        return Err(MicrolocalError::InvalidConfig(format!("empty k range [{lo}, {hi}]")));
    }
    let radii = geometric(lo, hi, cfg.n_radii);
    let dirs = directions(dim, cfg.n_rays);
    let per_centre = centres
        .par_iter()
        .map(|c| {
            let local = localize(t, c, cfg)?;
            let mut amps = Vec::with_capacity(dirs.len());
            for d in &dirs {
                let row = radii
                    .iter()
                    .map(|r| Ok(local.eval(&d.iter().map(|v| v * r).collect::<Vec<_>>())?.norm()))
                    .collect::<Result<Vec<f64>, MicrolocalError>>()?;
                amps.push(row);
            }
            Ok(classify(c, &dirs, amps, &radii, cfg))
        })
        .collect::<Result<Vec<_>, MicrolocalError>>()?;
    let mut entries: Vec<WfEntry> = per_centre.into_iter().flatten().collect();
    sort_entries(&mut entries);
    Ok(WfEstimate { entries, threshold: cfg.threshold, radii, zero_hits: Vec::new() })
}

fn classify(c: &[f64], dirs: &[Vec<f64>], amps: Vec<Vec<f64>>, radii: &[f64], cfg: &WfConfig) -> Vec<WfEntry> {
    let peak = amps.iter().flatten().fold(0.0, |m: f64, v| m.max(*v));
    let floor = cfg.floor * peak;
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    dirs.iter()
        .zip(amps)
        .map(|(d, a)| {
            let last = *a.last().expect("at least two radii");
            let exponent = if peak == 0.0 || last <= floor {
                f64::INFINITY
            } else {
                let ly: Vec<f64> = a.iter().map(|v| v.max(floor).ln()).collect();
                -slope(&lr, &ly)
            };
            WfEntry {
                base: c.to_vec(),
                direction: d.clone(),
                exponent,
                singular: exponent < cfg.threshold,
                amplitudes: a,
            }
        })
        .collect()
}

/// Estimates for `t_ε` at two regulators, with exponents extrapolated linearly to `ε = 0`.
pub fn wf_estimate_extrapolated(
    family: impl Fn(f64) -> Result<SampledDistribution, MicrolocalError>,
    eps: (f64, f64),
    centres: &[Vec<f64>],
    cfg: &WfConfig,
) -> Result<WfEstimate, MicrolocalError> {
    let (e1, e2) = if eps.0 > eps.1 { eps } else { (eps.1, eps.0) };
    if !(e2 > 0.0 && e1 > e2) {
        return Err(MicrolocalError::InvalidConfig(format!("regulators {eps:?} must be distinct and positive")));
    }
    let coarse = wf_estimate(&family(e1)?, centres, cfg)?;
    let mut fine = wf_estimate(&family(e2)?, centres, cfg)?;
    for (f, c) in fine.entries.iter_mut().zip(&coarse.entries) {
        let (p1, p2) = (c.exponent, f.exponent);
        if p1.is_finite() && p2.is_finite() {
            f.exponent = p2 - e2 * (p1 - p2) / (e1 - e2);
        }
        f.singular = f.exponent < cfg.threshold;
    }
    Ok(fine)
}
