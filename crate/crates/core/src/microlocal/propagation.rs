//! Singularities of the lattice commutator function travel along light rays.

use super::wavefront::{wf_estimate, SampledDistribution, WfConfig, WfEntry, WfEstimate};
use super::MicrolocalError;
use crate::lattice::PropagatorSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// `(t, x)` site of `y₀`; the lattice centre when unset.
    pub source: Option<(usize, usize)>,
    /// Spacing of window centres in lattice cells.
    pub centre_stride: usize,
    pub wf: WfConfig,
    /// Half-width of the angular window around null covectors, in degrees.
    pub cone_window_deg: f64,
    pub min_fraction: f64,
    /// Site inside the future cone of `y₀`, away from its boundary; chosen automatically when unset.
    pub off_cone_probe: Option<(usize, usize)>,
    /// Window width at the off-cone probe, in cells.
    pub probe_sigma_cells: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            source: None,
            centre_stride: 4,
            wf: WfConfig::default(),
            cone_window_deg: 15.0,
            min_fraction: 0.9,
            off_cone_probe: None,
            probe_sigma_cells: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffConeProbe {
    pub site: (usize, usize),
    pub min_exponent: f64,
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationReport {
    pub source: (usize, usize),
    pub centres: usize,
    pub singular_entries: usize,
    pub on_cone_entries: usize,
    pub cone_fraction: f64,
    /// Entries at `y₀` itself.
    pub source_entries: Vec<WfEntry>,
    /// Every null ray at `y₀` is singular.
    pub source_null_singular: bool,
    pub off_cone: OffConeProbe,
    pub estimate: WfEstimate,
    pub passed: bool,
}

/// Angle in degrees between `d` and the nearest null covector.
pub fn null_angle_deg(d: &[f64]) -> f64 {
    let th = d[1].atan2(d[0]);
    let off = (th - FRAC_PI_4).rem_euclid(2.0 * FRAC_PI_4);
    off.min(2.0 * FRAC_PI_4 - off).to_degrees()
}

fn causal_grid(ps: &PropagatorSet, src: (usize, usize)) -> Result<SampledDistribution, MicrolocalError> {
    let lat = ps.lattice();
    let y = lat.site(src.0, src.1);
    let samples = (0..lat.n_sites()).map(|s| Complex64::new(ps.causal(s, y), 0.0)).collect();
    SampledDistribution::grid_2d((0.0, 0.0), (lat.a_t, lat.a_x), (lat.n_t, lat.n_x), samples)
}

/// Wavefront estimate of `Δ(·, y₀)` and its angular concentration on the light cone.
pub fn propagation_check(ps: &PropagatorSet, cfg: &PropagationConfig) -> Result<PropagationReport, MicrolocalError> {
    let lat = ps.lattice();
    let src = cfg.source.unwrap_or((lat.n_t / 2, lat.n_x / 2));
    if src.0 >= lat.n_t || src.1 >= lat.n_x {
        return Err(MicrolocalError::InvalidConfig(format!("source {src:?} is off the lattice")));
    }
    let grid = causal_grid(ps, src)?;
    let margin = (cfg.wf.truncation * cfg.wf.sigma_cells).ceil() as usize;
    let stride = cfg.centre_stride.max(1);
    let axis = |n: usize, s: usize| -> Vec<usize> {
        if n < 2 * margin + 1 {
            return Vec::new();
        }
        let (lo, hi) = (margin, n - 1 - margin);
        let first = lo + (s + stride - lo % stride) % stride;
        let mut v: Vec<usize> = (first..=hi).step_by(stride).collect();
        if (lo..=hi).contains(&s) && !v.contains(&s) {
            v.push(s);
            v.sort_unstable();
        }
        v
    };
    let (ts, xs) = (axis(lat.n_t, src.0), axis(lat.n_x, src.1));
    if ts.is_empty() || xs.is_empty() {
        return Err(MicrolocalError::WindowTooWide { centre: vec![src.0 as f64 * lat.a_t, src.1 as f64 * lat.a_x] });
    }
    let centres: Vec<Vec<f64>> =
        ts.iter().flat_map(|&i| xs.iter().map(move |&j| vec![i as f64 * lat.a_t, j as f64 * lat.a_x])).collect();
    let estimate = wf_estimate(&grid, &centres, &cfg.wf)?;

    let singular: Vec<&WfEntry> = estimate.singular().collect();
    let on_cone = singular.iter().filter(|e| null_angle_deg(&e.direction) <= cfg.cone_window_deg).count();
    let cone_fraction = if singular.is_empty() { 0.0 } else { on_cone as f64 / singular.len() as f64 };

    let y0 = vec![src.0 as f64 * lat.a_t, src.1 as f64 * lat.a_x];
    let source_entries: Vec<WfEntry> =
        estimate.entries.iter().filter(|e| e.base == y0).cloned().collect();
    let null_at_source: Vec<&WfEntry> =
        source_entries.iter().filter(|e| null_angle_deg(&e.direction) < 1e-6).collect();
    let source_null_singular = !null_at_source.is_empty() && null_at_source.iter().all(|e| e.singular);

    let probe_site = cfg.off_cone_probe.unwrap_or((src.0 + lat.n_t * 5 / 16, src.1));
    let probe_cfg = WfConfig { sigma_cells: cfg.probe_sigma_cells, ..cfg.wf.clone() };
    let probe_centre = vec![probe_site.0 as f64 * lat.a_t, probe_site.1 as f64 * lat.a_x];
    let probe = wf_estimate(&grid, &[probe_centre], &probe_cfg)?;
    let min_exponent = probe.entries.iter().map(|e| e.exponent).fold(f64::INFINITY, f64::min);
    let off_cone = OffConeProbe { site: probe_site, min_exponent, regular: probe.is_empty() };

    let passed = !singular.is_empty() && cone_fraction >= cfg.min_fraction && source_null_singular && off_cone.regular;
    Ok(PropagationReport {
        source: src,
        centres: centres.len(),
        singular_entries: singular.len(),
        on_cone_entries: on_cone,
        cone_fraction,
        source_entries,
        source_null_singular,
        off_cone,
        estimate,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_angles() {
        assert!(null_angle_deg(&[1.0, 1.0]) < 1e-12);
        assert!(null_angle_deg(&[-1.0, 1.0]) < 1e-12);
        assert!((null_angle_deg(&[1.0, 0.0]) - 45.0).abs() < 1e-12);
        assert!((null_angle_deg(&[0.0, -1.0]) - 45.0).abs() < 1e-12);
    }
}
