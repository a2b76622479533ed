//! Run configuration shared by the command-line front-end and the acceptance suite.
//!
//! The file format is sectioned `key = value` text (TOML). Every key is optional;
//! missing keys take the defaults listed below, unknown keys are rejected.
//!
//! ```text
//! seed = 20240            # seed for randomized property checks
//! out_dir = "out"         # artifact directory
//! trials = 20             # random inputs per property check
//! enforce_budgets = true  # fail acceptance criteria that exceed their time budget
//!
//! [lattice]               # canonical-commutator, propagator and Green-function checks
//! n_t = 24
//! n_x = 24
//! a_t = 0.5
//! a_x = 1.0
//! mass = 1.0
//!
//! [expansion_lattice]     # ħ/λ expansions, graph sums, Bogoliubov map
//! n_t = 10
//! n_x = 6
//! a_t = 0.5
//! a_x = 1.0
//! mass = 1.0
//!
//! [truncation]
//! hbar = 2
//! lambda = 2
//!
//! [tolerance]
//! jacobi = 1e-9
//! gns = 1e-10
//! green = 1e-10
//! flow_drift = 1e-8
//! extension = 1e-9
//! ambiguity = 1e-8
//! subtraction = 1e-8
//! scaling_degree = 0.05
//! weyl = 1e-9
//!
//! [microlocal]            # lattice for the propagation-of-singularities check
//! n_t = 128
//! n_x = 128
//! a_t = 0.09
//! a_x = 0.1
//! mass = 1.0
//! cone_window_deg = 15.0
//! min_fraction = 0.9
//! centre_stride = 4
//! expression = "xpi0(-1)" # input of the `wf` subcommand
//! centres = [-0.5, 0.0, 0.5]
//! [microlocal.wf]         # wavefront estimator; see `WfConfig`
//! threshold = 4.0
//!
//! [flow]                  # σ = e^{−2A sin(q·x)}(k_t² − k_x²)
//! amplitude = 0.3
//! wave = [1.0, 0.5]
//! x0 = [0.0, 0.0]
//! k0 = [1.0, 0.6]
//! steps = 2000
//! dt = 0.005
//!
//! [weyl]
//! hbar = 1.0
//! grid_x0 = -8.0
//! grid_h = 0.0625
//! grid_n = 256
//! first = [0.25, 1.5]     # (α, β)
//! second = [-0.5, 0.75]   # (α′, β′)
//! interpolate = false
//!
//! [eg]
//! expression = "xpi0(-1)"   # `extend`: this distribution raised to `power` away from the origin
//! power = 2
//! family = "xplus(-1+z)"     # `ms`: a family in the regulator z
//!
//! [gns]
//! state_file = "data/m2_mixed.alg"   # optional; the built-in examples are used when absent
//! ```

use crate::eg_renorm::parse_distribution;
use crate::lattice::Lattice1p1;
use crate::microlocal::WfConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("invalid value for {key}: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid<T>(key: &str, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid { key: key.into(), msg: msg.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_t: usize,
    pub n_x: usize,
    pub a_t: f64,
    pub a_x: f64,
    pub mass: f64,
}

impl LatticeConfig {
    pub fn build(&self) -> Result<Lattice1p1, crate::lattice::LatticeError> {
        Lattice1p1::new(self.n_t, self.n_x, self.a_t, self.a_x, self.mass)
    }
}

fn main_lattice() -> LatticeConfig {
    LatticeConfig { n_t: 24, n_x: 24, a_t: 0.5, a_x: 1.0, mass: 1.0 }
}

fn expansion_lattice() -> LatticeConfig {
    LatticeConfig { n_t: 10, n_x: 6, a_t: 0.5, a_x: 1.0, mass: 1.0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub hbar: u32,
    pub lambda: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { hbar: 2, lambda: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub jacobi: f64,
    pub gns: f64,
    pub green: f64,
    pub flow_drift: f64,
    /// Agreement of two extensions on probes vanishing to the projection order.
    pub extension: f64,
    pub ambiguity: f64,
    pub subtraction: f64,
    pub scaling_degree: f64,
    /// Weyl relations on the position grid.
    pub weyl: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jacobi: 1e-9,
            gns: 1e-10,
            green: 1e-10,
            flow_drift: 1e-8,
            extension: 1e-9,
            ambiguity: 1e-8,
            subtraction: 1e-8,
            scaling_degree: 0.05,
            weyl: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrolocalConfig {
    pub n_t: usize,
    pub n_x: usize,
    pub a_t: f64,
    pub a_x: f64,
    pub mass: f64,
    pub cone_window_deg: f64,
    pub min_fraction: f64,
    pub centre_stride: usize,
    pub expression: String,
    pub centres: Vec<f64>,
    pub wf: WfConfig,
}

impl Default for MicrolocalConfig {
    fn default() -> Self {
        Self {
            n_t: 128,
            n_x: 128,
            a_t: 0.09,
            a_x: 0.1,
            mass: 1.0,
            cone_window_deg: 15.0,
            min_fraction: 0.9,
            centre_stride: 4,
            expression: "xpi0(-1)".into(),
            centres: vec![-0.5, 0.0, 0.5],
            wf: WfConfig::default(),
        }
    }
}

impl MicrolocalConfig {
    pub fn lattice(&self) -> LatticeConfig {
        LatticeConfig { n_t: self.n_t, n_x: self.n_x, a_t: self.a_t, a_x: self.a_x, mass: self.mass }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub amplitude: f64,
    pub wave: [f64; 2],
    pub x0: [f64; 2],
    pub k0: [f64; 2],
    pub steps: usize,
    pub dt: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { amplitude: 0.3, wave: [1.0, 0.5], x0: [0.0, 0.0], k0: [1.0, 0.6], steps: 2000, dt: 0.005 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylConfig {
    pub hbar: f64,
    pub grid_x0: f64,
    pub grid_h: f64,
    pub grid_n: usize,
    pub first: [f64; 2],
    pub second: [f64; 2],
    pub interpolate: bool,
}

impl Default for WeylConfig {
    fn default() -> Self {
        Self { hbar: 1.0, grid_x0: -8.0, grid_h: 0.0625, grid_n: 256, first: [0.25, 1.5], second: [-0.5, 0.75], interpolate: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgConfig {
    pub expression: String,
    pub power: usize,
    pub family: String,
}

impl Default for EgConfig {
    fn default() -> Self {
        Self { expression: "xpi0(-1)".into(), power: 2, family: "xplus(-1+z)".into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnsConfig {
    pub state_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub trials: usize,
    pub enforce_budgets: bool,
    pub lattice: LatticeConfig,
    pub expansion_lattice: LatticeConfig,
    pub truncation: Truncation,
    pub tolerance: Tolerances,
    pub microlocal: MicrolocalConfig,
    pub flow: FlowConfig,
    pub weyl: WeylConfig,
    pub eg: EgConfig,
    pub gns: GnsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20240,
            out_dir: PathBuf::from("out"),
            trials: 20,
            enforce_budgets: true,
            lattice: main_lattice(),
            expansion_lattice: expansion_lattice(),
            truncation: Truncation::default(),
            tolerance: Tolerances::default(),
            microlocal: MicrolocalConfig::default(),
            flow: FlowConfig::default(),
            weyl: WeylConfig::default(),
            eg: EgConfig::default(),
            gns: GnsConfig::default(),
        }
    }
}

pub const MAX_CONFIG_LEN: usize = 64 * 1024;
pub const MAX_TRUNCATION: u32 = 4;
pub const MAX_TRIALS: usize = 1000;

impl RunConfig {
    /// Parses and validates config text.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        if text.len() > MAX_CONFIG_LEN {
            return Err(ConfigError::Syntax(format!("longer than {MAX_CONFIG_LEN} bytes")));
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 || self.trials > MAX_TRIALS {
            return invalid("trials", format!("must lie in 1..={MAX_TRIALS}"));
        }
        for (key, lat) in [("lattice", &self.lattice), ("expansion_lattice", &self.expansion_lattice), ("microlocal", &self.microlocal.lattice())] {
            if let Err(e) = lat.build() {
                return invalid(key, e.to_string());
            }
        }
        for (key, m) in [("lattice.mass", self.lattice.mass), ("expansion_lattice.mass", self.expansion_lattice.mass)] {
            if m <= 0.0 {
                return invalid(key, "the Hadamard part needs a positive mass");
            }
        }
        if self.truncation.hbar > MAX_TRUNCATION || self.truncation.lambda > MAX_TRUNCATION {
            return invalid("truncation", format!("orders above {MAX_TRUNCATION} are not supported"));
        }
        let t = &self.tolerance;
        for (key, v) in [
            ("tolerance.jacobi", t.jacobi),
            ("tolerance.gns", t.gns),
            ("tolerance.green", t.green),
            ("tolerance.flow_drift", t.flow_drift),
            ("tolerance.extension", t.extension),
            ("tolerance.ambiguity", t.ambiguity),
            ("tolerance.subtraction", t.subtraction),
            ("tolerance.scaling_degree", t.scaling_degree),
            ("tolerance.weyl", t.weyl),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(key, "must be positive and finite");
            }
        }
        let m = &self.microlocal;
        if !(m.cone_window_deg > 0.0 && m.cone_window_deg < 45.0) {
            return invalid("microlocal.cone_window_deg", "must lie in (0, 45)");
        }
        if !(m.min_fraction > 0.0 && m.min_fraction <= 1.0) {
            return invalid("microlocal.min_fraction", "must lie in (0, 1]");
        }
        if m.centre_stride == 0 {
            return invalid("microlocal.centre_stride", "must be positive");
        }
        if let Err(e) = m.wf.validate() {
            return invalid("microlocal.wf", e.to_string());
        }
        if m.centres.is_empty() || m.centres.iter().any(|c| !c.is_finite()) {
            return invalid("microlocal.centres", "need at least one finite centre");
        }
        if let Err(e) = parse_distribution(&m.expression) {
            return invalid("microlocal.expression", e.to_string());
        }
        let f = &self.flow;
        if !(f.dt.is_finite() && f.dt > 0.0) || f.steps == 0 || f.steps > 10_000_000 {
            return invalid("flow", "need dt > 0 and 1 ≤ steps ≤ 10⁷");
        }
        if [f.amplitude, f.wave[0], f.wave[1], f.x0[0], f.x0[1], f.k0[0], f.k0[1]].iter().any(|v| !v.is_finite()) {
            return invalid("flow", "non-finite parameter");
        }
        let w = &self.weyl;
        if !(w.hbar.is_finite() && w.hbar > 0.0 && w.grid_h.is_finite() && w.grid_h > 0.0 && w.grid_x0.is_finite()) {
            return invalid("weyl", "need finite grid_x0 and positive hbar, grid_h");
        }
        if w.grid_n < 8 || w.grid_n > 1 << 20 {
            return invalid("weyl.grid_n", "must lie in 8..=2^20");
        }
        if w.first.iter().chain(&w.second).any(|v| !v.is_finite()) {
            return invalid("weyl", "non-finite shift");
        }
        if !(1..=4).contains(&self.eg.power) {
            return invalid("eg.power", "must lie in 1..=4");
        }
        if let Err(e) = parse_distribution(&self.eg.expression) {
            return invalid("eg.expression", e.to_string());
        }
        match parse_distribution(&self.eg.family) {
            Ok(d) if d.is_family() => {}
            Ok(_) => return invalid("eg.family", "does not depend on the regulator z"),
            Err(e) => return invalid("eg.family", e.to_string()),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::from_text("").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = RunConfig::from_text("seed = 7\n[lattice]\nn_t = 12\nn_x = 8\na_t = 0.5\na_x = 1.0\nmass = 2.0\n[microlocal.wf]\nthreshold = 3.5\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.lattice.n_t, 12);
        assert_eq!(cfg.microlocal.wf.threshold, 3.5);
        assert_eq!(cfg.microlocal.n_t, 128);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "trials = 0",
            "bogus = 1",
            "[lattice]\nn_t = 24\nn_x = 24\na_t = 1.5\na_x = 1.0\nmass = 1.0",
            "[truncation]\nhbar = 9",
            "[tolerance]\njacobi = -1.0",
            "[eg]\nfamily = \"xplus(-1)\"",
            "[microlocal]\nexpression = \"foo(1)\"",
            "seed = ",
        ] {
            assert!(RunConfig::from_text(text).is_err(), "{text}");
        }
    }

    #[test]
    fn text_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }
}
