//! Cone arithmetic: Whitney sums, product legality and the microcausal condition.

use super::wavefront::{same_point, sort_entries, WfEntry, WfEstimate, ZeroHit};
use serde::{Deserialize, Serialize};

const ZERO_TOL: f64 = 1e-9;

/// `{(x, k + k′)}` over singular entries at matching base points.
pub fn whitney_sum(a: &WfEstimate, b: &WfEstimate) -> WfEstimate {
    let mut entries: Vec<WfEntry> = Vec::new();
    let mut zero_hits = Vec::new();
    for ea in a.singular() {
        for eb in b.singular().filter(|eb| same_point(&ea.base, &eb.base)) {
            if ea.direction.len() != eb.direction.len() {
                continue;
            }
            let s: Vec<f64> = ea.direction.iter().zip(&eb.direction).map(|(x, y)| x + y).collect();
            let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n < ZERO_TOL {
                zero_hits.push(ZeroHit { base: ea.base.clone(), k: ea.direction.clone(), k_prime: eb.direction.clone() });
                continue;
            }
            let direction: Vec<f64> = s.iter().map(|v| v / n).collect();
            let exponent = ea.exponent.min(eb.exponent);
            if let Some(e) =
                entries.iter_mut().find(|e| same_point(&e.base, &ea.base) && same_point(&e.direction, &direction))
            {
                e.exponent = e.exponent.min(exponent);
                continue;
            }
            entries.push(WfEntry { base: ea.base.clone(), direction, exponent, singular: true, amplitudes: Vec::new() });
        }
    }
    sort_entries(&mut entries);
    WfEstimate { entries, threshold: a.threshold.min(b.threshold), radii: Vec::new(), zero_hits }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub compatible: bool,
    pub witness: Vec<ZeroHit>,
}

/// The product `AB` is defined when the Whitney sum avoids the zero section.
pub fn product_compatible(a: &WfEstimate, b: &WfEstimate) -> Compatibility {
    let witness = whitney_sum(a, b).zero_hits;
    Compatibility { compatible: witness.is_empty(), witness }
}

/// Position of a covector relative to the closed light cones, signature `(+, −)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeClass {
    Zero,
    Future,
    Past,
    Spacelike,
}

impl ConeClass {
    /// `k = (k_t, k_x)`; boundary covectors belong to the closed cones.
    pub fn of(k: [f64; 2]) -> Self {
        let scale = k[0].abs().max(k[1].abs());
        if scale == 0.0 {
            return Self::Zero;
        }
        if k[0].abs() + ZERO_TOL * scale >= k[1].abs() {
            if k[0] > 0.0 {
                Self::Future
            } else {
                Self::Past
            }
        } else {
            Self::Spacelike
        }
    }

    fn in_closed_future(self) -> bool {
        matches!(self, Self::Zero | Self::Future)
    }

    fn in_closed_past(self) -> bool {
        matches!(self, Self::Zero | Self::Past)
    }
}

/// True iff no tuple lies in `V̄₊ⁿ ∪ V̄₋ⁿ` (the all-zero tuple is never part of a wavefront set).
pub fn microcausal_check(tuples: &[Vec<ConeClass>]) -> bool {
    !tuples.iter().any(|t| {
        let nonzero = t.iter().any(|c| *c != ConeClass::Zero);
        nonzero && (t.iter().all(|c| c.in_closed_future()) || t.iter().all(|c| c.in_closed_past()))
    })
}

/// Classifies every covector of every tuple.
pub fn cone_pattern(tuples: &[Vec<[f64; 2]>]) -> Vec<Vec<ConeClass>> {
    tuples.iter().map(|t| t.iter().map(|k| ConeClass::of(*k)).collect()).collect()
}
