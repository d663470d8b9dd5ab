//! Sharpness probes: the empirically largest `ε` for which a reverse Hölder
//! display survives, next to the admissible `ε` of the theory.
//!
//! Every probed display has the form `⨍ φ^{1+ε} ≤ C` with `φ ≥ 0`
//! normalised by the relevant average, and holds at `ε = 0`. The left side is
//! convex in `ε`, so the admissible set is an interval `[0, ε*]` (unbounded
//! when `φ ≤ 1`); `ε*` is bracketed by doubling and refined by bisection.

use serde::Serialize;

use super::grid::DyadicProfile;
use super::passes;
use crate::constants::{dyadic_rhi_epsilon, sharp_rhi_epsilon, tau_local, Weight};
use crate::error::{invalid, Result};
use crate::maximal::local_maximal;
use crate::space::{Cube, DyadicGrid, LocalBasis, QuasiMetricSpace};

/// `ε` values beyond this are reported as unbounded.
const EPS_CEILING: f64 = 1e6;
const BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub name: String,
    pub instance_id: String,
    pub eps_theory: f64,
    /// `None` when the display holds for every `ε` up to the ceiling.
    pub eps_observed: Option<f64>,
    /// Smallest probed `ε` at which the display fails.
    pub eps_violation: Option<f64>,
    /// `eps_observed / eps_theory`.
    pub ratio: Option<f64>,
    /// Whether `eps_observed ≥ eps_theory`.
    pub dominates: bool,
}

/// Largest `ε` in `[0, EPS_CEILING]` with `holds(ε)`, assuming the set of
/// such `ε` is an interval containing `0`. Returns `(largest passing,
/// smallest failing)`, or `None` if no failure was found.
pub fn largest_admissible(start: f64, holds: impl Fn(f64) -> bool) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = if holds(start) {
        let mut lo = start;
        let mut hi = 2.0 * start;
        while holds(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > EPS_CEILING {
                return None;
            }
        }
        (lo, hi)
    } else {
        (0.0, start)
    };
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

fn probe(name: &str, instance_id: &str, eps_theory: f64, holds: impl Fn(f64) -> bool) -> ProbeResult {
    let found = largest_admissible(eps_theory, holds);
    let eps_observed = found.map(|(lo, _)| lo);
    ProbeResult {
        name: name.to_string(),
        instance_id: instance_id.to_string(),
        eps_theory,
        eps_observed,
        eps_violation: found.map(|(_, hi)| hi),
        ratio: eps_observed.map(|e| e / eps_theory),
        dominates: eps_observed.is_none_or(|e| e >= eps_theory),
    }
}

/// Largest `ε` keeping `⨍_{Q0}(M^d w)^{1+ε} ≤ 2[w]_{A_∞}(⨍_{Q0} w)^{1+ε}`.
pub fn probe_dyadic_rhi(grid: &DyadicGrid, w: &Weight, q0: &Cube, ainf: f64, instance_id: &str) -> Result<ProbeResult> {
    check(grid, w, q0)?;
    let prof = DyadicProfile::new(grid, w, q0);
    let theory = dyadic_rhi_epsilon(grid.dyadic_doubling(), ainf);
    Ok(probe("rhi-maximal-dyadic", instance_id, theory, |e| {
        passes(prof.maximal_moment(e), 2.0 * ainf)
    }))
}

/// Largest `ε` keeping `⨍_{Q0} w^{1+ε} ≤ 2(⨍_{Q0} w)^{1+ε}`.
pub fn probe_sharp_rhi(grid: &DyadicGrid, w: &Weight, q0: &Cube, ainf: f64, instance_id: &str) -> Result<ProbeResult> {
    check(grid, w, q0)?;
    let prof = DyadicProfile::new(grid, w, q0);
    let theory = sharp_rhi_epsilon(grid.dyadic_doubling(), ainf);
    Ok(probe("sharp-rhi-cubes", instance_id, theory, |e| passes(prof.weight_moment(e), 2.0)))
}

/// Largest `ε` keeping `⨍_{B̂}(M_𝓑 w)^{1+ε} ≤ 3[w]_{A_∞}(⨍_{B̂} w)^{1+ε}`.
pub fn probe_local_rhi(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    w: &Weight,
    ainf: f64,
    instance_id: &str,
) -> Result<ProbeResult> {
    if w.len() != space.n() {
        return Err(invalid("w", "weight length differs from the space"));
    }
    let hat = space.members(basis.hat());
    let mut local = vec![0.0; space.n()];
    for &y in hat {
        local[y as usize] = w.values()[y as usize];
    }
    let m = local_maximal(space, basis, &local)?;
    let avg = space.set_average(w.values(), hat);
    let measure = space.measure();
    let mass: f64 = hat.iter().map(|&y| measure[y as usize]).sum();
    let terms: Vec<(f64, f64)> = hat
        .iter()
        .map(|&y| (m[y as usize] / avg, measure[y as usize] / mass))
        .collect();
    let theory = 1.0 / (tau_local(space.kappa(), space.d_mu(), basis.delta()) * ainf);
    Ok(probe("rhi-maximal-local", instance_id, theory, |e| {
        let lhs: f64 = terms.iter().map(|(r, p)| r.powf(1.0 + e) * p).sum();
        passes(lhs, 3.0 * ainf)
    }))
}

fn check(grid: &DyadicGrid, w: &Weight, q0: &Cube) -> Result<()> {
    grid.check_cube(q0)?;
    if w.len() != grid.cells() {
        return Err(invalid("w", "weight length differs from the grid"));
    }
    Ok(())
}
