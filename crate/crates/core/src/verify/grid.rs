//! Reverse Hölder checks on dyadic grids.

use super::CheckResult;
use crate::constants::{dyadic_rhi_epsilon, sharp_rhi_epsilon, Weight};
use crate::error::{invalid, Error, Result};
use crate::maximal::dyadic_maximal_leaves;
use crate::space::{Cube, DyadicGrid};

fn check_inputs(grid: &DyadicGrid, w: &Weight, q0: &Cube) -> Result<()> {
    grid.check_cube(q0)?;
    if w.len() != grid.cells() {
        return Err(invalid("w", format!("weight has {} values for {} cells", w.len(), grid.cells())));
    }
    Ok(())
}

fn check_eps(eps: f64, max: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= max) {
        return Err(Error::EpsilonOutOfRange { eps, max });
    }
    Ok(())
}

/// `⨍_{Q0} (M^d_{Q0} w)^{1+ε}` and `⨍_{Q0} w`, reused by the probes.
pub(crate) struct DyadicProfile {
    /// `M^d w / ⨍_{Q0} w` on the leaves of `Q0`.
    pub ratio: Vec<f64>,
    /// `w / ⨍_{Q0} w` on the leaves of `Q0`.
    pub w_ratio: Vec<f64>,
    /// Leaf measures normalised by `μ(Q0)`.
    pub mass: Vec<f64>,
    pub avg: f64,
}

impl DyadicProfile {
    pub fn new(grid: &DyadicGrid, w: &Weight, q0: &Cube) -> Self {
        let wm = grid.to_morton(w.values());
        let sums = grid.weighted_sums(&wm);
        let mq = grid.cube_measure(q0);
        let avg = sums[q0.level as usize][q0.index as usize] / mq;
        let leaves = dyadic_maximal_leaves(grid, &sums, q0);
        let range = grid.leaf_range(q0);
        let mass = range.clone().map(|m| grid.cell_measure()[grid.morton_to_cell(m)] / mq).collect();
        Self {
            ratio: leaves.iter().map(|v| v / avg).collect(),
            w_ratio: wm[range].iter().map(|v| v / avg).collect(),
            mass,
            avg,
        }
    }

    /// `⨍ (M^d w / ⨍w)^{1+ε}`.
    pub fn maximal_moment(&self, eps: f64) -> f64 {
        self.ratio.iter().zip(&self.mass).map(|(r, m)| r.powf(1.0 + eps) * m).sum()
    }

    /// `⨍ (w / ⨍w)^{1+ε}`.
    pub fn weight_moment(&self, eps: f64) -> f64 {
        self.w_ratio.iter().zip(&self.mass).map(|(r, m)| r.powf(1.0 + eps) * m).sum()
    }
}

/// `⨍_{Q0}(M^d w)^{1+ε} ≤ 2[w]_{A_∞}(⨍_{Q0} w)^{1+ε}` for
/// `0 < ε ≤ 1/(2ρ[w]_{A_∞})`, where `ρ` is the grid's dyadic doubling ratio
/// (`2^d` under Lebesgue measure) and `ainf` the dyadic Fujii–Wilson
/// constant of `w` over the subcubes of `Q0`.
pub fn check_rhi_maximal_dyadic(
    grid: &DyadicGrid,
    w: &Weight,
    q0: &Cube,
    eps: f64,
    ainf: f64,
    instance_id: &str,
) -> Result<CheckResult> {
    check_inputs(grid, w, q0)?;
    let rho = grid.dyadic_doubling();
    check_eps(eps, dyadic_rhi_epsilon(rho, ainf))?;
    let prof = DyadicProfile::new(grid, w, q0);
    let scale = prof.avg.powf(1.0 + eps);
    Ok(CheckResult::new(
        "rhi-maximal-dyadic",
        instance_id,
        prof.maximal_moment(eps) * scale,
        2.0 * ainf * scale,
    )
    .param("eps", eps)
    .param("ainf", ainf)
    .param("rho", rho)
    .provenance("2 [w]_Ainf (avg_Q0 w)^(1+eps), eps <= 1/(2 rho [w]_Ainf)"))
}

/// `⨍_{Q0} w^{1+ε} ≤ 2(⨍_{Q0} w)^{1+ε}` for `0 < ε ≤ 1/(2ρ[w]_{A_∞} − 1)`.
pub fn check_sharp_rhi_cubes(
    grid: &DyadicGrid,
    w: &Weight,
    q0: &Cube,
    eps: f64,
    ainf: f64,
    instance_id: &str,
) -> Result<CheckResult> {
    check_inputs(grid, w, q0)?;
    let rho = grid.dyadic_doubling();
    check_eps(eps, sharp_rhi_epsilon(rho, ainf))?;
    let prof = DyadicProfile::new(grid, w, q0);
    let scale = prof.avg.powf(1.0 + eps);
    Ok(CheckResult::new("sharp-rhi-cubes", instance_id, prof.weight_moment(eps) * scale, 2.0 * scale)
        .param("eps", eps)
        .param("ainf", ainf)
        .param("rho", rho)
        .provenance("2 (avg_Q0 w)^(1+eps), eps <= 1/(2 rho [w]_Ainf - 1)"))
}
