//! Uncentered Hardy–Littlewood, dyadic and local maximal operators.
//!
//! All three are exact maxima over canonical families. For the ball
//! operators every center contributes one running-sum pass over its
//! distance-sorted neighbors: level averages are formed incrementally, a
//! suffix maximum over levels gives the best ball containing each point, and
//! the result is folded into the output with `max`, which is exact and
//! independent of evaluation order.

use crate::error::{invalid, Result};
use crate::space::{Ball, Cube, DyadicGrid, LocalBasis, QuasiMetricSpace};

/// `Mf(x) = max_{B ∋ x} ⨍_B |f|` over all canonical balls.
pub fn hl_maximal(space: &QuasiMetricSpace, f: &[f64]) -> Result<Vec<f64>> {
    space.check_len(f)?;
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; space.n()];
    let mut scratch = Vec::new();
    hl_maximal_into(space, &fa, &mut out, &mut scratch);
    Ok(out)
}

/// Core of [`hl_maximal`] for nonnegative `f`; `out` must be zeroed.
pub(crate) fn hl_maximal_into(space: &QuasiMetricSpace, f: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    for c in 0..space.n() {
        let top = space.hood(c).levels() - 1;
        fold_center(space, c, top, f, out, scratch);
    }
}

/// Folds the balls of levels `0..=kmax` at `center` into `out`.
#[inline]
fn fold_center(
    space: &QuasiMetricSpace,
    center: usize,
    kmax: usize,
    f: &[f64],
    out: &mut [f64],
    avgs: &mut Vec<f64>,
) {
    let h = space.hood(center);
    let measure = space.measure();
    avgs.clear();
    let (mut s, mut m) = (0.0, 0.0);
    let mut pos = 0usize;
    for &end in &h.ends[..=kmax] {
        while pos < end as usize {
            let y = h.order[pos] as usize;
            s += f[y] * measure[y];
            m += measure[y];
            pos += 1;
        }
        avgs.push(s / m);
    }
    let mut best = 0.0f64;
    for k in (0..=kmax).rev() {
        best = best.max(avgs[k]);
        let start = if k == 0 { 0 } else { h.ends[k - 1] as usize };
        for &y in &h.order[start..h.ends[k] as usize] {
            let slot = &mut out[y as usize];
            if best > *slot {
                *slot = best;
            }
        }
    }
}

/// `M_𝓑 f(x)`: maximum of `⨍_B |f|` over basis balls `B ∋ x`, and `0` at
/// points covered by no basis ball.
pub fn local_maximal(space: &QuasiMetricSpace, basis: &LocalBasis, f: &[f64]) -> Result<Vec<f64>> {
    space.check_len(f)?;
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; space.n()];
    let mut scratch = Vec::new();
    local_maximal_into(space, basis, &fa, &mut out, &mut scratch);
    Ok(out)
}

pub(crate) fn local_maximal_into(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    f: &[f64],
    out: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    for &c in space.members(basis.base()) {
        let c = c as usize;
        if let Some(kmax) = basis.max_level(space, c) {
            fold_center(space, c, kmax, f, out, scratch);
        }
    }
}

/// Dyadic maximal function relative to `q0`, returned on the finest cells
/// in row-major order; cells outside `q0` carry `0`.
pub fn dyadic_maximal(grid: &DyadicGrid, f: &[f64], q0: &Cube) -> Result<Vec<f64>> {
    grid.check_len(f)?;
    grid.check_cube(q0)?;
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let fm = grid.to_morton(&fa);
    let sums = grid.weighted_sums(&fm);
    let leaves = dyadic_maximal_leaves(grid, &sums, q0);
    let mut out = vec![0.0; grid.cells()];
    for (m, v) in grid.leaf_range(q0).zip(leaves) {
        out[grid.morton_to_cell(m)] = v;
    }
    Ok(out)
}

/// Dyadic maximal values on the Morton-ordered leaves of `q0`, from
/// precomputed per-level sums of `f·μ`.
pub(crate) fn dyadic_maximal_leaves(grid: &DyadicGrid, sums: &[Vec<f64>], q0: &Cube) -> Vec<f64> {
    let d = grid.dim();
    let mut current = vec![sums[q0.level as usize][q0.index as usize] / grid.cube_measure(q0)];
    for level in (q0.level + 1)..=grid.depth() {
        let shift = d * (level - q0.level);
        let start = (q0.index as usize) << shift;
        let count = 1usize << shift;
        let lm = grid.level_measures(level);
        let ls = &sums[level as usize];
        let next: Vec<f64> = (0..count)
            .map(|i| {
                let q = start + i;
                (ls[q] / lm[q]).max(current[i >> d])
            })
            .collect();
        current = next;
    }
    current
}

/// Outcome of checking the radius bounds satisfied by basis balls whose
/// average exceeds `λ`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RadiusBound {
    pub holds: bool,
    /// No basis ball qualified, or the bound is inapplicable (`D_μ = 0`).
    pub vacuous: bool,
    /// Number of (center, member set) classes with average `> λ`.
    pub qualifying: usize,
    /// Ball with the largest `r(B) / bound`, evaluated at the largest radius
    /// realising its member set inside the basis.
    pub binding: Option<BindingBall>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BindingBall {
    pub ball: Ball,
    pub average: f64,
    pub bound: f64,
}

/// Checks `r(B) ≤ 2κ²(1+δ)(f_{B̂₀}/λ)^{1/D_μ} r(B₀)` for every basis ball
/// with `f_B > λ`, and, when `n_scale = Some(N)` and
/// `λ ≥ (2κ²(1+δ)N/δ)^{D_μ} f_{B̂₀}`, also `r(B) ≤ (δ/N) r(B₀)`.
pub fn radius_bound_check(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    f: &[f64],
    lambda: f64,
    n_scale: Option<f64>,
) -> Result<RadiusBound> {
    space.check_len(f)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid("lambda", format!("{lambda} must be positive")));
    }
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let d_mu = space.d_mu();
    if d_mu == 0.0 {
        return Ok(RadiusBound {
            holds: true,
            vacuous: true,
            qualifying: 0,
            binding: None,
        });
    }
    let hat_avg = space.set_average(&fa, space.members(basis.hat()));
    if hat_avg == 0.0 {
        return Err(invalid("f", "f vanishes identically on the enclosing ball"));
    }
    let kappa = space.kappa();
    let delta = basis.delta();
    let r0 = basis.base().radius;
    let radius_bound = 2.0 * kappa * kappa * (1.0 + delta) * (hat_avg / lambda).powf(1.0 / d_mu) * r0;
    let scale_bound = n_scale.and_then(|n| {
        let gamma = (2.0 * kappa * kappa * (1.0 + delta) * n / delta).powf(d_mu);
        (lambda >= gamma * hat_avg).then_some(delta / n * r0)
    });
    let bound = scale_bound.map_or(radius_bound, |s| s.min(radius_bound));

    let mut qualifying = 0;
    let mut binding: Option<(f64, BindingBall)> = None;
    let mut avgs = Vec::new();
    for &c in space.members(basis.base()) {
        let c = c as usize;
        let Some(kmax) = basis.max_level(space, c) else { continue };
        let h = space.hood(c);
        h.level_averages(&fa, space.measure(), &mut avgs);
        for (k, &avg) in avgs.iter().enumerate().take(kmax + 1) {
            if avg <= lambda {
                continue;
            }
            qualifying += 1;
            let sup_radius = h.radii.get(k + 1).copied().unwrap_or(f64::INFINITY).min(basis.radius_cap());
            let ratio = sup_radius / bound;
            if binding.as_ref().is_none_or(|(r, _)| ratio > *r) {
                binding = Some((
                    ratio,
                    BindingBall {
                        ball: Ball {
                            center: c,
                            radius: sup_radius,
                        },
                        average: avg,
                        bound,
                    },
                ));
            }
        }
    }
    Ok(RadiusBound {
        holds: binding.as_ref().is_none_or(|(r, _)| *r <= 1.0),
        vacuous: qualifying == 0,
        qualifying,
        binding: binding.map(|(_, b)| b),
    })
}
