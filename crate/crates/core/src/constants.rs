//! Weight constants: `[w]_{A_p}`, the Fujii–Wilson and exponential `A_∞`
//! constants, the dual weight, and the structural constants of the reverse
//! Hölder family.
//!
//! Every supremum is an exact maximum over a finite family: canonical balls
//! on spaces, dyadic cubes or all discrete axis-parallel cubes on grids.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::maximal::hl_maximal_into;
use crate::space::{Cube, DyadicGrid, QuasiMetricSpace};

/// Largest grid (in cells) for which all-cubes `A_p` and exponential
/// constants are evaluated, per dimension class.
const ALL_CUBES_MAX_CELLS_1D: usize = 1 << 13;
const ALL_CUBES_MAX_CELLS: usize = 1 << 12;
/// Largest grid for the all-cubes Fujii–Wilson constant, which needs the
/// full cube maximal function of `wχ_Q` for every cube `Q`.
const ALL_CUBES_FW_MAX_CELLS_1D: usize = 256;
const ALL_CUBES_FW_MAX_CELLS: usize = 64;

/// A strictly positive, finite weight on the points of a space or the cells
/// of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weight {
    values: Vec<f64>,
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        if values.is_empty() {
            return Err(invalid("weight", "no values"));
        }
        Ok(Self { values })
    }

    pub fn constant(len: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    /// `σ = w^{1−p′}`.
    pub fn dual(&self, p: f64) -> Result<Self> {
        dual_weight(self, p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(invalid("p", format!("{p} is not in (1, ∞)")));
    }
    Ok(())
}

/// Hölder conjugate `p′ = p/(p−1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `σ = w^{1−p′}`; for `p = 2` this is `1/w`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    check_p(p)?;
    let e = 1.0 - conjugate(p);
    let values = if p == 2.0 {
        w.values.iter().map(|v| 1.0 / v).collect()
    } else {
        w.values.iter().map(|v| v.powf(e)).collect()
    };
    Weight::new(values)
}

/// `w^{−1/(p−1)}`, the second factor of the `A_p` product.
fn ap_companion(w: &Weight, p: f64) -> Vec<f64> {
    let e = -1.0 / (p - 1.0);
    if p == 2.0 {
        w.values.iter().map(|v| 1.0 / v).collect()
    } else {
        w.values.iter().map(|v| v.powf(e)).collect()
    }
}

#[inline]
fn ap_term(avg_w: f64, avg_s: f64, p: f64) -> f64 {
    if p == 2.0 {
        avg_w * avg_s
    } else {
        avg_w * avg_s.powf(p - 1.0)
    }
}

/// Cube family on a dyadic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubeFamily {
    /// Dyadic cubes, with the dyadic maximal operator.
    Dyadic,
    /// Every discrete axis-parallel cube of cells, with the full cube
    /// maximal operator.
    AllCubes,
}

impl CubeFamily {
    pub fn label(self) -> &'static str {
        match self {
            CubeFamily::Dyadic => "dyadic",
            CubeFamily::AllCubes => "all-cubes",
        }
    }
}

// ---------------------------------------------------------------------------
// spaces

fn check_space_weight(space: &QuasiMetricSpace, w: &Weight) -> Result<()> {
    if w.len() != space.n() {
        return Err(invalid("w", format!("weight has {} values for {} points", w.len(), space.n())));
    }
    Ok(())
}

/// Running averages of several functions over every level ball at a center.
fn for_each_level(space: &QuasiMetricSpace, fs: &[&[f64]], mut visit: impl FnMut(usize, &[f64])) {
    let measure = space.measure();
    let mut sums = vec![0.0; fs.len()];
    let mut avgs = vec![0.0; fs.len()];
    for c in 0..space.n() {
        let h = space.hood(c);
        sums.iter_mut().for_each(|s| *s = 0.0);
        let mut m = 0.0;
        let mut pos = 0usize;
        for &end in &h.ends {
            while pos < end as usize {
                let y = h.order[pos] as usize;
                for (s, f) in sums.iter_mut().zip(fs) {
                    *s += f[y] * measure[y];
                }
                m += measure[y];
                pos += 1;
            }
            for (a, s) in avgs.iter_mut().zip(&sums) {
                *a = s / m;
            }
            visit(c, &avgs);
        }
    }
}

/// `[w]_{A_p} = max_B (⨍_B w)(⨍_B w^{−1/(p−1)})^{p−1}` over canonical balls.
pub fn ap_constant(space: &QuasiMetricSpace, w: &Weight, p: f64) -> Result<f64> {
    check_p(p)?;
    check_space_weight(space, w)?;
    let s = ap_companion(w, p);
    let mut best = 0.0f64;
    for_each_level(space, &[w.values(), &s], |_, a| best = best.max(ap_term(a[0], a[1], p)));
    Ok(best)
}

/// `[w]^{exp}_{A_∞} = max_B (⨍_B w) exp(⨍_B log w^{−1})` over canonical balls.
pub fn exp_constant(space: &QuasiMetricSpace, w: &Weight) -> Result<f64> {
    check_space_weight(space, w)?;
    let neg_log: Vec<f64> = w.values.iter().map(|v| -v.ln()).collect();
    let mut best = 0.0f64;
    for_each_level(space, &[w.values(), &neg_log], |_, a| best = best.max(a[0] * a[1].exp()));
    Ok(best)
}

/// Distinct member sets of canonical balls, in order of first appearance
/// (center-major, ascending level). Each set is listed in the
/// distance-sorted order of its first center.
pub(crate) fn distinct_balls(space: &QuasiMetricSpace) -> Vec<&[u32]> {
    let words = space.n().div_ceil(64);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    for c in 0..space.n() {
        let h = space.hood(c);
        let mut bits = vec![0u64; words];
        let mut pos = 0usize;
        for k in 0..h.levels() {
            for &y in &h.order[pos..h.ends[k] as usize] {
                bits[y as usize / 64] |= 1 << (y % 64);
            }
            pos = h.ends[k] as usize;
            if seen.insert(bits.clone()) {
                out.push(h.members(k));
            }
        }
    }
    out
}

/// `(1/w(S)) Σ_{x∈S} M(wχ_S)(x) μ(x)` for one member set.
fn fw_ratio(space: &QuasiMetricSpace, w: &[f64], set: &[u32], g: &mut [f64], mg: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
    g.iter_mut().for_each(|v| *v = 0.0);
    mg.iter_mut().for_each(|v| *v = 0.0);
    for &y in set {
        g[y as usize] = w[y as usize];
    }
    hl_maximal_into(space, g, mg, scratch);
    let measure = space.measure();
    let (mut num, mut den) = (0.0, 0.0);
    for &y in set {
        let y = y as usize;
        num += mg[y] * measure[y];
        den += w[y] * measure[y];
    }
    num / den
}

/// Fujii–Wilson `[w]_{A_∞} = max_B (1/w(B)) Σ_B M(wχ_B) μ` over canonical
/// balls, with the uncentered maximal operator of the space.
pub fn fujii_wilson_constant(space: &QuasiMetricSpace, w: &Weight) -> Result<f64> {
    check_space_weight(space, w)?;
    let sets = distinct_balls(space);
    let n = space.n();
    let ratios: Vec<f64> = sets
        .par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], Vec::new()),
            |(g, mg, scratch), set| fw_ratio(space, w.values(), set, g, mg, scratch),
        )
        .collect();
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// grids

fn check_grid_weight(grid: &DyadicGrid, w: &Weight) -> Result<()> {
    if w.len() != grid.cells() {
        return Err(invalid("w", format!("weight has {} values for {} cells", w.len(), grid.cells())));
    }
    Ok(())
}

/// Per-level averages of a row-major function over dyadic cubes.
fn dyadic_averages(grid: &DyadicGrid, f: &[f64]) -> Vec<Vec<f64>> {
    let sums = grid.weighted_sums(&grid.to_morton(f));
    sums.into_iter()
        .enumerate()
        .map(|(level, s)| {
            let m = grid.level_measures(level as u32);
            s.iter().zip(m).map(|(a, b)| a / b).collect()
        })
        .collect()
}

fn check_all_cubes(grid: &DyadicGrid, limit_1d: usize, limit: usize, what: &str) -> Result<()> {
    let limit = if grid.dim() == 1 { limit_1d } else { limit };
    if grid.cells() > limit {
        return Err(Error::Unsupported(format!(
            "{what} over all cubes is limited to {limit} cells in dimension {}; grid has {}",
            grid.dim(),
            grid.cells()
        )));
    }
    Ok(())
}

/// Visits every discrete axis-parallel cube as (origin, side) together with
/// the sums of `fs` over it (row-major inputs).
fn for_each_cube_sums(grid: &DyadicGrid, fs: &[&[f64]], mut visit: impl FnMut(&[usize], usize, &[f64])) {
    let d = grid.dim() as usize;
    let side_len = 1usize << grid.depth();
    let mut sums = vec![0.0; fs.len()];
    if d == 1 {
        for i in 0..side_len {
            sums.iter_mut().for_each(|s| *s = 0.0);
            for j in i..side_len {
                for (s, f) in sums.iter_mut().zip(fs) {
                    *s += f[j];
                }
                visit(&[i], j + 1 - i, &sums);
            }
        }
        return;
    }
    let mut origin = vec![0usize; d];
    for side in 1..=side_len {
        let span = side_len - side + 1;
        let total = span.pow(d as u32);
        for t in 0..total {
            let mut r = t;
            for o in origin.iter_mut() {
                *o = r % span;
                r /= span;
            }
            sums.iter_mut().for_each(|s| *s = 0.0);
            for_cells_in_box(side_len, &origin, &vec![side; d], |cell| {
                for (s, f) in sums.iter_mut().zip(fs) {
                    *s += f[cell];
                }
            });
            visit(&origin, side, &sums);
        }
    }
}

/// Row-major cells of the box `origin + [0, extent)` in a grid with
/// `side_len` cells per axis, first coordinate fastest.
fn for_cells_in_box(side_len: usize, origin: &[usize], extent: &[usize], mut visit: impl FnMut(usize)) {
    let d = origin.len();
    if extent.contains(&0) {
        return;
    }
    let mut offset = vec![0usize; d];
    loop {
        let mut cell = 0usize;
        let mut stride = 1usize;
        for j in 0..d {
            cell += (origin[j] + offset[j]) * stride;
            stride *= side_len;
        }
        visit(cell);
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            offset[j] += 1;
            if offset[j] < extent[j] {
                break;
            }
            offset[j] = 0;
            j += 1;
        }
    }
}

fn weighted(f: &[f64], measure: &[f64]) -> Vec<f64> {
    f.iter().zip(measure).map(|(a, b)| a * b).collect()
}

/// `[w]_{A_p}` over a cube family of the grid.
pub fn grid_ap_constant(grid: &DyadicGrid, w: &Weight, p: f64, family: CubeFamily) -> Result<f64> {
    check_p(p)?;
    check_grid_weight(grid, w)?;
    let s = ap_companion(w, p);
    match family {
        CubeFamily::Dyadic => {
            let aw = dyadic_averages(grid, w.values());
            let asg = dyadic_averages(grid, &s);
            Ok(aw.iter().flatten().zip(asg.iter().flatten()).map(|(&a, &b)| ap_term(a, b, p)).fold(0.0, f64::max))
        }
        CubeFamily::AllCubes => {
            check_all_cubes(grid, ALL_CUBES_MAX_CELLS_1D, ALL_CUBES_MAX_CELLS, "A_p")?;
            let mu = grid.cell_measure();
            let (wm, sm) = (weighted(w.values(), mu), weighted(&s, mu));
            let mut best = 0.0f64;
            for_each_cube_sums(grid, &[&wm, &sm, mu], |_, _, t| {
                best = best.max(ap_term(t[0] / t[2], t[1] / t[2], p));
            });
            Ok(best)
        }
    }
}

/// Exponential `A_∞` constant over a cube family of the grid.
pub fn grid_exp_constant(grid: &DyadicGrid, w: &Weight, family: CubeFamily) -> Result<f64> {
    check_grid_weight(grid, w)?;
    let neg_log: Vec<f64> = w.values.iter().map(|v| -v.ln()).collect();
    match family {
        CubeFamily::Dyadic => {
            let aw = dyadic_averages(grid, w.values());
            let al = dyadic_averages(grid, &neg_log);
            Ok(aw.iter().flatten().zip(al.iter().flatten()).map(|(&a, &b)| a * b.exp()).fold(0.0, f64::max))
        }
        CubeFamily::AllCubes => {
            check_all_cubes(grid, ALL_CUBES_MAX_CELLS_1D, ALL_CUBES_MAX_CELLS, "exponential A_∞")?;
            let mu = grid.cell_measure();
            let (wm, lm) = (weighted(w.values(), mu), weighted(&neg_log, mu));
            let mut best = 0.0f64;
            for_each_cube_sums(grid, &[&wm, &lm, mu], |_, _, t| {
                best = best.max(t[0] / t[2] * (t[1] / t[2]).exp());
            });
            Ok(best)
        }
    }
}

/// Fujii–Wilson constant over a cube family of the grid, using the dyadic
/// maximal operator for [`CubeFamily::Dyadic`] and the full cube maximal
/// operator for [`CubeFamily::AllCubes`].
pub fn grid_fujii_wilson_constant(grid: &DyadicGrid, w: &Weight, family: CubeFamily) -> Result<f64> {
    check_grid_weight(grid, w)?;
    match family {
        CubeFamily::Dyadic => Ok(dyadic_fw(grid, w.values(), &Cube::root())),
        CubeFamily::AllCubes => {
            check_all_cubes(grid, ALL_CUBES_FW_MAX_CELLS_1D, ALL_CUBES_FW_MAX_CELLS, "Fujii–Wilson A_∞")?;
            if grid.dim() == 1 {
                Ok(interval_fw(grid, w.values()))
            } else {
                Ok(cube_fw(grid, w.values()))
            }
        }
    }
}

/// Dyadic Fujii–Wilson constant over the dyadic subcubes of `q0`.
pub fn dyadic_fujii_wilson_within(grid: &DyadicGrid, w: &Weight, q0: &Cube) -> Result<f64> {
    check_grid_weight(grid, w)?;
    grid.check_cube(q0)?;
    Ok(dyadic_fw(grid, w.values(), q0))
}

/// For a dyadic cube `Q` and `x ∈ Q`, `M(wχ_Q)(x)` is the largest average of
/// `w` over dyadic cubes between `x` and `Q`. Sweeping levels bottom-up keeps
/// that running maximum `S_ℓ(x)` for all `x` at once.
fn dyadic_fw(grid: &DyadicGrid, w: &[f64], q0: &Cube) -> f64 {
    let fan_bits = grid.dim();
    let avgs = dyadic_averages(grid, w);
    let wq = grid.weighted_sums(&grid.to_morton(w));
    let mu: Vec<f64> = (0..grid.cells()).map(|m| grid.cell_measure()[grid.morton_to_cell(m)]).collect();
    let depth = grid.depth();
    let mut running = vec![0.0f64; grid.cells()];
    let mut best = 0.0f64;
    for level in (q0.level..=depth).rev() {
        let shift = fan_bits * (depth - level);
        let la = &avgs[level as usize];
        for (m, s) in running.iter_mut().enumerate() {
            *s = s.max(la[m >> shift]);
        }
        let leaves: Vec<f64> = running.iter().zip(&mu).map(|(a, b)| a * b).collect();
        let integrals = &grid.tree_sums(leaves)[level as usize];
        let span = 1usize << (fan_bits * (level - q0.level));
        let first = (q0.index as usize) * span;
        for i in first..first + span {
            best = best.max(integrals[i] / wq[level as usize][i]);
        }
    }
    best
}

/// One-dimensional all-intervals constant. Inside `Q = [a, b)` the best
/// interval through `x` may be taken inside `Q`, so
/// `M(wχ_Q)(x) = max_{a ≤ i ≤ x < j ≤ b} w([i,j))/μ([i,j))`.
fn interval_fw(grid: &DyadicGrid, w: &[f64]) -> f64 {
    let mu = grid.cell_measure();
    let wm = weighted(w, mu);
    let len = grid.cells();
    let mut best = 0.0f64;
    let mut mx = vec![0.0f64; len];
    let mut row = vec![0.0f64; len + 1];
    for a in 0..len {
        for b in (a + 1)..=len {
            mx[a..b].iter_mut().for_each(|v| *v = 0.0);
            for i in a..b {
                let (mut s, mut m) = (0.0, 0.0);
                for j in i..b {
                    s += wm[j];
                    m += mu[j];
                    row[j + 1] = s / m;
                }
                // suffix maximum over right endpoints, then fold into x ∈ [i, j)
                let mut run = 0.0f64;
                for j in (i + 1..=b).rev() {
                    run = run.max(row[j]);
                    row[j] = run;
                }
                for x in i..b {
                    mx[x] = mx[x].max(row[x + 1]);
                }
            }
            let (mut num, mut den) = (0.0, 0.0);
            for x in a..b {
                num += mx[x] * mu[x];
                den += wm[x];
            }
            best = best.max(num / den);
        }
    }
    best
}

/// All-cubes constant for `d ≥ 2` by direct enumeration of `(Q, P)` pairs.
fn cube_fw(grid: &DyadicGrid, w: &[f64]) -> f64 {
    let d = grid.dim() as usize;
    let side_len = 1usize << grid.depth();
    let mu = grid.cell_measure();
    let wm = weighted(w, mu);
    let mut cubes: Vec<(Vec<usize>, usize, f64)> = Vec::new();
    for_each_cube_sums(grid, &[mu], |o, s, t| cubes.push((o.to_vec(), s, t[0])));
    let mut mx = vec![0.0f64; grid.cells()];
    let mut best = 0.0f64;
    let mut lo = vec![0usize; d];
    let mut ext = vec![0usize; d];
    for (qo, qs, _) in &cubes {
        for_cells_in_box(side_len, qo, &vec![*qs; d], |c| mx[c] = 0.0);
        for (po, ps, pm) in &cubes {
            let mut empty = false;
            for j in 0..d {
                lo[j] = qo[j].max(po[j]);
                let hi = (qo[j] + qs).min(po[j] + ps);
                if hi <= lo[j] {
                    empty = true;
                    break;
                }
                ext[j] = hi - lo[j];
            }
            if empty {
                continue;
            }
            let mut s = 0.0;
            for_cells_in_box(side_len, &lo, &ext, |c| s += wm[c]);
            let avg = s / pm;
            for_cells_in_box(side_len, &lo, &ext, |c| mx[c] = mx[c].max(avg));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for_cells_in_box(side_len, qo, &vec![*qs; d], |c| {
            num += mx[c] * mu[c];
            den += wm[c];
        });
        best = best.max(num / den);
    }
    best
}

// ---------------------------------------------------------------------------
// structural constants

/// `θ = 4κ² + κ`, the Vitali dilation factor.
pub fn theta(kappa: f64) -> f64 {
    4.0 * kappa * kappa + kappa
}

/// `τ_{κμ} = 6(32κ²θ²)^{D}`.
pub fn tau_kappa_mu(kappa: f64, d_mu: f64) -> f64 {
    let t = theta(kappa);
    6.0 * (32.0 * kappa * kappa * t * t).powf(d_mu)
}

/// `τ_{μκδ} = 6(16κ²θ²(1 + 1/δ))^{D}`.
pub fn tau_local(kappa: f64, d_mu: f64, delta: f64) -> f64 {
    let t = theta(kappa);
    6.0 * (16.0 * kappa * kappa * t * t * (1.0 + 1.0 / delta)).powf(d_mu)
}

/// Returns `(τ_{κμ}, r)` with `r = 1 + 1/(τ_{κμ}[w]_{A_∞})`.
pub fn r_exponent(ainf_fw: f64, kappa: f64, d_mu: f64) -> (f64, f64) {
    let tau = tau_kappa_mu(kappa, d_mu);
    (tau, 1.0 + 1.0 / (tau * ainf_fw))
}

/// `ε = (p−1)/(1 + τ_{κμ}[σ]_{A_∞})` for the open property.
pub fn open_epsilon(p: f64, sigma_ainf: f64, kappa: f64, d_mu: f64) -> f64 {
    (p - 1.0) / (1.0 + tau_kappa_mu(kappa, d_mu) * sigma_ainf)
}

/// Admissible `ε` for the dyadic maximal reverse Hölder inequality,
/// `1/(2ρ[w])` with `ρ` the dyadic doubling ratio (`2^d` for Lebesgue).
pub fn dyadic_rhi_epsilon(rho: f64, ainf: f64) -> f64 {
    1.0 / (2.0 * rho * ainf)
}

/// Admissible `ε` for the sharp reverse Hölder inequality over cubes,
/// `1/(2ρ[w] − 1)`.
pub fn sharp_rhi_epsilon(rho: f64, ainf: f64) -> f64 {
    1.0 / (2.0 * rho * ainf - 1.0)
}

// ---------------------------------------------------------------------------
// reports

/// All constants of one weight at one exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub family: String,
    pub p: f64,
    pub kappa: f64,
    pub d_mu: f64,
    pub ap: f64,
    pub ainf_fw: f64,
    pub ainf_exp: f64,
    /// `[w]^W_{A_∞} / [w]^{exp}_{A_∞}`, recorded without a bound.
    pub fw_exp_ratio: f64,
    pub tau: f64,
    pub r_w: f64,
    pub sigma_ainf: f64,
    pub eps_open: f64,
}

impl ConstantsReport {
    #[allow(clippy::too_many_arguments)]
    fn assemble(family: &str, p: f64, kappa: f64, d_mu: f64, ap: f64, fw: f64, exp: f64, sigma_fw: f64) -> Self {
        let (tau, r_w) = r_exponent(fw, kappa, d_mu);
        Self {
            family: family.to_string(),
            p,
            kappa,
            d_mu,
            ap,
            ainf_fw: fw,
            ainf_exp: exp,
            fw_exp_ratio: fw / exp,
            tau,
            r_w,
            sigma_ainf: sigma_fw,
            eps_open: open_epsilon(p, sigma_fw, kappa, d_mu),
        }
    }
}

pub fn space_report(space: &QuasiMetricSpace, w: &Weight, p: f64) -> Result<ConstantsReport> {
    let sigma = dual_weight(w, p)?;
    Ok(ConstantsReport::assemble(
        "balls",
        p,
        space.kappa(),
        space.d_mu(),
        ap_constant(space, w, p)?,
        fujii_wilson_constant(space, w)?,
        exp_constant(space, w)?,
        fujii_wilson_constant(space, &sigma)?,
    ))
}

/// Structural constants of a grid: `κ = 1` and `D = log₂ ρ`, where `ρ` is
/// the dyadic doubling ratio (so `D = d` for Lebesgue measure).
pub fn grid_structure(grid: &DyadicGrid) -> (f64, f64) {
    (1.0, grid.dyadic_doubling().log2())
}

pub fn grid_report(grid: &DyadicGrid, w: &Weight, p: f64, family: CubeFamily) -> Result<ConstantsReport> {
    let sigma = dual_weight(w, p)?;
    let (kappa, d) = grid_structure(grid);
    Ok(ConstantsReport::assemble(
        family.label(),
        p,
        kappa,
        d,
        grid_ap_constant(grid, w, p, family)?,
        grid_fujii_wilson_constant(grid, w, family)?,
        grid_exp_constant(grid, w, family)?,
        grid_fujii_wilson_constant(grid, &sigma, family)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::DistanceMatrix;

    fn pair() -> QuasiMetricSpace {
        let d = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        QuasiMetricSpace::new(d, vec![1.0, 1.0]).unwrap()
    }

    fn w14() -> Weight {
        Weight::new(vec![1.0, 4.0]).unwrap()
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(matches!(
            Weight::new(vec![1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(Weight::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn dual_weights() {
        assert_eq!(dual_weight(&w14(), 2.0).unwrap().values(), &[1.0, 0.25]);
        assert_eq!(dual_weight(&w14(), 3.0).unwrap().values(), &[1.0, 0.5]);
        assert!(dual_weight(&w14(), 1.0).is_err());
        let back = dual_weight(&dual_weight(&w14(), 3.0).unwrap(), 1.5).unwrap();
        for (a, b) in back.values().iter().zip(w14().values()) {
            assert!((a - b).abs() < 1e-15 * b);
        }
    }

    #[test]
    fn two_point_constants() {
        let s = pair();
        assert_eq!(ap_constant(&s, &w14(), 2.0).unwrap(), 1.5625);
        assert!((ap_constant(&s, &w14(), 3.0).unwrap() - 45.0 / 32.0).abs() < 1e-15);
        assert!((fujii_wilson_constant(&s, &w14()).unwrap() - 1.3).abs() < 1e-15);
        assert!((exp_constant(&s, &w14()).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn unit_weight_is_exactly_one() {
        let s = pair();
        let one = Weight::constant(2, 1.0).unwrap();
        assert_eq!(ap_constant(&s, &one, 1.5).unwrap(), 1.0);
        assert_eq!(fujii_wilson_constant(&s, &one).unwrap(), 1.0);
        assert_eq!(exp_constant(&s, &one).unwrap(), 1.0);
        let g = DyadicGrid::lebesgue(1, 4).unwrap();
        let one = Weight::constant(16, 1.0).unwrap();
        for fam in [CubeFamily::Dyadic, CubeFamily::AllCubes] {
            assert_eq!(grid_ap_constant(&g, &one, 3.0, fam).unwrap(), 1.0);
            assert_eq!(grid_fujii_wilson_constant(&g, &one, fam).unwrap(), 1.0);
            assert_eq!(grid_exp_constant(&g, &one, fam).unwrap(), 1.0);
        }
    }

    #[test]
    fn r_exponent_values() {
        assert_eq!(r_exponent(1.0, 1.0, 0.0), (6.0, 7.0 / 6.0));
        assert_eq!(r_exponent(1.0, 1.0, 1.0), (4800.0, 1.0 + 1.0 / 4800.0));
        let (_, r1) = r_exponent(10.0, 1.0, 1.0);
        let (_, r2) = r_exponent(1000.0, 1.0, 1.0);
        assert!(r2 < r1 && r1 < 1.0 + 1.0 / 4800.0);
    }

    #[test]
    fn open_epsilon_of_unit_weight() {
        assert_eq!(open_epsilon(2.0, 1.0, 1.0, 1.0), 1.0 / 4801.0);
    }

    #[test]
    fn dyadic_all_cubes_ordering() {
        let g = DyadicGrid::lebesgue(1, 3).unwrap();
        let w = Weight::new(vec![1.0, 2.0, 8.0, 1.0, 0.5, 3.0, 1.0, 1.0]).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let dy = grid_ap_constant(&g, &w, p, CubeFamily::Dyadic).unwrap();
            let all = grid_ap_constant(&g, &w, p, CubeFamily::AllCubes).unwrap();
            assert!(dy <= all);
        }
        assert!(
            grid_exp_constant(&g, &w, CubeFamily::Dyadic).unwrap()
                <= grid_exp_constant(&g, &w, CubeFamily::AllCubes).unwrap()
        );
    }

    #[test]
    fn all_cubes_size_limit() {
        let g = DyadicGrid::lebesgue(1, 9).unwrap();
        let w = Weight::constant(512, 1.0).unwrap();
        assert!(matches!(
            grid_fujii_wilson_constant(&g, &w, CubeFamily::AllCubes),
            Err(Error::Unsupported(_))
        ));
    }
}
