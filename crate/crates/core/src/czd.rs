//! Local Calderón–Zygmund decomposition of the level sets of `M_𝓑 f`.
//!
//! Candidates are the basis balls with average above `λ`, one per center:
//! the largest such member set, realised at its largest radius inside the
//! basis. Using the largest radius makes every `ηB` with `η ≥ 2` that stays
//! in the basis a strictly larger member set, which is what maximality
//! (property iv) needs. Candidates are then taken greedily by decreasing
//! radius (ties by center index), keeping those disjoint from all earlier
//! picks.

use serde::Serialize;

use crate::constants::theta;
use crate::error::{invalid, Error, Result};
use crate::maximal::{local_maximal, local_maximal_into};
use crate::space::{Ball, LocalBasis, QuasiMetricSpace};
use crate::verify::{CheckKind, CheckResult};

/// Parameters of one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CzConfig {
    pub delta: f64,
    /// Selection scale `N`.
    pub n_scale: f64,
    pub lambda: f64,
    /// `Γ = (2κ²(1+δ)N/δ)^{D_μ}`.
    pub gamma: f64,
    /// `θ = 4κ² + κ`.
    pub theta: f64,
    /// `L = (8κ²)^{D_μ}`.
    pub l_const: f64,
}

impl CzConfig {
    pub fn new(space: &QuasiMetricSpace, basis: &LocalBasis, n_scale: f64, lambda: f64) -> Result<Self> {
        let kappa = space.kappa();
        if !(n_scale.is_finite() && n_scale >= 2.0 * kappa) {
            return Err(invalid("N", format!("{n_scale} is below 2κ = {}", 2.0 * kappa)));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("{lambda} must be positive")));
        }
        let d = space.d_mu();
        let delta = basis.delta();
        Ok(Self {
            delta,
            n_scale,
            lambda,
            gamma: gamma(kappa, d, delta, n_scale),
            theta: theta(kappa),
            l_const: (8.0 * kappa * kappa).powf(d),
        })
    }
}

/// `Γ = (2κ²(1+δ)N/δ)^{D}`.
pub fn gamma(kappa: f64, d_mu: f64, delta: f64, n_scale: f64) -> f64 {
    (2.0 * kappa * kappa * (1.0 + delta) * n_scale / delta).powf(d_mu)
}

/// A selected ball with the average of `f` over it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectedBall {
    pub center: usize,
    pub radius: f64,
    pub average: f64,
}

impl SelectedBall {
    pub fn ball(&self) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CzDecomposition {
    pub base: Ball,
    pub config: CzConfig,
    /// `f` averaged over `B̂₀`.
    pub hat_average: f64,
    pub balls: Vec<SelectedBall>,
    /// `Ω_λ = {M_𝓑 f > λ}`, ascending.
    pub omega: Vec<usize>,
}

/// Smallest admissible `λ` for `f`: `Γ·f_{B̂₀}`.
pub fn threshold(space: &QuasiMetricSpace, basis: &LocalBasis, f: &[f64], n_scale: f64) -> Result<f64> {
    space.check_len(f)?;
    let g = gamma(space.kappa(), space.d_mu(), basis.delta(), n_scale);
    Ok(g * space.set_average(f, space.members(basis.hat())))
}

pub fn cz_decompose(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    f: &[f64],
    config: &CzConfig,
) -> Result<CzDecomposition> {
    space.check_len(f)?;
    if space.d_mu() == 0.0 {
        return Err(Error::Unsupported(
            "decomposition needs a positive doubling order; this space has D_μ = 0".into(),
        ));
    }
    if let Some((i, v)) = f.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(invalid("f", format!("f[{i}] = {v} is not a finite nonnegative number")));
    }
    if config.delta != basis.delta() {
        return Err(invalid("config", "δ differs from the basis"));
    }
    let hat_average = space.set_average(f, space.members(basis.hat()));
    let lambda = config.lambda;
    let needed = config.gamma * hat_average;
    if lambda < needed {
        return Err(Error::BelowThreshold {
            lambda,
            threshold: needed,
        });
    }
    let mf = local_maximal(space, basis, f)?;
    let omega: Vec<usize> = (0..space.n()).filter(|&x| mf[x] > lambda).collect();

    let mut candidates = Vec::new();
    let mut avgs = Vec::new();
    for &c in space.members(basis.base()) {
        let c = c as usize;
        let Some(kmax) = basis.max_level(space, c) else { continue };
        let h = space.hood(c);
        h.level_averages(f, space.measure(), &mut avgs);
        if let Some(k) = (0..=kmax).rev().find(|&k| avgs[k] > lambda) {
            let radius = h.radii.get(k + 1).copied().unwrap_or(f64::INFINITY).min(basis.radius_cap());
            candidates.push(SelectedBall {
                center: c,
                radius,
                average: avgs[k],
            });
        }
    }
    candidates.sort_by(|a, b| b.radius.total_cmp(&a.radius).then(a.center.cmp(&b.center)));

    let mut taken = vec![false; space.n()];
    let mut balls = Vec::new();
    for cand in candidates {
        let members = space.members(&cand.ball());
        if members.iter().any(|&y| taken[y as usize]) {
            continue;
        }
        for &y in members {
            taken[y as usize] = true;
        }
        balls.push(cand);
    }

    let dec = CzDecomposition {
        base: *basis.base(),
        config: config.clone(),
        hat_average,
        balls,
        omega,
    };
    if let Some(x) = uncovered(space, &dec).first() {
        return Err(Error::Internal(format!(
            "point {x} of the level set is not covered by the dilated balls"
        )));
    }
    Ok(dec)
}

/// Points of `Ω_λ` outside every `θB_i`.
fn uncovered(space: &QuasiMetricSpace, dec: &CzDecomposition) -> Vec<usize> {
    let theta = dec.config.theta;
    dec.omega
        .iter()
        .copied()
        .filter(|&x| {
            !dec
                .balls
                .iter()
                .any(|b| space.dist(b.center, x) < theta * b.radius)
        })
        .collect()
}

const POSTCONDITIONS: [&str; 4] = [
    "cz-i-inside-level-set",
    "cz-ii-radius",
    "cz-iii-average",
    "cz-iv-maximality",
];

/// Postconditions i)–iv) per ball, plus level-set covering and pairwise
/// disjointness of the family.
pub fn verify_cz(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    f: &[f64],
    dec: &CzDecomposition,
    instance_id: &str,
) -> Result<Vec<CheckResult>> {
    space.check_len(f)?;
    let cfg = &dec.config;
    let lambda = cfg.lambda;
    let mut out = Vec::new();
    if dec.balls.is_empty() {
        for name in POSTCONDITIONS.iter().chain(&["cz-covering", "cz-disjoint"]) {
            out.push(
                CheckResult::vacuous(name, instance_id)
                    .param("lambda", lambda)
                    .param("delta", cfg.delta)
                    .param("N", cfg.n_scale),
            );
        }
        return Ok(out);
    }
    let mut in_omega = vec![false; space.n()];
    for &x in &dec.omega {
        in_omega[x] = true;
    }
    let r0 = dec.base.radius;
    let cap = basis.radius_cap();
    for (i, sel) in dec.balls.iter().enumerate() {
        let ball = sel.ball();
        let members = space.members(&ball);
        let tag = |r: CheckResult| {
            r.param("ball", i as f64)
                .param("center", sel.center as f64)
                .param("radius", sel.radius)
                .param("lambda", lambda)
                .param("delta", cfg.delta)
                .param("N", cfg.n_scale)
        };

        let outside = members.iter().filter(|&&y| !in_omega[y as usize]).count();
        out.push(tag(CheckResult::new(POSTCONDITIONS[0], instance_id, outside as f64, 0.0)
            .provenance("number of ball members outside the level set")));

        out.push(tag(CheckResult::new(POSTCONDITIONS[1], instance_id, sel.radius, cfg.delta / cfg.n_scale * r0)
            .provenance("(delta/N) r(B0)")));

        let avg = space.set_average(f, members);
        let mut iii = CheckResult::new(POSTCONDITIONS[2], instance_id, lambda, avg).provenance("average of f over B_i");
        iii.pass = lambda < avg;
        out.push(tag(iii));

        // member sets of ηB_i for η ≥ 2 with ηr ≤ δ r(B₀)
        let h = space.hood(sel.center);
        let r = if 2.0 * sel.radius <= cap {
            let lo = h.level_of_radius(2.0 * sel.radius);
            let hi = h.level_of_radius(cap);
            let mut avgs = Vec::new();
            h.level_averages(f, space.measure(), &mut avgs);
            let worst = avgs[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            CheckResult::new(POSTCONDITIONS[3], instance_id, worst, lambda)
                .param("dilates", (hi - lo + 1) as f64)
        } else {
            CheckResult::vacuous(POSTCONDITIONS[3], instance_id)
        };
        out.push(tag(r.provenance("lambda")));
    }

    let missed = uncovered(space, dec).len();
    out.push(
        CheckResult::new("cz-covering", instance_id, missed as f64, 0.0)
            .param("lambda", lambda)
            .param("theta", cfg.theta)
            .param("omega", dec.omega.len() as f64)
            .provenance("number of level-set points outside every theta-dilate"),
    );

    let mut owner = vec![usize::MAX; space.n()];
    let mut overlaps = 0usize;
    for (i, sel) in dec.balls.iter().enumerate() {
        for &y in space.members(&sel.ball()) {
            if owner[y as usize] != usize::MAX {
                overlaps += 1;
            }
            owner[y as usize] = i;
        }
    }
    out.push(
        CheckResult::new("cz-disjoint", instance_id, overlaps as f64, 0.0)
            .param("lambda", lambda)
            .param("balls", dec.balls.len() as f64)
            .provenance("number of points shared between selected balls"),
    );
    Ok(out)
}

/// `M_𝓑 f(x) ≤ M_𝓑(fχ_{B_i**})(x)` for `x ∈ B_i* ∩ Ω_{Lλ}`: one result per
/// ball, reporting the point with the largest ratio of the two sides.
pub fn localization_check(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    f: &[f64],
    dec: &CzDecomposition,
    instance_id: &str,
) -> Result<Vec<CheckResult>> {
    space.check_len(f)?;
    let cfg = &dec.config;
    let top = cfg.l_const * cfg.lambda;
    let mf = local_maximal(space, basis, f)?;
    let mut out = Vec::new();
    if dec.balls.is_empty() {
        out.push(CheckResult::vacuous("localization", instance_id).param("lambda", cfg.lambda));
        return Ok(out);
    }
    let mut g = vec![0.0; space.n()];
    let mut mg = vec![0.0; space.n()];
    let mut scratch = Vec::new();
    for (i, sel) in dec.balls.iter().enumerate() {
        let star = sel.ball().dilate(cfg.theta)?;
        let double_star = star.dilate(cfg.theta)?;
        g.iter_mut().for_each(|v| *v = 0.0);
        for &y in space.members(&double_star) {
            g[y as usize] = f[y as usize].abs();
        }
        mg.iter_mut().for_each(|v| *v = 0.0);
        local_maximal_into(space, basis, &g, &mut mg, &mut scratch);

        let mut worst: Option<(f64, usize)> = None;
        for &x in space.members(&star) {
            let x = x as usize;
            if mf[x] <= top {
                continue;
            }
            let ratio = if mg[x] > 0.0 { mf[x] / mg[x] } else { f64::INFINITY };
            if worst.is_none_or(|(r, _)| ratio > r) {
                worst = Some((ratio, x));
            }
        }
        let r = match worst {
            Some((_, x)) => CheckResult::new("localization", instance_id, mf[x], mg[x]).param("x", x as f64),
            None => CheckResult::vacuous("localization", instance_id),
        };
        out.push(
            r.param("ball", i as f64)
                .param("lambda", cfg.lambda)
                .param("L", cfg.l_const)
                .param("N", cfg.n_scale)
                .param("delta", cfg.delta)
                .provenance("M_B(f chi_{B**})(x), B** = theta^2 B, x in B* with M_B f(x) > L lambda")
                .kind(CheckKind::Check),
        );
    }
    Ok(out)
}
