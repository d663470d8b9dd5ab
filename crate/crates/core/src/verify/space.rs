//! Checks on finite quasimetric measure spaces.

use super::{CheckKind, CheckResult};
use crate::constants::{ap_constant, conjugate, dual_weight, open_epsilon, tau_kappa_mu, tau_local, theta, Weight};
use crate::error::{invalid, Error, Result};
use crate::maximal::{hl_maximal_into, local_maximal_into};
use crate::space::{Ball, LocalBasis, QuasiMetricSpace};

fn check_weight(space: &QuasiMetricSpace, w: &Weight) -> Result<()> {
    if w.len() != space.n() {
        return Err(invalid("w", format!("weight has {} values for {} points", w.len(), space.n())));
    }
    Ok(())
}

/// `⨍_{B̂}(M_𝓑 w)^{1+ε} ≤ 3[w]_{A_∞}(⨍_{B̂} w)^{1+ε}` with `w` localized to
/// `B̂`, for `0 < ε ≤ 1/(τ_{μκδ}[w]_{A_∞})`; `ainf` is the ball-family
/// Fujii–Wilson constant of `w`.
pub fn check_rhi_maximal_local(
    space: &QuasiMetricSpace,
    basis: &LocalBasis,
    w: &Weight,
    eps: f64,
    ainf: f64,
    instance_id: &str,
) -> Result<CheckResult> {
    check_weight(space, w)?;
    let tau = tau_local(space.kappa(), space.d_mu(), basis.delta());
    let max = 1.0 / (tau * ainf);
    if !(eps > 0.0 && eps <= max) {
        return Err(Error::EpsilonOutOfRange { eps, max });
    }
    let (lhs, avg) = local_moment(space, basis, w, eps);
    Ok(CheckResult::new("rhi-maximal-local", instance_id, lhs, 3.0 * ainf * avg.powf(1.0 + eps))
        .param("eps", eps)
        .param("ainf", ainf)
        .param("delta", basis.delta())
        .param("tau", tau)
        .provenance("3 [w]_Ainf (avg_hat w)^(1+eps), tau = 6(16 k^2 theta^2 (1+1/delta))^D"))
}

/// [`check_rhi_maximal_local`] at `ε = 1/(τ_{μκδ}[w]_{A_∞})` on the basis of
/// every canonical ball, reported at the ball with the largest `lhs/rhs`.
pub fn rhi_local_all_balls(
    space: &QuasiMetricSpace,
    w: &Weight,
    delta: f64,
    ainf: f64,
    instance_id: &str,
) -> Result<CheckResult> {
    check_weight(space, w)?;
    let eps = 1.0 / (tau_local(space.kappa(), space.d_mu(), delta) * ainf);
    let mut results = Vec::new();
    for ball in space.canonical_balls() {
        let basis = LocalBasis::new(space, ball, delta)?;
        let r = check_rhi_maximal_local(space, &basis, w, eps, ainf, instance_id)?;
        results.push(r.param("center", ball.center as f64).param("radius", ball.radius));
    }
    Ok(worst_of(results))
}

/// Collapses results of one check to the one with the largest `lhs/rhs`,
/// with `params.balls` and `params.failures` counting the inputs and the
/// violations.
pub(crate) fn worst_of(results: Vec<CheckResult>) -> CheckResult {
    let count = results.len();
    let failures = results.iter().filter(|r| !r.pass).count();
    let ratio = |r: &CheckResult| if r.rhs > 0.0 { r.lhs / r.rhs } else { r.lhs };
    let mut worst = results
        .into_iter()
        .reduce(|a, b| if ratio(&b) > ratio(&a) { b } else { a })
        .expect("at least one result");
    worst.pass = failures == 0;
    worst.param("balls", count as f64).param("failures", failures as f64)
}

/// `(⨍_{B̂}(M_𝓑(wχ_{B̂}))^{1+ε}, ⨍_{B̂} w)`.
pub(crate) fn local_moment(space: &QuasiMetricSpace, basis: &LocalBasis, w: &Weight, eps: f64) -> (f64, f64) {
    let hat = space.members(basis.hat());
    let mut local = vec![0.0; space.n()];
    for &y in hat {
        local[y as usize] = w.values()[y as usize];
    }
    let mut m = vec![0.0; space.n()];
    local_maximal_into(space, basis, &local, &mut m, &mut Vec::new());
    let measure = space.measure();
    let (mut s, mut mass) = (0.0, 0.0);
    for &y in hat {
        let y = y as usize;
        s += m[y].powf(1.0 + eps) * measure[y];
        mass += measure[y];
    }
    (s / mass, space.set_average(w.values(), hat))
}

/// `(⨍_B w^r)^{1/r} ≤ 2(4κ)^{D_μ} ⨍_{2κB} w`.
pub fn check_weak_rhi(space: &QuasiMetricSpace, w: &Weight, ball: &Ball, r_w: f64, instance_id: &str) -> Result<CheckResult> {
    check_weight(space, w)?;
    if ball.center >= space.n() {
        return Err(invalid("ball", format!("center {} out of range", ball.center)));
    }
    let (lhs, rhs) = weak_rhi_sides(space, w, ball, r_w)?;
    Ok(CheckResult::new("weak-rhi", instance_id, lhs, rhs)
        .param("r", r_w)
        .param("center", ball.center as f64)
        .param("radius", ball.radius)
        .provenance("2 (4 kappa)^D avg_{2 kappa B} w"))
}

fn weak_rhi_sides(space: &QuasiMetricSpace, w: &Weight, ball: &Ball, r_w: f64) -> Result<(f64, f64)> {
    let kappa = space.kappa();
    let powered: Vec<f64> = space.members(ball).iter().map(|&y| w.values()[y as usize].powf(r_w)).collect();
    let measure = space.measure();
    let (mut s, mut m) = (0.0, 0.0);
    for (&y, v) in space.members(ball).iter().zip(&powered) {
        s += v * measure[y as usize];
        m += measure[y as usize];
    }
    let lhs = (s / m).powf(1.0 / r_w);
    let wide = ball.dilate(2.0 * kappa)?;
    let rhs = 2.0 * (4.0 * kappa).powf(space.d_mu()) * space.set_average(w.values(), space.members(&wide));
    Ok((lhs, rhs))
}

/// Weak reverse Hölder over every canonical ball, reported at the ball with
/// the largest `lhs/rhs`; `params.balls` counts the balls and
/// `params.failures` the violations.
pub fn weak_rhi_all_balls(space: &QuasiMetricSpace, w: &Weight, r_w: f64, instance_id: &str) -> Result<CheckResult> {
    check_weight(space, w)?;
    let mut worst: Option<(f64, Ball, f64, f64)> = None;
    let mut count = 0usize;
    let mut failures = 0usize;
    for ball in space.canonical_balls() {
        let (lhs, rhs) = weak_rhi_sides(space, w, &ball, r_w)?;
        count += 1;
        if !super::passes(lhs, rhs) {
            failures += 1;
        }
        let ratio = lhs / rhs;
        if worst.as_ref().is_none_or(|(r, ..)| ratio > *r) {
            worst = Some((ratio, ball, lhs, rhs));
        }
    }
    let (_, ball, lhs, rhs) = worst.expect("every space has a canonical ball");
    let mut r = CheckResult::new("weak-rhi", instance_id, lhs, rhs)
        .param("r", r_w)
        .param("center", ball.center as f64)
        .param("radius", ball.radius)
        .param("balls", count as f64)
        .param("failures", failures as f64)
        .provenance("2 (4 kappa)^D avg_{2 kappa B} w, worst canonical ball");
    r.pass = failures == 0;
    Ok(r)
}

/// Every canonical ball of the basis `𝓑_{B,1}` lies in `2κB`.
pub fn basis_inclusion_check(space: &QuasiMetricSpace, ball: &Ball, instance_id: &str) -> Result<CheckResult> {
    let basis = LocalBasis::new(space, *ball, 1.0)?;
    let hat = basis.hat();
    let mut outside = 0usize;
    let mut balls = 0usize;
    for b in basis.canonical_balls(space) {
        balls += 1;
        outside += space
            .members(&b)
            .iter()
            .filter(|&&y| !space.contains(hat, y as usize))
            .count();
    }
    Ok(CheckResult::new("basis-inclusion", instance_id, outside as f64, 0.0)
        .param("center", ball.center as f64)
        .param("radius", ball.radius)
        .param("balls", balls as f64)
        .provenance("number of basis-ball members outside 2 kappa B"))
}

/// Returns `ε = (p−1)/(1+τ_{κμ}[σ]_{A_∞})` and the check
/// `[w]_{A_{p−ε}} ≤ 2^{p−1}(4κ)^{pD_μ}[w]_{A_p}`; `sigma_ainf` is the
/// ball-family Fujii–Wilson constant of `σ = w^{1−p′}`.
pub fn open_property(
    space: &QuasiMetricSpace,
    w: &Weight,
    p: f64,
    sigma_ainf: f64,
    instance_id: &str,
) -> Result<(f64, CheckResult)> {
    check_weight(space, w)?;
    let (kappa, d) = (space.kappa(), space.d_mu());
    let eps = open_epsilon(p, sigma_ainf, kappa, d);
    let q = p - eps;
    if q.is_nan() || q <= 1.0 {
        return Err(Error::Internal(format!("p − ε = {q} is not above 1")));
    }
    let ap = ap_constant(space, w, p)?;
    let aq = ap_constant(space, w, q)?;
    let factor = 2f64.powf(p - 1.0) * (4.0 * kappa).powf(p * d);
    let r = CheckResult::new("open-property", instance_id, aq, factor * ap)
        .param("p", p)
        .param("eps", eps)
        .param("p_minus_eps", q)
        .param("ap", ap)
        .param("sigma_ainf", sigma_ainf)
        .provenance("2^(p-1) (4 kappa)^(p D) [w]_Ap, eps = (p-1)/(1 + tau [sigma]_Ainf)");
    Ok((eps, r))
}

/// `(Σ |f|^q w μ)^{1/q}`.
fn lq_norm(space: &QuasiMetricSpace, w: &Weight, f: &[f64], q: f64) -> f64 {
    let measure = space.measure();
    let s: f64 = (0..space.n()).map(|x| f[x].abs().powf(q) * w.values()[x] * measure[x]).sum();
    s.powf(1.0 / q)
}

/// `sup_λ λ·w({Mf > λ})^{1/q}`: as `λ` rises to a value `v` of `Mf` the
/// level set is `{Mf ≥ v}`, so the supremum is attained in that limit.
fn weak_norm(space: &QuasiMetricSpace, w: &Weight, mf: &[f64], q: f64) -> f64 {
    let measure = space.measure();
    let mut order: Vec<usize> = (0..space.n()).collect();
    order.sort_by(|&a, &b| mf[b].total_cmp(&mf[a]).then(a.cmp(&b)));
    let mut best = 0.0f64;
    let mut acc = 0.0;
    for (i, &x) in order.iter().enumerate() {
        acc += w.values()[x] * measure[x];
        let last_of_value = order.get(i + 1).is_none_or(|&y| mf[y] != mf[x]);
        if last_of_value && mf[x] > 0.0 {
            best = best.max(mf[x] * acc.powf(1.0 / q));
        }
    }
    best
}

fn check_testset(space: &QuasiMetricSpace, testset: &[Vec<f64>]) -> Result<()> {
    if let Some((i, _)) = testset.iter().enumerate().find(|(_, f)| f.len() != space.n()) {
        return Err(invalid("testset", format!("test function {i} has the wrong length")));
    }
    Ok(())
}

/// Largest `‖Mf‖_{L^{q,∞}(w)}/‖f‖_{L^q(w)}` over the test family against
/// `(2θ)^{D_μ}[w]_{A_q}^{1/q}`.
pub fn weak_type_bound(
    space: &QuasiMetricSpace,
    w: &Weight,
    q: f64,
    testset: &[Vec<f64>],
    instance_id: &str,
) -> Result<CheckResult> {
    check_weight(space, w)?;
    check_testset(space, testset)?;
    let aq = ap_constant(space, w, q)?;
    let rhs = (2.0 * theta(space.kappa())).powf(space.d_mu()) * aq.powf(1.0 / q);
    let (lhs, used, arg) = norm_ratio(space, testset, |f, mf| weak_norm(space, w, mf, q) / lq_norm(space, w, f, q));
    Ok(CheckResult::new("weak-type", instance_id, lhs, rhs)
        .kind(CheckKind::LowerEstimate)
        .param("q", q)
        .param("aq", aq)
        .param("tests", used as f64)
        .param("argmax", arg as f64)
        .provenance("(2 theta)^D [w]_Aq^(1/q), theta = 4 kappa^2 + kappa"))
}

/// Maximises `ratio(f, Mf)` over nonzero test functions; returns the
/// maximum, the number of functions used and the maximising index.
fn norm_ratio(space: &QuasiMetricSpace, testset: &[Vec<f64>], ratio: impl Fn(&[f64], &[f64]) -> f64) -> (f64, usize, usize) {
    let mut mf = vec![0.0; space.n()];
    let mut fa = vec![0.0; space.n()];
    let mut scratch = Vec::new();
    let (mut best, mut used, mut arg) = (0.0f64, 0usize, 0usize);
    for (i, f) in testset.iter().enumerate() {
        if f.iter().all(|&v| v == 0.0) {
            continue;
        }
        used += 1;
        for (a, v) in fa.iter_mut().zip(f) {
            *a = v.abs();
        }
        mf.iter_mut().for_each(|v| *v = 0.0);
        hl_maximal_into(space, &fa, &mut mf, &mut scratch);
        let r = ratio(&fa, &mf);
        if r > best {
            best = r;
            arg = i;
        }
    }
    (best, used, arg)
}

/// The assembled mixed bound: `K^{1/p}` with
/// `K = p 2^{2p−1}(4κ)^{pD}(2θ)^{D(p−ε)}[w]_{A_p}(1+τ_{κμ}[σ]_{A_∞})/(p−1)`
/// and `ε = (p−1)/(1+τ_{κμ}[σ]_{A_∞})`.
pub fn mixed_bound(p: f64, kappa: f64, d_mu: f64, ap: f64, sigma_ainf: f64) -> f64 {
    let eps = open_epsilon(p, sigma_ainf, kappa, d_mu);
    let k = p
        * 2f64.powf(2.0 * p - 1.0)
        * (4.0 * kappa).powf(p * d_mu)
        * (2.0 * theta(kappa)).powf(d_mu * (p - eps))
        * ap
        * (1.0 + tau_kappa_mu(kappa, d_mu) * sigma_ainf)
        / (p - 1.0);
    k.powf(1.0 / p)
}

pub const MIXED_BOUND_EXPRESSION: &str = "(p 2^(2p-1) (4 kappa)^(p D) (2 theta)^(D (p-eps)) / (p-1) \
     * (1 + tau [sigma]_Ainf) [w]_Ap)^(1/p), eps = (p-1)/(1 + tau [sigma]_Ainf)";

/// Largest `‖Mf‖_{L^p(w)}/‖f‖_{L^p(w)}` over the test family against the
/// assembled mixed bound. `params.buckley_classical` is `p′[w]_{A_p}^{1/(p−1)}`
/// and `params.mixed_over_classical` the ratio of the two bounds.
pub fn buckley_mixed_bound(
    space: &QuasiMetricSpace,
    w: &Weight,
    p: f64,
    sigma_ainf: f64,
    testset: &[Vec<f64>],
    instance_id: &str,
) -> Result<CheckResult> {
    check_weight(space, w)?;
    check_testset(space, testset)?;
    let ap = ap_constant(space, w, p)?;
    let rhs = mixed_bound(p, space.kappa(), space.d_mu(), ap, sigma_ainf);
    let classical = conjugate(p) * ap.powf(1.0 / (p - 1.0));
    let (lhs, used, arg) = norm_ratio(space, testset, |f, mf| lq_norm(space, w, mf, p) / lq_norm(space, w, f, p));
    Ok(CheckResult::new("buckley", instance_id, lhs, rhs)
        .kind(CheckKind::LowerEstimate)
        .param("p", p)
        .param("ap", ap)
        .param("sigma_ainf", sigma_ainf)
        .param("eps", open_epsilon(p, sigma_ainf, space.kappa(), space.d_mu()))
        .param("buckley_classical", classical)
        .param("mixed_over_classical", rhs / classical)
        .param("tests", used as f64)
        .param("argmax", arg as f64)
        .provenance(MIXED_BOUND_EXPRESSION))
}

/// Indicators of the distinct canonical balls, `σχ_B` for the same balls
/// with `σ = w^{1−p′}`, and unit point masses.
pub fn default_testset(space: &QuasiMetricSpace, w: &Weight, p: f64) -> Result<Vec<Vec<f64>>> {
    check_weight(space, w)?;
    let sigma = dual_weight(w, p)?;
    let n = space.n();
    let sets = crate::constants::distinct_balls(space);
    let mut out = Vec::with_capacity(2 * sets.len() + n);
    for set in &sets {
        let mut f = vec![0.0; n];
        for &y in *set {
            f[y as usize] = 1.0;
        }
        out.push(f);
    }
    for set in &sets {
        let mut f = vec![0.0; n];
        for &y in *set {
            f[y as usize] = sigma.values()[y as usize];
        }
        out.push(f);
    }
    for x in 0..n {
        let mut f = vec![0.0; n];
        f[x] = 1.0;
        out.push(f);
    }
    Ok(out)
}

/// [`basis_inclusion_check`] for every canonical ball, summed.
pub fn basis_inclusion_all_balls(space: &QuasiMetricSpace, instance_id: &str) -> Result<CheckResult> {
    let mut outside = 0.0;
    let mut balls = 0usize;
    for ball in space.canonical_balls() {
        outside += basis_inclusion_check(space, &ball, instance_id)?.lhs;
        balls += 1;
    }
    Ok(CheckResult::new("basis-inclusion", instance_id, outside, 0.0)
        .param("balls", balls as f64)
        .provenance("number of basis-ball members outside 2 kappa B, all canonical B"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::fujii_wilson_constant;
    use crate::space::DistanceMatrix;

    fn pair() -> QuasiMetricSpace {
        let d = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        QuasiMetricSpace::new(d, vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn unit_weight_open_property() {
        let d = DistanceMatrix::from_fn(4, |i, j| (i as f64 - j as f64).abs()).unwrap();
        let s = QuasiMetricSpace::new(d, vec![1.0; 4]).unwrap();
        let w = Weight::constant(4, 1.0).unwrap();
        let (eps, r) = open_property(&s, &w, 2.0, 1.0, "t").unwrap();
        assert_eq!(eps, 1.0 / (1.0 + tau_kappa_mu(1.0, s.d_mu())));
        assert_eq!(r.lhs, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn two_point_checks_pass() {
        let s = pair();
        let w = Weight::new(vec![1.0, 4.0]).unwrap();
        let sigma = dual_weight(&w, 2.0).unwrap();
        let sig_fw = fujii_wilson_constant(&s, &sigma).unwrap();
        let (eps, r) = open_property(&s, &w, 2.0, sig_fw, "t").unwrap();
        assert!(eps > 0.0 && r.pass);
        let ts = default_testset(&s, &w, 2.0).unwrap();
        assert!(weak_type_bound(&s, &w, 2.0, &ts, "t").unwrap().pass);
        let b = buckley_mixed_bound(&s, &w, 2.0, sig_fw, &ts, "t").unwrap();
        assert!(b.pass && b.kind == CheckKind::LowerEstimate);
        let fw = fujii_wilson_constant(&s, &w).unwrap();
        let (_, r_w) = crate::constants::r_exponent(fw, s.kappa(), s.d_mu());
        assert!(weak_rhi_all_balls(&s, &w, r_w, "t").unwrap().pass);
    }

    #[test]
    fn weak_norm_of_indicator() {
        let s = pair();
        let w = Weight::constant(2, 1.0).unwrap();
        // f = χ_{0}: Mf = (1, 1/2); sup_λ λ w{Mf>λ}^{1/2} = max(1·1, ½·√2)
        let v = weak_norm(&s, &w, &[1.0, 0.5], 2.0);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn epsilon_outside_range_is_rejected() {
        let d = DistanceMatrix::from_fn(8, |i, j| (i as f64 - j as f64).abs()).unwrap();
        let s = QuasiMetricSpace::new(d, vec![1.0; 8]).unwrap();
        let basis = LocalBasis::new(&s, Ball::new(4, 2.5).unwrap(), 1.0).unwrap();
        let w = Weight::constant(8, 1.0).unwrap();
        assert!(matches!(
            check_rhi_maximal_local(&s, &basis, &w, 0.5, 1.0, "t"),
            Err(Error::EpsilonOutOfRange { .. })
        ));
        let tau = tau_local(1.0, s.d_mu(), 1.0);
        let r = check_rhi_maximal_local(&s, &basis, &w, 1.0 / tau, 1.0, "t").unwrap();
        assert!(r.pass && r.lhs <= 1.0 + 1e-15);
    }
}
