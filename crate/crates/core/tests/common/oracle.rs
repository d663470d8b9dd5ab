//! Brute-force reference implementations on raw arrays. Nothing here calls
//! into the crate: balls are open, `B(c, r) = {y : d(c, y) < r}`, and every
//! supremum runs over all member sets by direct enumeration.

#![allow(dead_code, clippy::needless_range_loop)]

pub type Dist = Vec<Vec<f64>>;

pub fn kappa(d: &Dist) -> f64 {
    let n = d.len();
    let mut k = 1.0f64;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || z == x || z == y {
                    continue;
                }
                k = k.max(d[x][y] / (d[x][z] + d[z][y]));
            }
        }
    }
    k
}

fn ball_mass(d: &Dist, mu: &[f64], c: usize, r: f64) -> f64 {
    (0..mu.len()).filter(|&y| d[c][y] < r).map(|y| mu[y]).sum()
}

/// `sup_{x, r > 0} μ(B(x, 2r))/μ(B(x, r))`. Both masses are constant for
/// `r` in `(a, b]` between consecutive points of `{d(x,y)} ∪ {d(x,y)/2}`, so
/// the right endpoints suffice.
pub fn doubling_constant(d: &Dist, mu: &[f64]) -> f64 {
    let n = mu.len();
    let mut best = 1.0f64;
    for x in 0..n {
        for y in 0..n {
            for r in [d[x][y], d[x][y] / 2.0] {
                if r > 0.0 {
                    best = best.max(ball_mass(d, mu, x, 2.0 * r) / ball_mass(d, mu, x, r));
                }
            }
        }
    }
    best
}

/// Every member set `{y : d(c, y) ≤ t}` for `t` a distance from `c`: the
/// sets of the open balls at `c`, as (center, t, members).
pub fn ball_sets(d: &Dist) -> Vec<(usize, f64, Vec<usize>)> {
    let n = d.len();
    let mut out = Vec::new();
    for c in 0..n {
        let mut ts: Vec<f64> = d[c].clone();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        for t in ts {
            out.push((c, t, (0..n).filter(|&y| d[c][y] <= t).collect()));
        }
    }
    out
}

fn avg(f: &[f64], mu: &[f64], set: &[usize]) -> f64 {
    let s: f64 = set.iter().map(|&y| f[y] * mu[y]).sum();
    let m: f64 = set.iter().map(|&y| mu[y]).sum();
    s / m
}

pub fn hl_maximal(d: &Dist, mu: &[f64], f: &[f64]) -> Vec<f64> {
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0f64; f.len()];
    for (_, _, set) in ball_sets(d) {
        let a = avg(&fa, mu, &set);
        for &x in &set {
            out[x] = out[x].max(a);
        }
    }
    out
}

/// Maximal function over balls `B(c, r)` with `d(c0, c) < r0` and
/// `0 < r ≤ δ r0`; `0` where no such ball reaches.
pub fn local_maximal(d: &Dist, mu: &[f64], f: &[f64], c0: usize, r0: f64, delta: f64) -> Vec<f64> {
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let cap = delta * r0;
    let mut out = vec![0.0f64; f.len()];
    for (c, t, set) in ball_sets(d) {
        // the set is realised by r in (t, next distance]; some r ≤ cap iff t < cap
        if d[c0][c] < r0 && t < cap {
            let a = avg(&fa, mu, &set);
            for &x in &set {
                out[x] = out[x].max(a);
            }
        }
    }
    out
}

pub fn ap(d: &Dist, mu: &[f64], w: &[f64], p: f64) -> f64 {
    let s: Vec<f64> = w.iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    ball_sets(d)
        .iter()
        .map(|(_, _, set)| avg(w, mu, set) * avg(&s, mu, set).powf(p - 1.0))
        .fold(0.0, f64::max)
}

pub fn exp_constant(d: &Dist, mu: &[f64], w: &[f64]) -> f64 {
    let l: Vec<f64> = w.iter().map(|v| -v.ln()).collect();
    ball_sets(d)
        .iter()
        .map(|(_, _, set)| avg(w, mu, set) * avg(&l, mu, set).exp())
        .fold(0.0, f64::max)
}

pub fn fujii_wilson(d: &Dist, mu: &[f64], w: &[f64]) -> f64 {
    let n = w.len();
    let mut best = 0.0f64;
    for (_, _, set) in ball_sets(d) {
        let mut g = vec![0.0; n];
        for &y in &set {
            g[y] = w[y];
        }
        let mg = hl_maximal(d, mu, &g);
        let num: f64 = set.iter().map(|&y| mg[y] * mu[y]).sum();
        let den: f64 = set.iter().map(|&y| w[y] * mu[y]).sum();
        best = best.max(num / den);
    }
    best
}

// ---------------------------------------------------------------------------
// grids: `side^dim` cells, row-major with the first coordinate fastest

pub fn coords(cell: usize, dim: usize, side: usize) -> Vec<usize> {
    (0..dim).map(|j| (cell / side.pow(j as u32)) % side).collect()
}

/// Cells of the dyadic cube at `level` with the given coordinates.
pub fn dyadic_cells(dim: usize, depth: u32, level: u32, at: &[usize]) -> Vec<usize> {
    let side = 1usize << depth;
    let shift = depth - level;
    (0..side.pow(dim as u32))
        .filter(|&c| coords(c, dim, side).iter().zip(at).all(|(&x, &q)| x >> shift == q))
        .collect()
}

/// Every dyadic cube as its cell list, coarsest level first.
pub fn dyadic_cubes(dim: usize, depth: u32) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for level in 0..=depth {
        let per = 1usize << level;
        for t in 0..per.pow(dim as u32) {
            let at = coords(t, dim, per);
            out.push(dyadic_cells(dim, depth, level, &at));
        }
    }
    out
}

/// Every axis-parallel discrete cube as its cell list.
pub fn all_cubes(dim: usize, depth: u32) -> Vec<Vec<usize>> {
    let side = 1usize << depth;
    let mut out = Vec::new();
    for s in 1..=side {
        let span = side - s + 1;
        for t in 0..span.pow(dim as u32) {
            let o = coords(t, dim, span);
            out.push(
                (0..side.pow(dim as u32))
                    .filter(|&c| coords(c, dim, side).iter().zip(&o).all(|(&x, &a)| x >= a && x < a + s))
                    .collect(),
            );
        }
    }
    out
}

/// `M^d f` relative to the dyadic cube `(level, at)` by walking the
/// ancestors of every cell; `0` outside it.
pub fn dyadic_maximal(dim: usize, depth: u32, mu: &[f64], f: &[f64], level: u32, at: &[usize]) -> Vec<f64> {
    let side = 1usize << depth;
    let fa: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut out = vec![0.0; f.len()];
    for x in dyadic_cells(dim, depth, level, at) {
        let cx = coords(x, dim, side);
        let mut best = 0.0f64;
        for l in level..=depth {
            let q: Vec<usize> = cx.iter().map(|&c| c >> (depth - l)).collect();
            best = best.max(avg(&fa, mu, &dyadic_cells(dim, depth, l, &q)));
        }
        out[x] = best;
    }
    out
}

pub fn family_ap(family: &[Vec<usize>], mu: &[f64], w: &[f64], p: f64) -> f64 {
    let s: Vec<f64> = w.iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    family
        .iter()
        .map(|q| avg(w, mu, q) * avg(&s, mu, q).powf(p - 1.0))
        .fold(0.0, f64::max)
}

pub fn family_exp(family: &[Vec<usize>], mu: &[f64], w: &[f64]) -> f64 {
    let l: Vec<f64> = w.iter().map(|v| -v.ln()).collect();
    family
        .iter()
        .map(|q| avg(w, mu, q) * avg(&l, mu, q).exp())
        .fold(0.0, f64::max)
}

/// `max_Q (1/w(Q)) Σ_{x∈Q} max_{P ∋ x} (w(P∩Q)/μ(P)) μ(x)` with `P` and `Q`
/// ranging over the same family.
pub fn family_fujii_wilson(family: &[Vec<usize>], mu: &[f64], w: &[f64]) -> f64 {
    let n = w.len();
    let mut best = 0.0f64;
    for q in family {
        let mut inq = vec![false; n];
        for &x in q {
            inq[x] = true;
        }
        let mut m = vec![0.0f64; n];
        for pcube in family {
            let s: f64 = pcube.iter().filter(|&&y| inq[y]).map(|&y| w[y] * mu[y]).sum();
            let pm: f64 = pcube.iter().map(|&y| mu[y]).sum();
            for &x in pcube {
                m[x] = m[x].max(s / pm);
            }
        }
        let num: f64 = q.iter().map(|&x| m[x] * mu[x]).sum();
        let den: f64 = q.iter().map(|&x| w[x] * mu[x]).sum();
        best = best.max(num / den);
    }
    best
}

/// Relative difference, `0` when both are `0`.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
