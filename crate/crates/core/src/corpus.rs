//! Deterministic generators of spaces and weights.
//!
//! Randomness comes from [`Lcg64`], a 64-bit linear congruential generator
//! with Knuth's MMIX constants, so every seeded corpus is reproducible bit
//! for bit on any platform.

use crate::constants::Weight;
use crate::error::{invalid, Result};
use crate::space::{DistanceMatrix, DyadicGrid, QuasiMetricSpace};

/// `state ← a·state + c (mod 2^64)` with `a = 6364136223846793005` and
/// `c = 1442695040888963407`; the initial state is the seed. A uniform
/// variate in `[0, 1)` is the top 53 bits of the *advanced* state times
/// `2^{-53}`.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const A: u64 = 6364136223846793005;
    pub const C: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::A).wrapping_add(Self::C);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`, `n > 0`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

/// Cell averages of `|x|^α`: exact for `d = 1`, midpoint rule for `d ≥ 2`.
pub fn power_weight(grid: &DyadicGrid, alpha: f64) -> Result<Weight> {
    let d = grid.dim() as f64;
    if !(alpha.is_finite() && alpha > -d) {
        return Err(invalid("alpha", format!("{alpha} must exceed −d = {}", -d)));
    }
    let side = (1u64 << grid.depth()) as f64;
    let values = if grid.dim() == 1 {
        (0..grid.cells())
            .map(|i| {
                let (a, b) = (i as f64 / side, (i + 1) as f64 / side);
                if alpha == 0.0 {
                    1.0
                } else {
                    (b.powf(alpha + 1.0) - a.powf(alpha + 1.0)) / ((alpha + 1.0) * (b - a))
                }
            })
            .collect()
    } else {
        (0..grid.cells())
            .map(|cell| {
                let r2: f64 = grid
                    .cell_coords(cell)
                    .iter()
                    .map(|&c| {
                        let x = (c as f64 + 0.5) / side;
                        x * x
                    })
                    .sum();
                r2.sqrt().powf(alpha)
            })
            .collect()
    };
    Weight::new(values)
}

/// Multiplicative dyadic cascade. Starting from `1` on the root, each cube
/// splits its value among its children (Morton order) with factors drawn
/// uniformly from `[1/bound, bound]`, renormalised so that the
/// measure-weighted average over the parent is preserved.
pub fn cascade_weight(grid: &DyadicGrid, bound: f64, seed: u64) -> Result<Weight> {
    if !(bound.is_finite() && bound >= 1.0) {
        return Err(invalid("bound", format!("{bound} must be at least 1")));
    }
    let fan = 1usize << grid.dim();
    let mut rng = Lcg64::new(seed);
    let mut values = vec![1.0f64];
    let mut u = vec![0.0; fan];
    for level in 1..=grid.depth() {
        let m = grid.level_measures(level);
        let mut next = Vec::with_capacity(values.len() * fan);
        for (q, &parent) in values.iter().enumerate() {
            let kids = &m[q * fan..(q + 1) * fan];
            let mut total = 0.0;
            let mut mass = 0.0;
            for (uj, &mj) in u.iter_mut().zip(kids) {
                *uj = rng.uniform(1.0 / bound, bound);
                total += *uj * mj;
                mass += mj;
            }
            next.extend(u.iter().map(|uj| parent * (uj * mass / total)));
        }
        values = next;
    }
    let row_major = grid.row_major_from_morton(&values);
    Weight::new(row_major)
}

/// A cascade on `2^depth` points, for use as a weight on a point space.
pub fn cascade_values(depth: u32, bound: f64, seed: u64) -> Result<Weight> {
    cascade_weight(&DyadicGrid::lebesgue(1, depth)?, bound, seed)
}

/// `1` everywhere except `spikes` distinct points, drawn by `seed`, carrying
/// `height`.
pub fn spike_weight(len: usize, spikes: usize, height: f64, seed: u64) -> Result<Weight> {
    if spikes > len {
        return Err(invalid("spikes", format!("{spikes} spikes on {len} points")));
    }
    let mut values = vec![1.0; len];
    let mut rng = Lcg64::new(seed);
    let mut placed = 0;
    while placed < spikes {
        let x = rng.below(len);
        if values[x] == 1.0 && height != 1.0 {
            values[x] = height;
            placed += 1;
        } else if height == 1.0 {
            break;
        }
    }
    Weight::new(values)
}

/// Point masses for generated spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum Masses {
    Unit,
    /// Uniform in `[1, spread]`.
    Random { seed: u64, spread: f64 },
    Explicit(Vec<f64>),
}

impl Masses {
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Masses::Unit => Ok(vec![1.0; n]),
            Masses::Random { seed, spread } => {
                if !(spread.is_finite() && *spread >= 1.0) {
                    return Err(invalid("spread", format!("{spread} must be at least 1")));
                }
                let mut rng = Lcg64::new(*seed);
                Ok((0..n).map(|_| rng.uniform(1.0, *spread)).collect())
            }
            Masses::Explicit(v) => {
                if v.len() != n {
                    return Err(invalid("masses", format!("{} masses for {n} points", v.len())));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Points on the line at the given positions.
pub fn line_space(positions: &[f64], masses: &Masses) -> Result<QuasiMetricSpace> {
    let d = DistanceMatrix::from_fn(positions.len(), |i, j| (positions[i] - positions[j]).abs())?;
    QuasiMetricSpace::new(d, masses.values(positions.len())?)
}

/// `n` points at `0, 1, …, n−1`.
pub fn unit_line(n: usize, masses: &Masses) -> Result<QuasiMetricSpace> {
    let pos: Vec<f64> = (0..n).map(|i| i as f64).collect();
    line_space(&pos, masses)
}

/// Points `0, 1, …, n−1` with `d(x, y) = |x − y|^s`.
pub fn snowflake_space(n: usize, s: f64, masses: &Masses) -> Result<QuasiMetricSpace> {
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid("s", format!("exponent {s} must be positive")));
    }
    let d = DistanceMatrix::from_fn(n, |i, j| (i as f64 - j as f64).abs().powf(s))?;
    QuasiMetricSpace::new(d, masses.values(n)?)
}

/// Shortest-path metric of a ring of `n` unit edges plus `chords` random
/// chords with integer lengths in `1..=3`.
pub fn ring_graph_space(n: usize, chords: usize, seed: u64, masses: &Masses) -> Result<QuasiMetricSpace> {
    if n < 3 {
        return Err(invalid("n", "a ring needs at least 3 points"));
    }
    let inf = f64::INFINITY;
    let mut d = vec![inf; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
        let j = (i + 1) % n;
        d[i * n + j] = 1.0;
        d[j * n + i] = 1.0;
    }
    let mut rng = Lcg64::new(seed);
    for _ in 0..chords {
        let a = rng.below(n);
        let b = rng.below(n);
        let len = 1.0 + rng.below(3) as f64;
        if a != b && len < d[a * n + b] {
            d[a * n + b] = len;
            d[b * n + a] = len;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == inf {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    QuasiMetricSpace::new(DistanceMatrix::from_flat(n, d)?, masses.values(n)?)
}
