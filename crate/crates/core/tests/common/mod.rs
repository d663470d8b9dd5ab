#![allow(dead_code)]

pub mod oracle;

use proptest::prelude::*;
use weightlab::{DyadicGrid, QuasiMetricSpace};

/// Distance matrix and measure as plain arrays, for the oracles.
pub fn raw(space: &QuasiMetricSpace) -> (oracle::Dist, Vec<f64>) {
    let n = space.n();
    let d = (0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect()).collect();
    (d, space.measure().to_vec())
}

pub fn grid_raw(grid: &DyadicGrid) -> (usize, u32, Vec<f64>) {
    (grid.dim() as usize, grid.depth(), grid.cell_measure().to_vec())
}

/// Points in the plane (integer coordinates, so ties between distances are
/// common) raised to a snowflake exponent, with masses in `[1, 4)`.
pub fn arb_space(max_n: usize) -> impl Strategy<Value = QuasiMetricSpace> {
    (1..=max_n, prop::sample::select(vec![0.5, 1.0, 2.0]))
        .prop_flat_map(|(n, s)| {
            (
                prop::collection::vec((0i32..12, 0i32..12), n),
                prop::collection::vec(1.0f64..4.0, n),
                Just(s),
            )
        })
        .prop_map(|(mut pts, mut mu, s)| {
            let mut seen = std::collections::HashSet::new();
            let keep: Vec<bool> = pts.iter().map(|p| seen.insert(*p)).collect();
            let mut k = keep.iter();
            pts.retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            mu.retain(|_| *k.next().unwrap());
            let n = pts.len();
            let d = weightlab::DistanceMatrix::from_fn(n, |i, j| {
                let (dx, dy) = ((pts[i].0 - pts[j].0) as f64, (pts[i].1 - pts[j].1) as f64);
                (dx * dx + dy * dy).sqrt().powf(s)
            });
            QuasiMetricSpace::new(d.unwrap(), mu).unwrap()
        })
}

pub fn arb_positive(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, n)
}

/// A space together with a positive function on it.
pub fn arb_space_and_weight(max_n: usize) -> impl Strategy<Value = (QuasiMetricSpace, Vec<f64>)> {
    arb_space(max_n).prop_flat_map(|s| {
        let n = s.n();
        (Just(s), arb_positive(n))
    })
}

/// A grid with positive random cell measures (or Lebesgue) and a positive
/// function on its cells.
pub fn arb_grid_and_weight(dim: u32, max_depth: u32) -> impl Strategy<Value = (DyadicGrid, Vec<f64>)> {
    (1..=max_depth, any::<bool>())
        .prop_flat_map(move |(depth, lebesgue)| {
            let cells = 1usize << (dim * depth);
            (
                Just(depth),
                Just(lebesgue),
                prop::collection::vec(0.5f64..2.0, cells),
                arb_positive(cells),
            )
        })
        .prop_map(move |(depth, lebesgue, mu, w)| {
            let g = if lebesgue {
                DyadicGrid::lebesgue(dim, depth)
            } else {
                DyadicGrid::new(dim, depth, Some(mu))
            };
            (g.unwrap(), w)
        })
}
