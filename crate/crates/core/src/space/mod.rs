//! Finite spaces of homogeneous type.
//!
//! Open balls `B(x, r) = { y : d(x, y) < r }` on a finite set only take
//! finitely many member sets per center. For a center `x` with distinct
//! distances `0 = d_0 < d_1 < … < d_m`, the ball of *level* `k` is
//! `{ y : d(x, y) ≤ d_k }`; it is realised by every radius in
//! `(d_k, d_{k+1}]`. The canonical representative radius of level `k` is the
//! midpoint `(d_k + d_{k+1}) / 2`, and `d_m + 1` for the last level.

mod basis;
mod grid;

use crate::error::{invalid, Error, Result};

pub use basis::LocalBasis;
pub use grid::{Cube, DyadicGrid};

/// Symmetric distance matrix with zero diagonal and positive off-diagonal
/// entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structural(format!(
                    "distance row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(n, data)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::from_flat(n, data)
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("space has no points".into()));
        }
        if data.len() != n * n {
            return Err(Error::Structural(format!(
                "distance matrix has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::Structural(format!("dist[{i}][{i}] is not zero")));
            }
            for j in 0..n {
                let d = data[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Structural(format!(
                        "dist[{i}][{j}] = {d} is not a finite nonnegative number"
                    )));
                }
                if d != data[j * n + i] {
                    return Err(Error::Structural(format!(
                        "dist[{i}][{j}] = {d} differs from dist[{j}][{i}] = {}",
                        data[j * n + i]
                    )));
                }
                if i != j && d == 0.0 {
                    return Err(Error::Structural(format!(
                        "distinct points {i} and {j} are at distance 0"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Smallest admissible quasitriangle constant:
/// `max d(x,y) / (d(x,z) + d(z,y))` over all triples, clamped below at 1.
pub fn compute_kappa(dist: &DistanceMatrix) -> f64 {
    let n = dist.n();
    let mut kappa = 1.0f64;
    for x in 0..n {
        for y in (x + 1)..n {
            let dxy = dist.get(x, y);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let ratio = dxy / (dist.get(x, z) + dist.get(z, y));
                if ratio > kappa {
                    kappa = ratio;
                }
            }
        }
    }
    kappa
}

/// A ball with a point index as center and a positive radius.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("{radius} is not a positive finite number")));
        }
        Ok(Self { center, radius })
    }

    /// `λB`: same center, radius scaled by `λ`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("dilation factor {lambda} must be positive")));
        }
        Ball::new(self.center, self.radius * lambda)
    }
}

/// Distance-sorted view of the space from one center.
#[derive(Debug, Clone)]
pub(crate) struct Neighborhood {
    /// Points sorted by distance from the center, ties by index.
    pub order: Vec<u32>,
    /// Distinct distances `d_0 = 0 < d_1 < … < d_m`.
    pub radii: Vec<f64>,
    /// `ends[k]` = number of points at distance `≤ radii[k]`.
    pub ends: Vec<u32>,
    /// `mass[i]` = measure of the first `i` points of `order`.
    pub mass: Vec<f64>,
}

impl Neighborhood {
    fn build(center: usize, dist: &DistanceMatrix, measure: &[f64]) -> Self {
        let n = dist.n();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| {
            dist.get(center, a as usize)
                .total_cmp(&dist.get(center, b as usize))
                .then(a.cmp(&b))
        });
        let mut radii = Vec::new();
        let mut ends = Vec::new();
        for (pos, &y) in order.iter().enumerate() {
            let d = dist.get(center, y as usize);
            if radii.last() != Some(&d) {
                if !radii.is_empty() {
                    ends.push(pos as u32);
                }
                radii.push(d);
            }
        }
        ends.push(n as u32);
        let mut mass = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        mass.push(acc);
        for &y in &order {
            acc += measure[y as usize];
            mass.push(acc);
        }
        Self {
            order,
            radii,
            ends,
            mass,
        }
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.radii.len()
    }

    /// Canonical representative radius of level `k`.
    #[inline]
    pub fn canonical_radius(&self, k: usize) -> f64 {
        if k + 1 < self.radii.len() {
            0.5 * (self.radii[k] + self.radii[k + 1])
        } else {
            self.radii[k] + 1.0
        }
    }

    /// Level of the open ball of radius `r > 0` at this center.
    #[inline]
    pub fn level_of_radius(&self, r: f64) -> usize {
        // number of distinct distances < r, minus one; radii[0] = 0 < r
        self.radii.partition_point(|&d| d < r) - 1
    }

    #[inline]
    pub fn members(&self, k: usize) -> &[u32] {
        &self.order[..self.ends[k] as usize]
    }

    #[inline]
    pub fn level_mass(&self, k: usize) -> f64 {
        self.mass[self.ends[k] as usize]
    }

    /// Averages of `f` over every level ball, written into `out`.
    pub fn level_averages(&self, f: &[f64], measure: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let mut s = 0.0;
        let mut m = 0.0;
        let mut pos = 0usize;
        for &end in &self.ends {
            while pos < end as usize {
                let y = self.order[pos] as usize;
                s += f[y] * measure[y];
                m += measure[y];
                pos += 1;
            }
            out.push(s / m);
        }
    }
}

/// A finite quasimetric measure space with its derived structural constants.
#[derive(Debug, Clone)]
pub struct QuasiMetricSpace {
    dist: DistanceMatrix,
    measure: Vec<f64>,
    kappa: f64,
    c_mu: f64,
    d_mu: f64,
    hoods: Vec<Neighborhood>,
}

impl QuasiMetricSpace {
    pub fn new(dist: DistanceMatrix, measure: Vec<f64>) -> Result<Self> {
        let n = dist.n();
        if measure.len() != n {
            return Err(Error::Structural(format!(
                "measure has {} entries for {n} points",
                measure.len()
            )));
        }
        if let Some((i, m)) = measure
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::Structural(format!(
                "measure[{i}] = {m} is not a positive finite number"
            )));
        }
        let kappa = compute_kappa(&dist);
        let hoods: Vec<_> = (0..n)
            .map(|c| Neighborhood::build(c, &dist, &measure))
            .collect();
        let c_mu = doubling_constant(&hoods);
        Ok(Self {
            dist,
            measure,
            kappa,
            c_mu,
            d_mu: c_mu.log2(),
            hoods,
        })
    }

    /// Replace the derived `κ` by a declared one; only values at least the
    /// derived constant are admissible.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= self.kappa) {
            return Err(invalid(
                "kappa",
                format!("declared {kappa} is below the derived constant {}", self.kappa),
            ));
        }
        self.kappa = kappa;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.dist.n()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn c_mu(&self) -> f64 {
        self.c_mu
    }

    pub fn d_mu(&self) -> f64 {
        self.d_mu
    }

    #[inline]
    pub(crate) fn hood(&self, center: usize) -> &Neighborhood {
        &self.hoods[center]
    }

    /// Canonical radii at `center`, one per distinct member set, ascending.
    pub fn canonical_radii(&self, center: usize) -> Vec<f64> {
        let h = &self.hoods[center];
        (0..h.levels()).map(|k| h.canonical_radius(k)).collect()
    }

    /// Every canonical ball, center-major, ascending radius.
    pub fn canonical_balls(&self) -> Vec<Ball> {
        let mut out = Vec::new();
        for (c, h) in self.hoods.iter().enumerate() {
            for k in 0..h.levels() {
                out.push(Ball {
                    center: c,
                    radius: h.canonical_radius(k),
                });
            }
        }
        out
    }

    /// Canonical representative of `ball` (same member set).
    pub fn canonical_of(&self, ball: &Ball) -> Ball {
        let h = &self.hoods[ball.center];
        Ball {
            center: ball.center,
            radius: h.canonical_radius(h.level_of_radius(ball.radius)),
        }
    }

    pub fn contains(&self, ball: &Ball, y: usize) -> bool {
        self.dist(ball.center, y) < ball.radius
    }

    /// Member indices of `ball`, sorted by distance from its center.
    pub fn members(&self, ball: &Ball) -> &[u32] {
        let h = &self.hoods[ball.center];
        h.members(h.level_of_radius(ball.radius))
    }

    pub fn ball_measure(&self, ball: &Ball) -> f64 {
        let h = &self.hoods[ball.center];
        h.level_mass(h.level_of_radius(ball.radius))
    }

    /// `(1/μ(B)) Σ_{y∈B} f(y) μ(y)`.
    pub fn ball_average(&self, f: &[f64], ball: &Ball) -> Result<f64> {
        self.check_len(f)?;
        if ball.center >= self.n() {
            return Err(invalid("ball", format!("center {} out of range", ball.center)));
        }
        let members = self.members(ball);
        if members.is_empty() {
            return Err(invalid("ball", "empty ball"));
        }
        Ok(self.set_average(f, members))
    }

    pub(crate) fn set_average(&self, f: &[f64], members: &[u32]) -> f64 {
        let (mut s, mut m) = (0.0, 0.0);
        for &y in members {
            let y = y as usize;
            s += f[y] * self.measure[y];
            m += self.measure[y];
        }
        s / m
    }

    /// `μ(B(x, 2r)) / μ(B(x, r))`.
    pub fn doubling_ratio(&self, x: usize, r: f64) -> f64 {
        let h = &self.hoods[x];
        h.level_mass(h.level_of_radius(2.0 * r)) / h.level_mass(h.level_of_radius(r))
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n() {
            return Err(invalid(
                "f",
                format!("function has {} values for {} points", f.len(), self.n()),
            ));
        }
        Ok(())
    }
}

/// Exact `sup_{x, r>0} μ(B(x,2r)) / μ(B(x,r))`.
///
/// On level `k` the inner ball is fixed while `r ∈ (d_k, d_{k+1}]`, and the
/// outer ball grows with `r`, so the supremum sits at `r = d_{k+1}`.
fn doubling_constant(hoods: &[Neighborhood]) -> f64 {
    let mut c = 1.0f64;
    for h in hoods {
        for k in 0..h.levels().saturating_sub(1) {
            let outer = h.level_of_radius(2.0 * h.radii[k + 1]);
            let ratio = h.level_mass(outer) / h.level_mass(k);
            c = c.max(ratio);
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64], measure: Vec<f64>) -> QuasiMetricSpace {
        let n = points.len();
        let d = DistanceMatrix::from_fn(n, |i, j| (points[i] - points[j]).abs()).unwrap();
        QuasiMetricSpace::new(d, measure).unwrap()
    }

    #[test]
    fn kappa_of_metric_is_one() {
        let s = line(&[0.0, 1.0, 3.0, 7.0], vec![1.0; 4]);
        assert_eq!(s.kappa(), 1.0);
    }

    #[test]
    fn kappa_of_squared_distance() {
        let p = [0.0, 0.5, 1.0f64];
        let d = DistanceMatrix::from_fn(3, |i, j| (p[i] - p[j]).powi(2)).unwrap();
        assert_eq!(compute_kappa(&d), 2.0);
    }

    #[test]
    fn single_point_space() {
        let d = DistanceMatrix::from_rows(vec![vec![0.0]]).unwrap();
        let s = QuasiMetricSpace::new(d, vec![2.0]).unwrap();
        assert_eq!(s.kappa(), 1.0);
        assert_eq!((s.c_mu(), s.d_mu()), (1.0, 0.0));
        assert_eq!(s.canonical_radii(0), vec![1.0]);
    }

    #[test]
    fn degenerate_distance_rejected() {
        let err = DistanceMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        let err = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn doubling_of_four_point_line() {
        let s = line(&[0.0, 1.0, 2.0, 3.0], vec![1.0; 4]);
        assert_eq!(s.c_mu(), 3.0);
        assert_eq!(s.d_mu(), 3f64.log2());
        // binding pair: B(1, 1) = {1}, B(1, 2) = {0, 1, 2}
        assert_eq!(s.doubling_ratio(1, 1.0), 3.0);
    }

    #[test]
    fn canonical_families_of_small_lines() {
        let s = line(&[0.0, 1.0], vec![1.0; 2]);
        assert_eq!(s.canonical_radii(0), vec![0.5, 2.0]);
        let sets: Vec<usize> = s.canonical_balls().iter().map(|b| s.members(b).len()).collect();
        assert_eq!(sets, vec![1, 2, 1, 2]);

        let s = line(&[0.0, 1.0, 2.0], vec![1.0; 3]);
        assert_eq!(s.canonical_radii(0), vec![0.5, 1.5, 3.0]);
        assert_eq!(s.canonical_radii(1), vec![0.5, 2.0]);
        let mut m: Vec<u32> = s.members(&Ball::new(1, 2.0).unwrap()).to_vec();
        m.sort();
        assert_eq!(m, vec![0, 1, 2]);
    }

    #[test]
    fn ball_averages() {
        let s = line(&[0.0, 1.0], vec![1.0, 1.0]);
        let both = Ball::new(0, 2.0).unwrap();
        assert_eq!(s.ball_average(&[5.0, 5.0], &both).unwrap(), 5.0);
        assert_eq!(s.ball_average(&[1.0, 3.0], &both).unwrap(), 2.0);
        let s = line(&[0.0, 1.0], vec![1.0, 3.0]);
        assert_eq!(s.ball_average(&[1.0, 3.0], &both).unwrap(), 2.5);
        assert!(s.ball_average(&[1.0], &both).is_err());
    }

    #[test]
    fn dilations() {
        let b = Ball::new(3, 0.5).unwrap();
        assert_eq!(b.dilate(1.0).unwrap(), b);
        let theta = 4.0 + 1.0;
        assert_eq!(b.dilate(theta).unwrap().radius, 2.5);
        assert_eq!(b.dilate(theta * theta).unwrap().radius, 12.5);
        assert!(b.dilate(0.0).is_err());
        assert!(b.dilate(-2.0).is_err());
    }

    #[test]
    fn declared_kappa_must_dominate() {
        let s = line(&[0.0, 1.0, 2.0], vec![1.0; 3]);
        assert!(s.clone().with_kappa(0.5).is_err());
        assert_eq!(s.with_kappa(1.5).unwrap().kappa(), 1.5);
    }

    #[test]
    fn measure_must_be_positive() {
        let d = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(QuasiMetricSpace::new(d.clone(), vec![1.0, 0.0]).is_err());
        assert!(QuasiMetricSpace::new(d, vec![1.0]).is_err());
    }
}
