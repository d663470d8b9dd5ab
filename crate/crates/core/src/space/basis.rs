use super::{Ball, QuasiMetricSpace};
use crate::error::{invalid, Result};

/// The local basis of balls centered in `B₀` with radius at most `δ·r(B₀)`,
/// together with the enclosing ball `B̂₀ = (1+δ)κB₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    base: Ball,
    delta: f64,
    hat: Ball,
    cap: f64,
}

impl LocalBasis {
    pub fn new(space: &QuasiMetricSpace, base: Ball, delta: f64) -> Result<Self> {
        if base.center >= space.n() {
            return Err(invalid("base", format!("center {} out of range", base.center)));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid("delta", format!("{delta} must be positive")));
        }
        let hat = Ball::new(base.center, (1.0 + delta) * space.kappa() * base.radius)?;
        Ok(Self {
            base,
            delta,
            hat,
            cap: delta * base.radius,
        })
    }

    pub fn base(&self) -> &Ball {
        &self.base
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn hat(&self) -> &Ball {
        &self.hat
    }

    /// Largest admissible radius, `δ·r(B₀)`.
    pub fn radius_cap(&self) -> f64 {
        self.cap
    }

    pub fn admits(&self, space: &QuasiMetricSpace, ball: &Ball) -> bool {
        space.contains(&self.base, ball.center) && ball.radius <= self.cap
    }

    /// Highest level realisable at `center` inside the basis, if any.
    pub fn max_level(&self, space: &QuasiMetricSpace, center: usize) -> Option<usize> {
        if !space.contains(&self.base, center) {
            return None;
        }
        Some(space.hood(center).level_of_radius(self.cap))
    }

    /// Representative basis ball of level `k` at `center`:
    /// the canonical radius, capped at `δ·r(B₀)`.
    pub fn ball_at(&self, space: &QuasiMetricSpace, center: usize, level: usize) -> Ball {
        Ball {
            center,
            radius: space.hood(center).canonical_radius(level).min(self.cap),
        }
    }

    /// One ball per distinct (center, member set) pair in the basis.
    pub fn canonical_balls(&self, space: &QuasiMetricSpace) -> Vec<Ball> {
        let mut out = Vec::new();
        for &c in space.members(&self.base) {
            let c = c as usize;
            if let Some(kmax) = self.max_level(space, c) {
                out.extend((0..=kmax).map(|k| self.ball_at(space, c, k)));
            }
        }
        out.sort_by_key(|b| b.center);
        out
    }
}
