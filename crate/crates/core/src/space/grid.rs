use crate::error::{invalid, Error, Result};
use std::ops::Range;

const MAX_CELL_BITS: u32 = 24;

/// Depth-`K` dyadic subdivision of `[0,1]^d`.
///
/// Functions on the grid are vectors over the `2^{dK}` finest cells in
/// row-major order: cell `(i_1, …, i_d)` has index `Σ_j i_j · 2^{K(j-1)}`,
/// so the first coordinate varies fastest. Internally cells are kept in
/// Morton order, where every dyadic cube is a contiguous block.
#[derive(Debug, Clone)]
pub struct DyadicGrid {
    dim: u32,
    depth: u32,
    cell_measure: Vec<f64>,
    lebesgue: bool,
    /// Morton position -> row-major index.
    morton: Vec<u32>,
    /// Cube measures per level, Morton order.
    level_measure: Vec<Vec<f64>>,
}

/// A dyadic cube: `level` in `0..=K` and its Morton index at that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Cube {
    pub level: u32,
    pub index: u64,
}

impl Cube {
    pub fn root() -> Self {
        Cube { level: 0, index: 0 }
    }
}

impl DyadicGrid {
    pub fn lebesgue(dim: u32, depth: u32) -> Result<Self> {
        Self::new(dim, depth, None)
    }

    /// `cell_measure = None` means Lebesgue measure, `2^{-dK}` per cell.
    pub fn new(dim: u32, depth: u32, cell_measure: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        if dim.checked_mul(depth).is_none_or(|b| b > MAX_CELL_BITS) {
            return Err(invalid(
                "depth",
                format!("2^(dim·depth) cells exceeds the limit of 2^{MAX_CELL_BITS}"),
            ));
        }
        let cells = 1usize << (dim * depth);
        let lebesgue = cell_measure.is_none();
        let cell_measure = match cell_measure {
            None => vec![(-((dim * depth) as f64)).exp2(); cells],
            Some(m) => {
                if m.len() != cells {
                    return Err(Error::Structural(format!(
                        "cell_measure has {} entries, grid has {cells} cells",
                        m.len()
                    )));
                }
                if let Some((i, v)) = m.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::Structural(format!(
                        "cell_measure[{i}] = {v} is not a positive finite number"
                    )));
                }
                m
            }
        };
        let morton = morton_table(dim, depth);
        let mut grid = Self {
            dim,
            depth,
            cell_measure,
            lebesgue,
            morton,
            level_measure: Vec::new(),
        };
        let leaf_mass: Vec<f64> = grid.morton.iter().map(|&i| grid.cell_measure[i as usize]).collect();
        grid.level_measure = grid.tree_sums(leaf_mass);
        Ok(grid)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cells(&self) -> usize {
        self.cell_measure.len()
    }

    pub fn cell_measure(&self) -> &[f64] {
        &self.cell_measure
    }

    pub fn is_lebesgue(&self) -> bool {
        self.lebesgue
    }

    pub fn cube_count(&self, level: u32) -> usize {
        1usize << (self.dim * level)
    }

    /// Cube at `level` with integer coordinates in `0..2^level`.
    pub fn cube(&self, level: u32, coords: &[u32]) -> Result<Cube> {
        if level > self.depth {
            return Err(invalid("cube", format!("level {level} exceeds depth {}", self.depth)));
        }
        if coords.len() != self.dim as usize {
            return Err(invalid("cube", format!("expected {} coordinates", self.dim)));
        }
        if coords.iter().any(|&c| (c as u64) >= (1u64 << level)) {
            return Err(invalid("cube", format!("coordinates {coords:?} outside level {level}")));
        }
        let mut index = 0u64;
        for b in 0..level {
            for (j, &c) in coords.iter().enumerate() {
                index |= (((c >> b) & 1) as u64) << (b * self.dim + j as u32);
            }
        }
        Ok(Cube { level, index })
    }

    pub fn check_cube(&self, q: &Cube) -> Result<()> {
        if q.level > self.depth || q.index >= self.cube_count(q.level) as u64 {
            return Err(invalid("cube", format!("{q:?} is not a cube of this grid")));
        }
        Ok(())
    }

    pub fn cube_measure(&self, q: &Cube) -> f64 {
        self.level_measure[q.level as usize][q.index as usize]
    }

    pub(crate) fn level_measures(&self, level: u32) -> &[f64] {
        &self.level_measure[level as usize]
    }

    /// Morton positions of the finest cells inside `q`.
    pub fn leaf_range(&self, q: &Cube) -> Range<usize> {
        let shift = self.dim * (self.depth - q.level);
        let start = (q.index as usize) << shift;
        start..start + (1usize << shift)
    }

    /// Row-major indices of the finest cells inside `q`.
    pub fn leaf_cells(&self, q: &Cube) -> Vec<usize> {
        self.leaf_range(q).map(|m| self.morton[m] as usize).collect()
    }

    /// Row-major index of the cell at Morton position `m`.
    #[inline]
    pub fn morton_to_cell(&self, m: usize) -> usize {
        self.morton[m] as usize
    }

    /// Dyadic parent, `None` for the root.
    pub fn parent(&self, q: &Cube) -> Option<Cube> {
        (q.level > 0).then(|| Cube {
            level: q.level - 1,
            index: q.index >> self.dim,
        })
    }

    pub fn children(&self, q: &Cube) -> Vec<Cube> {
        if q.level == self.depth {
            return Vec::new();
        }
        let k = 1u64 << self.dim;
        (0..k)
            .map(|j| Cube {
                level: q.level + 1,
                index: (q.index << self.dim) | j,
            })
            .collect()
    }

    /// Whether `inner ⊆ outer`.
    pub fn is_subcube(&self, inner: &Cube, outer: &Cube) -> bool {
        inner.level >= outer.level
            && (inner.index >> (self.dim * (inner.level - outer.level))) == outer.index
    }

    /// Largest ratio `μ(parent) / μ(child)` over the grid; `2^d` for
    /// Lebesgue measure.
    pub fn dyadic_doubling(&self) -> f64 {
        if self.lebesgue {
            return (self.dim as f64).exp2();
        }
        let mut r = 1.0f64;
        for level in 1..=self.depth as usize {
            for (i, &m) in self.level_measure[level].iter().enumerate() {
                r = r.max(self.level_measure[level - 1][i >> self.dim] / m);
            }
        }
        r
    }

    /// Row-major values reordered into Morton order.
    pub(crate) fn to_morton(&self, f: &[f64]) -> Vec<f64> {
        self.morton.iter().map(|&i| f[i as usize]).collect()
    }

    pub(crate) fn row_major_from_morton(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for (m, &i) in self.morton.iter().enumerate() {
            out[i as usize] = f[m];
        }
        out
    }

    /// Per-level sums of a Morton-ordered leaf array, finest level last.
    /// Every level is reduced from its children in a fixed order.
    pub(crate) fn tree_sums(&self, leaves: Vec<f64>) -> Vec<Vec<f64>> {
        let fan = 1usize << self.dim;
        let mut levels = vec![leaves];
        for _ in 0..self.depth {
            let finer = levels.last().unwrap();
            let coarser: Vec<f64> = finer.chunks_exact(fan).map(|c| c.iter().sum()).collect();
            levels.push(coarser);
        }
        levels.reverse();
        levels
    }

    /// Per-level sums of `f·μ`, Morton order.
    pub(crate) fn weighted_sums(&self, f_morton: &[f64]) -> Vec<Vec<f64>> {
        let leaves = f_morton
            .iter()
            .zip(&self.morton)
            .map(|(v, &i)| v * self.cell_measure[i as usize])
            .collect();
        self.tree_sums(leaves)
    }

    /// Row-major coordinates of a finest cell.
    pub fn cell_coords(&self, cell: usize) -> Vec<u32> {
        let mask = (1usize << self.depth) - 1;
        (0..self.dim)
            .map(|j| ((cell >> (self.depth * j)) & mask) as u32)
            .collect()
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.cells() {
            return Err(invalid(
                "f",
                format!("function has {} values for {} cells", f.len(), self.cells()),
            ));
        }
        Ok(())
    }
}

fn morton_table(dim: u32, depth: u32) -> Vec<u32> {
    let cells = 1usize << (dim * depth);
    (0..cells)
        .map(|m| {
            let mut linear = 0usize;
            for b in 0..depth {
                for j in 0..dim {
                    let bit = (m >> (b * dim + j)) & 1;
                    linear |= bit << (depth * j + b);
                }
            }
            linear as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_cube_measures_are_exact_powers() {
        let g = DyadicGrid::lebesgue(2, 3).unwrap();
        assert_eq!(g.cells(), 64);
        for level in 0..=3 {
            for &m in g.level_measures(level) {
                assert_eq!(m, (-(2.0 * level as f64)).exp2());
            }
        }
        assert_eq!(g.dyadic_doubling(), 4.0);
    }

    #[test]
    fn children_partition_parent() {
        let m: Vec<f64> = (0..64).map(|i| 1.0 + (i % 7) as f64).collect();
        let g = DyadicGrid::new(2, 3, Some(m)).unwrap();
        for level in 0..3u32 {
            for index in 0..g.cube_count(level) as u64 {
                let q = Cube { level, index };
                let kids = g.children(&q);
                assert_eq!(kids.len(), 4);
                let s: f64 = kids.iter().map(|c| g.cube_measure(c)).sum();
                assert_eq!(s, g.cube_measure(&q));
                for c in &kids {
                    assert_eq!(g.parent(c), Some(q));
                    assert!(g.is_subcube(c, &q));
                }
            }
        }
    }

    #[test]
    fn morton_blocks_match_coordinates() {
        let g = DyadicGrid::lebesgue(2, 2).unwrap();
        let q = g.cube(1, &[1, 0]).unwrap();
        let mut cells = g.leaf_cells(&q);
        cells.sort();
        // x in {2,3}, y in {0,1}; index = x + 4y
        assert_eq!(cells, vec![2, 3, 6, 7]);
        for c in cells {
            let xy = g.cell_coords(c);
            assert!(xy[0] >= 2 && xy[1] <= 1);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DyadicGrid::lebesgue(0, 3).is_err());
        assert!(DyadicGrid::lebesgue(2, 20).is_err());
        assert!(DyadicGrid::new(1, 2, Some(vec![1.0, 1.0, 0.0, 1.0])).is_err());
        assert!(DyadicGrid::new(1, 2, Some(vec![1.0; 3])).is_err());
        let g = DyadicGrid::lebesgue(1, 2).unwrap();
        assert!(g.cube(3, &[0]).is_err());
        assert!(g.cube(1, &[2]).is_err());
        assert!(g.check_cube(&Cube { level: 1, index: 2 }).is_err());
    }
}
