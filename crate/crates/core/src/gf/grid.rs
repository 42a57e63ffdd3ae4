//! Sampling rectangle and sampled scalar fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

use super::GeneratingFamily;

pub const MIN_CELLS: usize = 16;
/// Fraction of the support size added on every side.
pub const MARGIN: f64 = 0.1;

/// `nx × ny` cells over a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::InvalidFamily(format!("grid needs at least {MIN_CELLS} cells per side, got {nx}×{ny}")));
        }
        if !(x.0 < x.1 && y.0 < y.1) || ![x.0, x.1, y.0, y.1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidFamily("grid rectangle is empty".into()));
        }
        Ok(Grid { x_min: x.0, x_max: x.1, y_min: y.0, y_max: y.1, nx, ny })
    }

    /// Square-celled grid over the support with the standard margin; `n` cells along the longer side.
    pub fn for_family(family: &GeneratingFamily, n: usize) -> Result<Self> {
        let (x, y) = match family.support() {
            Some(bb) => {
                let (mx, my) = (MARGIN * bb.width(), MARGIN * bb.height());
                ((bb.min.x - mx, bb.max.x + mx), (bb.min.y - my, bb.max.y + my))
            }
            None => ((-1.0, 1.0), (-1.0, 1.0)),
        };
        let (w, h) = (x.1 - x.0, y.1 - y.0);
        let (nx, ny) = if w >= h {
            (n, ((n as f64 * h / w).round() as usize).max(MIN_CELLS))
        } else {
            (((n as f64 * w / h).round() as usize).max(MIN_CELLS), n)
        };
        Grid::new(x, y, nx, ny)
    }

    pub fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.hx().hypot(self.hy())
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.x_min + i as f64 * self.hx(), self.y_min + j as f64 * self.hy())
    }

    pub fn with_resolution(&self, nx: usize, ny: usize) -> Result<Self> {
        Grid::new((self.x_min, self.x_max), (self.y_min, self.y_max), nx, ny)
    }
}

/// Values of a function at the `(nx + 1) × (ny + 1)` grid nodes, row by row.
#[derive(Clone, Debug)]
pub struct Sampled {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Sampled {
    pub fn new(grid: Grid, f: impl Fn(Point) -> f64 + Sync) -> Self {
        let row = grid.nx + 1;
        let mut values = vec![0.0; row * (grid.ny + 1)];
        values.par_chunks_mut(row).enumerate().for_each(|(j, chunk)| {
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = f(grid.node(i, j));
            }
        });
        Sampled { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.grid.nx + 1) + i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Interior nodes where the discrete field has a local extremum or a saddle,
    /// judged by sign changes around the 8-neighborhood.
    pub fn critical_nodes(&self) -> Vec<(usize, usize)> {
        const RING: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
        let mut out = Vec::new();
        for j in 1..self.grid.ny {
            for i in 1..self.grid.nx {
                let c = self.at(i, j);
                let diffs: Vec<f64> =
                    RING.iter().map(|&(di, dj)| self.at((i as i64 + di) as usize, (j as i64 + dj) as usize) - c).collect();
                if diffs.iter().all(|d| *d == 0.0) {
                    continue;
                }
                let changes = (0..8).filter(|&k| (diffs[k] > 0.0) != (diffs[(k + 1) % 8] > 0.0)).count();
                if changes == 0 || changes >= 4 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::BumpTerm;

    #[test]
    fn margin_and_resolution() {
        let f = GeneratingFamily::new(vec![BumpTerm { c: 1.0, p: 0.0, q: 0.0, s: 1.0, t: 2.0 }]).unwrap();
        let g = Grid::for_family(&f, 64).unwrap();
        assert!((g.x_min + 1.2).abs() < 1e-12 && (g.y_max - 2.4).abs() < 1e-12);
        assert_eq!(g.ny, 64);
        assert_eq!(g.nx, 32);
        assert!(Grid::for_family(&f, 8).is_err());
    }

    #[test]
    fn critical_nodes_of_a_paraboloid() {
        let g = Grid::new((-1.0, 1.0), (-1.0, 1.0), 20, 20).unwrap();
        let s = Sampled::new(g, |p| p.x * p.x + 2.0 * p.y * p.y);
        assert_eq!(s.critical_nodes(), vec![(10, 10)]);
        let saddle = Sampled::new(g, |p| p.x * p.x - p.y * p.y + 0.01 * p.x);
        assert_eq!(saddle.critical_nodes().len(), 1);
    }
}
