use serde::{Deserialize, Serialize};

use crate::error::{PmeError, Result};
use crate::initial_data::Rect;

/// Uniform node grid; node `(i, j)` sits at `(x0 + i h, y0 + j h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
}

pub const MIN_NODES: usize = 16;

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(PmeError::InvalidParameter(format!("grid needs at least {MIN_NODES} nodes per side, got {nx} x {ny}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(PmeError::InvalidParameter(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Grid2D { nx, ny, h, x0, y0 })
    }

    /// Grid over `support` padded on every side by `pad_fraction` of its
    /// diameter, with `nodes` nodes across the longer side.
    pub fn covering(support: &Rect, pad_fraction: f64, nodes: usize) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(PmeError::InvalidParameter(format!("need at least {MIN_NODES} nodes, got {nodes}")));
        }
        let b = support.padded(pad_fraction * support.diameter());
        let h = b.width().max(b.height()) / (nodes - 1) as f64;
        let nx = ((b.width() / h - 1e-9).ceil() as usize + 1).max(MIN_NODES);
        let ny = ((b.height() / h - 1e-9).ceil() as usize + 1).max(MIN_NODES);
        let (cx, cy) = (0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
        Self::new(nx, ny, h, cx - 0.5 * (nx - 1) as f64 * h, cy - 0.5 * (ny - 1) as f64 * h)
    }

    /// Grid with nodes on the rectangle's edges, `nx` by `ny` nodes; the spacing
    /// must agree in both directions.
    pub fn on_rect(rect: &Rect, nx: usize) -> Result<Self> {
        let h = rect.width() / (nx - 1) as f64;
        let ny = (rect.height() / h).round() as usize + 1;
        if ((ny - 1) as f64 * h - rect.height()).abs() > 1e-9 * rect.height() {
            return Err(PmeError::InvalidParameter("rectangle aspect ratio is not a multiple of the spacing".into()));
        }
        Self::new(nx, ny, h, rect.x0, rect.y0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.h
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        (self.x(k % self.nx), self.y(k / self.nx))
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.x0, self.x(self.nx - 1), self.y0, self.y(self.ny - 1))
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Fractional node coordinates of a point.
    pub fn locate(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) / self.h, (y - self.y0) / self.h)
    }

    /// Nearest node to a point, if inside the grid.
    pub fn nearest(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (fi, fj) = self.locate(x, y);
        let (i, j) = (fi.round(), fj.round());
        (i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny).then_some((i as usize, j as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_pads_support() {
        let s = Rect::new(-1.0, 1.0, -0.5, 0.5);
        let g = Grid2D::covering(&s, 0.1, 101).unwrap();
        let r = g.rect();
        let pad = 0.1 * s.diameter();
        assert!(r.x0 <= s.x0 - pad + 1e-12 && r.x1 >= s.x1 + pad - 1e-12);
        assert!(r.y0 <= s.y0 - pad + 1e-12 && r.y1 >= s.y1 + pad - 1e-12);
        assert!((0.5 * (r.x0 + r.x1)).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(Grid2D::new(8, 32, 0.1, 0.0, 0.0).is_err());
        assert!(Grid2D::new(32, 32, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn indexing() {
        let g = Grid2D::new(20, 30, 0.5, -1.0, 2.0).unwrap();
        let k = g.index(3, 7);
        assert_eq!(g.point(k), (0.5, 5.5));
        assert_eq!(g.nearest(0.6, 5.4), Some((3, 7)));
        assert!(g.is_boundary(0, 5) && !g.is_boundary(1, 1));
    }
}
