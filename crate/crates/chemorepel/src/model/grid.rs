use crate::error::{Error, Result};

/// Uniform cell-centered mesh over a unit-measure domain.
///
/// Every grid has total measure exactly 1: a length-1 interval in 1D, or an
/// Lx x Ly rectangle with Lx*Ly = 1 in 2D. Spatial integrals therefore equal
/// spatial means, and the homogeneous ODE limit needs no volume factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: u8,
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    dx: f64,
    dy: f64,
    cell_measure: f64,
}

impl Grid {
    /// 1D interval [0, 1] split into `n` equal cells.
    pub fn line(n: usize) -> Result<Grid> {
        if n == 0 {
            return Err(Error::domain("grid needs at least one cell per axis"));
        }
        let dx = 1.0 / n as f64;
        Ok(Grid {
            dim: 1,
            nx: n,
            ny: 1,
            lx: 1.0,
            ly: 1.0,
            dx,
            dy: 1.0,
            cell_measure: dx,
        })
    }

    /// 2D rectangle [0, lx] x [0, 1/lx] with nx x ny cells.
    pub fn rect(nx: usize, ny: usize, lx: f64) -> Result<Grid> {
        if nx == 0 || ny == 0 {
            return Err(Error::domain("grid needs at least one cell per axis"));
        }
        if !(lx.is_finite() && lx > 0.0) {
            return Err(Error::domain(format!("axis length must be positive, got {lx}")));
        }
        let ly = 1.0 / lx;
        let dx = lx / nx as f64;
        let dy = ly / ny as f64;
        let cell_measure = dx * dy;
        let grid = Grid { dim: 2, nx, ny, lx, ly, dx, dy, cell_measure };
        // cell_measure * count must reproduce |domain| = 1 up to rounding
        let total = cell_measure * (nx * ny) as f64;
        debug_assert!((total - 1.0).abs() <= 1e-14);
        Ok(grid)
    }

    pub fn dimension(&self) -> usize {
        self.dim as usize
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Row-major flat index of cell (i, j); j must be 0 in 1D.
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Center coordinates of the flat-indexed cell.
    pub fn cell_center(&self, idx: usize) -> (f64, f64) {
        debug_assert!(idx < self.cell_count());
        let i = idx % self.nx;
        let j = idx / self.nx;
        (
            (i as f64 + 0.5) * self.dx,
            if self.dim == 1 { 0.5 } else { (j as f64 + 0.5) * self.dy },
        )
    }
}
