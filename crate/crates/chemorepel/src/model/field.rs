use crate::error::{Error, Result};
use crate::model::grid::Grid;

/// Cell-averaged scalar field aligned with a [`Grid`], stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn constant(grid: &Grid, value: f64) -> Field {
        Field { values: vec![value; grid.cell_count()] }
    }

    /// Sample a function of the cell-center coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = (0..grid.cell_count())
            .map(|idx| {
                let (x, y) = grid.cell_center(idx);
                f(x, y)
            })
            .collect();
        Field { values }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.cell_count() {
            return Err(Error::shape(format!(
                "field has {} values but the grid has {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(Field { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Check that a field matches the grid and contains only finite values.
/// Every consuming operation calls this; NaN/Inf never propagate silently.
pub(crate) fn check_field(field: &Field, grid: &Grid, what: &str) -> Result<()> {
    if field.len() != grid.cell_count() {
        return Err(Error::shape(format!(
            "{what}: field has {} values but the grid has {} cells",
            field.len(),
            grid.cell_count()
        )));
    }
    for (idx, v) in field.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::numeric(format!("{what}: non-finite value {v} at cell {idx}")));
        }
    }
    Ok(())
}

/// Spatial integral; on unit-measure grids this is also the spatial mean.
pub fn integral(field: &Field, grid: &Grid) -> Result<f64> {
    check_field(field, grid, "integral")?;
    Ok(field.values().iter().sum::<f64>() * grid.cell_measure())
}

/// Integral of the square of the field.
pub fn l2_norm_sq(field: &Field, grid: &Grid) -> Result<f64> {
    check_field(field, grid, "l2_norm_sq")?;
    Ok(field.values().iter().map(|v| v * v).sum::<f64>() * grid.cell_measure())
}

/// Discrete Dirichlet energy: squared value jumps across interior faces
/// divided by the axis spacing, weighted by the face-dual measure. Boundary
/// faces carry zero flux, matching the homogeneous Neumann conditions the
/// solver imposes, so they contribute nothing.
pub fn grad_l2_sq(field: &Field, grid: &Grid) -> Result<f64> {
    check_field(field, grid, "grad_l2_sq")?;
    let (nx, ny) = (grid.nx(), grid.ny());
    if nx < 2 && (grid.dimension() == 1 || ny < 2) {
        return Err(Error::domain("grad_l2_sq needs at least 2 cells along some axis"));
    }
    let v = field.values();
    let mut acc = 0.0;
    // x-faces: dual measure dx*dy, slope jump/dx
    if nx >= 2 {
        let w = grid.cell_measure() / (grid.dx() * grid.dx());
        for j in 0..ny {
            for i in 0..nx - 1 {
                let jump = v[grid.index(i + 1, j)] - v[grid.index(i, j)];
                acc += jump * jump * w;
            }
        }
    }
    // y-faces (2D only)
    if grid.dimension() == 2 && ny >= 2 {
        let w = grid.cell_measure() / (grid.dy() * grid.dy());
        for j in 0..ny - 1 {
            for i in 0..nx {
                let jump = v[grid.index(i, j + 1)] - v[grid.index(i, j)];
                acc += jump * jump * w;
            }
        }
    }
    Ok(acc)
}

/// Apply the zero-Neumann Laplacian stencil (3-point in 1D, 5-point in 2D)
/// into a caller-provided buffer. Boundary neighbours are reflected, so the
/// second difference at a wall uses the wall cell itself; this is the one
/// stencil shared by the implicit solver and the diagnostics.
pub fn neumann_laplacian_into(values: &[f64], grid: &Grid, out: &mut [f64]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    debug_assert_eq!(values.len(), grid.cell_count());
    debug_assert_eq!(out.len(), grid.cell_count());
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.index(i, j);
            let c = values[idx];
            let left = if i > 0 { values[grid.index(i - 1, j)] } else { c };
            let right = if i + 1 < nx { values[grid.index(i + 1, j)] } else { c };
            out[idx] = (left - 2.0 * c + right) * inv_dx2;
        }
    }
    if grid.dimension() == 2 {
        let inv_dy2 = 1.0 / (grid.dy() * grid.dy());
        for j in 0..ny {
            for i in 0..nx {
                let idx = grid.index(i, j);
                let c = values[idx];
                let down = if j > 0 { values[grid.index(i, j - 1)] } else { c };
                let up = if j + 1 < ny { values[grid.index(i, j + 1)] } else { c };
                out[idx] += (down - 2.0 * c + up) * inv_dy2;
            }
        }
    }
}

/// Zero-Neumann Laplacian of a field as a fresh value vector.
pub fn neumann_laplacian(field: &Field, grid: &Grid) -> Result<Vec<f64>> {
    check_field(field, grid, "neumann_laplacian")?;
    let mut out = vec![0.0; field.len()];
    neumann_laplacian_into(field.values(), grid, &mut out);
    Ok(out)
}
