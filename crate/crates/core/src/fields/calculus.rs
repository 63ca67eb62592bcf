use rayon::prelude::*;

use super::{FieldError, Grid2D, MatrixField, ScalarField, VectorField2};

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// First derivative along a line of `n` samples at position `i`.
fn diff1(f: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

/// Second derivative; the four-point one-sided boundary stencil needs `n >= 4`.
fn diff2(f: impl Fn(usize) -> f64, i: usize, n: usize, h: f64) -> f64 {
    let h2 = h * h;
    if i == 0 {
        if n >= 4 {
            (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2
        } else {
            (f(0) - 2.0 * f(1) + f(2)) / h2
        }
    } else if i == n - 1 {
        if n >= 4 {
            (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2
        } else {
            (f(n - 1) - 2.0 * f(n - 2) + f(n - 3)) / h2
        }
    } else {
        (f(i - 1) - 2.0 * f(i) + f(i + 1)) / h2
    }
}

fn apply(grid: &Grid2D, v: &[f64], axis: Axis, second: bool) -> Vec<f64> {
    let (nx, ny, h) = (grid.nx(), grid.ny(), grid.h());
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            *o = match (axis, second) {
                (Axis::X, false) => diff1(|k| v[j * nx + k], i, nx, h),
                (Axis::Y, false) => diff1(|k| v[k * nx + i], j, ny, h),
                (Axis::X, true) => diff2(|k| v[j * nx + k], i, nx, h),
                (Axis::Y, true) => diff2(|k| v[k * nx + i], j, ny, h),
            };
        }
    });
    out
}

/// Central differences inside, second-order one-sided on the boundary.
pub fn gradient(u: &ScalarField) -> VectorField2 {
    let g = u.grid();
    VectorField2::from_raw(
        *g,
        apply(g, u.values(), Axis::X, false),
        apply(g, u.values(), Axis::Y, false),
    )
}

/// `D²u` with `m12 = ∂_y ∂_x u` and `m21 = ∂_x ∂_y u`; on interior nodes both
/// reduce to the centered cross stencil.
pub fn hessian(u: &ScalarField) -> MatrixField {
    let g = u.grid();
    let ux = apply(g, u.values(), Axis::X, false);
    let uy = apply(g, u.values(), Axis::Y, false);
    MatrixField::from_raw(
        *g,
        apply(g, u.values(), Axis::X, true),
        apply(g, &ux, Axis::Y, false),
        apply(g, &uy, Axis::X, false),
        apply(g, u.values(), Axis::Y, true),
    )
}

/// `DV` with `m_ij = ∂_j V_i`.
pub fn jacobian(v: &VectorField2) -> MatrixField {
    let g = v.grid();
    MatrixField::from_raw(
        *g,
        apply(g, v.vx(), Axis::X, false),
        apply(g, v.vx(), Axis::Y, false),
        apply(g, v.vy(), Axis::X, false),
        apply(g, v.vy(), Axis::Y, false),
    )
}

pub fn divergence(v: &VectorField2) -> ScalarField {
    let g = v.grid();
    let dx = apply(g, v.vx(), Axis::X, false);
    let dy = apply(g, v.vy(), Axis::Y, false);
    ScalarField::from_raw(*g, dx.iter().zip(&dy).map(|(a, b)| a + b).collect())
}

/// Sanity check shared by operations that combine two fields.
pub(crate) fn same_grid(a: &Grid2D, b: &Grid2D) -> Result<(), FieldError> {
    if a == b {
        Ok(())
    } else {
        Err(FieldError::GridMismatch)
    }
}
