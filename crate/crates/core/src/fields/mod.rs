//! Uniform-grid discrete fields and finite-difference calculus.
//!
//! Nodes are stored row-major, y-major and x-minor: node `(i, j)` sits at
//! `(x0 + i h, y0 + j h)` and has flat index `j * nx + i`.

mod calculus;
mod io;
mod mollify;
mod nonlinear;

use thiserror::Error;

use crate::orlicz::OrliczError;

pub use calculus::{divergence, gradient, hessian, jacobian};
pub use io::{read_field, read_field_file, write_field, write_field_file, AnyField, OLF1_MAGIC};
pub use mollify::mollify_field;
pub use nonlinear::{
    auxiliary_pair, dv_field_analytic, dv_from_parts, v_field, v_from_gradient, AuxiliaryPair, BoundConstants,
};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid needs at least 3x3 nodes, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("invalid grid spacing h = {0}")]
    InvalidSpacing(f64),
    #[error("field has {got} values, grid needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("kernel radius {delta} is under-resolved on spacing h = {h} (need delta >= 2h)")]
    KernelUnderResolved { delta: f64, h: f64 },
    #[error("regularization must satisfy epsilon > 0 here, got {0}")]
    InvalidEpsilon(f64),
    #[error("auxiliary bound violated: {0}")]
    BoundViolation(String),
    #[error("malformed OLF1 data: {0}")]
    Format(String),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform node grid with equal spacing in both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    h: f64,
    origin: (f64, f64),
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, origin: (f64, f64)) -> Result<Self, FieldError> {
        if nx < 3 || ny < 3 {
            return Err(FieldError::GridTooSmall { nx, ny });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(FieldError::InvalidSpacing(h));
        }
        Ok(Self { nx, ny, h, origin })
    }

    /// `n x n` nodes covering `[lo, hi]²`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self, FieldError> {
        Self::new(n, n, (hi - lo) / (n as f64 - 1.0), (lo, lo))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.h
    }

    /// Coordinates of the node with flat index `k`.
    pub fn coords(&self, k: usize) -> (f64, f64) {
        (self.x(k % self.nx), self.y(k / self.nx))
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Distance in nodes from `(i, j)` to the nearest boundary line.
    pub fn boundary_distance(&self, i: usize, j: usize) -> usize {
        i.min(j).min(self.nx - 1 - i).min(self.ny - 1 - j)
    }

    /// The grid with `m` nodes removed on every side.
    pub fn shrink(&self, m: usize) -> Result<Self, FieldError> {
        let nx = self.nx.saturating_sub(2 * m);
        let ny = self.ny.saturating_sub(2 * m);
        Self::new(nx, ny, self.h, (self.x(m), self.y(m)))
    }
}

fn check_values(grid: &Grid2D, values: &[f64]) -> Result<(), FieldError> {
    if values.len() != grid.len() {
        return Err(FieldError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(FieldError::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self, FieldError> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm over nodes off the boundary.
    pub fn interior_max_abs(&self) -> f64 {
        self.max_abs_with_margin(1)
    }

    /// Max-norm over nodes at least `margin` nodes from the boundary.
    pub fn max_abs_with_margin(&self, margin: usize) -> f64 {
        let g = &self.grid;
        let mut m = 0.0f64;
        for j in 0..g.ny {
            for i in 0..g.nx {
                if g.boundary_distance(i, j) >= margin {
                    m = m.max(self.values[g.idx(i, j)].abs());
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    grid: Grid2D,
    vx: Vec<f64>,
    vy: Vec<f64>,
}

impl VectorField2 {
    pub fn new(grid: Grid2D, vx: Vec<f64>, vy: Vec<f64>) -> Result<Self, FieldError> {
        check_values(&grid, &vx)?;
        check_values(&grid, &vy)?;
        Ok(Self { grid, vx, vy })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [f64; 2]) -> Result<Self, FieldError> {
        let (vx, vy) = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                let v = f(x, y);
                (v[0], v[1])
            })
            .unzip();
        Self::new(grid, vx, vy)
    }

    pub(crate) fn from_raw(grid: Grid2D, vx: Vec<f64>, vy: Vec<f64>) -> Self {
        Self { grid, vx, vy }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn vx(&self) -> &[f64] {
        &self.vx
    }

    pub fn vy(&self) -> &[f64] {
        &self.vy
    }

    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.vx[k], self.vy[k]]
    }

    /// Pointwise Euclidean norm.
    pub fn norm(&self) -> ScalarField {
        let values = self.vx.iter().zip(&self.vy).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField::from_raw(self.grid, values)
    }
}

/// 2x2 matrix field; `m_ij` is row `i`, column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    grid: Grid2D,
    m11: Vec<f64>,
    m12: Vec<f64>,
    m21: Vec<f64>,
    m22: Vec<f64>,
}

impl MatrixField {
    pub fn new(grid: Grid2D, m11: Vec<f64>, m12: Vec<f64>, m21: Vec<f64>, m22: Vec<f64>) -> Result<Self, FieldError> {
        for c in [&m11, &m12, &m21, &m22] {
            check_values(&grid, c)?;
        }
        Ok(Self {
            grid,
            m11,
            m12,
            m21,
            m22,
        })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [[f64; 2]; 2]) -> Result<Self, FieldError> {
        let n = grid.len();
        let (mut m11, mut m12, mut m21, mut m22) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for k in 0..n {
            let (x, y) = grid.coords(k);
            let m = f(x, y);
            m11.push(m[0][0]);
            m12.push(m[0][1]);
            m21.push(m[1][0]);
            m22.push(m[1][1]);
        }
        Self::new(grid, m11, m12, m21, m22)
    }

    /// The constant identity field.
    pub fn identity(grid: Grid2D) -> Self {
        let n = grid.len();
        Self::from_raw(grid, vec![1.0; n], vec![0.0; n], vec![0.0; n], vec![1.0; n])
    }

    pub(crate) fn from_raw(grid: Grid2D, m11: Vec<f64>, m12: Vec<f64>, m21: Vec<f64>, m22: Vec<f64>) -> Self {
        Self {
            grid,
            m11,
            m12,
            m21,
            m22,
        }
    }

    pub(crate) fn from_nodes(grid: Grid2D, nodes: Vec<[[f64; 2]; 2]>) -> Self {
        let m11 = nodes.iter().map(|m| m[0][0]).collect();
        let m12 = nodes.iter().map(|m| m[0][1]).collect();
        let m21 = nodes.iter().map(|m| m[1][0]).collect();
        let m22 = nodes.iter().map(|m| m[1][1]).collect();
        Self::from_raw(grid, m11, m12, m21, m22)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn components(&self) -> [&[f64]; 4] {
        [&self.m11, &self.m12, &self.m21, &self.m22]
    }

    pub fn at(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.m11[k], self.m12[k]], [self.m21[k], self.m22[k]]]
    }

    pub fn trace(&self, k: usize) -> f64 {
        self.m11[k] + self.m22[k]
    }

    /// Squared Frobenius norm at node `k`.
    pub fn frobenius_sq(&self, k: usize) -> f64 {
        self.m11[k].powi(2) + self.m12[k].powi(2) + self.m21[k].powi(2) + self.m22[k].powi(2)
    }

    /// Pointwise squared Frobenius norm.
    pub fn frobenius_sq_field(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, (0..self.grid.len()).map(|k| self.frobenius_sq(k)).collect())
    }
}
