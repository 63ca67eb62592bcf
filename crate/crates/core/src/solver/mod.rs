//! Damped Newton minimization of the ε-regularized discrete energy
//! `E(u) = Σ_T |T| φ(sqrt(|∇u|_T² + ε)) - h² Σ f u` over P1 triangles
//! (each grid cell split along its main diagonal).

mod energy;
mod newton;
mod residual;

use thiserror::Error;

use crate::fields::{FieldError, Grid2D, ScalarField};
use crate::orlicz::OrliczFunction;

pub use energy::{discrete_energy, energy_gradient, HessianOperator};
pub use newton::{solve, solve_from};
pub use residual::{residual_field, residual_max};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("field values on the boundary do not match the Dirichlet data (node {index}: {got} vs {expected})")]
    BoundaryMismatch { index: usize, got: f64, expected: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Flat indices of the boundary nodes in node order.
pub fn boundary_indices(grid: &Grid2D) -> Vec<usize> {
    (0..grid.len())
        .filter(|&k| grid.is_boundary(k % grid.nx(), k / grid.nx()))
        .collect()
}

/// The regularized Dirichlet problem `-div(φ'(s)/s ∇u) = f`, `s² = |∇u|² + ε`,
/// with `u = g` on the boundary of the grid.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    grid: Grid2D,
    phi: OrliczFunction,
    f: ScalarField,
    g: Vec<f64>,
    epsilon: f64,
    boundary: Vec<usize>,
}

impl DirichletProblem {
    /// `g` lists boundary values in the order of [`boundary_indices`].
    pub fn new(phi: OrliczFunction, f: ScalarField, g: Vec<f64>, epsilon: f64) -> Result<Self, SolverError> {
        let grid = *f.grid();
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(SolverError::InvalidProblem(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        let boundary = boundary_indices(&grid);
        if g.len() != boundary.len() {
            return Err(SolverError::InvalidProblem(format!(
                "expected {} boundary values, got {}",
                boundary.len(),
                g.len()
            )));
        }
        if let Some(v) = g.iter().find(|v| !v.is_finite()) {
            return Err(SolverError::InvalidProblem(format!("non-finite boundary value {v}")));
        }
        Ok(Self {
            grid,
            phi,
            f,
            g,
            epsilon,
            boundary,
        })
    }

    /// Builds `f` and `g` by sampling closed-form expressions.
    pub fn from_fns(
        grid: Grid2D,
        phi: OrliczFunction,
        f: impl Fn(f64, f64) -> f64,
        g: impl Fn(f64, f64) -> f64,
        epsilon: f64,
    ) -> Result<Self, SolverError> {
        let f = ScalarField::from_fn(grid, f)?;
        let g = boundary_indices(&grid)
            .into_iter()
            .map(|k| {
                let (x, y) = grid.coords(k);
                g(x, y)
            })
            .collect();
        Self::new(phi, f, g, epsilon)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn phi(&self) -> &OrliczFunction {
        &self.phi
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn boundary_values(&self) -> &[f64] {
        &self.g
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same data at a different regularization.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, SolverError> {
        Self::new(self.phi.clone(), self.f.clone(), self.g.clone(), epsilon)
    }

    pub fn check_boundary(&self, u: &ScalarField) -> Result<(), SolverError> {
        if u.grid() != &self.grid {
            return Err(FieldError::GridMismatch.into());
        }
        for (&k, &expected) in self.boundary.iter().zip(&self.g) {
            let got = u.values()[k];
            if (got - expected).abs() > 1e-12 * (1.0 + expected.abs()) {
                return Err(SolverError::BoundaryMismatch {
                    index: k,
                    got,
                    expected,
                });
            }
        }
        Ok(())
    }

    /// Transfinite (Coons) interpolation of the boundary data into the interior.
    pub fn initial_guess(&self) -> ScalarField {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let mut v = vec![0.0; g.len()];
        for (&k, &b) in self.boundary.iter().zip(&self.g) {
            v[k] = b;
        }
        let at = |v: &[f64], i: usize, j: usize| v[j * nx + i];
        let (c00, c10, c01, c11) = (
            at(&v, 0, 0),
            at(&v, nx - 1, 0),
            at(&v, 0, ny - 1),
            at(&v, nx - 1, ny - 1),
        );
        let mut out = v.clone();
        for j in 1..ny - 1 {
            let t = j as f64 / (ny - 1) as f64;
            for i in 1..nx - 1 {
                let s = i as f64 / (nx - 1) as f64;
                out[j * nx + i] =
                    (1.0 - s) * at(&v, 0, j) + s * at(&v, nx - 1, j) + (1.0 - t) * at(&v, i, 0) + t * at(&v, i, ny - 1)
                        - ((1.0 - s) * (1.0 - t) * c00 + s * (1.0 - t) * c10 + (1.0 - s) * t * c01 + s * t * c11);
            }
        }
        ScalarField::new(*g, out).expect("interpolation of finite data is finite")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop when the max-norm of the energy gradient drops below this.
    pub residual_tol: f64,
    /// Newton iterations allowed per continuation stage.
    pub max_newton_iters: usize,
    pub armijo: f64,
    /// Strictly decreasing regularizations ending at the problem's ε; empty
    /// means a single stage.
    pub epsilon_schedule: Vec<f64>,
    /// Preconditioned gradient steps tried when a Newton direction fails.
    pub fallback_gd_iters: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            max_newton_iters: 200,
            armijo: 1e-4,
            epsilon_schedule: Vec::new(),
            fallback_gd_iters: 20,
            cg_rel_tol: 1e-8,
            cg_max_iters: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, epsilon: f64) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.residual_tol > 0.0) || !(self.cg_rel_tol > 0.0) || !(self.armijo > 0.0 && self.armijo < 0.5) {
            return bad("tolerances must be positive and the Armijo constant in (0, 1/2)".into());
        }
        if self.max_newton_iters == 0 || self.cg_max_iters == 0 {
            return bad("iteration limits must be positive".into());
        }
        if !self.epsilon_schedule.is_empty() {
            if self.epsilon_schedule.windows(2).any(|w| !(w[1] < w[0])) {
                return bad(format!(
                    "epsilon schedule must be strictly decreasing: {:?}",
                    self.epsilon_schedule
                ));
            }
            let last = *self.epsilon_schedule.last().expect("non-empty");
            if last != epsilon {
                return bad(format!("epsilon schedule ends at {last}, problem has {epsilon}"));
            }
            if self.epsilon_schedule.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                return bad("schedule entries must lie in (0, 1]".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub u: ScalarField,
    pub converged: bool,
    /// Newton iterations over all continuation stages.
    pub iterations: usize,
    /// Histories of the final stage; entry 0 is the starting iterate.
    pub residual_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub stage_iterations: Vec<usize>,
}

impl SolveResult {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::INFINITY)
    }
}
