//! Shared inputs for the criterion benchmarks.

use orlicz_lab::{DirichletProblem, Grid2D, OrliczFunction, SolverConfig};

/// p = 3 saddle problem with a unit source on an `n x n` grid of [-1, 1]^2.
pub fn saddle_problem(n: usize) -> DirichletProblem {
    let grid = Grid2D::square(n, -1.0, 1.0).expect("valid grid");
    DirichletProblem::from_fns(
        grid,
        OrliczFunction::power(3.0).expect("valid p"),
        |_, _| 1.0,
        |x, y| x * x - y * y,
        1e-6,
    )
    .expect("valid problem")
}

pub fn continuation() -> SolverConfig {
    SolverConfig {
        epsilon_schedule: vec![1e-2, 1e-4, 1e-6],
        ..Default::default()
    }
}
