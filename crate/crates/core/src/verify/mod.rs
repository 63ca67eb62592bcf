//! Empirical checks of second-order estimates for `V_ψ(∇u)`: Caccioppoli-type
//! inequalities, the pointwise Cordes probe, integration-by-parts consistency
//! and a reverse-Hölder exponent probe.

mod caccioppoli;
mod fixtures;
mod gehring;
mod probe;

use thiserror::Error;

use crate::fields::{FieldError, Grid2D};
use crate::orlicz::OrliczError;
use crate::solver::SolverError;

pub use caccioppoli::{
    caccioppoli, caccioppoli_from_fields, caccioppoli_suite, judge, source_density, CaccioppoliReport, Expectation,
    LevelData, SuiteVerdict,
};
pub use fixtures::{fixtures, unit_radial_density, unit_radial_field, Fixture, UnitSpeed};
pub use gehring::{gehring_probe, GehringLevel, GehringProbe, GehringRow};
pub use probe::{ibp_check, pointwise_probe, IbpResult, PointwiseProbe, ProbeInput};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("ball B_2r(({x}, {y}), {r2}) does not fit inside the grid with a 2h margin")]
    BallOutOfDomain { x: f64, y: f64, r2: f64 },
    #[error("mollified pair violates closeness: s_gamma = {s_gamma} >= {threshold}")]
    ClosenessViolated { s_gamma: f64, threshold: f64 },
    #[error("cutoff is non-zero at node {index} inside the 2-node boundary collar")]
    CutoffNotCompact { index: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Concentric balls `B_r ⊂ B_2r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPair {
    pub center: (f64, f64),
    pub r: f64,
}

impl BallPair {
    pub fn new(center: (f64, f64), r: f64) -> Result<Self, VerifyError> {
        if !(r > 0.0 && r.is_finite() && center.0.is_finite() && center.1.is_finite()) {
            return Err(VerifyError::InvalidInput(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        Ok(Self { center, r })
    }

    /// Checks that `B_2r` stays at least `2h` away from the grid boundary.
    pub fn check(&self, grid: &Grid2D) -> Result<(), VerifyError> {
        let (x0, y0) = grid.origin();
        let x1 = grid.x(grid.nx() - 1);
        let y1 = grid.y(grid.ny() - 1);
        let reach = 2.0 * self.r + 2.0 * grid.h();
        let (cx, cy) = self.center;
        if cx - reach < x0 || cx + reach > x1 || cy - reach < y0 || cy + reach > y1 {
            return Err(VerifyError::BallOutOfDomain {
                x: cx,
                y: cy,
                r2: 2.0 * self.r,
            });
        }
        Ok(())
    }

    /// Flat indices of nodes inside the closed ball of the given radius.
    pub fn nodes(&self, grid: &Grid2D, radius: f64) -> Vec<usize> {
        let r2 = radius * radius * (1.0 + 1e-12);
        (0..grid.len())
            .filter(|&k| {
                let (x, y) = grid.coords(k);
                let (dx, dy) = (x - self.center.0, y - self.center.1);
                dx * dx + dy * dy <= r2
            })
            .collect()
    }

    pub fn inner_nodes(&self, grid: &Grid2D) -> Vec<usize> {
        self.nodes(grid, self.r)
    }

    pub fn outer_nodes(&self, grid: &Grid2D) -> Vec<usize> {
        self.nodes(grid, 2.0 * self.r)
    }
}

impl std::fmt::Display for BallPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} {}; {})", self.center.0, self.center.1, self.r)
    }
}
