//! Numerical laboratory for the Orlicz–Laplace equation
//! `-div(φ'(|∇u|)/|∇u| ∇u) = f`.
//!
//! The crate is split along the workflow:
//!
//! * [`orlicz`]: Orlicz functions with (p, q) growth, the closeness and ratio
//!   functionals of a pair (φ, ψ), and one-dimensional mollification.
//! * [`fields`]: uniform-grid scalar/vector/matrix fields, finite-difference
//!   calculus, the nonlinear gradient fields `V_ψ(∇u)` and their derivative.
//! * [`solver`]: damped Newton minimization of the ε-regularized discrete
//!   energy for the Dirichlet problem.
//! * [`verify`]: Caccioppoli-type estimates, the pointwise Cordes probe,
//!   integration-by-parts consistency and the reverse-Hölder probe.

pub mod fields;
pub mod orlicz;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use fields::{Grid2D, MatrixField, ScalarField, VectorField2};
pub use solver::{DirichletProblem, SolveResult, SolverConfig};

pub use orlicz::{FamilySpec, GrowthEnvelope, MollifiedOrlicz, OrliczFunction, Profile};
pub use verify::{BallPair, CaccioppoliReport};
