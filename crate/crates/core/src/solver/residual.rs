use super::{DirichletProblem, SolverError};
use crate::fields::{divergence, v_field, ScalarField};

/// `div V^ε_φ(∇u) + f` at every node; vanishes for exact solutions of
/// `-div V^ε_φ(∇u) = f`.
pub fn residual_field(prob: &DirichletProblem, u: &ScalarField) -> Result<ScalarField, SolverError> {
    if u.grid() != prob.grid() {
        return Err(crate::fields::FieldError::GridMismatch.into());
    }
    let div = divergence(&v_field(prob.phi(), u, prob.epsilon())?);
    let values = div.values().iter().zip(prob.f().values()).map(|(d, f)| d + f).collect();
    Ok(ScalarField::new(*prob.grid(), values)?)
}

/// Interior max-norm of [`residual_field`].
pub fn residual_max(prob: &DirichletProblem, u: &ScalarField) -> Result<f64, SolverError> {
    Ok(residual_field(prob, u)?.interior_max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid2D;
    use crate::orlicz::OrliczFunction;
    use crate::solver::{solve, SolverConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn poisson_solution_has_tiny_residual() {
        let grid = Grid2D::square(33, -1.0, 1.0).unwrap();
        let p = DirichletProblem::from_fns(
            grid,
            OrliczFunction::quadratic(),
            |_, _| 0.0,
            |x, y| x * x - y * y,
            1e-8,
        )
        .unwrap();
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert!(residual_max(&p, &r.u).unwrap() <= 1e-9);
    }

    #[test]
    fn random_field_is_flagged() {
        let grid = Grid2D::square(17, 0.0, 1.0).unwrap();
        let p = DirichletProblem::from_fns(grid, OrliczFunction::power(3.0).unwrap(), |_, _| 1.0, |_, _| 0.0, 1e-2)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = ScalarField::new(grid, values).unwrap();
        assert!(residual_max(&p, &u).unwrap() > 0.1);
    }
}
