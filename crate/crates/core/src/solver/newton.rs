use super::energy::{det_dot, energy_unchecked, gradient_unchecked, HessianOperator};
use super::{DirichletProblem, SolveResult, SolverConfig, SolverError};
use crate::fields::ScalarField;

const MAX_HALVINGS: usize = 60;
/// Relative size of `gᵀd` below which energy differences are roundoff.
const ROUNDOFF_SLOPE: f64 = 1e-11;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Jacobi-preconditioned conjugate gradients for `H x = b`. Returns the
/// iterate reached when the relative residual falls below `rel_tol` or the
/// iteration cap is hit.
fn pcg(op: &HessianOperator, b: &[f64], rel_tol: f64, max_iters: usize) -> Result<Vec<f64>, SolverError> {
    let n = b.len();
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = det_dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = det_dot(&r, &z);
    for _ in 0..max_iters {
        let q = op.apply(&p);
        let pq = det_dot(&p, &q);
        if !(pq > 0.0) {
            return Err(SolverError::LinearSolveFailure(format!(
                "Newton matrix is not positive definite (pᵀHp = {pq:e})"
            )));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if det_dot(&r, &r).sqrt() <= rel_tol * b_norm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = det_dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::LinearSolveFailure(
            "conjugate gradients produced non-finite values".into(),
        ));
    }
    Ok(x)
}

struct Stage<'a> {
    prob: &'a DirichletProblem,
    cfg: &'a SolverConfig,
    eps: f64,
}

struct StageOutcome {
    converged: bool,
    iterations: usize,
    residuals: Vec<f64>,
    energies: Vec<f64>,
    steps: Vec<f64>,
}

enum Step {
    Accepted {
        u: Vec<f64>,
        energy: f64,
        grad: Vec<f64>,
        t: f64,
    },
    Rejected,
}

impl Stage<'_> {
    fn energy(&self, u: &[f64]) -> f64 {
        energy_unchecked(self.prob, u, self.eps)
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        gradient_unchecked(self.prob, u, self.eps)
    }

    /// Armijo backtracking along `d`. When the predicted decrease is below
    /// what the energy can resolve in floating point, the energy test is
    /// replaced by a decrease of the gradient max-norm.
    fn line_search(&self, u: &[f64], e0: f64, g0: &[f64], d: &[f64]) -> Step {
        let slope = det_dot(g0, d);
        if !(slope < 0.0) {
            return Step::Rejected;
        }
        let trial = |t: f64| -> Vec<f64> { u.iter().zip(d).map(|(a, b)| a + t * b).collect() };
        let scale = e0.abs().max(1.0);
        let roundoff = slope.abs() <= ROUNDOFF_SLOPE * scale;
        let r0 = max_abs(g0);
        let mut t = 1.0;
        for _ in 0..MAX_HALVINGS {
            let v = trial(t);
            let e = self.energy(&v);
            if roundoff {
                if e <= e0 + ROUNDOFF_SLOPE * scale {
                    let grad = self.gradient(&v);
                    if max_abs(&grad) < r0 {
                        return Step::Accepted {
                            u: v,
                            energy: e,
                            grad,
                            t,
                        };
                    }
                }
            } else if e.is_finite() && e <= e0 + self.cfg.armijo * t * slope {
                let grad = self.gradient(&v);
                return Step::Accepted {
                    u: v,
                    energy: e,
                    grad,
                    t,
                };
            }
            t *= 0.5;
        }
        Step::Rejected
    }

    fn run(&self, u: &mut Vec<f64>) -> Result<StageOutcome, SolverError> {
        let mut energy = self.energy(u);
        let mut grad = self.gradient(u);
        let mut out = StageOutcome {
            converged: false,
            iterations: 0,
            residuals: vec![max_abs(&grad)],
            energies: vec![energy],
            steps: vec![0.0],
        };
        while out.iterations < self.cfg.max_newton_iters {
            if max_abs(&grad) <= self.cfg.residual_tol {
                out.converged = true;
                break;
            }
            out.iterations += 1;
            let op = HessianOperator::new(self.prob, u, self.eps);
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let d = pcg(&op, &rhs, self.cfg.cg_rel_tol, self.cfg.cg_max_iters)?;
            let step = match self.line_search(u, energy, &grad, &d) {
                Step::Accepted { u, energy, grad, t } => Some((u, energy, grad, t)),
                Step::Rejected => self.fallback(u, energy, &grad, &op),
            };
            let Some((v, e, g, t)) = step else {
                break;
            };
            *u = v;
            energy = e;
            grad = g;
            out.residuals.push(max_abs(&grad));
            out.energies.push(energy);
            out.steps.push(t);
        }
        if max_abs(&grad) <= self.cfg.residual_tol {
            out.converged = true;
        }
        Ok(out)
    }

    /// Jacobi-preconditioned steepest descent, used when the Newton direction
    /// admits no acceptable step.
    fn fallback(&self, u: &[f64], e0: f64, g0: &[f64], op: &HessianOperator) -> Option<(Vec<f64>, f64, Vec<f64>, f64)> {
        let diag = op.diagonal();
        let mut best: Option<(Vec<f64>, f64, Vec<f64>, f64)> = None;
        let (mut cur, mut e, mut g) = (u.to_vec(), e0, g0.to_vec());
        for _ in 0..self.cfg.fallback_gd_iters {
            let d: Vec<f64> = g.iter().zip(&diag).map(|(a, b)| -a / b).collect();
            match self.line_search(&cur, e, &g, &d) {
                Step::Accepted { u, energy, grad, t } => {
                    cur = u;
                    e = energy;
                    g = grad;
                    best = Some((cur.clone(), e, g.clone(), t));
                }
                Step::Rejected => break,
            }
        }
        best
    }
}

/// Solves from the transfinite interpolation of the boundary data.
pub fn solve(prob: &DirichletProblem, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    solve_from(prob, cfg, &prob.initial_guess())
}

/// Solves starting from `initial`, whose boundary values must match the data.
/// Running out of iterations is not an error: the best iterate comes back with
/// `converged = false`.
pub fn solve_from(
    prob: &DirichletProblem,
    cfg: &SolverConfig,
    initial: &ScalarField,
) -> Result<SolveResult, SolverError> {
    cfg.validate(prob.epsilon())?;
    prob.check_boundary(initial)?;
    let schedule = if cfg.epsilon_schedule.is_empty() {
        vec![prob.epsilon()]
    } else {
        cfg.epsilon_schedule.clone()
    };
    let mut u = initial.values().to_vec();
    let mut iterations = 0;
    let mut stage_iterations = Vec::with_capacity(schedule.len());
    let mut last = None;
    for &eps in &schedule {
        let outcome = Stage { prob, cfg, eps }.run(&mut u)?;
        iterations += outcome.iterations;
        stage_iterations.push(outcome.iterations);
        last = Some(outcome);
    }
    let last = last.expect("schedule is non-empty");
    Ok(SolveResult {
        u: ScalarField::new(*prob.grid(), u)?,
        converged: last.converged,
        iterations,
        residual_history: last.residuals,
        energy_history: last.energies,
        step_history: last.steps,
        stage_iterations,
    })
}
