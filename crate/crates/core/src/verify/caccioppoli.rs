use rayon::prelude::*;

use super::{BallPair, VerifyError};
use crate::fields::{
    dv_from_parts, gradient, hessian, jacobian, v_from_gradient, MatrixField, ScalarField, VectorField2,
};
use crate::orlicz::{ratio, Profile};

/// The three integrals of the Caccioppoli-type estimate over one ball pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CaccioppoliReport {
    /// `∫_{B_r} |D V_ψ|²`
    pub lhs: f64,
    /// `r^{-2} ∫_{B_2r} |V_ψ - (V_ψ)_{B_2r}|²`
    pub rhs_osc: f64,
    /// `∫_{B_2r} (ρ(|∇u|) f)²`
    pub rhs_src: f64,
    pub empirical_c: f64,
    pub h: f64,
    pub ball: BallPair,
}

/// `ρ(s) f` per node with `s = sqrt(|∇u|² + ε)`.
pub fn source_density<F, G>(
    phi: &F,
    psi: &G,
    grad: &VectorField2,
    f: &ScalarField,
    epsilon: f64,
) -> Result<ScalarField, VerifyError>
where
    F: Profile + ?Sized,
    G: Profile + ?Sized,
{
    let values = (0..grad.grid().len())
        .into_par_iter()
        .map(|k| {
            let fk = f.values()[k];
            if fk == 0.0 {
                return Ok(0.0);
            }
            let [gx, gy] = grad.at(k);
            Ok(ratio(phi, psi, (gx * gx + gy * gy + epsilon).sqrt())? * fk)
        })
        .collect::<Result<Vec<f64>, crate::orlicz::OrliczError>>()?;
    Ok(ScalarField::new(*grad.grid(), values)?)
}

/// Evaluates the estimate for a solution `u`. With `ε > 0` the derivative of
/// `V_ψ` comes from the closed-form expression, otherwise from finite
/// differences of `V_ψ`.
pub fn caccioppoli<F, G>(
    u: &ScalarField,
    phi: &F,
    psi: &G,
    f: &ScalarField,
    ball: &BallPair,
    epsilon: f64,
) -> Result<CaccioppoliReport, VerifyError>
where
    F: Profile + ?Sized,
    G: Profile + ?Sized,
{
    ball.check(u.grid())?;
    if f.grid() != u.grid() {
        return Err(crate::fields::FieldError::GridMismatch.into());
    }
    let grad = gradient(u);
    let v = v_from_gradient(psi, &grad, epsilon)?;
    let dv = if epsilon > 0.0 {
        dv_from_parts(psi, &grad, &hessian(u), epsilon)?
    } else {
        jacobian(&v)
    };
    let src = source_density(phi, psi, &grad, f, epsilon)?;
    caccioppoli_from_fields(&v, &dv, &src, ball)
}

/// Node-indicator quadrature of the three integrals for given fields.
pub fn caccioppoli_from_fields(
    v: &VectorField2,
    dv: &MatrixField,
    src: &ScalarField,
    ball: &BallPair,
) -> Result<CaccioppoliReport, VerifyError> {
    let grid = v.grid();
    if dv.grid() != grid || src.grid() != grid {
        return Err(crate::fields::FieldError::GridMismatch.into());
    }
    ball.check(grid)?;
    let h2 = grid.h() * grid.h();
    let inner = ball.inner_nodes(grid);
    let outer = ball.outer_nodes(grid);

    let lhs: f64 = inner.iter().map(|&k| dv.frobenius_sq(k)).sum::<f64>() * h2;
    let m = outer.len() as f64;
    let mean_x = outer.iter().map(|&k| v.vx()[k]).sum::<f64>() / m;
    let mean_y = outer.iter().map(|&k| v.vy()[k]).sum::<f64>() / m;
    let osc: f64 = outer
        .iter()
        .map(|&k| (v.vx()[k] - mean_x).powi(2) + (v.vy()[k] - mean_y).powi(2))
        .sum();
    let rhs_osc = osc * h2 / (ball.r * ball.r);
    let rhs_src = outer.iter().map(|&k| src.values()[k].powi(2)).sum::<f64>() * h2;
    let denom = rhs_osc + rhs_src;
    let empirical_c = if lhs == 0.0 && denom == 0.0 { 0.0 } else { lhs / denom };
    Ok(CaccioppoliReport {
        lhs,
        rhs_osc,
        rhs_src,
        empirical_c,
        h: grid.h(),
        ball: *ball,
    })
}

/// One refinement level of a suite: a computed solution and its source.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub u: ScalarField,
    pub f: ScalarField,
}

/// Reports indexed `[level][ball]`; levels are evaluated in parallel.
pub fn caccioppoli_suite<F, G>(
    phi: &F,
    psi: &G,
    levels: &[LevelData],
    balls: &[BallPair],
    epsilon: f64,
) -> Result<Vec<Vec<CaccioppoliReport>>, VerifyError>
where
    F: Profile + ?Sized,
    G: Profile + ?Sized,
{
    levels
        .par_iter()
        .map(|lvl| {
            balls
                .iter()
                .map(|b| caccioppoli(&lvl.u, phi, psi, &lvl.f, b, epsilon))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

/// What a suite is expected to show under refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    /// `empirical_c` changes by at most a factor 2 between consecutive
    /// levels, and the hypotheses of the estimate hold.
    Bounded,
    /// `lhs` grows by at least 20% per level.
    Divergent,
    /// Successive increments of `lhs` shrink, so `lhs` settles.
    LhsConverges,
    /// Successive increments of `lhs` do not shrink.
    LhsDiverges,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteVerdict {
    pub pass: bool,
    /// Per-ball outcome, in input order.
    pub per_ball: Vec<bool>,
    pub detail: String,
}

/// Judges a `[level][ball]` table against an expectation. `hypotheses_hold`
/// only matters for [`Expectation::Bounded`].
pub fn judge(expectation: Expectation, table: &[Vec<CaccioppoliReport>], hypotheses_hold: bool) -> SuiteVerdict {
    let nballs = table.first().map_or(0, |r| r.len());
    let column =
        |b: usize, f: fn(&CaccioppoliReport) -> f64| -> Vec<f64> { table.iter().map(|lvl| f(&lvl[b])).collect() };
    let mut per_ball = Vec::with_capacity(nballs);
    let mut notes = Vec::new();
    for b in 0..nballs {
        let ok = match expectation {
            Expectation::Bounded => {
                let cs = column(b, |r| r.empirical_c);
                let stable = cs.len() >= 2
                    && cs.windows(2).all(|w| {
                        let q = w[1] / w[0];
                        q.is_finite() && (0.5..=2.0).contains(&q)
                    });
                if !stable {
                    notes.push(format!("ball {b}: C = {cs:?}"));
                }
                stable && hypotheses_hold
            }
            Expectation::Divergent => {
                let l = column(b, |r| r.lhs);
                l.len() >= 2 && l.windows(2).all(|w| w[1] >= 1.2 * w[0])
            }
            Expectation::LhsConverges | Expectation::LhsDiverges => {
                let l = column(b, |r| r.lhs);
                let inc: Vec<f64> = l.windows(2).map(|w| w[1] - w[0]).collect();
                let ratios: Vec<f64> = inc.windows(2).map(|w| w[1] / w[0]).collect();
                if ratios.is_empty() {
                    false
                } else if expectation == Expectation::LhsConverges {
                    inc.windows(2).all(|w| w[1].abs() < w[0].abs())
                } else {
                    inc.iter().all(|&d| d > 0.0) && ratios.iter().all(|&q| q >= 1.0)
                }
            }
        };
        per_ball.push(ok);
    }
    if expectation == Expectation::Bounded && !hypotheses_hold {
        notes.push("hypotheses of the estimate fail".into());
    }
    SuiteVerdict {
        pass: nballs > 0 && per_ball.iter().all(|&b| b),
        per_ball,
        detail: notes.join("; "),
    }
}
