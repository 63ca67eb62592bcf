use rayon::prelude::*;

use super::calculus::same_grid;
use super::{gradient, hessian, FieldError, MatrixField, ScalarField, VectorField2};
use crate::orlicz::{MollifiedOrlicz, OrliczError, Profile};

const AUX_SAMPLES: usize = 512;

/// `V_ψ(∇u) = ψ'(s)/s ∇u` with `s = sqrt(|∇u|² + ε)`.
pub fn v_field<P: Profile + ?Sized>(psi: &P, u: &ScalarField, epsilon: f64) -> Result<VectorField2, FieldError> {
    v_from_gradient(psi, &gradient(u), epsilon)
}

/// [`v_field`] from a precomputed gradient.
pub fn v_from_gradient<P: Profile + ?Sized>(
    psi: &P,
    grad: &VectorField2,
    epsilon: f64,
) -> Result<VectorField2, FieldError> {
    if !(epsilon >= 0.0) {
        return Err(FieldError::InvalidEpsilon(epsilon));
    }
    let lower = psi.lower_domain();
    let factors: Vec<f64> = (0..grad.grid().len())
        .into_par_iter()
        .map(|k| {
            let [gx, gy] = grad.at(k);
            let s = (gx * gx + gy * gy + epsilon).sqrt();
            if s == 0.0 {
                Ok(0.0)
            } else if s < lower {
                Err(OrliczError::DomainViolation { t: s, lower })
            } else {
                Ok(psi.deriv(s) / s)
            }
        })
        .collect::<Result<_, _>>()?;
    let vx = grad.vx().iter().zip(&factors).map(|(g, a)| a * g).collect();
    let vy = grad.vy().iter().zip(&factors).map(|(g, a)| a * g).collect();
    Ok(VectorField2::from_raw(*grad.grid(), vx, vy))
}

/// `D V^ε_ψ = ψ'(s)/s (I + (μ(s) - 1) ∇u⊗∇u / s²) D²u` from the discrete
/// gradient and Hessian of `u`.
pub fn dv_field_analytic<P: Profile + ?Sized>(
    psi: &P,
    u: &ScalarField,
    epsilon: f64,
) -> Result<MatrixField, FieldError> {
    dv_from_parts(psi, &gradient(u), &hessian(u), epsilon)
}

/// [`dv_field_analytic`] from a given gradient and Hessian.
pub fn dv_from_parts<P: Profile + ?Sized>(
    psi: &P,
    grad: &VectorField2,
    hess: &MatrixField,
    epsilon: f64,
) -> Result<MatrixField, FieldError> {
    if !(epsilon > 0.0) {
        return Err(FieldError::InvalidEpsilon(epsilon));
    }
    same_grid(grad.grid(), hess.grid())?;
    let lower = psi.lower_domain();
    let nodes: Vec<[[f64; 2]; 2]> = (0..grad.grid().len())
        .into_par_iter()
        .map(|k| {
            let g = grad.at(k);
            let s2 = g[0] * g[0] + g[1] * g[1] + epsilon;
            let s = s2.sqrt();
            if s < lower {
                return Err(OrliczError::DomainViolation { t: s, lower });
            }
            let a = psi.deriv(s) / s;
            let c = (psi.growth(s) - 1.0) / s2;
            let h = hess.at(k);
            let mut out = [[0.0; 2]; 2];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, o) in row.iter_mut().enumerate() {
                    // (∇u ⊗ ∇u D²u)_ij = g_i Σ_l g_l H_lj
                    let rank_one = g[i] * (g[0] * h[0][j] + g[1] * h[1][j]);
                    *o = a * (h[i][j] + c * rank_one);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, OrliczError>>()?;
    Ok(MatrixField::from_nodes(*grad.grid(), nodes))
}

/// Bounds of the auxiliary functions sampled over `[0, c1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub i_alpha: f64,
    pub s_alpha: f64,
    pub i_beta: f64,
    pub s_beta: f64,
    pub s_gamma: f64,
}

/// The functions `a`, `b`, `α`, `β`, `γ` built from a mollified pair at
/// regularization `ε`.
#[derive(Debug, Clone)]
pub struct AuxiliaryPair {
    phi_k: MollifiedOrlicz,
    psi_k: MollifiedOrlicz,
    epsilon: f64,
    c1: f64,
    bounds: BoundConstants,
}

impl AuxiliaryPair {
    fn s(&self, t: f64) -> f64 {
        (t * t + self.epsilon).sqrt()
    }

    /// `φ_κ'(S)/S` with `S = sqrt(t² + ε)`.
    pub fn a(&self, t: f64) -> f64 {
        let s = self.s(t);
        self.phi_k.deriv(s) / s
    }

    pub fn b(&self, t: f64) -> f64 {
        let s = self.s(t);
        self.psi_k.deriv(s) / s
    }

    pub fn alpha(&self, t: f64) -> f64 {
        (self.phi_k.growth(self.s(t)) - 1.0) * t * t / (t * t + self.epsilon)
    }

    pub fn beta(&self, t: f64) -> f64 {
        (self.psi_k.growth(self.s(t)) - 1.0) * t * t / (t * t + self.epsilon)
    }

    pub fn gamma(&self, t: f64) -> f64 {
        (self.alpha(t) + 1.0) / (self.beta(t) + 1.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn bound_constants(&self) -> BoundConstants {
        self.bounds
    }

    pub fn phi_k(&self) -> &MollifiedOrlicz {
        &self.phi_k
    }

    pub fn psi_k(&self) -> &MollifiedOrlicz {
        &self.psi_k
    }
}

/// `t F'(t)/F(t)` for `F(t) = G'(S)/S`, computed from the derivative of `F`
/// rather than the closed form, so the bound checks are not tautological.
fn log_derivative<P: Profile>(g: &P, t: f64, epsilon: f64) -> f64 {
    let s2 = t * t + epsilon;
    let s = s2.sqrt();
    let f = g.deriv(s) / s;
    let df_ds = (g.deriv2(s) * s - g.deriv(s)) / s2;
    df_ds * (t / s) * t / f
}

/// Builds the auxiliary pair and checks the α, β, γ envelopes on 512 samples.
pub fn auxiliary_pair(
    phi_k: &MollifiedOrlicz,
    psi_k: &MollifiedOrlicz,
    epsilon: f64,
    c1: f64,
) -> Result<AuxiliaryPair, FieldError> {
    if !(epsilon > 0.0) {
        return Err(FieldError::InvalidEpsilon(epsilon));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(FieldError::BoundViolation(format!(
            "gradient bound c1 must be positive, got {c1}"
        )));
    }
    if phi_k.kappa() != psi_k.kappa() {
        return Err(OrliczError::InvalidMollification(format!(
            "phi and psi mollified with different radii {} and {}",
            phi_k.kappa(),
            psi_k.kappa()
        ))
        .into());
    }
    let mut pair = AuxiliaryPair {
        phi_k: phi_k.clone().with_regularization(epsilon)?,
        psi_k: psi_k.clone().with_regularization(epsilon)?,
        epsilon,
        c1,
        bounds: BoundConstants {
            i_alpha: f64::INFINITY,
            s_alpha: f64::NEG_INFINITY,
            i_beta: f64::INFINITY,
            s_beta: f64::NEG_INFINITY,
            s_gamma: f64::NEG_INFINITY,
        },
    };

    let slack = 1e-9;
    let mut b = pair.bounds;
    for k in 0..AUX_SAMPLES {
        let t = c1 * k as f64 / (AUX_SAMPLES - 1) as f64;
        let s = pair.s(t);
        let nu1 = pair.phi_k.growth(s) - 1.0;
        let mu1 = pair.psi_k.growth(s) - 1.0;
        let alpha = log_derivative(&pair.phi_k, t, epsilon);
        let beta = log_derivative(&pair.psi_k, t, epsilon);
        let gamma = (alpha + 1.0) / (beta + 1.0);
        let theta = (nu1 + 1.0) / (mu1 + 1.0);

        let scale = 1.0 + nu1.abs().max(mu1.abs());
        if alpha < nu1.min(0.0) - slack * scale || alpha > nu1.max(0.0) + slack * scale {
            return Err(FieldError::BoundViolation(format!(
                "alpha({t}) = {alpha} outside [min(nu-1,0), max(nu-1,0)] with nu-1 = {nu1}"
            )));
        }
        if beta < mu1.min(0.0) - slack * scale || beta > mu1.max(0.0) + slack * scale {
            return Err(FieldError::BoundViolation(format!(
                "beta({t}) = {beta} outside [min(mu-1,0), max(mu-1,0)] with mu-1 = {mu1}"
            )));
        }
        if gamma > theta.max(1.0) * (1.0 + slack) {
            return Err(FieldError::BoundViolation(format!(
                "gamma({t}) = {gamma} exceeds max(theta, 1) = {}",
                theta.max(1.0)
            )));
        }
        b.i_alpha = b.i_alpha.min(alpha);
        b.s_alpha = b.s_alpha.max(alpha);
        b.i_beta = b.i_beta.min(beta);
        b.s_beta = b.s_beta.max(beta);
        b.s_gamma = b.s_gamma.max(gamma);
    }
    pair.bounds = b;
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{jacobian, Grid2D};
    use crate::orlicz::{mollify, OrliczFunction};
    use crate::quadrature::convergence_slope;

    #[test]
    fn quadratic_v_field_is_gradient() {
        let g = Grid2D::square(9, -1.0, 1.0).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x.sin() + x * y * y).unwrap();
        let v = v_field(&OrliczFunction::quadratic(), &u, 0.0).unwrap();
        assert_eq!(v, gradient(&u));
    }

    #[test]
    fn unit_gradient_is_fixed_by_powers() {
        let g = Grid2D::square(5, 0.0, 1.0).unwrap();
        let u = ScalarField::from_fn(g, |x, y| 0.6 * x + 0.8 * y).unwrap();
        let v = v_field(&OrliczFunction::power(3.7).unwrap(), &u, 0.0).unwrap();
        for k in 0..g.len() {
            assert!((v.vx()[k] - 0.6).abs() < 1e-12 && (v.vy()[k] - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_points_map_to_zero() {
        let g = Grid2D::square(5, 0.0, 1.0).unwrap();
        let u = ScalarField::constant(g, 2.0);
        let v = v_field(&OrliczFunction::power(1.5).unwrap(), &u, 0.0).unwrap();
        assert!(v.vx().iter().chain(v.vy()).all(|&c| c == 0.0));
    }

    #[test]
    fn v_field_respects_mollified_domain() {
        let g = Grid2D::square(5, 0.0, 1.0).unwrap();
        let u = ScalarField::constant(g, 0.0);
        let pk = mollify(&OrliczFunction::power(3.0).unwrap(), 0.01, 32)
            .unwrap()
            .with_regularization(1e-2)
            .unwrap();
        assert!(v_field(&pk, &u, 1e-2).is_ok());
        assert!(matches!(
            v_field(&pk, &u, 1e-4),
            Err(FieldError::Orlicz(OrliczError::DomainViolation { .. }))
        ));
    }

    #[test]
    fn analytic_derivative_quadratic_and_affine() {
        let g = Grid2D::square(9, -1.0, 1.0).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x.sin() * y.cos()).unwrap();
        let dv = dv_field_analytic(&OrliczFunction::quadratic(), &u, 0.3).unwrap();
        assert_eq!(dv, hessian(&u));

        let w = ScalarField::from_fn(g, |x, y| 1.0 + 2.0 * x - y).unwrap();
        let dw = dv_field_analytic(&OrliczFunction::power(3.0).unwrap(), &w, 0.01).unwrap();
        for k in 0..g.len() {
            assert!(dw.frobenius_sq(k) < 1e-18);
        }
        assert!(matches!(
            dv_field_analytic(&OrliczFunction::quadratic(), &u, 0.0),
            Err(FieldError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn analytic_derivative_matches_finite_difference_jacobian() {
        let psi = OrliczFunction::power(3.0).unwrap();
        let eps = 0.01;
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for n in [17, 33, 65] {
            let g = Grid2D::square(n, 0.0, 1.0).unwrap();
            let u = ScalarField::from_fn(g, |x, y| x.sin() * y.cos()).unwrap();
            let an = dv_field_analytic(&psi, &u, eps).unwrap();
            let fd = jacobian(&v_field(&psi, &u, eps).unwrap());
            let (mut num, mut den) = (0.0, 0.0);
            // Nodes next to the boundary see the one-sided gradient stencil,
            // whose different error constant costs an order there.
            for j in 2..n - 2 {
                for i in 2..n - 2 {
                    let k = g.idx(i, j);
                    let (a, b) = (an.at(k), fd.at(k));
                    for r in 0..2 {
                        for c in 0..2 {
                            num += (a[r][c] - b[r][c]).powi(2);
                            den += a[r][c].powi(2);
                        }
                    }
                }
            }
            hs.push(g.h());
            errs.push((num / den).sqrt());
        }
        let slope = convergence_slope(&hs, &errs);
        assert!((slope - 2.0).abs() < 0.3, "slope {slope}, errors {errs:?}");
    }

    #[test]
    fn auxiliary_pair_examples() {
        let eps = 1e-2;
        let kappa = 0.01;
        let quad = mollify(&OrliczFunction::quadratic(), kappa, 32).unwrap();
        let pq = auxiliary_pair(&quad, &quad, eps, 5.0).unwrap();
        let b = pq.bound_constants();
        assert!(b.i_alpha.abs() < 1e-12 && b.s_alpha.abs() < 1e-12);
        assert!((b.s_gamma - 1.0).abs() < 1e-12);

        let cube = mollify(&OrliczFunction::power(3.0).unwrap(), kappa, 32).unwrap();
        let pair = auxiliary_pair(&cube, &quad, eps, 5.0).unwrap();
        assert_eq!(pair.gamma(0.0), 1.0);
        for &t in &[0.05, 0.3, 1.0, 4.0] {
            // θ = 2 up to the mollification error of ν_κ.
            let closed = (2.0 * t * t + eps) / (t * t + eps);
            assert!((pair.gamma(t) - closed).abs() < 1e-3, "t = {t}");
            assert!(pair.gamma(t) > 1.0 && pair.gamma(t) < 2.0 + 1e-3);
        }
        assert!(pair.bound_constants().s_gamma <= 2.0 + 1e-3);
    }

    #[test]
    fn auxiliary_pair_requires_matching_radius() {
        let a = mollify(&OrliczFunction::quadratic(), 0.01, 32).unwrap();
        let b = mollify(&OrliczFunction::quadratic(), 0.02, 32).unwrap();
        assert!(auxiliary_pair(&a, &b, 1e-2, 1.0).is_err());
        // κ must stay below sqrt(ε)/2.
        assert!(auxiliary_pair(&b, &b, 1e-3, 1.0).is_err());
    }
}
