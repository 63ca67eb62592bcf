use rayon::prelude::*;

use super::{Fixture, VerifyError};
use crate::fields::{
    auxiliary_pair, divergence, dv_from_parts, gradient, jacobian, v_from_gradient, FieldError, Grid2D, MatrixField,
    ScalarField, VectorField2,
};
use crate::orlicz::{cordes_threshold, MollifiedOrlicz};

/// Inputs of [`pointwise_probe`].
#[derive(Debug, Clone)]
pub struct ProbeInput {
    pub fixture: Fixture,
    pub phi_k: MollifiedOrlicz,
    pub psi_k: MollifiedOrlicz,
    pub epsilon: f64,
    pub z: [f64; 2],
    pub grid: Grid2D,
    /// Space dimension used for the closeness threshold `2(n-1)/(n-2)`.
    pub dimension: usize,
}

/// Densities of the pointwise Cordes inequality
/// `c |D V_b|² ≤ div((D V_b - tr(D V_b) I)(V_b - Z)) + C (b/a)² (div V_a)²`
/// and the constants fitted to them.
#[derive(Debug, Clone)]
pub struct PointwiseProbe {
    pub lhs_density: ScalarField,
    pub div_term: ScalarField,
    pub src_term: ScalarField,
    pub fitted_c: f64,
    pub fitted_big_c: f64,
    pub s_gamma: f64,
}

impl PointwiseProbe {
    pub fn is_positive(&self) -> bool {
        self.fitted_c > 0.0
    }
}

/// Nodes at least two steps away from the boundary.
fn probe_nodes(grid: &Grid2D) -> Vec<usize> {
    (0..grid.len())
        .filter(|&k| grid.boundary_distance(k % grid.nx(), k / grid.nx()) >= 2)
        .collect()
}

/// `(D V - tr(D V) I)(V - Z)` per node.
fn flux(v: &VectorField2, dv: &MatrixField, z: [f64; 2]) -> VectorField2 {
    let n = v.grid().len();
    let (wx, wy): (Vec<f64>, Vec<f64>) = (0..n)
        .into_par_iter()
        .map(|k| {
            let m = dv.at(k);
            let tr = m[0][0] + m[1][1];
            let d = [v.vx()[k] - z[0], v.vy()[k] - z[1]];
            (
                (m[0][0] - tr) * d[0] + m[0][1] * d[1],
                m[1][0] * d[0] + (m[1][1] - tr) * d[1],
            )
        })
        .unzip();
    VectorField2::from_raw(*v.grid(), wx, wy)
}

/// Evaluates the three densities from the closed-form derivatives of the
/// fixture and fits `C` by least squares on the nodes whose source density is
/// at least its median, then `c` as the worst node ratio.
pub fn pointwise_probe(input: &ProbeInput) -> Result<PointwiseProbe, VerifyError> {
    let grid = input.grid;
    let grad = input.fixture.sample_grad(grid);
    let hess = input.fixture.sample_hess(grid);
    let gmax = grad.norm().max_abs();
    let c1 = 1.01 * gmax.max(1e-12);
    let pair = auxiliary_pair(&input.phi_k, &input.psi_k, input.epsilon, c1)?;
    let s_gamma = pair.bound_constants().s_gamma;
    let threshold = cordes_threshold(input.dimension);
    if !(s_gamma < threshold) {
        return Err(VerifyError::ClosenessViolated { s_gamma, threshold });
    }
    let eps = input.epsilon;
    let v_b = v_from_gradient(pair.psi_k(), &grad, eps)?;
    let dv_b = dv_from_parts(pair.psi_k(), &grad, &hess, eps)?;
    let dv_a = dv_from_parts(pair.phi_k(), &grad, &hess, eps)?;

    let lhs_density = dv_b.frobenius_sq_field();
    // The flux uses the discrete Jacobian of V_b so that the constant-Z part,
    // whose divergence vanishes identically, also cancels discretely.
    let div_term = divergence(&flux(&v_b, &jacobian(&v_b), input.z));
    let src: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let [gx, gy] = grad.at(k);
            let t = (gx * gx + gy * gy).sqrt();
            let q = pair.b(t) / pair.a(t);
            let tr = dv_a.trace(k);
            q * q * tr * tr
        })
        .collect();
    let src_term = ScalarField::new(grid, src)?;

    let nodes = probe_nodes(&grid);
    let (l, d, s) = (lhs_density.values(), div_term.values(), src_term.values());
    let mut sorted: Vec<f64> = nodes.iter().map(|&k| s[k]).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
    let (mut num, mut den) = (0.0, 0.0);
    for &k in &nodes {
        if s[k] >= median && s[k] > 0.0 {
            num += s[k] * (l[k] - d[k]);
            den += s[k] * s[k];
        }
    }
    let fitted_big_c = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };

    let lmax = nodes.iter().map(|&k| l[k]).fold(0.0, f64::max);
    let fitted_c = nodes
        .iter()
        .filter(|&&k| l[k] > 1e-12 * lmax && lmax > 0.0)
        .map(|&k| (d[k] + fitted_big_c * s[k]) / l[k])
        .fold(f64::INFINITY, f64::min);
    let fitted_c = if fitted_c.is_finite() { fitted_c } else { 0.0 };

    Ok(PointwiseProbe {
        lhs_density,
        div_term,
        src_term,
        fitted_c,
        fitted_big_c,
        s_gamma,
    })
}

/// Both sides of the integrated divergence identity tested against a cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpResult {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `lhs = ∫ div((DV - tr(DV) I)(V - Z)) η` and `rhs = -∫ ⟨(DV - tr(DV) I)(V - Z), ∇η⟩`.
///
/// The divergence in `lhs` is expanded pointwise as `tr(DV²) - (tr DV)²`, which
/// holds for any smooth `V`; the gap therefore measures how consistent `DV` is
/// with `V` and the discrete gradient of `η`.
pub fn ibp_check(v: &VectorField2, dv: &MatrixField, eta: &ScalarField, z: [f64; 2]) -> Result<IbpResult, VerifyError> {
    let grid = v.grid();
    if dv.grid() != grid || eta.grid() != grid {
        return Err(FieldError::GridMismatch.into());
    }
    for k in 0..grid.len() {
        if grid.boundary_distance(k % grid.nx(), k / grid.nx()) < 2 && eta.values()[k] != 0.0 {
            return Err(VerifyError::CutoffNotCompact { index: k });
        }
    }
    let h2 = grid.h() * grid.h();
    let w = flux(v, dv, z);
    let deta = gradient(eta);
    let (lhs, rhs) = (0..grid.len())
        .into_par_iter()
        .with_min_len(4096)
        .map(|k| {
            let m = dv.at(k);
            let tr = m[0][0] + m[1][1];
            let tr_sq = m[0][0] * m[0][0] + 2.0 * m[0][1] * m[1][0] + m[1][1] * m[1][1];
            let e = eta.values()[k];
            let [ex, ey] = deta.at(k);
            ((tr_sq - tr * tr) * e, -(w.vx()[k] * ex + w.vy()[k] * ey))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (lhs, rhs) = (lhs * h2, rhs * h2);
    Ok(IbpResult {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::hessian;
    use crate::orlicz::{mollify, OrliczFunction};
    use crate::quadrature::convergence_slope;

    fn input(
        fixture: Fixture,
        phi: &OrliczFunction,
        psi: &OrliczFunction,
        kappa: f64,
        eps: f64,
        n: usize,
    ) -> ProbeInput {
        ProbeInput {
            fixture,
            phi_k: mollify(phi, kappa, 32).unwrap(),
            psi_k: mollify(psi, kappa, 32).unwrap(),
            epsilon: eps,
            z: [0.0, 0.0],
            grid: Grid2D::square(n, -1.0, 1.0).unwrap(),
            dimension: 2,
        }
    }

    #[test]
    fn saddle_identity_holds_discretely() {
        let q = OrliczFunction::quadratic();
        let p = pointwise_probe(&input(Fixture::Saddle, &q, &q, 0.01, 0.01, 33)).unwrap();
        let g = *p.lhs_density.grid();
        for k in probe_nodes(&g) {
            let (l, d) = (p.lhs_density.values()[k], p.div_term.values()[k]);
            assert!((l - 8.0).abs() < 1e-9, "{l}");
            assert!(l <= d + 1e-9, "{l} > {d}");
            assert!(p.src_term.values()[k].abs() < 1e-18);
        }
        assert!((p.fitted_c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn div_term_ignores_z_shift() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let mut inp = input(Fixture::Mixed, &phi, &phi, 0.005, 0.01, 33);
        let a = pointwise_probe(&inp).unwrap();
        inp.z = [0.7, -1.3];
        let b = pointwise_probe(&inp).unwrap();
        for k in probe_nodes(&inp.grid) {
            let (x, y) = (a.div_term.values()[k], b.div_term.values()[k]);
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn affine_densities_vanish() {
        let q = OrliczFunction::power(3.0).unwrap();
        let g = Grid2D::square(17, -1.0, 1.0).unwrap();
        let grad = VectorField2::from_fn(g, |_, _| [0.3, -0.4]).unwrap();
        let v = v_from_gradient(&q, &grad, 0.0).unwrap();
        let dv = jacobian(&v);
        let w = flux(&v, &dv, [0.1, 0.2]);
        assert!(divergence(&w).max_abs() < 1e-12);
        assert!(dv.frobenius_sq_field().max_abs() < 1e-24);
    }

    #[test]
    fn closeness_violation_is_reported() {
        let phi = OrliczFunction::power(6.0).unwrap();
        let psi = OrliczFunction::quadratic();
        let mut inp = input(Fixture::SinCos, &phi, &psi, 0.01, 0.01, 17);
        inp.dimension = 3;
        assert!(matches!(
            pointwise_probe(&inp),
            Err(VerifyError::ClosenessViolated { .. })
        ));
    }

    #[test]
    fn sincos_probe_is_positive() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let psi = OrliczFunction::derived_sqrt(phi.spec()).unwrap();
        let p = pointwise_probe(&input(Fixture::SinCos, &phi, &psi, 0.01, 0.01, 65)).unwrap();
        assert!(p.is_positive(), "c = {}, C = {}", p.fitted_c, p.fitted_big_c);
    }

    fn bump(g: Grid2D) -> ScalarField {
        ScalarField::from_fn(g, |x, y| {
            let r2 = (x * x + y * y) / 0.49;
            if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp()
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn ibp_constant_field_is_zero() {
        let g = Grid2D::square(33, -1.0, 1.0).unwrap();
        let v = VectorField2::from_fn(g, |_, _| [1.0, 2.0]).unwrap();
        let r = ibp_check(&v, &jacobian(&v), &bump(g), [0.0, 0.0]).unwrap();
        assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14);
    }

    #[test]
    fn ibp_gap_converges_for_saddle_gradient() {
        let mut hs = Vec::new();
        let mut gaps = Vec::new();
        for n in [33, 65, 129, 257] {
            let g = Grid2D::square(n, -1.0, 1.0).unwrap();
            let u = Fixture::SinCos.sample(g);
            let v = gradient(&u);
            let r = ibp_check(&v, &hessian(&u), &bump(g), [0.2, -0.1]).unwrap();
            hs.push(g.h());
            gaps.push(r.gap);
        }
        assert!(convergence_slope(&hs, &gaps) >= 1.5, "{gaps:?}");
    }

    #[test]
    fn ibp_rejects_non_compact_cutoff() {
        let g = Grid2D::square(9, -1.0, 1.0).unwrap();
        let v = VectorField2::from_fn(g, |x, y| [x, y]).unwrap();
        let eta = ScalarField::constant(g, 1.0);
        assert!(matches!(
            ibp_check(&v, &jacobian(&v), &eta, [0.0, 0.0]),
            Err(VerifyError::CutoffNotCompact { index: 0 })
        ));
    }
}
