use crate::fields::{Grid2D, MatrixField, ScalarField, VectorField2};
use crate::orlicz::Profile;

/// Closed-form scalar test fields with exact gradient and Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    /// The harmonic saddle `x² - y²`.
    Saddle,
    /// `((p-1)/p) |x|^{p/(p-1)}`, which solves `Δ_p v = 1`.
    PLaplaceProfile { p: f64 },
    /// `sin x cos y`.
    SinCos,
    /// `exp(x/2) sin(y + 1/2) + 0.3 x²`.
    Mixed,
}

/// Every fixture used by the suites, with the profile at `p = 3`.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture::Saddle,
        Fixture::PLaplaceProfile { p: 3.0 },
        Fixture::SinCos,
        Fixture::Mixed,
    ]
}

impl Fixture {
    pub fn name(&self) -> String {
        match self {
            Fixture::Saddle => "saddle".into(),
            Fixture::PLaplaceProfile { p } => format!("p_laplace_profile({p})"),
            Fixture::SinCos => "sin_cos".into(),
            Fixture::Mixed => "mixed".into(),
        }
    }

    /// Smooth fixtures are `C³` everywhere.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Fixture::PLaplaceProfile { .. })
    }

    pub fn u(&self, x: f64, y: f64) -> f64 {
        match *self {
            Fixture::Saddle => x * x - y * y,
            Fixture::PLaplaceProfile { p } => (p - 1.0) / p * x.abs().powf(p / (p - 1.0)),
            Fixture::SinCos => x.sin() * y.cos(),
            Fixture::Mixed => (0.5 * x).exp() * (y + 0.5).sin() + 0.3 * x * x,
        }
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        match *self {
            Fixture::Saddle => [2.0 * x, -2.0 * y],
            Fixture::PLaplaceProfile { p } => [x.signum() * x.abs().powf(1.0 / (p - 1.0)), 0.0],
            Fixture::SinCos => [x.cos() * y.cos(), -x.sin() * y.sin()],
            Fixture::Mixed => {
                let e = (0.5 * x).exp();
                [0.5 * e * (y + 0.5).sin() + 0.6 * x, e * (y + 0.5).cos()]
            }
        }
    }

    pub fn hess(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        match *self {
            Fixture::Saddle => [[2.0, 0.0], [0.0, -2.0]],
            Fixture::PLaplaceProfile { p } => {
                // Infinite at x = 0 when p > 2; the origin is reported as 0.
                let d = if x == 0.0 {
                    0.0
                } else {
                    x.abs().powf(1.0 / (p - 1.0) - 1.0) / (p - 1.0)
                };
                [[d, 0.0], [0.0, 0.0]]
            }
            Fixture::SinCos => {
                let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
                [[-sx * cy, -cx * sy], [-cx * sy, -sx * cy]]
            }
            Fixture::Mixed => {
                let e = (0.5 * x).exp();
                let (s, c) = ((y + 0.5).sin(), (y + 0.5).cos());
                [[0.25 * e * s + 0.6, 0.5 * e * c], [0.5 * e * c, -e * s]]
            }
        }
    }

    pub fn sample(&self, grid: Grid2D) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| self.u(x, y)).expect("fixtures are finite")
    }

    pub fn sample_grad(&self, grid: Grid2D) -> VectorField2 {
        VectorField2::from_fn(grid, |x, y| self.grad(x, y)).expect("fixtures are finite")
    }

    pub fn sample_hess(&self, grid: Grid2D) -> MatrixField {
        MatrixField::from_fn(grid, |x, y| self.hess(x, y)).expect("fixtures are finite")
    }
}

/// The unit radial field `x / |x|` (zero at the origin).
pub fn unit_radial_field(x: f64, y: f64) -> [f64; 2] {
    let r = x.hypot(y);
    if r == 0.0 {
        [0.0, 0.0]
    } else {
        [x / r, y / r]
    }
}

/// `|D(x/|x|)|²`. In the plane `D(x/|x|) = |x|^{-1}(I - x⊗x/|x|²)` is
/// `|x|^{-1}` times a rank-one projection, so the squared Frobenius norm is
/// `|x|^{-2}`.
pub fn unit_radial_density(x: f64, y: f64) -> f64 {
    1.0 / (x * x + y * y)
}

/// `ψ(t) = t`: the formal `β = -1` endpoint, for which `V_ψ(∇u) = ∇u/|∇u|`.
/// It violates the growth conditions and exists only as a counterexample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UnitSpeed;

impl Profile for UnitSpeed {
    fn label(&self) -> String {
        "unit_speed".into()
    }

    fn value(&self, t: f64) -> f64 {
        t
    }

    fn deriv(&self, _t: f64) -> f64 {
        1.0
    }

    fn deriv2(&self, _t: f64) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gradient, v_field};

    #[test]
    fn closed_form_values() {
        assert_eq!(Fixture::Saddle.grad(1.0, 1.0), [2.0, -2.0]);
        let v = Fixture::PLaplaceProfile { p: 2.0 };
        assert!((v.u(0.6, 3.0) - 0.18).abs() < 1e-15);
        assert_eq!(v.hess(0.6, 0.0)[0][0], 1.0);
        assert_eq!(unit_radial_density(0.3, 0.4), 4.0);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn derivatives_match_differences() {
        let d = 1e-5;
        for f in fixtures() {
            for &(x, y) in &[(0.3, -0.2), (-0.7, 0.45), (0.1, 0.9)] {
                let g = f.grad(x, y);
                let fx = (f.u(x + d, y) - f.u(x - d, y)) / (2.0 * d);
                let fy = (f.u(x, y + d) - f.u(x, y - d)) / (2.0 * d);
                assert!((fx - g[0]).abs() < 1e-8 && (fy - g[1]).abs() < 1e-8, "{}", f.name());
                let h = f.hess(x, y);
                for j in 0..2 {
                    let (dx, dy) = if j == 0 { (d, 0.0) } else { (0.0, d) };
                    let gp = f.grad(x + dx, y + dy);
                    let gm = f.grad(x - dx, y - dy);
                    for i in 0..2 {
                        let fd = (gp[i] - gm[i]) / (2.0 * d);
                        assert!((fd - h[i][j]).abs() < 1e-7, "{} H[{i}][{j}]", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn unit_speed_on_saddle_normalizes_the_gradient() {
        let g = Grid2D::square(11, -1.0, 1.0).unwrap();
        let u = Fixture::Saddle.sample(g);
        let v = v_field(&UnitSpeed, &u, 0.0).unwrap();
        let du = gradient(&u);
        for k in 0..g.len() {
            let (x, y) = g.coords(k);
            let r = x.hypot(y);
            if r < 1e-12 {
                // rounding leaves a tiny gradient at the saddle point
                assert!(v.vx()[k].hypot(v.vy()[k]) <= 1.0 + 1e-12);
            } else {
                // Gradients of the saddle are exact, so V = (x, -y)/|x|.
                assert!((v.vx()[k] - x / r).abs() < 1e-12 && (v.vy()[k] + y / r).abs() < 1e-12);
                assert!((v.vx()[k].hypot(v.vy()[k]) - 1.0).abs() < 1e-12);
                assert!(du.at(k)[0] != 0.0 || du.at(k)[1] != 0.0);
            }
        }
    }
}
