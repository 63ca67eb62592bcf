use std::sync::OnceLock;

use super::{cordes_threshold, OrliczError, OrliczFunction, Profile};
use crate::quadrature::{adaptive_simpson, gauss_legendre, log_grid};

pub const DEFAULT_QUADRATURE_ORDER: usize = 32;
const MIN_QUADRATURE_ORDER: usize = 16;

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (t * t - 1.0)).exp()
    }
}

/// `∫_{-1}^{1} exp(1/(t²-1)) dt`, computed once by adaptive quadrature.
pub fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| adaptive_simpson(&bump, -1.0, 1.0, 1e-15, 50))
}

/// The normalized mollifier `ζ` supported on `[-1, 1]`.
pub fn mollifier_density(t: f64) -> f64 {
    bump(t) / bump_mass()
}

/// `φ_κ = φ * ζ_κ`, with φ extended evenly to negative arguments.
#[derive(Debug, Clone)]
pub struct MollifiedOrlicz {
    base: OrliczFunction,
    kappa: f64,
    quadrature_order: usize,
    lower_domain: f64,
    /// Offsets `κ r_i` and unnormalized weights `w_i ζ(r_i)`.
    nodes: Vec<(f64, f64)>,
    total_weight: f64,
}

pub fn mollify(base: &OrliczFunction, kappa: f64, order: usize) -> Result<MollifiedOrlicz, OrliczError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(OrliczError::InvalidMollification(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if order < MIN_QUADRATURE_ORDER {
        return Err(OrliczError::InvalidMollification(format!(
            "quadrature order must be at least {MIN_QUADRATURE_ORDER}, got {order}"
        )));
    }
    let raw: Vec<(f64, f64)> = gauss_legendre(order)
        .into_iter()
        .map(|(r, w)| (kappa * r, w * bump(r)))
        .collect();
    // Dividing by the discrete mass keeps constants and linear functions exact.
    let total_weight: f64 = raw.iter().map(|n| n.1).sum();
    Ok(MollifiedOrlicz {
        base: base.clone(),
        kappa,
        quadrature_order: order,
        lower_domain: kappa,
        nodes: raw,
        total_weight,
    })
}

impl MollifiedOrlicz {
    pub fn base(&self) -> &OrliczFunction {
        &self.base
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    /// Restricts the valid domain to `t >= √ε / 2` for use with regularization `ε`.
    pub fn with_regularization(mut self, epsilon: f64) -> Result<Self, OrliczError> {
        if !(epsilon > 0.0) {
            return Err(OrliczError::InvalidMollification(format!(
                "regularization must be positive, got {epsilon}"
            )));
        }
        let half = 0.5 * epsilon.sqrt();
        if self.kappa >= half {
            return Err(OrliczError::InvalidMollification(format!(
                "kappa = {} must be below sqrt(eps)/2 = {half}",
                self.kappa
            )));
        }
        self.lower_domain = half;
        Ok(self)
    }

    fn check(&self, t: f64) -> Result<(), OrliczError> {
        if t < self.lower_domain || t.is_nan() {
            Err(OrliczError::DomainViolation {
                t,
                lower: self.lower_domain,
            })
        } else {
            Ok(())
        }
    }

    pub fn try_value(&self, t: f64) -> Result<f64, OrliczError> {
        self.check(t)?;
        Ok(self.value(t))
    }

    pub fn try_deriv(&self, t: f64) -> Result<f64, OrliczError> {
        self.check(t)?;
        Ok(self.deriv(t))
    }

    pub fn try_deriv2(&self, t: f64) -> Result<f64, OrliczError> {
        self.check(t)?;
        Ok(self.deriv2(t))
    }

    fn convolve(&self, t: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(s, w)| w * g(t - s)).sum::<f64>() / self.total_weight
    }
}

impl Profile for MollifiedOrlicz {
    fn label(&self) -> String {
        format!("{}~{}", self.base.name(), self.kappa)
    }

    fn value(&self, t: f64) -> f64 {
        self.convolve(t, |x| self.base.value(x.abs()))
    }

    fn deriv(&self, t: f64) -> f64 {
        self.convolve(t, |x| x.signum() * self.base.deriv(x.abs()))
    }

    fn deriv2(&self, t: f64) -> f64 {
        self.convolve(t, |x| self.base.deriv2(x.abs()))
    }

    fn lower_domain(&self) -> f64 {
        self.lower_domain
    }
}

/// Outcome of the growth-transfer search for mollified pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCheck {
    /// Largest tested radius for which the transferred bounds hold.
    pub kappa0: f64,
    /// Sampled range of `ν_κ` at `kappa0`.
    pub nu_range: (f64, f64),
    /// Sampled maximum of `θ_κ` at `kappa0`.
    pub theta_max: f64,
    /// `(s_θ + threshold) / 2`, or `+∞` in the plane.
    pub theta_cap: f64,
}

const TRANSFER_SAMPLES: usize = 64;
const TRANSFER_BISECTIONS: usize = 40;

/// Finds `κ₀` such that for `κ <= κ₀` the mollified pair keeps
/// `ν_κ ∈ [(p-1)/2, q]` and `θ_κ <= (s_θ + 2(n-1)/(n-2))/2` on `[√ε, M]`.
#[allow(clippy::too_many_arguments)]
pub fn find_transfer_radius(
    phi: &OrliczFunction,
    psi: &OrliczFunction,
    s_theta: f64,
    n: usize,
    epsilon: f64,
    m: f64,
    order: usize,
) -> Result<TransferCheck, OrliczError> {
    let lo_t = epsilon.sqrt();
    if !(m > lo_t) {
        return Err(OrliczError::InvalidGrid(format!("need M > sqrt(eps), got M = {m}")));
    }
    let ts = log_grid(lo_t, m, TRANSFER_SAMPLES);
    let cap = 0.5 * (s_theta + cordes_threshold(n));
    let env = phi.envelope();

    // ((ν_min, ν_max), max θ) over the transfer window, or None if out of range.
    type Window = Option<((f64, f64), f64)>;
    let probe = |kappa: f64| -> Result<Window, OrliczError> {
        let pk = mollify(phi, kappa, order)?;
        let qk = mollify(psi, kappa, order)?;
        let mut nu_min = f64::INFINITY;
        let mut nu_max = f64::NEG_INFINITY;
        let mut th_max = f64::NEG_INFINITY;
        for &t in &ts {
            let nu = pk.growth(t);
            let th = nu / qk.growth(t);
            nu_min = nu_min.min(nu);
            nu_max = nu_max.max(nu);
            th_max = th_max.max(th);
        }
        let ok = nu_min >= 0.5 * (env.p() - 1.0) && nu_max <= env.q() && th_max <= cap;
        Ok(ok.then_some(((nu_min, nu_max), th_max)))
    };

    let k_max = 0.5 * lo_t * (1.0 - 1e-12);
    if let Some((nu_range, theta_max)) = probe(k_max)? {
        return Ok(TransferCheck {
            kappa0: k_max,
            nu_range,
            theta_max,
            theta_cap: cap,
        });
    }
    let mut lo = k_max * 2f64.powi(-20);
    let mut best = probe(lo)?
        .ok_or_else(|| OrliczError::InvalidMollification(format!("growth transfer fails even at kappa = {lo:e}")))?;
    let mut hi = k_max;
    for _ in 0..TRANSFER_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        match probe(mid)? {
            Some(found) => {
                lo = mid;
                best = found;
            }
            None => hi = mid,
        }
    }
    Ok(TransferCheck {
        kappa0: lo,
        nu_range: best.0,
        theta_max: best.1,
        theta_cap: cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::FamilySpec;
    use approx::assert_relative_eq;

    #[test]
    fn bump_mass_against_trapezoid() {
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        // The integrand vanishes with all derivatives at ±1, so the trapezoid
        // rule converges faster than any power of h.
        let trap: f64 = (1..n).map(|i| bump(-1.0 + i as f64 * h)).sum::<f64>() * h;
        assert_relative_eq!(bump_mass(), trap, epsilon = 1e-10);
        let unit: f64 = (1..n).map(|i| mollifier_density(-1.0 + i as f64 * h)).sum::<f64>() * h;
        assert!((unit - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_second_derivative_is_exact() {
        let m = mollify(&OrliczFunction::quadratic(), 0.05, 32).unwrap();
        for &t in &[0.05, 0.1, 1.0, 7.0] {
            assert_eq!(m.deriv2(t), 1.0);
            // Linear φ' is reproduced by the symmetric, normalized rule.
            assert_relative_eq!(m.deriv(t), t, max_relative = 1e-14);
        }
    }

    fn brute_force(base: &OrliczFunction, kappa: f64, t: f64) -> f64 {
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        let sum: f64 = (1..n)
            .map(|i| {
                let r = -1.0 + i as f64 * h;
                base.value((t - kappa * r).abs()) * mollifier_density(r)
            })
            .sum();
        sum * h
    }

    #[test]
    fn cubic_value_against_trapezoid_oracle() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let mut prev_err = f64::INFINITY;
        for kappa in [0.1, 0.05] {
            let m = mollify(&phi, kappa, DEFAULT_QUADRATURE_ORDER).unwrap();
            let oracle = brute_force(&phi, kappa, 1.0);
            assert_relative_eq!(m.value(1.0), oracle, max_relative = 1e-9);
            let fine = mollify(&phi, kappa, 64).unwrap();
            assert_relative_eq!(fine.value(1.0), oracle, max_relative = 1e-12);
            let err = (m.value(1.0) - phi.value(1.0)).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn sup_error_decreases_along_ladder() {
        let eps: f64 = 1.0;
        let phi = OrliczFunction::power(2.5).unwrap();
        let ts = log_grid(eps.sqrt(), 10.0, 64);
        let mut prev = [f64::INFINITY; 3];
        for k in 0..5 {
            let kappa = 0.1 * 2f64.powi(-k);
            let m = mollify(&phi, kappa, DEFAULT_QUADRATURE_ORDER).unwrap();
            let mut err = [0.0f64; 3];
            for &t in &ts {
                err[0] = err[0].max((m.value(t) - phi.value(t)).abs());
                err[1] = err[1].max((m.deriv(t) - phi.deriv(t)).abs());
                err[2] = err[2].max((m.deriv2(t) - phi.deriv2(t)).abs());
            }
            for i in 0..3 {
                assert!(err[i] < prev[i], "k = {k}, derivative {i}");
            }
            prev = err;
        }
    }

    #[test]
    fn domain_checks() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let m = mollify(&phi, 0.01, 32).unwrap();
        assert!(matches!(m.try_value(0.005), Err(OrliczError::DomainViolation { .. })));
        assert!(m.try_value(0.02).is_ok());
        assert!(m.clone().with_regularization(1e-4).is_err());
        let reg = m.with_regularization(1e-2).unwrap();
        assert_eq!(reg.lower_domain(), 0.05);
        assert!(reg.try_deriv(0.04).is_err());
        assert!(reg.try_deriv2(0.05).is_ok());
        assert!(mollify(&phi, 0.0, 32).is_err());
        assert!(mollify(&phi, 0.1, 8).is_err());
    }

    #[test]
    fn transfer_radius_keeps_bounds() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let psi = OrliczFunction::derived_sqrt(&FamilySpec::Power { p: 3.0 }).unwrap();
        let eps = 1e-2;
        let check = find_transfer_radius(&phi, &psi, 1.2, 3, eps, 10.0, 32).unwrap();
        assert!(check.kappa0 > 0.0 && check.kappa0 < 0.5 * eps.sqrt());
        assert!(check.nu_range.0 >= 1.0 - 1e-12);
        assert!(check.nu_range.1 <= 3.0);
        assert!(check.theta_max <= check.theta_cap);
    }
}
