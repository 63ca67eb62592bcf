use super::{OrliczError, OrliczFunction, Profile};
use crate::quadrature::{golden_section_max, log_grid};

/// Smallest sample used for the ratio function; `ρ(0)` is read off here.
pub const RATIO_T_MIN: f64 = 1e-8;

const RATIO_SAMPLES: usize = 257;
/// Maximum tolerated growth of `ρ` between `1e-6` and `1e-8`.
const RATIO_DIVERGENCE_FACTOR: f64 = 1.5;

/// Log-spaced sample grid `n` points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl LogGridSpec {
    pub fn standard() -> Self {
        Self {
            lo: 1e-6,
            hi: 1e6,
            n: 256,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        log_grid(self.lo, self.hi, self.n)
    }
}

impl Default for LogGridSpec {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessReport {
    pub samples: Vec<(f64, f64)>,
    pub s_theta: f64,
    pub threshold: f64,
    pub dimension: usize,
    pub satisfied: bool,
    pub envelope_bounds: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub samples: Vec<(f64, f64)>,
    pub s_rho: f64,
    pub finite: bool,
}

/// `F''(t) t / F'(t)`: `ν` for φ, `μ` for ψ.
pub fn growth_rate<F: Profile + ?Sized>(f: &F, t: f64) -> Result<f64, OrliczError> {
    if !(t > 0.0) {
        return Err(OrliczError::NonPositiveArgument(t));
    }
    let d1 = f.deriv(t);
    if d1 == 0.0 {
        return Err(OrliczError::DegenerateDerivative(t));
    }
    Ok(f.growth(t))
}

/// Closeness function `θ(t) = ν(t) / μ(t)`.
pub fn closeness<F, G>(phi: &F, psi: &G, t: f64) -> Result<f64, OrliczError>
where
    F: Profile + ?Sized,
    G: Profile + ?Sized,
{
    let nu = growth_rate(phi, t)?;
    let mu = growth_rate(psi, t)?;
    if mu == 0.0 {
        return Err(OrliczError::DegenerateGrowth(t));
    }
    Ok(nu / mu)
}

/// Ratio function `ρ(t) = ψ'(t) / φ'(t)`; at `t = 0` the value at
/// [`RATIO_T_MIN`] stands in for the limit.
pub fn ratio<F, G>(phi: &F, psi: &G, t: f64) -> Result<f64, OrliczError>
where
    F: Profile + ?Sized,
    G: Profile + ?Sized,
{
    if t < 0.0 || t.is_nan() {
        return Err(OrliczError::NonPositiveArgument(t));
    }
    let t = if t == 0.0 { RATIO_T_MIN } else { t };
    let d1 = phi.deriv(t);
    if d1 == 0.0 {
        return Err(OrliczError::DegenerateDerivative(t));
    }
    Ok(psi.deriv(t) / d1)
}

/// `2(n-1)/(n-2)`, or `+∞` in the plane.
pub fn cordes_threshold(n: usize) -> f64 {
    assert!(n >= 2, "dimension must be at least 2");
    if n == 2 {
        f64::INFINITY
    } else {
        2.0 * (n as f64 - 1.0) / (n as f64 - 2.0)
    }
}

/// Samples `θ` and estimates `s_θ = sup θ` against the dimensional threshold.
pub fn check_closeness(
    phi: &OrliczFunction,
    psi: &OrliczFunction,
    n: usize,
    grid: &LogGridSpec,
) -> Result<ClosenessReport, OrliczError> {
    if n < 2 {
        return Err(OrliczError::InvalidGrid(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    if !(grid.lo > 0.0 && grid.lo <= 1e-6 && grid.hi >= 1e6 && grid.n >= 256) {
        return Err(OrliczError::InvalidGrid(format!(
            "closeness grid must cover [1e-6, 1e6] with at least 256 points, got [{}, {}] x {}",
            grid.lo, grid.hi, grid.n
        )));
    }
    let ts = grid.points();
    let mut samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        samples.push((t, closeness(phi, psi, t)?));
    }
    let (imax, &(_, mut s_theta)) = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("grid is non-empty");

    let a = ts[imax.saturating_sub(1)].ln();
    let b = ts[(imax + 1).min(ts.len() - 1)].ln();
    if b > a {
        let objective = |x: f64| closeness(phi, psi, x.exp()).unwrap_or(f64::NEG_INFINITY);
        let (_, refined) = golden_section_max(objective, a, b, 1e-10);
        s_theta = s_theta.max(refined);
    }

    let threshold = cordes_threshold(n);
    let (ep, eq) = (phi.envelope(), psi.envelope());
    Ok(ClosenessReport {
        samples,
        s_theta,
        threshold,
        dimension: n,
        satisfied: s_theta < threshold,
        envelope_bounds: ((ep.p() - 1.0) / (eq.q() - 1.0), (ep.q() - 1.0) / (eq.p() - 1.0)),
    })
}

/// Samples `ρ` on `[1e-8, 1]` and decides whether it stays bounded near 0.
pub fn check_ratio<F, G>(phi: &F, psi: &G) -> Result<RatioReport, OrliczError>
where
    F: Profile + ?Sized,
    G: Profile + ?Sized,
{
    let mut samples = Vec::with_capacity(RATIO_SAMPLES);
    let mut finite = true;
    for t in log_grid(RATIO_T_MIN, 1.0, RATIO_SAMPLES) {
        let r = ratio(phi, psi, t)?;
        finite &= r.is_finite();
        samples.push((t, r));
    }
    let s_rho = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);

    let coarse = ratio(phi, psi, 1e-6)?;
    let fine = ratio(phi, psi, RATIO_T_MIN)?;
    if !(fine <= RATIO_DIVERGENCE_FACTOR * coarse) {
        finite = false;
    }
    Ok(RatioReport { samples, s_rho, finite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::FamilySpec;
    use approx::assert_relative_eq;

    fn power(p: f64) -> OrliczFunction {
        OrliczFunction::power(p).unwrap()
    }

    #[test]
    fn growth_rate_examples() {
        assert_eq!(growth_rate(&power(3.0), 0.7).unwrap(), 2.0);
        assert_eq!(growth_rate(&OrliczFunction::quadratic(), 12.5).unwrap(), 1.0);
        assert!(matches!(
            growth_rate(&power(3.0), 0.0),
            Err(OrliczError::NonPositiveArgument(_))
        ));
        assert!(matches!(
            growth_rate(&power(3.0), -1.0),
            Err(OrliczError::NonPositiveArgument(_))
        ));
    }

    #[test]
    fn closeness_of_powers_is_constant() {
        // (p - 1) / (β + 1) with p = 3, β = 1.
        let th = closeness(&power(3.0), &power(3.0), 0.37).unwrap();
        assert_eq!(th, 1.0);
        let psi = OrliczFunction::derived_sqrt(&FamilySpec::Power { p: 4.0 }).unwrap();
        assert_relative_eq!(closeness(&power(4.0), &psi, 1.0).unwrap(), 1.5, max_relative = 1e-14);
    }

    #[test]
    fn ratio_examples() {
        assert_relative_eq!(ratio(&power(2.0), &power(3.0), 0.5).unwrap(), 0.5, max_relative = 1e-15);
        let phi = OrliczFunction::sum_powers(2.0, 3.0, 1.0).unwrap();
        assert_eq!(ratio(&phi, &phi, 2.0).unwrap(), 1.0);
        assert_relative_eq!(
            ratio(&power(3.0), &OrliczFunction::quadratic(), 0.1).unwrap(),
            10.0,
            max_relative = 1e-12
        );
        // t = 0 reads the smallest sample.
        assert_relative_eq!(
            ratio(&power(2.0), &power(3.0), 0.0).unwrap(),
            RATIO_T_MIN,
            max_relative = 1e-12
        );
    }

    #[test]
    fn boundary_case_is_not_satisfied() {
        let rep = check_closeness(&power(3.0), &power(1.5), 3, &LogGridSpec::standard()).unwrap();
        assert_eq!(rep.s_theta, 4.0);
        assert_eq!(rep.threshold, 4.0);
        assert!(!rep.satisfied);

        let plane = check_closeness(&power(3.0), &power(1.5), 2, &LogGridSpec::standard()).unwrap();
        assert!(plane.threshold.is_infinite());
        assert!(plane.satisfied);
    }

    #[test]
    fn derived_sqrt_always_close() {
        for spec in [
            FamilySpec::Power { p: 1.3 },
            FamilySpec::Power { p: 6.0 },
            FamilySpec::SumPowers { p: 2.0, q: 5.0, a: 3.0 },
            FamilySpec::PowerLog {
                p: 2.0,
                alpha: 1.0,
                c: std::f64::consts::E,
            },
        ] {
            let phi = make(&spec);
            let psi = OrliczFunction::derived_sqrt(&spec).unwrap();
            let rep = check_closeness(&phi, &psi, 10, &LogGridSpec::standard()).unwrap();
            assert!(rep.s_theta < 2.0, "{spec}: s_theta = {}", rep.s_theta);
            assert!(rep.satisfied);
        }
    }

    fn make(spec: &FamilySpec) -> OrliczFunction {
        crate::orlicz::make_family(spec).unwrap()
    }

    #[test]
    fn golden_refinement_does_not_lower_the_sample_max() {
        let phi = OrliczFunction::sum_powers(2.0, 4.0, 1.0).unwrap();
        let psi = OrliczFunction::quadratic();
        let rep = check_closeness(&phi, &psi, 3, &LogGridSpec::standard()).unwrap();
        let sampled = rep.samples.iter().map(|s| s.1).fold(0.0, f64::max);
        assert!(rep.s_theta >= sampled);
        assert!(rep.s_theta <= 3.0 + 1e-12);
    }

    #[test]
    fn grid_must_cover_standard_range() {
        let bad = LogGridSpec {
            lo: 1e-3,
            hi: 1e6,
            n: 256,
        };
        assert!(matches!(
            check_closeness(&power(2.0), &power(2.0), 3, &bad),
            Err(OrliczError::InvalidGrid(_))
        ));
    }

    #[test]
    fn ratio_finiteness_tracks_exponents() {
        // ρ = t^{β + 1 - (p - 1)} with p = 3.
        let phi = power(3.0);
        let ok = check_ratio(&phi, &power(3.5)).unwrap();
        assert!(ok.finite);
        let edge = check_ratio(&phi, &power(3.0)).unwrap();
        assert!(edge.finite);
        assert_eq!(edge.s_rho, 1.0);
        let bad = check_ratio(&phi, &power(2.9)).unwrap();
        assert!(!bad.finite);
        let quad = check_ratio(&phi, &OrliczFunction::quadratic()).unwrap();
        assert!(!quad.finite);
    }
}
