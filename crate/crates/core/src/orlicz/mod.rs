//! Orlicz functions with (p, q) growth and the functionals of a pair (φ, ψ).
//!
//! Every evaluator implements [`Profile`], which is what the field and solver
//! code consume: a radial profile `t ↦ F(t)` with its first two derivatives.

mod family;
mod hypotheses;
mod mollify;

use thiserror::Error;

pub use family::{make_family, FamilySpec, OrliczFunction, STANDARD_GRID};
pub use hypotheses::{
    check_closeness, check_ratio, closeness, cordes_threshold, growth_rate, ratio, ClosenessReport, LogGridSpec,
    RatioReport, RATIO_T_MIN,
};
pub use mollify::{
    bump_mass, find_transfer_radius, mollifier_density, mollify, MollifiedOrlicz, TransferCheck,
    DEFAULT_QUADRATURE_ORDER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrliczError {
    #[error("argument must be positive, got t = {0}")]
    NonPositiveArgument(f64),
    #[error("derivative vanishes at t = {0}")]
    DegenerateDerivative(f64),
    #[error("growth rate vanishes at t = {0}")]
    DegenerateGrowth(f64),
    #[error("inadmissible Orlicz family: {0}")]
    InadmissibleFamily(String),
    #[error("t = {t} lies below the valid domain t >= {lower} of the mollified function")]
    DomainViolation { t: f64, lower: f64 },
    #[error("invalid mollification: {0}")]
    InvalidMollification(String),
    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),
    #[error("invalid growth envelope p = {p}, q = {q}: need 1 < p <= q < inf")]
    InvalidEnvelope { p: f64, q: f64 },
}

/// Two-sided growth bound `p - 1 <= φ''(t) t / φ'(t) <= q - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEnvelope {
    p: f64,
    q: f64,
}

impl GrowthEnvelope {
    pub fn new(p: f64, q: f64) -> Result<Self, OrliczError> {
        if !(p > 1.0 && q >= p && q.is_finite()) {
            return Err(OrliczError::InvalidEnvelope { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Whether `p - 1 - slack <= rate <= q - 1 + slack`.
    pub fn contains_rate(&self, rate: f64, slack: f64) -> bool {
        rate >= self.p - 1.0 - slack && rate <= self.q - 1.0 + slack
    }
}

/// A radial profile `t ↦ F(t)` on `[0, ∞)` with two derivatives.
///
/// Implemented by admissible Orlicz functions, their mollifications, and a few
/// deliberately inadmissible test fixtures.
pub trait Profile: Send + Sync {
    fn label(&self) -> String;
    fn value(&self, t: f64) -> f64;
    fn deriv(&self, t: f64) -> f64;
    fn deriv2(&self, t: f64) -> f64;

    /// `F''(t) t / F'(t)`, without argument checks.
    fn growth(&self, t: f64) -> f64 {
        self.deriv2(t) * t / self.deriv(t)
    }

    /// Smallest argument at which the profile may be evaluated.
    fn lower_domain(&self) -> f64 {
        0.0
    }
}

impl<P: Profile + ?Sized> Profile for &P {
    fn label(&self) -> String {
        (**self).label()
    }
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn deriv(&self, t: f64) -> f64 {
        (**self).deriv(t)
    }
    fn deriv2(&self, t: f64) -> f64 {
        (**self).deriv2(t)
    }
    fn growth(&self, t: f64) -> f64 {
        (**self).growth(t)
    }
    fn lower_domain(&self) -> f64 {
        (**self).lower_domain()
    }
}
