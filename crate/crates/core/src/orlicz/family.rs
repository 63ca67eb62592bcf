use std::fmt;

use super::{GrowthEnvelope, OrliczError, Profile};
use crate::quadrature::{adaptive_simpson, log_grid};

/// Standard admissibility sample grid: 256 log-spaced points on `[1e-6, 1e6]`.
pub const STANDARD_GRID: (f64, f64, usize) = (1e-6, 1e6, 256);

/// Safety margin applied to sampled growth envelopes.
const ENVELOPE_MARGIN: f64 = 1.05;

/// Constructor description for the built-in families.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// `t^p / p`
    Power { p: f64 },
    /// `t^p log^α(c + t)`
    PowerLog { p: f64, alpha: f64, c: f64 },
    /// `t^p + a t^q`
    SumPowers { p: f64, q: f64, a: f64 },
    /// `t^2 / 2`
    Quadratic,
    /// `ψ` with `ψ'(t) = sqrt(φ'(t) t)` for the base `φ`.
    DerivedSqrt { base: Box<FamilySpec> },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Power { p } => write!(f, "power({p})"),
            FamilySpec::PowerLog { p, alpha, c } => write!(f, "power_log({p},{alpha},{c})"),
            FamilySpec::SumPowers { p, q, a } => write!(f, "sum_powers({p},{q},{a})"),
            FamilySpec::Quadratic => write!(f, "quadratic"),
            FamilySpec::DerivedSqrt { base } => write!(f, "derived_sqrt({base})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Power { p: f64 },
    PowerLog { p: f64, alpha: f64, c: f64 },
    SumPowers { p: f64, q: f64, a: f64 },
    Quadratic,
    DerivedSqrt { base: Box<OrliczFunction> },
}

/// A `C^2` Orlicz function with certified (p, q) growth.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczFunction {
    name: String,
    spec: FamilySpec,
    kind: Kind,
    envelope: GrowthEnvelope,
    deriv_at_1: f64,
}

/// Builds one of the built-in families and checks it on the standard grid.
pub fn make_family(spec: &FamilySpec) -> Result<OrliczFunction, OrliczError> {
    let inadmissible = |msg: String| Err(OrliczError::InadmissibleFamily(msg));
    let (kind, envelope) = match spec {
        FamilySpec::Power { p } => {
            if !(*p > 1.0 && p.is_finite()) {
                return inadmissible(format!("power needs p > 1, got {p}"));
            }
            (Kind::Power { p: *p }, Some(GrowthEnvelope::new(*p, *p)?))
        }
        FamilySpec::PowerLog { p, alpha, c } => {
            if !(*p > 1.0 && p.is_finite() && alpha.is_finite()) {
                return inadmissible(format!(
                    "power_log needs p > 1 and finite alpha, got p = {p}, alpha = {alpha}"
                ));
            }
            if !(*c > 1.0 && c.is_finite()) {
                return inadmissible(format!("power_log needs c > 1 so that log(c + t) > 0, got {c}"));
            }
            (
                Kind::PowerLog {
                    p: *p,
                    alpha: *alpha,
                    c: *c,
                },
                None,
            )
        }
        FamilySpec::SumPowers { p, q, a } => {
            if !(*p > 1.0 && *q >= *p && q.is_finite() && *a > 0.0 && a.is_finite()) {
                return inadmissible(format!(
                    "sum_powers needs 1 < p <= q and a > 0, got p = {p}, q = {q}, a = {a}"
                ));
            }
            (
                Kind::SumPowers { p: *p, q: *q, a: *a },
                Some(GrowthEnvelope::new(*p, *q)?),
            )
        }
        FamilySpec::Quadratic => (Kind::Quadratic, Some(GrowthEnvelope::new(2.0, 2.0)?)),
        FamilySpec::DerivedSqrt { base } => {
            let base = make_family(base)?;
            // μ = (ν + 1) / 2, so p̃ - 1 = p / 2 and q̃ - 1 = q / 2.
            let env = GrowthEnvelope::new(base.envelope.p() / 2.0 + 1.0, base.envelope.q() / 2.0 + 1.0)?;
            (Kind::DerivedSqrt { base: Box::new(base) }, Some(env))
        }
    };

    // Placeholder envelope until the sampled one is known.
    let mut f = OrliczFunction {
        name: spec.to_string(),
        spec: spec.clone(),
        kind,
        envelope: envelope.unwrap_or(GrowthEnvelope { p: 2.0, q: 2.0 }),
        deriv_at_1: 0.0,
    };
    f.deriv_at_1 = f.deriv(1.0);

    let (lo, hi, n) = STANDARD_GRID;
    let mut min_rate = f64::INFINITY;
    let mut max_rate = f64::NEG_INFINITY;
    for t in log_grid(lo, hi, n) {
        let (d1, d2, rate) = (f.deriv(t), f.deriv2(t), f.growth(t));
        if !(d1 > 0.0 && d2 > 0.0 && rate.is_finite() && rate > 0.0) {
            return inadmissible(format!(
                "{}: growth condition fails at t = {t:e} (phi' = {d1:e}, phi'' = {d2:e}, rate = {rate})",
                f.name
            ));
        }
        min_rate = min_rate.min(rate);
        max_rate = max_rate.max(rate);
    }
    if envelope.is_none() {
        f.envelope = GrowthEnvelope::new(1.0 + min_rate / ENVELOPE_MARGIN, 1.0 + max_rate * ENVELOPE_MARGIN)?;
    }
    Ok(f)
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self, OrliczError> {
        make_family(&FamilySpec::Power { p })
    }

    pub fn power_log(p: f64, alpha: f64, c: f64) -> Result<Self, OrliczError> {
        make_family(&FamilySpec::PowerLog { p, alpha, c })
    }

    pub fn sum_powers(p: f64, q: f64, a: f64) -> Result<Self, OrliczError> {
        make_family(&FamilySpec::SumPowers { p, q, a })
    }

    pub fn quadratic() -> Self {
        make_family(&FamilySpec::Quadratic).expect("quadratic is admissible")
    }

    pub fn derived_sqrt(base: &FamilySpec) -> Result<Self, OrliczError> {
        make_family(&FamilySpec::DerivedSqrt {
            base: Box::new(base.clone()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn envelope(&self) -> GrowthEnvelope {
        self.envelope
    }

    /// Cached `φ'(1)`.
    pub fn deriv_at_1(&self) -> f64 {
        self.deriv_at_1
    }
}

impl Profile for OrliczFunction {
    fn label(&self) -> String {
        self.name.clone()
    }

    fn value(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power { p } => t.powf(*p) / p,
            Kind::PowerLog { p, alpha, c } => t.powf(*p) * (c + t).ln().powf(*alpha),
            Kind::SumPowers { p, q, a } => t.powf(*p) + a * t.powf(*q),
            Kind::Quadratic => 0.5 * t * t,
            Kind::DerivedSqrt { .. } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let d = |s: f64| self.deriv(s);
                // ψ' is increasing, so t ψ'(t) bounds ψ(t) and sets a relative tolerance.
                let scale = t * self.deriv(t);
                adaptive_simpson(&d, 0.0, t, (1e-13 * scale).max(f64::MIN_POSITIVE), 60)
            }
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power { p } => t.powf(p - 1.0),
            Kind::PowerLog { p, alpha, c } => {
                let l = (c + t).ln();
                p * t.powf(p - 1.0) * l.powf(*alpha) + alpha * t.powf(*p) * l.powf(alpha - 1.0) / (c + t)
            }
            Kind::SumPowers { p, q, a } => p * t.powf(p - 1.0) + a * q * t.powf(q - 1.0),
            Kind::Quadratic => t,
            Kind::DerivedSqrt { base } => (base.deriv(t) * t).sqrt(),
        }
    }

    fn deriv2(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power { p } => (p - 1.0) * t.powf(p - 2.0),
            Kind::PowerLog { p, alpha, c } => {
                let l = (c + t).ln();
                let ct = c + t;
                p * (p - 1.0) * t.powf(p - 2.0) * l.powf(*alpha)
                    + 2.0 * p * alpha * t.powf(p - 1.0) * l.powf(alpha - 1.0) / ct
                    + alpha * t.powf(*p) * ((alpha - 1.0) * l.powf(alpha - 2.0) - l.powf(alpha - 1.0)) / (ct * ct)
            }
            Kind::SumPowers { p, q, a } => p * (p - 1.0) * t.powf(p - 2.0) + a * q * (q - 1.0) * t.powf(q - 2.0),
            Kind::Quadratic => 1.0,
            Kind::DerivedSqrt { base } => {
                let d1 = base.deriv(t);
                (base.deriv2(t) * t + d1) / (2.0 * (d1 * t).sqrt())
            }
        }
    }

    fn growth(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power { p } => p - 1.0,
            Kind::Quadratic => 1.0,
            Kind::SumPowers { p, q, a } => {
                let w = a * t.powf(q - p);
                (p * (p - 1.0) + q * (q - 1.0) * w) / (p + q * w)
            }
            Kind::PowerLog { p, alpha, c } => {
                let ct = c + t;
                let r = t / (ct * ct.ln());
                (p * (p - 1.0) + 2.0 * p * alpha * r + alpha * (alpha - 1.0) * r * r - alpha * r * t / ct)
                    / (p + alpha * r)
            }
            Kind::DerivedSqrt { base } => 0.5 * (base.growth(t) + 1.0),
        }
    }
}
