use super::{BallPair, VerifyError};
use crate::fields::{MatrixField, ScalarField};

/// `|DV|` and the source density of one refinement level.
#[derive(Debug, Clone)]
pub struct GehringLevel {
    pub dv: MatrixField,
    pub src: ScalarField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GehringRow {
    pub ball_index: usize,
    pub delta: f64,
    pub coarse_ratio: f64,
    pub fine_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GehringProbe {
    pub delta_grid: Vec<f64>,
    pub rows: Vec<GehringRow>,
    /// Largest δ such that it and every smaller tested δ pass; 0 if none.
    pub delta_star: f64,
    /// Whether `avg_{B_2r} |DV|²` changed by at most 5% between the levels
    /// on every ball.
    pub integrable: bool,
}

const RATIO_CAP: f64 = 10.0;
const STABILITY_FACTOR: f64 = 2.0;
const INTEGRABILITY_TOL: f64 = 0.05;

fn avg(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// `(avg_{B_r} |DV|^{2+δ})^{1/(2+δ)} / [(avg_{B_2r} |DV|²)^{1/2} + (avg_{B_2r} |src|^{2+δ})^{1/(2+δ)}]`.
fn reverse_holder_ratio(level: &GehringLevel, ball: &BallPair, delta: f64) -> Result<f64, VerifyError> {
    let grid = level.dv.grid();
    ball.check(grid)?;
    let e = 2.0 + delta;
    let inner = ball.inner_nodes(grid);
    let outer = ball.outer_nodes(grid);
    let num = avg(inner.iter().map(|&k| level.dv.frobenius_sq(k).powf(e / 2.0))).powf(1.0 / e);
    let l2 = avg(outer.iter().map(|&k| level.dv.frobenius_sq(k))).sqrt();
    let s = avg(outer.iter().map(|&k| level.src.values()[k].abs().powf(e))).powf(1.0 / e);
    let den = l2 + s;
    Ok(if num == 0.0 && den == 0.0 { 0.0 } else { num / den })
}

/// Reverse-Hölder exponent probe over a coarse and a fine level.
///
/// A δ passes when every ratio is at most 10 on both levels and coarse and
/// fine ratios agree within a factor 2. If the L² average of `|DV|` over some
/// `B_2r` moves by more than 5% between the levels, the field is not treated
/// as square integrable and `delta_star` is 0.
pub fn gehring_probe(
    coarse: &GehringLevel,
    fine: &GehringLevel,
    balls: &[BallPair],
    delta_grid: &[f64],
) -> Result<GehringProbe, VerifyError> {
    if balls.is_empty() || delta_grid.is_empty() {
        return Err(VerifyError::InvalidInput(
            "gehring probe needs at least one ball and one delta".into(),
        ));
    }
    if delta_grid.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(VerifyError::InvalidInput(
            "delta values must be positive and finite".into(),
        ));
    }
    for lvl in [coarse, fine] {
        if lvl.src.grid() != lvl.dv.grid() {
            return Err(crate::fields::FieldError::GridMismatch.into());
        }
    }
    let mut integrable = true;
    for b in balls {
        let l2 = |lvl: &GehringLevel| -> Result<f64, VerifyError> {
            b.check(lvl.dv.grid())?;
            Ok(avg(b
                .outer_nodes(lvl.dv.grid())
                .iter()
                .map(|&k| lvl.dv.frobenius_sq(k))))
        };
        let (c, f) = (l2(coarse)?, l2(fine)?);
        let scale = c.abs().max(f.abs());
        if scale > 0.0 && ((f - c).abs() / scale > INTEGRABILITY_TOL || !f.is_finite()) {
            integrable = false;
        }
    }

    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(deltas.len() * balls.len());
    let mut delta_star = 0.0;
    let mut chain_intact = integrable;
    for &delta in &deltas {
        let mut all_ok = true;
        for (i, b) in balls.iter().enumerate() {
            let c = reverse_holder_ratio(coarse, b, delta)?;
            let f = reverse_holder_ratio(fine, b, delta)?;
            let stable = (c == 0.0 && f == 0.0) || (c > 0.0 && f > 0.0 && (f / c).max(c / f) <= STABILITY_FACTOR);
            all_ok &= c <= RATIO_CAP && f <= RATIO_CAP && stable;
            rows.push(GehringRow {
                ball_index: i,
                delta,
                coarse_ratio: c,
                fine_ratio: f,
            });
        }
        chain_intact &= all_ok;
        if chain_intact {
            delta_star = delta;
        }
    }
    Ok(GehringProbe {
        delta_grid: deltas,
        rows,
        delta_star,
        integrable,
    })
}
