//! Per-day economy: the population increase/decrease split, the energy
//! consumption diagnostic, the wealth production rate, job-station growth,
//! and the logistic evolution of the efficiency indicator.
//!
//! All quantities here are day-scale: they are computed once per day from
//! the midday population sample and then applied with Δt = 1. Because the
//! production rate ω is constant over a day, the linear job growth step is
//! exact Euler and the efficiency ODE has a closed-form (logistic) solution,
//! which is what [`evolve_efficiency`] uses — efficiency stays in `[0,1]`
//! without any clamping.

use crate::error::ModelError;
use crate::field::{distance_weighted_double_integral, ScalarField};
use crate::grid::Grid;

/// Mass/mean summary of one simulated day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayTotals {
    /// `∫ P` at midday.
    pub mass_p_mid: f64,
    /// `∫ E` at end of day.
    pub mass_e: f64,
    /// `∫ W` at end of day.
    pub mass_w: f64,
    /// Area-weighted mean efficiency at end of day, in `[0,1]`.
    pub mean_i: f64,
    /// `∫ ωⁿ` for the day.
    pub mass_omega: f64,
}

/// Everything the day loop derives from one day's midday sample.
#[derive(Debug, Clone)]
pub struct DayDiagnostics {
    /// Day index `n` (0-based).
    pub day: usize,
    /// Energy time-density `φⁿ ≥ 0`, constant over `[n, n+1)`.
    pub phi: f64,
    /// Wealth production rate `ωⁿ ≥ 0`, constant over the day.
    pub omega: ScalarField,
    /// Where population increased between morning and midday.
    pub incr: ScalarField,
    /// Where population decreased between morning and midday.
    pub decr: ScalarField,
    /// Day summary masses and means.
    pub totals: DayTotals,
}

/// Split the morning→midday population change into its non-negative parts:
/// `incr = max(P_mid − P_morning, 0)`, `decr = max(P_morning − P_mid, 0)`.
///
/// The two outputs have disjoint supports and satisfy
/// `incr − decr = P_mid − P_morning` exactly, cell by cell.
pub fn split_population_change(
    p_mid: &ScalarField,
    p_morning: &ScalarField,
) -> Result<(ScalarField, ScalarField), ModelError> {
    p_mid.check_same_grid(p_morning)?;
    let mut incr = Vec::with_capacity(p_mid.values().len());
    let mut decr = Vec::with_capacity(p_mid.values().len());
    for (&mid, &morning) in p_mid.values().iter().zip(p_morning.values()) {
        let d = mid - morning;
        incr.push(d.max(0.0));
        decr.push((-d).max(0.0));
    }
    Ok((
        ScalarField::like(p_mid, incr),
        ScalarField::like(p_mid, decr),
    ))
}

/// The day's energy consumption
/// `φⁿ = ∫∫ |x − y| · P_incr(x) · P_decr(y) dx dy ≥ 0`:
/// the distance-weighted double integral of the morning commute's
/// displacement split. Zero when nobody moves.
pub fn energy_consumption(
    grid: &Grid,
    incr: &ScalarField,
    decr: &ScalarField,
) -> Result<f64, ModelError> {
    distance_weighted_double_integral(grid, incr, decr)
}

/// The wealth production rate `ωⁿ(x) = β₀ · P(x) · E(x) · i(x)`, with all
/// fields sampled at midday. Non-negative, and zero wherever any factor is.
pub fn wealth_rate(
    p_mid: &ScalarField,
    e_mid: &ScalarField,
    i_mid: &ScalarField,
    beta0: f64,
) -> Result<ScalarField, ModelError> {
    p_mid.check_same_grid(e_mid)?;
    p_mid.check_same_grid(i_mid)?;
    p_mid.check_non_negative("population density")?;
    e_mid.check_non_negative("job-station density")?;
    if !beta0.is_finite() || beta0 < 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "beta0 must be >= 0 (got {beta0})"
        )));
    }
    check_unit_interval(i_mid)?;
    let values = p_mid
        .values()
        .iter()
        .zip(e_mid.values())
        .zip(i_mid.values())
        .map(|((&p, &e), &i)| beta0 * p * e * i)
        .collect();
    Ok(ScalarField::like(p_mid, values))
}

/// Grow job-stations from reinvested production: `E' = E + β₁·ωⁿ·Δt` with
/// Δt = 1 day. Since ω is constant over the day this single Euler step is
/// the exact solution of `∂E/∂t = β₁ω`; `E' ≥ E` everywhere.
pub fn grow_jobs(
    e: &ScalarField,
    omega: &ScalarField,
    beta1: f64,
) -> Result<ScalarField, ModelError> {
    e.check_same_grid(omega)?;
    omega.check_non_negative("wealth production rate")?;
    if !beta1.is_finite() || beta1 <= 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "beta1 must be > 0 (got {beta1})"
        )));
    }
    let values = e
        .values()
        .iter()
        .zip(omega.values())
        .map(|(&ev, &w)| ev + beta1 * w)
        .collect();
    Ok(ScalarField::like(e, values))
}

/// Advance the efficiency indicator by one day with the exact logistic step.
///
/// The day's ODE is `∂i/∂t = i(1−i)·r` with constant `r = (β₂ − β₁)·ωⁿ`;
/// its solution at Δt = 1 is `i' = i / (i + (1−i)·e^(−r))`, which maps
/// `[0,1]` onto itself for every finite `r` — no clamping. Three cases are
/// short-circuited so they hold bit-for-bit (and stay finite even when
/// `e^(−r)` would overflow): the fixed points `i = 0` and `i = 1`, and the
/// stationary case `r = 0`.
pub fn evolve_efficiency(
    i: &ScalarField,
    omega: &ScalarField,
    beta1: f64,
    beta2: f64,
) -> Result<ScalarField, ModelError> {
    i.check_same_grid(omega)?;
    omega.check_non_negative("wealth production rate")?;
    for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
        if !b.is_finite() || b <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "{name} must be > 0 (got {b})"
            )));
        }
    }
    check_unit_interval(i)?;
    let gain = beta2 - beta1;
    let values = i
        .values()
        .iter()
        .zip(omega.values())
        .map(|(&iv, &w)| {
            let r = gain * w;
            if iv == 0.0 || iv == 1.0 || r == 0.0 {
                iv
            } else {
                iv / (iv + (1.0 - iv) * (-r).exp())
            }
        })
        .collect();
    Ok(ScalarField::like(i, values))
}

/// Error unless every value lies in `[0,1]` (NaN rejected).
fn check_unit_interval(i: &ScalarField) -> Result<(), ModelError> {
    for (cell, &value) in i.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(ModelError::EfficiencyOutOfRange { cell, value });
        }
    }
    Ok(())
}
