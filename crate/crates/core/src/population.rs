//! Daily commuting dynamics: the morning/evening pulse schedule, the
//! employment and home attractors, and the sub-daily relaxation of the
//! population density toward whichever attractor is active.
//!
//! Within one day (model time `[n, n+1)`) the population obeys
//! `∂P/∂t = t_m(t)·(A_E − P) + t_e(t)·(A_P − P)`: rectangular morning and
//! evening pulses switch on relaxation toward the job-station attractor
//! `A_E` and the home attractor `A_P = P₀` respectively. The day is
//! integrated with explicit Euler in convex-combination form, which keeps
//! `P ≥ 0` structurally and preserves total mass exactly at the fixed point
//! of the discrete mass recursion.

use crate::error::ModelError;
use crate::field::{integrate, ScalarField};
use crate::grid::Grid;

/// Model coefficients shared across the economy and wealth updates.
///
/// Invariants enforced by [`Params::new`]: `alpha > 1`, `beta0 ∈ [0,1)`
/// (zero switches the economy off, as in the frozen-system fixture),
/// `beta1, beta2, beta3 > 0` with `beta1+beta2+beta3 = 1` (within 1e-12),
/// `nu > 0`, `kappa ≥ 0`, `f_w ≥ 0`, all finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Job-station weighting inside the employment attractor (> 1).
    pub alpha: f64,
    /// Wealth production rate prefactor, small in front of 1.
    pub beta0: f64,
    /// Share of production reinvested into job-station growth.
    pub beta1: f64,
    /// Share of production driving efficiency evolution.
    pub beta2: f64,
    /// Share of production diffusing as wealth-to-people.
    pub beta3: f64,
    /// Wealth diffusivity.
    pub nu: f64,
    /// Energy-consumption drain coefficient on wealth.
    pub kappa: f64,
    /// Neumann boundary inflow of wealth, per unit boundary length.
    pub f_w: f64,
}

/// Tolerance on the β-simplex constraint `beta1+beta2+beta3 = 1`.
pub const BETA_SUM_TOLERANCE: f64 = 1e-12;

impl Params {
    /// Validate and construct a parameter set. Error messages name the
    /// violated constraint.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        beta0: f64,
        beta1: f64,
        beta2: f64,
        beta3: f64,
        nu: f64,
        kappa: f64,
        f_w: f64,
    ) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        if !alpha.is_finite() || alpha <= 1.0 {
            return bad(format!("alpha must be > 1 (got {alpha})"));
        }
        if !(0.0..1.0).contains(&beta0) {
            return bad(format!("beta0 must lie in [0, 1) (got {beta0})"));
        }
        for (name, b) in [("beta1", beta1), ("beta2", beta2), ("beta3", beta3)] {
            if !b.is_finite() || b <= 0.0 {
                return bad(format!("{name} must be > 0 (got {b})"));
            }
        }
        let sum = beta1 + beta2 + beta3;
        if (sum - 1.0).abs() > BETA_SUM_TOLERANCE {
            return bad(format!("beta1+beta2+beta3 must equal 1 (got {sum})"));
        }
        if !nu.is_finite() || nu <= 0.0 {
            return bad(format!("nu must be > 0 (got {nu})"));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return bad(format!("kappa must be >= 0 (got {kappa})"));
        }
        if !f_w.is_finite() || f_w < 0.0 {
            return bad(format!("f_w must be >= 0 (got {f_w})"));
        }
        Ok(Self {
            alpha,
            beta0,
            beta1,
            beta2,
            beta3,
            nu,
            kappa,
            f_w,
        })
    }
}

/// The daily commute pulse schedule: two disjoint rectangular windows inside
/// the unit day, with constant amplitudes while active. Periodic with
/// period 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Morning window `[start, end) ⊆ [0, 1)` (relaxation toward `A_E`).
    pub morning: (f64, f64),
    /// Evening window `[start, end) ⊆ [0, 1)` (relaxation toward `A_P`).
    pub evening: (f64, f64),
    /// Morning pulse amplitude `λ_m > 0`.
    pub lambda_m: f64,
    /// Evening pulse amplitude `λ_e > 0`.
    pub lambda_e: f64,
}

impl Schedule {
    /// Validate and construct a schedule. Windows must satisfy
    /// `0 ≤ start ≤ end ≤ 1` and be disjoint; empty windows (start = end)
    /// are allowed and simply never fire.
    pub fn new(
        morning: (f64, f64),
        evening: (f64, f64),
        lambda_m: f64,
        lambda_e: f64,
    ) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        for (name, (start, end)) in [("morning", morning), ("evening", evening)] {
            if !(start.is_finite() && end.is_finite() && 0.0 <= start && start <= end && end <= 1.0)
            {
                return bad(format!(
                    "{name} window must satisfy 0 <= start <= end <= 1 (got [{start}, {end}))"
                ));
            }
        }
        if !(morning.1 <= evening.0 || evening.1 <= morning.0) {
            return bad(format!(
                "morning and evening windows must be disjoint (got [{}, {}) and [{}, {}))",
                morning.0, morning.1, evening.0, evening.1
            ));
        }
        for (name, l) in [("lambda_m", lambda_m), ("lambda_e", lambda_e)] {
            if !l.is_finite() || l <= 0.0 {
                return bad(format!("{name} must be > 0 (got {l})"));
            }
        }
        Ok(Self {
            morning,
            evening,
            lambda_m,
            lambda_e,
        })
    }

    /// Pulse amplitudes `(t_m, t_e)` at time `t ≥ 0`: `λ` while the
    /// fractional part of `t` lies in the corresponding window, else 0.
    pub fn pulse(&self, t: f64) -> (f64, f64) {
        let frac = t - t.floor();
        let tm = if self.morning.0 <= frac && frac < self.morning.1 {
            self.lambda_m
        } else {
            0.0
        };
        let te = if self.evening.0 <= frac && frac < self.evening.1 {
            self.lambda_e
        } else {
            0.0
        };
        (tm, te)
    }
}

/// The employment attractor
/// `A_E(x) = [∫P₀ / (∫P₀ + α·∫E)] · (P₀(x) + α·E(x))`.
///
/// The normalization uses the same quadrature as [`integrate`], so
/// `integrate(A_E) = integrate(P₀)` holds to machine precision — the morning
/// commute moves people around without creating or destroying them.
pub fn employment_attractor(
    grid: &Grid,
    p0: &ScalarField,
    e: &ScalarField,
    alpha: f64,
) -> Result<ScalarField, ModelError> {
    p0.check_grid(grid)?;
    e.check_grid(grid)?;
    p0.check_non_negative("home population density")?;
    e.check_non_negative("job-station density")?;
    if !alpha.is_finite() {
        return Err(ModelError::InvalidParameter(format!(
            "alpha must be finite (got {alpha})"
        )));
    }
    let mass_p = integrate(grid, p0)?;
    let denom = mass_p + alpha * integrate(grid, e)?;
    // Negated form on purpose: a NaN denominator must count as undefined.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(denom > 0.0) {
        return Err(ModelError::ZeroAttractorMass);
    }
    let factor = mass_p / denom;
    let values = p0
        .values()
        .iter()
        .zip(e.values())
        .map(|(&p, &ev)| factor * (p + alpha * ev))
        .collect();
    ScalarField::from_values(grid, values)
}

/// The home attractor `A_P(x) = P₀(x)`: people return to where they live.
pub fn home_attractor(p0: &ScalarField) -> ScalarField {
    p0.clone()
}

/// One explicit Euler substep of the commute ODE,
/// `P' = P + dt·[t_m·(A_E − P) + t_e·(A_P − P)]`,
/// evaluated in convex-combination form
/// `P' = (1 − w_m − w_e)·P + w_m·A_E + w_e·A_P` with `w = dt·rate`.
///
/// Under the guard `dt·(t_m + t_e) ≤ 1` every output value is a sum of
/// non-negative terms, so non-negativity is structural rather than a
/// rounding accident; the form also makes the no-op (`t_m = t_e = 0`) and
/// full-relaxation (`w_m = 1`) cases bit-exact.
pub fn commute_substep(
    p: &ScalarField,
    a_e: &ScalarField,
    a_p: &ScalarField,
    tm: f64,
    te: f64,
    dt: f64,
) -> Result<ScalarField, ModelError> {
    p.check_same_grid(a_e)?;
    p.check_same_grid(a_p)?;
    let weight = dt * (tm + te);
    // Negated form on purpose: a NaN weight must count as a violation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(weight <= 1.0) {
        return Err(ModelError::ConvexityViolated { weight });
    }
    if tm == 0.0 && te == 0.0 {
        return Ok(p.clone()); // identical to the arithmetic below, bit-for-bit
    }
    let wm = dt * tm;
    let we = dt * te;
    // At the convexity boundary the two individually rounded weights can
    // overshoot 1 by an ulp; clamp so the P coefficient never goes negative.
    let c0 = ((1.0 - wm) - we).max(0.0);
    let values = p
        .values()
        .iter()
        .zip(a_e.values())
        .zip(a_p.values())
        .map(|((&pv, &av), &hv)| c0 * pv + wm * av + we * hv)
        .collect();
    Ok(ScalarField::like(p, values))
}

/// The population density sampled at the three day anchors.
#[derive(Debug, Clone)]
pub struct DaySamples {
    /// `P` at the start of the day (time `n`).
    pub start: ScalarField,
    /// `P` at midday (time `n + ½`, after `substeps/2` substeps) — the
    /// configuration "while workers are at their job-stations".
    pub mid: ScalarField,
    /// `P` at the end of the day (time `n + 1`).
    pub end: ScalarField,
}

/// Integrate the commute ODE across one day with fixed `dt = 1/substeps`.
///
/// The employment attractor is computed once from `e_frozen` at day start:
/// job-stations change only through the once-per-day economy update, so
/// within-day freezing is exact under the day splitting. `substeps` must be
/// even (midday falls on a substep boundary) and at least 2. Pulse rates are
/// sampled at the left endpoint of each substep.
pub fn run_population_day(
    grid: &Grid,
    p_start: &ScalarField,
    e_frozen: &ScalarField,
    p0: &ScalarField,
    schedule: &Schedule,
    params: &Params,
    substeps: u32,
) -> Result<DaySamples, ModelError> {
    if substeps < 2 || !substeps.is_multiple_of(2) {
        return Err(ModelError::BadSubstepCount { substeps });
    }
    p_start.check_grid(grid)?;
    p_start.check_non_negative("population density")?;
    let a_e = employment_attractor(grid, p0, e_frozen, params.alpha)?;
    let a_p = home_attractor(p0);

    let dt = 1.0 / substeps as f64;
    let mut p = p_start.clone();
    let mut mid = None;
    for s in 0..substeps {
        let (tm, te) = schedule.pulse(s as f64 * dt);
        p = commute_substep(&p, &a_e, &a_p, tm, te, dt)?;
        if s + 1 == substeps / 2 {
            mid = Some(p.clone());
        }
    }
    Ok(DaySamples {
        start: p_start.clone(),
        mid: mid.expect("substeps >= 2 guarantees a midday sample"),
        end: p,
    })
}
