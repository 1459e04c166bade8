//! Diffusion of the wealth-to-people density `W` with per-day sources and
//! Neumann boundary inflow, plus the conservation ledger that audits every
//! simulated day.
//!
//! The PDE is `∂W/∂t − ν·ΔW = β₃ωⁿ − κφⁿ` on the disk with boundary flux
//! `∂W/∂μ = F_W`. It is stepped explicitly on the masked grid: the 5-point
//! Laplacian runs over interior faces, and each exposed (staircase) boundary
//! face injects `ν·F_W/h` into its cell — flux `ν·F_W` per unit boundary
//! length entering a cell of volume `h²`. The stencil is conservative, so
//! total mass changes only through the sources and the boundary term; the
//! [`wealth_budget`] residual verifies that identity after every day.
//!
//! The sink `−κφⁿ` is spatially uniform and may drive `W` locally negative;
//! that is permitted (a wealth deficit) and logged once with the first
//! offending day.

use crate::error::ModelError;
use crate::field::{integrate, ScalarField};
use crate::grid::{Grid, DIFFUSION_STABILITY_LIMIT};
use crate::population::Params;

/// One explicit substep
/// `W' = W + dt·[ν·L(W) + β₃·ω − κ·φ]`,
/// where `L` is the masked 5-point Laplacian plus the boundary-face inflow.
///
/// Missing stencil neighbors are substituted by the center value (a
/// zero-gradient interior closure), so the per-axis face sums are two-term
/// additions; IEEE commutativity then makes the update bit-exactly
/// equivariant under the grid's axis and diagonal reflections.
///
/// Requires `ν·dt/h² ≤ 1/4` (checked), `ω ≥ 0`, `φ ≥ 0`.
pub fn diffusion_substep(
    grid: &Grid,
    w: &ScalarField,
    omega: &ScalarField,
    phi: f64,
    params: &Params,
    dt: f64,
) -> Result<ScalarField, ModelError> {
    w.check_grid(grid)?;
    omega.check_grid(grid)?;
    omega.check_non_negative("wealth production rate")?;
    if !phi.is_finite() || phi < 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "phi must be >= 0 and finite (got {phi})"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "dt must be > 0 (got {dt})"
        )));
    }
    let h = grid.h();
    let ratio = params.nu * dt / (h * h);
    // Negated form on purpose: a NaN ratio must count as a violation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(ratio <= DIFFUSION_STABILITY_LIMIT) {
        return Err(ModelError::DiffusionUnstable {
            ratio,
            limit: DIFFUSION_STABILITY_LIMIT,
        });
    }

    let wv = w.values();
    let ov = omega.values();
    let neighbors = grid.neighbor_table();
    let faces = grid.face_counts();
    let inv_h2 = 1.0 / (h * h);
    let fw_per_face = params.f_w / h;
    let kappa_phi = params.kappa * phi;
    let nu = params.nu;
    let beta3 = params.beta3;

    let get = |slot: u32, center: f64| -> f64 {
        if slot == u32::MAX {
            center
        } else {
            wv[slot as usize]
        }
    };

    let values = (0..wv.len())
        .map(|k| {
            let wc = wv[k];
            let [xm, xp, ym, yp] = neighbors[k];
            let lap_x = (get(xm, wc) + get(xp, wc)) - 2.0 * wc;
            let lap_y = (get(ym, wc) + get(yp, wc)) - 2.0 * wc;
            let lap = (lap_x + lap_y) * inv_h2;
            let boundary = fw_per_face * faces[k] as f64;
            let source = beta3 * ov[k] - kappa_phi;
            wc + dt * (nu * (lap + boundary) + source)
        })
        .collect();
    Ok(ScalarField::like(w, values))
}

/// Budget residual
/// `∫W_after − ∫W_before − injected − inflow`.
///
/// With ledger values accumulated substep-by-substep the residual is pure
/// rounding; the engine requires `|residual| ≤ 1e-10 · max(1, ∫W_after)`
/// for every simulated day.
pub fn wealth_budget(
    grid: &Grid,
    w_before: &ScalarField,
    w_after: &ScalarField,
    injected: f64,
    inflow: f64,
) -> Result<f64, ModelError> {
    Ok(integrate(grid, w_after)? - integrate(grid, w_before)? - injected - inflow)
}

/// Per-day budget ledger entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayBudget {
    /// Day index `n`.
    pub day: usize,
    /// Source mass injected over the day, `Σ_substeps dt·(β₃∫ω − κφ·area)`.
    pub injected: f64,
    /// Boundary inflow over the day, `Σ_substeps dt·ν·F_W·(#faces)·h`.
    pub inflow: f64,
    /// [`wealth_budget`] residual for the day.
    pub residual: f64,
}

/// The wealth field plus its running conservation ledger.
#[derive(Debug, Clone)]
pub struct WealthState {
    /// Current wealth-to-people density.
    pub w: ScalarField,
    initial_mass: f64,
    cumulative_injected: f64,
    cumulative_inflow: f64,
    /// First day on which any cell went negative, if that has happened.
    pub first_negative_day: Option<usize>,
}

impl WealthState {
    /// Start the ledger from the initial wealth field.
    pub fn new(grid: &Grid, w0: ScalarField) -> Result<Self, ModelError> {
        let initial_mass = integrate(grid, &w0)?;
        Ok(Self {
            w: w0,
            initial_mass,
            cumulative_injected: 0.0,
            cumulative_inflow: 0.0,
            first_negative_day: None,
        })
    }

    /// Integrate one day in `substeps` explicit substeps with the day's
    /// constant sources, accumulate the ledger, and return the day's budget.
    pub fn advance_day(
        &mut self,
        grid: &Grid,
        omega: &ScalarField,
        phi: f64,
        params: &Params,
        substeps: u32,
        day: usize,
    ) -> Result<DayBudget, ModelError> {
        if substeps == 0 {
            return Err(ModelError::BadSubstepCount { substeps });
        }
        let dt = 1.0 / substeps as f64;
        let w_before = self.w.clone();
        let injected_rate = params.beta3 * integrate(grid, omega)? - params.kappa * phi * grid.area();
        let inflow_rate = params.nu * params.f_w * grid.boundary_faces().len() as f64 * grid.h();
        let mut injected = 0.0;
        let mut inflow = 0.0;
        for _ in 0..substeps {
            self.w = diffusion_substep(grid, &self.w, omega, phi, params, dt)?;
            injected += dt * injected_rate;
            inflow += dt * inflow_rate;
        }
        let residual = wealth_budget(grid, &w_before, &self.w, injected, inflow)?;
        self.cumulative_injected += injected;
        self.cumulative_inflow += inflow;

        if self.first_negative_day.is_none() {
            if let Some((cell, value)) = self
                .w
                .values()
                .iter()
                .enumerate()
                .find(|(_, v)| **v < 0.0)
            {
                self.first_negative_day = Some(day);
                log::warn!(
                    "wealth went negative on day {day} (first at cell {cell}: {value}); \
                     continuing — a negative W reads as a local wealth deficit"
                );
            }
        }

        Ok(DayBudget {
            day,
            injected,
            inflow,
            residual,
        })
    }

    /// Whole-run budget residual:
    /// `∫W_now − ∫W_initial − Σinjected − Σinflow`.
    pub fn cumulative_residual(&self, grid: &Grid) -> Result<f64, ModelError> {
        Ok(integrate(grid, &self.w)?
            - self.initial_mass
            - self.cumulative_injected
            - self.cumulative_inflow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{constant_field, gaussian_mixture, GaussianBump, ScalarField};
    use crate::grid::build_disk_grid;

    fn params_with(nu: f64, kappa: f64, f_w: f64) -> Params {
        Params::new(5.0, 0.01, 0.3, 0.4, 0.3, nu, kappa, f_w).unwrap()
    }

    #[test]
    fn uniform_wealth_without_sources_is_a_bitwise_fixed_point() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let w = constant_field(&g, 1.0).unwrap();
        let omega = constant_field(&g, 0.0).unwrap();
        let p = params_with(0.1, 0.05, 0.0);
        let w2 = diffusion_substep(&g, &w, &omega, 0.0, &p, 0.005).unwrap();
        assert_eq!(w2, w);
    }

    #[test]
    fn boundary_inflow_adds_exactly_the_flux_times_face_length() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let w = constant_field(&g, 1.0).unwrap();
        let omega = constant_field(&g, 0.0).unwrap();
        let f_w = 0.25;
        let p = params_with(0.1, 0.0, f_w);
        let dt = 0.005;
        let w2 = diffusion_substep(&g, &w, &omega, 0.0, &p, dt).unwrap();
        let gained = integrate(&g, &w2).unwrap() - integrate(&g, &w).unwrap();
        let expected = dt * p.nu * f_w * g.boundary_faces().len() as f64 * g.h();
        assert!(
            (gained - expected).abs() <= 1e-12 * expected,
            "{gained} vs {expected}"
        );
    }

    #[test]
    fn a_spike_diffuses_conservatively_under_the_maximum_principle() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let mut values = vec![0.0; g.cell_count()];
        values[g.cell_at(8, 8).unwrap()] = 5.0;
        let mut w = ScalarField::from_values(&g, values).unwrap();
        let omega = constant_field(&g, 0.0).unwrap();
        let p = params_with(0.1, 0.0, 0.0);
        let mass0 = integrate(&g, &w).unwrap();
        let (mut prev_min, mut prev_max) = (0.0f64, 5.0f64);
        for _ in 0..200 {
            w = diffusion_substep(&g, &w, &omega, 0.0, &p, 0.005).unwrap();
            let min = w.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let max = w.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(min >= prev_min, "min principle violated: {min} < {prev_min}");
            assert!(max <= prev_max, "max principle violated: {max} > {prev_max}");
            prev_min = min;
            prev_max = max;
        }
        let mass = integrate(&g, &w).unwrap();
        assert!((mass - mass0).abs() <= 1e-12 * mass0);
        assert!(prev_max < 5.0, "spike never spread");
    }

    #[test]
    fn closed_system_mass_drift_stays_at_rounding_level() {
        let g = build_disk_grid(1.0, 12).unwrap();
        let mut w = gaussian_mixture(
            &g,
            &[GaussianBump {
                center: [0.2, -0.1],
                amplitude: 2.0,
                width: 0.4,
            }],
        )
        .unwrap();
        let omega = constant_field(&g, 0.0).unwrap();
        let p = params_with(0.1, 0.05, 0.0);
        let mass0 = integrate(&g, &w).unwrap();
        for _ in 0..1000 {
            w = diffusion_substep(&g, &w, &omega, 0.0, &p, 0.005).unwrap();
        }
        let drift = (integrate(&g, &w).unwrap() - mass0).abs();
        assert!(drift <= 1e-12 * mass0, "drift {drift:e}");
    }

    #[test]
    fn substep_commutes_bitwise_with_every_grid_reflection() {
        let g = build_disk_grid(1.0, 16).unwrap();
        // Radially symmetric inputs are bitwise symmetric on this mask.
        let w = gaussian_mixture(
            &g,
            &[GaussianBump {
                center: [0.0, 0.0],
                amplitude: 1.5,
                width: 0.5,
            }],
        )
        .unwrap();
        let omega = gaussian_mixture(
            &g,
            &[GaussianBump {
                center: [0.0, 0.0],
                amplitude: 0.3,
                width: 0.4,
            }],
        )
        .unwrap();
        let p = params_with(0.1, 0.02, 0.3);
        let w2 = diffusion_substep(&g, &w, &omega, 0.4, &p, 0.005).unwrap();
        let last = g.nx() - 1;
        for c in g.cells() {
            let here = w2.get(g.cell_at(c.i, c.j).unwrap()).to_bits();
            for (mi, mj) in [
                (last - c.i, c.j),
                (c.i, last - c.j),
                (last - c.i, last - c.j),
                (c.j, c.i),
                (last - c.j, c.i),
                (c.j, last - c.i),
                (last - c.j, last - c.i),
            ] {
                let there = w2.get(g.cell_at(mi, mj).unwrap()).to_bits();
                assert_eq!(here, there, "asymmetry at ({}, {})", c.i, c.j);
            }
        }
    }

    #[test]
    fn unstable_steps_are_refused() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let w = constant_field(&g, 1.0).unwrap();
        let omega = constant_field(&g, 0.0).unwrap();
        let p = params_with(1.0, 0.0, 0.0);
        assert!(matches!(
            diffusion_substep(&g, &w, &omega, 0.0, &p, 0.01),
            Err(ModelError::DiffusionUnstable { .. })
        ));
    }

    #[test]
    fn day_ledger_balances_sources_and_inflow() {
        let g = build_disk_grid(1.0, 16).unwrap();
        let p = params_with(0.04, 0.05, 0.01);
        let omega = gaussian_mixture(
            &g,
            &[GaussianBump {
                center: [0.1, 0.0],
                amplitude: 0.05,
                width: 0.3,
            }],
        )
        .unwrap();
        let mut state = WealthState::new(&g, constant_field(&g, 1.0).unwrap()).unwrap();
        for day in 0..5 {
            let budget = state.advance_day(&g, &omega, 0.002, &p, 200, day).unwrap();
            let scale = integrate(&g, &state.w).unwrap().max(1.0);
            assert!(
                budget.residual.abs() <= 1e-10 * scale,
                "day {day} residual {:e}",
                budget.residual
            );
            assert!(budget.injected != 0.0 && budget.inflow > 0.0);
        }
        let total = state.cumulative_residual(&g).unwrap();
        assert!(total.abs() <= 1e-10 * integrate(&g, &state.w).unwrap().max(1.0));
        assert_eq!(state.first_negative_day, None);
    }

    #[test]
    fn a_dominant_energy_drain_flags_the_first_negative_day() {
        let g = build_disk_grid(1.0, 12).unwrap();
        let p = params_with(0.04, 1.0, 0.0);
        let omega = constant_field(&g, 0.0).unwrap();
        let mut state = WealthState::new(&g, constant_field(&g, 0.01).unwrap()).unwrap();
        // κφ = 1 drains 1 unit/day from a field holding 0.01: day 0 goes red.
        state.advance_day(&g, &omega, 1.0, &p, 100, 0).unwrap();
        assert_eq!(state.first_negative_day, Some(0));
        // The flag records only the first day.
        state.advance_day(&g, &omega, 1.0, &p, 100, 1).unwrap();
        assert_eq!(state.first_negative_day, Some(0));
    }
}
