//! The day loop: wires the population, economy, and wealth modules into the
//! full simulation and streams rows/snapshots to an output sink.
//!
//! Each simulated day runs in a fixed order — commute the population with
//! jobs frozen, read the midday diagnostics, apply the end-of-day economy
//! updates, then diffuse wealth with the day's constant sources. Every
//! floating-point reduction underneath uses a fixed evaluation order, so a
//! given scenario reproduces its outputs bit-for-bit.

use crate::economy::{
    energy_consumption, evolve_efficiency, grow_jobs, split_population_change, wealth_rate,
};
use crate::error::ModelError;
use crate::field::{constant_field, gaussian_mixture, integrate, ScalarField};
use crate::grid::{build_disk_grid, enforce_stability, Grid};
use crate::output::{OutputSink, TimeSeriesRow};
use crate::population::run_population_day;
use crate::scenario::{EfficiencySpec, Scenario, ScenarioError};
use crate::wealth::{DayBudget, WealthState};

/// Why a run failed.
#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    /// The scenario document was rejected.
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    /// A model invariant was violated while running.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// The stability gate refused the run before day 0.
    #[error("stability check failed:\n{0}")]
    Unstable(String),
    /// An output sink failed to write.
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything the simulation carries between days, returned after the run.
#[derive(Debug, Clone)]
pub struct SimState {
    /// The masked disk lattice.
    pub grid: Grid,
    /// Residential density `P₀` (the immutable home attractor).
    pub p0: ScalarField,
    /// Population density at the end of the last completed day.
    pub p: ScalarField,
    /// Job-station density.
    pub e: ScalarField,
    /// Efficiency field.
    pub i: ScalarField,
    /// Wealth field plus its conservation ledger.
    pub wealth: WealthState,
    /// One row per completed day.
    pub series: Vec<TimeSeriesRow>,
    /// One budget entry per completed day.
    pub budgets: Vec<DayBudget>,
}

fn initial_efficiency(grid: &Grid, spec: &EfficiencySpec) -> Result<ScalarField, ModelError> {
    match spec {
        EfficiencySpec::Constant(c) => constant_field(grid, *c),
        EfficiencySpec::Bumps(bumps) => {
            let field = gaussian_mixture(grid, bumps)?;
            for (cell, &value) in field.values().iter().enumerate() {
                if value > 1.0 {
                    return Err(ModelError::EfficiencyOutOfRange { cell, value });
                }
            }
            Ok(field)
        }
    }
}

/// Run a validated scenario to completion, streaming output through `sink`.
///
/// Day `n` (for `n = 0..days`):
/// 1. commute the population through the day's pulses with `E` frozen;
/// 2. split the midday-minus-morning change and integrate the transport
///    energy `φⁿ` and wealth production `ωⁿ` from the midday sample;
/// 3. grow jobs and evolve efficiency from `ωⁿ` with a whole-day step;
/// 4. diffuse wealth through the day's substeps with constant sources
///    `β₃ωⁿ` and `κφⁿ`, carrying the conservation ledger;
/// 5. emit the day's time-series row, and field snapshots on cadence days
///    (every `snapshot_every`-th day, plus always the final day).
///
/// The stability gate runs before day 0; an unstable configuration is
/// refused without emitting anything.
pub fn run_simulation(
    scenario: &Scenario,
    sink: &mut dyn OutputSink,
) -> Result<SimState, EngineError> {
    scenario.validate().map_err(ScenarioError::Invalid)?;
    let params = scenario.params().map_err(ScenarioError::Invalid)?;
    let schedule = scenario.schedule().map_err(ScenarioError::Invalid)?;
    let substeps = scenario.run.substeps_per_day;
    let days = scenario.run.days as usize;

    let grid = build_disk_grid(scenario.grid.radius, scenario.grid.nx)?;
    let report = enforce_stability(&params, &schedule, &grid, substeps);
    if !report.passed() {
        return Err(EngineError::Unstable(report.to_string()));
    }

    let p0 = gaussian_mixture(&grid, &scenario.initial.population)?;
    let mut p = p0.clone();
    let mut e = gaussian_mixture(&grid, &scenario.initial.jobs)?;
    let mut i = initial_efficiency(&grid, &scenario.initial.efficiency)?;
    let mut wealth = WealthState::new(&grid, constant_field(&grid, scenario.initial.wealth)?)?;

    let mut series = Vec::with_capacity(days);
    let mut budgets = Vec::with_capacity(days);

    for day in 0..days {
        let samples = run_population_day(&grid, &p, &e, &p0, &schedule, &params, substeps)?;
        let (incr, decr) = split_population_change(&samples.mid, &samples.start)?;
        let phi = energy_consumption(&grid, &incr, &decr)?;
        let omega = wealth_rate(&samples.mid, &e, &i, params.beta0)?;
        let mass_omega = integrate(&grid, &omega)?;

        e = grow_jobs(&e, &omega, params.beta1)?;
        i = evolve_efficiency(&i, &omega, params.beta1, params.beta2)?;
        budgets.push(wealth.advance_day(&grid, &omega, phi, &params, substeps, day)?);
        p = samples.end;

        let row = TimeSeriesRow {
            day,
            phi,
            mass_p_mid: integrate(&grid, &samples.mid)?,
            mass_e: integrate(&grid, &e)?,
            mass_w: integrate(&grid, &wealth.w)?,
            mean_i: integrate(&grid, &i)? / grid.area(),
            mass_omega,
        };
        sink.series_row(&row)?;
        series.push(row);

        if day % scenario.output.snapshot_every as usize == 0 || day + 1 == days {
            let ei = ScalarField::like(
                &e,
                e.values()
                    .iter()
                    .zip(i.values())
                    .map(|(ev, iv)| ev * iv)
                    .collect(),
            );
            sink.snapshot(day, "P_mid", &grid, &samples.mid)?;
            sink.snapshot(day, "E", &grid, &e)?;
            sink.snapshot(day, "Ei", &grid, &ei)?;
            sink.snapshot(day, "W", &grid, &wealth.w)?;
        }
    }

    sink.finish()?;
    Ok(SimState {
        grid,
        p0,
        p,
        e,
        i,
        wealth,
        series,
        budgets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::{MemorySink, NullSink};

    /// Small, stable configuration used across the tests here.
    fn small_scenario() -> Scenario {
        let mut s = Scenario::default();
        s.grid.nx = 16;
        s.run.days = 3;
        s.run.substeps_per_day = 50;
        s
    }

    #[test]
    fn a_frozen_system_is_a_bitwise_fixed_point_with_zero_energy() {
        let mut s = small_scenario();
        s.schedule.morning = [0.3, 0.3];
        s.schedule.evening = [0.7, 0.7];
        s.params.beta0 = 0.0;
        s.params.f_w = 0.0;
        let mut sink = MemorySink::default();
        let state = run_simulation(&s, &mut sink).unwrap();

        assert_eq!(state.p, state.p0);
        assert_eq!(state.e, gaussian_mixture(&state.grid, &s.initial.jobs).unwrap());
        assert_eq!(
            state.i,
            constant_field(&state.grid, 0.6).unwrap()
        );
        assert_eq!(
            state.wealth.w,
            constant_field(&state.grid, 1.0).unwrap()
        );
        for row in &state.series {
            assert_eq!(row.phi, 0.0);
            assert_eq!(row.mass_omega, 0.0);
        }
    }

    #[test]
    fn jobs_grow_and_efficiency_never_falls_under_the_defaults() {
        let state = run_simulation(&small_scenario(), &mut NullSink).unwrap();
        for pair in state.series.windows(2) {
            assert!(pair[1].mass_e > pair[0].mass_e, "E mass must grow");
            assert!(pair[1].mean_i >= pair[0].mean_i, "mean i must not fall");
        }
        for row in &state.series {
            assert!(row.phi > 0.0 && row.mass_omega > 0.0);
            assert!(row.mean_i >= 0.0 && row.mean_i <= 1.0);
        }
    }

    #[test]
    fn population_mass_in_the_series_is_conserved() {
        let state = run_simulation(&small_scenario(), &mut NullSink).unwrap();
        let m0 = state.series[0].mass_p_mid;
        for row in &state.series {
            assert!((row.mass_p_mid - m0).abs() <= 1e-9 * m0);
        }
    }

    #[test]
    fn an_unstable_configuration_is_refused_before_day_zero() {
        let mut s = small_scenario();
        s.run.substeps_per_day = 2; // dt = 0.5 ⇒ commute weight 25
        let mut sink = MemorySink::default();
        let err = run_simulation(&s, &mut sink).unwrap_err();
        assert!(matches!(err, EngineError::Unstable(_)), "{err}");
        assert!(sink.rows.is_empty() && sink.snapshots.is_empty());
    }

    #[test]
    fn snapshots_follow_the_cadence_and_always_include_the_final_day() {
        let mut s = small_scenario();
        s.run.days = 6;
        s.output.snapshot_every = 4;
        let mut sink = MemorySink::default();
        run_simulation(&s, &mut sink).unwrap();
        let mut days: Vec<usize> = sink.snapshots.iter().map(|(d, _, _)| *d).collect();
        days.dedup();
        assert_eq!(days, vec![0, 4, 5]);
        for d in [0, 4, 5] {
            for name in ["P_mid", "E", "Ei", "W"] {
                assert!(sink.snapshot(d, name).is_some(), "missing {name} at {d}");
            }
        }
    }

    #[test]
    fn runs_are_bitwise_reproducible() {
        let s = small_scenario();
        let a = run_simulation(&s, &mut NullSink).unwrap();
        let b = run_simulation(&s, &mut NullSink).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.p, b.p);
        assert_eq!(a.e, b.e);
        assert_eq!(a.i, b.i);
        assert_eq!(a.wealth.w, b.wealth.w);
    }

    #[test]
    fn sink_failures_abort_the_run_with_an_io_error() {
        struct FailingSink;
        impl OutputSink for FailingSink {
            fn series_row(&mut self, _row: &TimeSeriesRow) -> std::io::Result<()> {
                Err(std::io::Error::other("disk full"))
            }
        }
        let err = run_simulation(&small_scenario(), &mut FailingSink).unwrap_err();
        assert!(matches!(err, EngineError::Io(_)), "{err}");
    }

    #[test]
    fn efficiency_bumps_exceeding_one_are_rejected() {
        let mut s = small_scenario();
        s.initial.efficiency = EfficiencySpec::Bumps(vec![crate::field::GaussianBump {
            center: [0.0, 0.0],
            amplitude: 1.4,
            width: 0.5,
        }]);
        let err = run_simulation(&s, &mut NullSink).unwrap_err();
        assert!(
            matches!(
                err,
                EngineError::Model(ModelError::EfficiencyOutOfRange { .. })
            ),
            "{err}"
        );
    }
}
