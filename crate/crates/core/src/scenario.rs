//! Scenario configuration: the JSON document that fully determines a run.
//!
//! A scenario is a strict-mode JSON object with the top-level keys `grid`,
//! `params`, `schedule`, `initial`, `run`, and `output`. Every key at every
//! level is optional — `{}` loads the default scenario — but unknown keys
//! are rejected so that a typo cannot silently fall back to a default.
//! [`load_scenario`] parses and then validates against the model invariants,
//! reusing the constructors in [`crate::population`] so the error messages
//! name the violated constraint the same way everywhere.
//!
//! The defaults describe the reference fixture: unit disk at `nx = 64`,
//! three residential bumps, a dominant central job cluster with a smaller
//! secondary one, uniform efficiency 0.6 and wealth 1, run for 50 days at
//! 200 substeps per day.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::field::GaussianBump;
use crate::population::{Params, Schedule};

/// Fully parsed and defaulted scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    /// Disk geometry and resolution.
    pub grid: GridSpec,
    /// Model coefficients.
    pub params: ParamSpec,
    /// Commuting pulse windows and amplitudes.
    pub schedule: ScheduleSpec,
    /// Initial fields.
    pub initial: InitialSpec,
    /// Horizon and temporal resolution.
    pub run: RunSpec,
    /// Snapshot cadence and heatmap toggle.
    pub output: OutputSpec,
}

/// `grid`: disk radius and cells per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Disk radius (> 0).
    pub radius: f64,
    /// Cells per side of the bounding square (≥ 4).
    pub nx: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radius: 1.0,
            nx: 64,
        }
    }
}

/// `params`: the model coefficients, mirroring [`Params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamSpec {
    /// Job-station weight in the employment attractor.
    pub alpha: f64,
    /// Wealth production coefficient.
    pub beta0: f64,
    /// Job-station growth share.
    pub beta1: f64,
    /// Efficiency growth share.
    pub beta2: f64,
    /// Wealth injection share.
    pub beta3: f64,
    /// Wealth diffusivity.
    pub nu: f64,
    /// Transport-energy drain coefficient.
    pub kappa: f64,
    /// Boundary wealth influx density.
    pub f_w: f64,
}

impl Default for ParamSpec {
    fn default() -> Self {
        // nu is chosen so the default run satisfies its own stability gate:
        // nu*dt/h² with dt = 1/200 and h = 2/64 must stay ≤ 1/4, which caps
        // nu just below 0.0488.
        Self {
            alpha: 5.0,
            beta0: 0.01,
            beta1: 0.3,
            beta2: 0.4,
            beta3: 0.3,
            nu: 0.04,
            kappa: 0.05,
            f_w: 0.01,
        }
    }
}

/// `schedule`: pulse windows as `[start, end)` fractions of the day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSpec {
    /// Morning window.
    pub morning: [f64; 2],
    /// Evening window.
    pub evening: [f64; 2],
    /// Morning pulse amplitude.
    pub lambda_m: f64,
    /// Evening pulse amplitude.
    pub lambda_e: f64,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            morning: [0.0, 0.2],
            evening: [0.5, 0.7],
            lambda_m: 25.0,
            lambda_e: 25.0,
        }
    }
}

/// `initial.efficiency`: either a uniform constant or a bump mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EfficiencySpec {
    /// Uniform initial efficiency in `[0, 1]`.
    Constant(f64),
    /// Gaussian-mixture initial efficiency (validated against `[0, 1]` once
    /// sampled on the grid).
    Bumps(Vec<GaussianBump>),
}

/// `initial`: the four starting fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    /// Residential density `P₀` as a Gaussian mixture.
    pub population: Vec<GaussianBump>,
    /// Job-station density `E₀` as a Gaussian mixture.
    pub jobs: Vec<GaussianBump>,
    /// Initial efficiency `i₀`.
    pub efficiency: EfficiencySpec,
    /// Uniform initial wealth `W₀`.
    pub wealth: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            population: vec![
                GaussianBump {
                    center: [-0.45, 0.3],
                    amplitude: 1.0,
                    width: 0.25,
                },
                GaussianBump {
                    center: [0.4, 0.35],
                    amplitude: 1.0,
                    width: 0.25,
                },
                GaussianBump {
                    center: [0.0, -0.5],
                    amplitude: 1.0,
                    width: 0.25,
                },
            ],
            jobs: vec![
                GaussianBump {
                    center: [0.05, 0.05],
                    amplitude: 1.2,
                    width: 0.18,
                },
                GaussianBump {
                    center: [-0.3, -0.2],
                    amplitude: 0.3,
                    width: 0.3,
                },
            ],
            efficiency: EfficiencySpec::Constant(0.6),
            wealth: 1.0,
        }
    }
}

/// `run`: horizon and substep resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    /// Number of simulated days (≥ 1).
    pub days: u32,
    /// Substeps per day (even, ≥ 2).
    pub substeps_per_day: u32,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            days: 50,
            substeps_per_day: 200,
        }
    }
}

/// `output`: snapshot cadence and the heatmap toggle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Emit field snapshots every this many days (the final day is always
    /// snapshotted).
    pub snapshot_every: u32,
    /// Also emit PGM heatmap frames alongside the CSV snapshots.
    pub heatmaps: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            snapshot_every: 1,
            heatmaps: false,
        }
    }
}

/// Why a scenario document was rejected.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    /// Not valid JSON for the schema (includes line and column).
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    /// Parsed fine but violates a model invariant.
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

fn check_bumps(what: &str, bumps: &[GaussianBump]) -> Result<(), ModelError> {
    for (k, b) in bumps.iter().enumerate() {
        if !(b.center[0].is_finite() && b.center[1].is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "{what} bump {k}: center must be finite (got [{}, {}])",
                b.center[0], b.center[1]
            )));
        }
        if !b.amplitude.is_finite() || b.amplitude < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "{what} bump {k}: amplitude must be >= 0 (got {})",
                b.amplitude
            )));
        }
        if !b.width.is_finite() || b.width <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "{what} bump {k}: width must be > 0 (got {})",
                b.width
            )));
        }
    }
    Ok(())
}

impl Scenario {
    /// Model coefficients as a validated [`Params`].
    pub fn params(&self) -> Result<Params, ModelError> {
        let p = &self.params;
        Params::new(
            p.alpha, p.beta0, p.beta1, p.beta2, p.beta3, p.nu, p.kappa, p.f_w,
        )
    }

    /// Pulse schedule as a validated [`Schedule`].
    pub fn schedule(&self) -> Result<Schedule, ModelError> {
        let s = &self.schedule;
        Schedule::new(
            (s.morning[0], s.morning[1]),
            (s.evening[0], s.evening[1]),
            s.lambda_m,
            s.lambda_e,
        )
    }

    /// Check every invariant that can be checked without building the grid.
    ///
    /// Errors carry the violated constraint by name, e.g.
    /// `"beta1+beta2+beta3 must equal 1"` or `"nx must be >= 4"`.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.grid.radius.is_finite() || self.grid.radius <= 0.0 {
            return Err(ModelError::BadRadius {
                radius: self.grid.radius,
            });
        }
        if self.grid.nx < 4 {
            return Err(ModelError::GridTooCoarse { nx: self.grid.nx });
        }
        self.params()?;
        self.schedule()?;
        check_bumps("population", &self.initial.population)?;
        check_bumps("jobs", &self.initial.jobs)?;
        match &self.initial.efficiency {
            EfficiencySpec::Constant(c) => {
                if !(*c >= 0.0 && *c <= 1.0) {
                    return Err(ModelError::InvalidParameter(format!(
                        "initial efficiency must lie in [0, 1] (got {c})"
                    )));
                }
            }
            EfficiencySpec::Bumps(bumps) => check_bumps("efficiency", bumps)?,
        }
        if !self.initial.wealth.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "initial wealth must be finite (got {})",
                self.initial.wealth
            )));
        }
        if self.run.days < 1 {
            return Err(ModelError::InvalidParameter(
                "days must be >= 1".to_string(),
            ));
        }
        if self.run.substeps_per_day < 2 || !self.run.substeps_per_day.is_multiple_of(2) {
            return Err(ModelError::BadSubstepCount {
                substeps: self.run.substeps_per_day,
            });
        }
        if self.output.snapshot_every < 1 {
            return Err(ModelError::InvalidParameter(
                "snapshot_every must be >= 1".to_string(),
            ));
        }
        Ok(())
    }

    /// Serialize with every key present — the `print-defaults` payload.
    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }
}

/// Parse and validate a scenario document. `{}` yields the default scenario.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text)?;
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_scenario() {
        let s = load_scenario("{}").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.grid.nx, 64);
        assert_eq!(s.run.days, 50);
        assert_eq!(s.initial.population.len(), 3);
        assert_eq!(s.initial.jobs.len(), 2);
        assert_eq!(s.initial.efficiency, EfficiencySpec::Constant(0.6));
    }

    #[test]
    fn default_scenario_passes_validation_and_round_trips_through_json() {
        let s = Scenario::default();
        s.validate().unwrap();
        let text = s.to_pretty_json();
        let back = load_scenario(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn partial_documents_override_only_their_keys() {
        let s = load_scenario(r#"{"grid": {"nx": 32}, "run": {"days": 3}}"#).unwrap();
        assert_eq!(s.grid.nx, 32);
        assert_eq!(s.grid.radius, 1.0);
        assert_eq!(s.run.days, 3);
        assert_eq!(s.run.substeps_per_day, 200);
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        for text in [
            r#"{"grids": {}}"#,
            r#"{"grid": {"nx": 16, "ny": 16}}"#,
            r#"{"params": {"beta4": 0.1}}"#,
            r#"{"output": {"snapshots_every": 2}}"#,
        ] {
            assert!(
                matches!(load_scenario(text), Err(ScenarioError::Parse(_))),
                "accepted {text}"
            );
        }
    }

    #[test]
    fn beta_shares_must_sum_to_one() {
        let err = load_scenario(r#"{"params": {"beta1": 0.5, "beta2": 0.5, "beta3": 0.5}}"#)
            .unwrap_err();
        assert!(
            err.to_string().contains("beta1+beta2+beta3 must equal 1"),
            "{err}"
        );
    }

    #[test]
    fn a_too_coarse_grid_is_named_in_the_error() {
        let err = load_scenario(r#"{"grid": {"nx": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("nx must be >= 4"), "{err}");
    }

    #[test]
    fn run_and_output_bounds_are_enforced() {
        assert!(load_scenario(r#"{"run": {"days": 0}}"#).is_err());
        assert!(load_scenario(r#"{"run": {"substeps_per_day": 3}}"#).is_err());
        assert!(load_scenario(r#"{"run": {"substeps_per_day": 0}}"#).is_err());
        assert!(load_scenario(r#"{"output": {"snapshot_every": 0}}"#).is_err());
    }

    #[test]
    fn efficiency_accepts_a_constant_or_bumps_and_checks_the_constant_range() {
        let s = load_scenario(r#"{"initial": {"efficiency": 0.25}}"#).unwrap();
        assert_eq!(s.initial.efficiency, EfficiencySpec::Constant(0.25));

        let s = load_scenario(
            r#"{"initial": {"efficiency": [
                {"center": [0.0, 0.0], "amplitude": 0.5, "width": 0.4}
            ]}}"#,
        )
        .unwrap();
        assert!(matches!(
            s.initial.efficiency,
            EfficiencySpec::Bumps(ref b) if b.len() == 1
        ));

        assert!(load_scenario(r#"{"initial": {"efficiency": 1.5}}"#).is_err());
        assert!(load_scenario(r#"{"initial": {"efficiency": -0.1}}"#).is_err());
    }

    #[test]
    fn malformed_bumps_are_rejected_with_their_list_and_index() {
        let err = load_scenario(
            r#"{"initial": {"jobs": [
                {"center": [0.0, 0.0], "amplitude": 1.0, "width": 0.0}
            ]}}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("jobs bump 0") && msg.contains("width"), "{msg}");

        assert!(load_scenario(
            r#"{"initial": {"population": [
                {"center": [0.0, 0.0], "amplitude": -1.0, "width": 0.2}
            ]}}"#
        )
        .is_err());
    }

    #[test]
    fn schedule_windows_are_validated_through_the_same_constructor() {
        let err = load_scenario(r#"{"schedule": {"morning": [0.0, 0.6], "evening": [0.5, 0.7]}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("disjoint"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position_information() {
        let err = load_scenario("{\n  \"grid\": {\n    \"nx\": oops\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }
}
