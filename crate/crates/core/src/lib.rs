//! Deterministic simulator of a territory's coupled daily dynamics: a
//! population density commutes between homes and job stations on a disk,
//! its daily rearrangement is charged as transport energy, productive
//! encounters grow the job stations and their efficiency, and the generated
//! wealth diffuses spatially with a constant inflow across the boundary.
//!
//! Space is a cell-centered square lattice masked to the disk; time advances
//! in whole days, each resolved into explicit substeps. All updates are
//! written in a fixed evaluation order so a given scenario reproduces its
//! outputs bit-for-bit across runs.
//!
//! Modules, bottom up:
//! - [`grid`] — masked disk lattice, neighbor/boundary topology, stability checks
//! - [`field`] — cell-centered scalar fields, quadrature, the pairwise
//!   distance-weighted double integral
//! - [`population`] — commuting pulse schedule and the within-day relaxation
//!   toward home/work attractors
//! - [`economy`] — transport-energy and wealth-production diagnostics, job
//!   growth, logistic efficiency evolution
//! - [`wealth`] — explicit wealth diffusion with sources and boundary inflow,
//!   plus the per-day conservation ledger
//! - [`scenario`] — the JSON run configuration with strict validation
//! - [`output`] — CSV/PGM artifact writers and the sink abstraction
//! - [`engine`] — the day loop tying it all together

pub mod economy;
pub mod engine;
pub mod error;
pub mod field;
pub mod grid;
pub mod output;
pub mod population;
pub mod scenario;
pub mod wealth;

pub use economy::{
    energy_consumption, evolve_efficiency, grow_jobs, split_population_change, wealth_rate,
    DayDiagnostics, DayTotals,
};
pub use engine::{run_simulation, EngineError, SimState};
pub use error::ModelError;
pub use field::{
    constant_field, distance_weighted_double_integral, gaussian_mixture, integrate, GaussianBump,
    ScalarField,
};
pub use grid::{
    build_disk_grid, enforce_stability, Cell, Grid, StabilityReport, COMMUTE_STABILITY_LIMIT,
    DIFFUSION_STABILITY_LIMIT,
};
pub use output::{
    write_field_csv, write_heatmap_pgm, DirectorySink, MemorySink, NullSink, OutputSink,
    TimeSeriesRow, SERIES_HEADER,
};
pub use population::{
    commute_substep, employment_attractor, home_attractor, run_population_day, DaySamples, Params,
    Schedule,
};
pub use scenario::{load_scenario, Scenario, ScenarioError};
pub use wealth::{diffusion_substep, wealth_budget, DayBudget, WealthState};
