//! Experiment driver: configuration, convergence runs and CSV/JSON output.

pub mod config;
pub mod report;
pub mod run;

pub use config::{dx_for_k, Example, ExperimentConfig, Metric, Tolerances};
pub use report::{write_metadata, write_solution_csv, EocReport, EocRow};
pub use run::{run_eoc, run_measure_rates, run_projection_rates, run_solve, Pipeline, SolveOutput};
