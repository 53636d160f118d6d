//! Measurement, inference, simulation, and visualization of departure from
//! marginal homogeneity in square ordinal contingency tables.
//!
//! A square table of ordinal categories satisfies marginal homogeneity (MH)
//! when its row and column marginal distributions coincide. This crate
//! quantifies how far a table departs from MH and in which direction:
//!
//! * [`table`] parses and validates tables and computes the per-cut block
//!   masses everything else consumes.
//! * [`measures`] evaluates the Matusita-distance sub-measure at each cut,
//!   the weighted summary measure, and power-divergence and directional
//!   baselines.
//! * [`inference`] provides the delta-method asymptotic variance, Wald
//!   confidence intervals, and an independent finite-difference oracle.
//! * [`simulation`] reproduces a discretized-bivariate-normal coverage study
//!   with deterministic, worker-count-independent results.
//! * [`viz`] renders the per-cut panels as deterministic SVG.
//! * [`report`] defines the stable JSON document the CLI emits.

pub mod error;
pub mod inference;
pub mod measures;
pub mod report;
pub mod simulation;
pub mod table;
pub mod viz;

pub use error::MhError;
pub use inference::{
    asymptotic_variance, confidence_interval, confidence_interval_for, normal_quantile,
    resolve_estimator, variance_oracle_fd, EstimatorChoice, InferenceResult, LevelDerivs,
    VarianceBreakdown, DEFAULT_ALPHA, DEFAULT_FD_STEP, DEGENERACY_TOLERANCE,
};
pub use measures::{
    measure_gamma, measure_phi, measure_psi, measure_report, measure_tau, power_divergence,
    sub_measure_gamma, sub_measures, Direction, DivergenceDirection, MeasureReport, SubMeasure,
};
pub use report::{
    build_analysis_report, build_simulate_doc, AnalysisReport, InputKind, SimulateDoc,
    SCHEMA_VERSION,
};
pub use simulation::{
    cell_probs, run_coverage, true_measure, SimulationResult, SimulationScenario,
    DEFAULT_CUTOFFS, DEFAULT_RHO,
};
pub use table::{
    bayes_smooth, marginal_summary, parse_prob_table, parse_table, to_probabilities,
    LevelSummary, MarginalSummary, ProbSource, ProbTable, SquareTable, PROB_SUM_TOLERANCE,
};
pub use viz::{build_viz_spec, render_svg, PanelColor, VizLevel, VizSpec, VizStyle};
