//! Experiment drivers, statistics, cost model and CSV output.

pub mod cost;
pub mod csv;
pub mod selftest;
pub mod stats;
pub mod studies;

pub use cost::{measure_taus, predict_cost, CostModelParams, CostPrediction};
pub use csv::{ConvergenceRow, CostModelRow, DampingRow, EfficiencyRow, LongtimeRow, OrderRow};
pub use selftest::{run_selftest, CheckResult};
pub use stats::{estimate_order, mean_square_error, MseSummary, OrderFit};
pub use studies::{
    convergence_study, damping_study, efficiency_study, initial_state, longtime_study,
    study_id_for, DampingPoint, EfficiencyOptions, ErrorReport, LongtimePoint, ModelConfig,
    StudySpec,
};
