//! The Gaussian mean-estimation sweep, the verification battery, and
//! their CSV/SVG outputs.

pub mod battery;
pub mod gaussian;
pub mod output;
pub mod verify;

pub use battery::{generate_battery, BatteryConfig, BatteryModel};
pub use gaussian::{check_rows, loglog_slope, run_gaussian_mean_experiment, ExperimentConfig, ExperimentRow, RowViolation};
pub use output::{emit_csv, emit_svg_plots, read_csv, rows_to_csv_string, PlotMeta, CSV_HEADER};
pub use verify::{run_verification_suite, verify_models, VerificationReport, VerifyOptions, Violation};
