//! Batch runs that tabulate the quantities of the ill-posedness mechanism and
//! check them against their expected behaviour.

mod config;
mod report;
mod runs;

pub use config::ExperimentConfig;
pub use report::{emit_report, render_svg, Chart, Check, OutputFormat, Row, RunReport, Series, CSV_HEADER};
pub use runs::{run_all, run_discontinuity, run_foundations, run_lemma31, run_oracle_check, run_proposition};
