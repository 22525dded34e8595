//! Run configuration, experiment-grid orchestration and summary tables.

pub mod config;
mod grid;
mod summary;

pub use config::{DataConfig, DataSource, GridConfig, OutputConfig, RunConfig, SummaryFormat, TopNSpec};
pub use grid::{
    evaluate_cell, monthly_stats, plan_cells, run_grid, summary_rows, CellResult, GridCell, GridReport,
    SERIES_FILES, TURNOVER_HEADER,
};
pub use summary::{emit_summary, parse_summary, Format, SeriesLabel, SummaryRow, SUMMARY_HEADER};
