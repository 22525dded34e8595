use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;

use super::config::{RunConfig, SummaryFormat};
use super::summary::{emit_summary, Format, SeriesLabel, SummaryRow};
use crate::attribution::{attribute, ProfitSeries};
use crate::error::Result;
use crate::market_data::MarketHistory;
use crate::portfolio::{
    annualized_stats, monthly_totals, run_simulation, write_run_series, write_trades, AnnualizedStats,
    RebalanceSchedule, SimulationRun,
};
use crate::series_csv::write_columns;
use crate::spt::{decompose, DecompositionSeries};

pub const SERIES_FILES: [&str; 4] = ["relative.csv", "turnover.csv", "profit.csv", "decomposition.csv"];
pub const TURNOVER_HEADER: [&str; 2] = ["date", "turnover"];

/// One (top_n, schedule, tc) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub label: String,
    pub size_label: String,
    pub top_n: usize,
    pub schedule: RebalanceSchedule,
    pub tc_bps: f64,
    pub factor: f64,
    /// Index of the cell this one reports its change against.
    pub baseline: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: GridCell,
    pub run: SimulationRun,
    pub profit: ProfitSeries,
    pub decomposition: DecompositionSeries,
    pub stats: Vec<(SeriesLabel, AnnualizedStats)>,
}

impl CellResult {
    pub fn stat(&self, label: SeriesLabel) -> AnnualizedStats {
        self.stats
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, s)| *s)
            .expect("every label is computed")
    }
}

#[derive(Debug)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
    pub rows: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
}

/// Cells in output order: top_n entries, then schedules, then costs.
///
/// The baseline of a cell is the first schedule at the same cost when its
/// schedule differs from the first, otherwise the first cost at the same
/// schedule when its cost differs from the first.
pub fn plan_cells(config: &RunConfig) -> Result<Vec<GridCell>> {
    let schedules = config.schedules()?;
    let tcs = &config.grid.tc_bps;
    let mut cells = Vec::new();
    for (size_label, top_n) in config.grid.top_n.entries() {
        let factor = config.factor_for(&size_label)?;
        let base = cells.len();
        for (si, schedule) in schedules.iter().enumerate() {
            for (ti, &tc_bps) in tcs.iter().enumerate() {
                let baseline = if si > 0 {
                    Some(base + ti)
                } else if ti > 0 {
                    Some(base)
                } else {
                    None
                };
                cells.push(GridCell {
                    label: format!("{size_label}-{}-tc{tc_bps}", schedule.to_string().replace(':', "-")),
                    size_label: size_label.clone(),
                    top_n,
                    schedule: *schedule,
                    tc_bps,
                    factor,
                    baseline,
                });
            }
        }
    }
    Ok(cells)
}

/// Annualized stats of a daily series from its calendar-month totals.
pub fn monthly_stats(dates: &[NaiveDate], values: &[f64]) -> Result<AnnualizedStats> {
    annualized_stats(&monthly_totals(dates, values), 12.0)
}

pub fn evaluate_cell(history: &MarketHistory, cell: &GridCell) -> Result<CellResult> {
    let run = run_simulation(history, cell.top_n, cell.schedule, cell.tc_bps)?;
    let profit = attribute(&run.trades, cell.tc_bps)?.align(&run.dates)?;
    let decomposition = decompose(&run, cell.factor)?;
    let stats = vec![
        (SeriesLabel::EwRelativeReturn, monthly_stats(&run.dates, &run.ew_relative)?),
        (
            SeriesLabel::PremiumEstimate,
            monthly_stats(&run.dates, &decomposition.premium_estimate)?,
        ),
        (SeriesLabel::TradingProfit, monthly_stats(&run.dates, &profit.trading_profit)?),
        (SeriesLabel::Turnover, monthly_stats(&run.dates, &run.turnover)?),
    ];
    Ok(CellResult {
        cell: cell.clone(),
        run,
        profit,
        decomposition,
        stats,
    })
}

pub fn summary_rows(results: &[CellResult]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for r in results {
        for &(series, s) in &r.stats {
            let change = r
                .cell
                .baseline
                .map(|b| s.mean - results[b].stat(series).mean);
            rows.push(SummaryRow {
                cell: r.cell.label.clone(),
                series,
                mean: s.mean,
                stdev: s.stdev,
                change,
            });
        }
    }
    rows
}

/// Runs every cell (concurrently) and writes series and summary files
/// under `out_dir`.
pub fn run_grid(config: &RunConfig, out_dir: &Path) -> Result<GridReport> {
    let history = config.load_market()?;
    let cells = plan_cells(config)?;
    let cells: Vec<CellResult> = cells
        .par_iter()
        .map(|c| evaluate_cell(&history, c))
        .collect::<Result<_>>()?;
    let rows = summary_rows(&cells);

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for c in &cells {
        let dir = out_dir.join(&c.cell.label);
        fs::create_dir_all(&dir)?;
        let [rel, turn, prof, dec] = SERIES_FILES.map(|f| dir.join(f));
        write_run_series(&c.run, create(&rel)?)?;
        write_columns(create(&turn)?, &TURNOVER_HEADER, &c.run.dates, &[&c.run.turnover])?;
        c.profit.write_csv(create(&prof)?)?;
        c.decomposition.write_csv(create(&dec)?)?;
        files.extend([rel, turn, prof, dec]);
        if config.output.write_trades {
            let path = dir.join("trades.csv");
            write_trades(&c.run.trades, create(&path)?)?;
            files.push(path);
        }
    }
    let (name, format) = match config.output.summary_format {
        SummaryFormat::Csv => ("summary.csv", Format::Csv),
        SummaryFormat::Plain => ("summary.txt", Format::Plain),
    };
    let summary = out_dir.join(name);
    let mut w = create(&summary)?;
    w.write_all(&emit_summary(&rows, format))?;
    w.flush()?;
    files.push(summary);

    Ok(GridReport { cells, rows, files })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
