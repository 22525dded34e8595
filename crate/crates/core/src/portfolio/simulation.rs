//! Daily simulation of the equal-weighted top-n portfolio against the full
//! cap-weighted market and the cap-weighted top-n portfolio.
//!
//! Timeline for calendar day `d`: holdings drift through the day's returns,
//! then at the close, on the first trading day of a month, the universe is
//! reconstituted. The full-market benchmark resets to cap weights at every
//! reconstitution; the equal-weighted portfolio and the top-n cap-weighted
//! portfolio trade on the schedule's months, and are established on the
//! first reconstitution date regardless of schedule.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::{
    cap_weight_targets, cost_log, drift_with, equal_weight_targets, rebalance, weight_sum,
    PortfolioState, RebalanceSchedule, RelativeSeries, Selection, TradeEvent, WeightMap,
    WEIGHT_SUM_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::market_data::{universe::snapshot_at, MarketHistory, SecurityId};
use crate::series_csv::{read_columns, write_columns};
use crate::spt;

pub const RUN_SERIES_HEADER: [&str; 4] = ["date", "ew_rel_logret", "ew_topn_vs_cw_topn_logret", "turnover"];

/// Every per-day series of one simulation, aligned on the trading calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub top_n: usize,
    pub schedule: RebalanceSchedule,
    pub tc_bps: f64,
    pub dates: Vec<NaiveDate>,
    /// Equal-weighted minus full-market log return, net of costs.
    pub ew_relative: Vec<f64>,
    /// Equal-weighted top-n minus cap-weighted top-n log return, net of costs.
    pub ew_vs_cw_topn: Vec<f64>,
    /// One-way turnover of the equal-weighted portfolio traded that day.
    pub turnover: Vec<f64>,
    /// `sum |dw|` traded that day.
    pub traded_weight: Vec<f64>,
    /// `ln(1 - tc * sum |dw|)` charged that day.
    pub cost_log: Vec<f64>,
    pub size_exposure: Vec<f64>,
    pub trades: Vec<TradeEvent>,
    pub rebalance_dates: Vec<NaiveDate>,
    /// Cumulative log return of the equal-weighted portfolio, net of costs.
    pub ew_cum_log_return: f64,
}

impl SimulationRun {
    pub fn ew_relative_series(&self) -> RelativeSeries {
        RelativeSeries {
            dates: self.dates.clone(),
            log_relative_return: self.ew_relative.clone(),
        }
    }

    pub fn topn_relative_series(&self) -> RelativeSeries {
        RelativeSeries {
            dates: self.dates.clone(),
            log_relative_return: self.ew_vs_cw_topn.clone(),
        }
    }
}

pub fn run_simulation(
    history: &MarketHistory,
    top_n: usize,
    schedule: RebalanceSchedule,
    tc_bps: f64,
) -> Result<SimulationRun> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let recon = history.reconstitution_indices();
    if recon.len() < 2 {
        return Err(Error::HistoryTooShort);
    }
    if !recon.iter().any(|&i| schedule.includes(history.day(i).date)) {
        return Err(Error::NoRebalanceDates);
    }
    let mut is_recon = vec![false; history.len()];
    for &i in &recon {
        is_recon[i] = true;
    }

    let n_days = history.len();
    let totals: Vec<f64> = history.days().iter().map(|d| d.total_cap()).collect();
    let mut price_index: BTreeMap<SecurityId, f64> = BTreeMap::new();

    let mut ew = PortfolioState::new(tc_bps);
    let mut cw_all = WeightMap::new();
    let mut cw_top = WeightMap::new();

    let mut run = SimulationRun {
        top_n,
        schedule,
        tc_bps,
        dates: history.calendar(),
        ew_relative: Vec::with_capacity(n_days),
        ew_vs_cw_topn: Vec::with_capacity(n_days),
        turnover: Vec::with_capacity(n_days),
        traded_weight: Vec::with_capacity(n_days),
        cost_log: Vec::with_capacity(n_days),
        size_exposure: Vec::with_capacity(n_days),
        trades: Vec::new(),
        rebalance_dates: Vec::new(),
        ew_cum_log_return: 0.0,
    };

    for d in 0..n_days {
        let day = history.day(d);
        for (id, q) in &day.quotes {
            price_index
                .entry(id.clone())
                .and_modify(|p| *p *= 1.0 + q.total_return)
                .or_insert(1.0);
        }

        let (mut ew_log, mut cw_all_log, mut cw_top_log, mut size) = (0.0, 0.0, 0.0, 0.0);
        if d > 0 {
            // Held names without a quote today earn zero return.
            let ret = |id: &SecurityId| day.quotes.get(id).map_or(0.0, |q| q.total_return);
            let (w, g) = drift_with(&ew.weights, ret);
            size = held_size_exposure(history, &totals, d, &ew.weights)?;
            ew.weights = w;
            ew_log = g.ln();
            let (w, g) = drift_with(&cw_all, ret);
            cw_all = w;
            cw_all_log = g.ln();
            let (w, g) = drift_with(&cw_top, ret);
            cw_top = w;
            cw_top_log = g.ln();
        }

        let mut traded = 0.0;
        if is_recon[d] {
            let snapshot = snapshot_at(history, d);
            cw_all = cap_weight_targets(&snapshot, Selection::All)?;
            if d == recon[0] || schedule.includes(day.date) {
                let targets = equal_weight_targets(&snapshot, top_n)?;
                let (next, trades) = rebalance(&ew, &targets, day.date, |id| price_index.get(id).copied())?;
                traded = trades.iter().map(|t| t.weight_change.abs()).sum();
                ew = next;
                run.trades.extend(trades);
                run.rebalance_dates.push(day.date);
                cw_top = cap_weight_targets(&snapshot, Selection::Top(top_n))?;
            }
        }
        let cost = cost_log(ew.tc(), traded);
        ew.cum_log_return += ew_log;
        ew.date = Some(day.date);
        debug_assert!((weight_sum(&ew.weights) - 1.0).abs() < WEIGHT_SUM_TOLERANCE);

        run.ew_relative.push((ew_log - cw_all_log) + cost);
        run.ew_vs_cw_topn.push((ew_log - cw_top_log) + cost);
        run.turnover.push(ew.period_turnover);
        run.traded_weight.push(traded);
        run.cost_log.push(cost);
        run.size_exposure.push(size);
        ew.period_turnover = 0.0;
    }
    run.ew_cum_log_return = ew.cum_log_return;
    Ok(run)
}

/// Size exposure over day `d` of the names held through it. Names without a
/// quote at either end are left out; their effect lands in leakage.
fn held_size_exposure(history: &MarketHistory, totals: &[f64], d: usize, held: &WeightMap) -> Result<f64> {
    let (prev, cur) = (history.day(d - 1), history.day(d));
    let quoted: WeightMap = held
        .iter()
        .filter(|(id, _)| prev.quotes.contains_key(*id) && cur.quotes.contains_key(*id))
        .map(|(id, &w)| (id.clone(), w))
        .collect();
    if quoted.is_empty() {
        return Ok(0.0);
    }
    spt::size_exposure(
        &quoted,
        &quoted,
        |id| prev.quotes.get(id).map(|q| q.market_cap / totals[d - 1]),
        |id| cur.quotes.get(id).map(|q| q.market_cap / totals[d]),
    )
}

/// Writes `date,ew_rel_logret,ew_topn_vs_cw_topn_logret,turnover`.
pub fn write_run_series<W: Write>(run: &SimulationRun, sink: W) -> Result<()> {
    write_columns(
        sink,
        &RUN_SERIES_HEADER,
        &run.dates,
        &[&run.ew_relative, &run.ew_vs_cw_topn, &run.turnover],
    )
}

/// Parsed run series file: (dates, ew relative, top-n relative, turnover).
pub fn read_run_series<R: Read>(source: R) -> Result<(Vec<NaiveDate>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let t = read_columns(source, &RUN_SERIES_HEADER)?;
    let mut c = t.columns.into_iter();
    Ok((
        t.dates,
        c.next().unwrap_or_default(),
        c.next().unwrap_or_default(),
        c.next().unwrap_or_default(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{generate_synthetic, DailyRecord, SyntheticSpec};

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn rec(date: NaiveDate, id: &str, r: f64, cap: f64) -> DailyRecord {
        DailyRecord {
            date,
            security: id.into(),
            total_return: r,
            market_cap: cap,
        }
    }

    #[test]
    fn single_security_tracks_the_market() {
        let h = generate_synthetic(&SyntheticSpec::uniform(2, 1.0, 0.2, 0.0, 1))
            .unwrap()
            .slice(None, None);
        // Keep only one security.
        let only: Vec<_> = h.records().filter(|r| r.security.as_str() == "S0001").collect();
        let h = MarketHistory::from_records(only).unwrap();
        let run = run_simulation(&h, 10, RebalanceSchedule::monthly(), 0.0).unwrap();
        assert!(run.ew_relative.iter().all(|&r| r.abs() < 1e-15));
        assert!(run.size_exposure.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn zero_vol_market_trades_once() {
        let h = generate_synthetic(&SyntheticSpec::uniform(5, 2.0, 0.0, 0.05, 9)).unwrap();
        let run = run_simulation(&h, 5, RebalanceSchedule::monthly(), 40.0).unwrap();
        assert_eq!(run.trades.len(), 5);
        assert!(run.trades.iter().all(|t| t.date == h.day(0).date && t.is_reconstitution_buy));
        assert!(run.ew_relative.iter().skip(1).all(|&r| r == 0.0));
        assert!(run.turnover.iter().skip(1).all(|&r| r == 0.0));
    }

    #[test]
    fn errors() {
        let empty = MarketHistory::from_records(vec![]).unwrap();
        assert!(matches!(
            run_simulation(&empty, 1, RebalanceSchedule::monthly(), 0.0),
            Err(Error::EmptyHistory)
        ));
        let one_month = MarketHistory::from_records(vec![
            rec(d(2000, 1, 3), "A", 0.0, 1.0),
            rec(d(2000, 1, 4), "A", 0.0, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            run_simulation(&one_month, 1, RebalanceSchedule::monthly(), 0.0),
            Err(Error::HistoryTooShort)
        ));
        let two_months = MarketHistory::from_records(vec![
            rec(d(2000, 1, 3), "A", 0.0, 1.0),
            rec(d(2000, 2, 1), "A", 0.0, 1.0),
        ])
        .unwrap();
        let semi: RebalanceSchedule = "semiannual:5".parse().unwrap();
        assert!(matches!(
            run_simulation(&two_months, 1, semi, 0.0),
            Err(Error::NoRebalanceDates)
        ));
    }

    #[test]
    fn missing_quote_earns_zero_and_exits_at_next_reconstitution() {
        let recs = vec![
            rec(d(2000, 1, 3), "A", 0.0, 2.0),
            rec(d(2000, 1, 3), "B", 0.0, 1.0),
            rec(d(2000, 1, 4), "A", 0.1, 2.2),
            // B has no quote on Jan 4 or later.
            rec(d(2000, 2, 1), "A", 0.1, 2.42),
            rec(d(2000, 2, 1), "C", 0.0, 1.0),
        ];
        let h = MarketHistory::from_records(recs).unwrap();
        let run = run_simulation(&h, 2, RebalanceSchedule::monthly(), 0.0).unwrap();
        // Day 1: A +10%, B flat -> EW growth 1.05; market (A 2/3, B 1/3) 1 + 0.2/3.
        let expect = 1.05f64.ln() - (1.0 + 0.2 / 3.0f64).ln();
        assert!((run.ew_relative[1] - expect).abs() < 1e-15);
        let b_sell = run
            .trades
            .iter()
            .find(|t| t.security.as_str() == "B" && t.weight_change < 0.0)
            .expect("B is sold");
        assert_eq!(b_sell.date, d(2000, 2, 1));
        assert_eq!(b_sell.price_index, 1.0);
    }
}
