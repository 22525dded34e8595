//! Equal-weighted and cap-weighted portfolio mechanics: self-financing weight
//! drift, rebalancing targets, trading with proportional costs, and the
//! daily simulation loop.

mod schedule;
mod simulation;
mod stats;
mod trades_csv;

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::{SecurityId, UniverseSnapshot};

pub use schedule::{Frequency, RebalanceSchedule};
pub use simulation::{read_run_series, run_simulation, write_run_series, SimulationRun, RUN_SERIES_HEADER};
pub use stats::{annualized_stats, monthly_totals, AnnualizedStats};
pub use trades_csv::{read_trades, write_trades, TRADES_HEADER};

/// Portfolio weights by security. Absent means zero.
pub type WeightMap = BTreeMap<SecurityId, f64>;

/// Tolerance on `sum(w) == 1` after every weight operation.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioState {
    pub date: Option<NaiveDate>,
    pub weights: WeightMap,
    pub cum_log_return: f64,
    /// One-way turnover accumulated since the caller last reset it.
    pub period_turnover: f64,
    pub tc_bps: f64,
}

impl PortfolioState {
    /// An uninvested state; the first rebalance establishes the portfolio.
    pub fn new(tc_bps: f64) -> Self {
        Self {
            date: None,
            weights: WeightMap::new(),
            cum_log_return: 0.0,
            period_turnover: 0.0,
            tc_bps,
        }
    }

    pub fn tc(&self) -> f64 {
        self.tc_bps / 10_000.0
    }
}

/// One position change produced by a rebalance.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeEvent {
    pub date: NaiveDate,
    pub security: SecurityId,
    pub weight_change: f64,
    /// Total-return index of the security at trade time, base 1.0 at its
    /// first appearance in the data.
    pub price_index: f64,
    pub is_reconstitution_buy: bool,
}

/// Log relative return per calendar period.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeSeries {
    pub dates: Vec<NaiveDate>,
    pub log_relative_return: Vec<f64>,
}

impl RelativeSeries {
    pub fn cumulative(&self) -> Vec<f64> {
        self.log_relative_return
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect()
    }
}

/// Self-financing drift: `w_i (1 + r_i) / sum_j w_j (1 + r_j)`.
pub fn drift_weights(weights: &WeightMap, returns: &BTreeMap<SecurityId, f64>) -> Result<WeightMap> {
    for id in weights.keys() {
        if !returns.contains_key(id) {
            return Err(Error::MissingReturn(id.to_string()));
        }
    }
    Ok(drift_with(weights, |id| returns.get(id).copied().unwrap_or(0.0)).0)
}

/// Drifts `weights` under `ret(id)` and returns the new weights together
/// with the portfolio's gross growth factor `sum_j w_j (1 + r_j)`.
pub(crate) fn drift_with(weights: &WeightMap, ret: impl Fn(&SecurityId) -> f64) -> (WeightMap, f64) {
    if weights.is_empty() {
        return (WeightMap::new(), 1.0);
    }
    let grown: Vec<(&SecurityId, f64, f64)> = weights
        .iter()
        .map(|(id, &w)| {
            let g = 1.0 + ret(id);
            (id, w, g)
        })
        .collect();
    let growth: f64 = grown.iter().map(|(_, w, g)| w * g).sum();
    let first = grown[0].2;
    if grown.iter().all(|(_, _, g)| *g == first) {
        // Equal returns leave relative weights untouched.
        return (weights.clone(), first);
    }
    let drifted = grown
        .into_iter()
        .map(|(id, w, g)| (id.clone(), w * g / growth))
        .collect();
    (drifted, growth)
}

/// `1 / min(top_n, members)` on each of the largest names.
pub fn equal_weight_targets(snapshot: &UniverseSnapshot, top_n: usize) -> Result<WeightMap> {
    let k = top_n.min(snapshot.len());
    if k == 0 {
        return Err(Error::EmptySnapshot);
    }
    let w = 1.0 / k as f64;
    Ok(snapshot.top(k).map(|(id, _)| (id.clone(), w)).collect())
}

/// Which members a cap-weighted portfolio spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    Top(usize),
}

pub fn cap_weight_targets(snapshot: &UniverseSnapshot, selection: Selection) -> Result<WeightMap> {
    let k = match selection {
        Selection::All => snapshot.len(),
        Selection::Top(n) => n.min(snapshot.len()),
    };
    if k == 0 {
        return Err(Error::EmptySnapshot);
    }
    let total: f64 = snapshot.top(k).map(|(_, c)| c).sum();
    Ok(snapshot
        .top(k)
        .map(|(id, cap)| (id.clone(), cap / total))
        .collect())
}

/// Trades `state` to `targets` at the given price indices.
///
/// Emits one event per security whose weight changes, charges
/// `ln(1 - tc * sum|dw|)` to the cumulative log return and adds
/// `sum|dw| / 2` to the turnover accumulator.
pub fn rebalance(
    state: &PortfolioState,
    targets: &WeightMap,
    date: NaiveDate,
    price_index: impl Fn(&SecurityId) -> Option<f64>,
) -> Result<(PortfolioState, Vec<TradeEvent>)> {
    let mut trades = Vec::new();
    let mut traded = 0.0;
    let mut ids: Vec<&SecurityId> = state.weights.keys().chain(targets.keys()).collect();
    ids.sort();
    ids.dedup();
    for id in ids {
        let before = state.weights.get(id).copied().unwrap_or(0.0);
        let after = targets.get(id).copied().unwrap_or(0.0);
        let change = after - before;
        if change == 0.0 {
            continue;
        }
        let price = price_index(id).ok_or_else(|| Error::MissingReturn(id.to_string()))?;
        traded += change.abs();
        trades.push(TradeEvent {
            date,
            security: id.clone(),
            weight_change: change,
            price_index: price,
            is_reconstitution_buy: before == 0.0 && after > 0.0,
        });
    }
    let next = PortfolioState {
        date: Some(date),
        weights: targets.iter().filter(|(_, &w)| w > 0.0).map(|(k, &w)| (k.clone(), w)).collect(),
        cum_log_return: state.cum_log_return + cost_log(state.tc(), traded),
        period_turnover: state.period_turnover + 0.5 * traded,
        tc_bps: state.tc_bps,
    };
    Ok((next, trades))
}

/// Log performance charge for trading `traded = sum|dw|` at cost rate `tc`.
pub fn cost_log(tc: f64, traded: f64) -> f64 {
    if tc == 0.0 || traded == 0.0 {
        0.0
    } else {
        (-tc * traded).ln_1p()
    }
}

pub(crate) fn weight_sum(weights: &WeightMap) -> f64 {
    weights.values().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wm(entries: &[(&str, f64)]) -> WeightMap {
        entries.iter().map(|&(k, v)| (k.into(), v)).collect()
    }

    fn rets(entries: &[(&str, f64)]) -> BTreeMap<SecurityId, f64> {
        wm(entries)
    }

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2010, 3, 1).unwrap()
    }

    fn snap(caps: &[(&str, f64)]) -> UniverseSnapshot {
        UniverseSnapshot::ranked(date(), caps.iter().map(|&(k, c)| (k.into(), c)))
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-15
    }

    #[test]
    fn drift_two_assets() {
        let w = drift_weights(&wm(&[("A", 0.5), ("B", 0.5)]), &rets(&[("A", 0.1), ("B", -0.1)])).unwrap();
        assert!(close(w[&"A".into()], 0.55));
        assert!(close(w[&"B".into()], 0.45));
    }

    #[test]
    fn drift_four_assets() {
        let w = drift_weights(
            &wm(&[("A", 0.25), ("B", 0.25), ("C", 0.25), ("D", 0.25)]),
            &rets(&[("A", 0.2), ("B", 0.0), ("C", 0.0), ("D", 0.0)]),
        )
        .unwrap();
        assert!(close(w[&"A".into()], 0.3 / 1.05));
        for k in ["B", "C", "D"] {
            assert!(close(w[&k.into()], 0.25 / 1.05));
        }
    }

    #[test]
    fn drift_with_equal_returns_is_identity() {
        let start = wm(&[("A", 0.2), ("B", 0.3), ("C", 0.5)]);
        let w = drift_weights(&start, &rets(&[("A", 0.07), ("B", 0.07), ("C", 0.07)])).unwrap();
        assert_eq!(w, start);
    }

    #[test]
    fn drift_requires_returns_for_holdings() {
        let err = drift_weights(&wm(&[("A", 1.0)]), &rets(&[("B", 0.0)])).unwrap_err();
        assert!(matches!(err, Error::MissingReturn(id) if id == "A"));
    }

    #[test]
    fn equal_weights() {
        let s = snap(&[("A", 1.0), ("B", 2.0), ("C", 3.0), ("D", 4.0)]);
        let w = equal_weight_targets(&s, 4).unwrap();
        assert!(w.values().all(|&x| x == 0.25));

        let s = snap(&(0..10).map(|i| (["A", "B", "C", "D", "E", "F", "G", "H", "I", "J"][i], i as f64 + 1.0)).collect::<Vec<_>>());
        let w = equal_weight_targets(&s, 3).unwrap();
        assert_eq!(w.keys().map(|k| k.as_str()).collect::<Vec<_>>(), ["H", "I", "J"]);
        assert!(w.values().all(|&x| x == 1.0 / 3.0));

        assert!(matches!(equal_weight_targets(&snap(&[]), 3), Err(Error::EmptySnapshot)));
    }

    #[test]
    fn cap_weights() {
        let s = snap(&[("A", 6.0), ("B", 3.0), ("C", 1.0)]);
        let all = cap_weight_targets(&s, Selection::All).unwrap();
        assert!(close(all[&"A".into()], 0.6) && close(all[&"B".into()], 0.3) && close(all[&"C".into()], 0.1));
        let top = cap_weight_targets(&s, Selection::Top(2)).unwrap();
        assert!(close(top[&"A".into()], 2.0 / 3.0) && close(top[&"B".into()], 1.0 / 3.0));
        assert_eq!(top.len(), 2);

        let eq = snap(&[("A", 5.0), ("B", 5.0), ("C", 5.0)]);
        assert_eq!(cap_weight_targets(&eq, Selection::All).unwrap(), equal_weight_targets(&eq, 3).unwrap());
        assert!(cap_weight_targets(&snap(&[]), Selection::All).is_err());
    }

    #[test]
    fn rebalance_at_targets_is_a_no_op() {
        let mut state = PortfolioState::new(40.0);
        state.weights = wm(&[("A", 0.5), ("B", 0.5)]);
        let (next, trades) = rebalance(&state, &state.weights.clone(), date(), |_| Some(1.0)).unwrap();
        assert!(trades.is_empty());
        assert_eq!(next.cum_log_return, 0.0);
        assert_eq!(next.period_turnover, 0.0);
    }

    #[test]
    fn rebalance_charges_proportional_cost() {
        let mut state = PortfolioState::new(40.0);
        state.weights = wm(&[("A", 1.0)]);
        let targets = wm(&[("A", 0.5), ("B", 0.5)]);
        let (next, trades) = rebalance(&state, &targets, date(), |_| Some(1.0)).unwrap();
        assert!(close(next.cum_log_return.exp(), 0.996));
        assert_eq!(trades.len(), 2);
        assert!(!trades[0].is_reconstitution_buy);
        assert!(trades[1].is_reconstitution_buy);
        assert_eq!(next.period_turnover, 0.5);
    }

    #[test]
    fn rebalance_from_drift_reports_one_way_turnover() {
        let mut state = PortfolioState::new(0.0);
        state.weights = wm(&[("A", 0.55), ("B", 0.45)]);
        let (next, trades) = rebalance(&state, &wm(&[("A", 0.5), ("B", 0.5)]), date(), |_| Some(1.0)).unwrap();
        assert!((next.period_turnover - 0.05).abs() < 1e-15);
        assert_eq!(trades[0].security.as_str(), "A");
        assert!((trades[0].weight_change + 0.05).abs() < 1e-15);
        assert_eq!(trades[1].security.as_str(), "B");
        assert!((trades[1].weight_change - 0.05).abs() < 1e-15);
        assert!(trades.iter().all(|t| !t.is_reconstitution_buy));
    }

    #[test]
    fn exits_are_removed_from_weights() {
        let mut state = PortfolioState::new(0.0);
        state.weights = wm(&[("A", 0.5), ("B", 0.5)]);
        let (next, trades) = rebalance(&state, &wm(&[("A", 0.5), ("C", 0.5)]), date(), |_| Some(2.0)).unwrap();
        assert_eq!(next.weights.keys().map(|k| k.as_str()).collect::<Vec<_>>(), ["A", "C"]);
        assert_eq!(trades.len(), 2);
        assert!(trades[1].is_reconstitution_buy && trades[1].price_index == 2.0);
    }

    proptest! {
        #[test]
        fn drift_preserves_normalization(
            raw in prop::collection::vec((0.01f64..1.0, -0.5f64..0.5), 1..40)
        ) {
            let total: f64 = raw.iter().map(|(w, _)| w).sum();
            let weights: WeightMap = raw.iter().enumerate()
                .map(|(i, (w, _))| (SecurityId::new(format!("S{i}")), w / total)).collect();
            let returns: BTreeMap<_, _> = raw.iter().enumerate()
                .map(|(i, (_, r))| (SecurityId::new(format!("S{i}")), *r)).collect();
            let drifted = drift_weights(&weights, &returns).unwrap();
            prop_assert!((weight_sum(&drifted) - 1.0).abs() < WEIGHT_SUM_TOLERANCE);
            prop_assert!(drifted.values().all(|&w| w >= 0.0));
        }
    }
}
