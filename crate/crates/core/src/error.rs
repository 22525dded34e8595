use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("line {line}: duplicate record for ({date}, {security})")]
    DuplicateRecord {
        line: u64,
        date: NaiveDate,
        security: String,
    },

    #[error("line {line}: market cap must be positive, got {cap}")]
    NonPositiveCap { line: u64, cap: f64 },

    #[error("line {line}: total return must exceed -1, got {ret}")]
    ReturnAtOrBelowMinusOne { line: u64, ret: f64 },

    #[error("invalid synthetic market spec: {0}")]
    InvalidSynthetic(String),

    #[error("correlation {0} does not give a positive semi-definite covariance (need 0 <= rho < 1)")]
    NonPsdCorrelation(f64),

    #[error("date {0} is not on the trading calendar")]
    DateNotOnCalendar(NaiveDate),

    #[error("no return for held security {0}")]
    MissingReturn(String),

    #[error("empty universe snapshot")]
    EmptySnapshot,

    #[error("empty market history")]
    EmptyHistory,

    #[error("history spans fewer than two reconstitution dates")]
    HistoryTooShort,

    #[error("rebalance schedule produces no rebalance dates")]
    NoRebalanceDates,

    #[error("invalid rebalance schedule: {0}")]
    InvalidSchedule(String),

    #[error("market weight for held security {0} is zero or missing")]
    MissingMarketWeight(String),

    #[error("buy event must have a positive weight change, got {0}")]
    NonPositiveBuy(f64),

    #[error("sell event must have a negative weight change, got {0}")]
    NonNegativeSell(f64),

    #[error("trade on {date} is earlier than the preceding trade on {previous}")]
    OutOfOrderTrades { date: NaiveDate, previous: NaiveDate },

    #[error("sell of {0}, which was never bought")]
    SellWithoutBuy(String),

    #[error("series too short: need at least {needed} points, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("misaligned series: {0}")]
    Misaligned(String),

    #[error("calibration factor {0} outside [0, 1]")]
    InvalidCalibration(f64),

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
