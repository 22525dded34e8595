//! TOML run configuration. Every key is documented in the README.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::market_data::{generate_synthetic, load_history, MarketHistory, SyntheticSpec};
use crate::portfolio::RebalanceSchedule;
use crate::spt::{check_factor, CalibrationTable};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// CSV path, relative to the config file.
    pub path: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// Universe label for calibration lookups, e.g. `crsp`.
    pub universe: Option<String>,
}

/// `top_n = [100, 500]` or `top_n = { lrg = 100, sml = 500 }`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TopNSpec {
    Labeled(BTreeMap<String, usize>),
    List(Vec<usize>),
}

impl TopNSpec {
    /// `(label, n)` pairs; list entries are labeled `n<value>`.
    pub fn entries(&self) -> Vec<(String, usize)> {
        match self {
            TopNSpec::Labeled(m) => m.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            TopNSpec::List(v) => v.iter().map(|n| (format!("n{n}"), *n)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub top_n: TopNSpec,
    #[serde(default = "default_tc")]
    pub tc_bps: Vec<f64>,
    #[serde(default = "default_schedules")]
    pub schedules: Vec<String>,
}

fn default_tc() -> Vec<f64> {
    vec![0.0]
}

fn default_schedules() -> Vec<String> {
    vec!["monthly".into()]
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Applies to every cell when set.
    pub factor: Option<f64>,
    /// Overrides merged over the built-in table: `[calibration.table.crsp] lrg = 0.3`.
    #[serde(default)]
    pub table: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SummaryFormat {
    #[default]
    Csv,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub summary_format: SummaryFormat,
    /// Also write each cell's trade log.
    #[serde(default)]
    pub write_trades: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            summary_format: SummaryFormat::default(),
            write_trades: false,
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid("<file>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(p), Some(parent)) = (cfg.data.path.as_mut(), path.parent()) {
            if p.is_relative() {
                *p = parent.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.data.source {
            DataSource::Csv if self.data.path.is_none() => {
                return Err(invalid("data.path", "required for csv source"))
            }
            DataSource::Synthetic if self.data.synthetic.is_none() => {
                return Err(invalid("data.synthetic", "required for synthetic source"))
            }
            _ => {}
        }
        if let (Some(s), Some(e)) = (self.data.start, self.data.end) {
            if s > e {
                return Err(invalid("data.start", "after data.end"));
            }
        }
        let top_n = self.grid.top_n.entries();
        if top_n.is_empty() {
            return Err(invalid("grid.top_n", "empty"));
        }
        if top_n.iter().any(|(_, n)| *n == 0) {
            return Err(invalid("grid.top_n", "values must be positive"));
        }
        if self.grid.tc_bps.is_empty() {
            return Err(invalid("grid.tc_bps", "empty"));
        }
        if self.grid.tc_bps.iter().any(|t| !(*t >= 0.0 && *t < 10_000.0)) {
            return Err(invalid("grid.tc_bps", "values must lie in [0, 10000)"));
        }
        if self.grid.schedules.is_empty() {
            return Err(invalid("grid.schedules", "empty"));
        }
        self.schedules()?;
        if let Some(f) = self.calibration.factor {
            check_factor(f).map_err(|e| invalid("calibration.factor", e.to_string()))?;
        }
        self.calibration_table()?;
        Ok(())
    }

    pub fn schedules(&self) -> Result<Vec<RebalanceSchedule>> {
        self.grid
            .schedules
            .iter()
            .map(|s| s.parse().map_err(|e: Error| invalid("grid.schedules", e.to_string())))
            .collect()
    }

    pub fn calibration_table(&self) -> Result<CalibrationTable> {
        let mut table = CalibrationTable::default();
        for (universe, sizes) in &self.calibration.table {
            for (size, &f) in sizes {
                table
                    .insert(universe, size, f)
                    .map_err(|e| invalid(&format!("calibration.table.{universe}.{size}"), e.to_string()))?;
            }
        }
        Ok(table)
    }

    /// Factor for a grid cell: the explicit factor, else the table entry
    /// for (universe, size label), else 0.
    pub fn factor_for(&self, size_label: &str) -> Result<f64> {
        if let Some(f) = self.calibration.factor {
            return Ok(f);
        }
        let table = self.calibration_table()?;
        Ok(self
            .data
            .universe
            .as_deref()
            .and_then(|u| table.get(u, size_label))
            .unwrap_or(0.0))
    }

    /// Loads (or generates) the market and applies the date range.
    pub fn load_market(&self) -> Result<MarketHistory> {
        let full = match self.data.source {
            DataSource::Csv => {
                let path = self.data.path.as_ref().expect("validated");
                load_history(std::fs::File::open(path)?)?
            }
            DataSource::Synthetic => generate_synthetic(self.data.synthetic.as_ref().expect("validated"))?,
        };
        if full.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let (first, last) = (full.day(0).date, full.day(full.len() - 1).date);
        if self.data.start.is_some_and(|s| s > last) {
            return Err(invalid("data.start", format!("after the last data date {last}")));
        }
        if self.data.end.is_some_and(|e| e < first) {
            return Err(invalid("data.end", format!("before the first data date {first}")));
        }
        Ok(full.slice(self.data.start, self.data.end))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[data]
source = "synthetic"
universe = "crsp"
[data.synthetic]
n_assets = 4
horizon_years = 1
vol = 0.2
[grid]
top_n = { lrg = 2, sml = 3 }
tc_bps = [0, 40]
schedules = ["monthly", "quarterly:2"]
"#;

    #[test]
    fn parses_and_defaults() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.grid.top_n.entries(), vec![("lrg".into(), 2), ("sml".into(), 3)]);
        assert_eq!(c.output.dir, PathBuf::from("out"));
        assert_eq!(c.data.synthetic.as_ref().unwrap().vol, vec![0.2]);
        assert_eq!(c.factor_for("lrg").unwrap(), 0.3);
        assert_eq!(c.factor_for("other").unwrap(), 0.0);
        assert_eq!(c.schedules().unwrap().len(), 2);
    }

    #[test]
    fn list_top_n_gets_generated_labels() {
        let c = RunConfig::from_toml(&BASE.replace("{ lrg = 2, sml = 3 }", "[2]")).unwrap();
        assert_eq!(c.grid.top_n.entries(), vec![("n2".into(), 2)]);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (BASE.replace("tc_bps = [0, 40]", "tc_bps = [-1]"), "grid.tc_bps"),
            (BASE.replace("\"quarterly:2\"", "\"quarterly:7\""), "grid.schedules"),
            (BASE.replace("source = \"synthetic\"", "source = \"csv\""), "data.path"),
            (BASE.replace("tc_bps = [0, 40]", "tc_bps = []"), "grid.tc_bps"),
            (format!("{BASE}[calibration]\nfactor = 1.5\n"), "calibration.factor"),
            (format!("{BASE}[calibration.table.crsp]\nlrg = 2.0\n"), "calibration.table.crsp.lrg"),
        ];
        for (text, field) in cases {
            match RunConfig::from_toml(&text) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml(&format!("{BASE}[output]\nbogus = 1\n")).is_err());
    }

    #[test]
    fn date_range_outside_data_is_rejected() {
        let text = BASE.replace("universe = \"crsp\"", "universe = \"crsp\"\nstart = \"2030-01-01\"");
        let c = RunConfig::from_toml(&text).unwrap();
        assert!(matches!(c.load_market(), Err(Error::Config { field, .. }) if field == "data.start"));
    }
}
