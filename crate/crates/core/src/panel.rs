//! Return-panel ingestion and descriptive statistics.

use crate::error::{Error, Result};
use crate::portfolio::empirical_cvar;
use crate::util::dist::chi2_sf;
use crate::util::stats;
use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Whether panel values are percent returns (paper-style) or decimal
/// fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReturnUnit {
    Percent,
    Decimal,
}

impl ReturnUnit {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "percent" | "pct" => Ok(ReturnUnit::Percent),
            "decimal" | "dec" => Ok(ReturnUnit::Decimal),
            other => Err(Error::InvalidParameter(format!("unknown unit `{other}`"))),
        }
    }
}

/// A dated T x d panel of log returns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnPanel {
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    /// Row-major storage via nalgebra: rows = days, columns = assets.
    pub returns: DMatrix<f64>,
    pub unit: ReturnUnit,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, returns: DMatrix<f64>, unit: ReturnUnit) -> Result<Self> {
        if returns.nrows() != dates.len() {
            return Err(Error::DimensionMismatch { expected: dates.len(), got: returns.nrows() });
        }
        if returns.ncols() != assets.len() {
            return Err(Error::DimensionMismatch { expected: assets.len(), got: returns.ncols() });
        }
        if assets.len() < 2 {
            return Err(Error::InvalidData("need at least 2 assets".into()));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidData(format!("dates not strictly increasing at {}", w[1])));
            }
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite return".into()));
        }
        Ok(ReturnPanel { dates, assets, returns, unit })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// Returns in decimal units regardless of storage.
    pub fn decimal_returns(&self) -> DMatrix<f64> {
        match self.unit {
            ReturnUnit::Decimal => self.returns.clone(),
            ReturnUnit::Percent => &self.returns * 0.01,
        }
    }
}

/// CSV ingestion options.
#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Interpret columns as price levels and convert to percent log
    /// returns `100 ln(P_t / P_{t-1})`.
    pub prices: bool,
    /// Unit of the stored returns (ignored when `prices` is set; price
    /// conversion always produces percent).
    pub unit: ReturnUnit,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { prices: false, unit: ReturnUnit::Percent }
    }
}

/// Parsed panel plus the number of rows dropped for missing cells.
#[derive(Debug)]
pub struct LoadedPanel {
    pub panel: ReturnPanel,
    pub dropped_rows: usize,
}

/// Load a panel from CSV: header `date,ASSET1,ASSET2,...`; rows with
/// empty cells are dropped (counted); unparseable values are hard errors
/// naming the line; duplicate or backward dates are errors naming the
/// date.
pub fn load_returns(path: &std::path::Path, options: LoadOptions) -> Result<LoadedPanel> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 3 {
        return Err(Error::InvalidData("need at least 2 asset columns".into()));
    }
    let assets: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_string()).collect();

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record?;
        if record.len() != headers.len() {
            dropped += 1;
            continue;
        }
        if record.iter().any(|cell| cell.trim().is_empty()) {
            dropped += 1;
            continue;
        }
        let date_str = record.get(0).unwrap().trim();
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d")
            .map_err(|_| Error::Io(format!("line {line}: unparseable date `{date_str}`")))?;
        if let Some(&last) = dates.last() {
            if date == last {
                return Err(Error::InvalidData(format!("duplicate date {date}")));
            }
            if date < last {
                return Err(Error::InvalidData(format!("dates not increasing at {date}")));
            }
        }
        let mut row = Vec::with_capacity(assets.len());
        for (j, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Io(format!("line {line}: unparseable value `{}` for {}", cell.trim(), assets[j]))
            })?;
            row.push(v);
        }
        dates.push(date);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("no usable rows".into()));
    }

    let (dates, rows, unit) = if options.prices {
        let mut out_rows = Vec::with_capacity(rows.len().saturating_sub(1));
        for t in 1..rows.len() {
            let row: Result<Vec<f64>> = rows[t]
                .iter()
                .zip(&rows[t - 1])
                .map(|(&p1, &p0)| {
                    if p0 <= 0.0 || p1 <= 0.0 {
                        Err(Error::InvalidData("nonpositive price".into()))
                    } else {
                        Ok(100.0 * (p1 / p0).ln())
                    }
                })
                .collect();
            out_rows.push(row?);
        }
        (dates[1..].to_vec(), out_rows, ReturnUnit::Percent)
    } else {
        (dates, rows, options.unit)
    };

    let matrix = DMatrix::from_fn(rows.len(), assets.len(), |i, j| rows[i][j]);
    Ok(LoadedPanel { panel: ReturnPanel::new(dates, assets, matrix, unit)?, dropped_rows: dropped })
}

/// Per-asset descriptive statistics in the panel's stored units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssetSummary {
    pub asset: String,
    pub mean: f64,
    pub std_dev: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Positive-loss empirical VaR at the requested level.
    pub var: f64,
    /// Positive-loss empirical CVaR at the requested level.
    pub cvar: f64,
    /// Jarque-Bera statistic; absent for constant columns.
    pub jarque_bera: Option<f64>,
    pub jb_p_value: Option<f64>,
}

/// Summary table mirroring the usual descriptive-statistics layout.
pub fn describe(panel: &ReturnPanel, level: f64) -> Result<Vec<AssetSummary>> {
    if panel.is_empty() {
        return Err(Error::InvalidData("empty panel".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("level {level}")));
    }
    let n = panel.len() as f64;
    let mut out = Vec::with_capacity(panel.n_assets());
    for (j, name) in panel.assets.iter().enumerate() {
        let col: Vec<f64> = panel.returns.column(j).iter().copied().collect();
        let sd = stats::std_dev(&col);
        let (skew, kurt, jb, jb_p) = if sd > 0.0 {
            let s = stats::skewness(&col);
            let k = stats::excess_kurtosis(&col);
            let jb = n / 6.0 * (s * s + k * k / 4.0);
            (s, k, Some(jb), Some(chi2_sf(jb, 2.0)))
        } else {
            (f64::NAN, f64::NAN, None, None)
        };
        let mut sorted = col.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };
        out.push(AssetSummary {
            asset: name.clone(),
            mean: stats::mean(&col),
            std_dev: sd,
            median,
            min: sorted[0],
            max: *sorted.last().unwrap(),
            skewness: skew,
            excess_kurtosis: kurt,
            var: -stats::empirical_quantile(&col, level),
            cvar: empirical_cvar(&col, level)?,
            jarque_bera: jb,
            jb_p_value: jb_p,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::dist::normal_quantile;
    use crate::util::rng::rng_for;
    use rand::Rng;
    use std::io::Write;

    fn write_csv(content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("vineport-panel-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("t{}.csv", rand::random::<u64>()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_price_file_as_log_returns() {
        let path = write_csv("date,A,B\n2020-01-01,100,50\n2020-01-02,101,50\n2020-01-03,100,50\n");
        let loaded = load_returns(&path, LoadOptions { prices: true, unit: ReturnUnit::Percent }).unwrap();
        let p = loaded.panel;
        assert_eq!(p.len(), 2);
        assert!((p.returns[(0, 0)] - 100.0 * (101f64 / 100.0).ln()).abs() < 1e-12);
        assert!((p.returns[(0, 0)] - 0.995).abs() < 0.001);
        assert!((p.returns[(1, 0)] + 0.995).abs() < 0.001);
        assert_eq!(p.returns[(0, 1)], 0.0);
    }

    #[test]
    fn duplicate_date_errors_with_name() {
        let path = write_csv("date,A,B\n2020-01-01,1,2\n2020-01-01,3,4\n");
        let err = load_returns(&path, LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("2020-01-01"), "{err}");
    }

    #[test]
    fn missing_cell_rows_dropped_with_count() {
        let path = write_csv("date,A,B\n2020-01-01,1,2\n2020-01-02,,3\n2020-01-03,4,5\n");
        let loaded = load_returns(&path, LoadOptions::default()).unwrap();
        assert_eq!(loaded.dropped_rows, 1);
        assert_eq!(loaded.panel.len(), 2);
    }

    #[test]
    fn unparseable_value_names_line() {
        let path = write_csv("date,A,B\n2020-01-01,1,2\n2020-01-02,abc,3\n");
        let err = load_returns(&path, LoadOptions::default()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn single_asset_rejected() {
        let path = write_csv("date,A\n2020-01-01,1\n");
        assert!(load_returns(&path, LoadOptions::default()).is_err());
    }

    #[test]
    fn describe_normal_column() {
        let mut rng = rng_for(1, "panel-desc", 0);
        let n = 100_000;
        let m = DMatrix::from_fn(n, 2, |_, j| {
            let z = normal_quantile(rng.gen_range(1e-12..1.0));
            if j == 0 {
                z
            } else {
                0.5 * z + 0.01
            }
        });
        let dates: Vec<NaiveDate> = (0..n as i32)
            .map(|i| NaiveDate::from_num_days_from_ce_opt(730_000 + i).unwrap())
            .collect();
        let panel = ReturnPanel::new(dates, vec!["A".into(), "B".into()], m, ReturnUnit::Percent).unwrap();
        let d = describe(&panel, 0.10).unwrap();
        assert!(d[0].skewness.abs() < 0.03, "skew {}", d[0].skewness);
        assert!(d[0].excess_kurtosis.abs() < 0.06, "kurt {}", d[0].excess_kurtosis);
        assert!(d[0].jb_p_value.unwrap() > 0.001);
        // VaR ~ 1.2816, CVaR ~ 1.755 for a standard normal at 10%
        assert!((d[0].var - 1.2816).abs() < 0.03);
        assert!((d[0].cvar - 1.755).abs() < 0.04);
    }

    #[test]
    fn describe_constant_column_flagged() {
        let m = DMatrix::from_fn(50, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let dates: Vec<NaiveDate> = (0..50)
            .map(|i| NaiveDate::from_num_days_from_ce_opt(730_000 + i).unwrap())
            .collect();
        let panel = ReturnPanel::new(dates, vec!["A".into(), "B".into()], m, ReturnUnit::Percent).unwrap();
        let d = describe(&panel, 0.10).unwrap();
        assert_eq!(d[0].std_dev, 0.0);
        assert!(d[0].jarque_bera.is_none());
        assert!(d[1].jarque_bera.is_some());
    }

    #[test]
    fn unit_conversion() {
        let m = DMatrix::from_element(5, 2, 1.0);
        let dates: Vec<NaiveDate> = (0..5)
            .map(|i| NaiveDate::from_num_days_from_ce_opt(730_000 + i).unwrap())
            .collect();
        let panel = ReturnPanel::new(dates, vec!["A".into(), "B".into()], m, ReturnUnit::Percent).unwrap();
        assert!((panel.decimal_returns()[(0, 0)] - 0.01).abs() < 1e-15);
    }
}
