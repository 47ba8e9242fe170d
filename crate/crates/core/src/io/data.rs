//! CSV ingestion.
//!
//! Input files have a `date` column (ISO-8601, strictly increasing) followed
//! by one numeric column per asset, holding either prices or returns.

use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use nalgebra::DVector;
use sha2::{Digest, Sha256};

use crate::error::{MvarError, Result};
use crate::model::SeriesMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputKind {
    Prices,
    Returns,
}

/// A dated numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub names: Vec<String>,
    pub dates: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Rows skipped because at least one cell was empty or not a number.
    pub dropped_rows: usize,
}

fn parse_date(s: &str) -> Option<NaiveDateTime> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").ok())
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S").ok())
}

impl PriceTable {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.get(0).map(str::to_ascii_lowercase).as_deref() != Some("date") {
            return Err(MvarError::Data("first CSV column must be `date`".into()));
        }
        if header.len() < 2 {
            return Err(MvarError::Data("CSV needs at least one value column".into()));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut values = Vec::new();
        let mut dropped_rows = 0;
        let mut last: Option<NaiveDateTime> = None;
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let date = record.get(0).unwrap_or_default().to_string();
            let parsed = parse_date(&date).ok_or_else(|| {
                MvarError::Data(format!("row {}: `{date}` is not an ISO-8601 date", i + 1))
            })?;
            let row: Option<Vec<f64>> = (1..header.len())
                .map(|j| record.get(j).and_then(|c| c.parse::<f64>().ok()).filter(|v| v.is_finite()))
                .collect();
            let Some(row) = row else {
                dropped_rows += 1;
                continue;
            };
            if last.is_some_and(|prev| parsed <= prev) {
                return Err(MvarError::Data(format!(
                    "row {}: dates must be strictly increasing ({date})",
                    i + 1
                )));
            }
            last = Some(parsed);
            dates.push(date);
            values.push(row);
        }
        Ok(Self { names, dates, values, dropped_rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| MvarError::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn to_series(&self) -> Result<SeriesMatrix> {
        SeriesMatrix::from_rows(&self.values)
    }
}

/// Simple returns (P_{t+1} − P_t)/P_t; the output has one row fewer.
pub fn returns_from_prices(prices: &PriceTable) -> Result<SeriesMatrix> {
    if prices.values.len() < 2 {
        return Err(MvarError::SeriesTooShort { needed: 2, have: prices.values.len() });
    }
    for (i, row) in prices.values.iter().enumerate() {
        if let Some(j) = row.iter().position(|p| !(*p > 0.0)) {
            return Err(MvarError::Data(format!(
                "price at row {} column `{}` is not positive",
                i + 1,
                prices.names[j]
            )));
        }
    }
    let rows = prices
        .values
        .windows(2)
        .map(|w| DVector::from_iterator(w[0].len(), w[0].iter().zip(&w[1]).map(|(a, b)| (b - a) / a)))
        .collect();
    SeriesMatrix::new(rows)
}

/// Reads a CSV as a return series, converting prices when asked. Also
/// returns the asset names and the SHA-256 of the file bytes.
pub fn load_series(path: &Path, kind: InputKind) -> Result<(SeriesMatrix, Vec<String>, String)> {
    let bytes =
        std::fs::read(path).map_err(|e| MvarError::Io(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let table = PriceTable::from_reader(bytes.as_slice())?;
    let series = match kind {
        InputKind::Prices => returns_from_prices(&table)?,
        InputKind::Returns => table.to_series()?,
    };
    Ok((series, table.names, hash))
}

/// Writes a series as CSV with synthetic daily dates starting 2000-01-01.
pub fn write_series_csv<W: std::io::Write>(
    series: &SeriesMatrix,
    names: &[String],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    for (t, row) in series.rows().iter().enumerate() {
        let date = start + chrono::Duration::days(t as i64);
        let mut record = vec![date.format("%Y-%m-%d").to_string()];
        record.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn default_names(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("asset{i}")).collect()
}
