//! Monthly CSV tables, excess-return construction and constant-maturity
//! bond total returns.
//!
//! CSV layout: an optional `# units=percent` (or `# units=decimal`) pragma
//! on the first line, a header row with a `date` column holding `YYYY-MM`
//! months, and numeric value columns. Percent columns are divided by 100 on
//! ingest so that every table in memory holds decimals.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_monthly, ExcessReturnSeries, YearMonth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Decimal,
    Percent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub date_column: String,
    /// Columns to keep, in order; `None` keeps every non-date column.
    pub columns: Option<Vec<String>>,
    /// Overrides the file's pragma when set.
    pub units: Option<Units>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { date_column: "date".into(), columns: None, units: None }
    }
}

/// Validated monthly table of decimal values.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyTable {
    pub dates: Vec<YearMonth>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl MonthlyTable {
    pub fn new(dates: Vec<YearMonth>, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::EmptyTable);
        }
        if names.len() != columns.len() || columns.iter().any(|c| c.len() != dates.len()) {
            return Err(Error::LengthMismatch { detail: "table columns are ragged".into() });
        }
        check_monthly(&dates)?;
        Ok(Self { dates, names, columns })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.into()))
    }

    /// Bivariate series from two named columns.
    pub fn to_series(&self, market: &str, hedge: &str) -> Result<ExcessReturnSeries> {
        ExcessReturnSeries::new(
            self.dates.clone(),
            self.column(market)?.to_vec(),
            self.column(hedge)?.to_vec(),
        )
    }
}

fn pragma_units(first_line: &str) -> Option<Units> {
    let line = first_line.trim_start();
    let body = line.strip_prefix('#')?;
    body.split(|c: char| c.is_whitespace() || c == ',').find_map(|tok| {
        match tok.trim().to_ascii_lowercase().as_str() {
            "units=percent" => Some(Units::Percent),
            "units=decimal" => Some(Units::Decimal),
            _ => None,
        }
    })
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<MonthlyTable> {
    let file = std::fs::File::open(path)?;
    parse_csv(file, opts)
}

pub fn parse_csv<R: Read>(mut reader: R, opts: &LoadOptions) -> Result<MonthlyTable> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let pragma = text.lines().next().and_then(pragma_units);
    let units = opts.units.or(pragma).unwrap_or(Units::Decimal);
    let scale = match units {
        Units::Decimal => 1.0,
        Units::Percent => 0.01,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let date_idx = header
        .iter()
        .position(|h| *h == opts.date_column)
        .ok_or_else(|| Error::UnknownColumn(opts.date_column.clone()))?;
    let wanted: Vec<String> = match &opts.columns {
        Some(c) => c.clone(),
        None => header.iter().filter(|h| **h != opts.date_column).cloned().collect(),
    };
    let idx: Vec<usize> = wanted
        .iter()
        .map(|w| header.iter().position(|h| h == w).ok_or_else(|| Error::UnknownColumn(w.clone())))
        .collect::<Result<_>>()?;

    let mut dates = Vec::new();
    let mut columns = vec![Vec::new(); idx.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = row + 1;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let date: YearMonth = field(date_idx).parse().map_err(|e: Error| Error::Parse {
            row,
            column: opts.date_column.clone(),
            message: e.to_string(),
        })?;
        dates.push(date);
        for (col, &i) in columns.iter_mut().zip(&idx) {
            let raw = field(i);
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row,
                column: header[i].clone(),
                message: format!("`{raw}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { column: header[i].clone(), row });
            }
            col.push(v * scale);
        }
    }
    MonthlyTable::new(dates, wanted, columns)
}

/// Writes `table` with a `date` column; values are written as decimals
/// unless `units` is `Percent`, in which case a pragma line is emitted.
pub fn write_csv<W: Write>(mut w: W, table: &MonthlyTable, units: Units) -> Result<()> {
    if units == Units::Percent {
        writeln!(w, "# units=percent")?;
    }
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(table.names.iter().cloned());
    wtr.write_record(&header)?;
    let scale = if units == Units::Percent { 100.0 } else { 1.0 };
    for (t, d) in table.dates.iter().enumerate() {
        let mut rec = vec![d.to_string()];
        rec.extend(table.columns.iter().map(|c| format!("{}", c[t] * scale)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Dated column of values.
#[derive(Debug, Clone, Copy)]
pub struct Column<'a> {
    pub dates: &'a [YearMonth],
    pub values: &'a [f64],
}

/// Monthly excess returns: total return minus one twelfth of the
/// annualized risk-free yield.
pub fn excess_returns(total: Column<'_>, rf_annual: Column<'_>) -> Result<Vec<f64>> {
    if total.dates != rf_annual.dates || total.values.len() != rf_annual.values.len() {
        return Err(Error::MisalignedDates(format!(
            "total returns cover {} months, risk-free yields {}",
            total.dates.len(),
            rf_annual.dates.len()
        )));
    }
    Ok(total.values.iter().zip(rf_annual.values).map(|(r, rf)| r - rf / 12.0).collect())
}

/// Price per unit face of an annual-coupon bond with integer maturity,
/// discounted at the annual yield `y`.
pub fn bond_price(y: f64, coupon: f64, maturity_years: u32) -> f64 {
    let v = 1.0 / (1.0 + y);
    let n = maturity_years as i32;
    // Annuity factor times coupon plus discounted principal.
    let annuity = if y == 0.0 { n as f64 } else { (1.0 - v.powi(n)) / y };
    coupon * annuity + v.powi(n)
}

/// Monthly total returns of a constant-maturity bond from annualized
/// yields: the coupon accrued over the month plus the price change of a
/// par bond issued at last month's yield and repriced at this month's.
/// Output has one fewer element than `yields`.
pub fn bond_total_return(yields: &[f64], maturity_years: u32) -> Result<Vec<f64>> {
    if let Some((index, &value)) =
        yields.iter().enumerate().find(|(_, y)| !(y.is_finite() && **y > 0.0))
    {
        return Err(Error::InvalidYield { index, value });
    }
    if maturity_years == 0 {
        return Err(Error::InvalidConfig("maturity must be at least one year".into()));
    }
    Ok(yields
        .windows(2)
        .map(|w| {
            let (prev, cur) = (w[0], w[1]);
            prev / 12.0 + bond_price(cur, prev, maturity_years) - 1.0
        })
        .collect())
}

/// Arithmetic mean across equally weighted return series.
pub fn equal_weight(series: &[&[f64]]) -> Result<Vec<f64>> {
    let Some(first) = series.first() else {
        return Err(Error::EmptyInput);
    };
    if series.iter().any(|s| s.len() != first.len()) {
        return Err(Error::LengthMismatch { detail: "portfolio legs differ in length".into() });
    }
    let k = series.len() as f64;
    Ok((0..first.len()).map(|t| series.iter().map(|s| s[t]).sum::<f64>() / k).collect())
}
