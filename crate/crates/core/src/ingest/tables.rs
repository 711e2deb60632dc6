use serde::Deserialize;
use thiserror::Error;

use crate::impact::{IncomeBand, RentRollEntry, SubsidyEntry};
use crate::money::MoneyAmount;

/// A problem in a delimited table. `row` counts data rows from 1 (the header is row 0).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("row {row}: {message}")]
pub struct TableError {
    pub row: usize,
    pub message: String,
}

impl TableError {
    fn new(row: usize, message: impl Into<String>) -> Self {
        TableError { row, message: message.into() }
    }
}

#[derive(Debug, Deserialize)]
struct RawRentRow {
    income_band: String,
    bedrooms: String,
    affordable_rent: String,
    market_rent: String,
    units: String,
}

#[derive(Debug, Deserialize)]
struct RawSubsidyRow {
    income_band: String,
    bedrooms: String,
    monthly_subsidy: String,
    units: String,
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_headers(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), TableError> {
    let headers = rdr.headers().map_err(|e| TableError::new(0, e.to_string()))?;
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(TableError::new(0, format!("missing header row; expected {}", expected.join(","))));
    }
    for name in expected {
        if !headers.iter().any(|h| h == *name) {
            return Err(TableError::new(0, format!("header is missing column `{name}`")));
        }
    }
    if let Some(extra) = headers.iter().find(|h| !expected.contains(h)) {
        return Err(TableError::new(0, format!("unknown column `{extra}`")));
    }
    Ok(())
}

fn band(row: usize, s: &str) -> Result<IncomeBand, TableError> {
    s.parse().map_err(|e: String| TableError::new(row, e))
}

fn count(row: usize, column: &str, s: &str) -> Result<u32, TableError> {
    let value: i64 = s
        .parse()
        .map_err(|_| TableError::new(row, format!("{column} `{s}` is not an integer")))?;
    if value < 0 {
        return Err(TableError::new(row, format!("{column} must not be negative, got {value}")));
    }
    u32::try_from(value).map_err(|_| TableError::new(row, format!("{column} {value} is too large")))
}

fn amount(row: usize, column: &str, s: &str) -> Result<MoneyAmount, TableError> {
    s.parse()
        .map_err(|e| TableError::new(row, format!("{column}: {e}")))
}

/// Parses `income_band,bedrooms,affordable_rent,market_rent,units`.
/// Rows with zero units are kept.
pub fn parse_rent_roll(text: &str) -> Result<Vec<RentRollEntry>, TableError> {
    let mut rdr = reader(text);
    check_headers(&mut rdr, &["income_band", "bedrooms", "affordable_rent", "market_rent", "units"])?;
    let mut entries = Vec::new();
    for (i, record) in rdr.deserialize::<RawRentRow>().enumerate() {
        let row = i + 1;
        let raw = record.map_err(|e| TableError::new(row, e.to_string()))?;
        let entry = RentRollEntry {
            income_band: band(row, &raw.income_band)?,
            bedrooms: count(row, "bedrooms", &raw.bedrooms)?,
            affordable_rent: amount(row, "affordable_rent", &raw.affordable_rent)?,
            market_rent: amount(row, "market_rent", &raw.market_rent)?,
            units: count(row, "units", &raw.units)?,
        };
        if entry.income_band != IncomeBand::MarketRate && entry.market_rent < entry.affordable_rent {
            return Err(TableError::new(row, "market_rent is below affordable_rent"));
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Parses `income_band,bedrooms,monthly_subsidy,units`.
pub fn parse_subsidy_table(text: &str) -> Result<Vec<SubsidyEntry>, TableError> {
    let mut rdr = reader(text);
    check_headers(&mut rdr, &["income_band", "bedrooms", "monthly_subsidy", "units"])?;
    let mut entries = Vec::new();
    for (i, record) in rdr.deserialize::<RawSubsidyRow>().enumerate() {
        let row = i + 1;
        let raw = record.map_err(|e| TableError::new(row, e.to_string()))?;
        let monthly_subsidy = amount(row, "monthly_subsidy", &raw.monthly_subsidy)?;
        if monthly_subsidy.is_negative() {
            return Err(TableError::new(row, "monthly_subsidy must not be negative"));
        }
        entries.push(SubsidyEntry {
            income_band: band(row, &raw.income_band)?,
            bedrooms: count(row, "bedrooms", &raw.bedrooms)?,
            monthly_subsidy,
            units: count(row, "units", &raw.units)?,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "income_band,bedrooms,affordable_rent,market_rent,units\n";

    #[test]
    fn header_only_is_empty() {
        assert_eq!(parse_rent_roll(HEADER).unwrap(), vec![]);
    }

    #[test]
    fn missing_header_rejected() {
        assert_eq!(parse_rent_roll("").unwrap_err().row, 0);
        assert!(parse_rent_roll("ami30,1,532,1159,4\n").is_err());
    }

    #[test]
    fn negative_units_rejected_at_row() {
        let text = format!("{HEADER}ami30,1,532,1159,4\nami50,2,1066,1285,-3\n");
        let err = parse_rent_roll(&text).unwrap_err();
        assert_eq!(err.row, 2);
        assert!(err.message.contains("units"));
    }

    #[test]
    fn unknown_band_and_bad_money() {
        let err = parse_rent_roll(&format!("{HEADER}ami99,1,532,1159,4\n")).unwrap_err();
        assert!(err.message.contains("ami99"));
        let err = parse_rent_roll(&format!("{HEADER}ami30,1,\"5,32\",1159,4\n")).unwrap_err();
        assert!(err.message.contains("affordable_rent"));
    }

    #[test]
    fn zero_unit_rows_retained_and_columns_reorderable() {
        let text = "units,income_band,bedrooms,market_rent,affordable_rent\n0,market_rate,1,1159,1159\n3,AMI60,2,1285,1279\n";
        let roll = parse_rent_roll(text).unwrap();
        assert_eq!(roll.len(), 2);
        assert_eq!(roll[0].units, 0);
        assert_eq!(roll[1].income_band, IncomeBand::Ami60);
        assert_eq!(roll[1].monthly_gap(), MoneyAmount::from_dollars(6));
    }

    #[test]
    fn subsidy_table() {
        let text = "income_band,bedrooms,monthly_subsidy,units\nami30,1,824.84,47\n";
        let subs = parse_subsidy_table(text).unwrap();
        assert_eq!(subs[0].monthly_subsidy.cents(), 82_484);
        let err = parse_subsidy_table("income_band,bedrooms,monthly_subsidy,units\nami30,1,-1,2\n").unwrap_err();
        assert_eq!(err.row, 1);
        let err = parse_subsidy_table("income_band,bedrooms,monthly_subsidy,units,extra\n").unwrap_err();
        assert!(err.message.contains("extra"));
    }
}
