//! CSV ingestion for tick and end-of-day data, plus the matching writers.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use spinmarket_core::thermometer::{PriceSeries, SignMethod, TemperatureSeries};

use crate::error::{CliError, Result};

pub const TICK_HEADER: [&str; 3] = ["timestamp", "price", "volume"];
pub const OHLCV_HEADER: [&str; 6] = ["date", "open", "high", "low", "close", "volume"];
pub const TEMPERATURE_HEADER: [&str; 3] = ["timestamp", "temperature", "level"];

const MS_PER_DAY: i64 = 86_400_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub timestamp_ms: i64,
    pub price: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcvRecord {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl OhlcvRecord {
    /// Midnight UTC of the trading date, in epoch milliseconds.
    pub fn timestamp_ms(&self) -> i64 {
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
        (self.date - epoch).num_days() * MS_PER_DAY
    }
}

/// Reads rows after checking the header; hands each row to `f` with its
/// 1-based data row number.
fn for_each_row(
    text: &str,
    source: &str,
    header: &[&str],
    mut f: impl FnMut(usize, &csv::StringRecord) -> std::result::Result<(), String>,
) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |row: usize, line: usize, reason: String| CliError::Parse {
        path: source.to_string(),
        row,
        line,
        reason,
    };
    let found = reader.headers().map_err(|e| parse_err(0, 1, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            0,
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let line = i + 2;
        let record = record.map_err(|e| parse_err(row, line, e.to_string()))?;
        let line = record.position().map_or(line, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(row, line, format!("expected {} fields, found {}", header.len(), record.len())));
        }
        f(row, &record).map_err(|reason| parse_err(row, line, reason))?;
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(0, 1, "no data rows".into()));
    }
    Ok(())
}

fn number(record: &csv::StringRecord, i: usize, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = record[i].parse().map_err(|_| format!("{name} `{}` is not a number", &record[i]))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} `{}` is not finite", &record[i]))
    }
}

fn positive(record: &csv::StringRecord, i: usize, name: &str) -> std::result::Result<f64, String> {
    let v = number(record, i, name)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{name} {v} must be positive"))
    }
}

fn non_negative(record: &csv::StringRecord, i: usize, name: &str) -> std::result::Result<f64, String> {
    let v = number(record, i, name)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{name} {v} must not be negative"))
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn parse_tick_str(text: &str, source: &str) -> Result<Vec<TickRecord>> {
    let mut out: Vec<TickRecord> = Vec::new();
    for_each_row(text, source, &TICK_HEADER, |_, r| {
        let timestamp_ms: i64 = r[0].parse().map_err(|_| format!("timestamp `{}` is not an integer", &r[0]))?;
        if let Some(prev) = out.last() {
            if timestamp_ms <= prev.timestamp_ms {
                return Err(format!("timestamp {timestamp_ms} does not follow {}", prev.timestamp_ms));
            }
        }
        out.push(TickRecord {
            timestamp_ms,
            price: positive(r, 1, "price")?,
            volume: non_negative(r, 2, "volume")?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn parse_ohlcv_str(text: &str, source: &str) -> Result<Vec<OhlcvRecord>> {
    let mut out: Vec<OhlcvRecord> = Vec::new();
    for_each_row(text, source, &OHLCV_HEADER, |_, r| {
        let date = NaiveDate::parse_from_str(&r[0], "%Y-%m-%d").map_err(|_| format!("date `{}` is not YYYY-MM-DD", &r[0]))?;
        if let Some(prev) = out.last() {
            if date <= prev.date {
                return Err(format!("date {date} does not follow {}", prev.date));
            }
        }
        let rec = OhlcvRecord {
            date,
            open: positive(r, 1, "open")?,
            high: positive(r, 2, "high")?,
            low: positive(r, 3, "low")?,
            close: positive(r, 4, "close")?,
            volume: non_negative(r, 5, "volume")?,
        };
        if rec.low > rec.high {
            return Err(format!("low {} exceeds high {}", rec.low, rec.high));
        }
        for (name, v) in [("open", rec.open), ("close", rec.close)] {
            if v < rec.low || v > rec.high {
                return Err(format!("{name} {v} outside [low {}, high {}]", rec.low, rec.high));
            }
        }
        out.push(rec);
        Ok(())
    })?;
    Ok(out)
}

pub fn ticks_to_series(records: &[TickRecord]) -> Result<PriceSeries> {
    Ok(PriceSeries::new(
        records.iter().map(|r| r.timestamp_ms).collect(),
        records.iter().map(|r| r.price).collect(),
        Some(records.iter().map(|r| r.volume).collect()),
        0,
    )?)
}

/// Closes as the series, with session opens retained.
pub fn ohlcv_to_series(records: &[OhlcvRecord]) -> Result<PriceSeries> {
    Ok(PriceSeries::new(
        records.iter().map(OhlcvRecord::timestamp_ms).collect(),
        records.iter().map(|r| r.close).collect(),
        Some(records.iter().map(|r| r.volume).collect()),
        0,
    )?
    .with_opens(records.iter().map(|r| r.open).collect())?)
}

pub fn parse_tick_csv(path: &Path) -> Result<PriceSeries> {
    ticks_to_series(&parse_tick_str(&read_text(path)?, &path.display().to_string())?)
}

pub fn parse_ohlcv_csv(path: &Path) -> Result<PriceSeries> {
    ohlcv_to_series(&parse_ohlcv_str(&read_text(path)?, &path.display().to_string())?)
}

/// Shortest decimal that parses back to the same value.
fn shortest(x: f64) -> String {
    format!("{x}")
}

pub fn write_tick_csv(records: &[TickRecord]) -> String {
    let mut out = TICK_HEADER.join(",") + "\n";
    for r in records {
        out += &format!("{},{},{}\n", r.timestamp_ms, shortest(r.price), shortest(r.volume));
    }
    out
}

pub fn write_ohlcv_csv(records: &[OhlcvRecord]) -> String {
    let mut out = OHLCV_HEADER.join(",") + "\n";
    for r in records {
        out += &format!(
            "{},{},{},{},{},{}\n",
            r.date.format("%Y-%m-%d"),
            shortest(r.open),
            shortest(r.high),
            shortest(r.low),
            shortest(r.close),
            shortest(r.volume)
        );
    }
    out
}

/// Tick-format export of a series; missing volumes are written as zero.
pub fn series_to_tick_csv(series: &PriceSeries) -> String {
    let records: Vec<TickRecord> = (0..series.len())
        .map(|i| TickRecord {
            timestamp_ms: series.timestamps()[i],
            price: series.prices()[i],
            volume: series.volumes().map_or(0.0, |v| v[i]),
        })
        .collect();
    write_tick_csv(&records)
}

/// Reads a `timestamp,temperature,level` file; empty temperatures are
/// warm-up samples.
pub fn parse_temperature_str(text: &str, source: &str) -> Result<TemperatureSeries> {
    let mut timestamps: Vec<i64> = Vec::new();
    let mut temperatures = Vec::new();
    let mut level = None;
    for_each_row(text, source, &TEMPERATURE_HEADER, |_, r| {
        let ts: i64 = r[0].parse().map_err(|_| format!("timestamp `{}` is not an integer", &r[0]))?;
        if timestamps.last().is_some_and(|&p| ts <= p) {
            return Err(format!("timestamp {ts} is not increasing"));
        }
        let t = match &r[1] {
            "" => None,
            "+inf" | "-inf" | "nan" => return Err(format!("temperature `{}` is not finite", &r[1])),
            _ => Some(number(r, 1, "temperature")?),
        };
        let k: usize = r[2].parse().map_err(|_| format!("level `{}` is not a non-negative integer", &r[2]))?;
        if level.is_some_and(|l| l != k) {
            return Err(format!("level {k} differs from earlier rows"));
        }
        level = Some(k);
        timestamps.push(ts);
        temperatures.push(t);
        Ok(())
    })?;
    let warmup = temperatures.iter().take_while(|t| t.is_none()).count();
    Ok(TemperatureSeries {
        timestamps,
        temperatures,
        level: level.unwrap_or(0),
        window: warmup + 1,
        sign_method: SignMethod::AlwaysPositive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_valid_rows() {
        let recs = parse_tick_str("timestamp,price,volume\n1000,10.5,3\n2000,10.75,0\n", "t").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(ticks_to_series(&recs).unwrap().prices(), &[10.5, 10.75]);
    }

    #[test]
    fn negative_price_names_row_two() {
        let err = parse_tick_str("timestamp,price,volume\n1000,10.5,3\n2000,-1,1\n", "t").unwrap_err();
        match &err {
            CliError::Parse { row, line, .. } => assert_eq!((*row, *line), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("row 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn tick_malformations() {
        let bad = [
            "time,price,volume\n1,1,1\n",
            "timestamp,price,volume\n",
            "timestamp,price,volume\n2,1,1\n2,1,1\n",
            "timestamp,price,volume\n1,abc,1\n",
            "timestamp,price,volume\n1,1,-1\n",
            "timestamp,price,volume\n1.5,1,1\n",
            "timestamp,price,volume\n1,inf,1\n",
            "timestamp,price,volume\n1,1\n",
        ];
        for text in bad {
            assert!(parse_tick_str(text, "t").is_err(), "{text:?}");
        }
    }

    #[test]
    fn ohlcv_rows() {
        let text = "date,open,high,low,close,volume\n2024-01-02,10,11,9.5,10.5,100\n2024-01-03,10.5,10.8,10,10.2,80\n2024-01-04,10.2,10.4,9.9,10,0\n";
        let recs = parse_ohlcv_str(text, "e").unwrap();
        let s = ohlcv_to_series(&recs).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.prices(), &[10.5, 10.2, 10.0]);
        assert_eq!(s.opens(), Some(&[10.0, 10.5, 10.2][..]));
        assert_eq!(s.timestamps()[0], 1_704_153_600_000);
        assert_eq!(write_ohlcv_csv(&recs), text);
    }

    #[test]
    fn ohlcv_bounds() {
        let high_below_low = "date,open,high,low,close,volume\n2024-01-02,10,9,11,10,1\n";
        assert!(parse_ohlcv_str(high_below_low, "e").is_err());
        let close_above_high = "date,open,high,low,close,volume\n2024-01-02,10,11,9,12,1\n";
        assert!(parse_ohlcv_str(close_above_high, "e").is_err());
        let bad_date = "date,open,high,low,close,volume\n02/01/2024,10,11,9,10,1\n";
        assert!(parse_ohlcv_str(bad_date, "e").is_err());
    }

    #[test]
    fn temperature_files() {
        let t = parse_temperature_str("timestamp,temperature,level\n1,,2\n2,,2\n3,0.5,2\n4,-0.25,2\n", "x").unwrap();
        assert_eq!(t.level, 2);
        assert_eq!(t.window, 3);
        assert_eq!(t.temperatures, vec![None, None, Some(0.5), Some(-0.25)]);
        assert!(parse_temperature_str("timestamp,temperature,level\n1,1,0\n2,1,1\n", "x").is_err());
    }
}
