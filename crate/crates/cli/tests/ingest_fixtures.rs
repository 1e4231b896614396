use std::path::PathBuf;

use spinmarket_cli::ingest::{parse_ohlcv_csv, parse_ohlcv_str, parse_tick_csv, parse_tick_str, write_ohlcv_csv, write_tick_csv};
use spinmarket_cli::pipeline::sha256_hex;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

const TICKS_SHA256: &str = "a08ab41d71644b00ed897c7ed7b27f439731e0bdbc1c9ca593fc67adaf366e33";
const EOD_SHA256: &str = "d67a40d957f663a2ca96965184bc0eabf3b242e2a41e40c257c04c6924e463a8";

#[test]
fn bundled_tick_sample() {
    let bytes = std::fs::read(fixture("ticks_sample.csv")).unwrap();
    assert_eq!(sha256_hex(&bytes), TICKS_SHA256);
    let series = parse_tick_csv(&fixture("ticks_sample.csv")).unwrap();
    assert_eq!(series.len(), 4680);
    assert_eq!(series.level(), 0);
    assert_eq!(series.prices()[0], 100.0);
    assert_eq!(series.timestamps()[0], 1_704_205_800_000);
}

#[test]
fn bundled_eod_sample() {
    let bytes = std::fs::read(fixture("eod_sample.csv")).unwrap();
    assert_eq!(sha256_hex(&bytes), EOD_SHA256);
    let series = parse_ohlcv_csv(&fixture("eod_sample.csv")).unwrap();
    assert_eq!(series.len(), 150);
    assert_eq!(series.opens().unwrap()[0], 100.0);
    assert_eq!(series.prices()[0], 100.04);
}

#[test]
fn round_trips_are_identity() {
    let text = std::fs::read_to_string(fixture("ticks_sample.csv")).unwrap();
    let recs = parse_tick_str(&text, "ticks").unwrap();
    assert_eq!(write_tick_csv(&recs), text);
    assert_eq!(parse_tick_str(&write_tick_csv(&recs), "again").unwrap(), recs);

    let text = std::fs::read_to_string(fixture("eod_sample.csv")).unwrap();
    let recs = parse_ohlcv_str(&text, "eod").unwrap();
    assert_eq!(write_ohlcv_csv(&recs), text);
    assert_eq!(parse_ohlcv_str(&write_ohlcv_csv(&recs), "again").unwrap(), recs);
}

#[test]
fn accepts_documented_grammar_variants() {
    let padded = "timestamp , price , volume\n 1 , 2.5 , 0 \n2,1e2,3.25\n";
    let recs = parse_tick_str(padded, "p").unwrap();
    assert_eq!(recs[1].price, 100.0);
    assert!(parse_tick_str("timestamp,price,volume\n1,2,3\n", "p").is_ok());
    assert!(parse_tick_str("timestamp,price,volume,extra\n1,2,3,4\n", "p").is_err());
}
