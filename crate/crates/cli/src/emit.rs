//! Tradeoff tables as CSV or JSON lines, each with a version header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::sweep::TradeoffRecord;

pub const TABLE_NAME: &str = "sumstat-tradeoff";
pub const TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    JsonLines,
}

impl FromStr for TableFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json-lines" | "jsonl" => Ok(TableFormat::JsonLines),
            other => Err(CliError::Format(other.to_string())),
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Header {
    format: String,
    version: u32,
}

fn csv_header() -> String {
    format!("# {TABLE_NAME} v{TABLE_VERSION}")
}

pub fn write_records<W: Write>(
    records: &[TradeoffRecord],
    format: TableFormat,
    mut w: W,
) -> Result<()> {
    let io = |source| CliError::Io {
        path: "<output>".into(),
        source,
    };
    match format {
        TableFormat::Csv => {
            writeln!(w, "{}", csv_header()).map_err(io)?;
            let mut wtr = csv::WriterBuilder::new()
                .has_headers(true)
                .from_writer(&mut w);
            if records.is_empty() {
                wtr.write_record(column_names())?;
            }
            for r in records {
                wtr.serialize(r)?;
            }
            wtr.flush().map_err(io)?;
        }
        TableFormat::JsonLines => {
            let header = Header {
                format: TABLE_NAME.into(),
                version: TABLE_VERSION,
            };
            serde_json::to_writer(&mut w, &header)?;
            writeln!(w).map_err(io)?;
            for r in records {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

pub fn read_records<R: Read>(format: TableFormat, r: R) -> Result<Vec<TradeoffRecord>> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|source| CliError::Io {
            path: "<input>".into(),
            source,
        })?;
    let bad_header = || CliError::Format(format!("missing {TABLE_NAME} v{TABLE_VERSION} header"));
    match format {
        TableFormat::Csv => {
            if first.trim_end() != csv_header() {
                return Err(bad_header());
            }
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(reader);
            Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
        }
        TableFormat::JsonLines => {
            let header: Header = serde_json::from_str(&first).map_err(|_| bad_header())?;
            if header.format != TABLE_NAME || header.version != TABLE_VERSION {
                return Err(bad_header());
            }
            reader
                .lines()
                .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
                .map(|l| {
                    let l = l.map_err(|source| CliError::Io {
                        path: "<input>".into(),
                        source,
                    })?;
                    Ok(serde_json::from_str(&l)?)
                })
                .collect()
        }
    }
}

/// Writes to `path`, creating or truncating it.
pub fn emit(records: &[TradeoffRecord], format: TableFormat, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_records(records, format, BufWriter::new(f))
}

/// CSV column order.
pub fn column_names() -> Vec<&'static str> {
    vec![
        "grid_index",
        "mechanism",
        "hyperparameter",
        "repeat",
        "seed",
        "distortion",
        "distortion_estimator",
        "distortion_exact_subsample",
        "distortion_sliced",
        "privacy_union",
        "privacy_inter",
        "privacy_group",
        "privacy_l1",
        "privacy_linf",
        "analytic_union",
        "bound_union",
        "coef_union",
        "coef_inter",
        "coef_group",
        "coef_l1",
        "coef_linf",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(x: f64, opt: Option<f64>) -> TradeoffRecord {
        TradeoffRecord {
            grid_index: 3,
            mechanism: "dp-hist".into(),
            hyperparameter: x,
            repeat: 1,
            seed: u64::MAX,
            distortion: x * 0.1,
            distortion_estimator: "mean-split".into(),
            distortion_exact_subsample: 1.0 / 3.0,
            distortion_sliced: 2.0f64.sqrt(),
            privacy_union: -x,
            privacy_inter: -1e-300,
            privacy_group: 0.0,
            privacy_l1: -7.25,
            privacy_linf: -0.1 - 0.2,
            analytic_union: opt,
            bound_union: opt.map(|v| v * 3.0),
            coef_union: 26f64.sqrt(),
            coef_inter: 1.0,
            coef_group: 10f64.sqrt(),
            coef_l1: 8.0 / 3f64.sqrt(),
            coef_linf: 4.0,
        }
    }

    fn round_trip(recs: &[TradeoffRecord], f: TableFormat) -> Vec<TradeoffRecord> {
        let mut buf = Vec::new();
        write_records(recs, f, &mut buf).unwrap();
        read_records(f, buf.as_slice()).unwrap()
    }

    proptest! {
        #[test]
        fn lossless(x in -1e6f64..1e6, o in proptest::option::of(0.0f64..1.0)) {
            let recs = vec![record(x, o), record(x / 7.0, None)];
            prop_assert_eq!(&round_trip(&recs, TableFormat::Csv), &recs);
            prop_assert_eq!(&round_trip(&recs, TableFormat::JsonLines), &recs);
        }
    }

    #[test]
    fn csv_layout() {
        let recs = vec![record(1.5, Some(0.7)), record(2.5, None)];
        let mut buf = Vec::new();
        write_records(&recs, TableFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# sumstat-tradeoff v1");
        assert_eq!(lines[1], column_names().join(","));
        assert_eq!(lines.len(), 4);
        let mut rdr = csv::Reader::from_reader(text.split_once('\n').unwrap().1.as_bytes());
        for row in rdr.records() {
            assert_eq!(row.unwrap().len(), column_names().len());
        }
    }

    #[test]
    fn empty_tables_keep_header() {
        let mut buf = Vec::new();
        write_records(&[], TableFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 2);
        assert!(read_records(TableFormat::Csv, buf.as_slice())
            .unwrap()
            .is_empty());
        assert!(round_trip(&[], TableFormat::JsonLines).is_empty());
    }

    #[test]
    fn json_lines_parse_independently() {
        let recs = vec![record(1.0, None), record(2.0, Some(0.5))];
        let mut buf = Vec::new();
        write_records(&recs, TableFormat::JsonLines, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let second: TradeoffRecord = serde_json::from_str(lines[2]).unwrap();
        assert_eq!(second, recs[1]);
    }

    #[test]
    fn header_is_checked() {
        assert!(read_records(TableFormat::Csv, "grid_index\n".as_bytes()).is_err());
        assert!(read_records(
            TableFormat::JsonLines,
            "{\"format\":\"x\",\"version\":1}\n".as_bytes()
        )
        .is_err());
        assert!("xml".parse::<TableFormat>().is_err());
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("no/such/dir/out.csv");
        assert!(matches!(
            emit(&[], TableFormat::Csv, &path),
            Err(CliError::Io { .. })
        ));
    }
}
