// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delimited rate files → aligned return matrix.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::data::{ReturnMatrix, Timestamp};
use crate::error::{CovsegError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Keep only timestamps present in every series.
    #[default]
    Intersect,
    /// Fail on the first missing cell.
    ErrorOnGap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnKind {
    /// `log R(t+1) − log R(t)`, evaluated as `log(R(t+1)/R(t))`.
    #[default]
    Log,
    /// `R(t+1) − R(t)`.
    Diff,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Field delimiter; sniffed from the header line when `None` (tab if present, else comma).
    pub delimiter: Option<u8>,
    /// Name of the timestamp column; the first column when `None`.
    pub time_column: Option<String>,
}

/// Per-series positive rates keyed by timestamp.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub labels: Vec<String>,
    pub series: Vec<BTreeMap<Timestamp, f64>>,
}

impl RateTable {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

pub fn load_rates(path: &Path, options: &LoadOptions) -> Result<RateTable> {
    let text = std::fs::read_to_string(path).map_err(|source| CovsegError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_rates(&text, &path.display().to_string(), options)
}

fn sniff_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

/// Parses delimited text with a header row. Empty cells are treated as missing.
pub fn parse_rates(text: &str, source: &str, options: &LoadOptions) -> Result<RateTable> {
    let parse_err = |line: usize, message: String| CovsegError::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let delimiter = options.delimiter.unwrap_or_else(|| sniff_delimiter(text));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header.iter().all(String::is_empty) {
        return Err(parse_err(
            1,
            "header needs a timestamp column and at least one series".into(),
        ));
    }
    let time_idx = match &options.time_column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("no timestamp column named '{name}'")))?,
        None => 0,
    };
    let series_cols: Vec<usize> = (0..header.len()).filter(|&c| c != time_idx).collect();
    let labels: Vec<String> = series_cols.iter().map(|&c| header[c].clone()).collect();
    {
        let mut seen = BTreeSet::new();
        for l in &labels {
            if l.is_empty() {
                return Err(parse_err(1, "empty series label in header".into()));
            }
            if !seen.insert(l) {
                return Err(parse_err(1, format!("duplicate series label '{l}'")));
            }
        }
    }

    let mut series = vec![BTreeMap::new(); labels.len()];
    let mut stamp_kind: Option<bool> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let raw_stamp = &record[time_idx];
        let stamp = Timestamp::parse(raw_stamp)
            .ok_or_else(|| parse_err(line, format!("unparseable timestamp '{raw_stamp}'")))?;
        match stamp_kind {
            None => stamp_kind = Some(stamp.is_date()),
            Some(kind) if kind != stamp.is_date() => {
                return Err(parse_err(line, "mixed date and integer timestamps".into()));
            }
            _ => {}
        }
        for (k, &col) in series_cols.iter().enumerate() {
            let cell = &record[col];
            if cell.is_empty() {
                continue;
            }
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    parse_err(
                        line,
                        format!("column '{}': malformed number '{cell}'", labels[k]),
                    )
                })?;
            if value <= 0.0 {
                return Err(CovsegError::NonPositiveRate {
                    row: line,
                    column: labels[k].clone(),
                    value,
                });
            }
            if series[k].insert(stamp, value).is_some() {
                return Err(parse_err(line, format!("duplicate timestamp {stamp}")));
            }
        }
    }
    Ok(RateTable { labels, series })
}

/// Differences consecutive aligned rates. Output timestamps are the later
/// endpoint of each difference, so `T` = aligned timestamps − 1.
pub fn to_log_returns(
    table: &RateTable,
    alignment: Alignment,
    kind: ReturnKind,
) -> Result<ReturnMatrix> {
    let m = table.dim();
    if m == 0 {
        return Err(CovsegError::InvalidData("rate table has no series".into()));
    }
    let grid: Vec<Timestamp> = match alignment {
        Alignment::Intersect => {
            let mut common: BTreeSet<Timestamp> = table.series[0].keys().copied().collect();
            for s in &table.series[1..] {
                common.retain(|t| s.contains_key(t));
            }
            common.into_iter().collect()
        }
        Alignment::ErrorOnGap => {
            let all: BTreeSet<Timestamp> = table
                .series
                .iter()
                .flat_map(|s| s.keys().copied())
                .collect();
            for t in &all {
                for (label, s) in table.labels.iter().zip(&table.series) {
                    if !s.contains_key(t) {
                        return Err(CovsegError::MissingCell {
                            timestamp: t.to_string(),
                            column: label.clone(),
                        });
                    }
                }
            }
            all.into_iter().collect()
        }
    };
    if grid.len() < 3 {
        return Err(CovsegError::InvalidData(format!(
            "need at least 3 aligned timestamps for 2 returns, found {}",
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(m * (grid.len() - 1));
    for w in grid.windows(2) {
        for s in &table.series {
            let (a, b) = (s[&w[0]], s[&w[1]]);
            values.push(match kind {
                ReturnKind::Log => (b / a).ln(),
                ReturnKind::Diff => b - a,
            });
        }
    }
    ReturnMatrix::from_column_major(m, values, table.labels.clone(), grid[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn parse(text: &str) -> Result<RateTable> {
        parse_rates(text, "mem.csv", &LoadOptions::default())
    }

    #[test]
    fn well_formed_file() {
        let t = parse("date,EUR/USD,USD/JPY\n2001-01-04,0.95,114.2\n2001-01-05,0.96,115.0\n2001-01-08,0.94,116.1\n")
            .unwrap();
        assert_eq!(t.labels, vec!["EUR/USD", "USD/JPY"]);
        assert!(t.series.iter().all(|s| s.len() == 3));
    }

    #[test]
    fn zero_rate_names_the_cell() {
        let e = parse("t,a,b\n1,1.0,2.0\n2,0.0,2.0\n").unwrap_err();
        match &e {
            CovsegError::NonPositiveRate { row, column, value } => {
                assert_eq!((*row, column.as_str(), *value), (3, "a", 0.0));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(e.to_string().contains("row 3"));
    }

    #[test]
    fn malformed_cell_has_coordinates() {
        let e = parse("t,a,b\n1,1.0,2.0\n2,1.5,abc\n").unwrap_err();
        assert!(
            matches!(&e, CovsegError::Parse { line: 3, message, .. } if message.contains("'b'"))
        );
    }

    #[test]
    fn header_problems() {
        assert!(parse("t\n1\n").is_err());
        assert!(parse("t,a,a\n1,1,1\n").is_err());
        let opts = LoadOptions {
            time_column: Some("when".into()),
            ..Default::default()
        };
        assert!(parse_rates("t,a\n1,1\n", "x", &opts).is_err());
    }

    #[test]
    fn mixed_timestamps_rejected() {
        assert!(parse("t,a\n1,1.0\n2001-01-02,1.0\n").is_err());
    }

    #[test]
    fn tab_delimited_and_named_time_column() {
        let opts = LoadOptions {
            time_column: Some("day".into()),
            ..Default::default()
        };
        let t = parse_rates("a\tday\tb\n1.0\t1\t2.0\n1.1\t2\t2.2\n", "x.tsv", &opts).unwrap();
        assert_eq!(t.labels, vec!["a", "b"]);
        assert_eq!(t.series[1][&Timestamp::Index(2)], 2.2);
    }

    #[test]
    fn exact_log_returns() {
        let t = parse(&format!("t,a,b\n0,1,5\n1,{},5\n2,{},5\n", E, E * E)).unwrap();
        let r = to_log_returns(&t, Alignment::Intersect, ReturnKind::Log).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.series(0).all(|v| (v - 1.0).abs() < 1e-15));
        assert!(r.series(1).all(|v| v == 0.0));
        assert_eq!(r.timestamps(), &[Timestamp::Index(1), Timestamp::Index(2)]);
    }

    #[test]
    fn diff_returns() {
        let t = parse("t,a\n0,1\n1,3\n2,2\n").unwrap();
        let r = to_log_returns(&t, Alignment::Intersect, ReturnKind::Diff).unwrap();
        assert_eq!(r.series(0).collect::<Vec<_>>(), vec![2.0, -1.0]);
    }

    #[test]
    fn alignment_modes() {
        let t = parse("t,a,b\n0,1,1\n1,2,\n2,3,3\n3,4,4\n").unwrap();
        let r = to_log_returns(&t, Alignment::Intersect, ReturnKind::Log).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.timestamps(), &[Timestamp::Index(2), Timestamp::Index(3)]);
        match to_log_returns(&t, Alignment::ErrorOnGap, ReturnKind::Log) {
            Err(CovsegError::MissingCell { timestamp, column }) => {
                assert_eq!((timestamp.as_str(), column.as_str()), ("1", "b"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_aligned_rows() {
        let t = parse("t,a,b\n0,1,\n1,2,2\n2,3,\n3,4,4\n").unwrap();
        assert!(to_log_returns(&t, Alignment::Intersect, ReturnKind::Log).is_err());
    }
}
