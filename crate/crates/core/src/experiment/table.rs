use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "method",
    "alloc",
    "payoff",
    "strike",
    "barrier",
    "price",
    "variance",
    "time_ratio",
    "n_samples",
    "strata",
    "seed",
];

/// One cell of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub alloc: String,
    pub payoff: String,
    pub strike: f64,
    pub barrier: Option<f64>,
    pub price: f64,
    /// Single-draw equivalent variance.
    pub variance: f64,
    /// Wall time relative to plain Monte Carlo; absent when timing is off.
    pub time_ratio: Option<f64>,
    pub n_samples: usize,
    pub strata: usize,
    pub seed: u64,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.alloc.clone(),
            r.payoff.clone(),
            float(r.strike),
            opt_float(r.barrier),
            float(r.price),
            float(r.variance),
            opt_float(r.time_ratio),
            r.n_samples.to_string(),
            r.strata.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json(rows: &[ResultRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::Io(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |what: &str, v: &str| Error::Io(format!("cannot parse {what} `{v}`"));
    let header = r.headers().map_err(|e| Error::Io(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Io(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let f = |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| bad(CSV_HEADER[i], &rec[i])) };
        let opt = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        rows.push(ResultRow {
            method: rec[0].to_string(),
            alloc: rec[1].to_string(),
            payoff: rec[2].to_string(),
            strike: f(3)?,
            barrier: opt(4)?,
            price: f(5)?,
            variance: f(6)?,
            time_ratio: opt(7)?,
            n_samples: rec[8].parse().map_err(|_| bad("n_samples", &rec[8]))?,
            strata: rec[9].parse().map_err(|_| bad("strata", &rec[9]))?,
            seed: rec[10].parse().map_err(|_| bad("seed", &rec[10]))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(barrier: Option<f64>) -> ResultRow {
        ResultRow {
            method: "mc".into(),
            alloc: "none".into(),
            payoff: "asian".into(),
            strike: 50.0,
            barrier,
            price: 4.021345678901234,
            variance: 36.9661,
            time_ratio: Some(1.0),
            n_samples: 100_000,
            strata: 1,
            seed: 42,
        }
    }

    #[test]
    fn single_row_csv() {
        let text = to_csv(&[row(None)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("mc,none,asian,5.0000000000000000e1,,4.021345678901234"));
    }

    #[test]
    fn round_trip() {
        let rows = vec![row(None), row(Some(60.0)), ResultRow { time_ratio: None, ..row(None) }];
        assert_eq!(parse_csv(&to_csv(&rows).unwrap()).unwrap(), rows);
        let json: Vec<ResultRow> = serde_json::from_str(&to_json(&rows).unwrap()).unwrap();
        assert_eq!(json, rows);
    }
}
