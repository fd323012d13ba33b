//! CSV emission and parse-back.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::spec::Scenario;
use super::sweep::{ComparisonRow, SweepRow};

pub const COLUMNS: [&str; 21] = [
    "scenario", "channel", "method", "D_m", "LtH_m", "LtV_m", "LrH_m", "LrV_m", "MH", "MV", "NH", "NV", "AH_m", "AV_m",
    "Ms", "Ns", "seed", "edof", "alpha", "runtime_s", "error",
];

/// One CSV line; floats are held at the written precision so parse-back is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub scenario: String,
    pub channel: String,
    pub method: String,
    #[serde(rename = "D_m")]
    pub d_m: Option<f64>,
    #[serde(rename = "LtH_m")]
    pub lth_m: Option<f64>,
    #[serde(rename = "LtV_m")]
    pub ltv_m: Option<f64>,
    #[serde(rename = "LrH_m")]
    pub lrh_m: Option<f64>,
    #[serde(rename = "LrV_m")]
    pub lrv_m: Option<f64>,
    #[serde(rename = "MH")]
    pub mh: Option<usize>,
    #[serde(rename = "MV")]
    pub mv: Option<usize>,
    #[serde(rename = "NH")]
    pub nh: Option<usize>,
    #[serde(rename = "NV")]
    pub nv: Option<usize>,
    #[serde(rename = "AH_m")]
    pub ah_m: Option<f64>,
    #[serde(rename = "AV_m")]
    pub av_m: Option<f64>,
    #[serde(rename = "Ms")]
    pub ms: Option<usize>,
    #[serde(rename = "Ns")]
    pub ns: Option<usize>,
    pub seed: u64,
    pub edof: Option<f64>,
    pub alpha: Option<f64>,
    pub runtime_s: Option<f64>,
    pub error: Option<String>,
}

/// Nine significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn rounded(v: f64) -> f64 {
    format_float(v).parse().expect("formatted floats parse")
}

impl CsvRecord {
    /// Inapplicable fields are left empty; `timings` keeps the wall-clock column.
    pub fn from_row(row: &SweepRow, timings: bool) -> Self {
        let p = row.point.as_ref();
        let planar = !matches!(row.scenario, Scenario::Ula | Scenario::Cap1d);
        let discrete = !matches!(row.scenario, Scenario::Cap2d | Scenario::Cap1d);
        let sampled = matches!(row.scenario, Scenario::Cap2d | Scenario::Cap1d) && row.method == super::Method::Closed;
        let patch = row.scenario == Scenario::UpaPatch;
        let len = |f: fn(&super::Point) -> f64, on: bool| p.filter(|_| on).map(|p| rounded(f(p)));
        let cnt = |f: fn(&super::Point) -> usize, on: bool| p.filter(|_| on).map(f);
        Self {
            scenario: row.scenario.name().into(),
            channel: row.channel.name().into(),
            method: row.method.name().into(),
            d_m: len(|p| p.distance, true),
            lth_m: len(|p| p.lt_h, planar),
            ltv_m: len(|p| p.lt_v, true),
            lrh_m: len(|p| p.lr_h, planar),
            lrv_m: len(|p| p.lr_v, true),
            mh: cnt(|p| p.mh, discrete),
            mv: cnt(|p| p.mv, discrete),
            nh: cnt(|p| p.nh, discrete),
            nv: cnt(|p| p.nv, discrete),
            ah_m: len(|p| p.ah, patch),
            av_m: len(|p| p.av, patch),
            ms: cnt(|p| p.ms, sampled),
            ns: cnt(|p| p.ns, sampled),
            seed: row.spec_seed,
            edof: row.edof.map(rounded),
            alpha: row.alpha.map(rounded),
            runtime_s: timings.then(|| rounded(row.runtime_s)),
            error: row.error.clone(),
        }
    }

    fn fields(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        let n = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.scenario.clone(),
            self.channel.clone(),
            self.method.clone(),
            f(self.d_m),
            f(self.lth_m),
            f(self.ltv_m),
            f(self.lrh_m),
            f(self.lrv_m),
            n(self.mh),
            n(self.mv),
            n(self.nh),
            n(self.nv),
            f(self.ah_m),
            f(self.av_m),
            n(self.ms),
            n(self.ns),
            self.seed.to_string(),
            f(self.edof),
            f(self.alpha),
            f(self.runtime_s),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io {
            path: "<stream>".into(),
            source: io,
        },
        other => Error::Config(format!("csv: {other:?}")),
    }
}

pub fn write_records(records: &[CsvRecord], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<stream>".into(),
        source: e,
    })
}

pub fn write_rows(rows: &[SweepRow], out: impl Write, timings: bool) -> Result<()> {
    let records: Vec<CsvRecord> = rows.iter().map(|r| CsvRecord::from_row(r, timings)).collect();
    write_records(&records, out)
}

pub fn rows_to_string(rows: &[SweepRow], timings: bool) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf, timings).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Write the sweep CSV to `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path, timings: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    with_path(path, write_rows(rows, &mut out, timings))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(input: impl Read) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != COLUMNS {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|rec| rec.map_err(csv_err)).collect()
}

pub const COMPARISON_COLUMNS: [&str; 5] = ["index", "swept_value", "edof_a", "edof_b", "rel_diff"];

pub fn write_comparison(rows: &[ComparisonRow], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COMPARISON_COLUMNS).map_err(csv_err)?;
    let f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for r in rows {
        w.write_record([r.index.to_string(), format_float(r.swept_value), f(r.edof_a), f(r.edof_b), f(r.rel_diff)])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<stream>".into(),
        source: e,
    })
}

pub fn emit_comparison_csv(rows: &[ComparisonRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    with_path(path, write_comparison(rows, &mut out))?;
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, edof: Option<f64>, error: Option<&str>) -> CsvRecord {
        CsvRecord {
            scenario: "cap2d".into(),
            channel: "scalar".into(),
            method: "closed".into(),
            d_m: Some(rounded(8.0)),
            lth_m: Some(rounded(1.0)),
            ltv_m: Some(rounded(0.1 + 0.2)),
            lrh_m: Some(1.0),
            lrv_m: Some(1.5),
            mh: None,
            mv: None,
            nh: None,
            nv: None,
            ah_m: None,
            av_m: None,
            ms: Some(64),
            ns: Some(64),
            seed,
            edof: edof.map(rounded),
            alpha: None,
            runtime_s: None,
            error: error.map(String::from),
        }
    }

    fn text(records: &[CsvRecord]) -> String {
        let mut buf = Vec::new();
        write_records(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_only_and_line_counts() {
        assert_eq!(text(&[]), format!("{}\n", COLUMNS.join(",")));
        let one = text(&[record(1, Some(2.5), None)]);
        assert_eq!(one.lines().count(), 2);
        assert!(!one.contains('\r'));
        assert!(one.contains("2.50000000e0"));
    }

    #[test]
    fn parse_back_round_trip() {
        let src = vec![
            record(1, Some(std::f64::consts::PI * 1e5), None),
            record(2, None, Some("argument error: \"x\", with comma")),
            record(u64::MAX, Some(1.0 / 3.0), None),
        ];
        let back = read_records(text(&src).as_bytes()).unwrap();
        assert_eq!(back, src);
    }

    #[test]
    fn float_format_has_nine_significant_digits() {
        assert_eq!(format_float(1234.56789012), "1.23456789e3");
        assert_eq!(format_float(-0.000123), "-1.23000000e-4");
    }

    #[test]
    fn io_errors_carry_path() {
        let path = Path::new("/nonexistent-dir/out.csv");
        match emit_csv(&[], path, false) {
            Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
            other => panic!("{other:?}"),
        }
    }
}
