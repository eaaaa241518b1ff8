//! CSV time-series input, log-returns, dyadic windowing and spectrum
//! bundles.
//!
//! A bundle is a directory holding `meta.json` and `data.csv`. The table is
//! long format with header `p,q,j,k,value`, one row per element with
//! `p <= q`. Channels and levels are 1-based in the file, locations 0-based.
//! Values are written in shortest round-trip decimal form, so loading a saved
//! bundle reproduces every value bit for bit.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::{ArrayKind, Meta, MvLswArray, TimeSeriesMatrix};
use crate::error::{Error, Result};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;
pub const BUNDLE_META_FILE: &str = "meta.json";
pub const BUNDLE_DATA_FILE: &str = "data.csv";

/// What to do with a series whose length is not a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthPolicy {
    /// Drop the oldest rows down to the largest dyadic length.
    #[default]
    TruncateHead,
    /// Drop the newest rows.
    TruncateTail,
    ZeroPad,
    /// Extend by mirroring about the last observation.
    ReflectPad,
    PeriodicPad,
    Error,
}

impl FromStr for LengthPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "truncate-head" | "truncate" => Ok(Self::TruncateHead),
            "truncate-tail" => Ok(Self::TruncateTail),
            "zero-pad" | "zero" => Ok(Self::ZeroPad),
            "reflect-pad" | "reflect" => Ok(Self::ReflectPad),
            "periodic-pad" | "periodic" => Ok(Self::PeriodicPad),
            "error" => Ok(Self::Error),
            other => Err(Error::DomainError(format!("unknown length policy '{other}'"))),
        }
    }
}

/// Column selection accepts header names or 1-based column numbers.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub columns: Option<Vec<String>>,
    pub policy: LengthPolicy,
    /// Replace each channel by its log-returns before windowing.
    pub log_returns: bool,
}

/// Raw numeric table, channel-major, with the header if one was present.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub channels: Vec<Vec<f64>>,
}

/// Parses CSV text. The first record is a header when any of its cells is
/// not a number. Error rows and columns are 1-based positions in the file.
pub fn parse_table<R: std::io::Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::ParseError {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if i == 0 && rec.iter().any(|c| c.parse::<f64>().is_err()) {
            header = Some(rec.iter().map(str::to_string).collect());
            channels = vec![Vec::new(); rec.len()];
            continue;
        }
        if channels.is_empty() {
            channels = vec![Vec::new(); rec.len()];
        }
        if rec.len() != channels.len() {
            return Err(Error::ParseError {
                row,
                col: rec.len().min(channels.len()) + 1,
                msg: format!("expected {} cells, found {}", channels.len(), rec.len()),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::ParseError {
                row,
                col: c + 1,
                msg: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseError {
                    row,
                    col: c + 1,
                    msg: format!("'{cell}' is not finite"),
                });
            }
            channels[c].push(v);
        }
    }
    if channels.first().is_none_or(|c| c.is_empty()) {
        return Err(Error::ParseError {
            row: 1,
            col: 1,
            msg: "no numeric rows".into(),
        });
    }
    Ok(Table { header, channels })
}

impl Table {
    /// Keeps the selected columns in the given order.
    pub fn select(self, columns: &[String]) -> Result<Table> {
        let mut picked = Vec::with_capacity(columns.len());
        for name in columns {
            let by_name = self
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name));
            let idx = match by_name {
                Some(i) => i,
                None => match name.parse::<usize>() {
                    Ok(n) if n >= 1 && n <= self.channels.len() => n - 1,
                    _ => return Err(Error::DomainError(format!("no column '{name}'"))),
                },
            };
            picked.push(idx);
        }
        Ok(Table {
            header: self
                .header
                .as_ref()
                .map(|h| picked.iter().map(|&i| h[i].clone()).collect()),
            channels: picked.iter().map(|&i| self.channels[i].clone()).collect(),
        })
    }
}

/// `out[t] = ln x[t+1] - ln x[t]` per channel.
pub fn log_returns(channels: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    channels
        .iter()
        .enumerate()
        .map(|(c, x)| {
            if let Some((row, &value)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::NonPositiveValue { row, col: c, value });
            }
            Ok(x.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
        })
        .collect()
}

/// Brings every channel to a dyadic length of at least 4.
pub fn apply_length_policy(channels: Vec<Vec<f64>>, policy: LengthPolicy) -> Result<Vec<Vec<f64>>> {
    let n = channels.first().map_or(0, |c| c.len());
    if n.is_power_of_two() && n >= 4 {
        return Ok(channels);
    }
    let down = if n == 0 { 0 } else { 1usize << n.ilog2() };
    let up = n.next_power_of_two().max(4);
    let out = match policy {
        LengthPolicy::Error => return Err(Error::NonDyadicLength(n)),
        LengthPolicy::TruncateHead | LengthPolicy::TruncateTail if down < 4 => {
            return Err(Error::NonDyadicLength(n))
        }
        LengthPolicy::TruncateHead => channels.into_iter().map(|c| c[n - down..].to_vec()).collect(),
        LengthPolicy::TruncateTail => channels.into_iter().map(|c| c[..down].to_vec()).collect(),
        _ if n == 0 => return Err(Error::NonDyadicLength(n)),
        LengthPolicy::ZeroPad => channels
            .into_iter()
            .map(|mut c| {
                c.resize(up, 0.0);
                c
            })
            .collect(),
        LengthPolicy::PeriodicPad => channels
            .into_iter()
            .map(|c| (0..up).map(|i| c[i % n]).collect())
            .collect(),
        LengthPolicy::ReflectPad => channels
            .into_iter()
            .map(|c| (0..up).map(|i| c[reflect_index(i, n)]).collect())
            .collect(),
    };
    Ok(out)
}

// Whole-sample symmetric extension: n-1 is mirrored, not repeated.
fn reflect_index(i: usize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let r = i % period;
    if r < n {
        r
    } else {
        period - r
    }
}

/// Reads a CSV series, applies column selection, optional log-returns and
/// the length policy.
pub fn load_timeseries(path: impl AsRef<Path>, options: &LoadOptions) -> Result<TimeSeriesMatrix> {
    let file = fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_timeseries(file, options)
}

pub fn read_timeseries<R: std::io::Read>(reader: R, options: &LoadOptions) -> Result<TimeSeriesMatrix> {
    let mut table = parse_table(reader)?;
    if let Some(cols) = &options.columns {
        table = table.select(cols)?;
    }
    let mut channels = table.channels;
    if options.log_returns {
        channels = log_returns(&channels)?;
    }
    let channels = apply_length_policy(channels, options.policy)?;
    TimeSeriesMatrix::new(channels, table.header)
}

/// Writes `T x P` values with a header of channel names.
pub fn write_timeseries(x: &TimeSeriesMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_error)?;
    w.write_record(x.names()).map_err(csv_error)?;
    for t in 0..x.len() {
        w.write_record((0..x.channels()).map(|p| x.get(t, p).to_string()))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
struct BundleMeta {
    format_version: u32,
    kind: ArrayKind,
    channels: usize,
    levels: usize,
    length: usize,
    #[serde(flatten)]
    meta: Meta,
}

/// Writes `x` as a bundle directory, creating it if needed.
pub fn save_bundle(x: &MvLswArray, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (p, levels, t) = x.dims();
    let doc = BundleMeta {
        format_version: BUNDLE_FORMAT_VERSION,
        kind: x.kind,
        channels: p,
        levels,
        length: t,
        meta: x.meta.clone(),
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(BUNDLE_META_FILE), json + "\n")?;

    let mut w = csv::Writer::from_path(dir.join(BUNDLE_DATA_FILE)).map_err(csv_error)?;
    w.write_record(["p", "q", "j", "k", "value"]).map_err(csv_error)?;
    for a in 0..p {
        for b in a..p {
            for j in 0..levels {
                for (k, v) in x.pair_series(a, b, j).iter().enumerate() {
                    w.write_record([
                        (a + 1).to_string(),
                        (b + 1).to_string(),
                        (j + 1).to_string(),
                        k.to_string(),
                        v.to_string(),
                    ])
                    .map_err(csv_error)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<MvLswArray> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(BUNDLE_META_FILE))
        .map_err(|e| Error::InvalidBundle(format!("{}: {e}", dir.join(BUNDLE_META_FILE).display())))?;
    let doc: BundleMeta = serde_json::from_str(&text).map_err(|e| Error::InvalidBundle(e.to_string()))?;
    if doc.format_version != BUNDLE_FORMAT_VERSION {
        return Err(Error::InvalidBundle(format!(
            "format version {} (expected {BUNDLE_FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let (p, levels, t) = (doc.channels, doc.levels, doc.length);
    if doc.meta.channel_names.len() != p {
        return Err(Error::InvalidBundle("channel names do not match channel count".into()));
    }
    let mut out = MvLswArray::zeros(p, levels, t, doc.kind, doc.meta);
    let mut seen = vec![false; p * p * levels * t];
    let mut rdr = csv::Reader::from_path(dir.join(BUNDLE_DATA_FILE))
        .map_err(|e| Error::InvalidBundle(format!("{}: {e}", dir.join(BUNDLE_DATA_FILE).display())))?;
    let mut rows = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::ParseError {
            row,
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.len() != 5 {
            return Err(Error::ParseError {
                row,
                col: rec.len(),
                msg: "expected 5 cells".into(),
            });
        }
        let index = |c: usize, lo: usize, hi: usize| -> Result<usize> {
            match rec[c].parse::<usize>() {
                Ok(v) if v >= lo && v < hi => Ok(v - lo),
                _ => Err(Error::ParseError {
                    row,
                    col: c + 1,
                    msg: format!("index '{}' out of range", &rec[c]),
                }),
            }
        };
        let a = index(0, 1, p + 1)?;
        let b = index(1, 1, p + 1)?;
        let j = index(2, 1, levels + 1)?;
        let k = index(3, 0, t)?;
        if a > b {
            return Err(Error::ParseError {
                row,
                col: 1,
                msg: "rows must have p <= q".into(),
            });
        }
        let v: f64 = rec[4].parse().map_err(|_| Error::ParseError {
            row,
            col: 5,
            msg: format!("'{}' is not a number", &rec[4]),
        })?;
        let slot = out.index(a, b, j, k);
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::InvalidBundle(format!("duplicate element at row {row}")));
        }
        out.set(a, b, j, k, v);
        rows += 1;
    }
    let want = p * (p + 1) / 2 * levels * t;
    if rows != want {
        return Err(Error::InvalidBundle(format!("{rows} data rows, expected {want}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{default_names, KernelName, KernelSpec};
    use crate::wavelet::Family;
    use proptest::prelude::*;

    fn read(text: &str, options: &LoadOptions) -> Result<TimeSeriesMatrix> {
        read_timeseries(text.as_bytes(), options)
    }

    fn csv_rows(n: usize, p: usize) -> String {
        (0..n)
            .map(|t| (0..p).map(|c| format!("{}", t * 10 + c)).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn dyadic_input_loads_unchanged() {
        let x = read(&csv_rows(1024, 4), &LoadOptions::default()).unwrap();
        assert_eq!((x.len(), x.channels()), (1024, 4));
        assert_eq!(x.get(5, 2), 52.0);
    }

    #[test]
    fn truncate_head_keeps_the_last_rows() {
        let x = read(&csv_rows(1860, 4), &LoadOptions::default()).unwrap();
        assert_eq!(x.len(), 1024);
        assert_eq!(x.get(0, 0), (1860 - 1024) as f64 * 10.0);
        assert_eq!(x.get(1023, 3), 1859.0 * 10.0 + 3.0);
    }

    #[test]
    fn other_policies() {
        let ch = vec![vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]];
        let tail = apply_length_policy(ch.clone(), LengthPolicy::TruncateTail).unwrap();
        assert_eq!(tail[0], vec![1.0, 2.0, 3.0, 4.0]);
        let zero = apply_length_policy(ch.clone(), LengthPolicy::ZeroPad).unwrap();
        assert_eq!(zero[0], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.0, 0.0]);
        let per = apply_length_policy(ch.clone(), LengthPolicy::PeriodicPad).unwrap();
        assert_eq!(per[0], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 1.0, 2.0]);
        let refl = apply_length_policy(ch.clone(), LengthPolicy::ReflectPad).unwrap();
        assert_eq!(refl[0], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 5.0, 4.0]);
        assert!(matches!(
            apply_length_policy(ch, LengthPolicy::Error),
            Err(Error::NonDyadicLength(6))
        ));
        let short = apply_length_policy(vec![vec![1.0, 2.0, 3.0]], LengthPolicy::ReflectPad).unwrap();
        assert_eq!(short[0], vec![1.0, 2.0, 3.0, 2.0]);
        assert!(apply_length_policy(vec![vec![1.0, 2.0, 3.0]], LengthPolicy::TruncateHead).is_err());
    }

    #[test]
    fn header_and_column_selection() {
        let text = "date,DAX,SMI,CAC,FTSE\n1,10,20,30,40\n2,11,21,31,41\n3,12,22,32,42\n4,13,23,33,43\n";
        let opts = LoadOptions {
            columns: Some(vec!["SMI".into(), "4".into()]),
            ..Default::default()
        };
        let x = read(text, &opts).unwrap();
        assert_eq!(x.names(), &["SMI".to_string(), "CAC".to_string()]);
        assert_eq!(x.channel(1), &[30.0, 31.0, 32.0, 33.0]);
        let bad = LoadOptions {
            columns: Some(vec!["NIKKEI".into()]),
            ..Default::default()
        };
        assert!(read(text, &bad).is_err());
    }

    #[test]
    fn malformed_cell_reports_position() {
        let text = "a,b\n1,2\n3,abc\n5,6\n7,8\n";
        match read(text, &LoadOptions::default()) {
            Err(Error::ParseError { row, col, .. }) => assert_eq!((row, col), (3, 2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read("1,2\n3\n", &LoadOptions::default()),
            Err(Error::ParseError { row: 2, .. })
        ));
    }

    #[test]
    fn log_return_examples() {
        let r = log_returns(&[vec![3.0; 5]]).unwrap();
        assert!(r[0].iter().all(|&v| v == 0.0));
        let g: Vec<f64> = (0..6).map(|i| 2.0 * 1.5f64.powi(i)).collect();
        let r = log_returns(&[g]).unwrap();
        assert!(r[0].iter().all(|v| (v - 1.5f64.ln()).abs() < 1e-12));
        let r = log_returns(&[vec![100.0, 105.0]]).unwrap();
        assert!((r[0][0] - 0.04879).abs() < 1e-5);
        assert!(matches!(
            log_returns(&[vec![1.0, 0.0]]),
            Err(Error::NonPositiveValue { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn log_returns_then_window() {
        let text = (1..=9).map(|i| format!("{}", i as f64)).collect::<Vec<_>>().join("\n");
        let opts = LoadOptions {
            log_returns: true,
            ..Default::default()
        };
        let x = read(&text, &opts).unwrap();
        assert_eq!(x.len(), 8);
        assert!((x.get(0, 0) - 2f64.ln()).abs() < 1e-15);
    }

    fn sample_array(values: Vec<f64>, p: usize, levels: usize, t: usize) -> MvLswArray {
        let mut meta = Meta::new(Family::DaubExPhase, 2, default_names(p));
        meta.kernel = Some(KernelSpec::uniform(KernelName::Daniell, 3));
        meta.bias_corrected = true;
        meta.regularization_tol = Some(1e-10);
        meta.min_eigenvalue = Some(1.0000000000000002e-10);
        meta.raw_min_eigenvalue = Some(-0.123_456_789_012_345_68);
        meta.gcv = Some(38.680271234567);
        let mut a = MvLswArray::zeros(p, levels, t, ArrayKind::Spectrum, meta);
        let mut it = values.into_iter().cycle();
        for x in 0..p {
            for y in x..p {
                for j in 0..levels {
                    for k in 0..t {
                        a.set(x, y, j, k, it.next().unwrap());
                    }
                }
            }
        }
        a
    }

    #[test]
    fn bundle_layout() {
        let dir = tempfile::tempdir().unwrap();
        let a = sample_array(vec![0.1, -2.5e-300, 7.0], 3, 2, 4);
        save_bundle(&a, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(BUNDLE_DATA_FILE)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "p,q,j,k,value");
        assert_eq!(lines.len(), 1 + 6 * 2 * 4);
        assert_eq!(lines[1], "1,1,1,0,0.1");
        let b = load_bundle(dir.path()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bundle_rejects_damage() {
        let dir = tempfile::tempdir().unwrap();
        let a = sample_array(vec![1.0], 2, 1, 4);
        save_bundle(&a, dir.path()).unwrap();
        let path = dir.path().join(BUNDLE_DATA_FILE);
        let text = fs::read_to_string(&path).unwrap();
        let short: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        fs::write(&path, short).unwrap();
        assert!(matches!(load_bundle(dir.path()), Err(Error::InvalidBundle(_))));
        fs::write(&path, text.replace("1,2,1,3,1", "2,1,1,3,1")).unwrap();
        assert!(matches!(load_bundle(dir.path()), Err(Error::ParseError { .. })));
        assert!(load_bundle(dir.path().join("missing")).is_err());
    }

    proptest! {
        #[test]
        fn bundle_round_trip_is_bit_exact(
            values in prop::collection::vec(
                prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), Just(0.0), Just(-0.0)],
                1..64,
            ),
            p in 1usize..4,
            levels in 1usize..4,
        ) {
            let dir = tempfile::tempdir().unwrap();
            let a = sample_array(values, p, levels, 8);
            save_bundle(&a, dir.path()).unwrap();
            let b = load_bundle(dir.path()).unwrap();
            prop_assert_eq!(a.dims(), b.dims());
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            prop_assert_eq!(&a.meta, &b.meta);
            prop_assert_eq!(a.kind, b.kind);
        }
    }
}
