//! SVG plots of array slices with CSV sidecars.
//!
//! Styles follow the usual slice views of a `P x P x J x T` array:
//!
//! 1. one series for channel pair `(p, q)` at level `j`;
//! 2. panel of channel pairs at level `j`;
//! 3. panel of levels for pair `(p, q)`;
//! 4. level-by-location heatmap for pair `(p, q)`.
//!
//! `info` indices are 1-based. Sidecar CSVs hold exactly the values from the
//! array, written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::array::MvLswArray;
use crate::error::{Error, Result};
use crate::inference::IntervalPair;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub ylim: Option<(f64, f64)>,
    pub line_width: f64,
    /// Draw diagonal panels in style 2.
    pub include_diag: bool,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            ylim: None,
            line_width: 1.5,
            include_diag: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub style: u8,
    pub info: Vec<usize>,
    pub options: PlotOptions,
}

/// A validated slice request with zero-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    Single { p: usize, q: usize, j: usize },
    Level { j: usize },
    Pair { p: usize, q: usize },
    Heatmap { p: usize, q: usize },
}

/// Parses `"1,2,2"`-style info strings.
pub fn parse_info(s: &str) -> Result<Vec<usize>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::InfoMismatch(format!("'{t}' is not a positive index")))
        })
        .collect()
}

impl PlotSpec {
    pub fn new(style: u8, info: Vec<usize>) -> Self {
        Self {
            style,
            info,
            options: PlotOptions::default(),
        }
    }

    /// Checks the info arity for the style and the index ranges against `x`.
    pub fn resolve(&self, x: &MvLswArray) -> Result<Slice> {
        let (p, levels, _) = x.dims();
        let want = match self.style {
            1 => 3,
            2 => 1,
            3 | 4 => 2,
            s => return Err(Error::InfoMismatch(format!("style {s} is not one of 1..4"))),
        };
        if self.info.len() != want {
            return Err(Error::InfoMismatch(format!(
                "style {} needs {want} info values, got {}",
                self.style,
                self.info.len()
            )));
        }
        let channel = |v: usize| -> Result<usize> {
            if v >= 1 && v <= p {
                Ok(v - 1)
            } else {
                Err(Error::InfoMismatch(format!("channel {v} not in 1..={p}")))
            }
        };
        let level = |v: usize| -> Result<usize> {
            if v >= 1 && v <= levels {
                Ok(v - 1)
            } else {
                Err(Error::InfoMismatch(format!("level {v} not in 1..={levels}")))
            }
        };
        let i = &self.info;
        Ok(match self.style {
            1 => Slice::Single {
                p: channel(i[0])?,
                q: channel(i[1])?,
                j: level(i[2])?,
            },
            2 => Slice::Level { j: level(i[0])? },
            3 => Slice::Pair {
                p: channel(i[0])?,
                q: channel(i[1])?,
            },
            _ => Slice::Heatmap {
                p: channel(i[0])?,
                q: channel(i[1])?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFiles {
    pub svg: PathBuf,
    pub csv: PathBuf,
}

struct Series<'a> {
    label: String,
    values: &'a [f64],
    band: Option<(&'a [f64], &'a [f64])>,
}

/// Writes `<out>.svg` and `<out>.csv` (any extension on `out` is replaced).
pub fn emit_plot(x: &MvLswArray, spec: &PlotSpec, interval: Option<&IntervalPair>, out: impl AsRef<Path>) -> Result<PlotFiles> {
    let slice = spec.resolve(x)?;
    if let Some(iv) = interval {
        if !x.same_shape(&iv.lower) || !x.same_shape(&iv.upper) {
            return Err(Error::DimensionMismatch("interval bounds differ in shape from the plotted array".into()));
        }
    }
    let files = PlotFiles {
        svg: out.as_ref().with_extension("svg"),
        csv: out.as_ref().with_extension("csv"),
    };
    if let Some(dir) = files.svg.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let names = &x.meta.channel_names;
    let series = |p: usize, q: usize, j: usize, label: String| Series {
        label,
        values: x.pair_series(p, q, j),
        band: interval.map(|iv| (iv.lower.pair_series(p, q, j), iv.upper.pair_series(p, q, j))),
    };
    let title = format!("{} ({})", x.kind, x.meta.family);
    let (svg, csv) = match slice {
        Slice::Single { p, q, j } => {
            let s = series(p, q, j, format!("{}-{} level {}", names[p], names[q], j + 1));
            let panels = vec![(0, 0, s)];
            (line_svg(&title, &panels, 1, 1, &spec.options), series_csv(&panels))
        }
        Slice::Level { j } => {
            let n = x.channels();
            let mut panels = Vec::new();
            for a in 0..n {
                for b in a..n {
                    if a == b && !spec.options.include_diag {
                        continue;
                    }
                    panels.push((a, b, series(a, b, j, format!("{}-{} level {}", names[a], names[b], j + 1))));
                }
            }
            (line_svg(&title, &panels, n, n, &spec.options), series_csv(&panels))
        }
        Slice::Pair { p, q } => {
            let panels: Vec<_> = (0..x.levels())
                .map(|j| (j, 0, series(p, q, j, format!("{}-{} level {}", names[p], names[q], j + 1))))
                .collect();
            (line_svg(&title, &panels, x.levels(), 1, &spec.options), series_csv(&panels))
        }
        Slice::Heatmap { p, q } => {
            let label = format!("{} {}-{}", title, names[p], names[q]);
            (heatmap_svg(x, p, q, &label), grid_csv(x, p, q))
        }
    };
    fs::write(&files.svg, svg)?;
    fs::write(&files.csv, csv)?;
    Ok(files)
}

fn series_csv(panels: &[(usize, usize, Series<'_>)]) -> String {
    let mut out = String::from("k");
    for (_, _, s) in panels {
        let _ = write!(out, ",{}", csv_field(&s.label));
        if s.band.is_some() {
            let _ = write!(out, ",{},{}", csv_field(&format!("{} lower", s.label)), csv_field(&format!("{} upper", s.label)));
        }
    }
    out.push('\n');
    let t = panels.first().map_or(0, |(_, _, s)| s.values.len());
    for k in 0..t {
        let _ = write!(out, "{k}");
        for (_, _, s) in panels {
            let _ = write!(out, ",{}", s.values[k]);
            if let Some((lo, hi)) = s.band {
                let _ = write!(out, ",{},{}", lo[k], hi[k]);
            }
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn grid_csv(x: &MvLswArray, p: usize, q: usize) -> String {
    let mut out = String::new();
    for j in 0..x.levels() {
        let row: Vec<String> = x.pair_series(p, q, j).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn y_range(s: &Series<'_>, ylim: Option<(f64, f64)>) -> (f64, f64) {
    if let Some(r) = ylim {
        return r;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |v: &[f64]| {
        for &y in v.iter().filter(|y| y.is_finite()) {
            lo = lo.min(y);
            hi = hi.max(y);
        }
    };
    take(s.values);
    if let Some((a, b)) = s.band {
        take(a);
        take(b);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 200.0;
const MARGIN: f64 = 48.0;

#[allow(clippy::too_many_arguments)]
fn polyline(out: &mut String, values: &[f64], x0: f64, y0: f64, w: f64, h: f64, (lo, hi): (f64, f64), style: &str) {
    let n = values.len().max(2) - 1;
    let mut pts = String::new();
    for (k, v) in values.iter().enumerate() {
        let px = x0 + w * k as f64 / n as f64;
        let py = y0 + h * (1.0 - (v.clamp(lo, hi) - lo) / (hi - lo));
        let _ = write!(pts, "{px:.2},{py:.2} ");
    }
    let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, pts.trim_end());
}

fn line_svg(title: &str, panels: &[(usize, usize, Series<'_>)], rows: usize, cols: usize, opt: &PlotOptions) -> String {
    let width = cols as f64 * (PANEL_W + MARGIN) + MARGIN;
    let height = rows as f64 * (PANEL_H + MARGIN) + MARGIN + 16.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20" font-size="14">{}</text>"#, xml_escape(title));
    for (r, c, s) in panels {
        let x0 = MARGIN + *c as f64 * (PANEL_W + MARGIN);
        let y0 = MARGIN + 16.0 + *r as f64 * (PANEL_H + MARGIN);
        let range = y_range(s, opt.ylim);
        let _ = writeln!(
            out,
            r#"<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(out, r#"<text x="{x0}" y="{}">{}</text>"#, y0 - 6.0, xml_escape(&s.label));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y0 + 10.0, range.1);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y0 + PANEL_H, range.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x0 + PANEL_W,
            y0 + PANEL_H + 14.0,
            s.values.len().saturating_sub(1)
        );
        let _ = writeln!(out, r#"<text x="{x0}" y="{}">0</text>"#, y0 + PANEL_H + 14.0);
        if range.0 < 0.0 && range.1 > 0.0 {
            let zy = y0 + PANEL_H * range.1 / (range.1 - range.0);
            let _ = writeln!(
                out,
                r##"<line x1="{x0}" y1="{zy:.2}" x2="{}" y2="{zy:.2}" stroke="#bbbbbb"/>"##,
                x0 + PANEL_W
            );
        }
        if let Some((lo, hi)) = s.band {
            let style = format!(r##"stroke="#d62728" stroke-width="{}" stroke-dasharray="4 3""##, opt.line_width * 0.75);
            polyline(&mut out, lo, x0, y0, PANEL_W, PANEL_H, range, &style);
            polyline(&mut out, hi, x0, y0, PANEL_W, PANEL_H, range, &style);
        }
        let style = format!(r##"stroke="#1f4e9c" stroke-width="{}""##, opt.line_width);
        polyline(&mut out, s.values, x0, y0, PANEL_W, PANEL_H, range, &style);
    }
    out.push_str("</svg>\n");
    out
}

// Linear ramp from pale yellow (minimum) to dark blue (maximum).
fn ramp(f: f64) -> String {
    let lo = [255.0, 247.0, 188.0];
    let hi = [8.0, 48.0, 107.0];
    let c: Vec<u8> = (0..3).map(|i| (lo[i] + f * (hi[i] - lo[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn heatmap_svg(x: &MvLswArray, p: usize, q: usize, title: &str) -> String {
    let (_, levels, t) = x.dims();
    let cell_w = (720.0 / t as f64).max(0.5);
    let cell_h = 24.0;
    let width = cell_w * t as f64 + 2.0 * MARGIN + 80.0;
    let height = cell_h * levels as f64 + 2.0 * MARGIN + 16.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..levels {
        for &v in x.pair_series(p, q, j).iter().filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let frac = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height}" viewBox="0 0 {width:.2} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20" font-size="14">{}</text>"#, xml_escape(title));
    let top = MARGIN + 16.0;
    for j in 0..levels {
        // finest level at the bottom
        let y = top + (levels - 1 - j) as f64 * cell_h;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            y + cell_h * 0.65,
            j + 1
        );
        for (k, &v) in x.pair_series(p, q, j).iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{y}" width="{:.3}" height="{cell_h}" fill="{}"/>"#,
                MARGIN + k as f64 * cell_w,
                cell_w,
                ramp(frac(v).clamp(0.0, 1.0))
            );
        }
    }
    let legend_x = MARGIN + cell_w * t as f64 + 24.0;
    for i in 0..10 {
        let f = 1.0 - i as f64 / 9.0;
        let _ = writeln!(
            out,
            r#"<rect x="{legend_x:.2}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            top + i as f64 * cell_h * levels as f64 / 10.0,
            cell_h * levels as f64 / 10.0,
            ramp(f)
        );
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{top}">{hi:.3}</text>"#, legend_x + 20.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{lo:.3}</text>"#,
        legend_x + 20.0,
        top + cell_h * levels as f64
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.2}">location 0..{}</text>"#,
        top + cell_h * levels as f64 + 16.0,
        t - 1
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayKind;
    use crate::inference::IntervalMethod;
    use crate::simulate::build_eq3_fixture;

    fn read_csv(path: &Path) -> Vec<Vec<String>> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn info_arity_and_ranges() {
        let s = build_eq3_fixture(16).unwrap();
        assert!(PlotSpec::new(1, vec![1, 2, 2]).resolve(&s).is_ok());
        assert_eq!(PlotSpec::new(2, vec![2]).resolve(&s).unwrap(), Slice::Level { j: 1 });
        assert!(matches!(PlotSpec::new(1, vec![1, 2]).resolve(&s), Err(Error::InfoMismatch(_))));
        assert!(matches!(PlotSpec::new(3, vec![1, 4]).resolve(&s), Err(Error::InfoMismatch(_))));
        assert!(matches!(PlotSpec::new(2, vec![5]).resolve(&s), Err(Error::InfoMismatch(_))));
        assert!(matches!(PlotSpec::new(5, vec![1]).resolve(&s), Err(Error::InfoMismatch(_))));
        assert_eq!(parse_info("1, 2,2").unwrap(), vec![1, 2, 2]);
        assert!(parse_info("x").is_err());
    }

    #[test]
    fn single_curve_of_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let s = build_eq3_fixture(64).unwrap();
        let files = emit_plot(&s, &PlotSpec::new(1, vec![1, 2, 2]), None, dir.path().join("one.svg")).unwrap();
        let rows = read_csv(&files.csv);
        assert_eq!(rows.len(), 65);
        assert_eq!(rows[0].len(), 2);
        let first: f64 = rows[1][1].parse().unwrap();
        let last: f64 = rows[64][1].parse().unwrap();
        assert!((first - 2.0).abs() < 1e-12 && (last - 10.0).abs() < 1e-12);
        for (k, row) in rows[1..].iter().enumerate() {
            assert_eq!(row[1].parse::<f64>().unwrap(), s.get(0, 1, 1, k));
        }
        let svg = fs::read_to_string(&files.svg).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }

    #[test]
    fn panel_of_zero_level_with_and_without_diagonal() {
        let dir = tempfile::tempdir().unwrap();
        let s = build_eq3_fixture(16).unwrap();
        let mut spec = PlotSpec::new(2, vec![4]);
        let files = emit_plot(&s, &spec, None, dir.path().join("all")).unwrap();
        let rows = read_csv(&files.csv);
        assert_eq!(rows[0].len(), 1 + 6);
        assert!(rows[1..].iter().all(|r| r[1..].iter().all(|v| v == "0")));
        spec.options.include_diag = false;
        let files = emit_plot(&s, &spec, None, dir.path().join("off")).unwrap();
        let rows = read_csv(&files.csv);
        assert_eq!(rows[0], vec!["k", "X1-X2 level 4", "X1-X3 level 4", "X2-X3 level 4"]);
        let svg = fs::read_to_string(&files.svg).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
    }

    #[test]
    fn level_panel_and_interval_overlay() {
        let dir = tempfile::tempdir().unwrap();
        let s = build_eq3_fixture(16).unwrap();
        let iv = IntervalPair {
            lower: s.map(ArrayKind::Spectrum, |v| v - 1.0),
            upper: s.map(ArrayKind::Spectrum, |v| v + 1.0),
            alpha: 0.05,
            method: IntervalMethod::Analytic,
        };
        let files = emit_plot(&s, &PlotSpec::new(3, vec![2, 3]), Some(&iv), dir.path().join("pair.svg")).unwrap();
        let rows = read_csv(&files.csv);
        assert_eq!(rows[0].len(), 1 + 3 * s.levels());
        assert_eq!(rows.len(), 17);
        let svg = fs::read_to_string(&files.svg).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3 * s.levels());
    }

    #[test]
    fn heatmap_grid_shape() {
        let dir = tempfile::tempdir().unwrap();
        let s = build_eq3_fixture(32).unwrap();
        let files = emit_plot(&s, &PlotSpec::new(4, vec![1, 1]), None, dir.path().join("heat.svg")).unwrap();
        let rows = read_csv(&files.csv);
        assert_eq!(rows.len(), s.levels());
        assert!(rows.iter().all(|r| r.len() == 32));
        assert_eq!(rows[1][0].parse::<f64>().unwrap(), s.get(0, 0, 1, 0));
    }
}
