//! Core containers: multichannel series and the `P x P x J x T` arrays that
//! hold spectra, periodograms, coherences and variances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::SymMatrix;
use crate::util::dyadic_log2;
use crate::wavelet::Family;

/// `T x P` real observations with dyadic `T >= 4`, stored channel by channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    channels: Vec<Vec<f64>>,
    names: Vec<String>,
}

impl TimeSeriesMatrix {
    pub fn new(channels: Vec<Vec<f64>>, names: Option<Vec<String>>) -> Result<Self> {
        let p = channels.len();
        if p == 0 {
            return Err(Error::DimensionMismatch("time series has no channels".into()));
        }
        let t = channels[0].len();
        if channels.iter().any(|c| c.len() != t) {
            return Err(Error::DimensionMismatch("channels differ in length".into()));
        }
        match dyadic_log2(t) {
            Some(j) if j >= 2 => {}
            _ => return Err(Error::NonDyadicLength(t)),
        }
        for (ci, c) in channels.iter().enumerate() {
            if let Some(row) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::ParseError {
                    row,
                    col: ci,
                    msg: "non-finite value".into(),
                });
            }
        }
        let names = match names {
            Some(n) if n.len() == p => n,
            Some(n) => {
                return Err(Error::DimensionMismatch(format!(
                    "{} channel names for {p} channels",
                    n.len()
                )))
            }
            None => default_names(p),
        };
        Ok(Self { channels, names })
    }

    /// Builds from row-major `T x P` values.
    pub fn from_rows(rows: &[Vec<f64>], names: Option<Vec<String>>) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.len());
        let channels = (0..p).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
        Self::new(channels, names)
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.channels.len()
    }

    pub fn levels(&self) -> usize {
        dyadic_log2(self.len()).expect("length validated on construction")
    }

    pub fn channel(&self, p: usize) -> &[f64] {
        &self.channels[p]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, t: usize, p: usize) -> f64 {
        self.channels[p][t]
    }
}

pub(crate) fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}

/// What an [`MvLswArray`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayKind {
    Spectrum,
    Periodogram,
    Coherence,
    PartialCoherence,
    Variance,
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ArrayKind::Spectrum => "spectrum",
            ArrayKind::Periodogram => "periodogram",
            ArrayKind::Coherence => "coherence",
            ArrayKind::PartialCoherence => "partial-coherence",
            ArrayKind::Variance => "variance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    Daniell,
    ModifiedDaniell,
}

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelName::Daniell => f.write_str("daniell"),
            KernelName::ModifiedDaniell => f.write_str("modified-daniell"),
        }
    }
}

impl FromStr for KernelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('.', "-").as_str() {
            "daniell" => Ok(KernelName::Daniell),
            "modified-daniell" => Ok(KernelName::ModifiedDaniell),
            other => Err(Error::DomainError(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Kernel choice recorded with an estimate: one half-width for every level,
/// or one per level (finest first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: KernelName,
    pub params: Vec<usize>,
}

impl KernelSpec {
    pub fn uniform(name: KernelName, m: usize) -> Self {
        Self {
            name,
            params: vec![m],
        }
    }

    /// Half-width used at zero-based level `j`.
    pub fn param_for_level(&self, j: usize) -> usize {
        if self.params.len() == 1 {
            self.params[0]
        } else {
            self.params[j]
        }
    }

    pub fn is_per_level(&self) -> bool {
        self.params.len() > 1
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|m| m.to_string()).collect();
        write!(f, "{}({})", self.name, params.join(","))
    }
}

/// Provenance and diagnostics carried alongside the array values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub family: Family,
    pub filter_number: usize,
    pub kernel: Option<KernelSpec>,
    pub bias_corrected: bool,
    pub regularization_tol: Option<f64>,
    /// Smallest eigenvalue over all slices after regularization.
    pub min_eigenvalue: Option<f64>,
    /// Smallest eigenvalue over all slices before regularization.
    pub raw_min_eigenvalue: Option<f64>,
    pub gcv: Option<f64>,
    pub channel_names: Vec<String>,
}

impl Meta {
    pub fn new(family: Family, filter_number: usize, channel_names: Vec<String>) -> Self {
        Self {
            family,
            filter_number,
            kernel: None,
            bias_corrected: false,
            regularization_tol: None,
            min_eigenvalue: None,
            raw_min_eigenvalue: None,
            gcv: None,
            channel_names,
        }
    }
}

/// `P x P x J x T` array, symmetric in the channel pair. Levels are
/// zero-based with 0 the finest.
#[derive(Debug, Clone, PartialEq)]
pub struct MvLswArray {
    p: usize,
    j: usize,
    t: usize,
    data: Vec<f64>,
    pub kind: ArrayKind,
    pub meta: Meta,
}

impl MvLswArray {
    pub fn zeros(p: usize, j: usize, t: usize, kind: ArrayKind, meta: Meta) -> Self {
        Self {
            p,
            j,
            t,
            data: vec![0.0; p * p * j * t],
            kind,
            meta,
        }
    }

    /// Wraps raw data laid out as `[p][q][j][k]`. Channel symmetry is checked.
    pub fn from_data(
        p: usize,
        j: usize,
        t: usize,
        data: Vec<f64>,
        kind: ArrayKind,
        meta: Meta,
    ) -> Result<Self> {
        if data.len() != p * p * j * t {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {p}x{p}x{j}x{t} array",
                data.len()
            )));
        }
        let a = Self {
            p,
            j,
            t,
            data,
            kind,
            meta,
        };
        for pi in 0..p {
            for qi in pi + 1..p {
                if a.series(pi, qi, 0..j).ne(a.series(qi, pi, 0..j)) {
                    return Err(Error::DimensionMismatch(format!(
                        "array is not symmetric in channels ({pi}, {qi})"
                    )));
                }
            }
        }
        Ok(a)
    }

    fn series(&self, p: usize, q: usize, levels: std::ops::Range<usize>) -> impl Iterator<Item = &f64> {
        let start = self.index(p, q, levels.start, 0);
        let end = self.index(p, q, 0, 0) + levels.end * self.t;
        self.data[start..end].iter()
    }

    pub fn channels(&self) -> usize {
        self.p
    }

    pub fn levels(&self) -> usize {
        self.j
    }

    pub fn len(&self) -> usize {
        self.t
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.p, self.j, self.t)
    }

    #[inline]
    pub fn index(&self, p: usize, q: usize, j: usize, k: usize) -> usize {
        ((p * self.p + q) * self.j + j) * self.t + k
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(p, q, j, k)]
    }

    /// Sets both `(p, q)` and `(q, p)`.
    #[inline]
    pub fn set(&mut self, p: usize, q: usize, j: usize, k: usize, v: f64) {
        let a = self.index(p, q, j, k);
        let b = self.index(q, p, j, k);
        self.data[a] = v;
        self.data[b] = v;
    }

    /// Time series for channel pair `(p, q)` at level `j`.
    pub fn pair_series(&self, p: usize, q: usize, j: usize) -> &[f64] {
        let s = self.index(p, q, j, 0);
        &self.data[s..s + self.t]
    }

    /// Writes a series for `(p, q)` and its mirror `(q, p)`.
    pub fn set_pair_series(&mut self, p: usize, q: usize, j: usize, values: &[f64]) {
        let a = self.index(p, q, j, 0);
        self.data[a..a + self.t].copy_from_slice(values);
        if p != q {
            let b = self.index(q, p, j, 0);
            self.data[b..b + self.t].copy_from_slice(values);
        }
    }

    pub fn slice(&self, j: usize, k: usize) -> SymMatrix {
        SymMatrix::from_fn(self.p, |r, c| self.get(r, c, j, k))
    }

    pub fn set_slice(&mut self, j: usize, k: usize, m: &SymMatrix) {
        for r in 0..self.p {
            for c in r..self.p {
                self.set(r, c, j, k, m.get(r, c));
            }
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims() == other.dims()
    }

    /// Elementwise map, keeping shape and metadata.
    pub fn map(&self, kind: ArrayKind, f: impl Fn(f64) -> f64) -> Self {
        Self {
            p: self.p,
            j: self.j,
            t: self.t,
            data: self.data.iter().map(|&v| f(v)).collect(),
            kind,
            meta: self.meta.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Reorders both channel axes: output channel `i` is input channel `perm[i]`.
    pub fn permute_channels(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.p, self.j, self.t, self.kind, self.meta.clone());
        out.meta.channel_names = perm.iter().map(|&i| self.meta.channel_names[i].clone()).collect();
        for a in 0..self.p {
            for b in 0..self.p {
                for j in 0..self.j {
                    let src = self.pair_series(perm[a], perm[b], j);
                    let dst = out.index(a, b, j, 0);
                    out.data[dst..dst + self.t].copy_from_slice(src);
                }
            }
        }
        out
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(p: usize) -> Meta {
        Meta::new(Family::DaubExPhase, 1, default_names(p))
    }

    #[test]
    fn series_validation() {
        assert!(TimeSeriesMatrix::new(vec![vec![0.0; 8]], None).is_ok());
        assert!(matches!(
            TimeSeriesMatrix::new(vec![vec![0.0; 6]], None),
            Err(Error::NonDyadicLength(6))
        ));
        assert!(matches!(
            TimeSeriesMatrix::new(vec![vec![0.0; 2]], None),
            Err(Error::NonDyadicLength(2))
        ));
        let mut bad = vec![0.0; 8];
        bad[3] = f64::NAN;
        assert!(TimeSeriesMatrix::new(vec![bad], None).is_err());
        let x = TimeSeriesMatrix::from_rows(&vec![vec![1.0, 2.0]; 16], None).unwrap();
        assert_eq!((x.len(), x.channels(), x.levels()), (16, 2, 4));
        assert_eq!(x.names(), &["X1".to_string(), "X2".to_string()]);
    }

    #[test]
    fn set_is_symmetric() {
        let mut a = MvLswArray::zeros(3, 2, 4, ArrayKind::Spectrum, meta(3));
        a.set(0, 2, 1, 3, 5.0);
        assert_eq!(a.get(2, 0, 1, 3), 5.0);
        let s = a.slice(1, 3);
        assert_eq!(s.get(0, 2), 5.0);
    }

    #[test]
    fn from_data_checks_symmetry() {
        let mut data = vec![0.0; 2 * 2 * 4];
        data[4] = 1.0; // (0,1,0,0)
        assert!(MvLswArray::from_data(2, 1, 4, data.clone(), ArrayKind::Spectrum, meta(2)).is_err());
        data[8] = 1.0; // (1,0,0,0)
        assert!(MvLswArray::from_data(2, 1, 4, data, ArrayKind::Spectrum, meta(2)).is_ok());
    }

    #[test]
    fn permutation_moves_both_axes() {
        let mut a = MvLswArray::zeros(3, 1, 2, ArrayKind::Spectrum, meta(3));
        a.set(0, 1, 0, 0, 7.0);
        a.set(2, 2, 0, 1, 3.0);
        let b = a.permute_channels(&[2, 0, 1]);
        assert_eq!(b.get(1, 2, 0, 0), 7.0);
        assert_eq!(b.get(0, 0, 0, 1), 3.0);
        assert_eq!(b.meta.channel_names[0], "X3");
    }

    #[test]
    fn kernel_names_parse() {
        assert_eq!("daniell".parse::<KernelName>().unwrap(), KernelName::Daniell);
        assert_eq!(
            "modified.daniell".parse::<KernelName>().unwrap(),
            KernelName::ModifiedDaniell
        );
        assert!("gauss".parse::<KernelName>().is_err());
    }
}
