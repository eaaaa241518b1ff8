//! Daubechies filters, the non-decimated discrete wavelet system and the
//! autocorrelation-wavelet inner products used for bias correction and
//! variance estimation.
//!
//! Level indices are zero-based in code: index 0 is the finest level
//! (level 1 in the usual notation) and index `J - 1` the coarsest.
//! Each discrete wavelet is normalized to unit Euclidean norm.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops;
use crate::util::{dyadic_log2, CompensatedSum};

/// Largest series length accepted by [`AutoCorrProducts::new`]. The lag
/// table holds `(2T + 1) * J^3` values.
pub const MAX_LAG_TABLE_LENGTH: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Daubechies extremal-phase (minimum-phase) compactly supported wavelets.
    DaubExPhase,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::DaubExPhase => f.write_str("DaubExPhase"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "daubexphase" => Ok(Family::DaubExPhase),
            _ => Err(Error::UnsupportedFilter {
                family: s.to_string(),
                number: 0,
            }),
        }
    }
}

/// Orthonormal two-channel filter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    pub family: Family,
    pub number: usize,
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

impl WaveletFilter {
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }
}

/// Looks up the filter with `number` vanishing moments. `number = 1` is Haar.
pub fn make_filter(family: Family, number: usize) -> Result<WaveletFilter> {
    let table: &[f64] = match (family, number) {
        (Family::DaubExPhase, 1) => &DAUB1,
        (Family::DaubExPhase, 2) => &DAUB2,
        (Family::DaubExPhase, 3) => &DAUB3,
        (Family::DaubExPhase, 4) => &DAUB4,
        (Family::DaubExPhase, 5) => &DAUB5,
        (Family::DaubExPhase, 6) => &DAUB6,
        (Family::DaubExPhase, 7) => &DAUB7,
        (Family::DaubExPhase, 8) => &DAUB8,
        (Family::DaubExPhase, 9) => &DAUB9,
        (Family::DaubExPhase, 10) => &DAUB10,
        _ => {
            return Err(Error::UnsupportedFilter {
                family: family.to_string(),
                number,
            })
        }
    };
    let lowpass = table.to_vec();
    let n = lowpass.len();
    let highpass = (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * lowpass[n - 1 - k]
        })
        .collect();
    Ok(WaveletFilter {
        family,
        number,
        lowpass,
        highpass,
    })
}

/// Non-decimated discrete wavelets `psi_j` for levels `0..J`, each stored on
/// its support starting at offset 0, so that `psi_{j,k}(t) = psi_j[t - k]`.
#[derive(Debug, Clone)]
pub struct DiscreteWaveletSystem {
    filter: WaveletFilter,
    wavelets: Vec<Vec<f64>>,
}

impl DiscreteWaveletSystem {
    /// Builds `levels` wavelets by the two-scale recursion
    /// `psi_{j+1} = h * (psi_j upsampled by 2)`, starting from the highpass
    /// filter.
    pub fn new(filter: WaveletFilter, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::DomainError("number of levels must be >= 1".into()));
        }
        let mut wavelets = Vec::with_capacity(levels);
        wavelets.push(filter.highpass.clone());
        for j in 1..levels {
            let prev = &wavelets[j - 1];
            let mut next = vec![0.0; 2 * (prev.len() - 1) + filter.len()];
            for (i, &c) in prev.iter().enumerate() {
                for (m, &h) in filter.lowpass.iter().enumerate() {
                    next[2 * i + m] += c * h;
                }
            }
            wavelets.push(next);
        }
        Ok(Self { filter, wavelets })
    }

    pub fn filter(&self) -> &WaveletFilter {
        &self.filter
    }

    pub fn levels(&self) -> usize {
        self.wavelets.len()
    }

    /// Wavelet at zero-based level `j`.
    pub fn wavelet(&self, j: usize) -> &[f64] {
        &self.wavelets[j]
    }

    /// Expected support length `(2^(j+1) - 1)(L - 1) + 1` for zero-based `j`.
    pub fn support_len(&self, j: usize) -> usize {
        ((1usize << (j + 1)) - 1) * (self.filter.len() - 1) + 1
    }

    /// Wavelet at level `j` wrapped onto a circle of length `t`.
    pub fn periodized(&self, j: usize, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; t];
        for (n, &v) in self.wavelets[j].iter().enumerate() {
            out[n % t] += v;
        }
        out
    }
}

/// Builds a wavelet system from a filter specification.
pub fn build_wavelet_system(filter: WaveletFilter, levels: usize) -> Result<DiscreteWaveletSystem> {
    DiscreteWaveletSystem::new(filter, levels)
}

/// Cross-level autocorrelation wavelet
/// `Psi_{j,l}(tau) = sum_n psi_j[n] psi_l[n - tau]`, zero outside the joint
/// support.
pub fn autocorr_wavelet(system: &DiscreteWaveletSystem, j: usize, l: usize, tau: isize) -> f64 {
    let a = system.wavelet(j);
    let b = system.wavelet(l);
    // n ranges over indices with 0 <= n < a.len() and 0 <= n - tau < b.len().
    let lo = tau.max(0);
    let hi = (a.len() as isize).min(b.len() as isize + tau);
    let mut acc = CompensatedSum::new();
    let mut n = lo;
    while n < hi {
        acc.add(a[n as usize] * b[(n - tau) as usize]);
        n += 1;
    }
    acc.value()
}

/// Inner products of autocorrelation wavelets
/// `B_{j,l,h}(lambda) = sum_tau Psi_{j,h}(tau) Psi_{l,h}(tau - lambda)` over
/// `lambda in [-T, T]`, the leakage matrix `A_{j,l} = B_{j,j,l}(0)` and its
/// inverse.
#[derive(Debug, Clone)]
pub struct AutoCorrProducts {
    levels: usize,
    max_lag: usize,
    // [(lambda + T)][j][l][h]
    b: Arc<Vec<f64>>,
    a: Vec<f64>,
    a_inv: Vec<f64>,
    filter: WaveletFilter,
}

impl AutoCorrProducts {
    /// Tabulates `B` for every lag in `[-t, t]` and every level triple.
    ///
    /// Memory is `O(t * J^3)`; lengths above [`MAX_LAG_TABLE_LENGTH`] are refused.
    pub fn new(system: &DiscreteWaveletSystem, t: usize) -> Result<Self> {
        if dyadic_log2(t).is_none() || t < 2 {
            return Err(Error::NonDyadicLength(t));
        }
        if t > MAX_LAG_TABLE_LENGTH {
            return Err(Error::TooLong(t));
        }
        Self::with_max_lag(system, t)
    }

    /// Tabulates `B` for lags in `[-max_lag, max_lag]` only. `A` and its
    /// inverse do not depend on the lag range.
    pub fn with_max_lag(system: &DiscreteWaveletSystem, max_lag: usize) -> Result<Self> {
        if max_lag > MAX_LAG_TABLE_LENGTH {
            return Err(Error::TooLong(max_lag));
        }
        let t = max_lag;
        let levels = system.levels();
        let max_len = (0..levels).map(|j| system.wavelet(j).len()).max().unwrap_or(1);
        // B has support of width < 4 * max_len; the transform length must also
        // hold every requested lag without wrap-around.
        let n_fft = (4 * max_len).max(2 * t + 2).next_power_of_two();

        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n_fft);
        let inverse = planner.plan_fft_inverse(n_fft);

        let spectra: Vec<Vec<Complex64>> = (0..levels)
            .map(|j| {
                let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
                for (n, &v) in system.wavelet(j).iter().enumerate() {
                    buf[n].re = v;
                }
                forward.process(&mut buf);
                buf
            })
            .collect();
        let power: Vec<Vec<f64>> = spectra
            .iter()
            .map(|s| s.iter().map(|c| c.norm_sqr()).collect())
            .collect();

        let lags = 2 * t + 1;
        let j3 = levels * levels * levels;
        let scale = 1.0 / n_fft as f64;

        // The transform of B_{j,l,h} is psi_j conj(psi_l) |psi_h|^2; only j <= l
        // is transformed, the rest follows from B_{l,j,h}(-lambda).
        let pairs: Vec<(usize, usize)> = (0..levels)
            .flat_map(|j| (j..levels).map(move |l| (j, l)))
            .collect();
        let blocks: Vec<PairBlock> = pairs
            .par_iter()
            .map(|&(j, l)| {
                let cross: Vec<Complex64> = spectra[j]
                    .iter()
                    .zip(&spectra[l])
                    .map(|(x, y)| x * y.conj())
                    .collect();
                let per_h = (0..levels)
                    .map(|h| {
                        let mut buf: Vec<Complex64> =
                            cross.iter().zip(&power[h]).map(|(c, p)| c * *p).collect();
                        inverse.process(&mut buf);
                        (0..lags)
                            .map(|i| {
                                let lambda = i as isize - t as isize;
                                buf[lambda.rem_euclid(n_fft as isize) as usize].re * scale
                            })
                            .collect()
                    })
                    .collect();
                ((j, l), per_h)
            })
            .collect();

        let mut b = vec![0.0; lags * j3];
        let idx = |i: usize, j: usize, l: usize, h: usize| ((i * levels + j) * levels + l) * levels + h;
        for ((j, l), per_h) in &blocks {
            for (h, series) in per_h.iter().enumerate() {
                for (i, &v) in series.iter().enumerate() {
                    b[idx(i, *j, *l, h)] = v;
                    b[idx(lags - 1 - i, *l, *j, h)] = v;
                }
            }
        }

        let mut a = vec![0.0; levels * levels];
        for j in 0..levels {
            for l in 0..levels {
                a[j * levels + l] = b[idx(t, j, j, l)];
            }
        }
        let a_inv = matops::dense_inverse(&a, levels)
            .ok_or(Error::SingularInnerProductMatrix { rcond: 0.0 })?;
        let rcond = 1.0 / (matops::norm_one(&a, levels) * matops::norm_one(&a_inv, levels));
        if !(rcond >= 1e-14) {
            return Err(Error::SingularInnerProductMatrix { rcond });
        }

        Ok(Self {
            levels,
            max_lag: t,
            b: Arc::new(b),
            a,
            a_inv,
            filter: system.filter().clone(),
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Lags are tabulated for `lambda in [-max_lag, max_lag]`.
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn filter(&self) -> &WaveletFilter {
        &self.filter
    }

    /// `B_{j,l,h}(lambda)`; zero for lags outside the table.
    #[inline]
    pub fn b(&self, lambda: isize, j: usize, l: usize, h: usize) -> f64 {
        if lambda.unsigned_abs() > self.max_lag {
            return 0.0;
        }
        let i = (lambda + self.max_lag as isize) as usize;
        self.b[((i * self.levels + j) * self.levels + l) * self.levels + h]
    }

    /// Slice `B_{j,l,.}(lambda)` over `h`.
    #[inline]
    pub fn b_levels(&self, lambda: isize, j: usize, l: usize) -> &[f64] {
        let i = (lambda + self.max_lag as isize) as usize;
        let start = ((i * self.levels + j) * self.levels + l) * self.levels;
        &self.b[start..start + self.levels]
    }

    pub fn a(&self, j: usize, l: usize) -> f64 {
        self.a[j * self.levels + l]
    }

    pub fn a_inv(&self, j: usize, l: usize) -> f64 {
        self.a_inv[j * self.levels + l]
    }

    /// Row-major `J x J` leakage matrix.
    pub fn a_matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn a_inv_matrix(&self) -> &[f64] {
        &self.a_inv
    }
}

/// Convenience wrapper over [`AutoCorrProducts::new`].
pub fn autocorr_inner_products(system: &DiscreteWaveletSystem, t: usize) -> Result<AutoCorrProducts> {
    AutoCorrProducts::new(system, t)
}

// B over (lag, h) for one level pair j <= l.
type PairBlock = ((usize, usize), Vec<Vec<f64>>);

// Extremal-phase Daubechies lowpass filters, normalized to sum sqrt(2).
const DAUB1: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

#[allow(clippy::excessive_precision)]
const DAUB2: [f64; 4] = [
    0.4829629131445341433749,
    0.8365163037378079055753,
    0.224143868042013381026,
    -0.1294095225512603811744,
];

#[allow(clippy::excessive_precision)]
const DAUB3: [f64; 6] = [
    0.3326705529500826159985,
    0.8068915093110925764945,
    0.4598775021184915700952,
    -0.1350110200102545886964,
    -0.08544127388202666169282,
    0.03522629188570953660274,
];

#[allow(clippy::excessive_precision)]
const DAUB4: [f64; 8] = [
    0.2303778133088965008633,
    0.7148465705529156470899,
    0.6308807679298589078817,
    -0.02798376941685985421141,
    -0.1870348117190930840796,
    0.03084138183556076362722,
    0.03288301166688519973541,
    -0.01059740178506903210488,
];

#[allow(clippy::excessive_precision)]
const DAUB5: [f64; 10] = [
    0.1601023979741929144807,
    0.6038292697971896705401,
    0.7243085284377729277281,
    0.1384281459013207315054,
    -0.2422948870663820318626,
    -0.03224486958463837464848,
    0.07757149384004571352313,
    -0.006241490212798274274191,
    -0.01258075199908199946851,
    0.003335725285473771277998,
];

#[allow(clippy::excessive_precision)]
const DAUB6: [f64; 12] = [
    0.1115407433501094636213,
    0.4946238903984530856772,
    0.7511339080210953506789,
    0.315250351709197629086,
    -0.2262646939654398200763,
    -0.1297668675672619355623,
    0.09750160558732304910234,
    0.02752286553030572862554,
    -0.03158203931748602956508,
    0.0005538422011614961392519,
    0.004777257510945510639636,
    -0.001077301085308479564853,
];

#[allow(clippy::excessive_precision)]
const DAUB7: [f64; 14] = [
    0.07785205408500917901996,
    0.396539319481917306539,
    0.7291320908462351199169,
    0.4697822874051931224716,
    -0.1439060039285649754051,
    -0.2240361849938749826381,
    0.07130921926683026475088,
    0.08061260915108307191292,
    -0.03802993693501441357959,
    -0.01657454163066688065411,
    0.01255099855609984061299,
    0.0004295779729213665211321,
    -0.001801640704047490915268,
    0.0003537137999745202484463,
];

#[allow(clippy::excessive_precision)]
const DAUB8: [f64; 16] = [
    0.05441584224310400995501,
    0.3128715909142999706592,
    0.6756307362972898068078,
    0.5853546836542067127713,
    -0.01582910525634930566738,
    -0.2840155429615469265162,
    0.0004724845739132827703606,
    0.128747426620478458857,
    -0.01736930100180754616962,
    -0.04408825393079475150676,
    0.01398102791739828164872,
    0.008746094047405776716383,
    -0.004870352993451574310422,
    -0.0003917403733769470462981,
    0.0006754494064505693663695,
    -0.0001174767841247695337306,
];

#[allow(clippy::excessive_precision)]
const DAUB9: [f64; 18] = [
    0.0380779473638783465887,
    0.243834674612590353732,
    0.6048231236901111119031,
    0.6572880780513005380782,
    0.133197385825007576191,
    -0.2932737832791749088064,
    -0.09684078322297646051351,
    0.1485407493381063801351,
    0.03072568147933337921232,
    -0.06763282906132997367564,
    0.0002509471148314519575872,
    0.02236166212367909720537,
    -0.004723204757751397277926,
    -0.004281503682463429834497,
    0.001847646883056226476619,
    0.0002303857635231959672052,
    -0.000251963188942710136975,
    0.00003934732031627159948069,
];

#[allow(clippy::excessive_precision)]
const DAUB10: [f64; 20] = [
    0.02667005790055555358662,
    0.1881768000776914890209,
    0.5272011889317255864817,
    0.6884590394536035657419,
    0.2811723436605774607487,
    -0.2498464243273153794161,
    -0.1959462743773770435043,
    0.1273693403357932600827,
    0.09305736460357235116035,
    -0.07139414716639708714534,
    -0.02945753682187581285828,
    0.03321267405934100173976,
    0.003606553566956169655423,
    -0.01073317548333057504432,
    0.001395351747052901165789,
    0.001992405295185056117159,
    -0.0006858566949597116265614,
    -0.0001164668551292854509515,
    0.00009358867032006959133405,
    -0.00001326420289452124481244,
];
