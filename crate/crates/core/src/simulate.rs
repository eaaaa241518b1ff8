//! Simulation of multivariate LSW processes with a prescribed spectrum.
//!
//! A realization is `X_t = sum_j sum_k V_j(k)^T z_{j,k} psi_j[(t - k) mod T]`
//! where `V_j(k)^T V_j(k) = S_j(k)`, so each level contributes exactly the
//! requested local covariance. Levels run `0..log2(T)` and locations
//! `0..T` with the same circular placement the analysis transform uses.
//!
//! Innovations are drawn from ChaCha8 streams: the generator key comes from
//! the seed and `(j, k)` selects stream `(j << 32) | k`, so a given seed
//! yields the same innovations however the work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::array::{default_names, ArrayKind, Meta, MvLswArray, TimeSeriesMatrix};
use crate::error::{Error, Result};
use crate::matops::{cholesky_lower, psd_sqrt, DenseMatrix};
use crate::spectrum::wrapped_wavelet;
use crate::util::dyadic_log2;
use crate::wavelet::{make_filter, DiscreteWaveletSystem, Family};

/// Zero-mean, unit-variance innovation distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Innovation {
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
    /// Student-t rescaled to unit variance; requires `df > 4`.
    StudentT { df: f64 },
}

/// Seeded source of innovation vectors `z_{j,k}`.
#[derive(Debug, Clone)]
pub struct InnovationGenerator {
    distribution: Innovation,
    seed: u64,
    base: ChaCha8Rng,
    student: Option<(StudentT<f64>, f64)>,
}

impl InnovationGenerator {
    pub fn new(distribution: Innovation, seed: u64) -> Result<Self> {
        let student = match distribution {
            Innovation::StudentT { df } => {
                if !(df > 4.0) {
                    return Err(Error::DomainError(format!(
                        "Student-t innovations need df > 4, got {df}"
                    )));
                }
                let dist = StudentT::new(df).map_err(|e| Error::DomainError(e.to_string()))?;
                Some((dist, ((df - 2.0) / df).sqrt()))
            }
            _ => None,
        };
        Ok(Self {
            distribution,
            seed,
            base: ChaCha8Rng::seed_from_u64(seed),
            student,
        })
    }

    pub fn gaussian(seed: u64) -> Self {
        Self::new(Innovation::Gaussian, seed).expect("gaussian generator is always valid")
    }

    pub fn distribution(&self) -> Innovation {
        self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for bootstrap replicate `index`.
    pub fn for_replicate(&self, index: u64) -> Self {
        let seed = splitmix64(self.seed ^ splitmix64(index.wrapping_add(1)));
        Self::new(self.distribution, seed).expect("distribution already validated")
    }

    /// Stream for level `j` and location `k`.
    pub fn stream(&self, j: usize, k: usize) -> InnovationStream<'_> {
        let mut rng = self.base.clone();
        rng.set_stream(((j as u64) << 32) | k as u64);
        rng.set_word_pos(0);
        InnovationStream { gen: self, rng }
    }

    /// Fills `out` with one innovation vector for `(j, k)`.
    pub fn draw(&self, j: usize, k: usize, out: &mut [f64]) {
        let mut s = self.stream(j, k);
        for v in out.iter_mut() {
            *v = s.next_value();
        }
    }
}

/// Sequential draws from one `(j, k)` stream.
pub struct InnovationStream<'a> {
    gen: &'a InnovationGenerator,
    rng: ChaCha8Rng,
}

impl InnovationStream<'_> {
    pub fn next_value(&mut self) -> f64 {
        match self.gen.distribution {
            Innovation::Gaussian => StandardNormal.sample(&mut self.rng),
            Innovation::Uniform => 3f64.sqrt() * (2.0 * self.rng.gen::<f64>() - 1.0),
            Innovation::StudentT { .. } => {
                let (dist, scale) = self.gen.student.as_ref().expect("set for Student-t");
                scale * dist.sample(&mut self.rng)
            }
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-level, per-location transfer matrices with `V^T V = S`.
#[derive(Debug, Clone)]
pub struct TransferField {
    levels: usize,
    len: usize,
    // [j][k]
    matrices: Vec<DenseMatrix>,
}

impl TransferField {
    pub fn get(&self, j: usize, k: usize) -> &DenseMatrix {
        &self.matrices[j * self.len + k]
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// Factorizes every spectrum slice: lower-triangular Cholesky-type factor
/// where positive definite, eigenvalue square root for semi-definite
/// slices, zero for zero slices.
pub fn spectrum_to_transfer(s: &MvLswArray) -> Result<TransferField> {
    let (p, levels, t) = s.dims();
    let mut matrices = Vec::with_capacity(levels * t);
    for j in 0..levels {
        for k in 0..t {
            let slice = s.slice(j, k);
            let m = if slice.max_abs() == 0.0 {
                DenseMatrix::zeros(p)
            } else {
                match cholesky_lower(&slice) {
                    Ok(v) => v,
                    Err(_) => psd_sqrt(&slice)
                        .map_err(|_| Error::IndefiniteSpectrum { level: j, location: k })?,
                }
            };
            matrices.push(m);
        }
    }
    Ok(TransferField {
        levels,
        len: t,
        matrices,
    })
}

/// Draws one realization with spectrum `s`, using the wavelet recorded in
/// `s.meta`.
pub fn rmvlsw(s: &MvLswArray, gen: &InnovationGenerator) -> Result<TimeSeriesMatrix> {
    let (p, levels, t) = s.dims();
    match dyadic_log2(t) {
        Some(j) if j >= 2 && j >= levels => {}
        _ => return Err(Error::NonDyadicLength(t)),
    }
    let transfer = spectrum_to_transfer(s)?;
    let filter = make_filter(s.meta.family, s.meta.filter_number)?;
    let system = DiscreteWaveletSystem::new(filter, levels)?;

    let mut x = vec![vec![0.0; t]; p];
    let mut z = vec![0.0; p];
    let mut amp = vec![vec![0.0; t]; p];
    for j in 0..levels {
        let mut active = false;
        for k in 0..t {
            let v = transfer.get(j, k);
            gen.draw(j, k, &mut z);
            for (c, a) in amp.iter_mut().enumerate() {
                // (V^T z)_c
                let w: f64 = (0..p).map(|r| v.get(r, c) * z[r]).sum();
                a[k] = w;
                active |= w != 0.0;
            }
        }
        if !active {
            continue;
        }
        let psi = wrapped_wavelet(&system, j, t);
        for (xc, ac) in x.iter_mut().zip(&amp) {
            for (k, &w) in ac.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (n, &ps) in psi.iter().enumerate() {
                    let idx = k + n;
                    let idx = if idx >= t { idx - t } else { idx };
                    xc[idx] += w * ps;
                }
            }
        }
    }
    TimeSeriesMatrix::new(x, Some(s.meta.channel_names.clone()))
}

fn linear_seq(from: f64, to: f64, t: usize, k: usize) -> f64 {
    from + (to - from) * k as f64 / (t - 1) as f64
}

/// Trivariate Haar spectrum with power only at the second finest level:
///
/// ```text
/// S_2(u) = [ 4+16u  2+8u  2+8u
///            2+8u   6     1+4u
///            2+8u   1+4u  20-14u ]
/// ```
///
/// sampled on the grid `u = k / (T - 1)`, `k = 0..T`.
pub fn build_eq3_fixture(t: usize) -> Result<MvLswArray> {
    let levels = match dyadic_log2(t) {
        Some(j) if j >= 3 => j,
        _ => return Err(Error::NonDyadicLength(t)),
    };
    let meta = Meta::new(Family::DaubExPhase, 1, default_names(3));
    let mut s = MvLswArray::zeros(3, levels, t, ArrayKind::Spectrum, meta);
    let j = 1;
    for k in 0..t {
        s.set(0, 0, j, k, linear_seq(4.0, 20.0, t, k));
        s.set(1, 1, j, k, 6.0);
        s.set(2, 2, j, k, linear_seq(20.0, 6.0, t, k));
        s.set(0, 1, j, k, linear_seq(2.0, 10.0, t, k));
        s.set(0, 2, j, k, linear_seq(2.0, 10.0, t, k));
        s.set(1, 2, j, k, linear_seq(1.0, 5.0, t, k));
    }
    Ok(s)
}
