//! Spectrum estimation: non-decimated wavelet coefficients, the raw wavelet
//! periodogram, time-direction kernel smoothing, leakage (bias) correction
//! through the inverse inner-product matrix and per-slice regularization.
//!
//! Both the transform and the smoother use periodic boundaries, so each step
//! is an exact circular convolution. Series that are not naturally periodic
//! can be padded beforehand (see [`crate::io::LengthPolicy`]).

use crate::array::{ArrayKind, KernelName, KernelSpec, Meta, MvLswArray, TimeSeriesMatrix};
use crate::error::{Error, Result};
use crate::matops;
use crate::wavelet::{make_filter, AutoCorrProducts, DiscreteWaveletSystem, Family};

/// Symmetric smoothing weights on `[-M, M]` that sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingKernel {
    name: KernelName,
    m: usize,
    weights: Vec<f64>,
}

impl SmoothingKernel {
    pub fn new(name: KernelName, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::DomainError("kernel half-width must be >= 1".into()));
        }
        let weights = match name {
            KernelName::Daniell => vec![1.0 / (2 * m + 1) as f64; 2 * m + 1],
            KernelName::ModifiedDaniell => {
                let mut w = vec![1.0 / (2 * m) as f64; 2 * m + 1];
                w[0] = 1.0 / (4 * m) as f64;
                w[2 * m] = w[0];
                w
            }
        };
        Ok(Self { name, m, weights })
    }

    pub fn daniell(m: usize) -> Result<Self> {
        Self::new(KernelName::Daniell, m)
    }

    pub fn name(&self) -> KernelName {
        self.name
    }

    pub fn half_width(&self) -> usize {
        self.m
    }

    /// Weight at offset `m` in `[-M, M]`; zero outside.
    #[inline]
    pub fn weight(&self, m: isize) -> f64 {
        if m.unsigned_abs() > self.m {
            0.0
        } else {
            self.weights[(m + self.m as isize) as usize]
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Builds the per-level kernels described by `spec` for `levels` levels.
pub fn kernels_for(spec: &KernelSpec, levels: usize) -> Result<Vec<SmoothingKernel>> {
    if spec.params.is_empty() || (spec.params.len() != 1 && spec.params.len() != levels) {
        return Err(Error::DimensionMismatch(format!(
            "{} kernel parameters for {levels} levels",
            spec.params.len()
        )));
    }
    (0..levels)
        .map(|j| SmoothingKernel::new(spec.name, spec.param_for_level(j)))
        .collect()
}

/// Non-decimated wavelet coefficients `d[p][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    p: usize,
    j: usize,
    t: usize,
    data: Vec<f64>,
}

impl WaveletCoefficients {
    pub fn new(p: usize, j: usize, t: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != p * j * t {
            return Err(Error::DimensionMismatch("coefficient array size".into()));
        }
        Ok(Self { p, j, t, data })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.p, self.j, self.t)
    }

    pub fn level(&self, p: usize, j: usize) -> &[f64] {
        let s = (p * self.j + j) * self.t;
        &self.data[s..s + self.t]
    }

    pub fn get(&self, p: usize, j: usize, k: usize) -> f64 {
        self.data[(p * self.j + j) * self.t + k]
    }
}

/// `d_{j,k} = sum_t x[t] psi_j[t - k]` with indices taken modulo `T`.
pub fn ndwt_coefficients(x: &TimeSeriesMatrix, system: &DiscreteWaveletSystem) -> Result<WaveletCoefficients> {
    let t = x.len();
    let levels = system.levels();
    let p = x.channels();
    let mut data = vec![0.0; p * levels * t];
    for j in 0..levels {
        let psi = wrapped_wavelet(system, j, t);
        for c in 0..p {
            let xs = x.channel(c);
            let out = &mut data[(c * levels + j) * t..(c * levels + j + 1) * t];
            circular_correlate(xs, &psi, out);
        }
    }
    WaveletCoefficients::new(p, levels, t, data)
}

/// The wavelet itself when it fits on the circle, its periodized form
/// otherwise.
pub(crate) fn wrapped_wavelet(system: &DiscreteWaveletSystem, j: usize, t: usize) -> Vec<f64> {
    let w = system.wavelet(j);
    if w.len() <= t {
        w.to_vec()
    } else {
        system.periodized(j, t)
    }
}

// out[k] = sum_n psi[n] x[(k + n) mod T]
fn circular_correlate(x: &[f64], psi: &[f64], out: &mut [f64]) {
    let t = x.len();
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        let direct = psi.len().min(t - k);
        for n in 0..direct {
            s += psi[n] * x[k + n];
        }
        for n in direct..psi.len() {
            s += psi[n] * x[k + n - t];
        }
        *o = s;
    }
}

/// `I_{j,k} = d_{j,k} d_{j,k}^T`.
pub fn raw_periodogram(d: &WaveletCoefficients, meta: Meta) -> MvLswArray {
    let (p, levels, t) = d.dims();
    let mut out = MvLswArray::zeros(p, levels, t, ArrayKind::Periodogram, meta);
    let mut buf = vec![0.0; t];
    for a in 0..p {
        for b in a..p {
            for j in 0..levels {
                let da = d.level(a, j);
                let db = d.level(b, j);
                for k in 0..t {
                    buf[k] = da[k] * db[k];
                }
                out.set_pair_series(a, b, j, &buf);
            }
        }
    }
    out
}

/// Circular time-direction smoothing with the same kernel at every level.
pub fn smooth_periodogram(i: &MvLswArray, kernel: &SmoothingKernel) -> Result<MvLswArray> {
    let kernels = vec![kernel.clone(); i.levels()];
    smooth_periodogram_by_level(i, &kernels)
}

/// Circular time-direction smoothing with one kernel per level.
pub fn smooth_periodogram_by_level(i: &MvLswArray, kernels: &[SmoothingKernel]) -> Result<MvLswArray> {
    let (p, levels, t) = i.dims();
    if kernels.len() != levels {
        return Err(Error::DimensionMismatch(format!(
            "{} kernels for {levels} levels",
            kernels.len()
        )));
    }
    for k in kernels {
        if 2 * k.half_width() >= t {
            return Err(Error::KernelTooWide { m: k.half_width(), t });
        }
    }
    let mut out = MvLswArray::zeros(p, levels, t, i.kind, i.meta.clone());
    let mut buf = vec![0.0; t];
    for a in 0..p {
        for b in a..p {
            for (j, kernel) in kernels.iter().enumerate() {
                circular_smooth(i.pair_series(a, b, j), kernel, &mut buf);
                out.set_pair_series(a, b, j, &buf);
            }
        }
    }
    Ok(out)
}

fn circular_smooth(x: &[f64], kernel: &SmoothingKernel, out: &mut [f64]) {
    let t = x.len() as isize;
    let m = kernel.half_width() as isize;
    let w = kernel.weights();
    for (k, o) in out.iter_mut().enumerate() {
        let k = k as isize;
        let mut s = 0.0;
        for off in -m..=m {
            s += w[(off + m) as usize] * x[(k + off).rem_euclid(t) as usize];
        }
        *o = s;
    }
}

/// `S_j = sum_l Ainv[j][l] I_l` at every location.
pub fn bias_correct(smoothed: &MvLswArray, acp: &AutoCorrProducts) -> Result<MvLswArray> {
    let (p, levels, t) = smoothed.dims();
    if acp.levels() != levels {
        return Err(Error::DimensionMismatch(format!(
            "inner products for {} levels, array has {levels}",
            acp.levels()
        )));
    }
    let mut out = MvLswArray::zeros(p, levels, t, smoothed.kind, smoothed.meta.clone());
    out.meta.bias_corrected = true;
    let mut buf = vec![0.0; t];
    for a in 0..p {
        for b in a..p {
            for j in 0..levels {
                buf.iter_mut().for_each(|v| *v = 0.0);
                for l in 0..levels {
                    let w = acp.a_inv(j, l);
                    for (o, v) in buf.iter_mut().zip(smoothed.pair_series(a, b, l)) {
                        *o += w * v;
                    }
                }
                out.set_pair_series(a, b, j, &buf);
            }
        }
    }
    Ok(out)
}

/// Generalized cross-validation score of a linear smoother:
/// mean squared residual divided by `(1 - w(0))^2`, per level.
pub fn gcv_score(raw: &MvLswArray, smoothed: &MvLswArray, kernels: &[SmoothingKernel]) -> Result<f64> {
    if !raw.same_shape(smoothed) {
        return Err(Error::DimensionMismatch("periodogram shapes differ".into()));
    }
    let (p, levels, t) = raw.dims();
    if kernels.len() != levels {
        return Err(Error::DimensionMismatch("one kernel per level expected".into()));
    }
    let mut total = 0.0;
    for (j, kernel) in kernels.iter().enumerate() {
        let w0 = kernel.weight(0);
        if w0 >= 1.0 {
            return Err(Error::DegenerateKernel(w0));
        }
        let mut rss = 0.0;
        for a in 0..p {
            for b in 0..p {
                for (x, y) in raw.pair_series(a, b, j).iter().zip(smoothed.pair_series(a, b, j)) {
                    rss += (x - y) * (x - y);
                }
            }
        }
        total += rss / ((1.0 - w0) * (1.0 - w0));
    }
    Ok(total / (levels * t * p * p) as f64)
}

/// Settings for [`mv_ews`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub family: Family,
    pub filter_number: usize,
    pub kernel: KernelSpec,
    pub bias_correct: bool,
    pub tol: f64,
}

impl EstimateOptions {
    /// Haar wavelet, Daniell kernel with half-width `m`, bias correction on,
    /// regularization floor `1e-10`.
    pub fn haar_daniell(m: usize) -> Self {
        Self {
            family: Family::DaubExPhase,
            filter_number: 1,
            kernel: KernelSpec::uniform(KernelName::Daniell, m),
            bias_correct: true,
            tol: 1e-10,
        }
    }

    /// Recovers the settings used to produce `spectrum`.
    pub fn from_meta(meta: &Meta) -> Result<Self> {
        let kernel = meta
            .kernel
            .clone()
            .ok_or_else(|| Error::DomainError("spectrum metadata carries no kernel".into()))?;
        Ok(Self {
            family: meta.family,
            filter_number: meta.filter_number,
            kernel,
            bias_correct: meta.bias_corrected,
            tol: meta.regularization_tol.unwrap_or(1e-10),
        })
    }
}

/// Reusable estimator for series of one fixed length.
#[derive(Debug, Clone)]
pub struct Estimator {
    options: EstimateOptions,
    system: DiscreteWaveletSystem,
    acp: AutoCorrProducts,
    kernels: Vec<SmoothingKernel>,
    t: usize,
}

impl Estimator {
    pub fn new(options: EstimateOptions, t: usize) -> Result<Self> {
        let levels = match crate::util::dyadic_log2(t) {
            Some(j) if j >= 2 => j,
            _ => return Err(Error::NonDyadicLength(t)),
        };
        if !(options.tol > 0.0) {
            return Err(Error::DomainError("regularization tolerance must be > 0".into()));
        }
        let filter = make_filter(options.family, options.filter_number)?;
        let system = DiscreteWaveletSystem::new(filter, levels)?;
        let kernels = kernels_for(&options.kernel, levels)?;
        for k in &kernels {
            if 2 * k.half_width() >= t {
                return Err(Error::KernelTooWide { m: k.half_width(), t });
            }
        }
        // Only the zero-lag products are needed here.
        let acp = AutoCorrProducts::with_max_lag(&system, 0)?;
        Ok(Self {
            options,
            system,
            acp,
            kernels,
            t,
        })
    }

    pub fn options(&self) -> &EstimateOptions {
        &self.options
    }

    pub fn system(&self) -> &DiscreteWaveletSystem {
        &self.system
    }

    pub fn kernels(&self) -> &[SmoothingKernel] {
        &self.kernels
    }

    /// Bias-corrected (if requested) smoothed periodogram before
    /// regularization, along with the GCV score.
    pub fn unregularized(&self, x: &TimeSeriesMatrix) -> Result<(MvLswArray, f64)> {
        if x.len() != self.t {
            return Err(Error::DimensionMismatch(format!(
                "estimator built for T = {}, series has {}",
                self.t,
                x.len()
            )));
        }
        let d = ndwt_coefficients(x, &self.system)?;
        let mut meta = Meta::new(self.options.family, self.options.filter_number, x.names().to_vec());
        meta.kernel = Some(self.options.kernel.clone());
        let raw = raw_periodogram(&d, meta);
        let smoothed = smooth_periodogram_by_level(&raw, &self.kernels)?;
        let gcv = gcv_score(&raw, &smoothed, &self.kernels)?;
        let mut est = if self.options.bias_correct {
            bias_correct(&smoothed, &self.acp)?
        } else {
            smoothed
        };
        est.kind = ArrayKind::Spectrum;
        est.meta.gcv = Some(gcv);
        Ok((est, gcv))
    }

    pub fn estimate(&self, x: &TimeSeriesMatrix) -> Result<MvLswArray> {
        let (mut est, _) = self.unregularized(x)?;
        let tol = self.options.tol;
        let (_, levels, t) = est.dims();
        let mut raw_min = f64::INFINITY;
        let mut post_min = f64::INFINITY;
        for j in 0..levels {
            for k in 0..t {
                let slice = est.slice(j, k);
                let (reg, min) = matops::regularize_with_min(&slice, tol)?;
                raw_min = raw_min.min(min);
                if min >= tol {
                    post_min = post_min.min(min);
                } else {
                    let e = matops::sym_eigen(&reg)?;
                    post_min = post_min.min(*e.values.last().unwrap());
                    est.set_slice(j, k, &reg);
                }
            }
        }
        est.meta.regularization_tol = Some(tol);
        est.meta.raw_min_eigenvalue = Some(raw_min);
        est.meta.min_eigenvalue = Some(post_min);
        Ok(est)
    }
}

/// Estimates the multivariate evolutionary wavelet spectrum of `x`:
/// transform, periodogram, smoothing, optional bias correction and
/// regularization of every `P x P` slice to minimum eigenvalue `tol`.
pub fn mv_ews(x: &TimeSeriesMatrix, options: &EstimateOptions) -> Result<MvLswArray> {
    Estimator::new(options.clone(), x.len())?.estimate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::default_names;

    fn haar_system(levels: usize) -> DiscreteWaveletSystem {
        DiscreteWaveletSystem::new(make_filter(Family::DaubExPhase, 1).unwrap(), levels).unwrap()
    }

    fn meta(p: usize) -> Meta {
        Meta::new(Family::DaubExPhase, 1, default_names(p))
    }

    fn series(channels: Vec<Vec<f64>>) -> TimeSeriesMatrix {
        TimeSeriesMatrix::new(channels, None).unwrap()
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn kernel_weights() {
        let k = SmoothingKernel::daniell(3).unwrap();
        assert_eq!(k.weights().len(), 7);
        assert!(k.weights().iter().all(|&w| w == 1.0 / 7.0));
        let k = SmoothingKernel::new(KernelName::ModifiedDaniell, 2).unwrap();
        assert_eq!(k.weights(), &[0.125, 0.25, 0.25, 0.25, 0.125]);
        for m in 1..20 {
            for name in [KernelName::Daniell, KernelName::ModifiedDaniell] {
                let k = SmoothingKernel::new(name, m).unwrap();
                assert!((k.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for o in 0..=m as isize {
                    assert_eq!(k.weight(o), k.weight(-o));
                }
            }
        }
        assert!(SmoothingKernel::daniell(0).is_err());
    }

    #[test]
    fn zero_and_constant_series_give_zero_coefficients() {
        let sys = haar_system(4);
        let d = ndwt_coefficients(&series(vec![vec![0.0; 16]]), &sys).unwrap();
        assert!(d.data.iter().all(|&v| v == 0.0));
        let d = ndwt_coefficients(&series(vec![vec![3.5; 16]]), &sys).unwrap();
        assert!(d.data.iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn impulse_response_is_reversed_wavelet() {
        let sys = haar_system(3);
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let d = ndwt_coefficients(&series(vec![x]), &sys).unwrap();
        // d_k = psi_1[-k mod 8]: k = 0 -> psi[0], k = 7 -> psi[1].
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut want = [0.0; 8];
        want[0] = r;
        want[7] = -r;
        assert_eq!(d.level(0, 0), &want[..]);
    }

    #[test]
    fn periodogram_entries() {
        let mut data = vec![0.0; 2 * 2 * 4];
        data[0] = 2.0;
        let d = WaveletCoefficients::new(2, 2, 4, data).unwrap();
        let i = raw_periodogram(&d, meta(2));
        assert_eq!(i.get(0, 0, 0, 0), 4.0);
        assert_eq!(i.data().iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn periodogram_slices_are_rank_one() {
        let mut rng = lcg(3);
        let data: Vec<f64> = (0..2 * 3 * 8).map(|_| rng()).collect();
        let d = WaveletCoefficients::new(2, 3, 8, data).unwrap();
        let i = raw_periodogram(&d, meta(2));
        for j in 0..3 {
            for k in 0..8 {
                assert!(i.get(0, 0, j, k) >= 0.0 && i.get(1, 1, j, k) >= 0.0);
                assert_eq!(i.get(0, 1, j, k), i.get(1, 0, j, k));
                let det = i.get(0, 0, j, k) * i.get(1, 1, j, k) - i.get(0, 1, j, k).powi(2);
                assert!(det.abs() < 1e-12);
            }
        }
    }

    fn field(p: usize, levels: usize, t: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> MvLswArray {
        let mut a = MvLswArray::zeros(p, levels, t, ArrayKind::Periodogram, meta(p));
        for x in 0..p {
            for y in x..p {
                for j in 0..levels {
                    for k in 0..t {
                        a.set(x, y, j, k, f(x, y, j, k));
                    }
                }
            }
        }
        a
    }

    #[test]
    fn smoothing_examples() {
        let k1 = SmoothingKernel::daniell(1).unwrap();
        let c = field(2, 2, 16, |x, y, j, _| (x + 2 * y + j) as f64);
        let s = smooth_periodogram(&c, &k1).unwrap();
        for (a, b) in s.data().iter().zip(c.data()) {
            assert!((a - b).abs() < 1e-14);
        }

        let imp = field(1, 1, 16, |_, _, _, k| if k == 0 { 1.0 } else { 0.0 });
        let s = smooth_periodogram(&imp, &k1).unwrap();
        for k in 0..16 {
            let want = if [15, 0, 1].contains(&k) { 1.0 / 3.0 } else { 0.0 };
            assert!((s.get(0, 0, 0, k) - want).abs() < 1e-15);
        }

        let m = 3;
        let k3 = SmoothingKernel::daniell(m).unwrap();
        let lin = field(1, 1, 32, |_, _, _, k| 0.5 * k as f64 - 2.0);
        let s = smooth_periodogram(&lin, &k3).unwrap();
        for k in m..32 - m {
            assert!((s.get(0, 0, 0, k) - lin.get(0, 0, 0, k)).abs() < 1e-12);
        }

        assert!(matches!(
            smooth_periodogram(&lin, &SmoothingKernel::daniell(16).unwrap()),
            Err(Error::KernelTooWide { .. })
        ));
    }

    #[test]
    fn smoothing_commutes_with_circular_shift() {
        let mut rng = lcg(9);
        let vals: Vec<f64> = (0..32).map(|_| rng()).collect();
        let a = field(1, 1, 32, |_, _, _, k| vals[k]);
        let shifted = field(1, 1, 32, |_, _, _, k| vals[(k + 5) % 32]);
        let k = SmoothingKernel::new(KernelName::ModifiedDaniell, 4).unwrap();
        let sa = smooth_periodogram(&a, &k).unwrap();
        let sb = smooth_periodogram(&shifted, &k).unwrap();
        for i in 0..32 {
            assert!((sb.get(0, 0, 0, i) - sa.get(0, 0, 0, (i + 5) % 32)).abs() < 1e-14);
        }
    }

    #[test]
    fn bias_correction_examples() {
        let sys = haar_system(3);
        let acp = AutoCorrProducts::new(&sys, 8).unwrap();
        for target in 0..3 {
            let f = field(1, 3, 8, |_, _, l, _| acp.a(l, target));
            let s = bias_correct(&f, &acp).unwrap();
            for j in 0..3 {
                for k in 0..8 {
                    let want = if j == target { 1.0 } else { 0.0 };
                    assert!((s.get(0, 0, j, k) - want).abs() < 1e-12);
                }
            }
        }
        let z = field(2, 3, 8, |_, _, _, _| 0.0);
        assert!(bias_correct(&z, &acp).unwrap().data().iter().all(|&v| v == 0.0));

        let mut rng = lcg(1);
        let vals: Vec<f64> = (0..3 * 3 * 8).map(|_| rng()).collect();
        let f = field(2, 3, 8, |x, y, j, k| vals[((x + y) * 3 + j) * 8 + k]);
        let s = bias_correct(&f, &acp).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for l in 0..3 {
                    for k in 0..8 {
                        let back: f64 = (0..3).map(|j| acp.a(l, j) * s.get(x, y, j, k)).sum();
                        assert!((back - f.get(x, y, l, k)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn gcv_examples() {
        let k = SmoothingKernel::daniell(2).unwrap();
        let kernels = vec![k.clone(); 2];
        let c = field(2, 2, 16, |_, _, j, _| j as f64 + 1.0);
        let s = smooth_periodogram(&c, &k).unwrap();
        assert!(gcv_score(&c, &s, &kernels).unwrap().abs() < 1e-25);
        assert_eq!(gcv_score(&c, &c, &kernels).unwrap(), 0.0);

        // One nonzero residual: (JTP^2)^-1 * r^2 / (1 - 1/5)^2.
        let mut other = c.clone();
        other.set(0, 0, 1, 3, c.get(0, 0, 1, 3) + 2.0);
        let g = gcv_score(&c, &other, &kernels).unwrap();
        assert!((g - 4.0 / (2.0 * 16.0 * 4.0) / 0.64).abs() < 1e-14);
    }

    #[test]
    fn white_noise_unbiased_estimate_is_positive() {
        let mut rng = lcg(11);
        let x = series(vec![(0..64).map(|_| rng()).collect()]);
        let mut opts = EstimateOptions::haar_daniell(4);
        opts.bias_correct = false;
        let s = mv_ews(&x, &opts).unwrap();
        assert!(s.data().iter().all(|&v| v > 0.0));
        assert_eq!(s.kind, ArrayKind::Spectrum);
        assert!(s.meta.gcv.unwrap() > 0.0);
    }

    #[test]
    fn regularized_estimate_has_eigenvalue_floor() {
        let mut rng = lcg(5);
        let x = series((0..3).map(|_| (0..64).map(|_| rng()).collect()).collect());
        let s = mv_ews(&x, &EstimateOptions::haar_daniell(3)).unwrap();
        let tol = 1e-10;
        for j in 0..6 {
            for k in 0..64 {
                let e = matops::sym_eigen(&s.slice(j, k)).unwrap();
                assert!(*e.values.last().unwrap() >= tol * (1.0 - 1e-8));
            }
        }
        assert!(s.meta.min_eigenvalue.unwrap() >= tol * (1.0 - 1e-8));
        assert!(s.meta.raw_min_eigenvalue.unwrap() <= s.meta.min_eigenvalue.unwrap());
        assert!(s.meta.bias_corrected);
    }

    #[test]
    fn quadratic_in_amplitude_without_regularization() {
        let mut rng = lcg(2);
        let chans: Vec<Vec<f64>> = (0..2).map(|_| (0..32).map(|_| rng()).collect()).collect();
        let doubled: Vec<Vec<f64>> = chans.iter().map(|c| c.iter().map(|v| 2.0 * v).collect()).collect();
        let est = Estimator::new(EstimateOptions::haar_daniell(2), 32).unwrap();
        let (a, _) = est.unregularized(&series(chans)).unwrap();
        let (b, _) = est.unregularized(&series(doubled)).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(4.0 * x, *y);
        }
    }

    #[test]
    fn channel_permutation_equivariance() {
        let mut rng = lcg(8);
        let chans: Vec<Vec<f64>> = (0..3).map(|_| (0..32).map(|_| rng()).collect()).collect();
        let perm = [2, 0, 1];
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| chans[i].clone()).collect();
        let opts = EstimateOptions::haar_daniell(2);
        let a = mv_ews(&series(chans), &opts).unwrap().permute_channels(&perm);
        let b = mv_ews(&series(permuted), &opts).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn rejects_wide_kernel_and_wrong_length() {
        assert!(matches!(
            Estimator::new(EstimateOptions::haar_daniell(8), 16),
            Err(Error::KernelTooWide { .. })
        ));
        assert!(matches!(
            Estimator::new(EstimateOptions::haar_daniell(1), 24),
            Err(Error::NonDyadicLength(24))
        ));
        let est = Estimator::new(EstimateOptions::haar_daniell(1), 16).unwrap();
        assert!(est.estimate(&series(vec![vec![0.0; 32]])).is_err());
    }
}
