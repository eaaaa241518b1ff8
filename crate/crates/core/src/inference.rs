//! Uncertainty for spectrum estimates: plug-in asymptotic variance,
//! approximate Gaussian point-wise intervals and bootstrap intervals.
//!
//! Window sums near the ends of the series wrap circularly, matching the
//! estimator. The rescaled midpoint `(k + m) / 2T` is evaluated at location
//! `floor((k + m) / 2)` (rounding down for odd sums), and the `O(1/T)`
//! remainder of the covariance expansion is dropped. Interval calibration is
//! therefore weakest within `M` locations of either end.

use rayon::prelude::*;

use crate::array::{ArrayKind, KernelSpec, MvLswArray};
use crate::error::{Error, Result};
use crate::simulate::{rmvlsw, InnovationGenerator};
use crate::spectrum::{kernels_for, EstimateOptions, Estimator, SmoothingKernel};
use crate::util::quantile_sorted;
use crate::wavelet::AutoCorrProducts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    Analytic,
    Bootstrap,
}

/// Point-wise lower and upper bounds.
#[derive(Debug, Clone)]
pub struct IntervalPair {
    pub lower: MvLswArray,
    pub upper: MvLswArray,
    pub alpha: f64,
    pub method: IntervalMethod,
}

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub median: MvLswArray,
    pub interval: IntervalPair,
}

/// Inverse standard normal CDF: rational approximation refined by one
/// Halley step on the CDF.
pub fn gauss_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::DomainError(format!("quantile level {u} not in (0, 1)")));
    }
    if u > 0.5 {
        return Ok(-lower_quantile(1.0 - u));
    }
    Ok(lower_quantile(u))
}

// u in (0, 0.5]
fn lower_quantile(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let x = if u < 0.02425 {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2) - u;
    let g = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - g / (1.0 + x * g / 2.0)
}

fn check_channel(s: &MvLswArray, p: usize) -> Result<()> {
    if p >= s.channels() {
        return Err(Error::IndexOutOfRange(format!("channel {p} of {}", s.channels())));
    }
    Ok(())
}

/// Plug-in `Cov[I^{(p,q)}_{j,k}, I^{(p,q)}_{l,m}]` at locations `k, m` in
/// `[0, T)` (zero-based levels).
#[allow(clippy::too_many_arguments)]
pub fn periodogram_covariance(
    s: &MvLswArray,
    acp: &AutoCorrProducts,
    p: usize,
    q: usize,
    j: usize,
    l: usize,
    k: usize,
    m: usize,
) -> Result<f64> {
    check_channel(s, p)?;
    check_channel(s, q)?;
    let (_, levels, t) = s.dims();
    if j >= levels || l >= levels {
        return Err(Error::IndexOutOfRange(format!("levels ({j}, {l}) of {levels}")));
    }
    if k >= t || m >= t {
        return Err(Error::IndexOutOfRange(format!("locations ({k}, {m}) of {t}")));
    }
    if acp.levels() != levels {
        return Err(Error::DimensionMismatch("inner products and spectrum levels differ".into()));
    }
    Ok(covariance_unwrapped(s, acp, p, q, j, l, k as isize, m as isize))
}

// Locations may lie outside [0, T); lag and midpoint are taken on the
// unwrapped integers and only the midpoint is wrapped.
#[allow(clippy::too_many_arguments)]
fn covariance_unwrapped(
    s: &MvLswArray,
    acp: &AutoCorrProducts,
    p: usize,
    q: usize,
    j: usize,
    l: usize,
    k: isize,
    m: isize,
) -> f64 {
    let t = s.len() as isize;
    let lag = m - k;
    if lag.unsigned_abs() > acp.max_lag() {
        return 0.0;
    }
    let mid = (k + m).div_euclid(2).rem_euclid(t) as usize;
    let b = acp.b_levels(lag, j, l);
    let sum = |x: usize, y: usize| -> f64 { b.iter().enumerate().map(|(h, &bh)| bh * s.get(x, y, h, mid)).sum() };
    let cross = sum(p, q);
    cross * cross + sum(p, p) * sum(q, q)
}

fn resolve_kernels(s: &MvLswArray, kernel: Option<&KernelSpec>) -> Result<Vec<SmoothingKernel>> {
    let spec = match (kernel, &s.meta.kernel) {
        (Some(given), Some(recorded)) if given != recorded => {
            return Err(Error::KernelMismatch {
                given: given.to_string(),
                expected: recorded.to_string(),
            })
        }
        (Some(given), _) => given.clone(),
        (None, Some(recorded)) => recorded.clone(),
        (None, None) => {
            return Err(Error::DomainError(
                "no kernel given and none recorded with the spectrum".into(),
            ))
        }
    };
    kernels_for(&spec, s.levels())
}

fn check_products(s: &MvLswArray, acp: &AutoCorrProducts, kernels: &[SmoothingKernel]) -> Result<()> {
    if acp.levels() != s.levels() {
        return Err(Error::DimensionMismatch(format!(
            "inner products for {} levels, spectrum has {}",
            acp.levels(),
            s.levels()
        )));
    }
    let widest = kernels.iter().map(|k| k.half_width()).max().unwrap_or(0);
    if acp.max_lag() < 2 * widest {
        return Err(Error::DimensionMismatch(format!(
            "inner products tabulated to lag {}, kernel needs {}",
            acp.max_lag(),
            2 * widest
        )));
    }
    for k in kernels {
        if 2 * k.half_width() >= s.len() {
            return Err(Error::KernelTooWide {
                m: k.half_width(),
                t: s.len(),
            });
        }
    }
    Ok(())
}

/// Asymptotic variance of a single estimate element `(p, q, j, k)`.
#[allow(clippy::too_many_arguments)]
pub fn var_ews_element(
    s: &MvLswArray,
    acp: &AutoCorrProducts,
    kernel: Option<&KernelSpec>,
    p: usize,
    q: usize,
    j: usize,
    k: usize,
) -> Result<f64> {
    check_channel(s, p)?;
    check_channel(s, q)?;
    let (_, levels, t) = s.dims();
    if j >= levels || k >= t {
        return Err(Error::IndexOutOfRange(format!("element level {j}, location {k}")));
    }
    let kernels = resolve_kernels(s, kernel)?;
    check_products(s, acp, &kernels)?;
    let k = k as isize;
    let mut total = 0.0;
    for l1 in 0..levels {
        let a1 = acp.a_inv(j, l1);
        let m1w = kernels[l1].half_width() as isize;
        for l2 in 0..levels {
            let a2 = acp.a_inv(j, l2);
            let m2w = kernels[l2].half_width() as isize;
            for o1 in -m1w..=m1w {
                let w1 = kernels[l1].weight(o1);
                for o2 in -m2w..=m2w {
                    let w2 = kernels[l2].weight(o2);
                    total += a1 * a2 * w1 * w2 * covariance_unwrapped(s, acp, p, q, l1, l2, k + o1, k + o2);
                }
            }
        }
    }
    Ok(total.max(0.0))
}

/// Plug-in asymptotic variance of every element of the estimate `s`.
///
/// `kernel` defaults to the one recorded in `s.meta`; a different explicit
/// kernel is rejected. `acp` must cover lags up to twice the widest kernel
/// half-width.
pub fn var_ews(s: &MvLswArray, acp: &AutoCorrProducts, kernel: Option<&KernelSpec>) -> Result<MvLswArray> {
    let kernels = resolve_kernels(s, kernel)?;
    check_products(s, acp, &kernels)?;
    let (p, levels, t) = s.dims();
    let uniform = kernels.windows(2).all(|w| w[0] == w[1]);

    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| (a..p).map(move |b| (a, b))).collect();
    let fields: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            if uniform {
                pair_variance_uniform(s, acp, &kernels[0], a, b)
            } else {
                pair_variance_by_level(s, acp, &kernels, a, b)
            }
        })
        .collect();

    let mut out = MvLswArray::zeros(p, levels, t, ArrayKind::Variance, s.meta.clone());
    for (&(a, b), field) in pairs.iter().zip(&fields) {
        for j in 0..levels {
            out.set_pair_series(a, b, j, &field[j * t..(j + 1) * t]);
        }
    }
    Ok(out)
}

/// `C(l1, l2)` for a lag and (wrapped) midpoint, row-major `J x J`.
fn covariance_block(s: &MvLswArray, acp: &AutoCorrProducts, a: usize, b: usize, lag: isize, mid: usize, out: &mut [f64]) {
    let levels = s.levels();
    let spec = |x: usize, y: usize| -> Vec<f64> { (0..levels).map(|h| s.get(x, y, h, mid)).collect() };
    let sab = spec(a, b);
    let saa = spec(a, a);
    let sbb = spec(b, b);
    for l1 in 0..levels {
        for l2 in 0..levels {
            let bl = acp.b_levels(lag, l1, l2);
            let (mut fab, mut faa, mut fbb) = (0.0, 0.0, 0.0);
            for h in 0..levels {
                fab += bl[h] * sab[h];
                faa += bl[h] * saa[h];
                fbb += bl[h] * sbb[h];
            }
            out[l1 * levels + l2] = fab * fab + faa * fbb;
        }
    }
}

// Same kernel at every level: the weight factors out of the level sums, so
// Q_j(lag, mid) = a_j^T C(lag, mid) a_j is tabulated once per (lag, mid).
fn pair_variance_uniform(s: &MvLswArray, acp: &AutoCorrProducts, kernel: &SmoothingKernel, a: usize, b: usize) -> Vec<f64> {
    let (_, levels, t) = s.dims();
    let m = kernel.half_width() as isize;
    let lags = (4 * m + 1) as usize;
    // q[(lag + 2M) * T + mid][j]
    let mut q = vec![0.0; lags * t * levels];
    let mut block = vec![0.0; levels * levels];
    let mut tmp = vec![0.0; levels];
    for li in 0..lags {
        let lag = li as isize - 2 * m;
        for mid in 0..t {
            covariance_block(s, acp, a, b, lag, mid, &mut block);
            let dst = &mut q[(li * t + mid) * levels..(li * t + mid + 1) * levels];
            for (j, d) in dst.iter_mut().enumerate() {
                for (l1, v) in tmp.iter_mut().enumerate() {
                    *v = (0..levels).map(|l2| block[l1 * levels + l2] * acp.a_inv(j, l2)).sum();
                }
                *d = (0..levels).map(|l1| acp.a_inv(j, l1) * tmp[l1]).sum();
            }
        }
    }
    let mut out = vec![0.0; levels * t];
    for k in 0..t as isize {
        for o1 in -m..=m {
            let w1 = kernel.weight(o1);
            for o2 in -m..=m {
                let w = w1 * kernel.weight(o2);
                let li = (o2 - o1 + 2 * m) as usize;
                let mid = (2 * k + o1 + o2).div_euclid(2).rem_euclid(t as isize) as usize;
                let src = &q[(li * t + mid) * levels..(li * t + mid + 1) * levels];
                for j in 0..levels {
                    out[j * t + k as usize] += w * src[j];
                }
            }
        }
    }
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

// Level-dependent kernels: every (lag, mid) block is scattered to the
// locations whose window uses it.
fn pair_variance_by_level(
    s: &MvLswArray,
    acp: &AutoCorrProducts,
    kernels: &[SmoothingKernel],
    a: usize,
    b: usize,
) -> Vec<f64> {
    let (_, levels, t) = s.dims();
    let widest = kernels.iter().map(|k| k.half_width()).max().unwrap_or(0) as isize;
    let mut out = vec![0.0; levels * t];
    let mut block = vec![0.0; levels * levels];
    let mut u1 = vec![0.0; levels];
    let mut u2 = vec![0.0; levels];
    for lag in -2 * widest..=2 * widest {
        for mid in 0..t {
            covariance_block(s, acp, a, b, lag, mid, &mut block);
            // Offsets o1, o2 = o1 + lag with floor((2k + o1 + o2) / 2) = mid.
            for o1 in -widest..=widest {
                let o2 = o1 + lag;
                if o2.abs() > widest {
                    continue;
                }
                let k = (mid as isize - o1 - lag.div_euclid(2)).rem_euclid(t as isize) as usize;
                for j in 0..levels {
                    for l in 0..levels {
                        u1[l] = acp.a_inv(j, l) * kernels[l].weight(o1);
                        u2[l] = acp.a_inv(j, l) * kernels[l].weight(o2);
                    }
                    let mut v = 0.0;
                    for l1 in 0..levels {
                        if u1[l1] == 0.0 {
                            continue;
                        }
                        let row: f64 = (0..levels).map(|l2| block[l1 * levels + l2] * u2[l2]).sum();
                        v += u1[l1] * row;
                    }
                    out[j * t + k] += v;
                }
            }
        }
    }
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

/// Approximate `100(1 - alpha)%` point-wise intervals `S -/+ z sqrt(Var)`.
pub fn apx_ci(s: &MvLswArray, var: &MvLswArray, alpha: f64) -> Result<IntervalPair> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!("alpha {alpha} not in (0, 1)")));
    }
    if !s.same_shape(var) {
        return Err(Error::DimensionMismatch(format!(
            "spectrum {:?} vs variance {:?}",
            s.dims(),
            var.dims()
        )));
    }
    let z = gauss_quantile(1.0 - alpha / 2.0)?;
    let mut lower = s.clone();
    let mut upper = s.clone();
    for ((lo, hi), v) in lower.data_mut().iter_mut().zip(upper.data_mut().iter_mut()).zip(var.data()) {
        let half = z * v.max(0.0).sqrt();
        *lo -= half;
        *hi += half;
    }
    Ok(IntervalPair {
        lower,
        upper,
        alpha,
        method: IntervalMethod::Analytic,
    })
}

/// Simulates `reps` series from `s`, re-estimates each with the settings in
/// `s.meta`, and returns element-wise `alpha/2`, median and `1 - alpha/2`
/// empirical quantiles. Replicate `r` uses `gen.for_replicate(r)`.
pub fn bootstrap_interval(s: &MvLswArray, reps: usize, alpha: f64, gen: &InnovationGenerator) -> Result<BootstrapResult> {
    if reps < 2 {
        return Err(Error::DomainError(format!("need at least 2 replicates, got {reps}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!("alpha {alpha} not in (0, 1)")));
    }
    let options = EstimateOptions::from_meta(&s.meta)?;
    let estimator = Estimator::new(options, s.len())?;
    let samples: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = rmvlsw(s, &gen.for_replicate(r as u64)).map_err(|e| Error::ReplicateFailed(r, e.to_string()))?;
            let est = estimator
                .estimate(&x)
                .map_err(|e| Error::ReplicateFailed(r, e.to_string()))?;
            Ok(est.data().to_vec())
        })
        .collect::<Result<_>>()?;

    let mut lower = s.clone();
    let mut median = s.clone();
    let mut upper = s.clone();
    let mut column = vec![0.0; reps];
    for i in 0..s.data().len() {
        for (c, sample) in column.iter_mut().zip(&samples) {
            *c = sample[i];
        }
        column.sort_by(f64::total_cmp);
        lower.data_mut()[i] = quantile_sorted(&column, alpha / 2.0);
        median.data_mut()[i] = quantile_sorted(&column, 0.5);
        upper.data_mut()[i] = quantile_sorted(&column, 1.0 - alpha / 2.0);
    }
    Ok(BootstrapResult {
        median,
        interval: IntervalPair {
            lower,
            upper,
            alpha,
            method: IntervalMethod::Bootstrap,
        },
    })
}
