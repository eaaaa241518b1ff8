//! Multivariate locally stationary wavelet (LSW) time-series analysis.
//!
//! The crate covers the full workflow for `P`-channel series of dyadic
//! length `T = 2^J`:
//!
//! * [`simulate`]: realizations with a prescribed evolutionary wavelet
//!   spectrum (EWS), including the trivariate test fixture;
//! * [`spectrum`]: EWS estimation from data (non-decimated transform, wavelet
//!   periodogram, kernel smoothing, bias correction, regularization);
//! * [`coherence`]: local coherence and local partial coherence;
//! * [`inference`]: asymptotic variance, approximate point-wise confidence
//!   intervals and bootstrap intervals;
//! * [`io`] and [`plot`]: CSV input, spectrum bundles and SVG/CSV plots.
//!
//! Arrays are indexed `[p][q][j][k]` with zero-based levels, level index 0
//! being the finest scale.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod coherence;
pub mod error;
pub mod inference;
pub mod io;
pub mod matops;
pub mod plot;
pub mod simulate;
pub mod spectrum;
mod util;
pub mod wavelet;

pub use array::{ArrayKind, KernelName, KernelSpec, Meta, MvLswArray, TimeSeriesMatrix};
pub use coherence::{coherence, partial_coherence};
pub use error::{Error, Result};
pub use inference::{
    apx_ci, bootstrap_interval, gauss_quantile, periodogram_covariance, var_ews, var_ews_element,
    BootstrapResult, IntervalMethod, IntervalPair,
};
pub use matops::{DenseMatrix, SymMatrix};
pub use simulate::{build_eq3_fixture, rmvlsw, spectrum_to_transfer, Innovation, InnovationGenerator, TransferField};
pub use spectrum::{mv_ews, EstimateOptions, Estimator, SmoothingKernel};
pub use util::quantile_sorted;
pub use wavelet::{
    autocorr_inner_products, autocorr_wavelet, build_wavelet_system, make_filter, AutoCorrProducts,
    DiscreteWaveletSystem, Family, WaveletFilter,
};
