//! L2 boosting of Nadaraya–Watson kernel regression.
//!
//! The crate is organised around the linear-smoother view of boosting. The
//! Nadaraya–Watson learner is a row-stochastic smoother matrix `S`; boosting it
//! `r` times refits residuals and yields the hat matrix `I - (I - S)^(r+1)`.
//! Because every iterate is linear in the responses, the conditional bias and
//! variance given the design are computed exactly from the weight profile
//! rather than estimated.
//!
//! * [`kernels`]: base kernels, closed-form Gaussian-mixture convolution and the
//!   twicing recursion `K(r) = 2K(r-1) - K(r-1) * K(r-1)` for higher-order kernels.
//! * [`smoother`]: the weak learner, the boosting iteration, weight propagation
//!   and the higher-order-kernel comparator estimator.
//! * [`diagnostics`]: exact conditional bias/variance, trapezoid integration and
//!   log-log rate fits.
//! * [`selection`]: test-bed choice of bandwidth and stopping iteration, plus a
//!   leave-one-out score.
//! * [`simulation`]: seeded Monte Carlo study of ISB/IV/MISE curves and the
//!   minimal-MISE table.
//! * [`cli`]: the `l2boost` command line front end.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod format;
pub mod kernels;
pub mod plot;
pub mod selection;
pub mod simulation;
pub mod smoother;

pub use error::{Error, Result};
pub use kernels::{
    convolve, higher_order_kernel, kernel_moment, BaseKernel, KernelSpec, MixtureTerm,
    ScaledKernel, TabulatedKernel,
};
pub use smoother::{
    boosted_weights, fit_boosted, higher_order_fit, nw_weights, predict, smoother_matrix,
    BoostFit, FitConfig, Sample, SmootherMatrix, WeightProfile,
};
