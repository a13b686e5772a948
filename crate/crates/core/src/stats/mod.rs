//! Statistical kernels: the two-sample Kolmogorov-Smirnov test, Kendall
//! rank correlation, Nelder-Mead simplex search, special functions, and the
//! truncated distribution families with sampling and likelihood fitting.

mod dist;
mod kendall;
mod ks;
mod linreg;
mod nelder_mead;
mod special;

pub use dist::{
    fit_best_distribution, fit_distribution, DistributionSpec, Family, FitResult,
};
pub use kendall::kendall_tau;
pub use ks::{ks_two_sample, KsResult};
pub use linreg::linear_regression;
pub use nelder_mead::nelder_mead;
pub use special::{beta_inc, erf, erfinv, gauss_legendre, integrate_unit, ln_beta, ln_gamma};
