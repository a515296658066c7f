//! Semiparametric correlation estimation for mixed continuous/discrete data.
//!
//! The underlying model couples arbitrary margins through a Gaussian copula
//! with correlation matrix `Sigma`. Each off-diagonal entry is estimated by
//! maximizing a bivariate pseudo-likelihood built from empirical margins, so
//! continuous, discrete, and mixed pairs are all handled by one estimator.
//!
//! The crate is organized around that pipeline:
//!
//! * [`gauss`] - Gaussian CDF/quantile kernels, the bivariate normal CDF, and
//!   the bivariate Gaussian copula functions.
//! * [`marginals`] - empirical marginal CDFs and pseudo-observations.
//! * [`estimator`] - per-pair likelihoods, the 1-D optimizer, and full-matrix
//!   estimation with diagnostics.
//! * [`sim`] - correlation-matrix recipes, dataset sampling, and reference
//!   fixtures for boundary cases.
//! * [`oracle`] - a slow, direct evaluator of the mixed joint density for
//!   models with at most three variables, used to validate the estimator.
//! * [`coeffs`] - classical correlation coefficients and closed forms for the
//!   thresholded-Gaussian pair.
//! * [`metrics`] - estimation-error metrics, ROC/AUC, and the simulation
//!   benchmark driver.
//! * [`network`] - thresholded correlation networks and graph exports.

pub mod coeffs;
pub mod data;
pub mod error;
pub mod estimator;
pub mod gauss;
pub mod marginals;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod quad;
pub mod sim;

pub use data::{ColumnSchema, Dataset};
pub use error::{Error, Result};
pub use gauss::Rho;
pub use marginals::MarginalKind;
