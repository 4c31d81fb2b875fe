//! Non-Bayesian reference estimators: OMP, LASSO and the robust Wiener filter.

mod lasso;
mod omp;
mod rwf;

pub use lasso::{lasso_objective, lasso_solve, rho_from_precision, soft_threshold, LassoConfig, LassoResult};
pub use omp::{omp, OmpResult};
pub use rwf::{rwf_correlation, rwf_estimate, RwfConfig, RwfFilter};
