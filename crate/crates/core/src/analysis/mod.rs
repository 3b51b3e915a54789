//! Strong-error estimation on nested grids, rate fitting and the power
//! transform consistency check.

mod ckls;
mod errors;
mod study;

pub use ckls::verify_ckls;
pub use errors::{inverse_distance_error, sup_error};
pub use study::{
    collect_samples, fitted_slope, ols_slope, rate_summary, run_convergence_study,
    ConvergenceReport, ConvergenceStudySpec, MeshStat, PathSample, RateSummary, StudySamples,
};
