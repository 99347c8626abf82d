//! Conformal maximization of lambda1-bar, eigenmaps into spheres, balancing, and the
//! experiment drivers built on them.

pub mod ascent;
pub mod balance;
pub mod eigenmap;
pub mod experiment;
pub mod fit;

pub use ascent::{maximize_conformal, AscentMethod, AscentStep, AscentTrace, MaximizeOptions};
pub use balance::{dilate, mobius_balance, BalanceResult};
pub use eigenmap::{energy_density, extract_eigenmap, extremal_residual, gradient_at_point, EigenMap};
pub use experiment::{gap_experiment, scaling_study, spec_grid, GapReport, GapRow, ScalingReport, ScalingRow};
pub use fit::{fit_loglog, fit_loglog_log_corrected, geomspace, SlopeFit};
