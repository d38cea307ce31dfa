//! Batch solvers and verification metrics that certify the online learners
//! independently of their update rules.

mod dual_solve;
mod eig;
mod metrics;
mod ridge;

pub use dual_solve::{batch_dual_solve, DualSolveOptions, DualSolveResult};
pub use eig::{pca_subspace, symmetric_eig, EigResult, PcaSubspace};
pub use metrics::{
    column_space, duality_gap, finite_diff_check, orthonormality_defect, span_residual,
    subspace_error, RANK_TOL,
};
pub use ridge::ridge_closed_form;
