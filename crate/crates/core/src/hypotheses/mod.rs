//! Structural hypotheses on a triple datum: nondegeneracy, web curvature,
//! the main hypothesis through finite-order jets, the auxiliary hypotheses
//! and the `det B` criterion. Verdicts are decided at grid resolution.

mod aux;
mod detb;
mod elimination;
mod kernel;
mod report;
mod structure;

pub use aux::{aux_tau_family_check, aux_weak_check, pair_for, separability_defect, CROSS_CHECK_RTOL};
pub use detb::{det_b, det_b_max, det_b_max_with, det_b_rows, DetBPair, DetBReport, DETB_MAX_TRIES};
pub use elimination::{elimination_second_order, EliminationRelation};
pub use kernel::{
    degeneracy_at, jet_kernel_dim, main_hypothesis_scan, write_kernel_csv, JetKernelResult, KernelMode,
    MainHypothesisScan, PointScan, RANK_GAP_FACTOR, RANK_RTOL,
};
pub use report::{HypothesisReport, Verdict, Witness};
pub use structure::{check_nondegeneracy, curvature_identically_zero, web_curvature_theta, CurvatureVerdict};
