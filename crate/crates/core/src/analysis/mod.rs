//! Analytics over an [`SvTable`](crate::SvTable): the cluster-size law, the
//! weight-comparison functions, the subcritical maximizers `t_n`, and window
//! decompositions of the cluster-size sum.
//!
//! Everything is a pure function of immutable inputs.

mod cluster;
mod curve;
mod reference;
mod tn;
mod weights;
mod windows;

pub use cluster::{
    cluster_size_pmf, cluster_size_pmf_exact, f_n, g_n, log_cluster_size_pmf, sigma_partial,
    ExactProbability,
};
pub use curve::{GCurve, GSample};
pub use reference::{a_n_ratio, window_inequalities, window_sums, FRef, FRefMode, WindowInequalities};
pub use tn::{compute_tn, compute_tn_relaxed, TnRecord, TN_GRID_POINTS, TN_TOLERANCE};
pub use weights::{
    big_phi, log_delyon_growth, phi, phi_taylor_check, sup_weight, TaylorCheck, TaylorPoint,
};
pub(crate) use weights::phi_with_gap;
pub use windows::{
    decompose_c123, lemma33_probe, sup_weight_sums, window_dn, Decomposition, Interval,
    Lemma33Report,
};
