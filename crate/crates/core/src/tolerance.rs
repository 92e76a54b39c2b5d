use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the library.
///
/// Values are relative unless stated otherwise; each consumer documents the
/// scale it multiplies them by.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Jacobi stops once every off-diagonal entry is below this times `‖M‖_max`.
    pub jacobi_offdiag: f64,
    pub jacobi_max_sweeps: usize,
    /// Singular values below `rank_tol · σ_max` count as zero.
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub range_tol: f64,
    /// Cone generators must satisfy `|det(b, c)| > indep_tol · ‖b‖ · ‖c‖`.
    pub indep_tol: f64,
    /// Slack on cone coordinates when testing membership.
    pub cone_tol: f64,
    /// Relative residual for "this point lies on the conic".
    pub on_tol: f64,
    /// A root at `t ≤ root_tol` counts as lying on a closed backward ray.
    pub root_tol: f64,
    /// Band around zero for the `|α β; α' β'|` determinant of a line image.
    pub det_tol: f64,
    pub cert_tol: f64,
    /// Factor by which the cone tolerance is widened before a witness run
    /// gives up on the sign contract of the two-sided case.
    pub breakdown_widen: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            jacobi_offdiag: 1e-12,
            jacobi_max_sweeps: 100,
            rank_tol: 1e-10,
            psd_tol: 1e-9,
            range_tol: 1e-8,
            indep_tol: 1e-10,
            cone_tol: 1e-9,
            on_tol: 1e-7,
            root_tol: 1e-9,
            det_tol: 1e-9,
            cert_tol: 1e-6,
            breakdown_widen: 100.0,
        }
    }
}

/// Budget and margins for the S-lemma decision procedure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub lambda_max: f64,
    /// A dual value `≥ -slack` is accepted as nonnegative.
    pub slack: f64,
    /// A counterexample must satisfy `f(x) < -strict_margin`.
    pub strict_margin: f64,
    /// A counterexample must satisfy `g(x) ≤ feas_tol`.
    pub feas_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub golden_iters: usize,
    pub descent_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            lambda_max: 1e6,
            slack: 1e-7,
            strict_margin: 1e-10,
            feas_tol: 1e-9,
            restarts: 64,
            seed: 0x5eed,
            golden_iters: 200,
            descent_iters: 200,
        }
    }
}
