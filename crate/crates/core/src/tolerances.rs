use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every engine.
///
/// All are absolute. Matrix residuals are Frobenius norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Single-matrix identities: isometry, projector, commutator, pull-back.
    pub tol_op: f64,
    /// Eigenvalues closer than this are merged into one spectral cluster.
    pub cluster_tol: f64,
    /// Least-squares residual above which a linear system counts as infeasible.
    pub feasibility_tol: f64,
    /// Idempotency penalty threshold for the projector search.
    pub tol_idem: f64,
    /// Probability comparisons and normalization.
    pub tol_prob: f64,
    /// Random restarts of the projector search.
    pub n_restarts: usize,
    /// Random entangled states used to cross-check the pull-back identity.
    pub n_random_states: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_op: 1e-9,
            cluster_tol: 1e-7,
            feasibility_tol: 1e-7,
            tol_idem: 1e-8,
            tol_prob: 1e-9,
            n_restarts: 32,
            n_random_states: 8,
        }
    }
}

impl Tolerances {
    pub fn with_tol_op(mut self, tol_op: f64) -> Self {
        self.tol_op = tol_op;
        self
    }
}
