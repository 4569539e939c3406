//! Path-level Monte Carlo for the Lamperti correspondence.
//!
//! Every path is a pure function of `(seed, path_id)`; estimators collect
//! per-path values in path order and reduce them by pairwise summation, so
//! results do not depend on thread scheduling.

mod cauchy;
mod estimators;
mod path;
mod rng;

pub use cauchy::{simulate_cauchy_modulus, simulate_cauchy_to, CauchyPath};
pub use estimators::{
    clock_samples, estimate_clt, estimate_ldp_slope, estimate_lln, estimate_logA_rate,
    exact_clock_mean, first_passage_check, scaling_check, tilted_identity_check, CltReport,
    EstimatorRecord, EstimatorRow, FirstPassageReport, IdentityReport, LdpRow, LdpSlopeReport,
    ScalingReport,
};
pub use path::{
    clock_tau, exp_functional, lamperti_pssmp, sample_levy_path, ClockSample, ExpFunctional,
    LampertiPath, PathGrid, PathSampler, SegmentKind,
};
pub use rng::{path_rng, Lane};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::LevyModel;

/// Deterministic simulation plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_paths: usize,
    /// Grid step of the Brownian family; relative step of the Cauchy modulus.
    pub step: f64,
    /// Minimum Lévy-time horizon (clock estimators enlarge it as needed).
    pub horizon: f64,
    /// Self-similarity index.
    pub alpha: f64,
    /// Starting point X₀ = a of the pssMp.
    pub start: f64,
    /// Number of per-path horizon doublings before giving up.
    pub max_doublings: u32,
    pub exec: Exec,
}

impl SimConfig {
    pub fn new(seed: u64, n_paths: usize) -> Self {
        Self {
            seed,
            n_paths,
            step: 0.01,
            horizon: 4.0,
            alpha: 1.0,
            start: 1.0,
            max_doublings: 8,
            exec: Exec::default(),
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_start(mut self, start: f64) -> Self {
        self.start = start;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Domain(format!("invalid simulation config: {what}")));
        if self.n_paths < 1 {
            return bad("n_paths must be >= 1");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be > 0");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be > 0");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be > 0");
        }
        if !(self.start > 0.0 && self.start.is_finite()) {
            return bad("start must be > 0");
        }
        Ok(())
    }

    /// Initial Lévy horizon for clocks up to `t_max`: max(horizon, 4, 2 log t_max / ψ'(0)).
    pub fn clock_horizon(&self, model: &LevyModel, t_max: f64) -> f64 {
        let need = 2.0 * t_max.max(1.0).ln() / model.mean();
        self.horizon.max(4.0).max(need)
    }
}

/// What an estimator simulates: a grid family or the Cauchy modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimTarget {
    Levy(LevyModel),
    /// Modulus of the Cauchy process in ℝ^d.
    CauchyModulus {
        dim: usize,
    },
}

impl SimTarget {
    /// The Laplace-exponent model describing the target.
    pub fn model(&self) -> Result<LevyModel> {
        match *self {
            SimTarget::Levy(m) => Ok(m),
            SimTarget::CauchyModulus { dim } => LevyModel::hypergeometric(1.0, dim as f64),
        }
    }
}
