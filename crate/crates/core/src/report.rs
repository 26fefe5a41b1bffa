//! Iteration histories and diagnostics emitted by the solvers.

use serde::Serialize;

use crate::grid::MeshSummary;
use crate::nfunc::NFunctionInfo;

/// The three integrals bounded a priori along the regularization path:
/// `int Phi(|grad u|)`, `int phi(|grad u|) |grad u|^2` and `int |grad u|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BoundMonitor {
    pub phi_integral: f64,
    pub flux_integral: f64,
    pub w11: f64,
}

impl BoundMonitor {
    pub fn max(&self) -> f64 {
        self.phi_integral.max(self.flux_integral).max(self.w11)
    }
}

/// One rung of the regularization ladder.
#[derive(Clone, Debug, Serialize)]
pub struct EpsRecord {
    pub eps: f64,
    pub ell_eps: f64,
    pub iterations: usize,
    /// Minimal regularized energy `I_eps(u_eps)`.
    pub energy: f64,
    /// `int Phi_eps(|grad u_eps|)`
    pub dirichlet_eps: f64,
    pub residual: f64,
    pub bound_monitor: BoundMonitor,
    /// `<-Delta_Phi u_eps, u_eps - u_final>` with the unregularized operator.
    pub pairing: f64,
    /// Discrete `W^{1,1}` distance to the previous rung.
    pub increment_w11: Option<f64>,
    /// Discrete `W^{1,Phi}` distance to the previous rung.
    pub increment_w1phi: Option<f64>,
}

/// One sweep of the path-deformation solver.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub level: f64,
    pub residual: f64,
    pub cerami: f64,
    pub gbar_integral: f64,
    pub step: f64,
}

/// A-priori bound `R` on the monitored integrals and the constants it was built from.
#[derive(Clone, Debug, Serialize)]
pub struct APrioriBound {
    pub r: f64,
    /// Minimizing truncation level `K`.
    pub k: f64,
    /// Embedding constant `S` of `W^{1,1}_0` into `L^{1*}`.
    pub s_const: f64,
    /// Quadrature `L^N` norm of `f`.
    pub f_norm: f64,
    /// 1D runs use `N = 1`, outside the standing assumption `N >= 2`.
    pub oracle_mode: bool,
}

/// Sampled mountain-pass geometry: `J >= r0` on the sphere of radius `rho_star` and
/// `J(e) < 0` at the endpoint `e = s * bump` beyond it.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryCertificate {
    pub lambda1: f64,
    /// Largest sampled `g(t) / (t phi_eps(t))` near zero.
    pub lambda_small: f64,
    pub eta: f64,
    /// Constant in `G <= (lambda1 - eta) Phi_eps + C Psi`.
    pub c_psi: f64,
    pub psi: String,
    pub rho_star: f64,
    pub r0: f64,
    pub endpoint_scale: f64,
    pub endpoint_energy: f64,
    /// Smallest sampled `g(t) / t^{m-1}` beyond `t_big` (both signs).
    pub g3_ratio: f64,
}

/// Iteration history of a solve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveReport {
    pub solver: String,
    pub converged: bool,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    /// Newton steps replaced by the preconditioned gradient.
    pub gradient_fallbacks: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eps_records: Vec<EpsRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_priori: Option<APrioriBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_residual_unregularized: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_increments_decreasing: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<NFunctionInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn new(solver: impl Into<String>) -> Self {
        SolveReport {
            solver: solver.into(),
            ..Default::default()
        }
    }

    pub fn bound_monitor(&self) -> Vec<BoundMonitor> {
        self.eps_records.iter().map(|r| r.bound_monitor).collect()
    }

    pub fn pairing_history(&self) -> Vec<f64> {
        self.eps_records.iter().map(|r| r.pairing).collect()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }
}
