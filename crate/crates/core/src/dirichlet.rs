//! Solvers for `-Delta_Phi u = f`, `u = 0` on the boundary.
//!
//! Reflexive operators (`l > 1`) are handled by Armijo-damped Newton on the convex energy.
//! For `l = 1` the operator is approached through `Phi_eps = Phi + (eps/m) t^m` along a
//! decreasing ladder of `eps`, warm-starting each rung from the previous solution.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy::{energy_linear, hessian_assemble, lq_norm, operator_pairing, residual_linear, Source};
use crate::error::{Error, Result};
use crate::grid::{integrate, Field, Mesh};
use crate::linalg::dot;
use crate::nfunc::{log_grid, NFunction, OrliczFunction, RegularizedNFunction};
use crate::report::{APrioriBound, BoundMonitor, EpsRecord, SolveReport};

/// Newton solver settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Target for the residual dual norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease parameter.
    pub armijo: f64,
    /// Smallest step length tried before giving up on a direction.
    pub min_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_iters: 200,
            armijo: 1e-4,
            min_step: 1e-14,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.armijo > 0.0 && self.armijo < 0.5) || !(self.min_step > 0.0) {
            return Err(Error::Parameter(
                "solver tolerances must be positive and armijo in (0, 1/2)".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Minimizes `I(u) = int Phi(|grad u|) - int f u` from `u = 0`.
pub fn solve_reflexive<F: OrliczFunction + ?Sized>(
    mesh: &Arc<Mesh>,
    f: &F,
    source: &Source,
    cfg: &SolverConfig,
) -> Result<(Field, SolveReport)> {
    solve_reflexive_from(mesh, f, source, cfg, None)
}

/// [`solve_reflexive`] from a given initial field (boundary values are ignored).
pub fn solve_reflexive_from<F: OrliczFunction + ?Sized>(
    mesh: &Arc<Mesh>,
    f: &F,
    source: &Source,
    cfg: &SolverConfig,
    init: Option<&Field>,
) -> Result<(Field, SolveReport)> {
    cfg.validate()?;
    if !(f.lower_index() > 1.0) {
        return Err(Error::hypothesis(
            "(phi3)'",
            0.0,
            format!(
                "lower index l = {} <= 1: the energy space is not reflexive; regularize or use continuation",
                f.lower_index()
            ),
        ));
    }
    let fq = source.sample(mesh)?;
    let mut u = match init {
        Some(u0) => {
            u0.check_same_mesh(&Field::zeros(mesh))?;
            Field::from_free(mesh, &u0.free_values())
        }
        None => Field::zeros(mesh),
    };
    let mut report = SolveReport::new("damped-newton");
    let mut energy = energy_linear(&u, f, &fq).total;
    let mut best = (f64::INFINITY, u.clone());
    let mut grad_step = 1.0f64;

    for it in 0..=cfg.max_iters {
        let r = residual_linear(&u, f, &fq);
        let res = mesh.dual_norm(&r);
        report.energy_history.push(energy);
        report.residual_history.push(res);
        if res < best.0 {
            best = (res, u.clone());
        }
        if res <= cfg.tol {
            report.converged = true;
            report.iterations = it;
            return Ok((u, report));
        }
        if it == cfg.max_iters {
            break;
        }

        let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
        let newton = hessian_assemble(&u, f)
            .cholesky()
            .map(|c| c.solve(&neg_r))
            .filter(|d| d.iter().all(|x| x.is_finite()) && dot(&r, d) < 0.0);

        // roundoff floor on energy differences near convergence
        let slack = 1e-15 * (1.0 + energy.abs());
        let search = |dir: &[f64], mut alpha: f64| -> Result<Option<(Field, f64, f64)>> {
            let slope = dot(&r, dir);
            let dfield = Field::from_free(mesh, dir);
            loop {
                let trial = u.combine(1.0, &dfield, alpha)?;
                let e = energy_linear(&trial, f, &fq).total;
                if e.is_finite() && e <= energy + cfg.armijo * alpha * slope + slack {
                    // keep shortening while that still lowers the energy: for p < 2 a full
                    // Newton step tends to flip steep gradients instead of shrinking them
                    let mut best = (trial, e, alpha);
                    for _ in 0..12 {
                        let a = 0.5 * best.2;
                        let t = u.combine(1.0, &dfield, a)?;
                        let et = energy_linear(&t, f, &fq).total;
                        if !(et < best.1) {
                            break;
                        }
                        best = (t, et, a);
                    }
                    return Ok(Some(best));
                }
                alpha *= 0.5;
                if alpha < cfg.min_step {
                    return Ok(None);
                }
            }
        };
        let mut step = match &newton {
            Some(d) => search(d, 1.0)?,
            None => None,
        };
        // Newton steps that had to be cut hard (p < 2 far from the solution, where the
        // curvature grows as gradients shrink) compete with a preconditioned gradient step
        if step.as_ref().is_none_or(|s| s.2 < 0.25) {
            report.gradient_fallbacks += 1;
            let g = mesh.riesz(&neg_r);
            if let Some(gs) = search(&g, (2.0 * grad_step).min(1e6))? {
                grad_step = gs.2;
                if step.as_ref().is_none_or(|s| gs.1 < s.1) {
                    step = Some(gs);
                }
            }
        }
        match step {
            Some((trial, e, _)) => {
                u = trial;
                energy = e;
            }
            None => {
                report.iterations = it;
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: best.0,
                    best: Box::new(best.1),
                    context: "line search failed".into(),
                });
            }
        }
    }
    report.iterations = cfg.max_iters;
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        residual: best.0,
        best: Box::new(best.1),
        context: "iteration limit".into(),
    })
}

/// Strictly decreasing ladder of regularization parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationSchedule {
    eps_values: Vec<f64>,
    warm_start: bool,
}

impl ContinuationSchedule {
    /// Positive, strictly decreasing, ending at or below one hundredth of its start.
    pub fn new(eps_values: Vec<f64>, warm_start: bool) -> Result<Self> {
        let s = Self::unchecked(eps_values, warm_start)?;
        let (first, last) = (s.eps_values[0], *s.eps_values.last().unwrap());
        if last > first / 100.0 {
            return Err(Error::Parameter(format!(
                "schedule must end at or below first/100 (first {first}, last {last})"
            )));
        }
        Ok(s)
    }

    /// `eps_k = 2^{-k}` for `k = 0..=k_max`.
    pub fn geometric(k_max: u32) -> Result<Self> {
        Self::new((0..=k_max).map(|k| 0.5f64.powi(k as i32)).collect(), true)
    }

    /// A short ladder that skips the end-to-end decay requirement; used to show what an
    /// unfinished continuation looks like to the diagnostics.
    pub fn truncated(eps_values: Vec<f64>) -> Result<Self> {
        Self::unchecked(eps_values, true)
    }

    fn unchecked(eps_values: Vec<f64>, warm_start: bool) -> Result<Self> {
        if eps_values.is_empty() {
            return Err(Error::Parameter("empty schedule".into()));
        }
        if eps_values.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Parameter("schedule values must be positive".into()));
        }
        if eps_values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Parameter("schedule must be strictly decreasing".into()));
        }
        Ok(ContinuationSchedule { eps_values, warm_start })
    }

    pub fn eps_values(&self) -> &[f64] {
        &self.eps_values
    }

    pub fn warm_start(&self) -> bool {
        self.warm_start
    }

    /// Every value halved (for stability checks).
    pub fn halved(&self) -> Self {
        ContinuationSchedule {
            eps_values: self.eps_values.iter().map(|e| 0.5 * e).collect(),
            warm_start: self.warm_start,
        }
    }
}

/// Continuation settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationConfig {
    pub inner: SolverConfig,
    /// Target for the residual of the unregularized weak form at the last rung.
    pub tol_final: f64,
    /// Cap on the monitored integrals; defaults to the computed a-priori `R`.
    pub r_cap: Option<f64>,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            inner: SolverConfig::default(),
            tol_final: 1e-3,
            r_cap: None,
        }
    }
}

/// `(int Phi(|grad u|), int phi(|grad u|)|grad u|^2, int |grad u|)` with the base `Phi`.
pub fn bound_monitor<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> BoundMonitor {
    let mags = u.gradient_magnitudes();
    let mesh = u.mesh();
    let phi: Vec<f64> = mags.iter().map(|&t| f.value(t)).collect();
    let flux: Vec<f64> = mags.iter().map(|&t| t * f.density(t)).collect();
    BoundMonitor {
        phi_integral: integrate(&phi, mesh),
        flux_integral: integrate(&flux, mesh),
        w11: integrate(&mags, mesh),
    }
}

/// `S` and the norm index `N` of the embedding `W^{1,1}_0 -> L^{N/(N-1)}` used by the bound:
/// 1D `||u||_inf <= (1/2) int |u'|`; 2D `||u||_2 <= (4 pi)^{-1/2} int |grad u|`.
pub fn embedding_constant(dim: usize) -> (f64, f64) {
    match dim {
        1 => (0.5, 1.0),
        _ => (0.5 / std::f64::consts::PI.sqrt(), 2.0),
    }
}

/// A-priori bound `R = min_K max{S||f|| K|Omega|, K|Omega|} / (1 - S||f|| / (K phi(K)))`.
pub fn a_priori_bound<F: OrliczFunction + ?Sized>(mesh: &Mesh, f: &F, fq: &[f64]) -> APrioriBound {
    let (s, n) = embedding_constant(mesh.dim());
    let f_norm = lq_norm(fq, mesh, n);
    let sf = s * f_norm;
    let omega = mesh.measure();
    let mut best = (f64::INFINITY, f64::NAN);
    if sf == 0.0 {
        best = (0.0, 0.0);
    } else {
        for k in log_grid(1e-6, 1e12, 1800) {
            let kp = f.density(k);
            if kp <= sf {
                continue;
            }
            let r = sf.max(1.0) * k * omega / (1.0 - sf / kp);
            if r < best.0 {
                best = (r, k);
            }
        }
    }
    APrioriBound {
        r: best.0,
        k: best.1,
        s_const: s,
        f_norm,
        oracle_mode: mesh.dim() == 1,
    }
}

/// Runs the regularization ladder for an operator with `l = 1` (any validated operator is accepted).
pub fn solve_continuation(
    mesh: &Arc<Mesh>,
    f: &NFunction,
    source: &Source,
    schedule: &ContinuationSchedule,
    cfg: &ContinuationConfig,
) -> Result<(Field, SolveReport)> {
    solve_continuation_from(mesh, f, source, schedule, cfg, None)
}

/// [`solve_continuation`] with an initial field for the first rung.
pub fn solve_continuation_from(
    mesh: &Arc<Mesh>,
    f: &NFunction,
    source: &Source,
    schedule: &ContinuationSchedule,
    cfg: &ContinuationConfig,
    init: Option<&Field>,
) -> Result<(Field, SolveReport)> {
    if !(cfg.tol_final > 0.0) {
        return Err(Error::Parameter("tol_final must be positive".into()));
    }
    let fq = source.sample(mesh)?;
    let bound = a_priori_bound(mesh, f, &fq);
    let cap = cfg.r_cap.unwrap_or(bound.r);
    let mut report = SolveReport::new("eps-continuation");
    report.operator = Some(f.info());
    report.mesh = Some(mesh.summary());
    if bound.oracle_mode {
        report.notes.push("1D oracle mode: ||f||_N uses N = 1".into());
    }

    let mut fields: Vec<Field> = Vec::with_capacity(schedule.eps_values.len());
    let mut prev: Option<Field> = init.cloned();
    for &eps in &schedule.eps_values {
        let feps = RegularizedNFunction::new(f.clone(), eps)?;
        let start = if schedule.warm_start || fields.is_empty() { prev.as_ref() } else { init };
        let (u, inner) = solve_reflexive_from(mesh, &feps, source, &cfg.inner, start)
            .map_err(|e| Error::AtEpsilon { eps, source: Box::new(e) })?;
        let monitor = bound_monitor(&u, f);
        for (quantity, value) in [
            ("int Phi(|grad u|)", monitor.phi_integral),
            ("int phi(|grad u|)|grad u|^2", monitor.flux_integral),
            ("int |grad u|", monitor.w11),
        ] {
            if value > cap * (1.0 + 1e-12) {
                return Err(Error::BoundViolation { eps, quantity, value, cap });
            }
        }
        let energy = energy_linear(&u, &feps, &fq);
        let (increment_w11, increment_w1phi) = match fields.last() {
            Some(p) => {
                let d = u.combine(1.0, p, -1.0)?;
                (Some(d.w11_norm()), Some(d.w1phi_norm(f)))
            }
            None => (None, None),
        };
        report.iterations += inner.iterations;
        report.gradient_fallbacks += inner.gradient_fallbacks;
        report.energy_history.push(energy.total);
        report.residual_history.push(*inner.residual_history.last().unwrap());
        report.eps_records.push(EpsRecord {
            eps,
            ell_eps: feps.ell_eps(),
            iterations: inner.iterations,
            energy: energy.total,
            dirichlet_eps: energy.dirichlet_part,
            residual: *inner.residual_history.last().unwrap(),
            bound_monitor: monitor,
            pairing: 0.0,
            increment_w11,
            increment_w1phi,
        });
        prev = Some(u.clone());
        fields.push(u);
    }

    let u_final = fields.last().unwrap().clone();
    for (rec, u) in report.eps_records.iter_mut().zip(&fields) {
        let diff = u.combine(1.0, &u_final, -1.0)?;
        rec.pairing = operator_pairing(u, f, &diff)?;
    }
    let incs: Vec<f64> = report.eps_records.iter().filter_map(|r| r.increment_w11).collect();
    let tail = &incs[incs.len().saturating_sub(4)..];
    report.tail_increments_decreasing = Some(tail.windows(2).all(|w| w[1] < w[0]));
    report.a_priori = Some(bound);

    let r_final = mesh.dual_norm(&residual_linear(&u_final, f, &fq));
    report.final_residual_unregularized = Some(r_final);
    if r_final > cfg.tol_final {
        return Err(Error::NonConvergence {
            iterations: report.iterations,
            residual: r_final,
            best: Box::new(u_final),
            context: format!(
                "unregularized residual {r_final:e} above tol_final {:e} at eps = {:e}",
                cfg.tol_final,
                schedule.eps_values.last().unwrap()
            ),
        });
    }
    report.converged = true;
    Ok((u_final, report))
}

/// `int (phi(|grad u|) grad u - phi(|grad v|) grad v) . (grad u - grad v)`.
pub fn monotonicity_gap<F: OrliczFunction + ?Sized>(u: &Field, v: &Field, f: &F) -> Result<f64> {
    u.check_same_mesh(v)?;
    let d = u.combine(1.0, v, -1.0)?;
    Ok(operator_pairing(u, f, &d)? - operator_pairing(v, f, &d)?)
}

/// Rayleigh-quotient estimate of the first eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct Lambda1Estimate {
    /// Smallest quotient `int Phi(|grad u|) / int Phi(u)` seen along the iteration.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub minimizer: Option<Field>,
}

/// Settings for [`estimate_lambda1`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Lambda1Config {
    pub max_iters: usize,
    /// Stop when the relative decrease of the quotient over one step is below this.
    pub rel_tol: f64,
}

impl Default for Lambda1Config {
    fn default() -> Self {
        Lambda1Config {
            max_iters: 500,
            rel_tol: 1e-12,
        }
    }
}

fn rayleigh<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> (f64, f64, f64) {
    let a = crate::energy::dirichlet_integral(u, f);
    let uq = u.at_quadrature();
    let b: f64 = uq.iter().zip(u.mesh().weights()).map(|(x, w)| w * f.value(*x)).sum();
    (a / b, a, b)
}

fn normalize<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> Field {
    let n = u.lphi_norm(f);
    if n > 0.0 {
        u.scaled(1.0 / n)
    } else {
        u.clone()
    }
}

/// Minimizes `int Phi(|grad u|) / int Phi(u)` over the unit Luxemburg sphere by
/// Laplacian-preconditioned descent with renormalization after every step.
///
/// For non-homogeneous `Phi` the quotient depends on the scale of `u`; the value returned is
/// the infimum on the unit sphere `||u||_Phi = 1`.
pub fn estimate_lambda1<F: OrliczFunction + ?Sized>(
    mesh: &Arc<Mesh>,
    f: &F,
    cfg: &Lambda1Config,
) -> Result<Lambda1Estimate> {
    let dim = mesh.dim();
    let pi = std::f64::consts::PI;
    let [x0, x1, y0, y1] = mesh.bounds();
    let mut u = normalize(
        &Field::interpolate(mesh, |p| {
            let sx = (pi * (p[0] - x0) / (x1 - x0)).sin();
            if dim == 2 {
                sx * (pi * (p[1] - y0) / (y1 - y0)).sin()
            } else {
                sx
            }
        }),
        f,
    );
    let c = mesh.basis_at_quadrature();
    let (mut q, _, _) = rayleigh(&u, f);
    let mut best = (q, u.clone());
    let mut alpha = 1.0f64;
    for it in 0..cfg.max_iters {
        let (_, _, b) = rayleigh(&u, f);
        // gradient of A/B: (A' - q B') / B
        let mut grad = residual_linear(&u, f, &vec![0.0; mesh.num_elements()]);
        let uq = u.at_quadrature();
        for (e, x) in uq.iter().enumerate() {
            let s = q * mesh.weights()[e] * c * f.density(x.abs()) * x.signum();
            for &v in mesh.element(e) {
                if let Some(i) = mesh.free_index(v) {
                    grad[i] -= s;
                }
            }
        }
        for g in grad.iter_mut() {
            *g /= b;
        }
        let dir: Vec<f64> = mesh.riesz(&grad).iter().map(|x| -x).collect();
        let slope = dot(&grad, &dir);
        let dfield = Field::from_free(mesh, &dir);
        let mut step = (2.0 * alpha).min(1.0);
        let accepted = loop {
            let trial = normalize(&u.combine(1.0, &dfield, step)?, f);
            let (qt, _, _) = rayleigh(&trial, f);
            if qt.is_finite() && qt <= q + 1e-4 * step * slope {
                break Some((trial, qt));
            }
            step *= 0.5;
            if step < 1e-14 {
                break None;
            }
        };
        let Some((trial, qt)) = accepted else {
            return Ok(Lambda1Estimate {
                value: best.0,
                iterations: it,
                converged: true,
                minimizer: Some(best.1),
            });
        };
        alpha = step;
        let decrease = q - qt;
        u = trial;
        q = qt;
        if q < best.0 {
            best = (q, u.clone());
        }
        if decrease <= cfg.rel_tol * q {
            return Ok(Lambda1Estimate {
                value: best.0,
                iterations: it + 1,
                converged: true,
                minimizer: Some(best.1),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        residual: best.0,
        best: Box::new(best.1),
        context: "first-eigenvalue quotient still decreasing".into(),
    })
}

/// Verdict of the `(S)+` shadow test on a continuation run.
#[derive(Clone, Debug, Serialize)]
pub struct SPlusVerdict {
    pub pass: bool,
    /// Largest pairing over the tail of the ladder.
    pub limsup_pairing: f64,
    pub tol: f64,
    pub increments_decreasing: bool,
    /// `(eps, pairing)` entries of the tail above `tol`.
    pub offending: Vec<(f64, f64)>,
}

/// Default tolerance of [`s_plus_diagnostic`].
pub const S_PLUS_TOL: f64 = 1e-3;

/// Checks that the pairings `<-Delta_Phi u_eps, u_eps - u_final>` over the last three rungs are
/// below `S_PLUS_TOL` and that the tail increments in `W^{1,Phi}` decrease.
pub fn s_plus_diagnostic(report: &SolveReport) -> SPlusVerdict {
    s_plus_diagnostic_with(report, S_PLUS_TOL)
}

pub fn s_plus_diagnostic_with(report: &SolveReport, tol: f64) -> SPlusVerdict {
    let recs = &report.eps_records;
    let tail = &recs[recs.len().saturating_sub(3)..];
    let limsup = tail.iter().map(|r| r.pairing.abs()).fold(0.0, f64::max);
    let offending: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.pairing.abs() > tol)
        .map(|r| (r.eps, r.pairing))
        .collect();
    let incs: Vec<f64> = recs.iter().filter_map(|r| r.increment_w1phi).collect();
    let inc_tail = &incs[incs.len().saturating_sub(3)..];
    // an increment of exactly zero (f = 0) is trivially nonincreasing
    let increments_decreasing = inc_tail.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    SPlusVerdict {
        pass: offending.is_empty() && increments_decreasing,
        limsup_pairing: limsup,
        tol,
        increments_decreasing,
        offending,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_mesh;
    use approx::assert_relative_eq;

    #[test]
    fn poisson_oracle() {
        let m = build_mesh(1, 64).unwrap();
        let f = NFunction::power(2.0).unwrap();
        let (u, rep) = solve_reflexive(&m, &f, &Source::Constant(1.0), &SolverConfig::default()).unwrap();
        assert!((u.max() - 0.125).abs() < 1e-4);
        assert!(rep.energy_history.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn p3_oracle() {
        let m = build_mesh(1, 128).unwrap();
        let f = NFunction::power(3.0).unwrap();
        let (u, _) = solve_reflexive(&m, &f, &Source::Constant(1.0), &SolverConfig::default()).unwrap();
        let exact = 2.0 / 3.0 * 0.5f64.powf(1.5);
        assert!((u.nodal()[64] - exact).abs() < 1e-3, "{}", u.nodal()[64]);
    }

    #[test]
    fn zero_source_gives_zero() {
        let m = build_mesh(2, 4).unwrap();
        let f = NFunction::power(1.5).unwrap();
        let (u, _) = solve_reflexive(&m, &f, &Source::Constant(0.0), &SolverConfig::default()).unwrap();
        assert!(u.nodal().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonreflexive_needs_regularization() {
        let m = build_mesh(1, 8).unwrap();
        let err = solve_reflexive(&m, &NFunction::logarithmic(), &Source::Constant(1.0), &SolverConfig::default())
            .unwrap_err();
        assert!(err.is_hypothesis_failure());
    }

    #[test]
    fn schedule_validation() {
        assert!(ContinuationSchedule::new(vec![1.0, 0.5], true).is_err());
        assert!(ContinuationSchedule::new(vec![1.0, 1.0, 0.001], true).is_err());
        assert!(ContinuationSchedule::new(vec![1.0, 0.1, 0.001], true).is_ok());
        assert_eq!(ContinuationSchedule::geometric(10).unwrap().eps_values().len(), 11);
        assert!(ContinuationSchedule::truncated(vec![1.0, 0.5]).is_ok());
    }

    #[test]
    fn a_priori_bound_log_case() {
        let m = build_mesh(1, 32).unwrap();
        let b = a_priori_bound(&m, &NFunction::logarithmic(), &vec![1.0; 32]);
        // min_K K / (1 - 1/(2 ln(1+K))) is about 3.25 near K = 1.3
        assert!(b.r > 3.2 && b.r < 3.3, "{}", b.r);
        assert!(b.oracle_mode);
    }

    #[test]
    fn monotonicity_examples() {
        let m = build_mesh(1, 8).unwrap();
        let f = NFunction::power(2.0).unwrap();
        let u = Field::interpolate_free_boundary(&m, |p| p[0]);
        let v = Field::interpolate_free_boundary(&m, |_| 0.0);
        assert_relative_eq!(monotonicity_gap(&u, &v, &f).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(monotonicity_gap(&u, &u, &f).unwrap(), 0.0);
        let other = build_mesh(1, 9).unwrap();
        assert!(matches!(
            monotonicity_gap(&u, &Field::zeros(&other), &f),
            Err(Error::MeshMismatch)
        ));
    }

    #[test]
    fn lambda1_interval() {
        let m = build_mesh(1, 64).unwrap();
        let est = estimate_lambda1(&m, &NFunction::power(2.0).unwrap(), &Lambda1Config::default()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((est.value - pi2).abs() < 0.01 * pi2, "{}", est.value);
    }

    #[test]
    fn log_continuation_oracle() {
        let m = build_mesh(1, 128).unwrap();
        let f = NFunction::logarithmic();
        let sched = ContinuationSchedule::geometric(10).unwrap();
        let (u, rep) =
            solve_continuation(&m, &f, &Source::Constant(1.0), &sched, &ContinuationConfig::default()).unwrap();
        let exact = 0.5f64.exp() - 1.5;
        assert!((u.nodal()[64] - exact).abs() < 1e-3, "{}", u.nodal()[64]);
        let e: Vec<f64> = rep.eps_records.iter().map(|r| r.energy).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{e:?}");
        let v = s_plus_diagnostic(&rep);
        eprintln!("{:?} {:?}", v, rep.pairing_history());
        assert!(v.pass);
        let bad = ContinuationSchedule::truncated(vec![1.0, 0.5]).unwrap();
        let cfg = ContinuationConfig { tol_final: 1e3, ..Default::default() };
        let (_, rep) = solve_continuation(&m, &f, &Source::Constant(1.0), &bad, &cfg).unwrap();
        let v = s_plus_diagnostic(&rep);
        eprintln!("{:?} {:?}", v, rep.pairing_history());
    }

    #[test]
    fn lambda1_square() {
        let m = build_mesh(2, 32).unwrap();
        let est = estimate_lambda1(&m, &NFunction::power(2.0).unwrap(), &Lambda1Config::default()).unwrap();
        let v = 2.0 * std::f64::consts::PI.powi(2);
        assert!((est.value - v).abs() < 0.02 * v, "{}", est.value);
    }
}
