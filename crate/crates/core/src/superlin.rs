//! Mountain-pass solver for `-Delta_Phi u = g(u)`, `u = 0` on the boundary.
//!
//! Critical points of `J(u) = int Phi_eps(|grad u|) - int G(u)` are found by deforming a
//! discrete path from `0` to a far point `e` with `J(e) < 0`: the highest point on the path is
//! pushed down along the Laplacian-preconditioned gradient and the path is redistributed by
//! `H^1` arclength. Once the climber is close to critical, Newton steps on the indefinite
//! Hessian finish the job. The `plus`/`minus` variants use the truncations `g^+`/`g^-` and
//! return signed solutions.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{estimate_lambda1, Lambda1Config};
use crate::energy::{energy_superlinear, gbar_integral, hessian_assemble_superlinear, residual_superlinear};
use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};
use crate::nfunc::{log_grid, NFunction, OrliczFunction, RegularizedNFunction};
use crate::nonlin::{Nonlinearity, Variant};
use crate::report::{GeometryCertificate, SolveReport, SweepRecord};

/// Settings for [`certify_geometry`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    /// `g(t) / t^{m-1}` must be nondecreasing on `[t_big, 1e4 t_big]`.
    pub t_big: f64,
    /// Largest endpoint scale tried.
    pub s_max: f64,
    /// Use this first eigenvalue instead of estimating it.
    pub lambda1: Option<f64>,
    pub lambda1_cfg: Lambda1Config,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            t_big: 1e3,
            s_max: 1e6,
            lambda1: None,
            lambda1_cfg: Lambda1Config::default(),
        }
    }
}

/// Settings for [`mountain_pass_solve`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MountainPassConfig {
    pub path_points: usize,
    /// Target residual dual norm at the climber.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Minimal level decrease over `stall_window` sweeps before the run counts as stalled.
    pub stall: f64,
    pub stall_window: usize,
    /// Allowed shortfall of the final level below `r0`.
    pub slack: f64,
    pub sign_tol: f64,
    /// Residual below which Newton steps are attempted.
    pub newton_switch: f64,
    /// Allowed `W^{1,Phi}` movement of a climber when `eps` is halved.
    pub drift: f64,
    pub geometry: GeometryConfig,
}

impl Default for MountainPassConfig {
    fn default() -> Self {
        MountainPassConfig {
            path_points: 20,
            tol: 1e-8,
            max_sweeps: 5000,
            stall: 1e-12,
            stall_window: 50,
            slack: 1e-8,
            sign_tol: 1e-10,
            newton_switch: 1e-2,
            drift: 1e-3,
            geometry: GeometryConfig::default(),
        }
    }
}

impl MountainPassConfig {
    pub fn validate(&self) -> Result<()> {
        if self.path_points < 3 {
            return Err(Error::Parameter("path_points must be at least 3".into()));
        }
        for (name, v) in [("tol", self.tol), ("stall", self.stall), ("sign_tol", self.sign_tol)] {
            if !(v > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive")));
            }
        }
        if self.max_sweeps == 0 || self.stall_window == 0 {
            return Err(Error::Parameter("max_sweeps and stall_window must be positive".into()));
        }
        Ok(())
    }
}

/// A path from `0` to the endpoint together with its highest point.
#[derive(Clone, Debug)]
pub struct MountainPassState {
    pub path: Vec<Field>,
    pub level: f64,
    pub climber: Field,
    pub cerami_metric: f64,
}

fn energy(u: &Field, f: &RegularizedNFunction, nl: &Nonlinearity, v: Variant) -> f64 {
    energy_superlinear(u, f, nl, v).total
}

/// `(1 + ||u||_{W^{1,Phi}}) ||J'(u)||_*`.
pub fn cerami_metric<F: OrliczFunction + ?Sized>(u: &Field, f: &F, nl: &Nonlinearity, variant: Variant) -> f64 {
    let r = residual_superlinear(u, f, nl, variant);
    (1.0 + u.w1phi_norm(f)) * u.mesh().dual_norm(&r)
}

/// `Phi^{-1}(y)` by bisection.
fn inverse<F: OrliczFunction + ?Sized>(f: &F, y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while f.value(hi) < y {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f.value(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First Dirichlet eigenfunction of the bounding box, pinned to zero on the boundary.
fn bump(mesh: &Arc<Mesh>, sign: f64) -> Field {
    let pi = std::f64::consts::PI;
    let [x0, x1, y0, y1] = mesh.bounds();
    let dim = mesh.dim();
    Field::interpolate(mesh, |p| {
        let s = (pi * (p[0] - x0) / (x1 - x0)).sin();
        sign * if dim == 2 { s * (pi * (p[1] - y0) / (y1 - y0)).sin() } else { s }
    })
}

/// Bound on `||u||_inf` in terms of `int |grad u|` for discrete Dirichlet fields:
/// `1/2` in 1D; along a grid line in 2D, `1/h_y` (integrating from both ends of the line
/// through the triangles that own its horizontal edges).
fn sup_per_w11(mesh: &Mesh) -> f64 {
    if mesh.dim() == 1 {
        0.5
    } else {
        let [_, _, y0, y1] = mesh.bounds();
        mesh.cells().1 as f64 / (y1 - y0)
    }
}

/// Samples the mountain-pass geometry of `J` and returns the certified level `r0` with the
/// endpoint `e`.
pub fn certify_geometry(
    f: &RegularizedNFunction,
    nl: &Nonlinearity,
    variant: Variant,
    mesh: &Arc<Mesh>,
    cfg: &GeometryConfig,
) -> Result<(GeometryCertificate, Field)> {
    let m = f.upper_index();
    let ell = f.lower_index();

    // (g3): g(t)/|t|^{m-1} nondecreasing at large |t|
    let big = log_grid(cfg.t_big, cfg.t_big * 1e4, 60);
    let mut g3_ratio = f64::INFINITY;
    for sign in [1.0, -1.0] {
        let ratios: Vec<f64> = big
            .iter()
            .map(|&t| sign * nl.g_variant(sign * t, variant) / t.powf(m - 1.0))
            .collect();
        if let Some(w) = ratios.windows(2).position(|w| w[1] < w[0] * (1.0 - 1e-12) || !w[1].is_finite()) {
            return Err(Error::hypothesis(
                "(g3)",
                sign * big[w + 1],
                format!(
                    "g(t)/|t|^(m-1) decreases from {:.6e} to {:.6e} beyond t_big = {:e} (m = {m}): {} grows no faster than Phi",
                    ratios[w],
                    ratios[w + 1],
                    cfg.t_big,
                    nl.name()
                ),
            ));
        }
        g3_ratio = g3_ratio.min(*ratios.last().unwrap());
    }

    let lambda1 = match cfg.lambda1 {
        Some(l) => l,
        // an unconverged estimate still carries the smallest quotient seen
        None => match estimate_lambda1(mesh, f, &cfg.lambda1_cfg) {
            Ok(est) => est.value,
            Err(Error::NonConvergence { residual, .. }) => residual,
            Err(e) => return Err(e),
        },
    };

    // (g4): g(t)/(t phi(t)) stays below lambda1 near zero
    let small = log_grid(1e-6, 1e-2, 40);
    let mut lambda_small = 0.0f64;
    for &t in &small {
        for sign in [1.0, -1.0] {
            let ratio = nl.g_variant(sign * t, variant) / (sign * t * f.phi(t));
            lambda_small = lambda_small.max(ratio);
        }
    }
    if !(lambda_small < lambda1) {
        return Err(Error::hypothesis(
            "(g4)",
            lambda_small,
            format!("sampled g(t)/(t phi(t)) near 0 reaches {lambda_small:.6e} >= lambda1 = {lambda1:.6e}"),
        ));
    }
    let eta = 0.5 * (lambda1 - lambda_small);

    let psi = nl.psi_witness().cloned().unwrap_or_else(|| NFunction::power(m + 1.0).expect("m + 1 > 1"));
    let mut c_psi = 0.0f64;
    for &t in &log_grid(1e-6, 1e8, 600) {
        for sign in [1.0, -1.0] {
            let excess = nl.big_g_variant(sign * t, variant) - (lambda1 - eta) * f.value(t);
            if excess > 0.0 {
                c_psi = c_psi.max(excess / psi.value(t));
            }
        }
    }

    // J(u) >= (eta/lambda1) zeta0(rho) - C |Omega| Psi(||u||_inf) on ||grad u||_Phi = rho
    let omega = mesh.measure();
    let w11_per_rho = omega * inverse(f, 1.0 / omega);
    let k_inf = sup_per_w11(mesh);
    let lower = |rho: f64| {
        let zeta0 = rho.powf(ell).min(rho.powf(m));
        eta / lambda1 * zeta0 - c_psi * omega * psi.value(k_inf * w11_per_rho * rho)
    };
    let (rho_star, r0) = log_grid(1e-4, 1e4, 400)
        .into_iter()
        .map(|rho| (rho, lower(rho)))
        .fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if !(r0 > 0.0) {
        return Err(Error::Geometry(format!(
            "no radius with a positive lower bound on J (best {r0:.3e}; lambda1 = {lambda1:.4e}, eta = {eta:.3e}, C = {c_psi:.3e})"
        )));
    }

    let sign = if variant == Variant::Minus { -1.0 } else { 1.0 };
    let w = bump(mesh, sign);
    let mut s = 1.0;
    let endpoint = loop {
        let e = w.scaled(s);
        let je = energy(&e, f, nl, variant);
        if je < 0.0 && e.w1phi_norm(f) > rho_star {
            break (e, je);
        }
        s *= 2.0;
        if s > cfg.s_max {
            return Err(Error::Geometry(format!(
                "no negative endpoint: J(s * bump) >= 0 for all s <= s_max = {:e} ({})",
                cfg.s_max,
                nl.name()
            )));
        }
    };
    let cert = GeometryCertificate {
        lambda1,
        lambda_small,
        eta,
        c_psi,
        psi: psi.kind().name(),
        rho_star,
        r0,
        endpoint_scale: s,
        endpoint_energy: endpoint.1,
        g3_ratio,
    };
    Ok((cert, endpoint.0))
}

/// Squared `H^1_0` seminorm distances between consecutive path points.
fn segment_lengths(path: &[Field]) -> Vec<f64> {
    path.windows(2)
        .map(|w| {
            let d = w[1].combine(1.0, &w[0], -1.0).expect("path shares one mesh");
            d.gradient_magnitudes()
                .iter()
                .zip(d.mesh().weights())
                .map(|(g, wt)| wt * g * g)
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Point at arclength `s` along the polyline `path`.
fn along(path: &[Field], lengths: &[f64], s: f64) -> Field {
    let mut acc = 0.0;
    for (i, &l) in lengths.iter().enumerate() {
        if s <= acc + l || i == lengths.len() - 1 {
            let t = if l > 0.0 { ((s - acc) / l).clamp(0.0, 1.0) } else { 0.0 };
            return path[i].combine(1.0 - t, &path[i + 1], t).expect("path shares one mesh");
        }
        acc += l;
    }
    path.last().unwrap().clone()
}

/// Redistributes `p` points by arclength on either side of the vertex `k`.
fn retension(path: &[Field], k: usize, p: usize) -> (Vec<Field>, usize) {
    let lengths = segment_lengths(path);
    let left: f64 = lengths[..k].iter().sum();
    let right: f64 = lengths[k..].iter().sum();
    let total = left + right;
    let segs = p - 1;
    let nl = if total > 0.0 {
        ((segs as f64 * left / total).round() as usize).clamp(1, segs - 1)
    } else {
        segs / 2
    };
    let nr = segs - nl;
    let mut out = Vec::with_capacity(p);
    for i in 0..nl {
        out.push(along(&path[..=k], &lengths[..k], left * i as f64 / nl as f64));
    }
    out.push(path[k].clone());
    for i in 1..nr {
        out.push(along(&path[k..], &lengths[k..], right * i as f64 / nr as f64));
    }
    out.push(path.last().unwrap().clone());
    (out, nl)
}

/// Maximizes `J` on the segment `[a, b]` by golden-section search.
fn golden_max(a: &Field, b: &Field, mut j: impl FnMut(&Field) -> f64) -> (f64, Field) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let at = |t: f64| a.combine(1.0 - t, b, t).expect("path shares one mesh");
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = j(&at(x1));
    let mut f2 = j(&at(x2));
    for _ in 0..40 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = j(&at(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = j(&at(x2));
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let u = at(t);
    (j(&u), u)
}

fn sign_violation(u: &Field, variant: Variant, tol: f64) -> bool {
    match variant {
        Variant::Full => false,
        Variant::Plus => u.min() < -tol,
        Variant::Minus => u.max() > tol,
    }
}

fn project(u: &Field, variant: Variant) -> Field {
    match variant {
        Variant::Full => u.clone(),
        Variant::Plus => u.map(|x| x.max(0.0)),
        Variant::Minus => u.map(|x| x.min(0.0)),
    }
}

/// Newton iteration on `J'(u) = 0` with residual-decrease backtracking.
fn newton_polish(
    u0: &Field,
    f: &RegularizedNFunction,
    nl: &Nonlinearity,
    variant: Variant,
    tol: f64,
) -> Option<(Field, usize)> {
    let mesh = u0.mesh().clone();
    let mut u = u0.clone();
    let mut res = mesh.dual_norm(&residual_superlinear(&u, f, nl, variant));
    for it in 0..40 {
        if res <= tol {
            return Some((u, it));
        }
        let r = residual_superlinear(&u, f, nl, variant);
        let neg: Vec<f64> = r.iter().map(|x| -x).collect();
        let d = hessian_assemble_superlinear(&u, f, nl, variant).ldlt()?.solve(&neg);
        if !d.iter().all(|x| x.is_finite()) {
            return None;
        }
        let dfield = Field::from_free(&mesh, &d);
        let mut alpha = 1.0;
        loop {
            let trial = u.combine(1.0, &dfield, alpha).ok()?;
            let rt = mesh.dual_norm(&residual_superlinear(&trial, f, nl, variant));
            if rt < res {
                u = trial;
                res = rt;
                break;
            }
            alpha *= 0.5;
            if alpha < 1.0 / 64.0 {
                return None;
            }
        }
    }
    (res <= tol).then_some((u, 40))
}

/// Finds a mountain-pass critical point of `J` (or of `J^+`/`J^-`).
pub fn mountain_pass_solve(
    f: &RegularizedNFunction,
    nl: &Nonlinearity,
    variant: Variant,
    mesh: &Arc<Mesh>,
    cfg: &MountainPassConfig,
) -> Result<(Field, SolveReport)> {
    cfg.validate()?;
    let (cert, endpoint) = certify_geometry(f, nl, variant, mesh, &cfg.geometry)?;
    let m = f.upper_index();
    let p = cfg.path_points;
    let j = |u: &Field| energy(u, f, nl, variant);

    let mut report = SolveReport::new(format!("mountain-pass-{}", variant.name()));
    report.operator = Some(f.info());
    report.mesh = Some(mesh.summary());
    if f.eps() == 0.0 {
        report.notes.push("eps = 0: unregularized functional (l > 1)".into());
    }
    let r0 = cert.r0;
    report.geometry = Some(cert);

    let mut path: Vec<Field> = (0..p)
        .map(|i| endpoint.scaled(i as f64 / (p - 1) as f64))
        .collect();
    let mut state = MountainPassState {
        climber: path[1].clone(),
        path: Vec::new(),
        level: f64::NEG_INFINITY,
        cerami_metric: f64::INFINITY,
    };
    let mut best: (f64, Field) = (f64::INFINITY, path[1].clone());
    let mut step = 1.0f64;
    let mut newton_cooldown = 0usize;

    for sweep in 0..cfg.max_sweeps {
        let levels: Vec<f64> = path.par_iter().map(&j).collect();
        let k = (1..p - 1)
            .max_by(|&a, &b| levels[a].total_cmp(&levels[b]))
            .expect("path has interior points");
        let (mut level, mut climber) = (levels[k], path[k].clone());
        let mut pos = k;
        for (a, b, insert_at) in [(k - 1, k, k), (k, k + 1, k + 1)] {
            let (lv, u) = golden_max(&path[a], &path[b], j);
            if lv > level {
                level = lv;
                climber = u;
                pos = insert_at;
            }
        }
        if pos != k || climber.nodal() != path[k].nodal() {
            path.insert(pos, climber.clone());
        }

        let r = residual_superlinear(&climber, f, nl, variant);
        let res = mesh.dual_norm(&r);
        let cerami = (1.0 + climber.w1phi_norm(f)) * res;
        if res < best.0 {
            best = (res, climber.clone());
        }
        report.energy_history.push(level);
        report.residual_history.push(res);
        report.sweeps.push(SweepRecord {
            sweep,
            level,
            residual: res,
            cerami,
            gbar_integral: gbar_integral(&climber, nl, m),
            step,
        });
        report.iterations = sweep + 1;
        state.level = level;
        state.cerami_metric = cerami;
        state.climber = climber.clone();

        let finish = |u: Field, report: &mut SolveReport| -> Result<Field> {
            let ju = j(&u);
            if ju < r0 - cfg.slack {
                return Err(Error::NonConvergence {
                    iterations: report.iterations,
                    residual: res,
                    best: Box::new(u),
                    context: format!("critical point at level {ju:.6e} below certified r0 = {r0:.6e}"),
                });
            }
            report.converged = true;
            Ok(u)
        };

        if res <= cfg.tol && !sign_violation(&climber, variant, cfg.sign_tol) {
            let u = finish(climber, &mut report)?;
            return Ok((u, report));
        }
        if res <= cfg.newton_switch && newton_cooldown == 0 {
            if let Some((u, its)) = newton_polish(&climber, f, nl, variant, cfg.tol) {
                if !sign_violation(&u, variant, cfg.sign_tol) && j(&u) >= r0 - cfg.slack {
                    report.iterations += its;
                    let res_u = mesh.dual_norm(&residual_superlinear(&u, f, nl, variant));
                    report.energy_history.push(j(&u));
                    report.residual_history.push(res_u);
                    let u = finish(u, &mut report)?;
                    return Ok((u, report));
                }
            }
            newton_cooldown = 10;
        }
        newton_cooldown = newton_cooldown.saturating_sub(1);

        // stagnation: little level decrease and no residual halving over the window
        let w = cfg.stall_window;
        if sweep >= w {
            let h = &report.sweeps;
            let old = &h[h.len() - 1 - w];
            if old.level - level < cfg.stall && res > 0.5 * old.residual {
                return Err(Error::Stagnation {
                    sweeps: sweep + 1,
                    level,
                    residual: best.0,
                    best: Box::new(best.1),
                });
            }
        }

        // descend from the climber along the Sobolev gradient
        let d: Vec<f64> = mesh.riesz(&r).iter().map(|x| -x).collect();
        let dfield = Field::from_free(mesh, &d);
        let slope = -res * res;
        let mut alpha = (2.0 * step).min(1.0);
        let moved = loop {
            let trial = climber.combine(1.0, &dfield, alpha)?;
            let jt = j(&trial);
            if jt <= level + 1e-4 * alpha * slope {
                break Some(trial);
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                break None;
            }
        };
        let Some(mut next) = moved else {
            return Err(Error::Stagnation {
                sweeps: sweep + 1,
                level,
                residual: best.0,
                best: Box::new(best.1),
            });
        };
        step = alpha;
        if sign_violation(&next, variant, cfg.sign_tol) {
            next = project(&next, variant);
        }
        path[pos] = next;
        let (tensioned, _) = retension(&path, pos, p);
        path = tensioned;
    }
    state.path = path;
    Err(Error::NonConvergence {
        iterations: cfg.max_sweeps,
        residual: best.0,
        best: Box::new(best.1),
        context: format!(
            "sweep limit reached at level {:.6e}, Cerami metric {:.3e}",
            state.level, state.cerami_metric
        ),
    })
}

/// Solves along a decreasing `eps` ladder and returns the `W^{1,Phi}` distances between
/// consecutive climbers, failing if one exceeds `cfg.drift`.
pub fn epsilon_drift(
    base: &NFunction,
    nl: &Nonlinearity,
    variant: Variant,
    mesh: &Arc<Mesh>,
    eps_ladder: &[f64],
    cfg: &MountainPassConfig,
) -> Result<Vec<f64>> {
    let mut prev: Option<Field> = None;
    let mut drifts = Vec::new();
    for &eps in eps_ladder {
        let f = RegularizedNFunction::new(base.clone(), eps)?;
        let (u, _) = mountain_pass_solve(&f, nl, variant, mesh, cfg)
            .map_err(|e| Error::AtEpsilon { eps, source: Box::new(e) })?;
        if let Some(p) = &prev {
            let d = u.combine(1.0, p, -1.0)?.w1phi_norm(&f);
            if d > cfg.drift {
                return Err(Error::Parameter(format!(
                    "climber moved by {d:.3e} > drift {:.3e} when eps went to {eps:e}",
                    cfg.drift
                )));
            }
            drifts.push(d);
        }
        prev = Some(u);
    }
    Ok(drifts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_mesh;

    fn quadratic(eps: f64) -> RegularizedNFunction {
        let base = NFunction::power(2.0).unwrap();
        if eps == 0.0 {
            RegularizedNFunction::unregularized(base).unwrap()
        } else {
            RegularizedNFunction::new(base, eps).unwrap()
        }
    }

    /// `u_max` of the positive solution of `-u'' = u^3` on `(0, 1)` by shooting:
    /// `v'' = -v^3`, `v(0) = 0`, `v'(0) = 1` has first zero `X`, and `u(x) = X v(X x)`.
    fn shooting_umax() -> f64 {
        let rhs = |y: [f64; 2]| [y[1], -y[0].powi(3)];
        let (mut x, mut y, h) = (0.0, [0.0, 1.0], 1e-4);
        loop {
            let k1 = rhs(y);
            let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
            let next = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if x > 1.0 && next[0] < 0.0 {
                // linear interpolation of the crossing
                let zero = x + h * y[0] / (y[0] - next[0]);
                return zero * 2f64.powf(0.25);
            }
            y = next;
            x += h;
        }
    }

    #[test]
    fn cubic_geometry() {
        let m = build_mesh(1, 64).unwrap();
        let nl = Nonlinearity::power(4.0).unwrap();
        let (cert, e) = certify_geometry(&quadratic(1e-4), &nl, Variant::Full, &m, &GeometryConfig::default()).unwrap();
        assert!(cert.r0 > 0.0);
        assert!(energy(&e, &quadratic(1e-4), &nl, Variant::Full) < 0.0);
    }

    #[test]
    fn zero_nonlinearity_has_no_endpoint() {
        let m = build_mesh(1, 16).unwrap();
        let err = certify_geometry(&quadratic(1e-4), &Nonlinearity::zero(), Variant::Full, &m, &GeometryConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Geometry(ref s) if s.contains("no negative endpoint")), "{err}");
    }

    #[test]
    fn sublinear_growth_fails_g3() {
        let m = build_mesh(1, 16).unwrap();
        let nl = Nonlinearity::power(1.2).unwrap();
        let err = certify_geometry(&quadratic(1e-4), &nl, Variant::Full, &m, &GeometryConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { hypothesis: "(g3)", .. }), "{err}");
    }

    #[test]
    fn power_log_geometry() {
        let m = build_mesh(1, 32).unwrap();
        let nl = Nonlinearity::power_log(2.0).unwrap();
        let (cert, _) = certify_geometry(&quadratic(1e-4), &nl, Variant::Full, &m, &GeometryConfig::default()).unwrap();
        assert!(cert.r0 > 0.0);
    }

    #[test]
    fn cubic_mountain_pass_matches_shooting() {
        let m = build_mesh(1, 128).unwrap();
        let nl = Nonlinearity::power(4.0).unwrap();
        let f = quadratic(0.0);
        let (u, rep) = mountain_pass_solve(&f, &nl, Variant::Full, &m, &MountainPassConfig::default()).unwrap();
        let oracle = shooting_umax();
        assert!((oracle - 3.708).abs() < 5e-3, "{oracle}");
        assert!((u.sup_norm() - oracle).abs() < 1e-2, "{} vs {oracle}", u.sup_norm());
        let level = *rep.energy_history.last().unwrap();
        assert!(level >= rep.geometry.as_ref().unwrap().r0);
        assert!(cerami_metric(&u, &f, &nl, Variant::Full) <= (1.0 + u.w1phi_norm(&f)) * 1e-8);
    }

    #[test]
    fn signed_pair_is_odd() {
        let m = build_mesh(1, 64).unwrap();
        let nl = Nonlinearity::power(4.0).unwrap();
        let f = quadratic(1e-4);
        let cfg = MountainPassConfig::default();
        let (up, _) = mountain_pass_solve(&f, &nl, Variant::Plus, &m, &cfg).unwrap();
        let (um, _) = mountain_pass_solve(&f, &nl, Variant::Minus, &m, &cfg).unwrap();
        assert!(up.min() >= -cfg.sign_tol && um.max() <= cfg.sign_tol);
        let diff = up.combine(1.0, &um, 1.0).unwrap().sup_norm();
        assert!(diff < 1e-6, "{diff}");
        let jp = energy(&up, &f, &nl, Variant::Plus);
        let jf = energy(&up, &f, &nl, Variant::Full);
        assert!((jp - jf).abs() <= 1e-12 * jp.abs());
    }

    #[test]
    fn cerami_metric_at_zero_and_far_out() {
        let m = build_mesh(1, 32).unwrap();
        let nl = Nonlinearity::power(4.0).unwrap();
        let f = quadratic(1e-4);
        assert_eq!(cerami_metric(&Field::zeros(&m), &f, &nl, Variant::Full), 0.0);
        let w = bump(&m, 1.0);
        let far: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&s| cerami_metric(&w.scaled(s), &f, &nl, Variant::Full)).collect();
        assert!(far.iter().all(|&c| c > 1.0) && far.windows(2).all(|w| w[1] > w[0]));
    }
}
