//! Post-hoc checks on computed solutions: the Moser norm ladder, Poincaré-type inequalities
//! and mesh-convergence studies against closed-form solutions.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirichlet::{solve_continuation, solve_reflexive, ContinuationConfig, ContinuationSchedule, SolverConfig};
use crate::energy::{dirichlet_integral, lq_norm, Source};
use crate::error::{Error, Result};
use crate::grid::{build_mesh, Field, Mesh};
use crate::nfunc::{Kind, NFunction, OrliczFunction, SampledMeasureSpace};

/// Parameters of the Moser ladder for `m < N` and `f in L^q`, `q > N/m`.
#[derive(Clone, Debug, Serialize)]
pub struct MoserParams {
    pub dim: usize,
    pub m: f64,
    pub q: f64,
    /// `chi = N / (N - m)`
    pub chi: f64,
    /// `beta = N / (m (m q - N))`
    pub beta: f64,
    /// Truncation level: the ladder runs on `max(u, k)`.
    pub k: f64,
    pub r1: f64,
    pub r2: f64,
    pub n0: usize,
    pub n_max: usize,
    /// Box the interior sets are measured from; the mesh bounds when `None`.
    pub domain: Option<[f64; 4]>,
}

impl MoserParams {
    pub fn new(dim: usize, m: f64, q: f64) -> Result<Self> {
        let n = dim as f64;
        if !(m < n) {
            return Err(Error::Parameter(format!("Moser ladder needs m < N (m = {m}, N = {dim})")));
        }
        if !(q > n / m) {
            return Err(Error::Parameter(format!("Moser ladder needs q > N/m = {} (q = {q})", n / m)));
        }
        Ok(MoserParams {
            dim,
            m,
            q,
            chi: n / (n - m),
            beta: n / (m * (m * q - n)),
            k: 1.0,
            r1: 0.25,
            r2: 0.125,
            n0: 0,
            n_max: 8,
            domain: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.dim, self.m, self.q)?;
        if !(self.k > 0.0) {
            return Err(Error::Parameter("Moser truncation level k must be positive".into()));
        }
        if !(0.0 < self.r2 && self.r2 < self.r1) {
            return Err(Error::Parameter("Moser radii need 0 < R2 < R1".into()));
        }
        if self.n0 > self.n_max {
            return Err(Error::Parameter("n0 must not exceed n_max".into()));
        }
        Ok(())
    }

    /// `R_n = R2 + (R1 - R2) / 2^n`
    pub fn radius(&self, n: usize) -> f64 {
        self.r2 + (self.r1 - self.r2) / 2f64.powi(n as i32)
    }

    /// `m chi^n`
    pub fn exponent(&self, n: usize) -> f64 {
        self.m * self.chi.powi(n as i32)
    }

    /// `rho = ||f||_q^beta / k^{beta (m - 1)}`
    pub fn rho(&self, f_norm_q: f64) -> f64 {
        f_norm_q.powf(self.beta) / self.k.powf(self.beta * (self.m - 1.0))
    }

    /// `[C / (R1 - R2) (1 + rho)]^{1/(chi - 1)}`, the factor multiplying the starting level.
    pub fn bound_factor(&self, c: f64, f_norm_q: f64) -> f64 {
        (c / (self.r1 - self.r2) * (1.0 + self.rho(f_norm_q))).powf(1.0 / (self.chi - 1.0))
    }
}

/// Constant of the Moser bound, fitted on [`calibrate_moser`] and frozen.
pub const MOSER_C: f64 = 0.8;

/// The `L^{m chi^n}` norms of `max(u, k)` on the interior sets `Omega_{R_n}`.
#[derive(Clone, Debug, Serialize)]
pub struct NormLadder {
    pub exponents: Vec<f64>,
    pub radii: Vec<f64>,
    pub levels: Vec<f64>,
    /// Largest nodal value of `max(u, k)` on each interior set.
    pub maxima: Vec<f64>,
    /// Measure of each interior set.
    pub measures: Vec<f64>,
    pub sup_estimate: f64,
    pub f_norm_q: f64,
    /// `bound_factor * levels[n0]` with the constant used.
    pub bound: Option<f64>,
    pub constant: Option<f64>,
}

impl NormLadder {
    pub fn bound_holds(&self) -> Option<bool> {
        self.bound.map(|b| self.sup_estimate <= b)
    }

    /// Relative distance of level `n` from the maximum of `max(u, k)` on its set.
    pub fn relative_gap(&self, n: usize) -> f64 {
        (self.maxima[n] - self.levels[n]).abs() / self.maxima[n]
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,exponent,radius,measure,level,max")?;
        for n in 0..self.levels.len() {
            writeln!(
                w,
                "{n},{},{},{},{},{}",
                self.exponents[n], self.radii[n], self.measures[n], self.levels[n], self.maxima[n]
            )?;
        }
        Ok(())
    }
}

fn box_distance(b: [f64; 4], dim: usize, p: [f64; 2]) -> f64 {
    let dx = (p[0] - b[0]).min(b[1] - p[0]);
    if dim == 1 {
        dx
    } else {
        dx.min((p[1] - b[2]).min(b[3] - p[1]))
    }
}

/// `(int_S v^p)^{1/p}` with the vertex rule on the elements of `S`, scaled by the maximum so
/// that large `p` does not overflow.
fn vertex_norm(mesh: &Mesh, set: &[usize], ubar: &[f64], p: f64) -> (f64, f64) {
    let top = set
        .iter()
        .flat_map(|&e| mesh.element(e).iter().map(|&v| ubar[v]))
        .fold(0.0f64, f64::max);
    let share = 1.0 / (mesh.dim() + 1) as f64;
    let sum: f64 = set
        .iter()
        .map(|&e| {
            let s: f64 = mesh.element(e).iter().map(|&v| (ubar[v] / top).powf(p)).sum();
            mesh.weights()[e] * share * s
        })
        .sum();
    (top * sum.powf(1.0 / p), top)
}

/// Replays the Moser iteration on a computed solution `u` with source samples `fq`; with
/// `constant` set, also evaluates the bound `[C/(R1-R2) (1+rho)]^{1/(chi-1)} level(n0)`.
pub fn moser_ladder(u: &Field, fq: &[f64], params: &MoserParams, constant: Option<f64>) -> Result<NormLadder> {
    params.validate()?;
    let mesh = u.mesh();
    if mesh.dim() != params.dim {
        return Err(Error::Parameter(format!(
            "Moser parameters are for N = {} but the mesh has dimension {}",
            params.dim,
            mesh.dim()
        )));
    }
    let domain = params.domain.unwrap_or(mesh.bounds());
    let ubar: Vec<f64> = u.nodal().iter().map(|&x| x.max(params.k)).collect();
    let mut ladder = NormLadder {
        exponents: Vec::new(),
        radii: Vec::new(),
        levels: Vec::new(),
        maxima: Vec::new(),
        measures: Vec::new(),
        sup_estimate: 0.0,
        f_norm_q: lq_norm(fq, mesh, params.q),
        bound: None,
        constant,
    };
    for n in 0..=params.n_max {
        let r = params.radius(n);
        let p = params.exponent(n);
        let set: Vec<usize> = (0..mesh.num_elements())
            .filter(|&e| box_distance(domain, mesh.dim(), mesh.quadrature_points()[e]) >= r)
            .collect();
        if set.is_empty() {
            return Err(Error::Parameter(format!("interior set at distance {r} is empty")));
        }
        let (level, top) = vertex_norm(mesh, &set, &ubar, p);
        if !level.is_finite() {
            return Err(Error::Parameter(format!("ladder level {n} is not finite")));
        }
        ladder.exponents.push(p);
        ladder.radii.push(r);
        ladder.levels.push(level);
        ladder.maxima.push(top);
        ladder.measures.push(set.iter().map(|&e| mesh.weights()[e]).sum());
    }
    ladder.sup_estimate = *ladder.levels.last().unwrap();
    if let Some(c) = constant {
        ladder.bound = Some(params.bound_factor(c, ladder.f_norm_q) * ladder.levels[params.n0]);
    }
    Ok(ladder)
}

/// Smallest constant for which the bound covers the ladder's final level.
pub fn fit_moser_constant(ladder: &NormLadder, params: &MoserParams) -> f64 {
    let ratio = ladder.sup_estimate / ladder.levels[params.n0];
    (params.r1 - params.r2) / (1.0 + params.rho(ladder.f_norm_q)) * ratio.powf(params.chi - 1.0)
}

/// The calibration problem: `p = 1.5` power operator on the unit square, `f = 10`, `q = 4`.
pub fn moser_calibration_problem(resolution: usize, f_value: f64) -> Result<(Field, Vec<f64>, MoserParams)> {
    let mesh = build_mesh(2, resolution)?;
    let op = NFunction::power(1.5)?;
    let source = Source::Constant(f_value);
    let (u, _) = solve_reflexive(&mesh, &op, &source, &SolverConfig::default())?;
    let fq = source.sample(&mesh)?;
    Ok((u, fq, MoserParams::new(2, 1.5, 4.0)?))
}

/// Fits the Moser constant on the calibration problem.
pub fn calibrate_moser() -> Result<f64> {
    let (u, fq, params) = moser_calibration_problem(32, 10.0)?;
    let ladder = moser_ladder(&u, &fq, &params, None)?;
    Ok(fit_moser_constant(&ladder, &params))
}

/// One failed inequality in [`poincare_check`].
#[derive(Clone, Debug, Serialize)]
pub struct PoincareViolation {
    pub field: usize,
    pub inequality: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport {
    pub checked: usize,
    pub lambda1: f64,
    /// Largest `||u||_Phi / (2 d ||grad u||_Phi)` seen.
    pub worst_norm_ratio: f64,
    /// Smallest `int Phi(|grad u|) / int Phi(u)` seen, at unit Luxemburg norm.
    pub min_quotient: f64,
    pub violations: Vec<PoincareViolation>,
}

impl PoincareReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `||u||_Phi <= 2 d ||grad u||_Phi` (`d` the diameter) and
/// `lambda1 int Phi(u) <= int Phi(|grad u|)` on every field. The second inequality is tested at
/// `u / ||u||_Phi`, the scale at which `lambda1` is estimated.
pub fn poincare_check<F: OrliczFunction + ?Sized>(fields: &[Field], f: &F, lambda1: f64) -> PoincareReport {
    let mut report = PoincareReport {
        checked: fields.len(),
        lambda1,
        worst_norm_ratio: 0.0,
        min_quotient: f64::INFINITY,
        violations: Vec::new(),
    };
    for (i, u) in fields.iter().enumerate() {
        let d = u.mesh().diam();
        let lhs = u.lphi_norm(f);
        let grad = u.w1phi_norm(f);
        let rhs = 2.0 * d * grad;
        if grad > 0.0 {
            report.worst_norm_ratio = report.worst_norm_ratio.max(lhs / rhs);
        }
        if lhs > rhs * (1.0 + 1e-12) {
            report.violations.push(PoincareViolation {
                field: i,
                inequality: "||u||_Phi <= 2d ||grad u||_Phi",
                lhs,
                rhs,
            });
        }
        if lhs == 0.0 {
            continue;
        }
        let v = u.scaled(1.0 / lhs);
        let a = dirichlet_integral(&v, f);
        let b: f64 = v.at_quadrature().iter().zip(v.mesh().weights()).map(|(x, w)| w * f.value(*x)).sum();
        report.min_quotient = report.min_quotient.min(a / b);
        if lambda1 * b > a * (1.0 + 1e-12) {
            report.violations.push(PoincareViolation {
                field: i,
                inequality: "lambda1 int Phi(u) <= int Phi(|grad u|)",
                lhs: lambda1 * b,
                rhs: a,
            });
        }
    }
    report
}

/// Random Dirichlet field from a few sine modes with decaying random coefficients.
pub fn random_smooth_field(mesh: &Arc<Mesh>, seed: u64, amplitude: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .flat_map(|i| (1..=if mesh.dim() == 2 { 4 } else { 1 }).map(move |j| (i as f64, j as f64)))
        .map(|(i, j)| (i, j, rng.gen_range(-1.0..=1.0) / (i * j)))
        .collect();
    let pi = std::f64::consts::PI;
    let [x0, x1, y0, y1] = mesh.bounds();
    let dim = mesh.dim();
    Field::interpolate(mesh, |p| {
        let (sx, sy) = ((p[0] - x0) / (x1 - x0), if dim == 2 { (p[1] - y0) / (y1 - y0) } else { 0.5 });
        amplitude
            * modes
                .iter()
                .map(|&(i, j, c)| c * (i * pi * sx).sin() * if dim == 2 { (j * pi * sy).sin() } else { 1.0 })
                .sum::<f64>()
    })
}

/// A 1D problem `-Delta_Phi u = c` on `(0, 1)`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub operator: NFunction,
    pub source: f64,
}

/// Closed-form solution and derivative, when one is known.
pub fn closed_form(spec: &ProblemSpec) -> Result<impl Fn(f64) -> (f64, f64)> {
    let c = spec.source;
    let kind = match spec.operator.kind() {
        Kind::Power { p } => Some(*p),
        Kind::Logarithmic => None,
        Kind::Custom(_) => {
            return Err(Error::OracleMissing(format!(
                "no closed-form solution for {}",
                spec.operator.kind().name()
            )))
        }
    };
    if c == 0.0 {
        return Err(Error::OracleMissing("f = 0 has only the trivial solution; nothing to converge".into()));
    }
    Ok(move |x: f64| {
        let s = 0.5 - x;
        let a = s.abs();
        match kind {
            // |u'|^{p-2} u' = c (1/2 - x)
            Some(p) => {
                let pp = p / (p - 1.0);
                let scale = c.abs().powf(1.0 / (p - 1.0)) * c.signum();
                (
                    scale * (p - 1.0) / p * (0.5f64.powf(pp) - a.powf(pp)),
                    scale * s.signum() * a.powf(1.0 / (p - 1.0)),
                )
            }
            // log(1 + |u'|) sign(u') = c (1/2 - x)
            None => {
                let k = c.abs();
                let v = ((k / 2.0).exp() - (k * a).exp()) / k - (0.5 - a);
                (c.signum() * v, c.signum() * s.signum() * ((k * a).exp() - 1.0))
            }
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub h: f64,
    pub linf: f64,
    pub w1phi: f64,
    pub rate_linf: Option<f64>,
    pub rate_w1phi: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateTable {
    pub problem: String,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log error` against `log h`.
    pub fitted_linf: f64,
    pub fitted_w1phi: f64,
}

impl RateTable {
    pub fn linf_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].linf < w[0].linf)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,h,linf_error,w1phi_error,rate_linf,rate_w1phi")?;
        let opt = |r: Option<f64>| r.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{},{}", r.n, r.h, r.linf, r.w1phi, opt(r.rate_linf), opt(r.rate_w1phi))?;
        }
        Ok(())
    }
}

fn fitted_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Errors are measured at nodes and element midpoints (`L^inf`) and as the Luxemburg norm of
/// the gradient error (`W^{1,Phi}`), sampled at four Gauss points per element: at the midpoint
/// alone the 1D flux is exact for constant data and the error would be invisible.
fn measure_errors(u: &Field, f: &NFunction, exact: &impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    const GAUSS: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    let mesh = u.mesh();
    let mut linf = 0.0f64;
    for (i, v) in u.nodal().iter().enumerate() {
        linf = linf.max((v - exact(mesh.node(i)[0]).0).abs());
    }
    let uq = u.at_quadrature();
    let grads = u.gradient_field();
    let mut weights = Vec::with_capacity(4 * uq.len());
    let mut gerr = Vec::with_capacity(4 * uq.len());
    for (e, p) in mesh.quadrature_points().iter().enumerate() {
        linf = linf.max((uq[e] - exact(p[0]).0).abs());
        let w = mesh.weights()[e];
        for (xi, gw) in GAUSS {
            let x = p[0] + 0.5 * w * xi;
            weights.push(0.5 * w * gw);
            gerr.push((grads[e][0] - exact(x).1).abs());
        }
    }
    let space = SampledMeasureSpace::new(weights, gerr).expect("positive weights");
    (linf, crate::nfunc::luxemburg_norm(&space, f))
}

/// Solves `spec` on each 1D resolution and tabulates errors against the closed form.
/// Operators with `l = 1` go through continuation down to `eps = 2^{-20}`.
pub fn convergence_study(spec: &ProblemSpec, resolutions: &[usize]) -> Result<RateTable> {
    let exact = closed_form(spec)?;
    if resolutions.len() < 2 {
        return Err(Error::Parameter("a convergence study needs at least two meshes".into()));
    }
    let mut rows: Vec<RateRow> = Vec::new();
    for &n in resolutions {
        let mesh = build_mesh(1, n)?;
        let source = Source::Constant(spec.source);
        let u = if spec.operator.lower_index() > 1.0 {
            solve_reflexive(&mesh, &spec.operator, &source, &SolverConfig::default())?.0
        } else {
            let schedule = ContinuationSchedule::geometric(20)?;
            solve_continuation(&mesh, &spec.operator, &source, &schedule, &ContinuationConfig::default())?.0
        };
        let (linf, w1phi) = measure_errors(&u, &spec.operator, &exact);
        let h = 1.0 / n as f64;
        let (rate_linf, rate_w1phi) = match rows.last() {
            Some(prev) => {
                let lh = (prev.h / h).ln();
                (Some((prev.linf / linf).ln() / lh), Some((prev.w1phi / w1phi).ln() / lh))
            }
            None => (None, None),
        };
        rows.push(RateRow { n, h, linf, w1phi, rate_linf, rate_w1phi });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let fitted_linf = fitted_slope(&hs, &rows.iter().map(|r| r.linf).collect::<Vec<_>>());
    let fitted_w1phi = fitted_slope(&hs, &rows.iter().map(|r| r.w1phi).collect::<Vec<_>>());
    Ok(RateTable {
        problem: format!("{} with f = {}", spec.operator.kind().name(), spec.source),
        rows,
        fitted_linf,
        fitted_w1phi,
    })
}
