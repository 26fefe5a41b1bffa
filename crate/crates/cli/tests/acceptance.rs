//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero on
//! any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use orlicz_core::dirichlet::{estimate_lambda1, s_plus_diagnostic, solve_continuation_from, Lambda1Config};
use orlicz_core::energy::{energy_linear, energy_superlinear, residual_linear, residual_superlinear};
use orlicz_core::nfunc::{
    conjugate_eval, index_ratio, log_grid, luxemburg_norm, modular, SampledDensity, SampledMeasureSpace, Zeta,
};
use orlicz_core::nonlin::SampledNonlinearity;
use orlicz_core::verify::{moser_calibration_problem, random_smooth_field, MOSER_C};
use orlicz_core::{
    build_mesh, moser_ladder, mountain_pass_solve, poincare_check, solve_continuation, solve_reflexive, zeta_bounds,
    ContinuationConfig, ContinuationSchedule, Field, Mesh, MoserParams, MountainPassConfig, NFunction, NormLadder,
    Nonlinearity, OrliczFunction, RegularizedNFunction, SolverConfig, Source, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn core<T>(r: orlicz_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn power(p: f64) -> NFunction {
    NFunction::power(p).unwrap()
}

fn poisson_oracle() -> Outcome {
    let mesh = core(build_mesh(1, 64))?;
    let start = Instant::now();
    let (u, _) = core(solve_reflexive(&mesh, &power(2.0), &Source::Constant(1.0), &SolverConfig::default()))?;
    let elapsed = start.elapsed().as_secs_f64();
    let err = (0..mesh.num_nodes())
        .map(|i| {
            let x = mesh.node(i)[0];
            (u.nodal()[i] - x * (1.0 - x) / 2.0).abs()
        })
        .fold(0.0, f64::max);
    ensure!(err <= 1e-4, "sup error {err:e} > 1e-4");
    ensure!(elapsed < 1.0, "runtime {elapsed:.3} s");
    Ok(format!("sup error {err:.2e}, {elapsed:.3} s"))
}

fn p_laplacian_oracle() -> Outcome {
    let mesh = core(build_mesh(1, 128))?;
    let start = Instant::now();
    let (u, _) = core(solve_reflexive(&mesh, &power(3.0), &Source::Constant(1.0), &SolverConfig::default()))?;
    let elapsed = start.elapsed().as_secs_f64();
    let exact = 2.0 / 3.0 * 0.5f64.powf(1.5);
    let err = (u.nodal()[64] - exact).abs();
    ensure!(err <= 1e-3, "midpoint error {err:e}");
    ensure!(elapsed < 5.0, "runtime {elapsed:.3} s");
    Ok(format!("midpoint error {err:.2e}, {elapsed:.3} s"))
}

fn log_setup() -> (Arc<Mesh>, NFunction, Source, ContinuationSchedule, ContinuationConfig) {
    (
        build_mesh(1, 128).unwrap(),
        NFunction::logarithmic(),
        Source::Constant(1.0),
        ContinuationSchedule::geometric(10).unwrap(),
        ContinuationConfig::default(),
    )
}

fn continuation() -> Outcome {
    let (mesh, f, src, sched, cfg) = log_setup();
    let (u, rep) = core(solve_continuation(&mesh, &f, &src, &sched, &cfg))?;
    let err = (u.nodal()[64] - (0.5f64.exp() - 1.5)).abs();
    ensure!(err <= 1e-3, "u(1/2) error {err:e}");
    let r = rep.a_priori.as_ref().ok_or("no a-priori bound")?.r;
    let worst = rep.bound_monitor().iter().map(|b| b.max()).fold(0.0, f64::max);
    ensure!(worst <= r, "bound monitor {worst:e} exceeds R = {r:e}");
    let verdict = s_plus_diagnostic(&rep);
    ensure!(verdict.pass, "S+ diagnostic failed: {verdict:?}");
    Ok(format!(
        "u(1/2) error {err:.2e}, monitor max {worst:.3e} <= R = {r:.3e}, limsup pairing {:.2e}",
        verdict.limsup_pairing
    ))
}

fn uniqueness() -> Outcome {
    let (mesh, f, src, sched, cfg) = log_setup();
    let sols: Vec<Field> = (0..3)
        .map(|seed| {
            let init = random_smooth_field(&mesh, 1000 + seed, 1.0);
            core(solve_continuation_from(&mesh, &f, &src, &sched, &cfg, Some(&init))).map(|r| r.0)
        })
        .collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            worst = worst.max(core(sols[i].combine(1.0, &sols[j], -1.0))?.w1phi_norm(&f));
        }
    }
    ensure!(worst <= 10.0 * cfg.inner.tol, "pairwise distance {worst:e}");
    Ok(format!("max pairwise W1Phi distance {worst:.2e}"))
}

fn property_operators() -> Vec<(&'static str, Box<dyn OrliczFunction>)> {
    vec![
        ("power 1.5", Box::new(power(1.5))),
        ("power 2", Box::new(power(2.0))),
        ("power 3", Box::new(power(3.0))),
        ("logarithmic", Box::new(NFunction::logarithmic())),
        ("custom", Box::new(custom_operator())),
        ("log eps=0.01", Box::new(RegularizedNFunction::new(NFunction::logarithmic(), 0.01).unwrap())),
    ]
}

fn custom_operator() -> NFunction {
    let t = log_grid(1e-3, 1e3, 80);
    let phi: Vec<f64> = t.iter().map(|x| 1.0 + x.sqrt()).collect();
    NFunction::custom(SampledDensity::new("1+sqrt(t)", &t, &phi).unwrap()).unwrap()
}

fn property_suite() -> Outcome {
    const SAMPLES: usize = 10_000;
    let ops = property_operators();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = Vec::new();
    for k in 0..SAMPLES {
        let (name, f) = &ops[k % ops.len()];
        let (l, m) = (f.lower_index(), f.upper_index());
        let s = 10f64.powf(rng.gen_range(-3.0..2.0));
        // the logarithmic conjugate leaves f64 beyond t ~ 700
        let t = 10f64.powf(rng.gen_range(-3.0..2.0));
        let rho = 10f64.powf(rng.gen_range(-2.0..2.0));

        let young = f.value(s) + conjugate_eval(f.as_ref(), t).unwrap() - s * t;
        if young < -1e-8 * (1.0 + s * t) {
            violations.push(format!("{name}: Young residual {young:e} at s={s}, t={t}"));
        }

        let z0 = zeta_bounds(l, m, Zeta::Z0, rho, None).unwrap();
        let z1 = zeta_bounds(l, m, Zeta::Z1, rho, None).unwrap();
        let (mid, base) = (f.value(rho * t), f.value(t));
        if z0 * base > mid * (1.0 + 1e-8) || mid > z1 * base * (1.0 + 1e-8) {
            violations.push(format!("{name}: zeta sandwich at rho={rho}, t={t}"));
        }

        let d = f.density(t);
        if d <= 100.0 {
            let lhs = conjugate_eval(f.as_ref(), d).unwrap();
            if lhs > f.value(2.0 * t) * (1.0 + 1e-9) + 1e-14 {
                violations.push(format!("{name}: conjugate of density at t={t}"));
            }
        }

        let n = rng.gen_range(1..12);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let values: Vec<f64> = (0..n).map(|_| rho * rng.gen_range(-10.0..10.0)).collect();
        let space = SampledMeasureSpace::new(weights, values).unwrap();
        let norm = luxemburg_norm(&space, f.as_ref());
        if norm > 0.0 {
            let integral = modular(&space, f.as_ref(), 1.0);
            let lo = zeta_bounds(l, m, Zeta::Z0, norm, None).unwrap();
            let hi = zeta_bounds(l, m, Zeta::Z1, norm, None).unwrap();
            if lo > integral * (1.0 + 1e-8) || integral > hi * (1.0 + 1e-8) {
                violations.push(format!("{name}: Luxemburg bracket {lo:e} <= {integral:e} <= {hi:e}"));
            }
        }
    }
    ensure!(violations.is_empty(), "{} violations, first: {}", violations.len(), violations[0]);
    Ok(format!("{SAMPLES} samples x 4 inequalities, 0 violations"))
}

fn regularized_index() -> Outcome {
    let ladder: Vec<f64> = (0..=40).map(|k| 2f64.powi(-k)).collect();
    let grid = log_grid(1e-4, 1e6, 400);
    let mut prev = f64::INFINITY;
    for &eps in &ladder {
        let f = core(RegularizedNFunction::new(NFunction::logarithmic(), eps))?;
        let expected = 1.0 + 2.0 * eps / (2.0 * eps + 2.0);
        let got = f.ell_eps();
        ensure!((got - expected).abs() <= 1e-12, "eps={eps}: l_eps {got} vs {expected}");
        ensure!(got < prev && got > 1.0, "eps={eps}: l_eps not strictly decreasing above 1");
        prev = got;
        let inf = grid.iter().map(|&t| index_ratio(&f, t)).fold(f64::INFINITY, f64::min);
        ensure!(inf >= got - 1e-6, "eps={eps}: index ratio {inf} below l_eps {got}");
    }
    ensure!(prev - 1.0 < 1e-11, "l_eps does not approach 1: {prev}");
    Ok(format!("{} rungs, l_eps(2^-40) - 1 = {:.1e}", ladder.len(), prev - 1.0))
}

fn eigenvalue_and_poincare() -> Outcome {
    let quad = power(2.0);
    let l1 = core(estimate_lambda1(&core(build_mesh(1, 64))?, &quad, &Lambda1Config::default()))?.value;
    let e1 = (l1 / (PI * PI) - 1.0).abs();
    ensure!(e1 <= 0.01, "1D lambda1 {l1} off by {:.2}%", 100.0 * e1);
    let l2 = core(estimate_lambda1(&core(build_mesh(2, 24))?, &quad, &Lambda1Config::default()))?.value;
    let e2 = (l2 / (2.0 * PI * PI) - 1.0).abs();
    ensure!(e2 <= 0.02, "2D lambda1 {l2} off by {:.2}%", 100.0 * e2);

    let mut checked = 0;
    for dim in [1, 2] {
        let mesh = core(build_mesh(dim, if dim == 1 { 64 } else { 16 }))?;
        for f in [power(2.0), power(3.0), NFunction::logarithmic()] {
            let lambda = core(estimate_lambda1(&mesh, &f, &Lambda1Config::default()))?.value;
            let amps = [0.01, 0.1, 1.0, 10.0];
            let fields: Vec<Field> =
                (0..100u64).map(|i| random_smooth_field(&mesh, i, amps[i as usize % amps.len()])).collect();
            let rep = poincare_check(&fields, &f, lambda);
            ensure!(rep.passed(), "{} in {dim}D: {:?}", f.kind().name(), rep.violations.first());
            checked += rep.checked;
        }
    }
    Ok(format!(
        "lambda1 = {l1:.4} ({:.2}%), {l2:.4} ({:.2}%); {checked} Poincare fields",
        100.0 * e1,
        100.0 * e2
    ))
}

/// `u_max` of the positive solution of `-u'' = u^3` on `(0, 1)`: `v'' = -v^3`, `v(0) = 0`,
/// `v'(0) = 1` has first zero `X`, and `u(x) = X v(X x)` peaks at `X 2^{1/4}`.
fn shooting_umax() -> f64 {
    let rhs = |y: [f64; 2]| [y[1], -y[0].powi(3)];
    let (mut x, mut y, h) = (0.0, [0.0f64, 1.0f64], 1e-4);
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
            return (x + h * y[0] / (y[0] - next[0])) * 2f64.powf(0.25);
        }
        y = next;
        x += h;
    }
}

fn mountain_pass() -> Outcome {
    let mesh = core(build_mesh(1, 128))?;
    let f = core(RegularizedNFunction::new(power(2.0), 1e-4))?;
    let nl = core(Nonlinearity::power(4.0))?;
    let cfg = MountainPassConfig::default();
    let (u, rep) = core(mountain_pass_solve(&f, &nl, Variant::Full, &mesh, &cfg))?;
    let oracle = shooting_umax();
    let sup = u.sup_norm();
    ensure!((sup - oracle).abs() <= 1e-2, "sup {sup} vs shooting {oracle}");
    let r0 = rep.geometry.as_ref().ok_or("no geometry certificate")?.r0;
    let level = energy_superlinear(&u, &f, &nl, Variant::Full).total;
    ensure!(r0 > 0.0 && level >= r0, "J = {level} vs r0 = {r0}");

    let (up, _) = core(mountain_pass_solve(&f, &nl, Variant::Plus, &mesh, &cfg))?;
    let (um, _) = core(mountain_pass_solve(&f, &nl, Variant::Minus, &mesh, &cfg))?;
    ensure!(up.nodal().iter().all(|&v| v >= 0.0) && up.max() > 0.0, "u+ is not nonnegative");
    ensure!(um.nodal().iter().all(|&v| v <= 0.0) && um.min() < 0.0, "u- is not nonpositive");
    let jp = energy_superlinear(&up, &f, &nl, Variant::Plus).total;
    let jm = energy_superlinear(&um, &f, &nl, Variant::Minus).total;
    ensure!(jp > 0.0 && jm > 0.0, "J+ = {jp}, J- = {jm}");
    let odd = core(up.combine(1.0, &um, 1.0))?.sup_norm();
    ensure!(odd <= 1e-6, "u- + u+ = {odd:e}");
    Ok(format!(
        "sup {sup:.5} vs shooting {oracle:.5}; J = {level:.4} >= r0 = {r0:.3e}; J+ = {jp:.4}, J- = {jm:.4}; oddness {odd:.1e}"
    ))
}

fn moser() -> Outcome {
    let params = core(MoserParams::new(2, 1.5, 4.0))?;
    ensure!(params.chi == 4.0, "chi = {}", params.chi);
    ensure!(params.beta == 1.0 / 3.0, "beta = {}", params.beta);

    let mut ladders = Vec::new();
    for f_value in [10.0, 20.0] {
        let (u, fq, params) = core(moser_calibration_problem(32, f_value))?;
        let ladder = core(moser_ladder(&u, &fq, &params, Some(MOSER_C)))?;
        ensure!(ladder.bound_holds() == Some(true), "f = {f_value}: sup {} above bound {:?}", ladder.sup_estimate, ladder.bound);
        ladders.push((params, ladder));
    }
    let gap = ladders[0].1.relative_gap(6);
    ensure!(gap < 0.01, "level 6 is {:.2}% from the discrete max", 100.0 * gap);

    // doubling f multiplies rho by 2^beta, and the prefactor by ((1 + 2^beta rho)/(1 + rho))^(1/(chi-1))
    let (p, a) = (&ladders[0].0, &ladders[0].1);
    let b = &ladders[1].1;
    let rho = p.rho(a.f_norm_q);
    ensure!((p.rho(b.f_norm_q) / rho - 2f64.powf(p.beta)).abs() < 1e-12, "rho does not scale as ||f||^beta");
    let factor = |l: &NormLadder| l.bound.unwrap() / l.levels[p.n0];
    let predicted = ((1.0 + 2f64.powf(p.beta) * rho) / (1.0 + rho)).powf(1.0 / (p.chi - 1.0));
    let observed = factor(b) / factor(a);
    ensure!((observed / predicted - 1.0).abs() < 1e-12, "prefactor ratio {observed} vs {predicted}");
    Ok(format!(
        "chi = 4, beta = 1/3; gap(6) = {:.3}%; sup/bound = {:.3}, {:.3} with C = {MOSER_C}",
        100.0 * gap,
        a.sup_estimate / a.bound.unwrap(),
        b.sup_estimate / b.bound.unwrap()
    ))
}

fn custom_nonlinearity() -> Nonlinearity {
    let t = log_grid(1e-3, 1e3, 80);
    let g: Vec<f64> = t.iter().map(|x| x.powi(3) + x * x).collect();
    Nonlinearity::custom(SampledNonlinearity::new("t^3 + t^2", &t, &g).unwrap())
}

/// Largest relative mismatch between `r . w` and the centred difference of the energy along `w`.
fn fd_mismatch(energy: impl Fn(&Field) -> f64, residual: &[f64], u: &Field, w: &Field) -> f64 {
    let h = 1e-5;
    let plus = u.combine(1.0, w, h).unwrap();
    let minus = u.combine(1.0, w, -h).unwrap();
    let fd = (energy(&plus) - energy(&minus)) / (2.0 * h);
    let exact: f64 = residual.iter().zip(w.free_values()).map(|(r, w)| r * w).sum();
    (fd - exact).abs() / exact.abs().max(1.0)
}

fn gradient_consistency() -> Outcome {
    let ops: Vec<(&str, NFunction)> = vec![
        ("power:p=1.5", power(1.5)),
        ("power:p=2", power(2.0)),
        ("power:p=4", power(4.0)),
        ("logarithmic", NFunction::logarithmic()),
        ("custom", custom_operator()),
    ];
    let nls: Vec<(&str, Nonlinearity)> = vec![
        ("zero", Nonlinearity::zero()),
        ("power:q=4", core(Nonlinearity::power(4.0))?),
        ("powerlog:m=2", core(Nonlinearity::power_log(2.0))?),
        ("custom", custom_nonlinearity()),
    ];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for dim in [1, 2] {
        let mesh = core(build_mesh(dim, if dim == 1 { 32 } else { 8 }))?;
        let fq = core(Source::Sine(2.0).sample(&mesh))?;
        for seed in 0..3u64 {
            let u = Field::random(&mesh, seed, 1.0);
            let w = Field::random(&mesh, seed + 50, 1.0);
            for (oname, op) in &ops {
                let r = residual_linear(&u, op, &fq);
                let d = fd_mismatch(|v| energy_linear(v, op, &fq).total, &r, &u, &w);
                ensure!(d <= 1e-6, "{oname} {dim}D linear: {d:e}");
                worst = worst.max(d);
                cases += 1;
                let reg = core(RegularizedNFunction::new(op.clone(), 1e-3))?;
                for (nname, nl) in &nls {
                    for variant in [Variant::Full, Variant::Plus, Variant::Minus] {
                        let r = residual_superlinear(&u, &reg, nl, variant);
                        let d = fd_mismatch(|v| energy_superlinear(v, &reg, nl, variant).total, &r, &u, &w);
                        ensure!(d <= 1e-6, "{oname} + {nname} ({}) {dim}D: {d:e}", variant.name());
                        worst = worst.max(d);
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{cases} cases, worst relative mismatch {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 Poisson oracle", poisson_oracle),
        ("2 p-Laplacian oracle", p_laplacian_oracle),
        ("3 nonreflexive continuation", continuation),
        ("4 uniqueness", uniqueness),
        ("5 N-function property suite", property_suite),
        ("6 regularized lower index", regularized_index),
        ("7 lambda1 and Poincare", eigenvalue_and_poincare),
        ("8 mountain pass", mountain_pass),
        ("9 Moser ladder", moser),
        ("10 gradient consistency", gradient_consistency),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name} ({secs:.2} s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  criterion {name} ({secs:.2} s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
