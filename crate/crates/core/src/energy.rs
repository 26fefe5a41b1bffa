//! Energies, weak-form residuals and Hessian actions on P1 fields.
//!
//! All quantities use the one-point element rule of [`crate::grid`], so the residual is
//! the exact gradient of the discrete energy and the Hessian its exact second derivative.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};
use crate::linalg::BandedSym;
use crate::nfunc::OrliczFunction;
use crate::nonlin::{Nonlinearity, Variant};

/// Below this many elements, element loops run serially.
const PAR_THRESHOLD: usize = 4096;

/// Relative gradient threshold under which the Hessian uses the isotropic limit.
pub const GRADIENT_TAU: f64 = 1e-12;

/// Element-indexed map; parallel for large meshes, always in element order.
pub(crate) fn per_element<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Right-hand side `f` of the linear problem.
#[derive(Clone)]
pub enum Source {
    Constant(f64),
    /// `c * prod_i sin(pi x_i)` over the mesh dimensions.
    Sine(f64),
    /// Values at the quadrature points.
    Quadrature(Vec<f64>),
    /// Nodal values, evaluated at quadrature points by P1 interpolation.
    Nodal(Vec<f64>),
    Function(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Constant(c) => write!(f, "Constant({c})"),
            Source::Sine(c) => write!(f, "Sine({c})"),
            Source::Quadrature(v) => write!(f, "Quadrature({} values)", v.len()),
            Source::Nodal(v) => write!(f, "Nodal({} values)", v.len()),
            Source::Function(_) => write!(f, "Function"),
        }
    }
}

impl Source {
    /// Parses `const:<c>`; `sin:<c>` gives `c * prod sin(pi x_i)` on the unit cell.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("bad source amplitude '{s}': {e}")))
        };
        if let Some(c) = spec.strip_prefix("const:") {
            return Ok(Source::Constant(num(c)?));
        }
        if let Some(c) = spec.strip_prefix("sin:") {
            return Ok(Source::Sine(num(c)?));
        }
        Err(Error::Parameter(format!("unknown source '{spec}' (expected const:<c> or sin:<c>)")))
    }

    /// Values at the quadrature points of `mesh`.
    pub fn sample(&self, mesh: &Arc<Mesh>) -> Result<Vec<f64>> {
        let ne = mesh.num_elements();
        match self {
            Source::Constant(c) => Ok(vec![*c; ne]),
            Source::Sine(c) => {
                let pi = std::f64::consts::PI;
                let dim = mesh.dim();
                Ok(mesh
                    .quadrature_points()
                    .iter()
                    .map(|p| p[..dim].iter().fold(*c, |acc, x| acc * (pi * x).sin()))
                    .collect())
            }
            Source::Quadrature(v) => {
                if v.len() != ne {
                    return Err(Error::Parameter(format!("{} source values for {ne} elements", v.len())));
                }
                Ok(v.clone())
            }
            Source::Nodal(v) => Ok(Field::from_nodal(mesh, v.clone(), false)?.at_quadrature()),
            Source::Function(f) => Ok(mesh.quadrature_points().iter().map(|&p| f(p)).collect()),
        }
    }
}

/// Quadrature `L^q` norm of sampled values.
pub fn lq_norm(values: &[f64], mesh: &Mesh, q: f64) -> f64 {
    if q.is_infinite() {
        return crate::linalg::norm_inf(values);
    }
    values
        .iter()
        .zip(mesh.weights())
        .map(|(v, w)| w * v.abs().powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// `total = dirichlet_part - load_part`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyValue {
    pub total: f64,
    pub dirichlet_part: f64,
    pub load_part: f64,
}

impl EnergyValue {
    fn new(dirichlet_part: f64, load_part: f64) -> Self {
        EnergyValue {
            total: dirichlet_part - load_part,
            dirichlet_part,
            load_part,
        }
    }
}

fn norm2(g: [f64; 2]) -> f64 {
    (g[0] * g[0] + g[1] * g[1]).sqrt()
}

/// `int Phi(|grad u|)`.
pub fn dirichlet_integral<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> f64 {
    let grads = u.gradient_field();
    let w = u.mesh().weights();
    let vals = per_element(grads.len(), |e| w[e] * f.value(norm2(grads[e])));
    vals.iter().sum()
}

/// `I(u) = int Phi(|grad u|) - int f u`, `fq` sampled at quadrature points.
pub fn energy_linear<F: OrliczFunction + ?Sized>(u: &Field, f: &F, fq: &[f64]) -> EnergyValue {
    let uq = u.at_quadrature();
    let load: f64 = uq
        .iter()
        .zip(fq)
        .zip(u.mesh().weights())
        .map(|((u, f), w)| w * u * f)
        .sum();
    EnergyValue::new(dirichlet_integral(u, f), load)
}

/// Principal part `<-Delta_Phi u, v_i>` for every free node.
fn principal_residual<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> Vec<f64> {
    let mesh = u.mesh();
    let grads = u.gradient_field();
    let flux = per_element(grads.len(), |e| {
        let g = grads[e];
        let t = norm2(g);
        let c = if t == 0.0 { 0.0 } else { f.density(t) / t };
        [c * g[0], c * g[1]]
    });
    let mut r = vec![0.0; mesh.num_free()];
    for (e, q) in flux.iter().enumerate() {
        let w = mesh.weights()[e];
        for (a, &v) in mesh.element(e).iter().enumerate() {
            if let Some(i) = mesh.free_index(v) {
                let bg = mesh.basis_gradients(e)[a];
                r[i] += w * (q[0] * bg[0] + q[1] * bg[1]);
            }
        }
    }
    r
}

/// Subtracts `int s(x) v_i` for element-wise values `s` at the quadrature points.
fn subtract_load(mesh: &Mesh, sq: &[f64], r: &mut [f64]) {
    let c = mesh.basis_at_quadrature();
    for (e, s) in sq.iter().enumerate() {
        let w = mesh.weights()[e] * c * s;
        for &v in mesh.element(e) {
            if let Some(i) = mesh.free_index(v) {
                r[i] -= w;
            }
        }
    }
}

/// Weak-form residual `int phi(|grad u|) grad u . grad v_i - int f v_i` per free node.
pub fn residual_linear<F: OrliczFunction + ?Sized>(u: &Field, f: &F, fq: &[f64]) -> Vec<f64> {
    let mut r = principal_residual(u, f);
    subtract_load(u.mesh(), fq, &mut r);
    r
}

/// `<-Delta_Phi u, w> = int phi(|grad u|) grad u . grad w`.
pub fn operator_pairing<F: OrliczFunction + ?Sized>(u: &Field, f: &F, w: &Field) -> Result<f64> {
    u.check_same_mesh(w)?;
    let gu = u.gradient_field();
    let gw = w.gradient_field();
    let wts = u.mesh().weights();
    Ok((0..gu.len())
        .map(|e| {
            let t = norm2(gu[e]);
            let c = if t == 0.0 { 0.0 } else { f.density(t) / t };
            wts[e] * c * (gu[e][0] * gw[e][0] + gu[e][1] * gw[e][1])
        })
        .sum())
}

fn gradient_floor(grads: &[[f64; 2]], mesh: &Mesh) -> f64 {
    let mean = grads
        .iter()
        .zip(mesh.weights())
        .map(|(g, w)| w * norm2(*g))
        .sum::<f64>()
        / mesh.measure();
    GRADIENT_TAU * mean
}

/// Linearized flux tensor `phi Id + (phi'(t)/t) g g^T` at gradient `g`.
fn flux_tensor<F: OrliczFunction + ?Sized>(f: &F, g: [f64; 2], tau: f64) -> [[f64; 2]; 2] {
    let t = norm2(g);
    if t <= tau || t == 0.0 {
        // isotropic limit; an infinite phi(0+) is replaced by its value at the floor
        let p = f.phi_floor(t, tau.max(1e-12));
        return [[p, 0.0], [0.0, p]];
    }
    let p = f.phi(t);
    let c = (f.density_slope(t) - p) / (t * t);
    [
        [p + c * g[0] * g[0], c * g[0] * g[1]],
        [c * g[0] * g[1], p + c * g[1] * g[1]],
    ]
}

fn tensors<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> Vec<[[f64; 2]; 2]> {
    let grads = u.gradient_field();
    let tau = gradient_floor(&grads, u.mesh());
    per_element(grads.len(), |e| flux_tensor(f, grads[e], tau))
}

/// Action of the principal-part Hessian at `u` on `w`, per free node.
pub fn hessian_apply<F: OrliczFunction + ?Sized>(u: &Field, f: &F, w: &Field) -> Result<Vec<f64>> {
    u.check_same_mesh(w)?;
    let mesh = u.mesh();
    let ts = tensors(u, f);
    let gw = w.gradient_field();
    let mut out = vec![0.0; mesh.num_free()];
    for (e, t) in ts.iter().enumerate() {
        let q = [
            t[0][0] * gw[e][0] + t[0][1] * gw[e][1],
            t[1][0] * gw[e][0] + t[1][1] * gw[e][1],
        ];
        let wt = mesh.weights()[e];
        for (a, &v) in mesh.element(e).iter().enumerate() {
            if let Some(i) = mesh.free_index(v) {
                let bg = mesh.basis_gradients(e)[a];
                out[i] += wt * (q[0] * bg[0] + q[1] * bg[1]);
            }
        }
    }
    Ok(out)
}

/// Assembled principal-part Hessian on the free nodes.
pub fn hessian_assemble<F: OrliczFunction + ?Sized>(u: &Field, f: &F) -> BandedSym {
    let mesh = u.mesh();
    let ts = tensors(u, f);
    let mut h = BandedSym::zeros(mesh.num_free(), mesh.bandwidth());
    for (e, t) in ts.iter().enumerate() {
        let wt = mesh.weights()[e];
        let bgs = mesh.basis_gradients(e);
        for (a, &va) in mesh.element(e).iter().enumerate() {
            let Some(ia) = mesh.free_index(va) else { continue };
            let ta = [
                t[0][0] * bgs[a][0] + t[0][1] * bgs[a][1],
                t[1][0] * bgs[a][0] + t[1][1] * bgs[a][1],
            ];
            for (b, &vb) in mesh.element(e).iter().enumerate() {
                let Some(ib) = mesh.free_index(vb) else { continue };
                if ib > ia {
                    continue;
                }
                h.add(ia, ib, wt * (ta[0] * bgs[b][0] + ta[1] * bgs[b][1]));
            }
        }
    }
    h
}

/// `J(u) = int Phi_eps(|grad u|) - int G(u)`, with `G^+`/`G^-` for the truncated variants.
pub fn energy_superlinear<F: OrliczFunction + ?Sized>(
    u: &Field,
    f: &F,
    nl: &Nonlinearity,
    variant: Variant,
) -> EnergyValue {
    let uq = u.at_quadrature();
    let load: f64 = uq
        .iter()
        .zip(u.mesh().weights())
        .map(|(u, w)| w * nl.big_g_variant(*u, variant))
        .sum();
    EnergyValue::new(dirichlet_integral(u, f), load)
}

/// Residual of the superlinear weak form: `int phi(|grad u|) grad u . grad v_i - int g(u) v_i`.
pub fn residual_superlinear<F: OrliczFunction + ?Sized>(
    u: &Field,
    f: &F,
    nl: &Nonlinearity,
    variant: Variant,
) -> Vec<f64> {
    let mut r = principal_residual(u, f);
    let gq: Vec<f64> = u.at_quadrature().iter().map(|&t| nl.g_variant(t, variant)).collect();
    subtract_load(u.mesh(), &gq, &mut r);
    r
}

/// Action of the full Hessian of `J` (principal part minus `g'(u)` mass term) on `w`.
pub fn hessian_apply_superlinear<F: OrliczFunction + ?Sized>(
    u: &Field,
    f: &F,
    nl: &Nonlinearity,
    variant: Variant,
    w: &Field,
) -> Result<Vec<f64>> {
    let mut out = hessian_apply(u, f, w)?;
    let mesh = u.mesh();
    let c = mesh.basis_at_quadrature();
    let uq = u.at_quadrature();
    let wq = w.at_quadrature();
    for e in 0..mesh.num_elements() {
        let s = mesh.weights()[e] * nl.dg_variant(uq[e], variant) * wq[e] * c;
        for &v in mesh.element(e) {
            if let Some(i) = mesh.free_index(v) {
                out[i] -= s;
            }
        }
    }
    Ok(out)
}

/// Assembled Hessian of `J`; indefinite near mountain-pass points.
pub fn hessian_assemble_superlinear<F: OrliczFunction + ?Sized>(
    u: &Field,
    f: &F,
    nl: &Nonlinearity,
    variant: Variant,
) -> BandedSym {
    let mut h = hessian_assemble(u, f);
    let mesh = u.mesh();
    let c = mesh.basis_at_quadrature();
    for (e, t) in u.at_quadrature().iter().enumerate() {
        let s = mesh.weights()[e] * nl.dg_variant(*t, variant) * c * c;
        for &va in mesh.element(e) {
            let Some(ia) = mesh.free_index(va) else { continue };
            for &vb in mesh.element(e) {
                match mesh.free_index(vb) {
                    Some(ib) if ib <= ia => h.add(ia, ib, -s),
                    _ => {}
                }
            }
        }
    }
    h
}

/// `int Gbar(u)` with `Gbar(t) = t g(t) - m G(t)`.
pub fn gbar_integral(u: &Field, nl: &Nonlinearity, m: f64) -> f64 {
    u.at_quadrature()
        .iter()
        .zip(u.mesh().weights())
        .map(|(t, w)| w * nl.gbar(*t, m))
        .sum()
}
