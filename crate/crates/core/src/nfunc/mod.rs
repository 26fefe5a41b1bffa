//! N-function calculus.
//!
//! An N-function is generated by a density `phi` through `Phi(t) = int_0^t s phi(s) ds`.
//! The catalog offers the power family `Phi(t) = t^p / p`, the logarithmic function
//! `Phi(t) = (1 + t) log(1 + t) - t` (whose conjugate fails the Delta_2 condition) and
//! user tables of `(t, phi(t))` interpolated with a monotone cubic.
//!
//! Every constructor validates the standing hypotheses on a log-spaced sample grid and
//! reports the first violated one together with a witness abscissa.

mod custom;
mod norms;
mod regularized;

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use custom::SampledDensity;
pub(crate) use custom::parse_two_columns;
pub use norms::{
    conjugate_delta2_ratios, conjugate_eval, conjugate_eval_with, delta2_sup, luxemburg_norm,
    modular, zeta_bounds, SampledMeasureSpace, Zeta, CONJUGATE_MAX_BRACKET,
};
pub use regularized::{regularized_lower_index, RegularizedNFunction};

/// Evaluation interface shared by N-functions and their regularizations.
///
/// Arguments are magnitudes; `value` is even in its argument.
pub trait OrliczFunction: Send + Sync {
    /// `phi(t)` for `t >= 0`, with `phi(0)` defined by its limit (possibly infinite).
    fn phi(&self, t: f64) -> f64;

    /// Derivative of the density, `(t phi(t))'`.
    fn density_slope(&self, t: f64) -> f64;

    /// `Phi(|t|)`.
    fn value(&self, t: f64) -> f64;

    /// Lower growth index `l` (inf of `t^2 phi / Phi`).
    fn lower_index(&self) -> f64;

    /// Upper growth index `m`.
    fn upper_index(&self) -> f64;

    /// Density `t phi(t) = Phi'(t)`, extended by 0 at the origin.
    fn density(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            0.0
        } else {
            t * self.phi(t)
        }
    }

    /// `phi` clamped away from the origin, for linearizations where `phi(0+)` may diverge.
    fn phi_floor(&self, t: f64, floor: f64) -> f64 {
        let v = self.phi(t);
        if v.is_finite() {
            v
        } else {
            self.phi(t.max(floor))
        }
    }
}

/// Catalog tag of an [`NFunction`].
#[derive(Clone, Debug)]
pub enum Kind {
    Power { p: f64 },
    Logarithmic,
    Custom(Arc<SampledDensity>),
}

impl Kind {
    pub fn name(&self) -> String {
        match self {
            Kind::Power { p } => format!("power:p={p}"),
            Kind::Logarithmic => "logarithmic".to_string(),
            Kind::Custom(table) => format!("custom:{}", table.source()),
        }
    }
}

/// An N-function with its growth indices and the constant `a = inf t^m / Phi(t)`.
#[derive(Clone, Debug)]
pub struct NFunction {
    kind: Kind,
    ell: f64,
    em: f64,
    a_const: f64,
}

/// Summary of an [`NFunction`] for reports.
#[derive(Clone, Debug, Serialize)]
pub struct NFunctionInfo {
    pub kind: String,
    pub ell: f64,
    pub m: f64,
    pub a: f64,
}

/// Points of the default validation grid.
pub const GRID_POINTS: usize = 512;
/// Range of the default validation grid.
pub const GRID_RANGE: (f64, f64) = (1e-6, 1e6);
/// Relative step of the centered differences used for index estimates.
pub const INDEX_REL_STEP: f64 = 1e-6;

const INDEX_TOL: f64 = 1e-4;
const END_SLOPE_MIN: f64 = 1e-3;

/// Log-spaced grid of `n` points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The default validation grid: 512 log-spaced points over `[1e-6, 1e6]`.
pub fn sample_grid() -> Vec<f64> {
    log_grid(GRID_RANGE.0, GRID_RANGE.1, GRID_POINTS)
}

impl NFunction {
    /// `Phi(t) = t^p / p`, `p > 1`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::hypothesis(
                "(phi1)",
                0.0,
                format!("power exponent p = {p} must lie in (1, inf) so that t phi(t) -> 0 at 0"),
            ));
        }
        let f = NFunction {
            kind: Kind::Power { p },
            ell: p,
            em: p,
            a_const: p,
        };
        f.validate()?;
        Ok(f)
    }

    /// `phi(t) = log(1 + t) / t`, `Phi(t) = (1 + t) log(1 + t) - t`; `l = 1`, `m = a = 2`.
    pub fn logarithmic() -> Self {
        let f = NFunction {
            kind: Kind::Logarithmic,
            ell: 1.0,
            em: 2.0,
            a_const: 2.0,
        };
        debug_assert!(f.validate().is_ok());
        f
    }

    /// N-function interpolated from a table of `(t, phi(t))` pairs.
    pub fn custom(table: SampledDensity) -> Result<Self> {
        let table = Arc::new(table);
        let mut f = NFunction {
            kind: Kind::Custom(table.clone()),
            ell: 1.0,
            em: 1.0,
            a_const: 1.0,
        };
        let grid = sample_grid();
        let (lo, hi) = growth_indices(&f, &grid);
        // the power-law tails have constant index; include them in the bracket
        let (alpha_lo, alpha_hi) = table.tail_exponents();
        let lo = lo.min(alpha_lo + 1.0).min(alpha_hi + 1.0);
        let hi = hi.max(alpha_lo + 1.0).max(alpha_hi + 1.0);
        if lo < 1.0 - 1e-6 {
            let witness = grid
                .iter()
                .copied()
                .find(|&t| index_ratio(&f, t) < 1.0 - 1e-6)
                .unwrap_or(0.0);
            return Err(Error::hypothesis(
                "(phi3)",
                witness,
                format!("lower growth index {lo} is below 1"),
            ));
        }
        f.ell = lo.max(1.0);
        f.em = hi;
        f.a_const = a_limit(&f);
        f.validate()?;
        Ok(f)
    }

    /// Reads a two-column `t, phi(t)` table (comma or whitespace separated, `#` comments).
    pub fn custom_from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::custom(SampledDensity::from_path(path)?)
    }

    /// Parses a catalog name: `power:p=<float>`, `logarithmic` or `custom:<path>`.
    pub fn from_catalog(name: &str) -> Result<Self> {
        let name = name.trim();
        if name == "logarithmic" {
            return Ok(Self::logarithmic());
        }
        if let Some(rest) = name.strip_prefix("power:") {
            let p = parse_param(rest, "p")?;
            return Self::power(p);
        }
        if let Some(path) = name.strip_prefix("custom:") {
            return Self::custom_from_path(path);
        }
        Err(Error::Parameter(format!(
            "unknown operator '{name}' (expected power:p=<float>, logarithmic or custom:<path>)"
        )))
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// `a = inf_{t>0} t^m / Phi(t)`.
    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    pub fn info(&self) -> NFunctionInfo {
        NFunctionInfo {
            kind: self.kind.name(),
            ell: self.ell,
            m: self.em,
            a: self.a_const,
        }
    }

    /// Checks the standing hypotheses on the default grid.
    pub fn validate(&self) -> Result<()> {
        validate_on(self, self.a_const, &sample_grid())
    }
}

fn parse_param(rest: &str, key: &str) -> Result<f64> {
    let value = rest
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Parameter(format!("expected '{key}=<float>', got '{rest}'")))?;
    value
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parameter(format!("bad value for {key}: {e}")))
}

pub(crate) fn catalog_param(rest: &str, key: &str) -> Result<f64> {
    parse_param(rest, key)
}

impl OrliczFunction for NFunction {
    fn phi(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.kind {
            Kind::Power { p } => {
                if t == 0.0 {
                    match p.partial_cmp(&2.0) {
                        Some(std::cmp::Ordering::Greater) => 0.0,
                        Some(std::cmp::Ordering::Equal) => 1.0,
                        _ => f64::INFINITY,
                    }
                } else {
                    t.powf(p - 2.0)
                }
            }
            Kind::Logarithmic => {
                if t == 0.0 {
                    1.0
                } else {
                    t.ln_1p() / t
                }
            }
            Kind::Custom(table) => table.phi(t),
        }
    }

    fn density(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.kind {
            Kind::Power { p } => t.powf(p - 1.0),
            Kind::Logarithmic => t.ln_1p(),
            Kind::Custom(table) => table.density(t),
        }
    }

    fn density_slope(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.kind {
            Kind::Power { p } => {
                if t == 0.0 {
                    self.phi(0.0) * (p - 1.0)
                } else {
                    (p - 1.0) * t.powf(p - 2.0)
                }
            }
            Kind::Logarithmic => 1.0 / (1.0 + t),
            Kind::Custom(table) => table.density_slope(t),
        }
    }

    fn value(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.kind {
            Kind::Power { p } => t.powf(*p) / p,
            Kind::Logarithmic => log_big_phi(t),
            Kind::Custom(table) => table.integral(t),
        }
    }

    fn lower_index(&self) -> f64 {
        self.ell
    }

    fn upper_index(&self) -> f64 {
        self.em
    }
}

/// `(1 + t) log(1 + t) - t`, with a series near the origin to avoid cancellation.
fn log_big_phi(t: f64) -> f64 {
    if t < 1e-3 {
        // sum_{k>=2} (-1)^k t^k / (k (k - 1))
        let t2 = t * t;
        t2 * (0.5 - t / 6.0 + t2 / 12.0 - t2 * t / 20.0 + t2 * t2 / 30.0)
    } else {
        (1.0 + t) * t.ln_1p() - t
    }
}

/// Centered-difference estimate of `1 + (t phi(t))' / phi(t)` at `t`.
pub fn index_ratio<F: OrliczFunction + ?Sized>(f: &F, t: f64) -> f64 {
    let h = INDEX_REL_STEP * t;
    let (tp, tm) = (t + h, t - h);
    let slope = (f.density(tp) - f.density(tm)) / (tp - tm);
    1.0 + slope / f.phi(t)
}

/// Estimates `(l, m)` as the inf and sup of [`index_ratio`] over `grid`.
pub fn growth_indices<F: OrliczFunction + ?Sized>(f: &F, grid: &[f64]) -> (f64, f64) {
    grid.iter()
        .map(|&t| index_ratio(f, t))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// `inf t^m / Phi(t)` evaluated as the small-`t` limit with one Richardson step.
pub fn a_limit<F: OrliczFunction + ?Sized>(f: &F) -> f64 {
    let m = f.upper_index();
    let ratio = |t: f64| t.powf(m) / f.value(t);
    let t = 1e-8;
    let (r1, r2) = (ratio(t), ratio(0.5 * t));
    let extrapolated = 2.0 * r2 - r1;
    if (r1 - r2).abs() <= 1e-6 * r2.abs() && extrapolated > 0.0 {
        extrapolated
    } else {
        r2
    }
}

fn validate_on(f: &NFunction, a_const: f64, grid: &[f64]) -> Result<()> {
    // (phi1): density positive, vanishing at 0 and unbounded at infinity at a detectable rate
    for &t in grid {
        let d = f.density(t);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::hypothesis("(phi1)", t, format!("t phi(t) = {d} is not positive")));
        }
    }
    let end_slope = |t: f64| {
        let h = INDEX_REL_STEP * t;
        let (tp, tm) = (t + h, t - h);
        (f.density(tp).ln() - f.density(tm).ln()) / (tp.ln() - tm.ln())
    };
    let (t_lo, t_hi) = (grid[0], grid[grid.len() - 1]);
    if end_slope(t_lo) < END_SLOPE_MIN {
        return Err(Error::hypothesis(
            "(phi1)",
            t_lo,
            "t phi(t) does not decay to 0 as t -> 0+",
        ));
    }
    if end_slope(t_hi) < END_SLOPE_MIN {
        return Err(Error::hypothesis(
            "(phi1)",
            t_hi,
            "t phi(t) does not grow without bound as t -> inf",
        ));
    }
    // (phi2)
    for w in grid.windows(2) {
        if !(f.density(w[1]) > f.density(w[0])) {
            return Err(Error::hypothesis(
                "(phi2)",
                w[1],
                "t phi(t) is not strictly increasing",
            ));
        }
    }
    // (phi3)
    for &t in grid {
        let r = index_ratio(f, t);
        if r < 1.0 - INDEX_TOL || r < f.ell - INDEX_TOL || r > f.em + INDEX_TOL {
            return Err(Error::hypothesis(
                "(phi3)",
                t,
                format!(
                    "1 + (t phi)'/phi = {r} outside [{}, {}]",
                    f.ell.max(1.0),
                    f.em
                ),
            ));
        }
    }
    // (phi4) and the monotonicity of t^m / Phi
    if !(a_const > 0.0) {
        return Err(Error::hypothesis("(phi4)", 0.0, format!("a = {a_const} is not positive")));
    }
    let m = f.em;
    let mut prev = 0.0f64;
    for &t in grid {
        let r = t.powf(m) / f.value(t);
        if r < prev * (1.0 - 1e-9) {
            return Err(Error::hypothesis(
                "(phi4)",
                t,
                format!("t^m / Phi(t) decreases ({prev} -> {r})"),
            ));
        }
        prev = r;
    }
    // Phi(0) = 0 and midpoint convexity
    if f.value(0.0) != 0.0 {
        return Err(Error::hypothesis("(phi1)", 0.0, "Phi(0) != 0"));
    }
    for w in grid.windows(2) {
        let mid = f.value(0.5 * (w[0] + w[1]));
        let avg = 0.5 * (f.value(w[0]) + f.value(w[1]));
        if mid > avg * (1.0 + 1e-12) {
            return Err(Error::hypothesis("(phi2)", w[0], "Phi fails the midpoint convexity test"));
        }
    }
    Ok(())
}

/// Builds an N-function and checks the hypotheses on a caller-supplied grid.
pub fn validate_with_grid(f: &NFunction, grid: &[f64]) -> Result<()> {
    validate_on(f, f.a_const, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logarithmic_constants() {
        let f = NFunction::logarithmic();
        assert_eq!(f.lower_index(), 1.0);
        assert_eq!(f.upper_index(), 2.0);
        assert_eq!(f.a_const(), 2.0);
        // a also recovered as the small-t limit
        assert_relative_eq!(a_limit(&f), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn logarithmic_index_ratio_at_one() {
        let f = NFunction::logarithmic();
        // (t phi)'/phi = t / ((1 + t) log(1 + t)); at t = 1 this is 1 / (2 log 2)
        let expected = 1.0 / (2.0 * std::f64::consts::LN_2);
        assert_relative_eq!(index_ratio(&f, 1.0) - 1.0, expected, max_relative = 1e-8);
        assert_relative_eq!(expected, 0.7213475204444817, max_relative = 1e-12);
    }

    #[test]
    fn power_two_is_quadratic() {
        let f = NFunction::power(2.0).unwrap();
        for &t in &[0.0, 1e-3, 0.5, 3.0, 1e4] {
            assert_eq!(f.phi(t), 1.0);
            assert_relative_eq!(f.value(t), 0.5 * t * t, max_relative = 1e-15);
        }
        assert_eq!(growth_indices(&f, &sample_grid()), (2.0, 2.0));
    }

    #[test]
    fn power_indices() {
        let f = NFunction::power(2.5).unwrap();
        let (lo, hi) = growth_indices(&f, &sample_grid());
        assert!((lo - 2.5).abs() < 1e-6 && (hi - 2.5).abs() < 1e-6, "{lo} {hi}");
    }

    #[test]
    fn logarithmic_indices_limits() {
        let f = NFunction::logarithmic();
        let grid = sample_grid();
        let (lo, hi) = growth_indices(&f, &grid);
        assert!((1.0..1.1).contains(&lo), "{lo}");
        assert!(hi > 1.999 && hi <= 2.0, "{hi}");
        // inf at the large end, sup at the small end
        assert_relative_eq!(index_ratio(&f, grid[grid.len() - 1]), lo);
        assert_relative_eq!(index_ratio(&f, grid[0]), hi);
    }

    #[test]
    fn log_big_phi_is_continuous_across_series_switch() {
        let below = log_big_phi(1e-3 * (1.0 - 1e-12));
        let above = log_big_phi(1e-3);
        assert_relative_eq!(below, above, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_power() {
        for p in [1.0, 0.5, f64::NAN] {
            match NFunction::power(p) {
                Err(Error::Hypothesis { hypothesis, .. }) => assert_eq!(hypothesis, "(phi1)"),
                other => panic!("expected hypothesis error, got {other:?}"),
            }
        }
    }

    #[test]
    fn catalog_names() {
        assert!(matches!(NFunction::from_catalog("logarithmic").unwrap().kind(), Kind::Logarithmic));
        let f = NFunction::from_catalog("power:p=3").unwrap();
        assert_eq!(f.upper_index(), 3.0);
        assert!(NFunction::from_catalog("power:q=3").is_err());
        assert!(NFunction::from_catalog("cubic").is_err());
    }
}
