use crate::error::{Error, Result};

use super::OrliczFunction;

/// Largest abscissa the conjugate bisection may bracket.
pub const CONJUGATE_MAX_BRACKET: f64 = 1e300;
const CONJUGATE_TOL: f64 = 1e-12;

/// Young conjugate `max_s (t s - Phi(s))` for `t >= 0`.
///
/// The maximizer solves `s phi(s) = t`; it is bracketed by doubling from `[0, 1]`
/// and refined by bisection.
pub fn conjugate_eval<F: OrliczFunction + ?Sized>(f: &F, t: f64) -> Result<f64> {
    conjugate_eval_with(f, t, CONJUGATE_MAX_BRACKET).map(|(v, _)| v)
}

/// Like [`conjugate_eval`] with an explicit bracket limit; also returns the maximizer.
pub fn conjugate_eval_with<F: OrliczFunction + ?Sized>(
    f: &F,
    t: f64,
    max_bracket: f64,
) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("conjugate argument {t} must be nonnegative")));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f.density(hi) < t {
        lo = hi;
        hi *= 2.0;
        if hi > max_bracket {
            return Err(Error::Bracket {
                target: t,
                limit: max_bracket,
            });
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= CONJUGATE_TOL || mid <= lo || mid >= hi {
            break;
        }
        if f.density(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok((t * s - f.value(s), s))
}

/// Positive quadrature weights and the sampled values of one function.
#[derive(Clone, Debug)]
pub struct SampledMeasureSpace {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl SampledMeasureSpace {
    pub fn new(weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(Error::Parameter("weights and values differ in length".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Parameter(format!("quadrature weight {w} is not positive")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("sample values must be finite".into()));
        }
        Ok(SampledMeasureSpace { weights, values })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `sum_i w_i Phi(|v_i| / lambda)`.
pub fn modular<F: OrliczFunction + ?Sized>(space: &SampledMeasureSpace, f: &F, lambda: f64) -> f64 {
    space
        .weights
        .iter()
        .zip(&space.values)
        .map(|(w, v)| w * f.value(v.abs() / lambda))
        .sum()
}

/// Luxemburg norm `inf { lambda > 0 : sum w Phi(|v| / lambda) <= 1 }`, relative tolerance 1e-10.
pub fn luxemburg_norm<F: OrliczFunction + ?Sized>(space: &SampledMeasureSpace, f: &F) -> f64 {
    let vmax = space.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if vmax == 0.0 {
        return 0.0;
    }
    let above = |lambda: f64| modular(space, f, lambda) > 1.0;
    let mut hi = vmax;
    while above(hi) {
        hi *= 2.0;
    }
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if above(lo) {
            break;
        }
        hi = lo;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Power-type comparison functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Zeta {
    /// `min(t^l, t^m)`
    Z0,
    /// `max(t^l, t^m)`
    Z1,
    /// `min(t^l*, t^m*)`
    Z2,
    /// `max(t^l*, t^m*)`
    Z3,
}

/// Evaluates a comparison function for indices `(ell, m)`; `dim` is needed for `Z2`/`Z3`
/// and requires `1 < ell <= m < dim`.
pub fn zeta_bounds(ell: f64, m: f64, which: Zeta, t: f64, dim: Option<f64>) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("zeta argument {t} must be nonnegative")));
    }
    let (lo, hi) = match which {
        Zeta::Z0 | Zeta::Z1 => (ell, m),
        Zeta::Z2 | Zeta::Z3 => {
            let n = dim.ok_or_else(|| Error::Domain("Sobolev exponents need the dimension".into()))?;
            if !(ell > 1.0) || !(m < n) {
                return Err(Error::Domain(format!(
                    "Sobolev conjugate exponents need 1 < l <= m < N (l = {ell}, m = {m}, N = {n})"
                )));
            }
            (ell * n / (n - ell), m * n / (n - m))
        }
    };
    let (a, b) = (t.powf(lo), t.powf(hi));
    Ok(match which {
        Zeta::Z0 | Zeta::Z2 => a.min(b),
        Zeta::Z1 | Zeta::Z3 => a.max(b),
    })
}

/// `sup_t Phi(2t) / Phi(t)` over `grid`.
pub fn delta2_sup<F: OrliczFunction + ?Sized>(f: &F, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&t| f.value(2.0 * t) / f.value(t))
        .fold(0.0, f64::max)
}

/// `conj(2t) / conj(t)` along `grid`; stops at the first abscissa whose conjugate overflows.
pub fn conjugate_delta2_ratios<F: OrliczFunction + ?Sized>(f: &F, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        match (conjugate_eval(f, 2.0 * t), conjugate_eval(f, t)) {
            (Ok(a), Ok(b)) if a.is_finite() && b > 0.0 => out.push(a / b),
            _ => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfunc::{log_grid, NFunction};
    use approx::assert_relative_eq;

    /// `Phi(t) = t^2`, used for the Luxemburg norm oracle.
    struct Square;

    impl OrliczFunction for Square {
        fn phi(&self, _t: f64) -> f64 {
            2.0
        }
        fn density_slope(&self, _t: f64) -> f64 {
            2.0
        }
        fn value(&self, t: f64) -> f64 {
            t * t
        }
        fn lower_index(&self) -> f64 {
            2.0
        }
        fn upper_index(&self) -> f64 {
            2.0
        }
    }

    #[test]
    fn conjugate_of_quadratic() {
        let f = NFunction::power(2.0).unwrap();
        assert_relative_eq!(conjugate_eval(&f, 3.0).unwrap(), 4.5, max_relative = 1e-12);
        assert_eq!(conjugate_eval(&f, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn conjugate_of_cubic() {
        // conjugate exponent 3/2: t^{3/2} / (3/2)
        let f = NFunction::power(3.0).unwrap();
        assert_relative_eq!(conjugate_eval(&f, 1.0).unwrap(), 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn conjugate_of_logarithmic_closed_form() {
        // s* = e^t - 1 and conj(t) = e^t - t - 1
        let f = NFunction::logarithmic();
        for &t in &[0.3f64, 2.0, 10.0] {
            let expected = t.exp() - t - 1.0;
            assert_relative_eq!(conjugate_eval(&f, t).unwrap(), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn conjugate_bracket_failure() {
        let f = NFunction::logarithmic();
        assert!(matches!(conjugate_eval(&f, 800.0), Err(Error::Bracket { .. })));
        assert!(matches!(conjugate_eval(&f, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn luxemburg_constant_function() {
        let space = SampledMeasureSpace::new(vec![0.25; 4], vec![3.0; 4]).unwrap();
        assert_relative_eq!(luxemburg_norm(&space, &Square), 3.0, max_relative = 1e-9);
        let zero = SampledMeasureSpace::new(vec![0.5; 2], vec![0.0; 2]).unwrap();
        assert_eq!(luxemburg_norm(&zero, &Square), 0.0);
    }

    #[test]
    fn measure_space_rejects_bad_weights() {
        assert!(SampledMeasureSpace::new(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(SampledMeasureSpace::new(vec![1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn zeta_examples() {
        assert_relative_eq!(zeta_bounds(1.0, 2.0, Zeta::Z0, 0.5, None).unwrap(), 0.25);
        assert_relative_eq!(zeta_bounds(1.0, 2.0, Zeta::Z1, 0.5, None).unwrap(), 0.5);
        for z in [Zeta::Z0, Zeta::Z1, Zeta::Z2, Zeta::Z3] {
            assert_eq!(zeta_bounds(1.5, 1.8, z, 1.0, Some(2.0)).unwrap(), 1.0);
        }
        assert_relative_eq!(zeta_bounds(1.5, 1.8, Zeta::Z2, 2.0, Some(2.0)).unwrap(), 64.0, max_relative = 1e-12);
        assert_relative_eq!(
            zeta_bounds(1.5, 1.8, Zeta::Z3, 2.0, Some(2.0)).unwrap(),
            262144.0,
            max_relative = 1e-12
        );
        assert!(zeta_bounds(1.0, 1.8, Zeta::Z2, 2.0, Some(2.0)).is_err());
        assert!(zeta_bounds(1.5, 2.0, Zeta::Z3, 2.0, Some(2.0)).is_err());
        assert!(zeta_bounds(1.5, 1.8, Zeta::Z3, 2.0, None).is_err());
    }

    #[test]
    fn delta2_diagnostics() {
        let grid = log_grid(1e-3, 1e3, 200);
        let p = NFunction::power(3.0).unwrap();
        assert!(delta2_sup(&p, &grid) <= 8.0 * (1.0 + 1e-12));
        let log = NFunction::logarithmic();
        assert!(delta2_sup(&log, &grid) <= 4.0);
        // the conjugate of the logarithmic function is not Delta_2
        let ratios = conjugate_delta2_ratios(&log, &log_grid(1.0, 300.0, 60));
        assert_eq!(ratios.len(), 60);
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        assert!(ratios[ratios.len() - 1] > 1e100);
    }
}
