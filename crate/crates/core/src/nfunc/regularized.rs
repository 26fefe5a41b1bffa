use crate::error::{Error, Result};

use super::{NFunction, NFunctionInfo, OrliczFunction};

/// `Phi_eps(t) = Phi(t) + (eps / m) t^m` with its guaranteed lower index
/// `l_eps = 1 + (m - 1) eps a / (eps a + m)`.
#[derive(Clone, Debug)]
pub struct RegularizedNFunction {
    base: NFunction,
    eps: f64,
    ell_eps: f64,
}

/// Lower index of `Phi_eps` for upper index `m` and constant `a`.
pub fn regularized_lower_index(m: f64, a: f64, eps: f64) -> f64 {
    1.0 + (m - 1.0) * eps * a / (eps * a + m)
}

impl RegularizedNFunction {
    pub fn new(base: NFunction, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Parameter(format!("regularization eps = {eps} must be positive")));
        }
        let ell_eps = regularized_lower_index(base.upper_index(), base.a_const(), eps);
        Ok(RegularizedNFunction { base, eps, ell_eps })
    }

    /// `eps = 0`; only admissible when the base is already reflexive (`l > 1`).
    pub fn unregularized(base: NFunction) -> Result<Self> {
        if !(base.lower_index() > 1.0) {
            return Err(Error::hypothesis(
                "(phi3)'",
                0.0,
                format!(
                    "eps = 0 requires l > 1, got l = {}",
                    base.lower_index()
                ),
            ));
        }
        Ok(RegularizedNFunction {
            base,
            eps: 0.0,
            ell_eps: 1.0,
        })
    }

    pub fn base(&self) -> &NFunction {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The lower index `l_eps` from the regularization formula.
    pub fn ell_eps(&self) -> f64 {
        self.ell_eps
    }

    pub fn info(&self) -> NFunctionInfo {
        let mut info = self.base.info();
        info.kind = format!("{} + eps/m t^m (eps = {})", info.kind, self.eps);
        info.ell = self.lower_index();
        info
    }

    /// `t Phi_eps'(t) / Phi_eps(t)`.
    pub fn ratio(&self, t: f64) -> f64 {
        let t = t.abs();
        t * self.density(t) / self.value(t)
    }
}

impl OrliczFunction for RegularizedNFunction {
    fn phi(&self, t: f64) -> f64 {
        let t = t.abs();
        let m = self.base.upper_index();
        let extra = if self.eps == 0.0 {
            0.0
        } else if t == 0.0 {
            match m.partial_cmp(&2.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => self.eps,
                _ => f64::INFINITY,
            }
        } else {
            self.eps * t.powf(m - 2.0)
        };
        self.base.phi(t) + extra
    }

    fn density(&self, t: f64) -> f64 {
        let t = t.abs();
        let m = self.base.upper_index();
        self.base.density(t) + self.eps * t.powf(m - 1.0)
    }

    fn density_slope(&self, t: f64) -> f64 {
        let t = t.abs();
        let m = self.base.upper_index();
        let extra = if self.eps == 0.0 {
            0.0
        } else if t == 0.0 {
            match m.partial_cmp(&2.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => self.eps,
                _ => f64::INFINITY,
            }
        } else {
            self.eps * (m - 1.0) * t.powf(m - 2.0)
        };
        self.base.density_slope(t) + extra
    }

    fn value(&self, t: f64) -> f64 {
        let t = t.abs();
        let m = self.base.upper_index();
        self.base.value(t) + self.eps / m * t.powf(m)
    }

    fn lower_index(&self) -> f64 {
        self.ell_eps.max(self.base.lower_index())
    }

    fn upper_index(&self) -> f64 {
        self.base.upper_index()
    }
}
