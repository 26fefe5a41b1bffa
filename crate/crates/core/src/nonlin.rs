//! Autonomous nonlinearities `g(t)` for the superlinear problem, with primitives and truncations.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nfunc::{catalog_param, NFunction, OrliczFunction};

/// Which functional is meant: `J`, or `J^+` / `J^-` built from the truncations `g^+` / `g^-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Full,
    Plus,
    Minus,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "plus" => Ok(Variant::Plus),
            "minus" => Ok(Variant::Minus),
            _ => Err(Error::Parameter(format!("unknown variant '{s}' (full, plus, minus)"))),
        }
    }

    /// Whether the truncation keeps the value at `t`.
    #[inline]
    pub fn keeps(self, t: f64) -> bool {
        match self {
            Variant::Full => true,
            Variant::Plus => t >= 0.0,
            Variant::Minus => t <= 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Plus => "plus",
            Variant::Minus => "minus",
        }
    }
}

#[derive(Clone, Debug)]
pub enum NonlinearityKind {
    Zero,
    /// `|t|^{q-2} t`
    Power { q: f64 },
    /// `|t|^{m-2} t ln(1 + |t|)`
    PowerLog { m: f64 },
    /// Tabulated `g` on `t >= 0`, extended oddly.
    Custom(Arc<SampledNonlinearity>),
}

/// An odd, autonomous nonlinearity with `g(0) = 0`.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    primitive: Option<Arc<PrimitiveTable>>,
    psi: Option<NFunction>,
    gamma: Option<NFunction>,
}

/// Growth diagnostics for the witnesses `Psi`, `Gamma`.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    /// Smallest `C` with `|g(t)| <= C (1 + psi(t))` on the sample grid.
    pub growth_constant: Option<f64>,
    pub psi_indices: Option<(f64, f64)>,
    pub gamma_indices: Option<(f64, f64)>,
    /// `m < l_Psi <= m_Psi < N/(N-1)`
    pub psi_window_ok: Option<bool>,
    /// `N < l_Gamma`
    pub gamma_window_ok: Option<bool>,
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Zero,
            primitive: None,
            psi: None,
            gamma: None,
        }
    }

    /// `g(t) = |t|^{q-2} t` with witness `Psi(t) = t^q / q`.
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::Parameter(format!("power nonlinearity needs q > 1, got {q}")));
        }
        Ok(Nonlinearity {
            kind: NonlinearityKind::Power { q },
            primitive: None,
            psi: Some(NFunction::power(q)?),
            gamma: None,
        })
    }

    /// `g(t) = |t|^{m-2} t ln(1 + |t|)`, superlinear relative to `t^{m-1}` yet without an
    /// Ambrosetti-Rabinowitz exponent. Witness `Psi(t) = t^{m+1/2} / (m + 1/2)`.
    pub fn power_log(m: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return Err(Error::Parameter(format!("powerlog nonlinearity needs m > 1, got {m}")));
        }
        let primitive = if m == 2.0 {
            None
        } else {
            Some(Arc::new(PrimitiveTable::power_log(m)))
        };
        Ok(Nonlinearity {
            kind: NonlinearityKind::PowerLog { m },
            primitive,
            psi: Some(NFunction::power(m + 0.5)?),
            gamma: None,
        })
    }

    pub fn custom(table: SampledNonlinearity) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Custom(Arc::new(table)),
            primitive: None,
            psi: None,
            gamma: None,
        }
    }

    /// Parses `power:q=<float>`, `powerlog:m=<float>`, `custom:<path>` or `zero`.
    pub fn from_catalog(name: &str) -> Result<Self> {
        let name = name.trim();
        if name == "zero" {
            return Ok(Self::zero());
        }
        if let Some(rest) = name.strip_prefix("power:") {
            return Self::power(catalog_param(rest, "q")?);
        }
        if let Some(rest) = name.strip_prefix("powerlog:") {
            return Self::power_log(catalog_param(rest, "m")?);
        }
        if let Some(path) = name.strip_prefix("custom:") {
            return Ok(Self::custom(SampledNonlinearity::from_path(path)?));
        }
        Err(Error::Parameter(format!(
            "unknown nonlinearity '{name}' (expected power:q=<float>, powerlog:m=<float>, custom:<path> or zero)"
        )))
    }

    pub fn with_witnesses(mut self, psi: Option<NFunction>, gamma: Option<NFunction>) -> Self {
        if psi.is_some() {
            self.psi = psi;
        }
        self.gamma = gamma;
        self
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            NonlinearityKind::Zero => "zero".into(),
            NonlinearityKind::Power { q } => format!("power:q={q}"),
            NonlinearityKind::PowerLog { m } => format!("powerlog:m={m}"),
            NonlinearityKind::Custom(t) => format!("custom:{}", t.source),
        }
    }

    pub fn psi_witness(&self) -> Option<&NFunction> {
        self.psi.as_ref()
    }

    pub fn gamma_witness(&self) -> Option<&NFunction> {
        self.gamma.as_ref()
    }

    /// `g(t)`
    pub fn g(&self, t: f64) -> f64 {
        let a = t.abs();
        let mag = match &self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Power { q } => a.powf(q - 1.0),
            NonlinearityKind::PowerLog { m } => a.powf(m - 1.0) * a.ln_1p(),
            NonlinearityKind::Custom(tab) => tab.g(a),
        };
        if t < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// `g'(t)` (even in `t`).
    pub fn dg(&self, t: f64) -> f64 {
        let a = t.abs();
        match &self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Power { q } => {
                if a == 0.0 {
                    if *q > 2.0 {
                        0.0
                    } else if *q == 2.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (q - 1.0) * a.powf(q - 2.0)
                }
            }
            NonlinearityKind::PowerLog { m } => {
                if a == 0.0 {
                    if *m > 1.0 {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    (m - 1.0) * a.powf(m - 2.0) * a.ln_1p() + a.powf(m - 1.0) / (1.0 + a)
                }
            }
            NonlinearityKind::Custom(tab) => tab.dg(a),
        }
    }

    /// `G(t) = int_0^t g` (even in `t`).
    pub fn big_g(&self, t: f64) -> f64 {
        let a = t.abs();
        match &self.kind {
            NonlinearityKind::Zero => 0.0,
            NonlinearityKind::Power { q } => a.powf(*q) / q,
            NonlinearityKind::PowerLog { .. } => match &self.primitive {
                Some(table) => table.eval(a),
                None => power_log2_primitive(a),
            },
            NonlinearityKind::Custom(tab) => tab.big_g(a),
        }
    }

    /// `Gbar(t) = t g(t) - m G(t)` with `m` the operator's upper index.
    pub fn gbar(&self, t: f64, m: f64) -> f64 {
        t * self.g(t) - m * self.big_g(t)
    }

    pub fn g_variant(&self, t: f64, v: Variant) -> f64 {
        if v.keeps(t) {
            self.g(t)
        } else {
            0.0
        }
    }

    pub fn dg_variant(&self, t: f64, v: Variant) -> f64 {
        if v.keeps(t) {
            self.dg(t)
        } else {
            0.0
        }
    }

    pub fn big_g_variant(&self, t: f64, v: Variant) -> f64 {
        if v.keeps(t) {
            self.big_g(t)
        } else {
            0.0
        }
    }

    /// Diagnostics for the growth witnesses against operator upper index `m` in dimension `dim`.
    pub fn witness_report(&self, m_phi: f64, dim: usize, grid: &[f64]) -> WitnessReport {
        let n = dim as f64;
        let one_star = if dim == 1 { f64::INFINITY } else { n / (n - 1.0) };
        let psi = self.psi.as_ref();
        WitnessReport {
            growth_constant: psi.map(|p| {
                grid.iter()
                    .map(|&t| self.g(t).abs() / (1.0 + p.density(t)))
                    .fold(0.0, f64::max)
            }),
            psi_indices: psi.map(|p| (p.lower_index(), p.upper_index())),
            gamma_indices: self.gamma.as_ref().map(|g| (g.lower_index(), g.upper_index())),
            psi_window_ok: psi.map(|p| m_phi < p.lower_index() && p.upper_index() < one_star),
            gamma_window_ok: self.gamma.as_ref().map(|g| n < g.lower_index()),
        }
    }
}

/// `int_0^t s ln(1+s) ds = ((t^2 - 1)/2) ln(1+t) - t^2/4 + t/2`.
fn power_log2_primitive(t: f64) -> f64 {
    if t < 1e-3 {
        power_log_series(2.0, t)
    } else {
        0.5 * (t * t - 1.0) * t.ln_1p() - 0.25 * t * t + 0.5 * t
    }
}

/// `int_0^t s^{m-1} ln(1+s) ds` from the Taylor series of `ln(1+s)`, for small `t`.
fn power_log_series(m: f64, t: f64) -> f64 {
    let mut sum = 0.0;
    for k in 1..=5 {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * t.powf(m + kf) / (kf * (m + kf));
    }
    sum
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss-Legendre rule on `[a, b]`.
fn gauss8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

/// Cached primitive of `s^{m-1} ln(1+s)` on a log grid, evaluated by cubic Hermite
/// interpolation with the exact derivative.
#[derive(Debug)]
struct PrimitiveTable {
    m: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PrimitiveTable {
    const LO: f64 = 1e-3;
    const HI: f64 = 1e8;
    const N: usize = 2000;

    fn power_log(m: f64) -> Self {
        let knots = crate::nfunc::log_grid(Self::LO, Self::HI, Self::N);
        let g = |s: f64| s.powf(m - 1.0) * s.ln_1p();
        let mut values = Vec::with_capacity(knots.len());
        values.push(power_log_series(m, Self::LO));
        for w in knots.windows(2) {
            let prev = *values.last().unwrap();
            // split each panel once so the rule stays well inside its accuracy range
            let mid = 0.5 * (w[0] + w[1]);
            values.push(prev + gauss8(g, w[0], mid) + gauss8(g, mid, w[1]));
        }
        PrimitiveTable { m, knots, values }
    }

    fn deriv(&self, s: f64) -> f64 {
        s.powf(self.m - 1.0) * s.ln_1p()
    }

    fn eval(&self, t: f64) -> f64 {
        if t < Self::LO {
            return power_log_series(self.m, t);
        }
        let n = self.knots.len();
        if t >= self.knots[n - 1] {
            // int_T^t s^{m-1} (ln s + 1/s) ds, accurate to O(T^{m-2})
            let m = self.m;
            let anti = |s: f64| s.powf(m) * (s.ln() / m - 1.0 / (m * m)) + s.powf(m - 1.0) / (m - 1.0);
            return self.values[n - 1] + anti(t) - anti(self.knots[n - 1]);
        }
        let i = match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let s = (t - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.deriv(x0) * h, self.deriv(x1) * h);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }
}

/// Tabulated `g` on `t >= 0`: cubic Hermite between knots (Fritsch-Carlson slopes),
/// power-law continuation outside, primitive integrated exactly.
#[derive(Clone, Debug)]
pub struct SampledNonlinearity {
    source: String,
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    alpha_lo: f64,
    alpha_hi: f64,
}

impl SampledNonlinearity {
    /// `t` strictly increasing and positive, `g(t) > 0` at every knot.
    pub fn new(source: impl Into<String>, t: &[f64], g: &[f64]) -> Result<Self> {
        if t.len() != g.len() || t.len() < 3 {
            return Err(Error::Table("need at least 3 rows of equal length".into()));
        }
        if !(t[0] > 0.0) || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Table("abscissae must be positive and strictly increasing".into()));
        }
        if g.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Table("tabulated g must be positive and finite for t > 0".into()));
        }
        let n = t.len();
        let alpha_lo = (g[1] / g[0]).ln() / (t[1] / t[0]).ln();
        let alpha_hi = (g[n - 1] / g[n - 2]).ln() / (t[n - 1] / t[n - 2]).ln();
        if !(alpha_lo > 0.0) {
            return Err(Error::hypothesis(
                "g(0) = 0",
                t[0],
                "tabulated g must decay to 0 at the origin",
            ));
        }
        let secant: Vec<f64> = (0..n - 1).map(|i| (g[i + 1] - g[i]) / (t[i + 1] - t[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = alpha_lo * g[0] / t[0];
        slopes[n - 1] = alpha_hi * g[n - 1] / t[n - 1];
        for i in 1..n - 1 {
            slopes[i] = if secant[i - 1] * secant[i] <= 0.0 {
                0.0
            } else {
                0.5 * (secant[i - 1] + secant[i])
            };
        }
        for i in 0..n - 1 {
            if secant[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let a = slopes[i] / secant[i];
            let b = slopes[i + 1] / secant[i];
            let s = a * a + b * b;
            if a >= 0.0 && b >= 0.0 && s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * secant[i];
                slopes[i + 1] = tau * b * secant[i];
            }
        }
        let mut table = SampledNonlinearity {
            source: source.into(),
            knots: t.to_vec(),
            values: g.to_vec(),
            slopes,
            cumulative: vec![0.0; n],
            alpha_lo,
            alpha_hi,
        };
        table.cumulative[0] = g[0] * t[0] / (alpha_lo + 1.0);
        for i in 0..n - 1 {
            table.cumulative[i + 1] = table.cumulative[i] + table.segment_integral(i, 1.0);
        }
        Ok(table)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let (t, g) = crate::nfunc::parse_two_columns(&text)?;
        // a leading (0, 0) row is implied by oddness
        let skip = usize::from(t.first() == Some(&0.0) && g.first() == Some(&0.0));
        Self::new(path.display().to_string(), &t[skip..], &g[skip..])
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn locate(&self, t: f64) -> usize {
        match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i - 1,
        }
    }

    fn coeffs(&self, i: usize) -> (f64, f64, f64, f64, f64) {
        let h = self.knots[i + 1] - self.knots[i];
        (h, self.values[i], self.values[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h)
    }

    fn segment_integral(&self, i: usize, s: f64) -> f64 {
        let (h, y0, y1, m0, m1) = self.coeffs(i);
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        h * ((0.5 * s4 - s3 + s) * y0
            + (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * m0
            + (-0.5 * s4 + s3) * y1
            + (0.25 * s4 - s3 / 3.0) * m1)
    }

    fn g(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.values[0] * (t / self.knots[0]).powf(self.alpha_lo);
        }
        if t >= self.knots[n - 1] {
            return self.values[n - 1] * (t / self.knots[n - 1]).powf(self.alpha_hi);
        }
        let i = self.locate(t);
        let (h, y0, y1, m0, m1) = self.coeffs(i);
        let s = (t - self.knots[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }

    fn dg(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            if t == 0.0 {
                return if self.alpha_lo > 1.0 {
                    0.0
                } else if self.alpha_lo == 1.0 {
                    self.values[0] / self.knots[0]
                } else {
                    f64::INFINITY
                };
            }
            return self.alpha_lo * self.g(t) / t;
        }
        if t >= self.knots[n - 1] {
            return self.alpha_hi * self.g(t) / t;
        }
        let i = self.locate(t);
        let (h, y0, y1, m0, m1) = self.coeffs(i);
        let s = (t - self.knots[i]) / h;
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1)
            / h
    }

    fn big_g(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return self.g(t) * t / (self.alpha_lo + 1.0);
        }
        if t >= self.knots[n - 1] {
            let tn = self.knots[n - 1];
            return self.cumulative[n - 1] + (self.g(t) * t - self.values[n - 1] * tn) / (self.alpha_hi + 1.0);
        }
        let i = self.locate(t);
        let s = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
        self.cumulative[i] + self.segment_integral(i, s)
    }
}
