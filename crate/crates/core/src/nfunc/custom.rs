use std::path::Path;

use crate::error::{Error, Result};

/// Monotone cubic interpolant of a tabulated density `t phi(t)`.
///
/// Between the first and last knot the density is a Fritsch-Carlson monotone Hermite
/// cubic; outside it continues as a power law matching the end secants, so that
/// `t phi(t) -> 0` at the origin and `-> inf` at infinity. `Phi` is integrated exactly.
#[derive(Clone, Debug)]
pub struct SampledDensity {
    source: String,
    knots: Vec<f64>,
    dens: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    alpha_lo: f64,
    alpha_hi: f64,
}

impl SampledDensity {
    /// Builds the interpolant from `(t, phi(t))` samples with strictly increasing `t > 0`.
    pub fn new(source: impl Into<String>, t: &[f64], phi: &[f64]) -> Result<Self> {
        if t.len() != phi.len() {
            return Err(Error::Table("column lengths differ".into()));
        }
        if t.len() < 3 {
            return Err(Error::Table("need at least 3 rows".into()));
        }
        if !(t[0] > 0.0) {
            return Err(Error::Table("abscissae must be positive".into()));
        }
        for w in t.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Table(format!("abscissae not strictly increasing at {}", w[1])));
            }
        }
        let dens: Vec<f64> = t.iter().zip(phi).map(|(t, p)| t * p).collect();
        for (i, w) in dens.windows(2).enumerate() {
            if !(w[1] > w[0]) || !(w[0] > 0.0) {
                return Err(Error::hypothesis(
                    "(phi2)",
                    t[i + 1],
                    "tabulated t phi(t) is not positive and strictly increasing",
                ));
            }
        }
        let n = t.len();
        let alpha_lo = (dens[1] / dens[0]).ln() / (t[1] / t[0]).ln();
        let alpha_hi = (dens[n - 1] / dens[n - 2]).ln() / (t[n - 1] / t[n - 2]).ln();

        // Fritsch-Carlson slopes
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (dens[i + 1] - dens[i]) / (t[i + 1] - t[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = alpha_lo * dens[0] / t[0];
        slopes[n - 1] = alpha_hi * dens[n - 1] / t[n - 1];
        for i in 1..n - 1 {
            slopes[i] = 0.5 * (secant[i - 1] + secant[i]);
        }
        for i in 0..n - 1 {
            let a = slopes[i] / secant[i];
            let b = slopes[i + 1] / secant[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * secant[i];
                slopes[i + 1] = tau * b * secant[i];
            }
        }

        let mut table = SampledDensity {
            source: source.into(),
            knots: t.to_vec(),
            dens,
            slopes,
            cumulative: vec![0.0; n],
            alpha_lo,
            alpha_hi,
        };
        table.cumulative[0] = table.dens[0] * table.knots[0] / (alpha_lo + 1.0);
        for i in 0..n - 1 {
            table.cumulative[i + 1] = table.cumulative[i] + table.segment_integral(i, 1.0);
        }
        Ok(table)
    }

    /// Reads `t, phi(t)` rows; blank lines, `#` comments and a non-numeric header are skipped.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let (t, phi) = parse_two_columns(&text)?;
        Self::new(path.display().to_string(), &t, &phi)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Power-law exponents of the density below and above the table.
    pub fn tail_exponents(&self) -> (f64, f64) {
        (self.alpha_lo, self.alpha_hi)
    }

    fn locate(&self, t: f64) -> usize {
        match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i - 1,
        }
    }

    fn hermite(&self, i: usize, s: f64) -> (f64, f64) {
        let h = self.knots[i + 1] - self.knots[i];
        let (y0, y1) = (self.dens[i], self.dens[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let (s2, s3) = (s * s, s * s * s);
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let deriv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        (value, deriv)
    }

    fn segment_integral(&self, i: usize, s: f64) -> f64 {
        let h = self.knots[i + 1] - self.knots[i];
        let (y0, y1) = (self.dens[i], self.dens[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        h * ((0.5 * s4 - s3 + s) * y0
            + (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * m0
            + (-0.5 * s4 + s3) * y1
            + (0.25 * s4 - s3 / 3.0) * m1)
    }

    pub fn density(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= 0.0 {
            0.0
        } else if t < self.knots[0] {
            self.dens[0] * (t / self.knots[0]).powf(self.alpha_lo)
        } else if t > self.knots[n - 1] {
            self.dens[n - 1] * (t / self.knots[n - 1]).powf(self.alpha_hi)
        } else {
            let i = self.locate(t);
            let s = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
            self.hermite(i, s).0
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        if t == 0.0 {
            // limit of d0 (t/t0)^alpha / t
            let lim = self.dens[0] / self.knots[0];
            return match self.alpha_lo.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => lim,
                _ => f64::INFINITY,
            };
        }
        self.density(t) / t
    }

    pub fn density_slope(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= 0.0 {
            self.alpha_lo * self.phi(0.0)
        } else if t < self.knots[0] {
            self.alpha_lo * self.density(t) / t
        } else if t > self.knots[n - 1] {
            self.alpha_hi * self.density(t) / t
        } else {
            let i = self.locate(t);
            let s = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
            self.hermite(i, s).1
        }
    }

    /// `Phi(t) = int_0^t density`.
    pub fn integral(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t <= 0.0 {
            0.0
        } else if t < self.knots[0] {
            self.density(t) * t / (self.alpha_lo + 1.0)
        } else if t > self.knots[n - 1] {
            let tn = self.knots[n - 1];
            self.cumulative[n - 1]
                + self.dens[n - 1] * tn / (self.alpha_hi + 1.0)
                    * ((t / tn).powf(self.alpha_hi + 1.0) - 1.0)
        } else {
            let i = self.locate(t);
            let s = (t - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
            self.cumulative[i] + self.segment_integral(i, s)
        }
    }
}

/// Parses two numeric columns separated by commas or whitespace.
pub(crate) fn parse_two_columns(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(Error::Table(format!("line {}: expected 2 columns", lineno + 1)));
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                a.push(x);
                b.push(y);
            }
            // header row
            _ if a.is_empty() => continue,
            _ => return Err(Error::Table(format!("line {}: not numeric", lineno + 1))),
        }
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cubic_table() -> SampledDensity {
        // phi(t) = t, density t^2, Phi = t^3 / 3
        let t: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
        let phi = t.clone();
        SampledDensity::new("t^2", &t, &phi).unwrap()
    }

    #[test]
    fn reproduces_power_density() {
        let table = cubic_table();
        for &t in &[0.01, 0.07, 0.33, 1.0, 1.97, 5.0] {
            assert_relative_eq!(table.density(t), t * t, max_relative = 2e-3);
            assert_relative_eq!(table.integral(t), t * t * t / 3.0, max_relative = 2e-3);
        }
        assert_eq!(table.tail_exponents().0, 2.0);
    }

    #[test]
    fn integral_is_antiderivative() {
        let table = cubic_table();
        for &t in &[0.02, 0.4, 1.234, 1.99, 3.0] {
            let h = 1e-6 * t;
            let fd = (table.integral(t + h) - table.integral(t - h)) / (2.0 * h);
            assert_relative_eq!(fd, table.density(t), max_relative = 1e-6);
        }
    }

    #[test]
    fn rejects_nonmonotone_density() {
        let err = SampledDensity::new("bad", &[1.0, 2.0, 3.0], &[1.0, 0.2, 0.5]).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { hypothesis: "(phi2)", .. }));
    }

    #[test]
    fn parses_header_and_separators() {
        let (a, b) = parse_two_columns("t,phi\n# comment\n1, 2\n3 4\n\n5,6\n").unwrap();
        assert_eq!(a, vec![1.0, 3.0, 5.0]);
        assert_eq!(b, vec![2.0, 4.0, 6.0]);
    }
}
