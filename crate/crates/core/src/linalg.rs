//! Symmetric banded matrices and their Cholesky factors.
//!
//! P1 stiffness matrices on the structured meshes of [`crate::grid`] have bandwidth
//! `nx` in the free-node numbering, so a banded factorization costs `O(n nx^2)`.

/// Lower band of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedSym {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.idx(i, i)] * x[i];
        }
        y
    }

    /// Cholesky factorization; `None` when the matrix is not numerically positive definite.
    pub fn cholesky(&self) -> Option<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.clone();
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let mut sum = l.data[l.idx(i, j)];
                for k in lo..j {
                    sum -= l.data[l.idx(i, k)] * l.data[l.idx(j, k)];
                }
                if i == j {
                    let diag = self.data[self.idx(i, i)].abs();
                    if !(sum > 1e-14 * diag) || !sum.is_finite() {
                        return None;
                    }
                    let k = l.idx(i, i);
                    l.data[k] = sum.sqrt();
                } else {
                    let k = l.idx(i, j);
                    l.data[k] = sum / l.data[l.idx(j, j)];
                }
            }
        }
        Some(BandedCholesky { l })
    }
}

/// Lower-triangular banded Cholesky factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    l: BandedSym,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let (n, bw) = (l.n, l.bw);
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = y[i];
            for k in lo..i {
                s -= l.data[l.idx(i, k)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= l.data[l.idx(k, i)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        y
    }
}

/// Unpivoted `L D L^T` factor of a symmetric (possibly indefinite) banded matrix.
#[derive(Clone, Debug)]
pub struct BandedLdlt {
    /// Unit-lower `L` below the diagonal, `D` on it.
    f: BandedSym,
}

impl BandedSym {
    /// `L D L^T` without pivoting; `None` when a pivot is numerically zero.
    pub fn ldlt(&self) -> Option<BandedLdlt> {
        let (n, bw) = (self.n, self.bw);
        let mut f = self.clone();
        for i in 0..n {
            let lo_i = i.saturating_sub(bw);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(bw));
                let mut sum = f.data[f.idx(i, j)];
                for k in lo..j {
                    sum -= f.data[f.idx(i, k)] * f.data[f.idx(j, k)] * f.data[f.idx(k, k)];
                }
                if i == j {
                    let scale = self.data[self.idx(i, i)].abs().max(f64::MIN_POSITIVE);
                    if !(sum.abs() > 1e-13 * scale) || !sum.is_finite() {
                        return None;
                    }
                    let k = f.idx(i, i);
                    f.data[k] = sum;
                } else {
                    let k = f.idx(i, j);
                    f.data[k] = sum / f.data[f.idx(j, j)];
                }
            }
        }
        Some(BandedLdlt { f })
    }
}

impl BandedLdlt {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let f = &self.f;
        let (n, bw) = (f.n, f.bw);
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(bw)..i {
                y[i] -= f.data[f.idx(i, k)] * y[k];
            }
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi /= f.data[f.idx(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..=(i + bw).min(n - 1) {
                y[i] -= f.data[f.idx(k, i)] * y[k];
            }
        }
        y
    }

    /// Number of negative pivots, i.e. the inertia index of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        (0..self.f.n).filter(|&i| self.f.data[self.f.idx(i, i)] < 0.0).count()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `y += alpha x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
