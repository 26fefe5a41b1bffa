//! P1 finite elements on the unit interval and on rectangles.
//!
//! Quadrature is one point per element (midpoint in 1D, centroid in 2D), which is exact
//! for the element-wise constant integrands `Phi(|grad u|)` of P1 fields.

use std::fmt;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{BandedCholesky, BandedSym};
use crate::nfunc::{luxemburg_norm, OrliczFunction, SampledMeasureSpace};

/// A conforming simplicial mesh with Dirichlet boundary flags.
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    diam: f64,
    cells: (usize, usize),
    bounds: [f64; 4],
    measures: Vec<f64>,
    centroids: Vec<[f64; 2]>,
    basis_grads: Vec<[[f64; 2]; 3]>,
    free_index: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
    bandwidth: usize,
    laplacian: OnceLock<BandedCholesky>,
}

/// Structured description of a mesh for run reports.
#[derive(Clone, Debug, Serialize)]
pub struct MeshSummary {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub nodes: usize,
    pub elements: usize,
    pub free_nodes: usize,
    pub diam: f64,
    pub bounds: Vec<f64>,
}

/// Builds the unit interval (`dim = 1`, `resolution` elements) or the unit square
/// (`dim = 2`, `resolution x resolution` cells split into two triangles each).
pub fn build_mesh(dim: usize, resolution: usize) -> Result<Arc<Mesh>> {
    match dim {
        1 => Mesh::interval(0.0, 1.0, resolution),
        2 => Mesh::rectangle([0.0, 1.0, 0.0, 1.0], resolution, resolution),
        _ => Err(Error::Parameter(format!("dimension {dim} not supported (1 or 2)"))),
    }
}

impl Mesh {
    /// `n` equal elements on `(a, b)`.
    pub fn interval(a: f64, b: f64, n: usize) -> Result<Arc<Mesh>> {
        if n < 2 {
            return Err(Error::Resolution(n));
        }
        if !(b > a) {
            return Err(Error::Parameter("interval must have b > a".into()));
        }
        let h = (b - a) / n as f64;
        let nodes: Vec<[f64; 2]> = (0..=n)
            .map(|i| [if i == n { b } else { a + h * i as f64 }, 0.0])
            .collect();
        let elements = (0..n).map(|i| [i, i + 1, usize::MAX]).collect();
        let boundary = (0..=n).map(|i| i == 0 || i == n).collect();
        Ok(Arc::new(Mesh::finish(1, nodes, elements, boundary, (n, 1), [a, b, 0.0, 0.0])))
    }

    /// `[x0, x1] x [y0, y1]` with `nx x ny` cells, each split along its rising diagonal.
    pub fn rectangle(bounds: [f64; 4], nx: usize, ny: usize) -> Result<Arc<Mesh>> {
        if nx < 2 {
            return Err(Error::Resolution(nx));
        }
        if ny < 2 {
            return Err(Error::Resolution(ny));
        }
        let [x0, x1, y0, y1] = bounds;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Parameter("rectangle bounds must be increasing".into()));
        }
        let coord = |lo: f64, hi: f64, i: usize, n: usize| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        };
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([coord(x0, x1, i, nx), coord(y0, y1, j, ny)]);
                boundary.push(i == 0 || j == 0 || i == nx || j == ny);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                elements.push([a, b, c]);
                elements.push([a, c, d]);
            }
        }
        Ok(Arc::new(Mesh::finish(2, nodes, elements, boundary, (nx, ny), bounds)))
    }

    fn finish(
        dim: usize,
        nodes: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        boundary: Vec<bool>,
        cells: (usize, usize),
        bounds: [f64; 4],
    ) -> Mesh {
        let mut measures = Vec::with_capacity(elements.len());
        let mut centroids = Vec::with_capacity(elements.len());
        let mut basis_grads = Vec::with_capacity(elements.len());
        for el in &elements {
            if dim == 1 {
                let (xa, xb) = (nodes[el[0]][0], nodes[el[1]][0]);
                let h = xb - xa;
                measures.push(h);
                centroids.push([0.5 * (xa + xb), 0.0]);
                basis_grads.push([[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]]);
            } else {
                let [p0, p1, p2] = [nodes[el[0]], nodes[el[1]], nodes[el[2]]];
                let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
                measures.push(0.5 * det);
                centroids.push([
                    (p0[0] + p1[0] + p2[0]) / 3.0,
                    (p0[1] + p1[1] + p2[1]) / 3.0,
                ]);
                let g = |a: [f64; 2], b: [f64; 2]| [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
                basis_grads.push([g(p1, p2), g(p2, p0), g(p0, p1)]);
            }
        }
        let mut free_index = vec![None; nodes.len()];
        let mut free_nodes = Vec::new();
        for (i, &b) in boundary.iter().enumerate() {
            if !b {
                free_index[i] = Some(free_nodes.len());
                free_nodes.push(i);
            }
        }
        let mut bandwidth = 0;
        for el in &elements {
            let fi: Vec<usize> = el[..dim + 1].iter().filter_map(|&v| free_index[v]).collect();
            for &a in &fi {
                for &b in &fi {
                    bandwidth = bandwidth.max(a.abs_diff(b));
                }
            }
        }
        let bnodes: Vec<[f64; 2]> = nodes
            .iter()
            .zip(&boundary)
            .filter(|(_, b)| **b)
            .map(|(p, _)| *p)
            .collect();
        let mut diam = 0.0f64;
        for (i, p) in bnodes.iter().enumerate() {
            for q in &bnodes[i + 1..] {
                diam = diam.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        Mesh {
            dim,
            nodes,
            elements,
            boundary,
            diam,
            cells,
            bounds,
            measures,
            centroids,
            basis_grads,
            free_index,
            free_nodes,
            bandwidth,
            laplacian: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_free(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    /// Vertex indices of element `e`.
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim + 1]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn cells(&self) -> (usize, usize) {
        self.cells
    }

    /// `[x0, x1, y0, y1]` (the `y` entries are 0 in 1D).
    pub fn bounds(&self) -> [f64; 4] {
        self.bounds
    }

    /// Quadrature weights (element measures).
    pub fn weights(&self) -> &[f64] {
        &self.measures
    }

    /// Quadrature points (element midpoints / centroids).
    pub fn quadrature_points(&self) -> &[[f64; 2]] {
        &self.centroids
    }

    /// Gradients of the local basis functions on element `e`.
    pub fn basis_gradients(&self, e: usize) -> &[[f64; 2]] {
        &self.basis_grads[e][..self.dim + 1]
    }

    /// Value of every local basis function at the quadrature point.
    pub fn basis_at_quadrature(&self) -> f64 {
        1.0 / (self.dim + 1) as f64
    }

    pub fn free_index(&self, node: usize) -> Option<usize> {
        self.free_index[node]
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    /// Bandwidth of P1 matrices in the free-node numbering.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Distance from a point to the boundary of the domain.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        let [x0, x1, y0, y1] = self.bounds;
        let dx = (p[0] - x0).min(x1 - p[0]);
        if self.dim == 1 {
            dx
        } else {
            dx.min((p[1] - y0).min(y1 - p[1]))
        }
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            dim: self.dim,
            cells: if self.dim == 1 {
                vec![self.cells.0]
            } else {
                vec![self.cells.0, self.cells.1]
            },
            nodes: self.num_nodes(),
            elements: self.num_elements(),
            free_nodes: self.num_free(),
            diam: self.diam,
            bounds: self.bounds[..2 * self.dim].to_vec(),
        }
    }

    /// Stiffness matrix of the Dirichlet Laplacian on the free nodes.
    pub fn stiffness(&self) -> BandedSym {
        let mut k = BandedSym::zeros(self.num_free(), self.bandwidth);
        for e in 0..self.num_elements() {
            let grads = self.basis_gradients(e);
            let w = self.measures[e];
            for (a, &va) in self.element(e).iter().enumerate() {
                let Some(ia) = self.free_index[va] else { continue };
                for (b, &vb) in self.element(e).iter().enumerate() {
                    let Some(ib) = self.free_index[vb] else { continue };
                    if ib > ia {
                        continue;
                    }
                    let v = w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    k.add(ia, ib, v);
                }
            }
        }
        k
    }

    /// Cached Cholesky factor of [`Mesh::stiffness`].
    pub fn laplacian(&self) -> &BandedCholesky {
        self.laplacian
            .get_or_init(|| self.stiffness().cholesky().expect("Dirichlet Laplacian is SPD"))
    }

    /// Discrete `H^{-1}` norm `sqrt(r^T K^{-1} r)` of a dual vector on the free nodes.
    pub fn dual_norm(&self, r: &[f64]) -> f64 {
        let z = self.laplacian().solve(r);
        crate::linalg::dot(r, &z).max(0.0).sqrt()
    }

    /// `K^{-1} r`, the Riesz representative of a dual vector.
    pub fn riesz(&self, r: &[f64]) -> Vec<f64> {
        self.laplacian().solve(r)
    }
}

impl fmt::Debug for Mesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mesh")
            .field("dim", &self.dim)
            .field("cells", &self.cells)
            .field("bounds", &self.bounds)
            .field("nodes", &self.nodes.len())
            .field("elements", &self.elements.len())
            .finish()
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("nodes", &self.nodal.len())
            .field("min", &self.min())
            .field("max", &self.max())
            .field("dirichlet_zero", &self.dirichlet_zero)
            .finish()
    }
}

/// Sum of `weights * values` over the quadrature points.
pub fn integrate(values: &[f64], mesh: &Mesh) -> f64 {
    assert_eq!(values.len(), mesh.num_elements(), "one value per quadrature point");
    values.iter().zip(mesh.weights()).map(|(v, w)| v * w).sum()
}

/// Nodal coefficients of a P1 function.
#[derive(Clone)]
pub struct Field {
    mesh: Arc<Mesh>,
    nodal: Vec<f64>,
    dirichlet_zero: bool,
}

impl Field {
    pub fn zeros(mesh: &Arc<Mesh>) -> Self {
        Field {
            mesh: mesh.clone(),
            nodal: vec![0.0; mesh.num_nodes()],
            dirichlet_zero: true,
        }
    }

    /// Wraps nodal values; with `dirichlet_zero` the boundary values must be exactly zero.
    pub fn from_nodal(mesh: &Arc<Mesh>, nodal: Vec<f64>, dirichlet_zero: bool) -> Result<Self> {
        if nodal.len() != mesh.num_nodes() {
            return Err(Error::Parameter(format!(
                "{} nodal values for a mesh with {} nodes",
                nodal.len(),
                mesh.num_nodes()
            )));
        }
        if dirichlet_zero {
            if let Some(i) = (0..nodal.len()).find(|&i| mesh.boundary[i] && nodal[i] != 0.0) {
                return Err(Error::Parameter(format!("boundary node {i} is not zero")));
            }
        }
        Ok(Field {
            mesh: mesh.clone(),
            nodal,
            dirichlet_zero,
        })
    }

    /// Interpolates `f`, pinning boundary nodes to zero.
    pub fn interpolate(mesh: &Arc<Mesh>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let nodal = (0..mesh.num_nodes())
            .map(|i| if mesh.boundary[i] { 0.0 } else { f(mesh.nodes[i]) })
            .collect();
        Field {
            mesh: mesh.clone(),
            nodal,
            dirichlet_zero: true,
        }
    }

    /// Interpolates `f` at every node, boundary included.
    pub fn interpolate_free_boundary(mesh: &Arc<Mesh>, f: impl Fn([f64; 2]) -> f64) -> Self {
        Field {
            mesh: mesh.clone(),
            nodal: mesh.nodes.iter().map(|&p| f(p)).collect(),
            dirichlet_zero: false,
        }
    }

    /// Dirichlet field with i.i.d. uniform `[-amp, amp]` values on the free nodes,
    /// reproducible from `seed`.
    pub fn random(mesh: &Arc<Mesh>, seed: u64, amp: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free: Vec<f64> = (0..mesh.num_free()).map(|_| rng.gen_range(-amp..=amp)).collect();
        Self::from_free(mesh, &free)
    }

    /// Dirichlet field with the given values on the free nodes.
    pub fn from_free(mesh: &Arc<Mesh>, free: &[f64]) -> Self {
        assert_eq!(free.len(), mesh.num_free());
        let mut nodal = vec![0.0; mesh.num_nodes()];
        for (k, &n) in mesh.free_nodes.iter().enumerate() {
            nodal[n] = free[k];
        }
        Field {
            mesh: mesh.clone(),
            nodal,
            dirichlet_zero: true,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn nodal(&self) -> &[f64] {
        &self.nodal
    }

    pub fn is_dirichlet(&self) -> bool {
        self.dirichlet_zero
    }

    pub fn free_values(&self) -> Vec<f64> {
        self.mesh.free_nodes.iter().map(|&n| self.nodal[n]).collect()
    }

    pub fn same_mesh(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
            || (self.mesh.dim == other.mesh.dim
                && self.mesh.cells == other.mesh.cells
                && self.mesh.bounds == other.mesh.bounds)
    }

    pub fn check_same_mesh(&self, other: &Field) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// Values at the quadrature points.
    pub fn at_quadrature(&self) -> Vec<f64> {
        let m = &self.mesh;
        let c = m.basis_at_quadrature();
        (0..m.num_elements())
            .map(|e| c * m.element(e).iter().map(|&v| self.nodal[v]).sum::<f64>())
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.nodal.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.nodal.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        crate::linalg::norm_inf(&self.nodal)
    }

    /// Nodal linear combination `a self + b other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_same_mesh(other)?;
        Ok(Field {
            mesh: self.mesh.clone(),
            nodal: self.nodal.iter().zip(&other.nodal).map(|(x, y)| a * x + b * y).collect(),
            dirichlet_zero: self.dirichlet_zero && other.dirichlet_zero,
        })
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            mesh: self.mesh.clone(),
            nodal: self.nodal.iter().map(|x| a * x).collect(),
            dirichlet_zero: self.dirichlet_zero,
        }
    }

    /// Nodal map, e.g. truncations `max(u, k)`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let nodal: Vec<f64> = self.nodal.iter().map(|&x| f(x)).collect();
        let dirichlet_zero = self.dirichlet_zero
            && (0..nodal.len()).all(|i| !self.mesh.boundary[i] || nodal[i] == 0.0);
        Field {
            mesh: self.mesh.clone(),
            nodal,
            dirichlet_zero,
        }
    }

    /// Extension by zero onto a larger structured mesh with the same spacing.
    ///
    /// Every node of `self.mesh` must coincide with a node of `target`.
    pub fn zero_extend(&self, target: &Arc<Mesh>) -> Result<Field> {
        let mut nodal = vec![0.0; target.num_nodes()];
        let [tx0, tx1, ty0, ty1] = target.bounds;
        let (tnx, tny) = target.cells;
        let hx = (tx1 - tx0) / tnx as f64;
        let hy = if target.dim == 2 { (ty1 - ty0) / tny as f64 } else { 1.0 };
        for (i, p) in self.mesh.nodes.iter().enumerate() {
            let fi = (p[0] - tx0) / hx;
            let fj = if target.dim == 2 { (p[1] - ty0) / hy } else { 0.0 };
            let (ii, jj) = (fi.round(), fj.round());
            if (fi - ii).abs() > 1e-8 || (fj - jj).abs() > 1e-8 || ii < 0.0 || jj < 0.0 {
                return Err(Error::MeshMismatch);
            }
            let (ii, jj) = (ii as usize, jj as usize);
            if ii > tnx || (target.dim == 2 && jj > tny) {
                return Err(Error::MeshMismatch);
            }
            let idx = if target.dim == 2 { jj * (tnx + 1) + ii } else { ii };
            nodal[idx] = self.nodal[i];
        }
        Field::from_nodal(target, nodal, true)
    }

    /// Writes `node_index, x[, y], value` rows with a header.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        if self.mesh.dim == 1 {
            writeln!(w, "node_index,x,value")?;
        } else {
            writeln!(w, "node_index,x,y,value")?;
        }
        for (i, p) in self.mesh.nodes.iter().enumerate() {
            if self.mesh.dim == 1 {
                writeln!(w, "{i},{:e},{:e}", p[0], self.nodal[i])?;
            } else {
                writeln!(w, "{i},{:e},{:e},{:e}", p[0], p[1], self.nodal[i])?;
            }
        }
        Ok(())
    }

    /// Piecewise-constant gradient per element.
    pub fn gradient_field(&self) -> Vec<[f64; 2]> {
        gradient_field(self)
    }

    /// `|grad u|` per element.
    pub fn gradient_magnitudes(&self) -> Vec<f64> {
        gradient_field(self)
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
            .collect()
    }

    /// Discrete `W^{1,1}` norm `int |grad u|`.
    pub fn w11_norm(&self) -> f64 {
        integrate(&self.gradient_magnitudes(), &self.mesh)
    }

    /// Discrete `W^{1,Phi}` norm: Luxemburg norm of `|grad u|` at the quadrature points.
    pub fn w1phi_norm<F: OrliczFunction + ?Sized>(&self, f: &F) -> f64 {
        let space = SampledMeasureSpace::new(self.mesh.measures.clone(), self.gradient_magnitudes())
            .expect("finite gradients");
        luxemburg_norm(&space, f)
    }

    /// Luxemburg norm of `u` at the quadrature points.
    pub fn lphi_norm<F: OrliczFunction + ?Sized>(&self, f: &F) -> f64 {
        let space = SampledMeasureSpace::new(self.mesh.measures.clone(), self.at_quadrature())
            .expect("finite values");
        luxemburg_norm(&space, f)
    }
}

/// Element-wise constant gradient of a P1 field.
pub fn gradient_field(u: &Field) -> Vec<[f64; 2]> {
    let m = &u.mesh;
    (0..m.num_elements())
        .map(|e| {
            let mut g = [0.0; 2];
            for (a, &v) in m.element(e).iter().enumerate() {
                let bg = m.basis_grads[e][a];
                g[0] += u.nodal[v] * bg[0];
                g[1] += u.nodal[v] * bg[1];
            }
            g
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_counts() {
        let m = build_mesh(1, 4).unwrap();
        assert_eq!(m.num_nodes(), 5);
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.diam(), 1.0);
        let flagged: Vec<usize> = (0..5).filter(|&i| m.boundary_mask()[i]).collect();
        assert_eq!(flagged, vec![0, 4]);
    }

    #[test]
    fn square_counts() {
        let m = build_mesh(2, 2).unwrap();
        assert_eq!(m.num_nodes(), 9);
        assert_eq!(m.num_elements(), 8);
        assert_relative_eq!(m.diam(), 2f64.sqrt());
        assert_eq!(m.num_free(), 1);
        assert!(m.weights().iter().all(|&w| w > 0.0));
        let boundary = m.boundary_mask().iter().filter(|b| **b).count();
        assert_eq!(boundary, 8);
    }

    #[test]
    fn resolution_error() {
        assert!(matches!(build_mesh(1, 1), Err(Error::Resolution(1))));
        assert!(matches!(build_mesh(2, 0), Err(Error::Resolution(0))));
    }

    #[test]
    fn gradients_of_affine_functions() {
        let m = build_mesh(1, 8).unwrap();
        let u = Field::interpolate_free_boundary(&m, |p| p[0]);
        assert!(u.gradient_field().iter().all(|g| g[0] == 1.0));
        let c = Field::interpolate_free_boundary(&m, |_| 3.5);
        assert!(c.gradient_field().iter().all(|g| g[0] == 0.0));

        let m = Mesh::rectangle([0.0, 2.0, -1.0, 1.0], 5, 3).unwrap();
        let u = Field::interpolate_free_boundary(&m, |p| p[0] + 2.0 * p[1]);
        for g in u.gradient_field() {
            assert!((g[0] - 1.0).abs() < 1e-13 && (g[1] - 2.0).abs() < 1e-13, "{g:?}");
        }
    }

    #[test]
    fn integrates_constants_and_affine() {
        let m = build_mesh(1, 4).unwrap();
        assert_relative_eq!(integrate(&[1.0; 4], &m), 1.0);
        let x: Vec<f64> = m.quadrature_points().iter().map(|p| p[0]).collect();
        assert_relative_eq!(integrate(&x, &m), 0.5);
        let m2 = build_mesh(2, 6).unwrap();
        assert_relative_eq!(integrate(&vec![1.0; m2.num_elements()], &m2), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn refinement_agrees_to_second_order() {
        let f = |p: &[f64; 2]| (3.0 * p[0]).sin() * (2.0 * p[1]).cos();
        let exact = (1.0 - 3f64.cos()) / 3.0 * (2f64.sin() / 2.0);
        let err = |n: usize| {
            let m = build_mesh(2, n).unwrap();
            let v: Vec<f64> = m.quadrature_points().iter().map(f).collect();
            (integrate(&v, &m) - exact).abs()
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn dirichlet_fields_pin_boundary() {
        let m = build_mesh(2, 4).unwrap();
        let u = Field::interpolate(&m, |p| 1.0 + p[0]);
        for (i, &b) in m.boundary_mask().iter().enumerate() {
            if b {
                assert_eq!(u.nodal()[i], 0.0);
            }
        }
        assert!(Field::from_nodal(&m, vec![1.0; m.num_nodes()], true).is_err());
    }

    #[test]
    fn zero_extension_embeds_nodes() {
        let m = build_mesh(2, 4).unwrap();
        let big = Mesh::rectangle([-0.25, 1.25, -0.25, 1.25], 6, 6).unwrap();
        let u = Field::interpolate(&m, |p| p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]));
        let ext = u.zero_extend(&big).unwrap();
        assert_relative_eq!(ext.max(), u.max());
        assert_relative_eq!(ext.w11_norm(), u.w11_norm(), max_relative = 1e-12);
    }

    #[test]
    fn dual_norm_of_load() {
        // K^{-1} b for f = 1 is the interpolant of x(1-x)/2; b . K^{-1} b = int u = 1/12 - O(h^2)
        let m = build_mesh(1, 64).unwrap();
        let b = vec![1.0 / 64.0; m.num_free()];
        let dn = m.dual_norm(&b);
        assert!((dn * dn - 1.0 / 12.0).abs() < 1e-4);
    }
}
