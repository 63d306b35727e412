//! NURBS surface patches, multi-patch topology and surface calculus.
//!
//! A [`SurfacePatch`] maps the unit square into R^3 through a rational
//! tensor-product basis. All differential-geometry quantities are computed
//! by pullback: the 3x2 Jacobian J, the first fundamental form F = J^T J,
//! the area element g = sqrt(det F), tangential gradients J F^{-1} grad,
//! unit normals and outward co-normals along patch edges.
//!
//! A [`MultiPatchDomain`] collects patches with interface and boundary
//! facets. Interfaces glue whole edges of geometrically conforming patches;
//! the two sides may carry different (non-matching) knot vectors.

pub mod builders;
pub mod io;

use crate::splines::{insert_knot, SplineError, TensorBasis, TensorValues};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("patch has {points} control points, basis has {basis} functions")]
    ControlCountMismatch { points: usize, basis: usize },
    #[error("weight {index} is not positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("degenerate parameterization at xi = ({xi1}, {xi2}): det F = {det:e}")]
    DegenerateParameterization { xi1: f64, xi2: f64, det: f64 },
    #[error("tangent vectors are linearly dependent at xi = ({0}, {1})")]
    DegenerateTangents(f64, f64),
    #[error("interface {index} sides disagree by {gap:e} at t = {t}")]
    InterfaceMismatch { index: usize, t: f64, gap: f64 },
    #[error("point ({0}, {1}) is too close to the patch boundary for the difference stencil")]
    StencilOutsidePatch(f64, f64),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub fn distance3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// One edge of the unit parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// xi1 = 0, parameterized by xi2 ascending.
    UMin,
    /// xi1 = 1, parameterized by xi2 ascending.
    UMax,
    /// xi2 = 0, parameterized by xi1 ascending.
    VMin,
    /// xi2 = 1, parameterized by xi1 ascending.
    VMax,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::UMin, Edge::UMax, Edge::VMin, Edge::VMax];

    /// Parameter point on the edge at curve coordinate t in [0, 1].
    pub fn param_point(self, t: f64) -> [f64; 2] {
        match self {
            Edge::UMin => [0.0, t],
            Edge::UMax => [1.0, t],
            Edge::VMin => [t, 0.0],
            Edge::VMax => [t, 1.0],
        }
    }

    /// Direction index that varies along the edge.
    pub fn running_dir(self) -> usize {
        match self {
            Edge::UMin | Edge::UMax => 1,
            Edge::VMin | Edge::VMax => 0,
        }
    }

    /// Outward unit normal in parameter space.
    pub fn outward_param_normal(self) -> [f64; 2] {
        match self {
            Edge::UMin => [-1.0, 0.0],
            Edge::UMax => [1.0, 0.0],
            Edge::VMin => [0.0, -1.0],
            Edge::VMax => [0.0, 1.0],
        }
    }
}

/// Jacobian, first fundamental form and area element at one parameter point.
#[derive(Debug, Clone)]
pub struct FirstFundamental {
    /// Jacobian columns: tangent vectors dPhi/dxi_l.
    pub j: [[f64; 3]; 2],
    /// F = J^T J, symmetric positive definite.
    pub f: [[f64; 2]; 2],
    /// g = sqrt(det F), the area element.
    pub g: f64,
}

impl FirstFundamental {
    fn from_jacobian(j: [[f64; 3]; 2], xi: [f64; 2]) -> Result<Self, GeometryError> {
        let f = [
            [dot3(&j[0], &j[0]), dot3(&j[0], &j[1])],
            [dot3(&j[1], &j[0]), dot3(&j[1], &j[1])],
        ];
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        if det <= 1e-14 {
            return Err(GeometryError::DegenerateParameterization {
                xi1: xi[0],
                xi2: xi[1],
                det,
            });
        }
        Ok(Self { j, f, g: det.sqrt() })
    }

    pub fn det_f(&self) -> f64 {
        self.g * self.g
    }

    pub fn f_inv(&self) -> [[f64; 2]; 2] {
        let det = self.det_f();
        [
            [self.f[1][1] / det, -self.f[0][1] / det],
            [-self.f[1][0] / det, self.f[0][0] / det],
        ]
    }

    /// Columns of G = J F^{-1}; G v is the tangential pushforward of a
    /// parametric gradient v.
    pub fn gradient_coeffs(&self) -> [[f64; 3]; 2] {
        let fi = self.f_inv();
        let mut g = [[0.0; 3]; 2];
        for (c, col) in g.iter_mut().enumerate() {
            for d in 0..3 {
                col[d] = self.j[0][d] * fi[0][c] + self.j[1][d] * fi[1][c];
            }
        }
        g
    }

    /// Tangential (surface) gradient of a field with parametric gradient v.
    pub fn push_gradient(&self, v: [f64; 2]) -> [f64; 3] {
        let g = self.gradient_coeffs();
        [
            g[0][0] * v[0] + g[1][0] * v[1],
            g[0][1] * v[0] + g[1][1] * v[1],
            g[0][2] * v[0] + g[1][2] * v[1],
        ]
    }
}

/// A NURBS patch: rational tensor-product map of the unit square into R^3.
///
/// Control points are stored with the first direction index running fastest:
/// entry `i2 * n1 + i1`. Weights all equal to 1 give a plain B-spline patch.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    basis: TensorBasis,
    control_points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl SurfacePatch {
    pub fn new(
        basis: TensorBasis,
        control_points: Vec<[f64; 3]>,
        weights: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let n = basis.num_basis();
        if control_points.len() != n || weights.len() != n {
            return Err(GeometryError::ControlCountMismatch {
                points: control_points.len().min(weights.len()),
                basis: n,
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(GeometryError::NonPositiveWeight { index, value });
            }
        }
        Ok(Self { basis, control_points, weights })
    }

    pub fn basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn control_points(&self) -> &[[f64; 3]] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_basis(&self) -> usize {
        self.basis.num_basis()
    }

    pub fn degrees(&self) -> [usize; 2] {
        self.basis.degrees()
    }

    /// Rational basis values and parametric gradients at xi. This is the
    /// basis the discrete space uses; the geometry map shares it.
    pub fn basis_values(&self, xi: [f64; 2]) -> Result<TensorValues, GeometryError> {
        let mut tv = self.basis.eval(xi)?;
        let n1 = self.basis.num_basis_dir(0);
        let count = tv.values.len();
        let mut w_sum = 0.0;
        let mut w_grad = [0.0; 2];
        let mut gw = Vec::with_capacity(count);
        for local in 0..count {
            let g = self.weights[tv.global_index(local, n1)];
            gw.push(g);
            w_sum += g * tv.values[local];
            w_grad[0] += g * tv.grads[local][0];
            w_grad[1] += g * tv.grads[local][1];
        }
        for local in 0..count {
            let w = gw[local];
            let r = w * tv.values[local] / w_sum;
            tv.grads[local] = [
                (w * tv.grads[local][0] - r * w_grad[0]) / w_sum,
                (w * tv.grads[local][1] - r * w_grad[1]) / w_sum,
            ];
            tv.values[local] = r;
        }
        Ok(tv)
    }

    /// Physical point Phi(xi).
    pub fn map_point(&self, xi: [f64; 2]) -> Result<[f64; 3], GeometryError> {
        let tv = self.basis_values(xi)?;
        let n1 = self.basis.num_basis_dir(0);
        let mut x = [0.0; 3];
        for (local, &v) in tv.values.iter().enumerate() {
            let c = &self.control_points[tv.global_index(local, n1)];
            for d in 0..3 {
                x[d] += v * c[d];
            }
        }
        Ok(x)
    }

    /// Jacobian columns dPhi/dxi_l.
    pub fn jacobian(&self, xi: [f64; 2]) -> Result<[[f64; 3]; 2], GeometryError> {
        let tv = self.basis_values(xi)?;
        let n1 = self.basis.num_basis_dir(0);
        let mut j = [[0.0; 3]; 2];
        for (local, grad) in tv.grads.iter().enumerate() {
            let c = &self.control_points[tv.global_index(local, n1)];
            for l in 0..2 {
                for d in 0..3 {
                    j[l][d] += grad[l] * c[d];
                }
            }
        }
        Ok(j)
    }

    /// Jacobian, first fundamental form and area element at xi.
    pub fn fundamental(&self, xi: [f64; 2]) -> Result<FirstFundamental, GeometryError> {
        FirstFundamental::from_jacobian(self.jacobian(xi)?, xi)
    }

    /// Unit surface normal t1 x t2 / |t1 x t2|.
    pub fn surface_normal(&self, xi: [f64; 2]) -> Result<[f64; 3], GeometryError> {
        let j = self.jacobian(xi)?;
        let n = cross3(&j[0], &j[1]);
        let len = norm3(&n);
        if len < 1e-14 {
            return Err(GeometryError::DegenerateTangents(xi[0], xi[1]));
        }
        Ok([n[0] / len, n[1] / len, n[2] / len])
    }

    /// Outward unit co-normal along `edge` at curve coordinate t: tangent to
    /// the surface, orthogonal to the edge curve, pointing out of the patch.
    pub fn conormal(&self, edge: Edge, t: f64) -> Result<[f64; 3], GeometryError> {
        let xi = edge.param_point(t);
        let ff = self.fundamental(xi)?;
        let nu = edge.outward_param_normal();
        let v = ff.push_gradient(nu);
        let len = norm3(&v);
        if len < 1e-14 {
            return Err(GeometryError::DegenerateTangents(xi[0], xi[1]));
        }
        Ok([v[0] / len, v[1] / len, v[2] / len])
    }

    /// Arc speed |dPhi/dt| along `edge` at curve coordinate t.
    pub fn edge_speed(&self, edge: Edge, t: f64) -> Result<f64, GeometryError> {
        let xi = edge.param_point(t);
        let j = self.jacobian(xi)?;
        Ok(norm3(&j[edge.running_dir()]))
    }

    /// Laplace–Beltrami of a parametric scalar field at xi, evaluated as
    /// (1/g) div [g F^{-1} grad field] with the outer divergence taken by
    /// central differences (step 1e-5 relative to the containing span).
    /// Verification tool only; assembly never needs second derivatives.
    pub fn laplace_beltrami_of<Field>(
        &self,
        field: &Field,
        xi: [f64; 2],
    ) -> Result<f64, GeometryError>
    where
        Field: Fn([f64; 2]) -> (f64, [f64; 2]),
    {
        let mut steps = [0.0; 2];
        for dir in 0..2 {
            let kv = self.basis.kv(dir);
            let span = kv.find_span(xi[dir])?;
            let knots = kv.knots();
            steps[dir] = 1e-5 * (knots[span + 1] - knots[span]);
        }
        if xi[0] - steps[0] < 0.0
            || xi[0] + steps[0] > 1.0
            || xi[1] - steps[1] < 0.0
            || xi[1] + steps[1] > 1.0
        {
            return Err(GeometryError::StencilOutsidePatch(xi[0], xi[1]));
        }
        let flux = |p: [f64; 2]| -> Result<[f64; 2], GeometryError> {
            let ff = self.fundamental(p)?;
            let (_, grad) = field(p);
            let fi = ff.f_inv();
            Ok([
                ff.g * (fi[0][0] * grad[0] + fi[0][1] * grad[1]),
                ff.g * (fi[1][0] * grad[0] + fi[1][1] * grad[1]),
            ])
        };
        let mut div = 0.0;
        for dir in 0..2 {
            let mut hi = xi;
            let mut lo = xi;
            hi[dir] += steps[dir];
            lo[dir] -= steps[dir];
            div += (flux(hi)?[dir] - flux(lo)?[dir]) / (2.0 * steps[dir]);
        }
        Ok(div / self.fundamental(xi)?.g)
    }

    /// Exact dyadic h-refinement: midpoint knots inserted with Boehm's rule
    /// on the homogeneous control net, so the mapped surface is unchanged.
    pub fn refine_dyadic(&self, levels: [usize; 2]) -> Result<SurfacePatch, GeometryError> {
        let mut hom: Vec<[f64; 4]> = self
            .control_points
            .iter()
            .zip(&self.weights)
            .map(|(c, &w)| [c[0] * w, c[1] * w, c[2] * w, w])
            .collect();
        let mut kv1 = self.basis.kv(0).clone();
        let mut kv2 = self.basis.kv(1).clone();

        for u in self.basis.kv(0).dyadic_insertions(levels[0]) {
            let n1 = kv1.num_basis();
            let n2 = kv2.num_basis();
            let mut next = Vec::with_capacity((n1 + 1) * n2);
            let mut new_kv = None;
            for i2 in 0..n2 {
                let row: Vec<[f64; 4]> = hom[i2 * n1..(i2 + 1) * n1].to_vec();
                let (kv_row, new_row) = insert_knot(&kv1, &row, u)?;
                next.extend(new_row);
                new_kv = Some(kv_row);
            }
            kv1 = new_kv.expect("at least one row");
            hom = next;
        }
        for u in self.basis.kv(1).dyadic_insertions(levels[1]) {
            let n1 = kv1.num_basis();
            let n2 = kv2.num_basis();
            let mut cols = Vec::with_capacity(n1 * (n2 + 1));
            let mut new_kv = None;
            // insert along direction 2 column by column, then re-interleave
            let mut new_cols: Vec<Vec<[f64; 4]>> = Vec::with_capacity(n1);
            for i1 in 0..n1 {
                let col: Vec<[f64; 4]> = (0..n2).map(|i2| hom[i2 * n1 + i1]).collect();
                let (kv_col, new_col) = insert_knot(&kv2, &col, u)?;
                new_cols.push(new_col);
                new_kv = Some(kv_col);
            }
            kv2 = new_kv.expect("at least one column");
            for i2 in 0..n2 + 1 {
                for col in new_cols.iter() {
                    cols.push(col[i2]);
                }
            }
            hom = cols;
        }

        let control_points = hom
            .iter()
            .map(|h| [h[0] / h[3], h[1] / h[3], h[2] / h[3]])
            .collect();
        let weights = hom.iter().map(|h| h[3]).collect();
        SurfacePatch::new(TensorBasis::new(kv1, kv2), control_points, weights)
    }

    /// Maximum physical diameter over knot-span images, sampled at span
    /// corners and midpoints.
    pub fn mesh_size(&self) -> Result<f64, GeometryError> {
        let spans1 = self.basis.kv(0).spans();
        let spans2 = self.basis.kv(1).spans();
        let mut h = 0.0f64;
        for &(a1, b1) in &spans1 {
            for &(a2, b2) in &spans2 {
                let xs = [a1, 0.5 * (a1 + b1), b1];
                let ys = [a2, 0.5 * (a2 + b2), b2];
                let mut pts = Vec::with_capacity(9);
                for &x in &xs {
                    for &y in &ys {
                        pts.push(self.map_point([x, y])?);
                    }
                }
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        h = h.max(distance3(&pts[i], &pts[j]));
                    }
                }
            }
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// A whole-edge gluing between two patches (possibly the same patch for
/// closed-surface seams). The owner side supplies the facet co-normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    pub owner: usize,
    pub owner_edge: Edge,
    pub neighbor: usize,
    pub neighbor_edge: Edge,
    /// true when the neighbor edge runs in the opposite physical direction.
    pub flipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFacet {
    pub patch: usize,
    pub edge: Edge,
    pub kind: BoundaryKind,
}

/// Multi-patch surface: patches plus interface and boundary facets.
#[derive(Debug, Clone)]
pub struct MultiPatchDomain {
    patches: Vec<SurfacePatch>,
    interfaces: Vec<Interface>,
    boundary: Vec<BoundaryFacet>,
}

pub const CONFORMITY_TOL: f64 = 1e-10;

impl MultiPatchDomain {
    pub fn new(
        patches: Vec<SurfacePatch>,
        interfaces: Vec<Interface>,
        boundary: Vec<BoundaryFacet>,
    ) -> Result<Self, GeometryError> {
        let domain = Self { patches, interfaces, boundary };
        domain.validate()?;
        Ok(domain)
    }

    pub fn patches(&self) -> &[SurfacePatch] {
        &self.patches
    }

    pub fn patch(&self, i: usize) -> &SurfacePatch {
        &self.patches[i]
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    pub fn boundary(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let np = self.patches.len();
        if np == 0 {
            return Err(GeometryError::InvalidDomain("no patches".into()));
        }
        let mut seen: Vec<(usize, Edge)> = Vec::new();
        let mut claim = |patch: usize, edge: Edge| -> Result<(), GeometryError> {
            if patch >= np {
                return Err(GeometryError::InvalidDomain(format!(
                    "facet references patch {patch} out of {np}"
                )));
            }
            if seen.contains(&(patch, edge)) {
                return Err(GeometryError::InvalidDomain(format!(
                    "edge {edge:?} of patch {patch} appears in more than one facet"
                )));
            }
            seen.push((patch, edge));
            Ok(())
        };
        for iface in &self.interfaces {
            claim(iface.owner, iface.owner_edge)?;
            claim(iface.neighbor, iface.neighbor_edge)?;
        }
        for b in &self.boundary {
            claim(b.patch, b.edge)?;
        }
        // geometric conformity along every interface
        for (index, _) in self.interfaces.iter().enumerate() {
            for k in 0..=16 {
                let t = k as f64 / 16.0;
                self.interface_pullback(index, t).map_err(|e| match e {
                    GeometryError::InterfaceMismatch { t, gap, .. } => {
                        GeometryError::InterfaceMismatch { index, t, gap }
                    }
                    other => other,
                })?;
            }
        }
        Ok(())
    }

    /// Parameter points on both sides of interface `index` at owner curve
    /// coordinate t; the two sides map to the same physical point within
    /// the conformity tolerance.
    pub fn interface_pullback(
        &self,
        index: usize,
        t: f64,
    ) -> Result<([f64; 2], [f64; 2]), GeometryError> {
        let iface = &self.interfaces[index];
        let xi_own = iface.owner_edge.param_point(t);
        let tn = if iface.flipped { 1.0 - t } else { t };
        let xi_nbr = iface.neighbor_edge.param_point(tn);
        let a = self.patches[iface.owner].map_point(xi_own)?;
        let b = self.patches[iface.neighbor].map_point(xi_nbr)?;
        let gap = distance3(&a, &b);
        if gap > CONFORMITY_TOL {
            return Err(GeometryError::InterfaceMismatch { index, t, gap });
        }
        Ok((xi_own, xi_nbr))
    }

    /// Refine every patch by `levels[i]` dyadic steps; topology is kept.
    pub fn refined(&self, levels: &[usize]) -> Result<MultiPatchDomain, GeometryError> {
        if levels.len() != self.patches.len() {
            return Err(GeometryError::InvalidDomain(format!(
                "{} refinement levels for {} patches",
                levels.len(),
                self.patches.len()
            )));
        }
        let patches = self
            .patches
            .iter()
            .zip(levels)
            .map(|(p, &l)| p.refine_dyadic([l, l]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MultiPatchDomain {
            patches,
            interfaces: self.interfaces.clone(),
            boundary: self.boundary.clone(),
        })
    }

    /// Uniform refinement of all patches.
    pub fn refined_uniform(&self, level: usize) -> Result<MultiPatchDomain, GeometryError> {
        self.refined(&vec![level; self.patches.len()])
    }
}

#[cfg(test)]
mod tests;
