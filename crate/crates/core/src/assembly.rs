//! The discontinuous multi-patch space and the symmetric interior-penalty
//! bilinear form.
//!
//! Degrees of freedom are patch-local; nothing is shared across interfaces.
//! The global system is
//!
//! ```text
//! a_h(u, v) = sum_i  int_{Omega_i} alpha_i grad_S u . grad_S v (+ u v) dx
//!           - sum_F  int_F alpha_ij ( n.{grad_S u} [v] + n.{grad_S v} [u] ) ds
//!           + sum_F  int_F delta alpha_ij / (2 h_ij) [u][v] ds
//!           + Nitsche terms on Dirichlet facets,
//! ```
//!
//! with `[v] = v_i - v_j`, `{w} = (w_i + w_j)/2`, the owner-side co-normal
//! `n`, harmonic means `h_ij`, `alpha_ij`, and the degree-based penalty
//! `delta = 2(p+2)(p+1)`. Every interface facet is visited exactly once.

use crate::geometry::{BoundaryKind, GeometryError, MultiPatchDomain, SurfacePatch};
use crate::quadrature::{
    edge_quadrature, gauss_legendre, interface_quadrature, QuadratureError,
};
use crate::solver::{SolverError, SparseSym};
use crate::splines::TensorValues;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("harmonic mean requires positive arguments, got {0} and {1}")]
    NonPositiveHarmonicArgs(f64, f64),
    #[error("problem supplies {given} diffusion coefficients for {patches} patches")]
    AlphaCountMismatch { given: usize, patches: usize },
    #[error("diffusion coefficient {index} is not positive: {value}")]
    NonPositiveAlpha { index: usize, value: f64 },
    #[error("penalty parameter must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("assembled matrix is not symmetric: max |A - A^T| = {0:e}")]
    SymmetryViolation(f64),
}

/// Harmonic mean 2ab/(a+b); bounded by 2 min(a, b).
pub fn harmonic_mean(a: f64, b: f64) -> Result<f64, AssemblyError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(AssemblyError::NonPositiveHarmonicArgs(a, b));
    }
    Ok(2.0 * a * b / (a + b))
}

/// Interior-penalty parameter.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyConfig {
    pub delta: f64,
}

impl PenaltyConfig {
    /// The degree-based default delta = 2(p+2)(p+1).
    pub fn from_degree(p: usize) -> Self {
        Self { delta: 2.0 * (p as f64 + 2.0) * (p as f64 + 1.0) }
    }

    pub fn new(delta: f64) -> Result<Self, AssemblyError> {
        if !(delta > 0.0) {
            return Err(AssemblyError::NonPositivePenalty(delta));
        }
        Ok(Self { delta })
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;
pub type PatchScalarFn = Arc<dyn Fn(usize, &[f64; 3]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64; 3]) -> [f64; 3] + Send + Sync>;

/// Exact solution for error measurement: value and tangential gradient at a
/// physical point.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarFn,
    pub surface_gradient: VectorFn,
}

/// Model data: patchwise diffusion, optional reaction term, source, boundary
/// data and an optional exact solution.
#[derive(Clone)]
pub struct ModelProblem {
    pub alpha: Vec<f64>,
    pub reaction: bool,
    /// Source f evaluated per patch at a physical point (patchwise sources
    /// support jumping-coefficient manufactured solutions).
    pub source: PatchScalarFn,
    /// Neumann datum g_N, applied on Neumann boundary facets.
    pub neumann: Option<ScalarFn>,
    /// Dirichlet datum (zero for all benchmarks).
    pub dirichlet_value: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl ModelProblem {
    pub fn new(alpha: Vec<f64>, reaction: bool, source: PatchScalarFn) -> Self {
        Self {
            alpha,
            reaction,
            source,
            neumann: None,
            dirichlet_value: Arc::new(|_x| 0.0),
            exact: None,
        }
    }

    pub fn zero_source(alpha: Vec<f64>, reaction: bool) -> Self {
        Self::new(alpha, reaction, Arc::new(|_p, _x| 0.0))
    }

    pub fn validate(&self, domain: &MultiPatchDomain) -> Result<(), AssemblyError> {
        if self.alpha.len() != domain.num_patches() {
            return Err(AssemblyError::AlphaCountMismatch {
                given: self.alpha.len(),
                patches: domain.num_patches(),
            });
        }
        for (index, &value) in self.alpha.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(AssemblyError::NonPositiveAlpha { index, value });
            }
        }
        Ok(())
    }
}

/// The discontinuous space: dof offsets per patch and patch mesh sizes.
/// The per-patch basis lives on the (refined) geometry itself.
#[derive(Debug, Clone)]
pub struct DgSpace {
    offsets: Vec<usize>,
    num_dofs: usize,
    h: Vec<f64>,
}

impl DgSpace {
    pub fn new(domain: &MultiPatchDomain) -> Result<Self, GeometryError> {
        let mut offsets = Vec::with_capacity(domain.num_patches());
        let mut num_dofs = 0;
        let mut h = Vec::with_capacity(domain.num_patches());
        for patch in domain.patches() {
            offsets.push(num_dofs);
            num_dofs += patch.num_basis();
            h.push(patch.mesh_size()?);
        }
        Ok(Self { offsets, num_dofs, h })
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn offset(&self, patch: usize) -> usize {
        self.offsets[patch]
    }

    /// Patch mesh size h_i: maximum knot-span image diameter.
    pub fn mesh_size(&self, patch: usize) -> f64 {
        self.h[patch]
    }

    pub fn max_mesh_size(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }

    pub fn mesh_sizes(&self) -> &[f64] {
        &self.h
    }

    /// Value and tangential gradient of a discrete field on one patch.
    pub fn value_and_gradient(
        &self,
        domain: &MultiPatchDomain,
        patch_idx: usize,
        xi: [f64; 2],
        u: &[f64],
    ) -> Result<(f64, [f64; 3]), GeometryError> {
        let patch = domain.patch(patch_idx);
        let tv = patch.basis_values(xi)?;
        let ff = patch.fundamental(xi)?;
        let (value, pgrad) = self.local_value_and_param_grad(patch, patch_idx, &tv, u);
        Ok((value, ff.push_gradient(pgrad)))
    }

    /// Value only (cheaper, used for traces in jump terms).
    pub fn value(
        &self,
        domain: &MultiPatchDomain,
        patch_idx: usize,
        xi: [f64; 2],
        u: &[f64],
    ) -> Result<f64, GeometryError> {
        let patch = domain.patch(patch_idx);
        let tv = patch.basis_values(xi)?;
        let n1 = patch.basis().num_basis_dir(0);
        let base = self.offsets[patch_idx];
        let mut value = 0.0;
        for (local, &v) in tv.values.iter().enumerate() {
            value += v * u[base + tv.global_index(local, n1)];
        }
        Ok(value)
    }

    fn local_value_and_param_grad(
        &self,
        patch: &SurfacePatch,
        patch_idx: usize,
        tv: &TensorValues,
        u: &[f64],
    ) -> (f64, [f64; 2]) {
        let n1 = patch.basis().num_basis_dir(0);
        let base = self.offsets[patch_idx];
        let mut value = 0.0;
        let mut pgrad = [0.0; 2];
        for (local, &v) in tv.values.iter().enumerate() {
            let c = u[base + tv.global_index(local, n1)];
            value += v * c;
            pgrad[0] += tv.grads[local][0] * c;
            pgrad[1] += tv.grads[local][1] * c;
        }
        (value, pgrad)
    }
}

/// Default quadrature: max degree + 1 Gauss points per direction per span.
pub fn default_quad_order(domain: &MultiPatchDomain) -> usize {
    domain
        .patches()
        .iter()
        .map(|p| p.degrees()[0].max(p.degrees()[1]))
        .max()
        .unwrap_or(1)
        + 1
}

pub type Triplet = (usize, usize, f64);

/// Assembled dG system.
#[derive(Debug)]
pub struct DgSystem {
    pub matrix: SparseSym,
    pub rhs: Vec<f64>,
}

struct SideTrace {
    dofs: Vec<usize>,
    values: Vec<f64>,
    normal_grads: Vec<f64>,
}

fn side_trace(
    space: &DgSpace,
    domain: &MultiPatchDomain,
    patch_idx: usize,
    xi: [f64; 2],
    conormal: &[f64; 3],
) -> Result<SideTrace, GeometryError> {
    let patch = domain.patch(patch_idx);
    let tv = patch.basis_values(xi)?;
    let ff = patch.fundamental(xi)?;
    let g = ff.gradient_coeffs();
    // n . (G grad_hat b) = (G^T n) . grad_hat b
    let gtn = [
        g[0][0] * conormal[0] + g[0][1] * conormal[1] + g[0][2] * conormal[2],
        g[1][0] * conormal[0] + g[1][1] * conormal[1] + g[1][2] * conormal[2],
    ];
    let n1 = patch.basis().num_basis_dir(0);
    let base = space.offset(patch_idx);
    let count = tv.values.len();
    let mut dofs = Vec::with_capacity(count);
    let mut normal_grads = Vec::with_capacity(count);
    for local in 0..count {
        dofs.push(base + tv.global_index(local, n1));
        normal_grads.push(gtn[0] * tv.grads[local][0] + gtn[1] * tv.grads[local][1]);
    }
    Ok(SideTrace { dofs, values: tv.values, normal_grads })
}

/// Volume terms: alpha_i grad.grad (+ uv when the reaction term is on),
/// intra-patch couplings only.
pub fn assemble_volume(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    order: usize,
) -> Result<Vec<Triplet>, AssemblyError> {
    problem.validate(domain)?;
    let rule = gauss_legendre(order)?;
    let per_patch: Vec<Result<Vec<Triplet>, AssemblyError>> = (0..domain.num_patches())
        .into_par_iter()
        .map(|pi| {
            let patch = domain.patch(pi);
            let alpha = problem.alpha[pi];
            let n1 = patch.basis().num_basis_dir(0);
            let base = space.offset(pi);
            let mut triplets = Vec::new();
            for &(a1, b1) in &patch.basis().kv(0).spans() {
                for &(a2, b2) in &patch.basis().kv(1).spans() {
                    let (m1, s1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
                    let (m2, s2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
                    for (i, &p1) in rule.points.iter().enumerate() {
                        for (j, &p2) in rule.points.iter().enumerate() {
                            let xi = [m1 + s1 * p1, m2 + s2 * p2];
                            let tv = patch.basis_values(xi)?;
                            let ff = patch.fundamental(xi)?;
                            let w = rule.weights[i] * rule.weights[j] * s1 * s2 * ff.g;
                            let g = ff.gradient_coeffs();
                            let count = tv.values.len();
                            let mut dofs = Vec::with_capacity(count);
                            let mut pg: Vec<[f64; 3]> = Vec::with_capacity(count);
                            for local in 0..count {
                                dofs.push(base + tv.global_index(local, n1));
                                let d = tv.grads[local];
                                pg.push([
                                    g[0][0] * d[0] + g[1][0] * d[1],
                                    g[0][1] * d[0] + g[1][1] * d[1],
                                    g[0][2] * d[0] + g[1][2] * d[1],
                                ]);
                            }
                            for r in 0..count {
                                for s in 0..count {
                                    let mut val = alpha
                                        * (pg[r][0] * pg[s][0]
                                            + pg[r][1] * pg[s][1]
                                            + pg[r][2] * pg[s][2]);
                                    if problem.reaction {
                                        val += tv.values[r] * tv.values[s];
                                    }
                                    triplets.push((dofs[r], dofs[s], val * w));
                                }
                            }
                        }
                    }
                }
            }
            Ok(triplets)
        })
        .collect();
    let mut out = Vec::new();
    for part in per_patch {
        out.extend(part?);
    }
    Ok(out)
}

/// Interface terms: consistency/symmetry fluxes (subtracted) and the jump
/// penalty, each facet visited once from its owner side.
pub fn assemble_interface(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    penalty: PenaltyConfig,
    order: usize,
) -> Result<Vec<Triplet>, AssemblyError> {
    problem.validate(domain)?;
    let per_iface: Vec<Result<Vec<Triplet>, AssemblyError>> = (0..domain.interfaces().len())
        .into_par_iter()
        .map(|index| {
            let iface = &domain.interfaces()[index];
            let alpha_ij = harmonic_mean(problem.alpha[iface.owner], problem.alpha[iface.neighbor])?;
            let h_ij = harmonic_mean(space.mesh_size(iface.owner), space.mesh_size(iface.neighbor))?;
            let pen = penalty.delta * alpha_ij / (2.0 * h_ij);
            let quad = interface_quadrature(domain, index, order)?;
            let mut triplets = Vec::new();
            for pt in &quad.points {
                let n = domain.patch(iface.owner).conormal(iface.owner_edge, pt.t)?;
                let own = side_trace(space, domain, iface.owner, pt.xi_owner, &n)?;
                let nbr = side_trace(space, domain, iface.neighbor, pt.xi_neighbor, &n)?;
                let count = own.dofs.len() + nbr.dofs.len();
                let mut dofs = Vec::with_capacity(count);
                let mut jumps = Vec::with_capacity(count);
                let mut avg_ngrad = Vec::with_capacity(count);
                for k in 0..own.dofs.len() {
                    dofs.push(own.dofs[k]);
                    jumps.push(own.values[k]);
                    avg_ngrad.push(0.5 * own.normal_grads[k]);
                }
                for k in 0..nbr.dofs.len() {
                    dofs.push(nbr.dofs[k]);
                    jumps.push(-nbr.values[k]);
                    avg_ngrad.push(0.5 * nbr.normal_grads[k]);
                }
                let w = pt.weight;
                for r in 0..count {
                    for s in 0..count {
                        // products parenthesized so (r, s) and (s, r)
                        // round identically and the matrix is exactly
                        // symmetric
                        let val = -alpha_ij * (avg_ngrad[s] * jumps[r] + avg_ngrad[r] * jumps[s])
                            + pen * (jumps[r] * jumps[s]);
                        triplets.push((dofs[r], dofs[s], val * w));
                    }
                }
            }
            Ok(triplets)
        })
        .collect();
    let mut out = Vec::new();
    for part in per_iface {
        out.extend(part?);
    }
    Ok(out)
}

/// Nitsche terms on Dirichlet facets: single-sided jump/average, penalty
/// `delta alpha_i / h_i`, plus the matching right-hand-side contributions
/// (zero for homogeneous data). A no-op on closed surfaces.
pub fn assemble_dirichlet(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    penalty: PenaltyConfig,
    order: usize,
) -> Result<(Vec<Triplet>, Vec<f64>), AssemblyError> {
    problem.validate(domain)?;
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; space.num_dofs()];
    for facet in domain.boundary() {
        if facet.kind != BoundaryKind::Dirichlet {
            continue;
        }
        let pi = facet.patch;
        let patch = domain.patch(pi);
        let alpha = problem.alpha[pi];
        let pen = penalty.delta * alpha / space.mesh_size(pi);
        for pt in edge_quadrature(patch, facet.edge, order)? {
            let n = patch.conormal(facet.edge, pt.t)?;
            let tr = side_trace(space, domain, pi, pt.xi, &n)?;
            let count = tr.dofs.len();
            let w = pt.weight;
            for r in 0..count {
                for s in 0..count {
                    let val = -alpha * (tr.normal_grads[s] * tr.values[r]
                        + tr.normal_grads[r] * tr.values[s])
                        + pen * (tr.values[r] * tr.values[s]);
                    triplets.push((tr.dofs[r], tr.dofs[s], val * w));
                }
            }
            let gd = (problem.dirichlet_value)(&patch.map_point(pt.xi)?);
            if gd != 0.0 {
                for r in 0..count {
                    rhs[tr.dofs[r]] += w * gd * (-alpha * tr.normal_grads[r] + pen * tr.values[r]);
                }
            }
        }
    }
    Ok((triplets, rhs))
}

/// Load vector: volume source plus Neumann edge terms.
pub fn assemble_rhs(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    order: usize,
) -> Result<Vec<f64>, AssemblyError> {
    problem.validate(domain)?;
    let rule = gauss_legendre(order)?;
    let per_patch: Vec<Result<Vec<(usize, f64)>, AssemblyError>> = (0..domain.num_patches())
        .into_par_iter()
        .map(|pi| {
            let patch = domain.patch(pi);
            let n1 = patch.basis().num_basis_dir(0);
            let base = space.offset(pi);
            let mut contrib = Vec::new();
            for &(a1, b1) in &patch.basis().kv(0).spans() {
                for &(a2, b2) in &patch.basis().kv(1).spans() {
                    let (m1, s1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
                    let (m2, s2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
                    for (i, &p1) in rule.points.iter().enumerate() {
                        for (j, &p2) in rule.points.iter().enumerate() {
                            let xi = [m1 + s1 * p1, m2 + s2 * p2];
                            let tv = patch.basis_values(xi)?;
                            let ff = patch.fundamental(xi)?;
                            let x = patch.map_point(xi)?;
                            let f = (problem.source)(pi, &x);
                            if f == 0.0 {
                                continue;
                            }
                            let w = rule.weights[i] * rule.weights[j] * s1 * s2 * ff.g * f;
                            for (local, &v) in tv.values.iter().enumerate() {
                                contrib.push((base + tv.global_index(local, n1), v * w));
                            }
                        }
                    }
                }
            }
            Ok(contrib)
        })
        .collect();
    let mut rhs = vec![0.0; space.num_dofs()];
    for part in per_patch {
        for (dof, v) in part? {
            rhs[dof] += v;
        }
    }
    if let Some(neumann) = &problem.neumann {
        for facet in domain.boundary() {
            if facet.kind != BoundaryKind::Neumann {
                continue;
            }
            let patch = domain.patch(facet.patch);
            let n1 = patch.basis().num_basis_dir(0);
            let base = space.offset(facet.patch);
            for pt in edge_quadrature(patch, facet.edge, order)? {
                let x = patch.map_point(pt.xi)?;
                let g = neumann(&x);
                let tv = patch.basis_values(pt.xi)?;
                for (local, &v) in tv.values.iter().enumerate() {
                    rhs[base + tv.global_index(local, n1)] += pt.weight * g * v;
                }
            }
        }
    }
    Ok(rhs)
}

/// Assemble the full dG system; the matrix is checked for symmetry.
pub fn build_system(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    penalty: PenaltyConfig,
    order: usize,
) -> Result<DgSystem, AssemblyError> {
    let mut triplets = assemble_volume(domain, space, problem, order)?;
    triplets.extend(assemble_interface(domain, space, problem, penalty, order)?);
    let (dir_triplets, dir_rhs) = assemble_dirichlet(domain, space, problem, penalty, order)?;
    triplets.extend(dir_triplets);
    let mut rhs = assemble_rhs(domain, space, problem, order)?;
    for (r, v) in rhs.iter_mut().zip(&dir_rhs) {
        *r += v;
    }
    let matrix = SparseSym::from_triplets(space.num_dofs(), triplets)?;
    let sym_err = matrix.symmetry_error();
    if sym_err > 1e-12 {
        return Err(AssemblyError::SymmetryViolation(sym_err));
    }
    Ok(DgSystem { matrix, rhs })
}

impl DgSystem {
    /// Energy u^T A v of two coefficient vectors.
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut av = vec![0.0; v.len()];
        self.matrix.matvec(v, &mut av);
        u.iter().zip(&av).map(|(a, b)| a * b).sum()
    }
}
