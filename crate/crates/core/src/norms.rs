//! Discrete dG norms and error functionals.
//!
//! The dG norm collects the weighted broken gradient, the L2 term and the
//! interface jump penalties with the same coefficients the bilinear form
//! uses; the starred norm adds patch-boundary gradient terms. Error mode
//! evaluates `u_exact - u_h` pointwise through the problem's exact solution.

use crate::assembly::{harmonic_mean, AssemblyError, DgSpace, ModelProblem, PenaltyConfig};
use crate::geometry::{Edge, MultiPatchDomain};
use crate::quadrature::{edge_quadrature, gauss_legendre, interface_quadrature};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NormError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Quadrature(#[from] crate::quadrature::QuadratureError),
    #[error("error norms need an exact solution on the problem")]
    MissingExactSolution,
    #[error("convergence rate needs positive errors, got {0} and {1}")]
    NonPositiveError(f64, f64),
}

/// What to measure: a discrete field or its deviation from the exact
/// solution.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    Discrete(&'a [f64]),
    ErrorVsExact(&'a [f64]),
}

impl<'a> Field<'a> {
    fn coeffs(&self) -> &'a [f64] {
        match self {
            Field::Discrete(c) | Field::ErrorVsExact(c) => c,
        }
    }

    fn is_error(&self) -> bool {
        matches!(self, Field::ErrorVsExact(_))
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Pointwise value and tangential gradient of the measured field on one
/// patch.
fn field_at(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    field: &Field,
    patch: usize,
    xi: [f64; 2],
) -> Result<(f64, [f64; 3]), NormError> {
    let (v, g) = space.value_and_gradient(domain, patch, xi, field.coeffs())?;
    if field.is_error() {
        let exact = problem.exact.as_ref().ok_or(NormError::MissingExactSolution)?;
        let x = domain.patch(patch).map_point(xi)?;
        let ev = (exact.value)(&x);
        let eg = (exact.surface_gradient)(&x);
        Ok((ev - v, sub3(eg, g)))
    } else {
        Ok((v, g))
    }
}

fn field_value_at(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    field: &Field,
    patch: usize,
    xi: [f64; 2],
) -> Result<f64, NormError> {
    let v = space.value(domain, patch, xi, field.coeffs())?;
    if field.is_error() {
        let exact = problem.exact.as_ref().ok_or(NormError::MissingExactSolution)?;
        let x = domain.patch(patch).map_point(xi)?;
        Ok((exact.value)(&x) - v)
    } else {
        Ok(v)
    }
}

/// Squared volume contributions: sum_i (alpha_i |grad_S v|^2 + v^2) and the
/// plain L2 part, returned as (weighted_gradient_sq, l2_sq).
fn volume_parts(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    field: &Field,
    order: usize,
) -> Result<(f64, f64), NormError> {
    let rule = gauss_legendre(order)?;
    let mut grad_sq = 0.0;
    let mut l2_sq = 0.0;
    for pi in 0..domain.num_patches() {
        let patch = domain.patch(pi);
        let alpha = problem.alpha[pi];
        for &(a1, b1) in &patch.basis().kv(0).spans() {
            for &(a2, b2) in &patch.basis().kv(1).spans() {
                let (m1, s1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
                let (m2, s2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
                for (i, &p1) in rule.points.iter().enumerate() {
                    for (j, &p2) in rule.points.iter().enumerate() {
                        let xi = [m1 + s1 * p1, m2 + s2 * p2];
                        let g = patch.fundamental(xi)?.g;
                        let w = rule.weights[i] * rule.weights[j] * s1 * s2 * g;
                        let (v, grad) = field_at(domain, space, problem, field, pi, xi)?;
                        grad_sq += alpha * dot3(&grad, &grad) * w;
                        l2_sq += v * v * w;
                    }
                }
            }
        }
    }
    Ok((grad_sq, l2_sq))
}

/// Squared jump penalty over all interfaces with the assembly coefficients
/// delta alpha_ij / (2 h_ij).
pub fn interface_jump_energy(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    penalty: PenaltyConfig,
    field: Field,
    order: usize,
) -> Result<f64, NormError> {
    let mut total = 0.0;
    for (index, iface) in domain.interfaces().iter().enumerate() {
        let alpha_ij = harmonic_mean(problem.alpha[iface.owner], problem.alpha[iface.neighbor])?;
        let h_ij = harmonic_mean(space.mesh_size(iface.owner), space.mesh_size(iface.neighbor))?;
        let coeff = penalty.delta * alpha_ij / (2.0 * h_ij);
        let quad = interface_quadrature(domain, index, order)?;
        for pt in &quad.points {
            let vi = field_value_at(domain, space, problem, &field, iface.owner, pt.xi_owner)?;
            let vj =
                field_value_at(domain, space, problem, &field, iface.neighbor, pt.xi_neighbor)?;
            let jump = vi - vj;
            total += coeff * jump * jump * pt.weight;
        }
    }
    Ok(total)
}

/// The discrete dG norm: weighted broken gradient, L2 term and interface
/// jump penalties.
pub fn dg_norm(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    penalty: PenaltyConfig,
    field: Field,
    order: usize,
) -> Result<f64, NormError> {
    let (grad_sq, l2_sq) = volume_parts(domain, space, problem, &field, order)?;
    let jump_sq = interface_jump_energy(domain, space, problem, penalty, field, order)?;
    Ok((grad_sq + l2_sq + jump_sq).sqrt())
}

/// The starred norm: dG norm plus patch-boundary gradient terms
/// alpha_i h_i |grad_S v_i|^2 over every patch edge.
pub fn dg_star_norm(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    penalty: PenaltyConfig,
    field: Field,
    order: usize,
) -> Result<f64, NormError> {
    let base = dg_norm(domain, space, problem, penalty, field, order)?;
    let mut boundary_sq = 0.0;
    for pi in 0..domain.num_patches() {
        let patch = domain.patch(pi);
        let scale = problem.alpha[pi] * space.mesh_size(pi);
        for edge in Edge::ALL {
            for pt in edge_quadrature(patch, edge, order)? {
                let (_, grad) = field_at(domain, space, problem, &field, pi, pt.xi)?;
                boundary_sq += scale * dot3(&grad, &grad) * pt.weight;
            }
        }
    }
    Ok((base * base + boundary_sq).sqrt())
}

/// Patchwise L2 error against the exact solution.
pub fn l2_norm_error(
    domain: &MultiPatchDomain,
    space: &DgSpace,
    problem: &ModelProblem,
    u_h: &[f64],
    order: usize,
) -> Result<f64, NormError> {
    if problem.exact.is_none() {
        return Err(NormError::MissingExactSolution);
    }
    let (_, l2_sq) =
        volume_parts(domain, space, problem, &Field::ErrorVsExact(u_h), order)?;
    Ok(l2_sq.sqrt())
}

/// Observed order between two refinement levels: log2(e_coarse / e_fine),
/// positive when the error shrinks under halving h.
pub fn convergence_rate(e_coarse: f64, e_fine: f64) -> Result<f64, NormError> {
    if !(e_coarse > 0.0) || !(e_fine > 0.0) {
        return Err(NormError::NonPositiveError(e_coarse, e_fine));
    }
    Ok((e_coarse / e_fine).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{DgSpace, ModelProblem};
    use crate::geometry::builders::{single_patch_square, two_patch_square};
    use std::sync::Arc;

    fn unit_problem(domain: &MultiPatchDomain, reaction: bool) -> ModelProblem {
        ModelProblem::zero_source(vec![1.0; domain.num_patches()], reaction)
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let dom = two_patch_square(1).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let problem = unit_problem(&dom, false);
        let pen = PenaltyConfig::from_degree(1);
        let z = vec![0.0; space.num_dofs()];
        assert_eq!(dg_norm(&dom, &space, &problem, pen, Field::Discrete(&z), 2).unwrap(), 0.0);
        assert_eq!(
            dg_star_norm(&dom, &space, &problem, pen, Field::Discrete(&z), 2).unwrap(),
            0.0
        );
    }

    #[test]
    fn constant_on_single_patch_measures_its_magnitude() {
        // no interfaces: only the L2 term survives, |c| on the unit square
        let dom = single_patch_square(1).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let problem = unit_problem(&dom, false);
        let pen = PenaltyConfig::from_degree(1);
        let c = vec![-2.5; space.num_dofs()];
        let n = dg_norm(&dom, &space, &problem, pen, Field::Discrete(&c), 2).unwrap();
        assert!((n - 2.5).abs() < 1e-13);
        // zero gradient: star norm equals dG norm
        let s = dg_star_norm(&dom, &space, &problem, pen, Field::Discrete(&c), 2).unwrap();
        assert!((s - n).abs() < 1e-13);
    }

    #[test]
    fn continuous_composite_has_no_jump_energy() {
        let dom = two_patch_square(1).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let problem = unit_problem(&dom, false);
        let pen = PenaltyConfig::from_degree(1);
        // v(x, y) = x across both patches
        let v = vec![0.0, 1.0, 0.0, 1.0, 1.0, 2.0, 1.0, 2.0];
        let e = interface_jump_energy(&dom, &space, &problem, pen, Field::Discrete(&v), 3)
            .unwrap();
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn star_norm_dominates_dg_norm() {
        let dom = two_patch_square(2).unwrap().refined(&[1, 2]).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let problem = unit_problem(&dom, false);
        let pen = PenaltyConfig::from_degree(2);
        let n = space.num_dofs();
        for seed in 0..20u64 {
            let v: Vec<f64> = (0..n)
                .map(|i| {
                    let k = (i as u64 + 1).wrapping_mul(seed.wrapping_add(17) * 2654435761);
                    ((k >> 16) % 2000) as f64 / 1000.0 - 1.0
                })
                .collect();
            let a = dg_norm(&dom, &space, &problem, pen, Field::Discrete(&v), 3).unwrap();
            let b = dg_star_norm(&dom, &space, &problem, pen, Field::Discrete(&v), 3).unwrap();
            assert!(a <= b * (1.0 + 1e-12), "dg {a} > star {b}");
        }
    }

    #[test]
    fn error_mode_vanishes_for_reproduced_solutions() {
        // u(x, y) = x is in the degree-1 space; interpolate exactly
        let dom = two_patch_square(1).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let mut problem = unit_problem(&dom, false);
        problem.exact = Some(crate::assembly::ExactSolution {
            value: Arc::new(|x: &[f64; 3]| x[0]),
            surface_gradient: Arc::new(|_x| [1.0, 0.0, 0.0]),
        });
        let pen = PenaltyConfig::from_degree(1);
        let v = vec![0.0, 1.0, 0.0, 1.0, 1.0, 2.0, 1.0, 2.0];
        let e = dg_norm(&dom, &space, &problem, pen, Field::ErrorVsExact(&v), 3).unwrap();
        assert!(e < 1e-12, "representable field should have zero error, got {e}");
        let l2 = l2_norm_error(&dom, &space, &problem, &v, 3).unwrap();
        assert!(l2 < 1e-13);
    }

    #[test]
    fn l2_error_is_homogeneous() {
        let dom = single_patch_square(2).unwrap().refined_uniform(1).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let mut problem = unit_problem(&dom, false);
        problem.exact = Some(crate::assembly::ExactSolution {
            value: Arc::new(|_x| 0.0),
            surface_gradient: Arc::new(|_x| [0.0; 3]),
        });
        let n = space.num_dofs();
        let u: Vec<f64> = (0..n).map(|i| ((i * 31 + 3) % 11) as f64 / 11.0).collect();
        let u3: Vec<f64> = u.iter().map(|v| 3.0 * v).collect();
        let e1 = l2_norm_error(&dom, &space, &problem, &u, 3).unwrap();
        let e3 = l2_norm_error(&dom, &space, &problem, &u3, 3).unwrap();
        assert!((e3 - 3.0 * e1).abs() < 1e-12 * e3.max(1.0));
    }

    #[test]
    fn missing_exact_solution_is_an_error() {
        let dom = single_patch_square(1).unwrap();
        let space = DgSpace::new(&dom).unwrap();
        let problem = unit_problem(&dom, false);
        let u = vec![0.0; space.num_dofs()];
        assert!(matches!(
            l2_norm_error(&dom, &space, &problem, &u, 2),
            Err(NormError::MissingExactSolution)
        ));
    }

    #[test]
    fn rate_examples() {
        assert!((convergence_rate(0.4, 0.1).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(convergence_rate(0.7, 0.7).unwrap(), 0.0);
        assert!((convergence_rate(0.32, 0.02).unwrap() - 4.0).abs() < 1e-14);
        assert!(convergence_rate(0.0, 0.1).is_err());
        assert!(convergence_rate(0.1, -0.1).is_err());
    }
}
