//! Gauss–Legendre rules, per-span surface quadrature and merged interface
//! quadrature for non-matching patch meshes.
//!
//! Interface rules subdivide the facet at every knot line coming from either
//! side, so traces from both patches are polynomial (or smooth rational) on
//! each quadrature segment. Arc-length weights come from the owner-side edge
//! speed; both pullbacks of every point are checked to agree physically.

use crate::geometry::{Edge, GeometryError, MultiPatchDomain, SurfacePatch};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("rule size {0} out of range 1..=64")]
    OrderOutOfRange(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Nodes and weights of the n-point Gauss–Legendre rule, exact for
/// polynomials of degree 2n - 1. Newton iteration on the Legendre
/// recurrence; accurate to ~1e-15 for n <= 64.
pub fn gauss_legendre(n: usize) -> Result<QuadRule, QuadratureError> {
    if n == 0 || n > 64 {
        return Err(QuadratureError::OrderOutOfRange(n));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadRule { points, weights })
}

/// One surface quadrature point: parameter location and weight including the
/// area element g.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub xi: [f64; 2],
    pub weight: f64,
}

/// Quadrature points for one knot-span rectangle of a patch, with weights
/// scaled by the surface area element. Zero-length spans yield no points.
pub fn element_quadrature(
    patch: &SurfacePatch,
    span: [(f64, f64); 2],
    order: usize,
) -> Result<Vec<SurfacePoint>, QuadratureError> {
    let (a1, b1) = span[0];
    let (a2, b2) = span[1];
    if b1 <= a1 || b2 <= a2 {
        return Ok(Vec::new());
    }
    let rule = gauss_legendre(order)?;
    let (mid1, half1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
    let (mid2, half2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
    let mut out = Vec::with_capacity(order * order);
    for (i, &p1) in rule.points.iter().enumerate() {
        for (j, &p2) in rule.points.iter().enumerate() {
            let xi = [mid1 + half1 * p1, mid2 + half2 * p2];
            let g = patch.fundamental(xi)?.g;
            out.push(SurfacePoint {
                xi,
                weight: rule.weights[i] * rule.weights[j] * half1 * half2 * g,
            });
        }
    }
    Ok(out)
}

/// All quadrature points of a patch: every non-empty span in both
/// directions. The weight sum approximates the patch area.
pub fn patch_quadrature(
    patch: &SurfacePatch,
    order: usize,
) -> Result<Vec<SurfacePoint>, QuadratureError> {
    let spans1 = patch.basis().kv(0).spans();
    let spans2 = patch.basis().kv(1).spans();
    let mut out = Vec::new();
    for &s1 in &spans1 {
        for &s2 in &spans2 {
            out.extend(element_quadrature(patch, [s1, s2], order)?);
        }
    }
    Ok(out)
}

/// One quadrature point on a patch edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgePoint {
    /// Edge curve coordinate.
    pub t: f64,
    /// Parameter point on the patch.
    pub xi: [f64; 2],
    /// Arc-length weight (rule weight times |dPhi/dt|).
    pub weight: f64,
}

/// Quadrature along one patch edge, subdivided at the knot lines of the
/// running direction.
pub fn edge_quadrature(
    patch: &SurfacePatch,
    edge: Edge,
    order: usize,
) -> Result<Vec<EdgePoint>, QuadratureError> {
    let breaks = patch.basis().kv(edge.running_dir()).breaks();
    segmented_edge_quadrature(patch, edge, &breaks, order)
}

fn segmented_edge_quadrature(
    patch: &SurfacePatch,
    edge: Edge,
    breaks: &[f64],
    order: usize,
) -> Result<Vec<EdgePoint>, QuadratureError> {
    let rule = gauss_legendre(order)?;
    let mut out = Vec::new();
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let t = mid + half * p;
            let speed = patch.edge_speed(edge, t)?;
            out.push(EdgePoint { t, xi: edge.param_point(t), weight: w * half * speed });
        }
    }
    Ok(out)
}

/// One quadrature point on an interface, with pullbacks to both sides.
#[derive(Debug, Clone, Copy)]
pub struct InterfacePoint {
    /// Owner-side edge curve coordinate.
    pub t: f64,
    pub xi_owner: [f64; 2],
    pub xi_neighbor: [f64; 2],
    pub physical: [f64; 3],
    /// Arc-length weight from the owner-side edge speed.
    pub weight: f64,
}

/// Merged quadrature over an interface between (possibly non-matching)
/// patch meshes.
#[derive(Debug, Clone)]
pub struct InterfaceQuadrature {
    /// Merged breakpoints in owner edge coordinates: union of the knot
    /// lines of both sides.
    pub breakpoints: Vec<f64>,
    pub points: Vec<InterfacePoint>,
}

/// Breakpoints of `domain.interfaces()[index]` in owner edge coordinates:
/// the union of both sides' knot lines restricted to the interface.
pub fn merged_breakpoints(domain: &MultiPatchDomain, index: usize) -> Vec<f64> {
    let iface = &domain.interfaces()[index];
    let own = domain.patch(iface.owner).basis().kv(iface.owner_edge.running_dir()).breaks();
    let nbr = domain
        .patch(iface.neighbor)
        .basis()
        .kv(iface.neighbor_edge.running_dir())
        .breaks();
    let mut merged: Vec<f64> = own;
    for t in nbr {
        merged.push(if iface.flipped { 1.0 - t } else { t });
    }
    merged.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    merged.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    merged
}

/// Merged interface quadrature: segments split at every knot line from both
/// sides, `order` Gauss points per segment, physical agreement of the two
/// pullbacks checked per point.
pub fn interface_quadrature(
    domain: &MultiPatchDomain,
    index: usize,
    order: usize,
) -> Result<InterfaceQuadrature, QuadratureError> {
    let iface = &domain.interfaces()[index];
    let breakpoints = merged_breakpoints(domain, index);
    let rule = gauss_legendre(order)?;
    let owner = domain.patch(iface.owner);
    let mut points = Vec::new();
    for seg in breakpoints.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            let t = mid + half * p;
            let (xi_owner, xi_neighbor) = domain.interface_pullback(index, t)?;
            let physical = owner.map_point(xi_owner)?;
            let speed = owner.edge_speed(iface.owner_edge, t)?;
            points.push(InterfacePoint {
                t,
                xi_owner,
                xi_neighbor,
                physical,
                weight: w * half * speed,
            });
        }
    }
    Ok(InterfaceQuadrature { breakpoints, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builders::{quarter_cylinder, torus, two_patch_square};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn small_rules_match_classics() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.points, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);

        let r2 = gauss_legendre(2).unwrap();
        let c = 1.0 / 3.0f64.sqrt();
        assert!((r2.points[0] + c).abs() < 1e-15);
        assert!((r2.points[1] - c).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15);
        assert!((r2.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rule_bounds_are_enforced() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(65).is_err());
        assert!(gauss_legendre(64).is_ok());
    }

    #[test]
    fn degree_five_exactness_with_three_points() {
        let r = gauss_legendre(3).unwrap();
        let integral: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| w * x.powi(4))
            .sum();
        assert!((integral - 0.4).abs() < 1e-14);
    }

    #[test]
    fn weights_positive_and_sum_to_two() {
        for n in 1..=64 {
            let r = gauss_legendre(n).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: weight sum {s}");
        }
    }

    #[test]
    fn polynomial_exactness_to_degree_2n_minus_1() {
        for n in 1..=8usize {
            let r = gauss_legendre(n).unwrap();
            for d in 0..=(2 * n - 1) as i32 {
                let num: f64 =
                    r.points.iter().zip(&r.weights).map(|(&x, &w)| w * x.powi(d)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-12, "n = {n}, degree {d}");
            }
        }
    }

    #[test]
    fn flat_unit_patch_has_unit_weight_sum() {
        let p = crate::geometry::builders::flat_rectangle(1, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let pts = element_quadrature(&p, [(0.0, 1.0), (0.0, 1.0)], 2).unwrap();
        let total: f64 = pts.iter().map(|q| q.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_span_emits_nothing() {
        let p = crate::geometry::builders::flat_rectangle(1, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let pts = element_quadrature(&p, [(0.5, 0.5), (0.0, 1.0)], 2).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn quarter_cylinder_patch_area() {
        let dom = quarter_cylinder(2).unwrap();
        // order p+1 under-integrates the rational arc speed at ~8e-9 per
        // patch after 2 refinements; the third refinement brings it to
        // a comfortable margin under the area oracle tolerance
        let patch = dom.patch(0).refine_dyadic([3, 3]).unwrap();
        let total: f64 = patch_quadrature(&patch, 3)
            .unwrap()
            .iter()
            .map(|q| q.weight)
            .sum();
        assert!((total - FRAC_PI_2).abs() < 0.25e-8, "area {total}");
    }

    #[test]
    fn torus_area_from_quadrature() {
        let dom = torus(2).unwrap().refined_uniform(3).unwrap();
        let mut total = 0.0;
        for patch in dom.patches() {
            total += patch_quadrature(patch, 3)
                .unwrap()
                .iter()
                .map(|q| q.weight)
                .sum::<f64>();
        }
        assert!((total - 8.0 * PI * PI).abs() < 1e-6, "area {total}");
    }

    #[test]
    fn matching_interface_keeps_single_span() {
        let dom = two_patch_square(1).unwrap();
        let iq = interface_quadrature(&dom, 0, 2).unwrap();
        assert_eq!(iq.breakpoints, vec![0.0, 1.0]);
        assert_eq!(iq.points.len(), 2);
    }

    #[test]
    fn merged_breakpoints_are_the_union() {
        let base = two_patch_square(1).unwrap();
        // owner refined once -> {0, 0.5, 1}; neighbor twice -> quarters
        let dom = base.refined(&[1, 2]).unwrap();
        let merged = merged_breakpoints(&dom, 0);
        assert_eq!(merged, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn cylinder_interface_ring_arc_length() {
        let dom = quarter_cylinder(2).unwrap().refined_uniform(1).unwrap();
        let iq = interface_quadrature(&dom, 0, 8).unwrap();
        let len: f64 = iq.points.iter().map(|p| p.weight).sum();
        assert!((len - FRAC_PI_2).abs() < 1e-10, "arc length {len}");
    }

    #[test]
    fn interface_pullbacks_agree_physically() {
        let dom = torus(2).unwrap().refined(&[1, 2, 1, 2]).unwrap();
        for index in 0..dom.interfaces().len() {
            let iq = interface_quadrature(&dom, index, 3).unwrap();
            for pt in &iq.points {
                let iface = &dom.interfaces()[index];
                let a = dom.patch(iface.owner).map_point(pt.xi_owner).unwrap();
                let b = dom.patch(iface.neighbor).map_point(pt.xi_neighbor).unwrap();
                assert!(crate::geometry::distance3(&a, &b) < 1e-10);
            }
        }
    }

    #[test]
    fn interface_integral_is_side_symmetric() {
        // integrate a smooth scalar via owner-side and neighbor-side speeds
        let base = two_patch_square(2).unwrap();
        let dom = base.refined(&[1, 2]).unwrap();
        let iface = dom.interfaces()[0];
        let f = |x: &[f64; 3]| (1.3 * x[1]).sin() + x[1] * x[1];
        let iq = interface_quadrature(&dom, 0, 4).unwrap();
        let from_owner: f64 = iq.points.iter().map(|p| f(&p.physical) * p.weight).sum();
        // same integral using neighbor-side arc speed
        let nbr = dom.patch(iface.neighbor);
        let mut from_neighbor = 0.0;
        for seg in iq.breakpoints.windows(2) {
            let rule = gauss_legendre(4).unwrap();
            let (mid, half) = (0.5 * (seg[0] + seg[1]), 0.5 * (seg[1] - seg[0]));
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let t = mid + half * p;
                let tn = if iface.flipped { 1.0 - t } else { t };
                let xi = iface.neighbor_edge.param_point(tn);
                let x = nbr.map_point(xi).unwrap();
                let speed = nbr.edge_speed(iface.neighbor_edge, tn).unwrap();
                from_neighbor += f(&x) * w * half * speed;
            }
        }
        assert!(
            (from_owner - from_neighbor).abs() < 1e-10,
            "{from_owner} vs {from_neighbor}"
        );
    }

    #[test]
    fn merged_segments_make_traces_polynomial() {
        // a discrete function from the finer side integrates exactly once
        // segments respect its knot lines: order p+1 equals order p+3
        let base = two_patch_square(2).unwrap();
        let dom = base.refined(&[0, 2]).unwrap();
        let iface = dom.interfaces()[0];
        let nbr = dom.patch(iface.neighbor);
        let kv = nbr.basis().kv(1);
        // piecewise-quadratic trace: basis function values summed with
        // pseudo-random coefficients
        let coeffs: Vec<f64> = (0..kv.num_basis()).map(|i| ((i * 37 + 11) % 17) as f64).collect();
        let trace = |t: f64| {
            let b = kv.eval_basis(t).unwrap();
            b.values.iter().enumerate().map(|(j, v)| v * coeffs[b.first + j]).sum::<f64>()
        };
        let integrate = |order: usize| {
            let iq = interface_quadrature(&dom, 0, order).unwrap();
            iq.points
                .iter()
                .map(|p| {
                    let tn = if iface.flipped { 1.0 - p.t } else { p.t };
                    trace(tn) * p.weight
                })
                .sum::<f64>()
        };
        assert!((integrate(3) - integrate(5)).abs() < 1e-12);
    }
}
