//! Construction of the benchmark geometries: flat patches, the four-patch
//! quarter cylinder and the four-patch torus, all exact at any degree >= 2
//! (conic sections enter as rational quadratics and are degree-elevated
//! segment-wise).

use super::{
    BoundaryFacet, BoundaryKind, Edge, GeometryError, Interface, MultiPatchDomain, SurfacePatch,
};
use crate::splines::{elevate_bezier, KnotVector, TensorBasis};
use std::f64::consts::{FRAC_PI_2, PI};

/// Torus major radius used by the closed-surface benchmark.
pub const TORUS_MAJOR_RADIUS: f64 = 2.0;
/// Torus minor radius used by the closed-surface benchmark.
pub const TORUS_MINOR_RADIUS: f64 = 1.0;
/// Quarter-cylinder height (four stacked patches of height 1).
pub const CYLINDER_HEIGHT: f64 = 4.0;

/// Homogeneous 2D control points (x*w, y*w, w) of a circular arc of the unit
/// circle from `start` to `start + PI/2`, as a rational Bezier of the given
/// degree (>= 2).
fn quarter_arc_hom(start: f64, degree: usize) -> Vec<[f64; 3]> {
    let end = start + FRAC_PI_2;
    let mid = 0.5 * (start + end);
    let w = (0.25 * PI).cos();
    // middle control point is the tangent intersection (cos mid, sin mid)/w
    // with weight w, i.e. homogeneous (cos mid, sin mid, w)
    let mut ctrl = vec![
        [start.cos(), start.sin(), 1.0],
        [mid.cos(), mid.sin(), w],
        [end.cos(), end.sin(), 1.0],
    ];
    for _ in 2..degree {
        ctrl = elevate_bezier(&ctrl);
    }
    ctrl
}

/// Straight-line control abscissae 0..=1 of a degree-p Bezier segment; with
/// unit weights this reproduces the linear map exactly.
fn line_nodes(degree: usize) -> Vec<f64> {
    (0..=degree).map(|j| j as f64 / degree as f64).collect()
}

/// Open knot vector of one Bezier span.
fn bezier_knots(degree: usize) -> KnotVector {
    KnotVector::open_uniform(degree, 1).expect("valid")
}

/// Knot vector of a full circle built from four degree-p arcs joined with
/// interior multiplicity p (the classic nine-point circle for p = 2).
fn full_circle_knots(degree: usize) -> KnotVector {
    let mut knots = vec![0.0; degree + 1];
    for q in 1..4 {
        knots.extend(std::iter::repeat(q as f64 * 0.25).take(degree));
    }
    knots.extend(std::iter::repeat(1.0).take(degree + 1));
    KnotVector::new(degree, knots).expect("valid")
}

/// Homogeneous control points of the full unit circle at the given degree,
/// 4 * degree + 1 points matching [`full_circle_knots`].
fn full_circle_hom(degree: usize) -> Vec<[f64; 3]> {
    let mut pts: Vec<[f64; 3]> = Vec::with_capacity(4 * degree + 1);
    for q in 0..4 {
        let arc = quarter_arc_hom(q as f64 * FRAC_PI_2, degree);
        if q == 0 {
            pts.extend(arc);
        } else {
            pts.extend(arc.into_iter().skip(1));
        }
    }
    pts
}

/// Flat rectangle patch in the z = 0 plane, any degree >= 1.
pub fn flat_rectangle(
    degree: usize,
    origin: [f64; 2],
    size: [f64; 2],
) -> Result<SurfacePatch, GeometryError> {
    let nodes = line_nodes(degree);
    let mut ctrl = Vec::with_capacity((degree + 1) * (degree + 1));
    for &y in &nodes {
        for &x in &nodes {
            ctrl.push([origin[0] + size[0] * x, origin[1] + size[1] * y, 0.0]);
        }
    }
    let weights = vec![1.0; ctrl.len()];
    SurfacePatch::new(
        TensorBasis::new(bezier_knots(degree), bezier_knots(degree)),
        ctrl,
        weights,
    )
}

/// Single flat unit-square patch with Dirichlet boundary all around.
pub fn single_patch_square(degree: usize) -> Result<MultiPatchDomain, GeometryError> {
    let patch = flat_rectangle(degree, [0.0, 0.0], [1.0, 1.0])?;
    let boundary = Edge::ALL
        .iter()
        .map(|&edge| BoundaryFacet { patch: 0, edge, kind: BoundaryKind::Dirichlet })
        .collect();
    MultiPatchDomain::new(vec![patch], vec![], boundary)
}

/// Two flat unit squares glued along x = 1, Dirichlet on the outer boundary.
pub fn two_patch_square(degree: usize) -> Result<MultiPatchDomain, GeometryError> {
    let left = flat_rectangle(degree, [0.0, 0.0], [1.0, 1.0])?;
    let right = flat_rectangle(degree, [1.0, 0.0], [1.0, 1.0])?;
    let interfaces = vec![Interface {
        owner: 0,
        owner_edge: Edge::UMax,
        neighbor: 1,
        neighbor_edge: Edge::UMin,
        flipped: false,
    }];
    let mut boundary = Vec::new();
    for (patch, edge) in [
        (0, Edge::UMin),
        (0, Edge::VMin),
        (0, Edge::VMax),
        (1, Edge::UMax),
        (1, Edge::VMin),
        (1, Edge::VMax),
    ] {
        boundary.push(BoundaryFacet { patch, edge, kind: BoundaryKind::Dirichlet });
    }
    MultiPatchDomain::new(vec![left, right], interfaces, boundary)
}

/// Quarter cylinder of unit radius in the first quadrant (x, y >= 0),
/// height 4, split into four patches of height 1 stacked along z. The
/// circular direction is xi1 (one rational arc from (1, 0) to (0, 1)), the
/// axial direction is xi2. Dirichlet boundary all around. Degree >= 2.
pub fn quarter_cylinder(degree: usize) -> Result<MultiPatchDomain, GeometryError> {
    if degree < 2 {
        return Err(GeometryError::InvalidDomain(
            "the quarter-cylinder geometry needs degree >= 2 for the exact arc".into(),
        ));
    }
    let arc = quarter_arc_hom(0.0, degree);
    let zs = line_nodes(degree);
    let mut patches = Vec::with_capacity(4);
    for k in 0..4 {
        let mut ctrl = Vec::with_capacity(arc.len() * zs.len());
        let mut weights = Vec::with_capacity(arc.len() * zs.len());
        for &z in &zs {
            for h in &arc {
                let w = h[2];
                ctrl.push([h[0] / w, h[1] / w, k as f64 + z]);
                weights.push(w);
            }
        }
        patches.push(SurfacePatch::new(
            TensorBasis::new(bezier_knots(degree), bezier_knots(degree)),
            ctrl,
            weights,
        )?);
    }
    let interfaces = (0..3)
        .map(|k| Interface {
            owner: k,
            owner_edge: Edge::VMax,
            neighbor: k + 1,
            neighbor_edge: Edge::VMin,
            flipped: false,
        })
        .collect();
    let mut boundary = vec![
        BoundaryFacet { patch: 0, edge: Edge::VMin, kind: BoundaryKind::Dirichlet },
        BoundaryFacet { patch: 3, edge: Edge::VMax, kind: BoundaryKind::Dirichlet },
    ];
    for k in 0..4 {
        boundary.push(BoundaryFacet { patch: k, edge: Edge::UMin, kind: BoundaryKind::Dirichlet });
        boundary.push(BoundaryFacet { patch: k, edge: Edge::UMax, kind: BoundaryKind::Dirichlet });
    }
    MultiPatchDomain::new(patches, interfaces, boundary)
}

/// Torus with major radius 2 and minor radius 1, split into four patches.
/// Each patch wraps the full major circle (xi1) and covers one quadrant of
/// the minor circle (xi2). Closed surface: the major seam glues each patch
/// to itself, the minor direction glues neighboring patches cyclically.
/// Degree >= 2.
pub fn torus(degree: usize) -> Result<MultiPatchDomain, GeometryError> {
    if degree < 2 {
        return Err(GeometryError::InvalidDomain(
            "the torus geometry needs degree >= 2 for the exact arcs".into(),
        ));
    }
    let (big_r, small_r) = (TORUS_MAJOR_RADIUS, TORUS_MINOR_RADIUS);
    let circle = full_circle_hom(degree);
    let kv1 = full_circle_knots(degree);
    let kv2 = bezier_knots(degree);

    let mut patches = Vec::with_capacity(4);
    for k in 0..4 {
        // minor-circle quadrant arc in the (rho, z) half-plane, centered at
        // (R, 0) with radius r
        let arc = quarter_arc_hom(k as f64 * FRAC_PI_2, degree);
        let minor: Vec<[f64; 3]> = arc
            .iter()
            .map(|h| {
                let w = h[2];
                [big_r + small_r * h[0] / w, small_r * h[1] / w, w]
            })
            .collect();
        let mut ctrl = Vec::with_capacity(circle.len() * minor.len());
        let mut weights = Vec::with_capacity(circle.len() * minor.len());
        for &[rho, z, wj] in &minor {
            for hc in &circle {
                let wi = hc[2];
                let (cx, cy) = (hc[0] / wi, hc[1] / wi);
                ctrl.push([rho * cx, rho * cy, z]);
                weights.push(wi * wj);
            }
        }
        patches.push(SurfacePatch::new(
            TensorBasis::new(kv1.clone(), kv2.clone()),
            ctrl,
            weights,
        )?);
    }

    let mut interfaces = Vec::with_capacity(8);
    for k in 0..4 {
        // major seam: the patch glues to itself where the circle closes
        interfaces.push(Interface {
            owner: k,
            owner_edge: Edge::UMin,
            neighbor: k,
            neighbor_edge: Edge::UMax,
            flipped: false,
        });
    }
    for k in 0..4 {
        interfaces.push(Interface {
            owner: k,
            owner_edge: Edge::VMax,
            neighbor: (k + 1) % 4,
            neighbor_edge: Edge::VMin,
            flipped: false,
        });
    }
    MultiPatchDomain::new(patches, interfaces, vec![])
}

/// Residual of the torus implicit equation z^2 + (sqrt(x^2+y^2) - R)^2 - r^2
/// at a physical point; zero on the exact torus.
pub fn torus_implicit_residual(x: &[f64; 3]) -> f64 {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    x[2] * x[2] + (rho - TORUS_MAJOR_RADIUS).powi(2) - TORUS_MINOR_RADIUS * TORUS_MINOR_RADIUS
}
