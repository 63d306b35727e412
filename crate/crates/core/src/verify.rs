//! Built-in verification checks: basis properties, geometry oracles,
//! manufactured-source cross-checks, assembly symmetry, the coercivity
//! probe and conormal opposition. The CLI `verify` subcommand prints one
//! pass/fail line per check.

use crate::assembly::{build_system, DgSpace, ModelProblem, PenaltyConfig};
use crate::bench::{manufactured_source_mismatch, BenchmarkKind, SplitMix64};
use crate::geometry::builders::{
    quarter_cylinder, torus, torus_implicit_residual, two_patch_square,
};
use crate::geometry::MultiPatchDomain;
use crate::quadrature::patch_quadrature;
use crate::solver::min_eigen_estimate;
use crate::splines::KnotVector;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_bound(name: &'static str, observed: f64, bound: f64) -> Self {
        CheckResult {
            name,
            passed: observed.is_finite() && observed <= bound,
            detail: format!("observed {observed:.3e}, bound {bound:.1e}"),
        }
    }

    fn failure(name: &'static str, detail: String) -> Self {
        CheckResult { name, passed: false, detail }
    }
}

fn random_open_knot_vector(rng: &mut SplitMix64, degree: usize) -> KnotVector {
    let n_interior = (rng.next_f64() * 5.0) as usize;
    let mut interior: Vec<f64> = (0..n_interior)
        .map(|_| 0.05 + 0.9 * rng.next_f64())
        .collect();
    interior.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut knots = vec![0.0; degree + 1];
    knots.extend(interior);
    knots.extend(std::iter::repeat(1.0).take(degree + 1));
    KnotVector::new(degree, knots).expect("valid random knot vector")
}

/// Partition of unity over 1000 random (knot vector, point) pairs.
pub fn check_partition_of_unity() -> CheckResult {
    let mut rng = SplitMix64::new(0xB5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let degree = 1 + (rng.next_f64() * 5.0) as usize % 5;
        let kv = random_open_knot_vector(&mut rng, degree);
        let xi = rng.next_f64();
        match kv.eval_basis(xi) {
            Ok(b) => {
                let sum: f64 = b.values.iter().sum();
                worst = worst.max((sum - 1.0).abs());
                if b.values.iter().any(|&v| v < -1e-14) {
                    return CheckResult::failure(
                        "partition_of_unity",
                        "negative basis value".into(),
                    );
                }
            }
            Err(e) => return CheckResult::failure("partition_of_unity", e.to_string()),
        }
    }
    CheckResult::from_bound("partition_of_unity", worst, 1e-12)
}

/// Derivative rows sum to zero over 1000 random pairs.
pub fn check_derivative_sum_zero() -> CheckResult {
    let mut rng = SplitMix64::new(0xD5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let degree = 1 + (rng.next_f64() * 5.0) as usize % 5;
        let kv = random_open_knot_vector(&mut rng, degree);
        let xi = rng.next_f64();
        match kv.eval_basis_derivs(xi, 1) {
            Ok(d) => {
                let sum: f64 = d.rows[1].iter().sum();
                worst = worst.max(sum.abs());
            }
            Err(e) => return CheckResult::failure("derivative_sum_zero", e.to_string()),
        }
    }
    CheckResult::from_bound("derivative_sum_zero", worst, 1e-10)
}

fn domain_area(domain: &MultiPatchDomain, order: usize) -> Result<f64, String> {
    let mut total = 0.0;
    for patch in domain.patches() {
        let pts = patch_quadrature(patch, order).map_err(|e| e.to_string())?;
        total += pts.iter().map(|p| p.weight).sum::<f64>();
    }
    Ok(total)
}

/// Quarter-cylinder area against 2 pi (unit radius, quarter circumference,
/// height 4), three refinements.
pub fn check_quarter_cylinder_area(order: Option<usize>) -> CheckResult {
    let name = "quarter_cylinder_area";
    let order = order.unwrap_or(3);
    let domain = match quarter_cylinder(2).and_then(|d| d.refined_uniform(3)) {
        Ok(d) => d,
        Err(e) => return CheckResult::failure(name, e.to_string()),
    };
    match domain_area(&domain, order) {
        Ok(a) => CheckResult::from_bound(name, (a - 2.0 * PI).abs(), 1e-8),
        Err(e) => CheckResult::failure(name, e),
    }
}

/// Torus area against 8 pi^2 (R = 2, r = 1), three refinements.
pub fn check_torus_area(order: Option<usize>) -> CheckResult {
    let name = "torus_area";
    let order = order.unwrap_or(3);
    let domain = match torus(2).and_then(|d| d.refined_uniform(3)) {
        Ok(d) => d,
        Err(e) => return CheckResult::failure(name, e.to_string()),
    };
    match domain_area(&domain, order) {
        Ok(a) => CheckResult::from_bound(name, (a - 8.0 * PI * PI).abs(), 1e-6),
        Err(e) => CheckResult::failure(name, e),
    }
}

/// Largest torus implicit-equation residual over `samples` random parameter
/// points of `domain`.
pub fn max_torus_implicit_residual(domain: &MultiPatchDomain, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let pi = (rng.next_f64() * domain.num_patches() as f64) as usize % domain.num_patches();
        let xi = [rng.next_f64(), rng.next_f64()];
        match domain.patch(pi).map_point(xi) {
            Ok(x) => worst = worst.max(torus_implicit_residual(&x).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    worst
}

/// Implicit-equation residual of the exact torus at 10^4 sample points.
pub fn check_torus_implicit() -> CheckResult {
    let name = "torus_implicit_equation";
    let domain = match torus(2) {
        Ok(d) => d,
        Err(e) => return CheckResult::failure(name, e.to_string()),
    };
    CheckResult::from_bound(name, max_torus_implicit_residual(&domain, 10_000, 0x70), 1e-10)
}

/// Source formula against the numeric Laplace-Beltrami of the exact
/// solution, 100 interior points, uniform alpha.
pub fn check_manufactured_source(kind: BenchmarkKind) -> CheckResult {
    let name = match kind {
        BenchmarkKind::QuarterCylinder => "manufactured_source_quarter_cylinder",
        BenchmarkKind::Torus => "manufactured_source_torus",
        BenchmarkKind::SinglePatchPoisson => "manufactured_source_single_patch",
    };
    match manufactured_source_mismatch(kind, 2, 100, 0x5EED) {
        Ok(worst) => CheckResult::from_bound(name, worst, 1e-4),
        Err(e) => CheckResult::failure(name, e.to_string()),
    }
}

fn coarse_instances() -> Result<Vec<(&'static str, MultiPatchDomain, usize, bool)>, String> {
    // (label, domain, degree, reaction)
    Ok(vec![
        (
            "two_patch p=1",
            two_patch_square(1).and_then(|d| d.refined_uniform(2)).map_err(|e| e.to_string())?,
            1,
            false,
        ),
        (
            "quarter_cylinder p=2",
            quarter_cylinder(2).and_then(|d| d.refined_uniform(1)).map_err(|e| e.to_string())?,
            2,
            false,
        ),
        ("torus p=2", torus(2).map_err(|e| e.to_string())?, 2, true),
    ])
}

/// Assembled-system symmetry on coarse instances.
pub fn check_assembly_symmetry() -> CheckResult {
    let name = "assembly_symmetry";
    let instances = match coarse_instances() {
        Ok(i) => i,
        Err(e) => return CheckResult::failure(name, e),
    };
    let mut worst = 0.0f64;
    for (_, domain, degree, reaction) in instances {
        let space = match DgSpace::new(&domain) {
            Ok(s) => s,
            Err(e) => return CheckResult::failure(name, e.to_string()),
        };
        let problem = ModelProblem::zero_source(vec![1.0; domain.num_patches()], reaction);
        let system = match build_system(
            &domain,
            &space,
            &problem,
            PenaltyConfig::from_degree(degree),
            degree + 1,
        ) {
            Ok(s) => s,
            Err(e) => return CheckResult::failure(name, e.to_string()),
        };
        worst = worst.max(system.matrix.symmetry_error());
    }
    CheckResult::from_bound(name, worst, 1e-12)
}

/// Minimum eigenvalue of the assembled systems with the formula penalty.
pub fn check_coercivity() -> CheckResult {
    let name = "coercivity_probe";
    let instances = match coarse_instances() {
        Ok(i) => i,
        Err(e) => return CheckResult::failure(name, e),
    };
    let mut min_over_all = f64::INFINITY;
    for (label, domain, degree, reaction) in instances {
        let space = match DgSpace::new(&domain) {
            Ok(s) => s,
            Err(e) => return CheckResult::failure(name, e.to_string()),
        };
        let problem = ModelProblem::zero_source(vec![1.0; domain.num_patches()], reaction);
        let system = match build_system(
            &domain,
            &space,
            &problem,
            PenaltyConfig::from_degree(degree),
            degree + 1,
        ) {
            Ok(s) => s,
            Err(e) => return CheckResult::failure(name, e.to_string()),
        };
        match min_eigen_estimate(&system.matrix) {
            Ok(eig) => {
                if eig <= 0.0 {
                    return CheckResult::failure(
                        name,
                        format!("{label}: min eigenvalue {eig:.3e} <= 0"),
                    );
                }
                min_over_all = min_over_all.min(eig);
            }
            Err(e) => return CheckResult::failure(name, e.to_string()),
        }
    }
    CheckResult {
        name,
        passed: true,
        detail: format!("smallest eigenvalue over instances {min_over_all:.3e} > 0"),
    }
}

/// Conormals from the two sides of every interface point in opposite
/// directions.
pub fn check_conormal_opposition() -> CheckResult {
    let name = "conormal_opposition";
    let domains = match (quarter_cylinder(2), torus(2)) {
        (Ok(a), Ok(b)) => [a, b],
        (Err(e), _) | (_, Err(e)) => return CheckResult::failure(name, e.to_string()),
    };
    let mut worst = 0.0f64;
    for domain in &domains {
        for (idx, iface) in domain.interfaces().iter().enumerate() {
            for k in 0..=16 {
                let t = k as f64 / 16.0;
                let result = (|| -> Result<f64, crate::geometry::GeometryError> {
                    let (_, xi_nbr) = domain.interface_pullback(idx, t)?;
                    let tn = xi_nbr[iface.neighbor_edge.running_dir()];
                    let a = domain.patch(iface.owner).conormal(iface.owner_edge, t)?;
                    let b = domain.patch(iface.neighbor).conormal(iface.neighbor_edge, tn)?;
                    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                    Ok((s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt())
                })();
                match result {
                    Ok(gap) => worst = worst.max(gap),
                    Err(e) => return CheckResult::failure(name, e.to_string()),
                }
            }
        }
    }
    CheckResult::from_bound(name, worst, 1e-10)
}

/// The full oracle suite. `quad_order` overrides the area-check quadrature
/// (the default passes; deliberately low orders expose under-integration).
pub fn run_checks(quad_order: Option<usize>) -> Vec<CheckResult> {
    vec![
        check_partition_of_unity(),
        check_derivative_sum_zero(),
        check_quarter_cylinder_area(quad_order),
        check_torus_area(quad_order),
        check_torus_implicit(),
        check_manufactured_source(BenchmarkKind::QuarterCylinder),
        check_manufactured_source(BenchmarkKind::Torus),
        check_assembly_symmetry(),
        check_coercivity(),
        check_conormal_opposition(),
    ]
}
