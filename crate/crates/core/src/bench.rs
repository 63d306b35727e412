//! The convergence benchmarks and the study harness.
//!
//! Two surface benchmarks reproduce the reference experiments: a diffusion
//! problem on a four-patch quarter cylinder (open surface, homogeneous
//! Dirichlet data) and a reaction-diffusion problem on a four-patch torus
//! (closed surface). A flat single-patch Poisson problem rounds out the set
//! for plane-geometry sanity runs. Sources are manufactured from the exact
//! solutions, patchwise scaled by the diffusion coefficient so jumping
//! coefficients keep the same exact solution of the patchwise equations.

use crate::assembly::{
    build_system, default_quad_order, DgSpace, ExactSolution, ModelProblem, PenaltyConfig,
};
use crate::geometry::builders::{
    quarter_cylinder, single_patch_square, torus, CYLINDER_HEIGHT, TORUS_MAJOR_RADIUS,
    TORUS_MINOR_RADIUS,
};
use crate::geometry::MultiPatchDomain;
use crate::norms::{convergence_rate, dg_norm, l2_norm_error, Field, NormError};
use crate::solver::{default_max_iter, pcg, pcg_deflated, Preconditioner, SolverError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Assembly(#[from] crate::assembly::AssemblyError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("unknown benchmark '{0}'")]
    UnknownBenchmark(String),
    #[error("{0} diffusion values supplied for {1} patches")]
    AlphaCount(usize, usize),
    #[error("a convergence study needs at least 1 level, got {0}")]
    NoLevels(usize),
}

/// Named benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    QuarterCylinder,
    Torus,
    SinglePatchPoisson,
}

impl std::str::FromStr for BenchmarkKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "quarter_cylinder" => Ok(Self::QuarterCylinder),
            "torus" => Ok(Self::Torus),
            "single_patch_poisson" => Ok(Self::SinglePatchPoisson),
            other => Err(BenchError::UnknownBenchmark(other.to_string())),
        }
    }
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::QuarterCylinder => "quarter_cylinder",
            Self::Torus => "torus",
            Self::SinglePatchPoisson => "single_patch_poisson",
        }
    }

    /// The torus problem carries the reaction term (+u) so the closed
    /// surface stays coercive without a mean constraint; the open-surface
    /// problems are pure diffusion.
    pub fn default_reaction(self) -> bool {
        matches!(self, Self::Torus)
    }

    pub fn base_domain(self, degree: usize) -> Result<MultiPatchDomain, BenchError> {
        Ok(match self {
            Self::QuarterCylinder => quarter_cylinder(degree)?,
            Self::Torus => torus(degree)?,
            Self::SinglePatchPoisson => single_patch_square(degree)?,
        })
    }

    pub fn exact_solution(self) -> ExactSolution {
        match self {
            Self::QuarterCylinder => ExactSolution {
                value: Arc::new(|x| cylinder_exact(x)),
                surface_gradient: Arc::new(|x| cylinder_exact_gradient(x)),
            },
            Self::Torus => ExactSolution {
                value: Arc::new(|x| torus_exact(x)),
                surface_gradient: Arc::new(|x| torus_exact_gradient(x)),
            },
            Self::SinglePatchPoisson => ExactSolution {
                value: Arc::new(|x| (PI * x[0]).sin() * (PI * x[1]).sin()),
                surface_gradient: Arc::new(|x| {
                    [
                        PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                        PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                        0.0,
                    ]
                }),
            },
        }
    }

    /// Minus the Laplace–Beltrami of the exact solution at a physical point.
    pub fn neg_laplacian(self, x: &[f64; 3]) -> f64 {
        match self {
            Self::QuarterCylinder => cylinder_neg_laplacian(x),
            Self::Torus => torus_neg_laplacian(x),
            Self::SinglePatchPoisson => {
                2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()
            }
        }
    }

    /// Model problem with the manufactured source f_i = alpha_i (-lap u)
    /// (+ u with reaction on) and the exact solution attached.
    pub fn problem(self, alpha: Vec<f64>, reaction: bool) -> ModelProblem {
        let kind = self;
        let alpha_for_source = alpha.clone();
        let mut problem = ModelProblem::new(
            alpha,
            reaction,
            Arc::new(move |patch: usize, x: &[f64; 3]| {
                let mut f = alpha_for_source[patch] * kind.neg_laplacian(x);
                if reaction {
                    f += match kind {
                        BenchmarkKind::QuarterCylinder => cylinder_exact(x),
                        BenchmarkKind::Torus => torus_exact(x),
                        BenchmarkKind::SinglePatchPoisson => {
                            (PI * x[0]).sin() * (PI * x[1]).sin()
                        }
                    };
                }
                f
            }),
        );
        problem.exact = Some(self.exact_solution());
        problem
    }
}

// --- quarter cylinder (open surface) ---------------------------------------

pub const CYLINDER_SIGMA: f64 = 3.0;

/// The amplitude 1/(3/2 - sqrt 2).
pub fn cylinder_rho() -> f64 {
    1.0 / (1.5 - 2.0f64.sqrt())
}

/// Angle measured from the y axis: phi = arctan(x/y), quadrant-correct.
fn cylinder_phi(x: &[f64; 3]) -> f64 {
    x[0].atan2(x[1])
}

fn g_phi_1(phi: f64) -> f64 {
    (1.0 - phi.cos()) * (1.0 - phi.sin())
}

fn g_phi_1_prime(phi: f64) -> f64 {
    phi.sin() * (1.0 - phi.sin()) - phi.cos() * (1.0 - phi.cos())
}

fn g_phi_2(phi: f64) -> f64 {
    phi.cos() + phi.sin() - 4.0 * phi.sin() * phi.cos()
}

fn g_z(z: f64) -> f64 {
    (CYLINDER_SIGMA * PI * z / CYLINDER_HEIGHT).sin()
}

fn g_z_prime(z: f64) -> f64 {
    let k = CYLINDER_SIGMA * PI / CYLINDER_HEIGHT;
    k * (k * z).cos()
}

pub fn cylinder_exact(x: &[f64; 3]) -> f64 {
    cylinder_rho() * g_phi_1(cylinder_phi(x)) * g_z(x[2])
}

pub fn cylinder_neg_laplacian(x: &[f64; 3]) -> f64 {
    let phi = cylinder_phi(x);
    let k2 = (CYLINDER_SIGMA * PI / CYLINDER_HEIGHT).powi(2);
    cylinder_rho() * (k2 * g_phi_1(phi) - g_phi_2(phi)) * g_z(x[2])
}

pub fn cylinder_exact_gradient(x: &[f64; 3]) -> [f64; 3] {
    let phi = cylinder_phi(x);
    let u_phi = cylinder_rho() * g_phi_1_prime(phi) * g_z(x[2]);
    let u_z = cylinder_rho() * g_phi_1(phi) * g_z_prime(x[2]);
    // unit radius: e_phi = (cos phi, -sin phi, 0) = (y, -x, 0)
    [u_phi * x[1], -u_phi * x[0], u_z]
}

// --- torus (closed surface) -------------------------------------------------

fn torus_angles(x: &[f64; 3]) -> (f64, f64) {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let phi = x[1].atan2(x[0]);
    let theta = x[2].atan2(rho - TORUS_MAJOR_RADIUS);
    (phi, theta)
}

pub fn torus_exact(x: &[f64; 3]) -> f64 {
    let (phi, theta) = torus_angles(x);
    (3.0 * phi).sin() * (3.0 * theta + phi).cos()
}

pub fn torus_neg_laplacian(x: &[f64; 3]) -> f64 {
    let (phi, theta) = torus_angles(x);
    let (big_r, r) = (TORUS_MAJOR_RADIUS, TORUS_MINOR_RADIUS);
    let ring = big_r + r * theta.cos();
    let s3p = (3.0 * phi).sin();
    let c3p = (3.0 * phi).cos();
    let s3t = (3.0 * theta + phi).sin();
    let c3t = (3.0 * theta + phi).cos();
    9.0 * s3p * c3t / (r * r) - (-10.0 * s3p * c3t - 6.0 * c3p * s3t) / (ring * ring)
        - 3.0 * theta.sin() * s3p * s3t / (r * ring)
}

pub fn torus_exact_gradient(x: &[f64; 3]) -> [f64; 3] {
    let (phi, theta) = torus_angles(x);
    let (big_r, r) = (TORUS_MAJOR_RADIUS, TORUS_MINOR_RADIUS);
    let ring = big_r + r * theta.cos();
    let u_phi = 3.0 * (3.0 * phi).cos() * (3.0 * theta + phi).cos()
        - (3.0 * phi).sin() * (3.0 * theta + phi).sin();
    let u_theta = -3.0 * (3.0 * phi).sin() * (3.0 * theta + phi).sin();
    let e_phi = [-phi.sin(), phi.cos(), 0.0];
    let e_theta = [-phi.cos() * theta.sin(), -phi.sin() * theta.sin(), theta.cos()];
    [
        u_phi / ring * e_phi[0] + u_theta / r * e_theta[0],
        u_phi / ring * e_phi[1] + u_theta / r * e_theta[1],
        u_phi / ring * e_phi[2] + u_theta / r * e_theta[2],
    ]
}

// --- convergence studies -----------------------------------------------------

/// Diffusion profile: one value for all patches or one per patch.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaProfile {
    Uniform(f64),
    PerPatch(Vec<f64>),
}

impl AlphaProfile {
    pub fn resolve(&self, patches: usize) -> Result<Vec<f64>, BenchError> {
        match self {
            AlphaProfile::Uniform(v) => Ok(vec![*v; patches]),
            AlphaProfile::PerPatch(vs) => {
                if vs.len() != patches {
                    return Err(BenchError::AlphaCount(vs.len(), patches));
                }
                Ok(vs.clone())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub benchmark: BenchmarkKind,
    pub degree: usize,
    /// Number of refinement levels, starting at one dyadic refinement.
    pub levels: usize,
    /// Non-matching exponent q: even-indexed patches get q extra dyadic
    /// refinements, so neighboring meshes differ by h_i/h_j = 2^q.
    pub ratio_exponent: usize,
    pub alpha: AlphaProfile,
    /// None uses the benchmark default.
    pub reaction: Option<bool>,
    /// None uses delta = 2(p+2)(p+1).
    pub penalty: Option<f64>,
    /// None uses degree + 1 points per direction.
    pub quad_order: Option<usize>,
    pub pcg_tol: f64,
}

impl StudyConfig {
    pub fn new(benchmark: BenchmarkKind, degree: usize, levels: usize) -> Self {
        Self {
            benchmark,
            degree,
            levels,
            ratio_exponent: 0,
            alpha: AlphaProfile::Uniform(1.0),
            reaction: None,
            penalty: None,
            quad_order: None,
            pcg_tol: 1e-6,
        }
    }
}

/// Per-level outcome of a study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub level: usize,
    pub dofs: usize,
    /// Patch mesh sizes h_i.
    pub h: Vec<f64>,
    pub dg_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub pcg_iterations: usize,
    pub pcg_converged: bool,
    pub pcg_relative_residual: f64,
    /// Interface jump penalty energy of the discrete solution.
    pub penalty_energy: f64,
}

impl ErrorRecord {
    pub fn h_max(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub benchmark: String,
    pub degree: usize,
    pub ratio_exponent: usize,
    pub penalty: f64,
    pub reaction: bool,
    pub quad_order: usize,
    pub records: Vec<ErrorRecord>,
    /// Rates between consecutive levels; entry k compares records k and k+1.
    pub dg_rates: Vec<Option<f64>>,
    pub l2_rates: Vec<Option<f64>>,
}

impl ConvergenceReport {
    pub fn final_dg_rate(&self) -> Option<f64> {
        self.dg_rates.last().copied().flatten()
    }

    pub fn final_l2_rate(&self) -> Option<f64> {
        self.l2_rates.last().copied().flatten()
    }

    pub fn all_levels_solved(&self) -> bool {
        self.records.iter().all(|r| r.pcg_converged)
    }

    /// CSV with one row per level. The leading comment line carries no data
    /// and is the only part excluded from byte-for-byte determinism.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} degree={} ratio={} generated={}\n",
            self.benchmark,
            self.degree,
            self.ratio_exponent,
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        ));
        out.push_str("level,dofs,h_max,dg_error,dg_rate,l2_error,l2_rate,pcg_iters\n");
        for (k, rec) in self.records.iter().enumerate() {
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
            let rate = |v: Option<&Option<f64>>| {
                v.and_then(|r| r.map(|x| format!("{x:.6}"))).unwrap_or_default()
            };
            out.push_str(&format!(
                "{},{},{:.12e},{},{},{},{},{}\n",
                rec.level,
                rec.dofs,
                rec.h_max(),
                fmt(rec.dg_error),
                rate(if k > 0 { self.dg_rates.get(k - 1) } else { None }),
                fmt(rec.l2_error),
                rate(if k > 0 { self.l2_rates.get(k - 1) } else { None }),
                rec.pcg_iterations,
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Plain-text rate table for terminal output.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "benchmark {}  degree {}  ratio q = {}  delta = {}\n",
            self.benchmark, self.degree, self.ratio_exponent, self.penalty
        ));
        out.push_str("level      dofs       h_max        dG error     rate     L2 error     rate   iters\n");
        for (k, rec) in self.records.iter().enumerate() {
            let num = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or("-".repeat(10));
            let rate = |rs: &Vec<Option<f64>>| {
                if k == 0 {
                    "  -  ".to_string()
                } else {
                    rs.get(k - 1)
                        .copied()
                        .flatten()
                        .map(|x| format!("{x:5.2}"))
                        .unwrap_or("  -  ".to_string())
                }
            };
            out.push_str(&format!(
                "{:>5} {:>9} {:>11.4e} {:>12} {:>8} {:>12} {:>8} {:>7}{}\n",
                rec.level,
                rec.dofs,
                rec.h_max(),
                num(rec.dg_error),
                rate(&self.dg_rates),
                num(rec.l2_error),
                rate(&self.l2_rates),
                rec.pcg_iterations,
                if rec.pcg_converged { "" } else { "  [not converged]" },
            ));
        }
        out
    }
}

/// Refinement level of each patch at study level `level`: even patches get
/// the extra `q` refinements that realize the non-matching ratio 2^q.
pub fn refinement_pattern(num_patches: usize, level: usize, q: usize) -> Vec<usize> {
    (0..num_patches)
        .map(|i| if i % 2 == 0 { level + q } else { level })
        .collect()
}

/// Outcome of one assembled-and-solved level.
pub struct SolvedLevel {
    pub domain: MultiPatchDomain,
    pub space: DgSpace,
    pub problem: ModelProblem,
    pub penalty: PenaltyConfig,
    pub quad_order: usize,
    pub solution: Vec<f64>,
    pub record: ErrorRecord,
}

/// Build, assemble and solve one refinement level of a benchmark study.
pub fn solve_level(config: &StudyConfig, level: usize) -> Result<SolvedLevel, BenchError> {
    let base = config.benchmark.base_domain(config.degree)?;
    let alpha = config.alpha.resolve(base.num_patches())?;
    let reaction = config.reaction.unwrap_or(config.benchmark.default_reaction());
    let problem = config.benchmark.problem(alpha, reaction);
    solve_level_on(
        &base,
        &problem,
        config.degree,
        level,
        config.ratio_exponent,
        config.penalty,
        config.quad_order,
        config.pcg_tol,
    )
}

/// Assemble and solve one refinement level of an arbitrary base domain.
#[allow(clippy::too_many_arguments)]
pub fn solve_level_on(
    base: &MultiPatchDomain,
    problem: &ModelProblem,
    degree: usize,
    level: usize,
    ratio_exponent: usize,
    penalty_override: Option<f64>,
    quad_override: Option<usize>,
    pcg_tol: f64,
) -> Result<SolvedLevel, BenchError> {
    let levels = refinement_pattern(base.num_patches(), level, ratio_exponent);
    let domain = base.refined(&levels)?;
    let space = DgSpace::new(&domain)?;
    let problem = problem.clone();
    let penalty = match penalty_override {
        Some(delta) => PenaltyConfig::new(delta)?,
        None => PenaltyConfig::from_degree(degree),
    };
    let quad_order = quad_override.unwrap_or_else(|| default_quad_order(&domain));

    let system = build_system(&domain, &space, &problem, penalty, quad_order)?;
    let n = space.num_dofs();
    let deflate = domain.is_closed() && !problem.reaction;
    let (solution, report) = if deflate {
        let ones = vec![1.0; n];
        pcg_deflated(
            &system.matrix,
            &system.rhs,
            Preconditioner::Jacobi,
            pcg_tol,
            default_max_iter(n),
            &ones,
        )?
    } else {
        pcg(
            &system.matrix,
            &system.rhs,
            Preconditioner::Jacobi,
            pcg_tol,
            default_max_iter(n),
        )?
    };

    let (dg_error, l2_error) = if problem.exact.is_some() {
        (
            Some(dg_norm(
                &domain,
                &space,
                &problem,
                penalty,
                Field::ErrorVsExact(&solution),
                quad_order,
            )?),
            Some(l2_norm_error(&domain, &space, &problem, &solution, quad_order)?),
        )
    } else {
        (None, None)
    };
    let penalty_energy = crate::norms::interface_jump_energy(
        &domain,
        &space,
        &problem,
        penalty,
        Field::Discrete(&solution),
        quad_order,
    )?;

    let record = ErrorRecord {
        level,
        dofs: n,
        h: space.mesh_sizes().to_vec(),
        dg_error,
        l2_error,
        pcg_iterations: report.iterations,
        pcg_converged: report.converged,
        pcg_relative_residual: report.relative_residual,
        penalty_energy,
    };
    Ok(SolvedLevel { domain, space, problem, penalty, quad_order, solution, record })
}

/// Run the full study: one solve per level, rates between consecutive
/// levels. Solver non-convergence is recorded per level; the study
/// continues.
pub fn run_convergence_study(config: &StudyConfig) -> Result<ConvergenceReport, BenchError> {
    let base = config.benchmark.base_domain(config.degree)?;
    let alpha = config.alpha.resolve(base.num_patches())?;
    let reaction = config.reaction.unwrap_or(config.benchmark.default_reaction());
    let problem = config.benchmark.problem(alpha, reaction);
    run_study_on(
        config.benchmark.name(),
        &base,
        &problem,
        config.degree,
        config.levels,
        config.ratio_exponent,
        config.penalty,
        config.quad_order,
        config.pcg_tol,
    )
}

/// Study loop over an arbitrary base domain and problem.
#[allow(clippy::too_many_arguments)]
pub fn run_study_on(
    name: &str,
    base: &MultiPatchDomain,
    problem: &ModelProblem,
    degree: usize,
    levels: usize,
    ratio_exponent: usize,
    penalty_override: Option<f64>,
    quad_override: Option<usize>,
    pcg_tol: f64,
) -> Result<ConvergenceReport, BenchError> {
    if levels == 0 {
        return Err(BenchError::NoLevels(0));
    }
    let mut records = Vec::with_capacity(levels);
    let mut penalty_value = 0.0;
    let mut quad_order = 0;
    for level in 1..=levels {
        let solved = solve_level_on(
            base,
            problem,
            degree,
            level,
            ratio_exponent,
            penalty_override,
            quad_override,
            pcg_tol,
        )?;
        penalty_value = solved.penalty.delta;
        quad_order = solved.quad_order;
        records.push(solved.record);
    }
    let rate_seq = |get: &dyn Fn(&ErrorRecord) -> Option<f64>| {
        records
            .windows(2)
            .map(|w| match (get(&w[0]), get(&w[1])) {
                (Some(a), Some(b)) => convergence_rate(a, b).ok(),
                _ => None,
            })
            .collect::<Vec<_>>()
    };
    let dg_rates = rate_seq(&|r| r.dg_error);
    let l2_rates = rate_seq(&|r| r.l2_error);
    Ok(ConvergenceReport {
        benchmark: name.to_string(),
        degree,
        ratio_exponent,
        penalty: penalty_value,
        reaction: problem.reaction,
        quad_order,
        records,
        dg_rates,
        l2_rates,
    })
}

/// Cross-check of the manufactured source against the numeric
/// Laplace–Beltrami of the exact solution: returns the largest
/// |f - (-lap u (+u))| over `samples` interior points (uniform alpha = 1).
pub fn manufactured_source_mismatch(
    kind: BenchmarkKind,
    degree: usize,
    samples: usize,
    seed: u64,
) -> Result<f64, BenchError> {
    let domain = kind.base_domain(degree)?.refined_uniform(1)?;
    let reaction = kind.default_reaction();
    let problem = kind.problem(vec![1.0; domain.num_patches()], reaction);
    let exact = kind.exact_solution();
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    let mut accepted = 0;
    while accepted < samples {
        let pi = (rng.next_f64() * domain.num_patches() as f64) as usize;
        let patch = domain.patch(pi);
        // sample well inside one span so the difference stencil never
        // crosses a knot line or the patch boundary
        let pick = |kv: &crate::splines::KnotVector, r: f64| {
            let spans = kv.spans();
            let (a, b) = spans[(r * spans.len() as f64) as usize % spans.len()];
            a + (0.1 + 0.8 * r) * (b - a)
        };
        let xi = [
            pick(patch.basis().kv(0), rng.next_f64()),
            pick(patch.basis().kv(1), rng.next_f64()),
        ];
        let value = exact.value.clone();
        let gradient = exact.surface_gradient.clone();
        let field = |p: [f64; 2]| -> (f64, [f64; 2]) {
            let x = patch.map_point(p).expect("interior point");
            let j = patch.jacobian(p).expect("interior point");
            let g = gradient(&x);
            // parametric gradient of the pullback: J^T grad_S u
            (
                value(&x),
                [
                    j[0][0] * g[0] + j[0][1] * g[1] + j[0][2] * g[2],
                    j[1][0] * g[0] + j[1][1] * g[1] + j[1][2] * g[2],
                ],
            )
        };
        let lb = match patch.laplace_beltrami_of(&field, xi) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let x = patch.map_point(xi)?;
        let mut lhs = -lb;
        if reaction {
            lhs += (exact.value)(&x);
        }
        let f = (problem.source)(pi, &x);
        worst = worst.max((lhs - f).abs());
        accepted += 1;
    }
    Ok(worst)
}

/// Small deterministic PRNG for sampling (keeps rand out of the library).
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
