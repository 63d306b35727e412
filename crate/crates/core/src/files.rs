//! Problem description files: a geometry file reference, per-patch
//! diffusion, the reaction flag, optional boundary-kind overrides and a
//! named benchmark source (or a constant source for custom runs).

use crate::assembly::ModelProblem;
use crate::bench::{AlphaProfile, BenchError, BenchmarkKind};
use crate::geometry::io::{load_geometry, BoundaryData, GeometryIoError};
use crate::geometry::{BoundaryFacet, MultiPatchDomain};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryIoError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Domain(#[from] crate::geometry::GeometryError),
}

/// Source term: a named benchmark (with its exact solution) or a constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Named(BenchmarkKind),
    Constant { constant: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    /// Path to the geometry description, relative to the problem file.
    pub geometry: String,
    pub alpha: AlphaProfile,
    #[serde(default)]
    pub reaction: bool,
    pub source: SourceSpec,
    /// Optional replacements for boundary kinds declared in the geometry.
    #[serde(default)]
    pub boundary_overrides: Vec<BoundaryData>,
}

/// A problem file resolved against its geometry.
pub struct LoadedProblem {
    pub domain: MultiPatchDomain,
    pub problem: ModelProblem,
    pub name: String,
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem, ProblemFileError> {
    let text = std::fs::read_to_string(path)?;
    let file: ProblemFile = serde_json::from_str(&text)?;
    let geo_path = path.parent().unwrap_or(Path::new(".")).join(&file.geometry);
    let mut domain = load_geometry(&geo_path)?;

    if !file.boundary_overrides.is_empty() {
        let mut boundary: Vec<BoundaryFacet> = domain.boundary().to_vec();
        for o in &file.boundary_overrides {
            match boundary.iter_mut().find(|b| b.patch == o.patch && b.edge == o.edge) {
                Some(b) => b.kind = o.kind,
                None => boundary.push(BoundaryFacet { patch: o.patch, edge: o.edge, kind: o.kind }),
            }
        }
        domain = MultiPatchDomain::new(
            domain.patches().to_vec(),
            domain.interfaces().to_vec(),
            boundary,
        )?;
    }

    let alpha = file.alpha.resolve(domain.num_patches())?;
    let (problem, name) = match file.source {
        SourceSpec::Named(kind) => (kind.problem(alpha, file.reaction), kind.name().to_string()),
        SourceSpec::Constant { constant } => {
            let problem = ModelProblem::new(
                alpha,
                file.reaction,
                Arc::new(move |_p, _x: &[f64; 3]| constant),
            );
            (problem, "custom".to_string())
        }
    };
    Ok(LoadedProblem { domain, problem, name })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::run_study_on;
    use crate::geometry::builders::quarter_cylinder;
    use crate::geometry::io::save_geometry;

    #[test]
    fn problem_file_round_trip_and_study() {
        let dir = std::env::temp_dir().join("patchdg_problem_test");
        std::fs::create_dir_all(&dir).unwrap();
        let geo = dir.join("qc.json");
        save_geometry(&quarter_cylinder(2).unwrap(), &geo).unwrap();
        let problem_path = dir.join("problem.json");
        std::fs::write(
            &problem_path,
            r#"{
              "geometry": "qc.json",
              "alpha": 1.0,
              "reaction": false,
              "source": "quarter_cylinder"
            }"#,
        )
        .unwrap();
        let loaded = load_problem(&problem_path).unwrap();
        assert_eq!(loaded.domain.num_patches(), 4);
        assert_eq!(loaded.name, "quarter_cylinder");
        assert!(loaded.problem.exact.is_some());
        let report = run_study_on(
            &loaded.name,
            &loaded.domain,
            &loaded.problem,
            2,
            2,
            0,
            None,
            None,
            1e-6,
        )
        .unwrap();
        assert!(report.all_levels_solved());
        assert!(report.records[1].dg_error.unwrap() < report.records[0].dg_error.unwrap());
    }

    #[test]
    fn constant_source_has_no_exact_solution() {
        let dir = std::env::temp_dir().join("patchdg_problem_test2");
        std::fs::create_dir_all(&dir).unwrap();
        let geo = dir.join("qc.json");
        save_geometry(&quarter_cylinder(2).unwrap(), &geo).unwrap();
        let problem_path = dir.join("problem.json");
        std::fs::write(
            &problem_path,
            r#"{
              "geometry": "qc.json",
              "alpha": [1.0, 2.0, 1.0, 2.0],
              "source": {"constant": 1.0}
            }"#,
        )
        .unwrap();
        let loaded = load_problem(&problem_path).unwrap();
        assert!(loaded.problem.exact.is_none());
        assert_eq!(loaded.problem.alpha, vec![1.0, 2.0, 1.0, 2.0]);
        let report = run_study_on(
            &loaded.name,
            &loaded.domain,
            &loaded.problem,
            2,
            1,
            0,
            None,
            None,
            1e-6,
        )
        .unwrap();
        assert!(report.records[0].dg_error.is_none());
        assert!(report.records[0].pcg_converged);
    }
}
