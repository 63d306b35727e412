//! Geometry description files: JSON with per-patch degrees, knot vectors,
//! control points and weights, plus interface tuples and boundary kinds.
//! Decimal values round-trip bit-exactly through serde_json.

use super::{
    BoundaryFacet, BoundaryKind, Edge, GeometryError, Interface, MultiPatchDomain, SurfacePatch,
};
use crate::splines::{KnotVector, TensorBasis};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatchData {
    pub degrees: [usize; 2],
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    /// Control points, first direction index fastest.
    pub control_points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceData {
    pub owner: usize,
    pub owner_edge: Edge,
    pub neighbor: usize,
    pub neighbor_edge: Edge,
    #[serde(default)]
    pub flipped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryData {
    pub patch: usize,
    pub edge: Edge,
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryFile {
    pub patches: Vec<PatchData>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceData>,
    #[serde(default)]
    pub boundaries: Vec<BoundaryData>,
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryIoError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spline(#[from] crate::splines::SplineError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl GeometryFile {
    pub fn from_domain(domain: &MultiPatchDomain) -> Self {
        let patches = domain
            .patches()
            .iter()
            .map(|p| PatchData {
                degrees: p.degrees(),
                knots_u: p.basis().kv(0).knots().to_vec(),
                knots_v: p.basis().kv(1).knots().to_vec(),
                control_points: p.control_points().to_vec(),
                weights: p.weights().to_vec(),
            })
            .collect();
        let interfaces = domain
            .interfaces()
            .iter()
            .map(|i| InterfaceData {
                owner: i.owner,
                owner_edge: i.owner_edge,
                neighbor: i.neighbor,
                neighbor_edge: i.neighbor_edge,
                flipped: i.flipped,
            })
            .collect();
        let boundaries = domain
            .boundary()
            .iter()
            .map(|b| BoundaryData { patch: b.patch, edge: b.edge, kind: b.kind })
            .collect();
        Self { patches, interfaces, boundaries }
    }

    pub fn into_domain(self) -> Result<MultiPatchDomain, GeometryIoError> {
        let mut patches = Vec::with_capacity(self.patches.len());
        for p in self.patches {
            let kv1 = KnotVector::new(p.degrees[0], p.knots_u)?;
            let kv2 = KnotVector::new(p.degrees[1], p.knots_v)?;
            patches.push(SurfacePatch::new(
                TensorBasis::new(kv1, kv2),
                p.control_points,
                p.weights,
            )?);
        }
        let interfaces = self
            .interfaces
            .into_iter()
            .map(|i| Interface {
                owner: i.owner,
                owner_edge: i.owner_edge,
                neighbor: i.neighbor,
                neighbor_edge: i.neighbor_edge,
                flipped: i.flipped,
            })
            .collect();
        let boundary = self
            .boundaries
            .into_iter()
            .map(|b| BoundaryFacet { patch: b.patch, edge: b.edge, kind: b.kind })
            .collect();
        Ok(MultiPatchDomain::new(patches, interfaces, boundary)?)
    }
}

pub fn save_geometry(domain: &MultiPatchDomain, path: &Path) -> Result<(), GeometryIoError> {
    let file = GeometryFile::from_domain(domain);
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_geometry(path: &Path) -> Result<MultiPatchDomain, GeometryIoError> {
    let text = std::fs::read_to_string(path)?;
    let file: GeometryFile = serde_json::from_str(&text)?;
    file.into_domain()
}
