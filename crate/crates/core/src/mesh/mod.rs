//! Triangle meshes in millimeters, points constrained to them, and mesh file I/O.
//!
//! A [`TriMesh`] is immutable once built. Faces are counter-clockwise when seen from the
//! outside, so face normals point outward by the right-hand rule. Edge `i` of a face is the
//! directed edge `(f[i], f[(i + 1) % 3])`; the barycentric weight `bary[i]` belongs to vertex
//! `f[i]`, which means edge `i` is where `bary[(i + 2) % 3]` vanishes.

mod bvh;
mod io;
pub mod shapes;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::bvh::Bvh;
pub use self::io::{
    load_mesh, load_mesh_with, read_mesh_file, save_mesh, write_mesh_file, LoadOptions, MeshFormat,
};
use crate::geom::{closest_point_on_triangle, Vec3};

/// Faces with area at or below this (mm²) are rejected.
pub const MIN_FACE_AREA: f64 = 1e-12;

/// Relative tangential norm below which a direction counts as parallel to the normal.
pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("failed to parse mesh: {0}")]
    Parse(String),
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references invalid or repeated vertex indices {indices:?}")]
    InvalidFace { face: usize, indices: [usize; 3] },
    #[error("face {face} is degenerate (area {area:e} mm²)")]
    DegenerateFace { face: usize, area: f64 },
    #[error("mesh is not edge-manifold; offending edges: {edges:?}")]
    NonManifold { edges: Vec<[usize; 2]> },
    #[error("mesh is open; boundary edges: {edges:?}")]
    OpenBoundary { edges: Vec<[usize; 2]> },
    #[error("face index {0} out of range")]
    InvalidFaceIndex(usize),
    #[error("direction is parallel to the surface normal")]
    DegenerateDirection,
    #[error("mesh I/O failed: {0}")]
    Io(String),
}

/// Which normal field is used when projecting onto the tangent plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalMode {
    /// The flat normal of the face holding the point.
    Face,
    /// Angle-weighted vertex normals, interpolated barycentrically.
    #[default]
    Vertex,
}

/// A point on the surface expressed in one face's barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub face: usize,
    pub bary: [f64; 3],
}

impl SurfacePoint {
    pub fn new(face: usize, bary: [f64; 3]) -> Self {
        SurfacePoint { face, bary }
    }

    pub fn centroid(face: usize) -> Self {
        SurfacePoint::new(face, [1.0 / 3.0; 3])
    }

    /// Non-negative weights summing to one, within `1e-9`.
    pub fn is_normalized(&self) -> bool {
        self.bary.iter().all(|&b| b >= -1e-9) && (self.bary.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }

    /// Clamps tiny negative weights and renormalizes.
    pub fn normalized(mut self) -> Self {
        for b in &mut self.bary {
            if *b < 0.0 {
                *b = 0.0;
            }
        }
        let s: f64 = self.bary.iter().sum();
        if s > 0.0 {
            for b in &mut self.bary {
                *b /= s;
            }
        }
        self
    }
}

/// A unit direction lying in the plane of `face`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub face: usize,
    pub dir: Vec3,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_normals: Vec<Vec3>,
    face_areas: Vec<f64>,
    vertex_normals: Vec<Vec3>,
    neighbors: Vec<[Option<usize>; 3]>,
    vertex_faces: Vec<Vec<usize>>,
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.faces == other.faces
    }
}

impl TriMesh {
    /// Builds a mesh and derives normals and adjacency.
    ///
    /// Open boundaries are accepted; non-manifold or inconsistently oriented edges are not.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut face_normals = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) || f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::InvalidFace { face: fi, indices: *f });
            }
            let n = (vertices[f[1]] - vertices[f[0]]).cross(&(vertices[f[2]] - vertices[f[0]]));
            let area = 0.5 * n.norm();
            if !(area > MIN_FACE_AREA) {
                return Err(MeshError::DegenerateFace { face: fi, area });
            }
            face_normals.push(n / (2.0 * area));
            face_areas.push(area);
        }

        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::with_capacity(faces.len() * 2);
        for (fi, f) in faces.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (f[i], f[(i + 1) % 3]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push((fi, i));
            }
        }
        let mut neighbors = vec![[None; 3]; faces.len()];
        let mut bad = Vec::new();
        for (&(a, b), uses) in &edge_map {
            match uses.as_slice() {
                [_] => {}
                [(f0, e0), (f1, e1)] => {
                    let s0 = faces[*f0][*e0];
                    let s1 = faces[*f1][*e1];
                    if s0 == s1 {
                        bad.push([a, b]);
                    } else {
                        neighbors[*f0][*e0] = Some(*f1);
                        neighbors[*f1][*e1] = Some(*f0);
                    }
                }
                _ => bad.push([a, b]),
            }
        }
        if !bad.is_empty() {
            bad.sort_unstable();
            return Err(MeshError::NonManifold { edges: bad });
        }

        let mut vertex_faces = vec![Vec::new(); nv];
        let mut vn = vec![Vec3::zeros(); nv];
        for (fi, f) in faces.iter().enumerate() {
            for i in 0..3 {
                let p = vertices[f[i]];
                let e1 = (vertices[f[(i + 1) % 3]] - p).normalize();
                let e2 = (vertices[f[(i + 2) % 3]] - p).normalize();
                let angle = e1.dot(&e2).clamp(-1.0, 1.0).acos();
                vn[f[i]] += face_normals[fi] * angle;
                vertex_faces[f[i]].push(fi);
            }
        }
        for (v, n) in vn.iter_mut().enumerate() {
            let len = n.norm();
            if len > 1e-300 {
                *n /= len;
            } else if let Some(&f) = vertex_faces[v].first() {
                *n = face_normals[f];
            } else {
                *n = Vec3::z();
            }
        }

        Ok(TriMesh {
            vertices,
            faces,
            face_normals,
            face_areas,
            vertex_normals: vn,
            neighbors,
            vertex_faces,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        self.face_normals[f]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_areas[f]
    }

    pub fn vertex_normal(&self, v: usize) -> Vec3 {
        self.vertex_normals[v]
    }

    pub fn vertex_normals(&self) -> &[Vec3] {
        &self.vertex_normals
    }

    /// Faces incident to vertex `v`.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Face across edge `edge` of face `f`, `None` on an open boundary.
    pub fn neighbor(&self, f: usize, edge: usize) -> Option<usize> {
        self.neighbors[f][edge]
    }

    pub fn corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Index of the edge of `f` whose endpoints are `a` and `b` (either order).
    pub fn edge_index(&self, f: usize, a: usize, b: usize) -> Option<usize> {
        let face = self.faces[f];
        (0..3).find(|&i| {
            let (x, y) = (face[i], face[(i + 1) % 3]);
            (x == a && y == b) || (x == b && y == a)
        })
    }

    /// Undirected boundary edges, sorted.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for i in 0..3 {
                if self.neighbors[fi][i].is_none() {
                    let (a, b) = (f[i], f[(i + 1) % 3]);
                    out.push([a.min(b), a.max(b)]);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_closed(&self) -> bool {
        self.neighbors.iter().all(|n| n.iter().all(Option::is_some))
    }

    /// Signed enclosed volume (mm³); positive for outward-oriented closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let (a, b, c) = (self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn surface_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Mean edge length, a rough mesh resolution measure.
    pub fn mean_edge_length(&self) -> f64 {
        let mut total = 0.0;
        for f in &self.faces {
            for i in 0..3 {
                total += (self.vertices[f[i]] - self.vertices[f[(i + 1) % 3]]).norm();
            }
        }
        total / (3 * self.faces.len()) as f64
    }

    /// Barycentric combination of the face's corners.
    pub fn embed(&self, p: &SurfacePoint) -> Result<Vec3, MeshError> {
        if p.face >= self.faces.len() {
            return Err(MeshError::InvalidFaceIndex(p.face));
        }
        Ok(self.point(p))
    }

    /// Unchecked [`embed`](Self::embed).
    pub(crate) fn point(&self, p: &SurfacePoint) -> Vec3 {
        let [a, b, c] = self.faces[p.face];
        self.vertices[a] * p.bary[0] + self.vertices[b] * p.bary[1] + self.vertices[c] * p.bary[2]
    }

    /// Whether `p` is a valid point of this mesh.
    pub fn contains(&self, p: &SurfacePoint) -> bool {
        p.face < self.faces.len() && p.is_normalized()
    }

    /// Unit normal at `p` under `mode`.
    pub fn normal_at(&self, p: &SurfacePoint, mode: NormalMode) -> Vec3 {
        match mode {
            NormalMode::Face => self.face_normals[p.face],
            NormalMode::Vertex => {
                let [a, b, c] = self.faces[p.face];
                let n = self.vertex_normals[a] * p.bary[0]
                    + self.vertex_normals[b] * p.bary[1]
                    + self.vertex_normals[c] * p.bary[2];
                let len = n.norm();
                if len > 1e-12 {
                    n / len
                } else {
                    self.face_normals[p.face]
                }
            }
        }
    }

    /// Tangent direction at `at` pointing toward the 3D position `toward`.
    pub fn project_to_tangent(
        &self,
        at: &SurfacePoint,
        toward: &Vec3,
        mode: NormalMode,
    ) -> Result<TangentVector, MeshError> {
        self.project_to_tangent_with(at, toward, mode, DEFAULT_DEGENERACY_THRESHOLD)
    }

    /// [`project_to_tangent`](Self::project_to_tangent) with an explicit degeneracy threshold.
    pub fn project_to_tangent_with(
        &self,
        at: &SurfacePoint,
        toward: &Vec3,
        mode: NormalMode,
        threshold: f64,
    ) -> Result<TangentVector, MeshError> {
        let origin = self.embed(at)?;
        let v = toward - origin;
        let full = v.norm();
        if full == 0.0 {
            return Err(MeshError::DegenerateDirection);
        }
        let n = self.normal_at(at, mode);
        let t = v - n * n.dot(&v);
        let tn = t.norm();
        if tn < threshold * full {
            return Err(MeshError::DegenerateDirection);
        }
        let fnrm = self.face_normals[at.face];
        let t = t / tn;
        let in_face = t - fnrm * fnrm.dot(&t);
        let len = in_face.norm();
        if len < threshold {
            return Err(MeshError::DegenerateDirection);
        }
        Ok(TangentVector {
            face: at.face,
            dir: in_face / len,
        })
    }

    /// Nearest surface point to `p`, by exhaustive search.
    pub fn closest_point(&self, p: &Vec3) -> SurfacePoint {
        let mut best = (f64::INFINITY, SurfacePoint::centroid(0));
        for f in 0..self.faces.len() {
            let [a, b, c] = self.corners(f);
            let w = closest_point_on_triangle(p, &a, &b, &c);
            let q = a * w[0] + b * w[1] + c * w[2];
            let d = (q - p).norm_squared();
            if d < best.0 {
                best = (d, SurfacePoint::new(f, w));
            }
        }
        best.1
    }

    /// Barycentric coordinates of the 3D point `p` w.r.t. face `f` (no clamping).
    pub fn barycentric(&self, f: usize, p: &Vec3) -> [f64; 3] {
        let [a, b, c] = self.corners(f);
        let n = self.face_normals[f];
        let area2 = 2.0 * self.face_areas[f];
        let wa = (c - b).cross(&(p - b)).dot(&n) / area2;
        let wb = (a - c).cross(&(p - c)).dot(&n) / area2;
        [wa, wb, 1.0 - wa - wb]
    }

    /// Re-expresses a point lying on an edge or vertex of `p.face` in the adjacent face `g`.
    pub(crate) fn transfer(&self, p: &SurfacePoint, g: usize) -> Option<SurfacePoint> {
        if p.face == g {
            return Some(*p);
        }
        let src = self.faces[p.face];
        let dst = self.faces[g];
        let mut bary = [0.0; 3];
        let mut covered = 0.0;
        for i in 0..3 {
            if let Some(j) = dst.iter().position(|&v| v == src[i]) {
                bary[j] = p.bary[i];
                covered += p.bary[i];
            }
        }
        if (covered - 1.0).abs() > 1e-9 {
            return None;
        }
        Some(SurfacePoint::new(g, bary).normalized())
    }
}
