use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{triangles_intersect, Aabb, Vec3};
use crate::mesh::{Bvh, TriMesh};

/// Watertightness, manifoldness and orientation summary of a triangle soup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintReport {
    pub boundary_edges: usize,
    /// Edges shared by more than two faces or traversed twice in the same direction.
    pub non_manifold_edges: usize,
    /// Vertices whose incident faces form more than one fan.
    pub non_manifold_vertices: usize,
    pub self_intersections: usize,
    pub signed_volume: f64,
}

impl PrintReport {
    pub fn watertight(&self) -> bool {
        self.boundary_edges == 0 && self.non_manifold_edges == 0
    }

    pub fn manifold(&self) -> bool {
        self.non_manifold_edges == 0 && self.non_manifold_vertices == 0
    }

    /// Positive enclosed volume, i.e. normals face out.
    pub fn outward(&self) -> bool {
        self.signed_volume > 0.0
    }

    pub fn is_printable(&self) -> bool {
        self.watertight() && self.manifold() && self.self_intersections == 0 && self.outward()
    }
}

pub fn validate_printable(mesh: &TriMesh) -> PrintReport {
    validate_faces(mesh.vertices(), mesh.faces())
}

/// Checks raw faces, including soups [`TriMesh::new`] would refuse.
pub fn validate_faces(vertices: &[Vec3], faces: &[[usize; 3]]) -> PrintReport {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        for i in 0..3 {
            *directed.entry((f[i], f[(i + 1) % 3])).or_default() += 1;
        }
    }
    let mut boundary_edges = 0;
    let mut non_manifold_edges = 0;
    for (&(a, b), &n) in &directed {
        let back = directed.get(&(b, a)).copied().unwrap_or(0);
        if a < b || back == 0 {
            match (n, back) {
                (1, 1) => {}
                (1, 0) | (0, 1) => boundary_edges += 1,
                _ => non_manifold_edges += 1,
            }
        }
    }

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            incident[v].push(fi);
        }
    }
    let non_manifold_vertices = incident
        .iter()
        .enumerate()
        .filter(|(v, list)| fan_count(*v, list, faces) > 1)
        .count();

    let self_intersections = count_self_intersections(vertices, faces);
    let signed_volume = faces
        .iter()
        .map(|f| vertices[f[0]].dot(&vertices[f[1]].cross(&vertices[f[2]])) / 6.0)
        .sum();
    PrintReport {
        boundary_edges,
        non_manifold_edges,
        non_manifold_vertices,
        self_intersections,
        signed_volume,
    }
}

/// Connected groups of faces around `v`, linked through edges that contain `v`.
fn fan_count(v: usize, list: &[usize], faces: &[[usize; 3]]) -> usize {
    if list.is_empty() {
        return 0;
    }
    let mut parent: Vec<usize> = (0..list.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut by_other: HashMap<usize, usize> = HashMap::new();
    for (k, &f) in list.iter().enumerate() {
        for &w in &faces[f] {
            if w == v {
                continue;
            }
            if let Some(&j) = by_other.get(&w) {
                let (a, b) = (root(&mut parent, k), root(&mut parent, j));
                parent[a] = b;
            } else {
                by_other.insert(w, k);
            }
        }
    }
    (0..list.len()).filter(|&k| root(&mut parent, k) == k).count()
}

fn count_self_intersections(vertices: &[Vec3], faces: &[[usize; 3]]) -> usize {
    if faces.is_empty() {
        return 0;
    }
    let bvh = Bvh::build(vertices, faces);
    (0..faces.len())
        .into_par_iter()
        .map(|f| {
            let t = bvh.triangle(f);
            let bb = Aabb::from_points(t.iter()).inflate(1e-9);
            let mut hits = 0;
            bvh.for_each_overlap(&bb, |g| {
                if g <= f || faces[g].iter().any(|v| faces[f].contains(v)) {
                    return;
                }
                let u = bvh.triangle(g);
                if triangles_intersect([&t[0], &t[1], &t[2]], [&u[0], &u[1], &u[2]], 1e-9) {
                    hits += 1;
                }
            });
            hits
        })
        .sum()
}
