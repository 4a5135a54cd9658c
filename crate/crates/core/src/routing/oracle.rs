//! Reference shortest paths over a Steiner-point graph.
//!
//! Nodes are the mesh vertices plus `refinement` evenly spaced points on every edge; every
//! pair of nodes on the border of a common face is joined by a straight in-face segment.
//! The resulting length upper-bounds the polyhedral geodesic and converges to it as the
//! refinement grows.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{RoutingError, SurfacePolyline};
use crate::geom::Vec3;
use crate::mesh::{MeshError, SurfacePoint, TriMesh};

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Graph<'m> {
    mesh: &'m TriMesh,
    k: usize,
    // undirected edge id -> (lower vertex, higher vertex, adjacent faces)
    edges: Vec<(usize, usize, [Option<usize>; 2])>,
    face_edges: Vec<[usize; 3]>,
    source: usize,
    target: usize,
    p0: SurfacePoint,
    q0: SurfacePoint,
}

impl Graph<'_> {
    fn node_count(&self) -> usize {
        self.target + 1
    }

    fn position(&self, node: usize) -> Vec3 {
        let nv = self.mesh.vertex_count();
        if node < nv {
            self.mesh.vertices()[node]
        } else if node == self.source {
            self.mesh.point(&self.p0)
        } else if node == self.target {
            self.mesh.point(&self.q0)
        } else {
            let (e, j) = ((node - nv) / self.k, (node - nv) % self.k);
            let (a, b, _) = self.edges[e];
            let t = (j + 1) as f64 / (self.k + 1) as f64;
            self.mesh.vertices()[a] * (1.0 - t) + self.mesh.vertices()[b] * t
        }
    }

    fn faces_of(&self, node: usize) -> Vec<usize> {
        let nv = self.mesh.vertex_count();
        if node < nv {
            self.mesh.vertex_faces(node).to_vec()
        } else if node == self.source {
            vec![self.p0.face]
        } else if node == self.target {
            vec![self.q0.face]
        } else {
            let (_, _, adj) = self.edges[(node - nv) / self.k];
            adj.iter().flatten().copied().collect()
        }
    }

    fn face_nodes(&self, f: usize, out: &mut Vec<usize>) {
        out.clear();
        let nv = self.mesh.vertex_count();
        out.extend_from_slice(&self.mesh.faces()[f]);
        for &e in &self.face_edges[f] {
            out.extend((0..self.k).map(|j| nv + e * self.k + j));
        }
        if self.p0.face == f {
            out.push(self.source);
        }
        if self.q0.face == f {
            out.push(self.target);
        }
    }

    fn surface_point(&self, node: usize, f: usize) -> SurfacePoint {
        if node == self.source && self.p0.face == f {
            return self.p0;
        }
        if node == self.target && self.q0.face == f {
            return self.q0;
        }
        let mesh = self.mesh;
        let w = mesh.barycentric(f, &self.position(node));
        SurfacePoint::new(f, w).normalized()
    }
}

/// Shortest path from `p0` to `q0` over the Steiner graph with `refinement` points per edge.
pub fn geodesic_oracle(
    mesh: &TriMesh,
    p0: &SurfacePoint,
    q0: &SurfacePoint,
    refinement: usize,
) -> Result<SurfacePolyline, RoutingError> {
    for p in [p0, q0] {
        if !mesh.contains(p) {
            return Err(MeshError::InvalidFaceIndex(p.face).into());
        }
    }
    let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, [Option<usize>; 2])> = Vec::new();
    let mut face_edges = vec![[0usize; 3]; mesh.face_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        for i in 0..3 {
            let (a, b) = (f[i].min(f[(i + 1) % 3]), f[i].max(f[(i + 1) % 3]));
            let id = *edge_ids.entry((a, b)).or_insert_with(|| {
                edges.push((a, b, [None, None]));
                edges.len() - 1
            });
            let slot = &mut edges[id].2;
            if slot[0].is_none() {
                slot[0] = Some(fi);
            } else {
                slot[1] = Some(fi);
            }
            face_edges[fi][i] = id;
        }
    }
    let k = refinement;
    let base = mesh.vertex_count() + edges.len() * k;
    let graph = Graph {
        mesh,
        k,
        edges,
        face_edges,
        source: base,
        target: base + 1,
        p0: *p0,
        q0: *q0,
    };

    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[graph.source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: graph.source,
    });
    let mut scratch = Vec::new();
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == graph.target {
            break;
        }
        let pu = graph.position(u);
        for f in graph.faces_of(u) {
            graph.face_nodes(f, &mut scratch);
            for &w in &scratch {
                if w == u || done[w] {
                    continue;
                }
                let nd = d + (graph.position(w) - pu).norm();
                if nd < dist[w] {
                    dist[w] = nd;
                    prev[w] = Some((u, f));
                    heap.push(Entry { dist: nd, node: w });
                }
            }
        }
    }
    if !done[graph.target] {
        return Err(RoutingError::Disconnected);
    }

    let mut samples = vec![*q0];
    let mut node = graph.target;
    while let Some((u, f)) = prev[node] {
        if samples.last().is_some_and(|s| s.face != f) {
            let head = graph.surface_point(node, f);
            samples.push(head);
        }
        samples.push(graph.surface_point(u, f));
        node = u;
    }
    samples.reverse();
    if let Some(first) = samples.first_mut() {
        *first = *p0;
    }
    Ok(SurfacePolyline::routed(mesh, samples))
}
