//! Local edge splitting around traces.
//!
//! Edges within reach of a trace are split, longest first, until they are short enough.
//! Edges that cross the trace centerline or the channel lip are split exactly at the
//! crossing, so both lines end up as chains of mesh edges and the carved V is reproduced
//! without interpolation error.

use std::collections::{BinaryHeap, HashMap};

use super::segments::SegmentGrid;
use super::EngraveError;
use crate::geom::{segment_segment, Aabb, Vec3};
use crate::mesh::{Bvh, TriMesh};

/// Features closer than this (mm) to an edge end are treated as passing through the vertex.
const FEATURE_TOL: f64 = 1e-4;
/// Centerline crossings are detected below this segment distance (mm).
const CROSSING_TOL: f64 = 1e-7;
const MAX_SPLITS: usize = 5_000_000;

pub(crate) struct Refined {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Face of the input mesh each output face lies in.
    pub origin: Vec<usize>,
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

struct Refiner<'g> {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    origin: Vec<usize>,
    edges: HashMap<EdgeKey, Vec<usize>>,
    grid: &'g SegmentGrid,
    half: f64,
    reach: f64,
    max_len: f64,
    scratch: Vec<u32>,
}

pub(crate) fn refine(mesh: &TriMesh, grid: &SegmentGrid, half: f64, max_len: f64) -> Result<Refined, EngraveError> {
    let mut r = Refiner {
        vertices: mesh.vertices().to_vec(),
        faces: mesh.faces().to_vec(),
        origin: (0..mesh.face_count()).collect(),
        edges: HashMap::with_capacity(mesh.face_count() * 3 / 2),
        grid,
        half,
        reach: grid.reach(),
        max_len,
        scratch: Vec::new(),
    };
    for (f, face) in r.faces.iter().enumerate() {
        for i in 0..3 {
            r.edges.entry(key(face[i], face[(i + 1) % 3])).or_default().push(f);
        }
    }
    if grid.is_empty() {
        return Ok(r.finish());
    }

    // Seed with edges of faces near any trace segment.
    let bvh = Bvh::build(mesh.vertices(), mesh.faces());
    let mut near = Vec::new();
    let mut seen = vec![false; mesh.face_count()];
    for i in 0..grid.len() as u32 {
        let s = grid.segment(i);
        let bb = Aabb::from_points([&s.a, &s.b]).inflate(r.reach);
        bvh.for_each_overlap(&bb, |f| {
            if !seen[f] {
                seen[f] = true;
                near.push(f);
            }
        });
    }
    near.sort_unstable();
    let mut initial: Vec<EdgeKey> = near
        .iter()
        .flat_map(|&f| {
            let t = mesh.faces()[f];
            [key(t[0], t[1]), key(t[1], t[2]), key(t[2], t[0])]
        })
        .collect();
    initial.sort_unstable();
    initial.dedup();

    let mut heap = BinaryHeap::new();
    for (a, b) in initial {
        r.push(&mut heap, a, b);
    }
    let mut splits = 0;
    while let Some((_, a, b)) = heap.pop() {
        if !r.edges.contains_key(&(a, b)) {
            continue;
        }
        let Some(t) = r.split_param(a, b) else { continue };
        splits += 1;
        if splits > MAX_SPLITS {
            return Err(EngraveError::RefinementBudget);
        }
        let (m, opposite) = r.split(a, b, t);
        r.push(&mut heap, a, m);
        r.push(&mut heap, m, b);
        for c in opposite {
            r.push(&mut heap, m, c);
        }
    }
    Ok(r.finish())
}

impl Refiner<'_> {
    fn finish(self) -> Refined {
        Refined {
            vertices: self.vertices,
            faces: self.faces,
            origin: self.origin,
        }
    }

    fn push(&mut self, heap: &mut BinaryHeap<(u64, usize, usize)>, a: usize, b: usize) {
        let (a, b) = key(a, b);
        if self.split_param(a, b).is_some() {
            let len = (self.vertices[a] - self.vertices[b]).norm();
            heap.push((len.to_bits(), a, b));
        }
    }

    /// Where to split the edge, if it needs splitting.
    fn split_param(&mut self, a: usize, b: usize) -> Option<f64> {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let len = (q - p).norm();
        if len <= 2.0 * FEATURE_TOL {
            return None;
        }
        let mut cands = std::mem::take(&mut self.scratch);
        self.grid.candidates(&Aabb::from_points([&p, &q]), &mut cands);
        let mut dmin = f64::INFINITY;
        let mut tmin = 0.5;
        let mut crossing: Option<f64> = None;
        for &i in &cands {
            let s = self.grid.segment(i);
            let (t, _, d) = segment_segment(&p, &q, &s.a, &s.b);
            if d < dmin {
                dmin = d;
                tmin = t;
            }
            if d < CROSSING_TOL && crossing.is_none() {
                crossing = Some(t);
            }
        }
        self.scratch = cands;
        if dmin > self.reach {
            return None;
        }
        let tol = FEATURE_TOL / len;
        let interior = |t: f64| t > tol && t < 1.0 - tol;
        let at = |t: f64| if (0.2..=0.8).contains(&t) { t } else { 0.5 };
        let (dp, dq) = (self.grid.distance(&p), self.grid.distance(&q));

        if let Some(t) = crossing {
            if dp > FEATURE_TOL && dq > FEATURE_TOL && interior(t) {
                return Some(at(t));
            }
        }
        let (gp, gq) = (dp - self.half, dq - self.half);
        if (gp > FEATURE_TOL && gq < -FEATURE_TOL) || (gp < -FEATURE_TOL && gq > FEATURE_TOL) {
            let t = self.lip_crossing(&p, &q, gp);
            if interior(t) {
                return Some(at(t));
            }
        }
        if gp > FEATURE_TOL && gq > FEATURE_TOL && dmin < self.half - FEATURE_TOL && interior(tmin) {
            return Some(at(tmin));
        }
        if len > self.max_len {
            return Some(0.5);
        }
        None
    }

    /// Bisection for the point on `p-q` at lip distance, given the sign at `p`.
    fn lip_crossing(&self, p: &Vec3, q: &Vec3, gp: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let g = self.grid.distance(&(p + (q - p) * mid)) - self.half;
            if (g > 0.0) == (gp > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Splits edge `a-b` at parameter `t`, splitting both adjacent faces. Returns the new
    /// vertex and the vertices opposite the edge.
    fn split(&mut self, a: usize, b: usize, t: f64) -> (usize, Vec<usize>) {
        let m = self.vertices.len();
        self.vertices.push(self.vertices[a] * (1.0 - t) + self.vertices[b] * t);
        let faces = self.edges.remove(&key(a, b)).unwrap_or_default();
        let mut opposite = Vec::with_capacity(2);
        for f in faces {
            let tri = self.faces[f];
            let i = (0..3)
                .find(|&i| key(tri[i], tri[(i + 1) % 3]) == key(a, b))
                .expect("edge belongs to face");
            let (x, y, c) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let g = self.faces.len();
            self.faces[f] = [x, m, c];
            self.faces.push([m, y, c]);
            self.origin.push(self.origin[f]);
            if let Some(list) = self.edges.get_mut(&key(y, c)) {
                for slot in list.iter_mut() {
                    if *slot == f {
                        *slot = g;
                    }
                }
            }
            self.edges.entry(key(x, m)).or_default().push(f);
            self.edges.entry(key(m, y)).or_default().push(g);
            let mc = self.edges.entry(key(m, c)).or_default();
            mc.push(f);
            mc.push(g);
            opposite.push(c);
        }
        (m, opposite)
    }
}
