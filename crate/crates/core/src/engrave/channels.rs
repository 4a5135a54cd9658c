use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;

use super::refine::refine;
use super::segments::{Segment, SegmentGrid};
use super::{ChannelProfile, EngraveError, EngraveResult, TraceReport};
use crate::geom::{triangles_intersect, Aabb};
use crate::mesh::{Bvh, NormalMode, SurfacePoint, TriMesh};
use crate::routing::SurfacePolyline;

/// Carves a V-channel along every trace.
///
/// The mesh is refined around the traces, each vertex within reach gets its distance to the
/// nearest trace by flooding outward from the faces the traces cross, and vertices inside
/// the channel move inward along their normal by [`ChannelProfile::depth_at`]. Vertices
/// beyond the lip keep their exact input coordinates.
pub fn engrave_channels(
    mesh: &TriMesh,
    traces: &[SurfacePolyline],
    profile: &ChannelProfile,
) -> Result<EngraveResult, EngraveError> {
    profile.validate()?;
    if let Some(i) = traces.iter().position(|t| !t.is_routed()) {
        return Err(EngraveError::NotRouted(i));
    }
    if traces.iter().all(|t| t.samples.is_empty()) {
        return Ok(EngraveResult::identity(mesh));
    }
    let mut segs = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let pts = t.distinct_positions(mesh);
        if pts.len() == 1 {
            segs.push(Segment {
                a: pts[0],
                b: pts[0],
                trace: i,
            });
        }
        segs.extend(pts.windows(2).map(|w| Segment {
            a: w[0],
            b: w[1],
            trace: i,
        }));
    }
    let half = profile.channel_width / 2.0;
    let grid = SegmentGrid::new(segs, profile.reach());
    let refined = refine(mesh, &grid, half, profile.channel_width / 4.0)?;
    let (rest, faces) = (&refined.vertices, &refined.faces);

    // Flood from the vertices of faces the traces run through.
    let crossed: BTreeSet<usize> = traces.iter().flat_map(|t| t.samples.iter().map(|s| s.face)).collect();
    let nv = rest.len();
    let mut nearest: Vec<Option<(f64, u32)>> = vec![None; nv];
    let mut visited = vec![false; nv];
    let mut queue = VecDeque::new();
    for (f, tri) in faces.iter().enumerate() {
        if !crossed.contains(&refined.origin[f]) {
            continue;
        }
        for &v in tri {
            if !visited[v] {
                visited[v] = true;
                if let Some(hit) = grid.nearest(&rest[v]) {
                    nearest[v] = Some(hit);
                    queue.push_back(v);
                }
            }
        }
    }
    let neighbors = vertex_neighbors(rest.len(), faces);
    while let Some(v) = queue.pop_front() {
        for &w in &neighbors[v] {
            if visited[w] {
                continue;
            }
            visited[w] = true;
            if let Some(hit) = grid.nearest(&rest[w]) {
                nearest[w] = Some(hit);
                queue.push_back(w);
            }
        }
    }

    // Any refined face holding each vertex, to look up its place in the input mesh.
    let mut holder = vec![usize::MAX; nv];
    for (f, tri) in faces.iter().enumerate() {
        for &v in tri {
            holder[v] = f;
        }
    }
    let mut vertices = rest.clone();
    let mut displaced = vec![false; nv];
    let mut reports: Vec<TraceReport> = (0..traces.len()).map(|trace| TraceReport { trace, max_depth: 0.0 }).collect();
    let mut count = 0;
    for v in 0..nv {
        let Some((d, seg)) = nearest[v] else { continue };
        let depth = profile.depth_at(d);
        if depth <= 0.0 {
            continue;
        }
        // The interpolated input normal field is continuous, so neighbouring vertices move
        // in nearly the same direction and thin refinement slivers cannot fold.
        let f = refined.origin[holder[v]];
        let at = SurfacePoint::new(f, mesh.barycentric(f, &rest[v])).normalized();
        vertices[v] -= mesh.normal_at(&at, NormalMode::Vertex) * depth;
        displaced[v] = true;
        count += 1;
        let r = &mut reports[grid.segment(seg).trace];
        r.max_depth = r.max_depth.max(depth);
    }
    let out = TriMesh::new(vertices, refined.faces)?;
    let hits = count_intersections_near(&out, &displaced);
    if hits > 0 {
        return Err(EngraveError::SelfIntersection { count: hits });
    }
    Ok(EngraveResult {
        mesh: out,
        displaced_vertex_count: count,
        traces: reports,
        holes: Vec::new(),
    })
}

fn vertex_neighbors(count: usize, faces: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut n: Vec<Vec<usize>> = vec![Vec::new(); count];
    for f in faces {
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            n[a].push(b);
            n[b].push(a);
        }
    }
    for list in &mut n {
        list.sort_unstable();
        list.dedup();
    }
    n
}

/// Intersecting face pairs where at least one face has a displaced vertex.
fn count_intersections_near(mesh: &TriMesh, displaced: &[bool]) -> usize {
    let bvh = Bvh::build(mesh.vertices(), mesh.faces());
    let faces = mesh.faces();
    let moved: Vec<usize> = (0..faces.len()).filter(|&f| faces[f].iter().any(|&v| displaced[v])).collect();
    moved
        .par_iter()
        .map(|&f| {
            let t = bvh.triangle(f);
            let bb = Aabb::from_points(t.iter()).inflate(1e-9);
            let mut hits = 0;
            bvh.for_each_overlap(&bb, |g| {
                if g == f || faces[g].iter().any(|v| faces[f].contains(v)) {
                    return;
                }
                let g_moved = faces[g].iter().any(|&v| displaced[v]);
                if g_moved && g < f {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::mesh::shapes;
    use crate::routing::{route_trace, RoutingParams};

    fn straight(m: &TriMesh, a: Vec3, b: Vec3) -> SurfacePolyline {
        let pa = m.closest_point(&a);
        let pb = m.closest_point(&b);
        route_trace(m, &pa, &pb, &RoutingParams::default()).unwrap()
    }

    #[test]
    fn empty_traces_are_identity() {
        let m = shapes::slab(20.0, 20.0, 5.0, 4, 4);
        let r = engrave_channels(&m, &[], &ChannelProfile::default()).unwrap();
        assert_eq!(r.mesh, m);
        assert_eq!(r.displaced_vertex_count, 0);
    }

    #[test]
    fn failed_trace_is_rejected() {
        let m = shapes::slab(20.0, 20.0, 5.0, 4, 4);
        let t = SurfacePolyline::failed(
            crate::mesh::SurfacePoint::centroid(0),
            crate::mesh::SurfacePoint::centroid(1),
            crate::routing::FailureReason::MaxSteps,
        );
        assert_eq!(
            engrave_channels(&m, &[t], &ChannelProfile::default()).unwrap_err(),
            EngraveError::NotRouted(0)
        );
    }

    #[test]
    fn far_vertices_are_untouched_and_depth_is_bounded() {
        let m = shapes::slab(30.0, 30.0, 6.0, 6, 6);
        let p = ChannelProfile::default();
        let t = straight(&m, Vec3::new(5.0, 13.0, 6.0), Vec3::new(25.0, 17.0, 6.0));
        let r = engrave_channels(&m, &[t.clone()], &p).unwrap();
        assert!(r.mesh.is_closed());
        assert!(r.displaced_vertex_count > 0);
        assert!((r.traces[0].max_depth - 1.0).abs() < 1e-9);
        // Original vertices come first in the refined mesh.
        let pts = t.positions(&m);
        let dist = |x: &Vec3| {
            pts.windows(2)
                .map(|w| crate::geom::point_segment(x, &w[0], &w[1]).1)
                .fold(f64::INFINITY, f64::min)
        };
        for (i, v) in m.vertices().iter().enumerate() {
            if dist(v) > p.reach() {
                assert_eq!(r.mesh.vertices()[i], *v);
            }
        }
        for v in r.mesh.vertices() {
            assert!(v.z >= 6.0 - p.channel_depth - 1e-9 || v.z == 0.0, "{v:?}");
        }
        assert!(r.mesh.signed_volume() < m.signed_volume());
    }
}
