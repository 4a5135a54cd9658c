use super::{RoutingError, SurfacePolyline};
use crate::geom::{segment_segment, Aabb, Vec3};
use crate::mesh::TriMesh;

const CHUNK: usize = 8;

/// Closest approach between two polylines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPair {
    pub distance: f64,
    pub on_a: Vec3,
    pub on_b: Vec3,
}

/// Minimum 3D distance between any segment of `a` and any segment of `b` (mm).
pub fn polyline_min_distance(mesh: &TriMesh, a: &SurfacePolyline, b: &SurfacePolyline) -> Result<f64, RoutingError> {
    polyline_closest(mesh, a, b).map(|c| c.distance)
}

pub fn polyline_closest(mesh: &TriMesh, a: &SurfacePolyline, b: &SurfacePolyline) -> Result<ClosestPair, RoutingError> {
    let pa = a.distinct_positions(mesh);
    let pb = b.distinct_positions(mesh);
    if pa.is_empty() || pb.is_empty() {
        return Err(RoutingError::EmptyPolyline);
    }
    Ok(points_closest(&pa, &pb))
}

/// Segments of a polyline; a single point becomes one zero-length segment.
fn segments(p: &[Vec3]) -> Vec<(Vec3, Vec3)> {
    if p.len() == 1 {
        return vec![(p[0], p[0])];
    }
    p.windows(2).map(|w| (w[0], w[1])).collect()
}

fn chunks(segs: &[(Vec3, Vec3)]) -> Vec<(Aabb, std::ops::Range<usize>)> {
    (0..segs.len())
        .step_by(CHUNK)
        .map(|s| {
            let r = s..(s + CHUNK).min(segs.len());
            let bb = segs[r.clone()]
                .iter()
                .fold(Aabb::empty(), |acc, (p, q)| Aabb::from_points([p, q]).merge(&acc));
            (bb, r)
        })
        .collect()
}

pub(crate) fn points_closest(pa: &[Vec3], pb: &[Vec3]) -> ClosestPair {
    let sa = segments(pa);
    let sb = segments(pb);
    let ca = chunks(&sa);
    let cb = chunks(&sb);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(ca.len() * cb.len());
    for (i, (ba, _)) in ca.iter().enumerate() {
        for (j, (bb, _)) in cb.iter().enumerate() {
            pairs.push((ba.distance(bb), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = ClosestPair {
        distance: f64::INFINITY,
        on_a: pa[0],
        on_b: pb[0],
    };
    for (lower, i, j) in pairs {
        if lower >= best.distance {
            break;
        }
        for (p0, p1) in &sa[ca[i].1.clone()] {
            for (q0, q1) in &sb[cb[j].1.clone()] {
                let (s, t, d) = segment_segment(p0, p1, q0, q1);
                if d < best.distance {
                    best = ClosestPair {
                        distance: d,
                        on_a: p0 + (p1 - p0) * s,
                        on_b: q0 + (q1 - q0) * t,
                    };
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::routing::{route_trace, RoutingParams};

    #[test]
    fn pitch_spaced_parallel_traces() {
        let m = shapes::plane_grid(50.0, 50.0, 10, 10);
        let p = RoutingParams::default();
        let route = |a: (f64, f64), b: (f64, f64)| {
            let pa = m.closest_point(&Vec3::new(a.0, a.1, 0.0));
            let pb = m.closest_point(&Vec3::new(b.0, b.1, 0.0));
            route_trace(&m, &pa, &pb, &p).unwrap()
        };
        let t1 = route((5.0, 20.0), (45.0, 20.0));
        let t2 = route((5.0, 22.54), (45.0, 22.54));
        let d = polyline_min_distance(&m, &t1, &t2).unwrap();
        assert!((d - 2.54).abs() < 1e-6, "{d}");
        assert_eq!(polyline_min_distance(&m, &t1, &t1).unwrap(), 0.0);
    }

    #[test]
    fn failed_polyline_is_empty() {
        let m = shapes::plane_grid(10.0, 10.0, 2, 2);
        let sp = crate::mesh::SurfacePoint::centroid(0);
        let f = SurfacePolyline::failed(sp, sp, crate::routing::FailureReason::MaxSteps);
        assert_eq!(polyline_min_distance(&m, &f, &f), Err(RoutingError::EmptyPolyline));
    }
}
