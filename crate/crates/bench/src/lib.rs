//! Inputs shared by the benchmarks in `benches/`.

use coppertrace_core::mesh::shapes;
use coppertrace_core::{route_trace, RoutingParams, SurfacePoint, SurfacePolyline, TriMesh, Vec3};

/// Endpoints for a route across `mesh`, snapped from two points in space.
pub fn endpoints(mesh: &TriMesh, a: Vec3, b: Vec3) -> (SurfacePoint, SurfacePoint) {
    (mesh.closest_point(&a), mesh.closest_point(&b))
}

/// The 100 x 80 x 10 slab at 250 x 200 cells with one trace across it.
pub fn engraving_slab() -> (TriMesh, SurfacePolyline) {
    let mesh = shapes::slab(100.0, 80.0, 10.0, 250, 200);
    let (a, b) = endpoints(&mesh, Vec3::new(10.0, 60.0, 10.0), Vec3::new(90.0, 60.0, 10.0));
    let trace = route_trace(&mesh, &a, &b, &RoutingParams::default()).expect("slab routes");
    (mesh, trace)
}
