//! Part placements on the mesh and the routed trace of every net edge.

mod clearance;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::clearance::{check_clearance, Element, Violation};
use crate::geom::{rotate_about, Vec3};
use crate::mesh::{MeshError, SurfacePoint, TangentVector, TriMesh};
use crate::routing::{route_trace, walk_on_surface, RoutingError, RoutingParams, SurfacePolyline, WalkError};
use crate::schematic::{EdgeId, Footprint, JunctionId, NetId, PartId, Schematic, SchematicError, Terminal};

/// Default minimum centerline distance between unrelated conductors (mm).
pub const DEFAULT_CLEARANCE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartPlacement {
    pub part: PartId,
    pub anchor: SurfacePoint,
    /// Radians about the surface normal at the anchor, in `[0, 2π)`.
    pub rotation: f64,
}

/// The routed trace of one net edge: one polyline per stretch between waypoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrace {
    pub net: NetId,
    pub segments: Vec<SurfacePolyline>,
}

impl EdgeTrace {
    pub fn is_routed(&self) -> bool {
        self.segments.iter().all(|s| s.is_routed())
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Positions along all routed segments, in order.
    pub fn positions(&self, mesh: &TriMesh) -> Vec<Vec3> {
        let mut out = Vec::new();
        for s in self.segments.iter().filter(|s| s.is_routed()) {
            out.extend(s.positions(mesh));
        }
        out
    }

    /// The sample closest to the given fraction of the routed length.
    pub fn sample_at_fraction(&self, mesh: &TriMesh, fraction: f64) -> Option<SurfacePoint> {
        if !self.is_routed() {
            return None;
        }
        let target = self.length() * fraction.clamp(0.0, 1.0);
        let mut acc = 0.0;
        let mut best: Option<(f64, SurfacePoint)> = None;
        for seg in &self.segments {
            let pos = seg.positions(mesh);
            for (i, s) in seg.samples.iter().enumerate() {
                if i > 0 {
                    acc += (pos[i] - pos[i - 1]).norm();
                }
                let err = (acc - target).abs();
                if best.is_none_or(|(e, _)| err < e) {
                    best = Some((err, *s));
                }
            }
        }
        best.map(|(_, s)| s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error(transparent)]
    Schematic(#[from] SchematicError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("footprint of {part} runs off the mesh boundary")]
    Overhang { part: PartId },
    #[error("part {0} has no placement")]
    MissingPlacement(PartId),
    #[error("junction {0} has no surface position")]
    MissingJunction(JunctionId),
    #[error("unknown net edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge {edge} has no waypoint {index}")]
    WaypointIndex { edge: EdgeId, index: usize },
    #[error("clearance must be positive")]
    InvalidClearance,
}

/// Tangent frame at a surface point: world X projected into the face plane, falling back
/// to world Y where the normal is close to X.
pub(crate) fn reference_frame(mesh: &TriMesh, p: &SurfacePoint) -> (Vec3, Vec3) {
    let n = mesh.face_normal(p.face);
    let mut e1 = Vec3::x() - n * n.x;
    if e1.norm() < 0.1 {
        e1 = Vec3::y() - n * n.y;
    }
    let e1 = e1.normalize();
    (e1, n.cross(&e1))
}

/// Pad positions of a footprint placed at `placement`: each pad is reached by walking its
/// planar offset distance along the surface in the offset direction, rotated by
/// `placement.rotation`.
pub fn pin_surface_points(
    mesh: &TriMesh,
    footprint: &Footprint,
    placement: &PartPlacement,
) -> Result<Vec<SurfacePoint>, LayoutError> {
    if !mesh.contains(&placement.anchor) {
        return Err(MeshError::InvalidFaceIndex(placement.anchor.face).into());
    }
    let anchor = placement.anchor;
    let (e1, _) = reference_frame(mesh, &anchor);
    let n = mesh.face_normal(anchor.face);
    footprint
        .pads
        .iter()
        .map(|&[x, y]| {
            let r = x.hypot(y);
            if r == 0.0 {
                return Ok(anchor);
            }
            let dir = rotate_about(&e1, &n, placement.rotation + y.atan2(x));
            let tv = TangentVector { face: anchor.face, dir };
            match walk_on_surface(mesh, &anchor, &tv, r) {
                Ok(w) => Ok(w.end),
                Err(WalkError::BoundaryHit { .. }) => Err(LayoutError::Overhang { part: placement.part }),
                Err(_) => Err(LayoutError::Overhang { part: placement.part }),
            }
        })
        .collect()
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub placements: BTreeMap<PartId, PartPlacement>,
    pub junctions: BTreeMap<JunctionId, SurfacePoint>,
    /// User-added intermediate points per net edge, in order from edge end `a` to `b`.
    #[serde(default)]
    pub waypoints: BTreeMap<EdgeId, Vec<SurfacePoint>>,
    #[serde(default)]
    pub traces: BTreeMap<EdgeId, EdgeTrace>,
    pub clearance: f64,
}

impl Default for Layout {
    fn default() -> Self {
        Layout {
            placements: BTreeMap::new(),
            junctions: BTreeMap::new(),
            waypoints: BTreeMap::new(),
            traces: BTreeMap::new(),
            clearance: DEFAULT_CLEARANCE,
        }
    }
}

impl Layout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pins(&self, mesh: &TriMesh, sch: &Schematic, part: PartId) -> Result<Vec<SurfacePoint>, LayoutError> {
        let inst = sch.part(part).ok_or(SchematicError::UnknownPart(part))?;
        let placement = self.placements.get(&part).ok_or(LayoutError::MissingPlacement(part))?;
        pin_surface_points(mesh, &inst.def.footprint, placement)
    }

    pub fn terminal_point(&self, mesh: &TriMesh, sch: &Schematic, t: &Terminal) -> Result<SurfacePoint, LayoutError> {
        match t {
            Terminal::Pin { part, pin } => self
                .pins(mesh, sch, *part)?
                .get(*pin)
                .copied()
                .ok_or(SchematicError::UnknownPin { part: *part, pin: *pin }.into()),
            Terminal::Junction { junction } => {
                self.junctions.get(junction).copied().ok_or(LayoutError::MissingJunction(*junction))
            }
        }
    }

    /// The chain of points a trace must visit: edge end `a`, waypoints, edge end `b`.
    pub fn edge_stops(&self, mesh: &TriMesh, sch: &Schematic, edge: EdgeId) -> Result<Vec<SurfacePoint>, LayoutError> {
        let (_, e) = sch.edge(edge).ok_or(LayoutError::UnknownEdge(edge))?;
        let mut stops = vec![self.terminal_point(mesh, sch, &e.a)?];
        stops.extend(self.waypoints.get(&edge).into_iter().flatten().copied());
        stops.push(self.terminal_point(mesh, sch, &e.b)?);
        Ok(stops)
    }

    fn route_edge(
        &self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        edge: EdgeId,
    ) -> Result<EdgeTrace, LayoutError> {
        let (net, _) = sch.edge(edge).ok_or(LayoutError::UnknownEdge(edge))?;
        let stops = self.edge_stops(mesh, sch, edge)?;
        let segments = stops
            .windows(2)
            .map(|w| route_trace(mesh, &w[0], &w[1], params))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EdgeTrace { net, segments })
    }

    /// Whether both ends of `edge` have a surface position yet.
    fn is_placed(&self, sch: &Schematic, edge: EdgeId) -> bool {
        sch.edge(edge).is_some_and(|(_, e)| {
            [e.a, e.b].iter().all(|t| match t {
                Terminal::Pin { part, .. } => self.placements.contains_key(part),
                Terminal::Junction { junction } => self.junctions.contains_key(junction),
            })
        })
    }

    /// Re-routes the given edges (in parallel) and commits all results together. Edges with
    /// an unplaced end are skipped; the returned list holds the edges actually routed.
    pub fn reroute(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        edges: &[EdgeId],
    ) -> Result<Vec<EdgeId>, LayoutError> {
        let mut edges: Vec<EdgeId> = edges.iter().copied().filter(|e| self.is_placed(sch, *e)).collect();
        edges.sort();
        edges.dedup();
        let results: Vec<(EdgeId, EdgeTrace)> = edges
            .par_iter()
            .map(|&e| self.route_edge(mesh, sch, params, e).map(|t| (e, t)))
            .collect::<Result<_, _>>()?;
        self.traces.extend(results);
        Ok(edges)
    }

    /// Places (or re-places) a part and re-routes its edges.
    pub fn place_part(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        part: PartId,
        anchor: SurfacePoint,
        rotation: f64,
    ) -> Result<Vec<EdgeId>, LayoutError> {
        let inst = sch.part(part).ok_or(SchematicError::UnknownPart(part))?;
        let placement = PartPlacement {
            part,
            anchor,
            rotation: wrap_angle(rotation),
        };
        pin_surface_points(mesh, &inst.def.footprint, &placement)?;
        self.placements.insert(part, placement);
        self.reroute(mesh, sch, params, &sch.edges_of_part(part))
    }

    pub fn drag_part(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        part: PartId,
        anchor: SurfacePoint,
    ) -> Result<Vec<EdgeId>, LayoutError> {
        let rotation = self.placements.get(&part).ok_or(LayoutError::MissingPlacement(part))?.rotation;
        self.place_part(mesh, sch, params, part, anchor, rotation)
    }

    /// Rotates a part by `angle` radians about the normal at its anchor.
    pub fn rotate_part(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        part: PartId,
        angle: f64,
    ) -> Result<Vec<EdgeId>, LayoutError> {
        let p = self.placements.get(&part).ok_or(LayoutError::MissingPlacement(part))?;
        let (anchor, rotation) = (p.anchor, p.rotation + angle);
        self.place_part(mesh, sch, params, part, anchor, rotation)
    }

    pub fn move_junction(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        junction: JunctionId,
        point: SurfacePoint,
    ) -> Result<Vec<EdgeId>, LayoutError> {
        mesh.embed(&point)?;
        if sch.junction(junction).is_none() {
            return Err(SchematicError::NoSuchJunction(junction).into());
        }
        self.junctions.insert(junction, point);
        self.reroute(mesh, sch, params, &sch.edges_of_terminal(&Terminal::junction(junction)))
    }

    /// Inserts a waypoint on `edge` at `index` in its waypoint list, or where it adds the
    /// least chord detour when `index` is `None`. Returns the index used.
    pub fn add_waypoint(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        edge: EdgeId,
        point: SurfacePoint,
        index: Option<usize>,
    ) -> Result<usize, LayoutError> {
        let p = mesh.embed(&point)?;
        let stops = self.edge_stops(mesh, sch, edge)?;
        let count = stops.len() - 2;
        let index = match index {
            Some(i) if i > count => return Err(LayoutError::WaypointIndex { edge, index: i }),
            Some(i) => i,
            None => {
                let pos: Vec<Vec3> = stops.iter().map(|s| mesh.point(s)).collect();
                (0..=count)
                    .min_by(|&i, &j| {
                        let detour = |k: usize| (pos[k] - p).norm() + (pos[k + 1] - p).norm() - (pos[k + 1] - pos[k]).norm();
                        detour(i).total_cmp(&detour(j))
                    })
                    .unwrap_or(0)
            }
        };
        self.waypoints.entry(edge).or_default().insert(index, point);
        self.reroute(mesh, sch, params, &[edge])?;
        Ok(index)
    }

    pub fn delete_waypoint(
        &mut self,
        mesh: &TriMesh,
        sch: &Schematic,
        params: &RoutingParams,
        edge: EdgeId,
        index: usize,
    ) -> Result<SurfacePoint, LayoutError> {
        let list = self.waypoints.get_mut(&edge).filter(|l| index < l.len());
        let Some(list) = list else {
            return Err(LayoutError::WaypointIndex { edge, index });
        };
        let removed = list.remove(index);
        if list.is_empty() {
            self.waypoints.remove(&edge);
        }
        self.reroute(mesh, sch, params, &[edge])?;
        Ok(removed)
    }

    /// Brings the layout in line with `sch`: forgets removed parts, junctions and edges and
    /// routes edges that have no trace yet. Returns the edges routed.
    pub fn sync(&mut self, mesh: &TriMesh, sch: &Schematic, params: &RoutingParams) -> Result<Vec<EdgeId>, LayoutError> {
        self.placements.retain(|p, _| sch.part(*p).is_some());
        self.junctions.retain(|j, _| sch.junction(*j).is_some());
        self.waypoints.retain(|e, _| sch.edge(*e).is_some());
        self.traces.retain(|e, _| sch.edge(*e).is_some());
        let missing: Vec<EdgeId> = sch
            .edges()
            .map(|(_, e)| e.id)
            .filter(|e| !self.traces.contains_key(e))
            .collect();
        self.reroute(mesh, sch, params, &missing)
    }

    /// Re-routes every edge from scratch.
    pub fn route_all(&mut self, mesh: &TriMesh, sch: &Schematic, params: &RoutingParams) -> Result<Vec<EdgeId>, LayoutError> {
        self.traces.clear();
        self.sync(mesh, sch, params)
    }

    pub fn failed_edges(&self) -> Vec<EdgeId> {
        self.traces.iter().filter(|(_, t)| !t.is_routed()).map(|(e, _)| *e).collect()
    }

    /// Every part placed, every edge traced and no edge failed.
    pub fn is_complete(&self, sch: &Schematic) -> bool {
        sch.parts.iter().all(|p| self.placements.contains_key(&p.id))
            && sch.edges().all(|(_, e)| self.traces.contains_key(&e.id))
            && self.failed_edges().is_empty()
    }

    /// Complete, and no clearance violations.
    pub fn is_export_valid(&self, mesh: &TriMesh, sch: &Schematic) -> Result<bool, LayoutError> {
        Ok(self.is_complete(sch) && check_clearance(mesh, sch, self)?.is_empty())
    }

    /// All pad positions with their owning part and pin.
    pub fn all_pins(&self, mesh: &TriMesh, sch: &Schematic) -> Result<Vec<(PartId, usize, SurfacePoint)>, LayoutError> {
        let mut out = Vec::new();
        for p in &sch.parts {
            for (i, sp) in self.pins(mesh, sch, p.id)?.into_iter().enumerate() {
                out.push((p.id, i, sp));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::routing::TraceStatus;
    use crate::schematic::library;

    fn on_plane(m: &TriMesh, x: f64, y: f64) -> SurfacePoint {
        m.closest_point(&Vec3::new(x, y, 0.0))
    }

    #[test]
    fn dip8_on_plane_matches_flat_grid() {
        let m = shapes::plane_grid(100.0, 100.0, 20, 20);
        let def = library::dip(8);
        for rot in [0.0, 0.3, 2.0] {
            let pl = PartPlacement {
                part: PartId(0),
                anchor: on_plane(&m, 40.0, 50.0),
                rotation: rot,
            };
            let pins = pin_surface_points(&m, &def.footprint, &pl).unwrap();
            let (s, c) = (rot as f64).sin_cos();
            for (sp, [x, y]) in pins.iter().zip(&def.footprint.pads) {
                let want = Vec3::new(40.0 + c * x - s * y, 50.0 + s * x + c * y, 0.0);
                assert!((m.embed(sp).unwrap() - want).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn two_pin_part_on_sphere_keeps_pitch() {
        let r = 50.0;
        let m = shapes::icosphere(r, 3);
        let def = library::capacitor();
        for target in [Vec3::new(0.3, 0.5, 0.8), Vec3::new(-1.0, 0.2, 0.1), Vec3::new(0.0, 0.0, -1.0)] {
            let pl = PartPlacement {
                part: PartId(0),
                anchor: m.closest_point(&(target.normalize() * r)),
                rotation: 0.7,
            };
            let pins = pin_surface_points(&m, &def.footprint, &pl).unwrap();
            // Surface distance between the pins.
            let sep = route_trace(&m, &pins[0], &pins[1], &RoutingParams::default()).unwrap().length;
            assert!((sep - 2.54).abs() / 2.54 < 1e-3, "{sep}");
        }
    }

    #[test]
    fn overhang_is_refused() {
        let m = shapes::plane_grid(20.0, 20.0, 4, 4);
        let pl = PartPlacement {
            part: PartId(0),
            anchor: on_plane(&m, 0.5, 10.0),
            rotation: 0.0,
        };
        assert_eq!(
            pin_surface_points(&m, &library::dip(8).footprint, &pl),
            Err(LayoutError::Overhang { part: PartId(0) })
        );
    }

    struct Fixture {
        mesh: TriMesh,
        sch: Schematic,
        layout: Layout,
        params: RoutingParams,
        parts: Vec<PartId>,
    }

    /// Three resistors in a row, chained by two nets.
    fn chain() -> Fixture {
        let mesh = shapes::plane_grid(100.0, 100.0, 20, 20);
        let mut sch = Schematic::new();
        let parts: Vec<PartId> = (0..3)
            .map(|i| sch.add_part(&format!("R{i}"), library::resistor(), [0.0, 0.0]).unwrap())
            .collect();
        sch.add_net("A", Terminal::pin(parts[0], 1), Terminal::pin(parts[1], 0)).unwrap();
        sch.add_net("B", Terminal::pin(parts[1], 1), Terminal::pin(parts[2], 0)).unwrap();
        let params = RoutingParams::default();
        let mut layout = Layout::new();
        for (i, p) in parts.iter().enumerate() {
            let anchor = on_plane(&mesh, 20.0 + 30.0 * i as f64, 50.0 + 5.0 * i as f64);
            layout.place_part(&mesh, &sch, &params, *p, anchor, 0.0).unwrap();
        }
        Fixture {
            mesh,
            sch,
            layout,
            params,
            parts,
        }
    }

    #[test]
    fn drag_reroutes_only_incident_edges() {
        let mut f = chain();
        assert!(f.layout.is_complete(&f.sch));
        let before = f.layout.traces.clone();
        let anchor = on_plane(&f.mesh, 80.0, 80.0);
        let rerouted = f.layout.drag_part(&f.mesh, &f.sch, &f.params, f.parts[2], anchor).unwrap();
        let b_edge = f.sch.nets[1].edges[0].id;
        assert_eq!(rerouted, vec![b_edge]);
        let a_edge = f.sch.nets[0].edges[0].id;
        assert_eq!(f.layout.traces[&a_edge], before[&a_edge]);
        // Still a straight pin-to-pin segment.
        let t = &f.layout.traces[&b_edge];
        let stops = f.layout.edge_stops(&f.mesh, &f.sch, b_edge).unwrap();
        let chord = (f.mesh.point(&stops[0]) - f.mesh.point(&stops[1])).norm();
        assert!((t.length() - chord).abs() < 1e-9 * chord.max(1.0));
    }

    #[test]
    fn full_turn_keeps_pins() {
        let mut f = chain();
        let before = f.layout.pins(&f.mesh, &f.sch, f.parts[1]).unwrap();
        f.layout.rotate_part(&f.mesh, &f.sch, &f.params, f.parts[1], TAU).unwrap();
        let after = f.layout.pins(&f.mesh, &f.sch, f.parts[1]).unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((f.mesh.point(a) - f.mesh.point(b)).norm() < 1e-6);
        }
    }

    #[test]
    fn waypoint_add_delete_is_inverse() {
        let mut f = chain();
        let e = f.sch.nets[0].edges[0].id;
        let len0 = f.layout.traces[&e].length();
        let wp = on_plane(&f.mesh, 38.0, 70.0);
        let i = f.layout.add_waypoint(&f.mesh, &f.sch, &f.params, e, wp, None).unwrap();
        assert_eq!(i, 0);
        assert_eq!(f.layout.traces[&e].segments.len(), 2);
        assert!(f.layout.traces[&e].length() > len0);
        f.layout.delete_waypoint(&f.mesh, &f.sch, &f.params, e, 0).unwrap();
        assert!((f.layout.traces[&e].length() - len0).abs() <= 1e-6 * len0);
        assert!(f.layout.waypoints.is_empty());
        assert!(matches!(
            f.layout.delete_waypoint(&f.mesh, &f.sch, &f.params, e, 0),
            Err(LayoutError::WaypointIndex { .. })
        ));
    }

    #[test]
    fn waypoint_on_trace_barely_changes_length() {
        let mut f = chain();
        let e = f.sch.nets[0].edges[0].id;
        let t = f.layout.traces[&e].clone();
        let mid = t.sample_at_fraction(&f.mesh, 0.5).unwrap();
        f.layout.add_waypoint(&f.mesh, &f.sch, &f.params, e, mid, None).unwrap();
        let rel = (f.layout.traces[&e].length() - t.length()).abs() / t.length();
        assert!(rel < 0.01, "{rel}");
    }

    #[test]
    fn sync_forgets_removed_parts() {
        let mut f = chain();
        f.sch.remove_part(f.parts[0]).unwrap();
        f.layout.sync(&f.mesh, &f.sch, &f.params).unwrap();
        assert_eq!(f.layout.placements.len(), 2);
        assert_eq!(f.layout.traces.len(), 1);
        assert!(f.layout.is_complete(&f.sch));
    }

    #[test]
    fn antipodal_edge_fails_then_waypoint_fixes_it() {
        let r = 50.0;
        let mesh = shapes::icosphere(r, 3);
        let mut sch = Schematic::new();
        let a = sch.add_part("TP1", one_pin(), [0.0, 0.0]).unwrap();
        let b = sch.add_part("TP2", one_pin(), [0.0, 0.0]).unwrap();
        let (_, e) = sch.add_net("N", Terminal::pin(a, 0), Terminal::pin(b, 0)).unwrap();
        let params = RoutingParams::default();
        let mut layout = Layout::new();
        let north = vertex_point(&mesh, &Vec3::new(0.0, 0.0, r));
        let south = vertex_point(&mesh, &Vec3::new(0.0, 0.0, -r));
        layout.place_part(&mesh, &sch, &params, a, north, 0.0).unwrap();
        layout.place_part(&mesh, &sch, &params, b, south, 0.0).unwrap();
        assert!(matches!(layout.traces[&e].segments[0].status, TraceStatus::Failed { .. }));
        let eq = mesh.closest_point(&Vec3::new(r, 0.0, 0.0));
        layout.add_waypoint(&mesh, &sch, &params, e, eq, None).unwrap();
        assert!(layout.traces[&e].is_routed());
        assert_eq!(layout.traces[&e].segments.len(), 2);
    }

    fn one_pin() -> crate::schematic::PartDef {
        crate::schematic::PartDef {
            name: "TP".into(),
            pins: vec![crate::schematic::PinDef {
                name: "1".into(),
                role: crate::schematic::PinRole::Signal,
            }],
            footprint: Footprint {
                pads: vec![[0.0, 0.0]],
                drill: 1.0,
            },
        }
    }

    fn vertex_point(m: &TriMesh, p: &Vec3) -> SurfacePoint {
        let v = (0..m.vertex_count())
            .min_by(|&a, &b| (m.vertices()[a] - p).norm().total_cmp(&(m.vertices()[b] - p).norm()))
            .unwrap();
        let f = m.vertex_faces(v)[0];
        let mut bary = [0.0; 3];
        bary[m.faces()[f].iter().position(|&x| x == v).unwrap()] = 1.0;
        SurfacePoint::new(f, bary)
    }

    #[test]
    fn layout_serde_round_trip() {
        let f = chain();
        let json = serde_json::to_string(&f.layout).unwrap();
        let back: Layout = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f.layout);
    }
}
