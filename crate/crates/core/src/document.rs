//! Design files and the edit operations that change them.
//!
//! Every edit goes through [`Document::apply`], which either commits the whole change and
//! reports the edges it re-routed, or leaves the document untouched.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engrave::{drill_holes_at, engrave_channels, ChannelProfile, EngraveError, EngraveResult, Hole};
use crate::geom::Vec3;
use crate::layout::{Layout, LayoutError};
use crate::mesh::{NormalMode, SurfacePoint, TriMesh};
use crate::routing::{RoutingParams, SurfacePolyline};
use crate::schematic::{library, EdgeId, JunctionId, NetId, PartDef, PartId, Schematic, SchematicError, Terminal};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error(transparent)]
    Schematic(#[from] SchematicError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("unknown library part {0:?}")]
    UnknownLibraryPart(String),
    #[error("unsupported design file version {0}")]
    Version(u32),
    #[error("design expects a mesh with {expected_vertices} vertices and {expected_faces} faces, got {vertices} and {faces}")]
    MeshMismatch {
        expected_vertices: usize,
        expected_faces: usize,
        vertices: usize,
        faces: usize,
    },
    #[error("design file refers to {0}, which does not exist")]
    Dangling(String),
    #[error(transparent)]
    Engrave(#[from] EngraveError),
    #[error("invalid design file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Vertex and face counts of the mesh a design was laid out on. Surface points index its
/// faces, so a design is only meaningful against a mesh with the same counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshCounts {
    pub vertices: usize,
    pub faces: usize,
}

impl MeshCounts {
    pub fn of(mesh: &TriMesh) -> Self {
        MeshCounts {
            vertices: mesh.vertex_count(),
            faces: mesh.face_count(),
        }
    }

    pub fn check(&self, mesh: &TriMesh) -> Result<(), DocumentError> {
        if *self == MeshCounts::of(mesh) {
            Ok(())
        } else {
            Err(DocumentError::MeshMismatch {
                expected_vertices: self.vertices,
                expected_faces: self.faces,
                vertices: mesh.vertex_count(),
                faces: mesh.face_count(),
            })
        }
    }
}

/// A part given by library name or spelled out in full.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartSpec {
    Library(String),
    Custom(PartDef),
}

impl PartSpec {
    pub fn resolve(&self) -> Result<PartDef, DocumentError> {
        match self {
            PartSpec::Library(name) => library::by_name(name).ok_or_else(|| DocumentError::UnknownLibraryPart(name.clone())),
            PartSpec::Custom(def) => Ok(def.clone()),
        }
    }
}

/// One user edit. Serialized with an `"op"` tag, e.g. `{"op": "rotate_part", "part": 3,
/// "angle": 1.57}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    AddPart {
        reference: String,
        part: PartSpec,
        #[serde(default)]
        position: [f64; 2],
    },
    RemovePart {
        part: PartId,
    },
    PlacePart {
        part: PartId,
        anchor: SurfacePoint,
        #[serde(default)]
        rotation: f64,
    },
    DragPart {
        part: PartId,
        anchor: SurfacePoint,
    },
    /// Relative rotation in radians.
    RotatePart {
        part: PartId,
        angle: f64,
    },
    MoveSymbol {
        part: PartId,
        position: [f64; 2],
    },
    AddNet {
        name: String,
        a: Terminal,
        b: Terminal,
    },
    Connect {
        net: NetId,
        pin: Terminal,
        to: Terminal,
    },
    RenameNet {
        net: NetId,
        name: String,
    },
    /// Splits `edge` with a new junction. Without `point` the junction goes halfway along
    /// the edge's trace.
    AddJunction {
        net: NetId,
        edge: EdgeId,
        #[serde(default)]
        position: [f64; 2],
        #[serde(default)]
        point: Option<SurfacePoint>,
    },
    DeleteJunction {
        net: NetId,
        junction: JunctionId,
    },
    MoveJunction {
        junction: JunctionId,
        point: SurfacePoint,
    },
    Reconnect {
        net: NetId,
        remove: EdgeId,
        a: Terminal,
        b: Terminal,
    },
    AddWaypoint {
        edge: EdgeId,
        point: SurfacePoint,
        #[serde(default)]
        index: Option<usize>,
    },
    DeleteWaypoint {
        edge: EdgeId,
        index: usize,
    },
    SetClearance {
        clearance: f64,
    },
    RouteAll,
}

/// What an edit changed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EditOutcome {
    pub rerouted: Vec<EdgeId>,
    pub removed: Vec<EdgeId>,
    pub added: Vec<EdgeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<PartId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<NetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junction: Option<JunctionId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoint: Option<usize>,
}

/// The on-disk design: schematic, layout, print settings and the edit log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub version: u32,
    /// Path of the mesh file, as given when the design was created.
    #[serde(default)]
    pub mesh_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_counts: Option<MeshCounts>,
    pub schematic: Schematic,
    pub layout: Layout,
    #[serde(default)]
    pub profile: ChannelProfile,
    #[serde(default)]
    pub params: RoutingParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<EditOp>,
}

impl DesignFile {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let d: DesignFile = serde_json::from_str(text)?;
        if d.version != FORMAT_VERSION {
            return Err(DocumentError::Version(d.version));
        }
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub design: DesignFile,
}

impl Document {
    pub fn new(mesh: &TriMesh) -> Self {
        Document {
            design: DesignFile {
                version: FORMAT_VERSION,
                mesh_ref: String::new(),
                mesh_counts: Some(MeshCounts::of(mesh)),
                schematic: Schematic::new(),
                layout: Layout::new(),
                profile: ChannelProfile::default(),
                params: RoutingParams::default(),
                history: Vec::new(),
            },
        }
    }

    /// Opens a design against `mesh`, checking the mesh matches.
    pub fn open(mesh: &TriMesh, design: DesignFile) -> Result<Self, DocumentError> {
        if let Some(c) = &design.mesh_counts {
            c.check(mesh)?;
        }
        design.schematic.validate()?;
        check_references(mesh, &design)?;
        Ok(Document { design })
    }

    pub fn schematic(&self) -> &Schematic {
        &self.design.schematic
    }

    pub fn layout(&self) -> &Layout {
        &self.design.layout
    }

    /// Rebuilds a document by applying `ops` to an empty design with the same settings.
    pub fn replay(mesh: &TriMesh, template: &DesignFile, ops: &[EditOp]) -> Result<Self, DocumentError> {
        let mut doc = Document::new(mesh);
        doc.design.mesh_ref = template.mesh_ref.clone();
        doc.design.mesh_counts = template.mesh_counts;
        doc.design.profile = template.profile.clone();
        doc.design.params = template.params.clone();
        for op in ops {
            doc.apply(mesh, op.clone())?;
        }
        Ok(doc)
    }

    /// Applies one edit atomically and appends it to the history.
    pub fn apply(&mut self, mesh: &TriMesh, op: EditOp) -> Result<EditOutcome, DocumentError> {
        let mut sch = self.design.schematic.clone();
        let mut layout = self.design.layout.clone();
        let params = &self.design.params;
        let before: BTreeSet<EdgeId> = sch.edges().map(|(_, e)| e.id).collect();
        let mut out = EditOutcome::default();
        let mut rerouted = Vec::new();
        match &op {
            EditOp::AddPart {
                reference,
                part,
                position,
            } => {
                out.part = Some(sch.add_part(reference, part.resolve()?, *position)?);
            }
            EditOp::RemovePart { part } => sch.remove_part(*part)?,
            EditOp::PlacePart { part, anchor, rotation } => {
                rerouted = layout.place_part(mesh, &sch, params, *part, *anchor, *rotation)?;
            }
            EditOp::DragPart { part, anchor } => {
                rerouted = layout.drag_part(mesh, &sch, params, *part, *anchor)?;
            }
            EditOp::RotatePart { part, angle } => {
                rerouted = layout.rotate_part(mesh, &sch, params, *part, *angle)?;
            }
            EditOp::MoveSymbol { part, position } => sch.move_symbol(*part, *position)?,
            EditOp::AddNet { name, a, b } => {
                out.net = Some(sch.add_net(name, *a, *b)?.0);
            }
            EditOp::Connect { net, pin, to } => {
                sch.connect(*net, *pin, *to)?;
            }
            EditOp::RenameNet { net, name } => sch.rename_net(*net, name)?,
            EditOp::AddJunction {
                net,
                edge,
                position,
                point,
            } => {
                let point = match point {
                    Some(p) => *p,
                    None => default_junction_point(mesh, &sch, &layout, *edge)?,
                };
                mesh.embed(&point).map_err(LayoutError::from)?;
                let (j, _) = sch.add_junction(*net, *edge, *position)?;
                layout.junctions.insert(j, point);
                out.junction = Some(j);
            }
            EditOp::DeleteJunction { net, junction } => {
                sch.delete_junction(*net, *junction)?;
            }
            EditOp::MoveJunction { junction, point } => {
                rerouted = layout.move_junction(mesh, &sch, params, *junction, *point)?;
            }
            EditOp::Reconnect { net, remove, a, b } => {
                sch.reconnect(*net, *remove, *a, *b)?;
            }
            EditOp::AddWaypoint { edge, point, index } => {
                out.waypoint = Some(layout.add_waypoint(mesh, &sch, params, *edge, *point, *index)?);
                rerouted.push(*edge);
            }
            EditOp::DeleteWaypoint { edge, index } => {
                layout.delete_waypoint(mesh, &sch, params, *edge, *index)?;
                rerouted.push(*edge);
            }
            EditOp::SetClearance { clearance } => {
                if !(*clearance > 0.0 && clearance.is_finite()) {
                    return Err(LayoutError::InvalidClearance.into());
                }
                layout.clearance = *clearance;
            }
            EditOp::RouteAll => {
                rerouted = layout.route_all(mesh, &sch, params)?;
            }
        }
        rerouted.extend(layout.sync(mesh, &sch, params)?);
        rerouted.sort();
        rerouted.dedup();

        let after: BTreeSet<EdgeId> = sch.edges().map(|(_, e)| e.id).collect();
        out.removed = before.difference(&after).copied().collect();
        out.added = after.difference(&before).copied().collect();
        out.rerouted = rerouted;
        self.design.schematic = sch;
        self.design.layout = layout;
        self.design.history.push(op);
        Ok(out)
    }

    /// Print geometry: a channel along every routed trace, then a hole at every pin.
    /// Failed traces are skipped, so callers refuse them first unless forced.
    pub fn engrave(&self, mesh: &TriMesh) -> Result<EngraveResult, DocumentError> {
        let (sch, layout) = (&self.design.schematic, &self.design.layout);
        let traces: Vec<SurfacePolyline> = layout
            .traces
            .values()
            .flat_map(|t| t.segments.iter())
            .filter(|s| s.is_routed())
            .cloned()
            .collect();
        let mut holes = Vec::new();
        for (_, _, p) in layout.all_pins(mesh, sch)? {
            holes.push(Hole {
                center: mesh.embed(&p).map_err(LayoutError::from)?,
                axis: mesh.normal_at(&p, NormalMode::Vertex),
            });
        }
        let profile = &self.design.profile;
        let carved = engrave_channels(mesh, &traces, profile)?;
        let drilled = drill_holes_at(&carved.mesh, &holes, profile)?;
        Ok(EngraveResult {
            holes: drilled.holes,
            mesh: drilled.mesh,
            ..carved
        })
    }
}

fn check_references(mesh: &TriMesh, d: &DesignFile) -> Result<(), DocumentError> {
    let dangling = |what: String| Err(DocumentError::Dangling(what));
    let (sch, layout) = (&d.schematic, &d.layout);
    for (id, p) in &layout.placements {
        if sch.part(*id).is_none() || p.part != *id {
            return dangling(format!("part {id}"));
        }
        if !mesh.contains(&p.anchor) {
            return dangling(format!("face {} (anchor of {id})", p.anchor.face));
        }
    }
    for (id, sp) in &layout.junctions {
        if sch.junction(*id).is_none() {
            return dangling(format!("junction {id}"));
        }
        if !mesh.contains(sp) {
            return dangling(format!("face {} (junction {id})", sp.face));
        }
    }
    for (edge, points) in &layout.waypoints {
        if sch.edge(*edge).is_none() {
            return dangling(format!("edge {edge}"));
        }
        if let Some(p) = points.iter().find(|p| !mesh.contains(p)) {
            return dangling(format!("face {} (waypoint of {edge})", p.face));
        }
    }
    for (edge, trace) in &layout.traces {
        if sch.edge(*edge).is_none() {
            return dangling(format!("edge {edge}"));
        }
        let bad = trace.segments.iter().flat_map(|s| s.samples.iter()).find(|p| !mesh.contains(p));
        if let Some(p) = bad {
            return dangling(format!("face {} (trace of {edge})", p.face));
        }
    }
    Ok(())
}

/// Halfway along the routed trace of `edge`, else the surface point nearest the midpoint
/// of its ends.
fn default_junction_point(
    mesh: &TriMesh,
    sch: &Schematic,
    layout: &Layout,
    edge: EdgeId,
) -> Result<SurfacePoint, DocumentError> {
    if let Some(p) = layout.traces.get(&edge).and_then(|t| t.sample_at_fraction(mesh, 0.5)) {
        return Ok(p);
    }
    let (_, e) = sch.edge(edge).ok_or(LayoutError::UnknownEdge(edge))?;
    let a = layout.terminal_point(mesh, sch, &e.a)?;
    let b = layout.terminal_point(mesh, sch, &e.b)?;
    let mid: Vec3 = (mesh.embed(&a).map_err(LayoutError::from)? + mesh.embed(&b).map_err(LayoutError::from)?) / 2.0;
    Ok(mesh.closest_point(&mid))
}
