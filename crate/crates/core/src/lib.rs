//! Conductive traces on the surface of 3D-printable objects.
//!
//! The pipeline runs from a closed triangle mesh and a schematic to a printable mesh:
//!
//! * [`routing`] traces a geodesic-like curve between two surface points,
//! * [`schematic`] holds parts and nets, each net a spanning tree of terminals,
//! * [`layout`] places footprints on the surface and keeps one trace per net edge,
//! * [`engrave`] carves channels for copper tape and drills pin holes,
//! * [`electrical`] estimates trace resistance and voltage drop,
//! * [`document`] applies edits atomically and reads and writes design files.
//!
//! All lengths are millimeters.

pub mod document;
pub mod electrical;
pub mod engrave;
pub mod fixtures;
pub mod geom;
pub mod layout;
pub mod mesh;
pub mod routing;
pub mod schematic;

pub use document::{DesignFile, Document, DocumentError, EditOp, EditOutcome};
pub use engrave::{ChannelProfile, EngraveError, EngraveResult, PrintReport};
pub use geom::Vec3;
pub use layout::{EdgeTrace, Layout, LayoutError, PartPlacement};
pub use mesh::{MeshError, NormalMode, SurfacePoint, TangentVector, TriMesh};
pub use routing::{route_trace, FailureReason, RoutingError, RoutingParams, SurfacePolyline, TraceStatus};
pub use schematic::{EdgeId, JunctionId, NetId, PartDef, PartId, Schematic, SchematicError, Terminal};
