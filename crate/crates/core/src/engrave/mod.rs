//! Print preparation: V-channels carved along traces, pin holes, and printability checks.

mod channels;
mod drill;
mod printable;
mod refine;
mod segments;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::channels::engrave_channels;
pub use self::drill::{drill_holes, drill_holes_at, Hole, RIM_SEGMENTS};
pub use self::printable::{validate_faces, validate_printable, PrintReport};
use crate::geom::Vec3;
use crate::mesh::{MeshError, TriMesh};
use crate::schematic::library::PITCH;

/// Channel and hole dimensions in mm.
///
/// The defaults fit 1.5 mm copper tape and 1.6 mm copper tube with a little FDM clearance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelProfile {
    pub channel_width: f64,
    pub channel_depth: f64,
    pub hole_diameter: f64,
    /// Blind-hole depth; holes become through-holes where the part is thinner.
    pub hole_depth: f64,
    /// Guard band beyond the channel lip that is refined but never displaced.
    pub falloff_width: f64,
}

impl Default for ChannelProfile {
    fn default() -> Self {
        ChannelProfile {
            channel_width: 1.7,
            channel_depth: 1.0,
            hole_diameter: 1.7,
            hole_depth: 4.0,
            falloff_width: 0.5,
        }
    }
}

impl ChannelProfile {
    pub fn validate(&self) -> Result<(), EngraveError> {
        let fields = [
            ("channel_width", self.channel_width),
            ("channel_depth", self.channel_depth),
            ("hole_diameter", self.hole_diameter),
            ("hole_depth", self.hole_depth),
            ("falloff_width", self.falloff_width),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EngraveError::InvalidProfile(format!("{name} must be positive, got {v}")));
            }
        }
        if self.channel_width >= PITCH {
            return Err(EngraveError::InvalidProfile(format!(
                "channel_width {} must stay below the {PITCH} mm pitch",
                self.channel_width
            )));
        }
        if self.hole_diameter >= PITCH {
            return Err(EngraveError::InvalidProfile(format!(
                "hole_diameter {} must stay below the {PITCH} mm pitch",
                self.hole_diameter
            )));
        }
        Ok(())
    }

    /// Channel depth at distance `d` from the trace centerline.
    pub fn depth_at(&self, d: f64) -> f64 {
        let half = self.channel_width / 2.0;
        if d < half {
            self.channel_depth * (1.0 - d / half)
        } else {
            0.0
        }
    }

    /// Distance beyond which the mesh is left untouched.
    pub fn reach(&self) -> f64 {
        self.channel_width / 2.0 + self.falloff_width
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngraveError {
    #[error("invalid channel profile: {0}")]
    InvalidProfile(String),
    #[error("trace {0} is not routed")]
    NotRouted(usize),
    #[error("displacement creates {count} self-intersecting face pairs; reduce the channel depth")]
    SelfIntersection { count: usize },
    #[error("holes {a} and {b} are closer than the hole diameter")]
    HolesTooClose { a: usize, b: usize },
    #[error("refinement did not converge")]
    RefinementBudget,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub trace: usize,
    pub max_depth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum HoleOutcome {
    Blind,
    Through,
    Failed { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoleReport {
    pub hole: usize,
    pub center: Vec3,
    #[serde(flatten)]
    pub outcome: HoleOutcome,
}

#[derive(Clone, Debug)]
pub struct EngraveResult {
    pub mesh: TriMesh,
    pub displaced_vertex_count: usize,
    pub traces: Vec<TraceReport>,
    pub holes: Vec<HoleReport>,
}

impl EngraveResult {
    fn identity(mesh: &TriMesh) -> Self {
        EngraveResult {
            mesh: mesh.clone(),
            displaced_vertex_count: 0,
            traces: Vec::new(),
            holes: Vec::new(),
        }
    }

    pub fn failed_holes(&self) -> impl Iterator<Item = &HoleReport> {
        self.holes.iter().filter(|h| matches!(h.outcome, HoleOutcome::Failed { .. }))
    }
}
