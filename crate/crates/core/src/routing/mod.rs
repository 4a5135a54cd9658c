//! Surface traces between two endpoints.
//!
//! [`route_trace`] advances one front from each endpoint toward the other. Each front moves
//! along the tangent-plane projection of the chord to the other front, walking over the mesh
//! with [`walk_on_surface`], until the fronts are within `meet_tolerance` of each other.
//! The walk is exact on planes and follows great circles on spheres; it fails when the chord
//! becomes parallel to the surface normal, e.g. for antipodal points on a sphere.

pub(crate) mod distance;
mod oracle;
mod walk;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::distance::{polyline_closest, polyline_min_distance, ClosestPair};
pub use self::oracle::geodesic_oracle;
pub use self::walk::{walk_on_surface, Walk, WalkError};
use self::walk::walk_toward;
use crate::geom::Vec3;
use crate::mesh::{MeshError, NormalMode, SurfacePoint, TriMesh, DEFAULT_DEGENERACY_THRESHOLD};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoutingParams {
    /// Distance each front travels per iteration (mm).
    pub step_length: f64,
    pub max_steps: usize,
    /// Chord distance (mm) at which the two fronts are joined.
    pub meet_tolerance: f64,
    /// Relative tangential norm below which the march direction counts as degenerate.
    pub degeneracy_threshold: f64,
    pub normal_mode: NormalMode,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            step_length: 1.0,
            max_steps: 10_000,
            meet_tolerance: 1.0,
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
            normal_mode: NormalMode::Vertex,
        }
    }
}

impl RoutingParams {
    pub fn validate(&self) -> Result<(), RoutingError> {
        let ok = self.step_length > 0.0
            && self.max_steps > 0
            && self.meet_tolerance > 0.0
            && self.degeneracy_threshold > 0.0
            && self.step_length.is_finite()
            && self.meet_tolerance.is_finite();
        if ok {
            Ok(())
        } else {
            Err(RoutingError::InvalidParams)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("routing parameters must be strictly positive")]
    InvalidParams,
    #[error("invalid surface point: {0}")]
    InvalidPoint(#[from] MeshError),
    #[error("endpoints lie on disconnected parts of the mesh")]
    Disconnected,
    #[error("polyline has no samples")]
    EmptyPolyline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The chord between the fronts became parallel to the normal at one of them.
    DegenerateDirection,
    /// `max_steps` iterations without the fronts meeting.
    MaxSteps,
    /// A front walked onto an open boundary edge.
    Boundary,
    /// The fronts met but no in-face connection between them was found.
    Join,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TraceStatus {
    Routed,
    Failed {
        from: SurfacePoint,
        to: SurfacePoint,
        reason: FailureReason,
    },
}

/// An ordered chain of surface points; consecutive samples share a face, so the straight
/// segment between them lies on the surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePolyline {
    pub samples: Vec<SurfacePoint>,
    pub length: f64,
    #[serde(flatten)]
    pub status: TraceStatus,
}

impl SurfacePolyline {
    pub fn routed(mesh: &TriMesh, samples: Vec<SurfacePoint>) -> Self {
        let length = polyline_length(mesh, &samples);
        SurfacePolyline {
            samples,
            length,
            status: TraceStatus::Routed,
        }
    }

    pub fn failed(from: SurfacePoint, to: SurfacePoint, reason: FailureReason) -> Self {
        SurfacePolyline {
            samples: Vec::new(),
            length: 0.0,
            status: TraceStatus::Failed { from, to, reason },
        }
    }

    pub fn is_routed(&self) -> bool {
        matches!(self.status, TraceStatus::Routed)
    }

    pub fn positions(&self, mesh: &TriMesh) -> Vec<Vec3> {
        self.samples.iter().map(|s| mesh.point(s)).collect()
    }

    /// Sample positions with consecutive duplicates removed.
    pub(crate) fn distinct_positions(&self, mesh: &TriMesh) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = Vec::with_capacity(self.samples.len());
        for p in self.positions(mesh) {
            if out.last().is_none_or(|q| (q - p).norm() > 0.0) {
                out.push(p);
            }
        }
        out
    }

    pub fn first(&self) -> Option<&SurfacePoint> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&SurfacePoint> {
        self.samples.last()
    }
}

pub(crate) fn polyline_length(mesh: &TriMesh, samples: &[SurfacePoint]) -> f64 {
    samples
        .windows(2)
        .map(|w| (mesh.point(&w[1]) - mesh.point(&w[0])).norm())
        .sum()
}

/// Routes a trace from `p0` to `q0`.
///
/// Failures are reported through [`TraceStatus::Failed`]; `Err` is reserved for invalid
/// inputs.
pub fn route_trace(
    mesh: &TriMesh,
    p0: &SurfacePoint,
    q0: &SurfacePoint,
    params: &RoutingParams,
) -> Result<SurfacePolyline, RoutingError> {
    params.validate()?;
    for p in [p0, q0] {
        if !mesh.contains(p) {
            return Err(MeshError::InvalidFaceIndex(p.face).into());
        }
    }
    let fail = |reason| Ok(SurfacePolyline::failed(*p0, *q0, reason));

    let start_p = mesh.point(p0);
    let start_q = mesh.point(q0);
    if (start_p - start_q).norm() == 0.0 {
        return Ok(SurfacePolyline::routed(mesh, vec![*p0]));
    }

    let mut p_side = vec![*p0];
    let mut q_side = vec![*q0];
    let mut p = *p0;
    let mut q = *q0;
    for _ in 0..params.max_steps {
        let pp = mesh.point(&p);
        let pq = mesh.point(&q);
        let chord = (pp - pq).norm();
        if chord <= params.meet_tolerance {
            let Some(join) = join_fronts(mesh, &p, &q, chord, params) else {
                return fail(FailureReason::Join);
            };
            let mut samples = p_side;
            samples.extend(join);
            samples.extend(q_side.into_iter().rev());
            dedup_samples(mesh, &mut samples);
            return Ok(SurfacePolyline::routed(mesh, samples));
        }

        let project = |at: &SurfacePoint, toward: &Vec3| {
            mesh.project_to_tangent_with(at, toward, params.normal_mode, params.degeneracy_threshold)
        };
        let (Ok(tp), Ok(tq)) = (project(&p, &pq), project(&q, &pp)) else {
            return fail(FailureReason::DegenerateDirection);
        };
        // never let the fronts overshoot each other
        let step = params.step_length.min(0.5 * chord);
        let (wp, wq) = match (walk_on_surface(mesh, &p, &tp, step), walk_on_surface(mesh, &q, &tq, step)) {
            (Ok(wp), Ok(wq)) => (wp, wq),
            (Err(WalkError::BoundaryHit { .. }), _) | (_, Err(WalkError::BoundaryHit { .. })) => {
                return fail(FailureReason::Boundary)
            }
            _ => return fail(FailureReason::DegenerateDirection),
        };
        p_side.extend(wp.crossings);
        p_side.push(wp.end);
        q_side.extend(wq.crossings);
        q_side.push(wq.end);
        p = wp.end;
        q = wq.end;
    }
    fail(FailureReason::MaxSteps)
}

/// The points strictly between `p` and `q` on the shorter of the two in-face joins.
fn join_fronts(
    mesh: &TriMesh,
    p: &SurfacePoint,
    q: &SurfacePoint,
    chord: f64,
    params: &RoutingParams,
) -> Option<Vec<SurfacePoint>> {
    let reach = 2.0 * chord + params.step_length;
    let attempt = |from: &SurfacePoint, to: &SurfacePoint| -> Option<Vec<SurfacePoint>> {
        let approach = if to.face == from.face || mesh.transfer(to, from.face).is_some() {
            walk::Approach {
                crossings: Vec::new(),
                face: from.face,
            }
        } else {
            let target = mesh.point(to);
            let dir = mesh
                .project_to_tangent_with(from, &target, NormalMode::Face, params.degeneracy_threshold)
                .ok()?;
            walk_toward(mesh, from, &dir, to, reach)?
        };
        let mut pts = approach.crossings;
        if to.face != approach.face {
            // keep the final sample in the face the connector runs through
            pts.push(mesh.transfer(to, approach.face)?);
        }
        Some(pts)
    };
    let length = |from: &SurfacePoint, pts: &[SurfacePoint], to: &SurfacePoint| {
        let mut all = vec![*from];
        all.extend_from_slice(pts);
        all.push(*to);
        polyline_length(mesh, &all)
    };
    let forward = attempt(p, q);
    let backward = attempt(q, p).map(|mut pts| {
        pts.reverse();
        pts
    });
    match (forward, backward) {
        (Some(a), Some(b)) => {
            if length(p, &a, q) <= length(p, &b, q) {
                Some(a)
            } else {
                Some(b)
            }
        }
        (a, b) => a.or(b),
    }
}

fn dedup_samples(mesh: &TriMesh, samples: &mut Vec<SurfacePoint>) {
    let mut out: Vec<SurfacePoint> = Vec::with_capacity(samples.len());
    for s in samples.drain(..) {
        match out.last() {
            Some(prev) if (mesh.point(prev) - mesh.point(&s)).norm() == 0.0 => {
                if prev.face != s.face {
                    // same location, different face: keep both so faces stay chained
                    out.push(s);
                }
            }
            _ => out.push(s),
        }
    }
    *samples = out;
}
