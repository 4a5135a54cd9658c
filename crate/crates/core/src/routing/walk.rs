//! Straight-ahead walking over a triangle mesh with discrete parallel transport.

use thiserror::Error;

use crate::geom::{rotate_about, Vec3};
use crate::mesh::{SurfacePoint, TangentVector, TriMesh};

/// Crossing points are kept at least this far (mm) from edge endpoints.
const VERTEX_NUDGE: f64 = 1e-6;
const MAX_CROSSINGS: usize = 1_000_000;
/// Barycentric weight below which a start point counts as lying on a face border.
const BORDER_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("walk reached an open boundary after {traveled} mm")]
    BoundaryHit { traveled: f64, at: SurfacePoint },
    #[error("walk direction is not a unit vector in the start face")]
    InvalidDirection,
    #[error("walk distance must be positive")]
    InvalidDistance,
    #[error("walk exceeded the crossing budget")]
    Stuck,
}

/// Result of a walk: the end point, the transported direction, and every edge crossing on
/// the way (each expressed in the face being entered).
#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    pub end: SurfacePoint,
    pub dir: TangentVector,
    pub crossings: Vec<SurfacePoint>,
}

/// Result of [`walk_toward`]: the crossings taken before reaching a face holding the target.
pub(crate) struct Approach {
    pub crossings: Vec<SurfacePoint>,
    pub face: usize,
}

/// Walks `distance` mm from `start` along `dir`, rotating the direction about each crossed
/// edge by the dihedral angle.
pub fn walk_on_surface(
    mesh: &TriMesh,
    start: &SurfacePoint,
    dir: &TangentVector,
    distance: f64,
) -> Result<Walk, WalkError> {
    if !(distance > 0.0) {
        return Err(WalkError::InvalidDistance);
    }
    check_direction(mesh, start, dir)?;
    let mut walker = Walker::new(mesh, start, dir.dir);
    let mut crossings = Vec::new();
    let mut remaining = distance;
    loop {
        match walker.advance(remaining)? {
            Step::Arrived => break,
            Step::Crossed(t) => {
                remaining -= t;
                crossings.push(walker.point());
            }
        }
    }
    Ok(Walk {
        end: walker.point(),
        dir: TangentVector {
            face: walker.face,
            dir: walker.dir,
        },
        crossings,
    })
}

/// Walks from `start` along `dir` until the walker stands in a face that holds `target`
/// (in its interior or on its border), giving up after `max_distance`.
pub(crate) fn walk_toward(
    mesh: &TriMesh,
    start: &SurfacePoint,
    dir: &TangentVector,
    target: &SurfacePoint,
    max_distance: f64,
) -> Option<Approach> {
    let holds = |face: usize| face == target.face || mesh.transfer(target, face).is_some();
    if holds(start.face) {
        return Some(Approach {
            crossings: Vec::new(),
            face: start.face,
        });
    }
    check_direction(mesh, start, dir).ok()?;
    let mut walker = Walker::new(mesh, start, dir.dir);
    let mut crossings = Vec::new();
    let mut remaining = max_distance;
    while remaining > 0.0 {
        match walker.advance(remaining).ok()? {
            Step::Arrived => return None,
            Step::Crossed(t) => {
                remaining -= t;
                crossings.push(walker.point());
                if holds(walker.face) {
                    return Some(Approach {
                        crossings,
                        face: walker.face,
                    });
                }
            }
        }
    }
    None
}

fn check_direction(mesh: &TriMesh, start: &SurfacePoint, dir: &TangentVector) -> Result<(), WalkError> {
    if dir.face != start.face
        || (dir.dir.norm() - 1.0).abs() > 1e-6
        || dir.dir.dot(&mesh.face_normal(start.face)).abs() > 1e-6
    {
        return Err(WalkError::InvalidDirection);
    }
    Ok(())
}

/// Rate of change of each barycentric coordinate per mm traveled along `dir` in face `f`.
fn bary_rates(mesh: &TriMesh, f: usize, dir: &Vec3) -> [f64; 3] {
    let c = mesh.corners(f);
    let n = mesh.face_normal(f);
    let area2 = 2.0 * mesh.face_area(f);
    std::array::from_fn(|i| n.cross(&(c[(i + 2) % 3] - c[(i + 1) % 3])).dot(dir) / area2)
}

fn points_inward(bary: &[f64; 3], rate: &[f64; 3]) -> bool {
    (0..3).all(|i| bary[i] > BORDER_EPS || rate[i] >= -1e-12)
}

/// A start point on a vertex or edge whose direction leaves its face is moved, exactly, to
/// the incident face the direction enters; the direction is projected into that face.
fn leave_border(mesh: &TriMesh, start: &SurfacePoint, dir: Vec3) -> (SurfacePoint, Vec3) {
    if points_inward(&start.bary, &bary_rates(mesh, start.face, &dir)) {
        return (*start, dir);
    }
    let f = mesh.faces()[start.face];
    let candidates: Vec<usize> = match (0..3).find(|&i| start.bary[i] >= 1.0 - BORDER_EPS) {
        Some(i) => mesh.vertex_faces(f[i]).to_vec(),
        None => (0..3)
            .filter(|&i| start.bary[(i + 2) % 3] <= BORDER_EPS)
            .filter_map(|i| mesh.neighbor(start.face, i))
            .collect(),
    };
    let mut best: Option<(f64, SurfacePoint, Vec3)> = None;
    for g in candidates {
        let Some(p) = mesh.transfer(start, g) else { continue };
        let ng = mesh.face_normal(g);
        let d = dir - ng * ng.dot(&dir);
        if d.norm() < 1e-9 {
            continue;
        }
        let d = d.normalize();
        if !points_inward(&p.bary, &bary_rates(mesh, g, &d)) {
            continue;
        }
        let deviation = (d - dir).norm();
        if best.as_ref().is_none_or(|(b, _, _)| deviation < *b) {
            best = Some((deviation, p, d));
        }
    }
    match best {
        Some((_, p, d)) => (p, d),
        None => (*start, dir),
    }
}

enum Step {
    Arrived,
    Crossed(f64),
}

struct Walker<'m> {
    mesh: &'m TriMesh,
    face: usize,
    bary: [f64; 3],
    dir: Vec3,
    // barycentric slot that is zero because we just entered through that edge
    entry: Option<usize>,
    traveled: f64,
    crossings: usize,
}

impl<'m> Walker<'m> {
    fn new(mesh: &'m TriMesh, start: &SurfacePoint, dir: Vec3) -> Self {
        let (start, dir) = leave_border(mesh, &start.normalized(), dir);
        Walker {
            mesh,
            face: start.face,
            bary: start.bary,
            dir,
            entry: None,
            traveled: 0.0,
            crossings: 0,
        }
    }

    fn point(&self) -> SurfacePoint {
        SurfacePoint::new(self.face, self.bary)
    }

    /// Moves up to `limit` mm inside the current face, crossing into the next face if the
    /// border comes first.
    fn advance(&mut self, limit: f64) -> Result<Step, WalkError> {
        self.crossings += 1;
        if self.crossings > MAX_CROSSINGS {
            return Err(WalkError::Stuck);
        }
        let mesh = self.mesh;
        let f = self.face;
        let c = mesh.corners(f);
        let n = mesh.face_normal(f);
        let rate = bary_rates(mesh, f, &self.dir);

        let mut exit: Option<(usize, f64)> = None;
        for i in 0..3 {
            if rate[i] >= 0.0 || Some(i) == self.entry {
                continue;
            }
            let t = (self.bary[i].max(0.0) / -rate[i]).max(0.0);
            exit = match exit {
                Some((k, tk)) if tk < t - 1e-15 || ((tk - t).abs() <= 1e-15 && rate[k] <= rate[i]) => Some((k, tk)),
                _ => Some((i, t)),
            };
        }

        match exit {
            Some((k, t)) if t < limit => {
                for i in 0..3 {
                    self.bary[i] += rate[i] * t;
                }
                self.bary[k] = 0.0;
                self.traveled += t;
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                self.settle_on_edge(a, b, &c);
                let edge = a;
                let va = mesh.faces()[f][a];
                let vb = mesh.faces()[f][b];
                let Some(g) = mesh.neighbor(f, edge) else {
                    return Err(WalkError::BoundaryHit {
                        traveled: self.traveled,
                        at: self.point(),
                    });
                };
                let axis = (mesh.vertices()[vb] - mesh.vertices()[va]).normalize();
                let ng = mesh.face_normal(g);
                let angle = n.cross(&ng).dot(&axis).atan2(n.dot(&ng));
                let d = rotate_about(&self.dir, &axis, angle);
                let d = d - ng * ng.dot(&d);
                self.dir = d.normalize();

                let gf = mesh.faces()[g];
                let mut bary = [0.0; 3];
                for (j, &v) in gf.iter().enumerate() {
                    if v == va {
                        bary[j] = self.bary[a];
                    } else if v == vb {
                        bary[j] = self.bary[b];
                    } else {
                        self.entry = Some(j);
                    }
                }
                self.face = g;
                self.bary = bary;
                Ok(Step::Crossed(t))
            }
            _ => {
                for i in 0..3 {
                    self.bary[i] += rate[i] * limit;
                }
                self.bary = SurfacePoint::new(f, self.bary).normalized().bary;
                self.traveled += limit;
                self.entry = None;
                Ok(Step::Arrived)
            }
        }
    }

    /// Renormalizes a point on edge `(a, b)` and keeps it off the edge endpoints.
    fn settle_on_edge(&mut self, a: usize, b: usize, c: &[Vec3; 3]) {
        let wa = self.bary[a].max(0.0);
        let wb = self.bary[b].max(0.0);
        let s = wa + wb;
        let (mut wa, mut wb) = if s > 0.0 { (wa / s, wb / s) } else { (0.5, 0.5) };
        let len = (c[b] - c[a]).norm();
        let min_w = (VERTEX_NUDGE / len).min(0.5);
        if wa < min_w {
            wa = min_w;
            wb = 1.0 - min_w;
        } else if wb < min_w {
            wb = min_w;
            wa = 1.0 - min_w;
        }
        self.bary = [0.0; 3];
        self.bary[a] = wa;
        self.bary[b] = wb;
    }
}
