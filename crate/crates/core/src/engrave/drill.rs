//! Pin holes.
//!
//! Each hole replaces the faces around its mouth with a constrained Delaunay triangulation
//! of that surface patch, with the rim polygon cut out, then adds the wall and either a
//! floor (blind hole) or the matching cut on the far side (through-hole). Holes whose
//! patches overlap are triangulated together. A hole that cannot be built cleanly is
//! reported as failed and left undrilled; the others still go through.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{ChannelProfile, EngraveError, EngraveResult, HoleOutcome, HoleReport};
use crate::geom::{any_perpendicular, ray_triangle, triangles_intersect, Aabb, Vec3};
use crate::mesh::{Bvh, MeshError, NormalMode, SurfacePoint, TriMesh};
use crate::schematic::UnionFind;

/// Sides of the polygon approximating each hole.
pub const RIM_SEGMENTS: usize = 48;

/// Faces steeper than this (cosine to the hole axis) stop the patch around a hole.
const MIN_FACING: f64 = 0.2;
/// Patch radius as a multiple of the hole radius.
const PATCH_SCALE: f64 = 1.25;
/// Patch vertices closer than this multiple of the radius to an axis are dropped.
const CLEAR_SCALE: f64 = 1.1;
/// Floors closer than this (mm) to the far side become through-holes.
const MIN_FLOOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: Vec3,
    /// Outward direction; the hole is bored along its negation.
    pub axis: Vec3,
}

/// Drills one hole per pin along the interpolated surface normal.
pub fn drill_holes(
    mesh: &TriMesh,
    pins: &[SurfacePoint],
    profile: &ChannelProfile,
) -> Result<EngraveResult, EngraveError> {
    let mut holes = Vec::with_capacity(pins.len());
    for p in pins {
        let center = mesh.embed(p)?;
        holes.push(Hole {
            center,
            axis: mesh.normal_at(p, NormalMode::Vertex),
        });
    }
    drill_holes_at(mesh, &holes, profile)
}

pub fn drill_holes_at(mesh: &TriMesh, holes: &[Hole], profile: &ChannelProfile) -> Result<EngraveResult, EngraveError> {
    profile.validate()?;
    for i in 0..holes.len() {
        for j in i + 1..holes.len() {
            if (holes[i].center - holes[j].center).norm() < profile.hole_diameter {
                return Err(EngraveError::HolesTooClose { a: i, b: j });
            }
        }
    }
    if holes.is_empty() {
        return Ok(EngraveResult::identity(mesh));
    }
    let bvh = Bvh::build(mesh.vertices(), mesh.faces());
    let r = profile.hole_diameter / 2.0;

    // Bore vertices are appended after the mesh vertices.
    let mut vertices = mesh.vertices().to_vec();
    let mut failed: BTreeMap<usize, String> = BTreeMap::new();
    let mut bores: Vec<Option<Bore>> = Vec::with_capacity(holes.len());
    for (i, h) in holes.iter().enumerate() {
        match survey(mesh, &bvh, h, r, profile.hole_depth, &mut vertices) {
            Ok(b) => bores.push(Some(b)),
            Err(reason) => {
                failed.insert(i, reason);
                bores.push(None);
            }
        }
    }
    let closed = mesh.is_closed();

    let out = loop {
        let patches: Vec<(usize, &Patch)> = bores
            .iter()
            .enumerate()
            .filter(|(i, _)| !failed.contains_key(i))
            .filter_map(|(i, b)| b.as_ref().map(|b| (i, b)))
            .flat_map(|(i, b)| b.patches.iter().map(move |p| (i, p)))
            .collect();
        if patches.is_empty() {
            break None;
        }
        let groups = group_patches(&patches);

        let mut retry = false;
        let mut group_faces = Vec::with_capacity(groups.len());
        for g in &groups {
            let members: Vec<&Patch> = g.iter().map(|&k| patches[k].1).collect();
            match triangulate(mesh, &members, &vertices, r) {
                Ok(faces) => group_faces.push(faces),
                Err(reason) => {
                    for &k in g {
                        failed.entry(patches[k].0).or_insert_with(|| reason.clone());
                    }
                    retry = true;
                }
            }
        }
        if retry {
            continue;
        }

        // Assemble with every new face tagged by the holes it belongs to.
        let mut removed = vec![false; mesh.face_count()];
        let mut faces: Vec<[usize; 3]> = Vec::new();
        let mut owner: Vec<Vec<usize>> = Vec::new();
        for (g, tris) in groups.iter().zip(&group_faces) {
            let mut holes_of: Vec<usize> = g.iter().map(|&k| patches[k].0).collect();
            holes_of.sort_unstable();
            holes_of.dedup();
            for &k in g {
                for &f in &patches[k].1.faces {
                    removed[f] = true;
                }
            }
            for t in tris {
                faces.push(*t);
                owner.push(holes_of.clone());
            }
        }
        for (i, b) in bores.iter().enumerate() {
            if let (Some(b), false) = (b, failed.contains_key(&i)) {
                for t in b.walls() {
                    faces.push(t);
                    owner.push(vec![i]);
                }
            }
        }
        let new_faces = faces.len();
        for (f, t) in mesh.faces().iter().enumerate() {
            if !removed[f] {
                faces.push(*t);
            }
        }
        let (compact_vertices, compact_faces, remap) = compact(&vertices, &faces);

        let mut blame: BTreeSet<usize> = BTreeSet::new();
        let owners_of_vertex = |v: usize, blame: &mut BTreeSet<usize>| {
            for (f, t) in compact_faces[..new_faces].iter().enumerate() {
                if t.contains(&v) {
                    blame.extend(owner[f].iter().copied());
                }
            }
        };
        match TriMesh::new(compact_vertices.clone(), compact_faces.clone()) {
            Err(MeshError::DegenerateFace { face, .. }) | Err(MeshError::InvalidFace { face, .. }) => {
                if face < new_faces {
                    blame.extend(owner[face].iter().copied());
                }
            }
            Err(MeshError::NonManifold { edges }) => {
                for e in edges {
                    owners_of_vertex(e[0], &mut blame);
                    owners_of_vertex(e[1], &mut blame);
                }
            }
            Err(e) => return Err(e.into()),
            Ok(m) => {
                if closed {
                    for e in m.boundary_edges() {
                        owners_of_vertex(e[0], &mut blame);
                        owners_of_vertex(e[1], &mut blame);
                    }
                }
                for f in intersecting_new_faces(&m, new_faces) {
                    blame.extend(owner[f].iter().copied());
                }
                if blame.is_empty() {
                    break Some((m, remap));
                }
            }
        }
        if blame.is_empty() {
            // A defect no hole accounts for; give up on all of them.
            blame.extend(patches.iter().map(|p| p.0));
        }
        for h in blame {
            failed.entry(h).or_insert_with(|| "hole geometry is not watertight".into());
        }
    };

    let reports = holes
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let bore = bores[i].as_ref();
            HoleReport {
                hole: i,
                center: bore.map_or(h.center, |b| b.top),
                outcome: match (failed.get(&i), bore) {
                    (Some(reason), _) => HoleOutcome::Failed { reason: reason.clone() },
                    (None, Some(b)) if b.through => HoleOutcome::Through,
                    _ => HoleOutcome::Blind,
                },
            }
        })
        .collect();
    let mesh = match out {
        Some((m, _)) => m,
        None => mesh.clone(),
    };
    Ok(EngraveResult {
        mesh,
        displaced_vertex_count: 0,
        traces: Vec::new(),
        holes: reports,
    })
}

/// Right-handed frame `(u, v, axis)` for projecting along `axis`.
struct Frame {
    origin: Vec3,
    axis: Vec3,
    u: Vec3,
    v: Vec3,
}

impl Frame {
    fn new(origin: Vec3, axis: Vec3) -> Self {
        let u = any_perpendicular(&axis);
        let v = axis.cross(&u);
        Frame { origin, axis, u, v }
    }

    fn project(&self, p: &Vec3) -> [f64; 2] {
        let d = p - self.origin;
        [d.dot(&self.u), d.dot(&self.v)]
    }
}

/// Faces to re-triangulate around one end of a hole, and the rim to cut into them.
struct Patch {
    axis: Vec3,
    faces: Vec<usize>,
    /// Rim vertex ids, counter-clockwise about the hole axis.
    rim: Vec<usize>,
    /// Points on the hole axis; patch vertices near it are dropped.
    line: (Vec3, Vec3),
}

struct Bore {
    top: Vec3,
    through: bool,
    rim: Vec<usize>,
    /// Floor ring for blind holes, exit rim for through-holes.
    lower: Vec<usize>,
    floor: Option<usize>,
    patches: Vec<Patch>,
}

impl Bore {
    fn walls(&self) -> Vec<[usize; 3]> {
        let n = self.rim.len();
        let mut out = Vec::with_capacity(3 * n);
        for i in 0..n {
            let j = (i + 1) % n;
            out.push([self.rim[i], self.rim[j], self.lower[j]]);
            out.push([self.rim[i], self.lower[j], self.lower[i]]);
            if let Some(c) = self.floor {
                out.push([c, self.lower[i], self.lower[j]]);
            }
        }
        out
    }
}

fn survey(mesh: &TriMesh, bvh: &Bvh, hole: &Hole, r: f64, depth: f64, vertices: &mut Vec<Vec3>) -> Result<Bore, String> {
    let len = hole.axis.norm();
    if !(len > 0.0 && len.is_finite()) || !hole.center.iter().all(|x| x.is_finite()) {
        return Err("invalid hole axis or center".into());
    }
    let a = hole.axis / len;
    let lift = 2.0 * r;
    let (f0, t) = bvh
        .ray_first_hit(&(hole.center + a * lift), &-a, 0.0, 2.0 * lift, |f| mesh.face_normal(f).dot(&a) > 0.0)
        .ok_or("hole axis does not meet the surface")?;
    let top = hole.center + a * (lift - t);
    let frame = Frame::new(top, a);
    let dirs: Vec<Vec3> = (0..RIM_SEGMENTS)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / RIM_SEGMENTS as f64;
            frame.u * th.cos() + frame.v * th.sin()
        })
        .collect();

    let top_faces = grow_patch(mesh, f0, &frame, PATCH_SCALE * r, r);
    let rim_pts = cast_ring(mesh, &top_faces, &dirs, &top, &a, r, lift)?;
    let exit = bvh.ray_first_hit(&top, &-a, 1e-6, depth + MIN_FLOOR, |f| mesh.face_normal(f).dot(&a) < 0.0);

    let base = vertices.len();
    let rim: Vec<usize> = (base..base + RIM_SEGMENTS).collect();
    vertices.extend_from_slice(&rim_pts);
    let line = (top, top - a);
    let mut patches = vec![Patch {
        axis: a,
        faces: top_faces,
        rim: rim.clone(),
        line,
    }];

    let (lower_pts, floor) = match exit {
        Some((fb, tb)) => {
            let bottom = top - a * tb;
            let back = Frame::new(bottom, -a);
            let faces = grow_patch(mesh, fb, &back, PATCH_SCALE * r, r);
            let ring = cast_ring(mesh, &faces, &dirs, &bottom, &-a, r, lift)?;
            let ids: Vec<usize> = (vertices.len()..vertices.len() + RIM_SEGMENTS).collect();
            // Seen along -a the ring runs clockwise; reverse it for the patch.
            patches.push(Patch {
                axis: -a,
                faces,
                rim: ids.iter().rev().copied().collect(),
                line,
            });
            (ring, None)
        }
        None => {
            let ring: Vec<Vec3> = dirs.iter().map(|d| top + d * r - a * depth).collect();
            (ring, Some(top - a * depth))
        }
    };
    for (p, q) in rim_pts.iter().zip(&lower_pts) {
        if (p - q).dot(&a) <= 1e-3 {
            return Err("surface dips below the hole floor".into());
        }
    }
    let lower: Vec<usize> = (vertices.len()..vertices.len() + RIM_SEGMENTS).collect();
    vertices.extend_from_slice(&lower_pts);
    let floor = floor.map(|c| {
        vertices.push(c);
        vertices.len() - 1
    });
    Ok(Bore {
        top,
        through: floor.is_none(),
        rim,
        lower,
        floor,
        patches,
    })
}

/// Faces reachable from `seed` that face the frame axis and overlap the disc of `radius`.
/// Faces reaching inside `bore` (the hole itself) only need to face the axis at all; the
/// steeper limit applies further out.
fn grow_patch(mesh: &TriMesh, seed: usize, frame: &Frame, radius: f64, bore: f64) -> Vec<usize> {
    let mut seen = BTreeSet::from([seed]);
    let mut queue = VecDeque::from([seed]);
    let mut out = Vec::new();
    while let Some(f) = queue.pop_front() {
        let [a, b, c] = mesh.corners(f).map(|p| frame.project(&p));
        let d = distance_to_triangle_2d([0.0, 0.0], a, b, c);
        let facing = mesh.face_normal(f).dot(&frame.axis);
        if d > radius || facing <= 0.0 || (d >= bore && facing <= MIN_FACING) {
            continue;
        }
        out.push(f);
        for e in 0..3 {
            if let Some(g) = mesh.neighbor(f, e) {
                if seen.insert(g) {
                    queue.push_back(g);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Surface points `center + r·dir` hit along `-axis` among `faces`.
fn cast_ring(
    mesh: &TriMesh,
    faces: &[usize],
    dirs: &[Vec3],
    center: &Vec3,
    axis: &Vec3,
    r: f64,
    lift: f64,
) -> Result<Vec<Vec3>, String> {
    dirs.iter()
        .map(|d| {
            let origin = center + d * r + axis * lift;
            faces
                .iter()
                .filter_map(|&f| {
                    let [a, b, c] = mesh.corners(f);
                    ray_triangle(&origin, &-axis, &a, &b, &c).filter(|t| *t > 0.0 && *t < 2.0 * lift)
                })
                .min_by(f64::total_cmp)
                .map(|t| origin - axis * t)
                .ok_or_else(|| "hole rim leaves the surface".to_string())
        })
        .collect()
}

/// Groups of patch indices that share faces.
fn group_patches(patches: &[(usize, &Patch)]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(patches.len());
    let mut first: HashMap<usize, usize> = HashMap::new();
    for (k, (_, p)) in patches.iter().enumerate() {
        for &f in &p.faces {
            match first.get(&f) {
                Some(&j) => {
                    uf.union(j, k);
                }
                None => {
                    first.insert(f, k);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..patches.len() {
        groups.entry(uf.find(k)).or_default().push(k);
    }
    groups.into_values().collect()
}

/// Re-triangulates the union of `patches` with their rims cut out.
fn triangulate(mesh: &TriMesh, patches: &[&Patch], vertices: &[Vec3], r: f64) -> Result<Vec<[usize; 3]>, String> {
    let axis_sum: Vec3 = patches.iter().map(|p| p.axis).sum();
    if axis_sum.norm() < 1e-9 {
        return Err("overlapping holes point in opposite directions".into());
    }
    let axis = axis_sum.normalize();
    if patches.iter().any(|p| p.axis.dot(&axis) <= 0.5) {
        return Err("overlapping holes point in different directions".into());
    }
    let faces: BTreeSet<usize> = patches.iter().flat_map(|p| p.faces.iter().copied()).collect();
    let first = *faces.iter().next().ok_or("empty patch")?;
    let frame = Frame::new(mesh.vertices()[mesh.faces()[first][0]], axis);
    let proj = |v: usize| frame.project(&vertices[v]);

    let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    for &f in &faces {
        let t = mesh.faces()[f];
        if orient_2d(proj(t[0]), proj(t[1]), proj(t[2])) <= 2e-12 {
            return Err("surface folds over near the hole".into());
        }
        for i in 0..3 {
            directed.insert((t[i], t[(i + 1) % 3]));
            used.insert(t[i]);
        }
    }
    let mut next: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && next.insert(a, b).is_some() {
            return Err("patch boundary touches itself".into());
        }
    }
    let start = *next.keys().min().ok_or("patch has no boundary")?;
    let mut ring = vec![start];
    let mut cur = next[&start];
    while cur != start {
        ring.push(cur);
        cur = *next.get(&cur).ok_or("patch boundary is open")?;
        if ring.len() > next.len() {
            return Err("patch boundary does not close".into());
        }
    }
    let undirected = directed.iter().filter(|(a, b)| a < b || !directed.contains(&(*b, *a))).count();
    if ring.len() != next.len() || used.len() + faces.len() != undirected + 1 {
        return Err("patch around the hole is not a disc".into());
    }
    let outer: Vec<[f64; 2]> = ring.iter().map(|&v| proj(v)).collect();
    if polygon_area(&outer) <= 0.0 {
        return Err("patch boundary is inverted".into());
    }

    let near_axis = |p: &Vec3| {
        patches.iter().any(|h| {
            let d = (h.line.1 - h.line.0).normalize();
            let w = p - h.line.0;
            (w - d * w.dot(&d)).norm() <= CLEAR_SCALE * r
        })
    };
    if ring.iter().any(|&v| near_axis(&vertices[v])) {
        return Err("hole is too close to a steep surface".into());
    }
    let on_ring: BTreeSet<usize> = ring.iter().copied().collect();
    let interior: Vec<usize> = used
        .iter()
        .copied()
        .filter(|v| !on_ring.contains(v) && !near_axis(&vertices[*v]))
        .collect();

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut id_of: HashMap<usize, usize> = HashMap::new();
    let mut handle_of: HashMap<usize, spade::handles::FixedVertexHandle> = HashMap::new();
    let all = ring
        .iter()
        .chain(&interior)
        .chain(patches.iter().flat_map(|p| p.rim.iter()));
    for &v in all {
        let [x, y] = proj(v);
        let h = cdt.insert(Point2::new(x, y)).map_err(|e| format!("triangulation failed: {e:?}"))?;
        if id_of.insert(h.index(), v).is_some() {
            return Err("coincident vertices near the hole".into());
        }
        handle_of.insert(v, h);
    }
    let loops: Vec<&[usize]> = std::iter::once(ring.as_slice())
        .chain(patches.iter().map(|p| p.rim.as_slice()))
        .collect();
    for lp in &loops {
        for i in 0..lp.len() {
            let (a, b) = (handle_of[&lp[i]], handle_of[&lp[(i + 1) % lp.len()]]);
            if !cdt.can_add_constraint(a, b) {
                return Err("hole rim crosses the patch boundary".into());
            }
            cdt.add_constraint(a, b);
        }
    }
    for lp in &loops {
        for i in 0..lp.len() {
            let (a, b) = (handle_of[&lp[i]], handle_of[&lp[(i + 1) % lp.len()]]);
            if cdt.get_edge_from_neighbors(a, b).is_none() {
                return Err("patch boundary could not be preserved".into());
            }
        }
    }

    // Faces left of the counter-clockwise patch boundary, flooded up to constraint edges;
    // this stops at every rim and needs no point-location on slivers.
    let mut stack = Vec::new();
    for i in 0..ring.len() {
        let (a, b) = (handle_of[&ring[i]], handle_of[&ring[(i + 1) % ring.len()]]);
        let e = cdt.get_edge_from_neighbors(a, b).ok_or("patch boundary could not be preserved")?;
        stack.push(e.face().as_inner().ok_or("patch boundary is inverted")?.fix());
    }
    let mut inside = BTreeSet::new();
    let mut out = Vec::new();
    while let Some(f) = stack.pop() {
        if !inside.insert(f.index()) {
            continue;
        }
        let face = cdt.face(f);
        let t = face.vertices().map(|h| id_of[&h.fix().index()]);
        if orient_2d(proj(t[0]), proj(t[1]), proj(t[2])) <= 1e-12 {
            return Err("re-triangulation produced a sliver".into());
        }
        out.push(t);
        for e in face.adjacent_edges() {
            if !e.is_constraint_edge() {
                if let Some(g) = e.rev().face().as_inner() {
                    stack.push(g.fix());
                }
            }
        }
    }
    Ok(out)
}

/// Drops unreferenced vertices.
fn compact(vertices: &[Vec3], faces: &[[usize; 3]]) -> (Vec<Vec3>, Vec<[usize; 3]>, Vec<Option<usize>>) {
    let mut remap = vec![None; vertices.len()];
    let mut out = Vec::new();
    let faces = faces
        .iter()
        .map(|t| {
            t.map(|v| {
                *remap[v].get_or_insert_with(|| {
                    out.push(vertices[v]);
                    out.len() - 1
                })
            })
        })
        .collect();
    (out, faces, remap)
}

/// Indices below `new_faces` of new faces that penetrate any other face.
fn intersecting_new_faces(mesh: &TriMesh, new_faces: usize) -> Vec<usize> {
    let bvh = Bvh::build(mesh.vertices(), mesh.faces());
    let faces = mesh.faces();
    (0..new_faces)
        .into_par_iter()
        .filter(|&f| {
            let t = bvh.triangle(f);
            let bb = Aabb::from_points(t.iter()).inflate(1e-9);
            let mut hit = false;
            bvh.for_each_overlap(&bb, |g| {
                if hit || g == f || faces[g].iter().any(|v| faces[f].contains(v)) {
                    return;
                }
                let u = bvh.triangle(g);
                hit = triangles_intersect([&t[0], &t[1], &t[2]], [&u[0], &u[1], &u[2]], 1e-9);
            });
            hit
        })
        .collect()
}

fn orient_2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

fn distance_to_triangle_2d(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    let s = orient_2d(a, b, c).signum();
    if orient_2d(a, b, p) * s >= 0.0 && orient_2d(b, c, p) * s >= 0.0 && orient_2d(c, a, p) * s >= 0.0 {
        return 0.0;
    }
    let seg = |u: [f64; 2], v: [f64; 2]| {
        let d = [v[0] - u[0], v[1] - u[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = if len2 > 0.0 {
            (((p[0] - u[0]) * d[0] + (p[1] - u[1]) * d[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        ((p[0] - u[0] - t * d[0]).powi(2) + (p[1] - u[1] - t * d[1]).powi(2)).sqrt()
    };
    seg(a, b).min(seg(b, c)).min(seg(c, a))
}
