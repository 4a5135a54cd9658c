//! Binary STL and ASCII OBJ reading and writing.
//!
//! STL carries no units; coordinates are taken as millimeters.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, TriMesh};
use crate::geom::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Stl,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "stl" => Some(MeshFormat::Stl),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// STL vertices closer than this (mm) are merged.
    pub weld_tolerance: f64,
    /// Accept meshes with open boundary edges.
    pub allow_open: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            weld_tolerance: 1e-5,
            allow_open: false,
        }
    }
}

/// Loads a closed mesh from binary STL or ASCII OBJ bytes.
pub fn load_mesh(bytes: &[u8]) -> Result<TriMesh, MeshError> {
    load_mesh_with(bytes, &LoadOptions::default())
}

pub fn load_mesh_with(bytes: &[u8], opts: &LoadOptions) -> Result<TriMesh, MeshError> {
    let (vertices, faces) = if looks_like_binary_stl(bytes) {
        parse_stl(bytes, opts.weld_tolerance)?
    } else {
        parse_obj(bytes)?
    };
    if faces.is_empty() {
        return Err(MeshError::Empty);
    }
    let mesh = TriMesh::new(vertices, faces)?;
    if !opts.allow_open {
        let open = mesh.boundary_edges();
        if !open.is_empty() {
            return Err(MeshError::OpenBoundary { edges: open });
        }
    }
    Ok(mesh)
}

pub fn read_mesh_file(path: &Path, opts: &LoadOptions) -> Result<TriMesh, MeshError> {
    let bytes = std::fs::read(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    load_mesh_with(&bytes, opts)
}

pub fn save_mesh(mesh: &TriMesh, format: MeshFormat) -> Result<Vec<u8>, MeshError> {
    if mesh.face_count() == 0 {
        return Err(MeshError::Empty);
    }
    Ok(match format {
        MeshFormat::Stl => write_stl(mesh),
        MeshFormat::Obj => write_obj(mesh).into_bytes(),
    })
}

pub fn write_mesh_file(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<(), MeshError> {
    let bytes = save_mesh(mesh, format)?;
    std::fs::write(path, bytes).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))
}

fn looks_like_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    bytes.len() == 84 + 50 * n
}

type Raw = (Vec<Vec3>, Vec<[usize; 3]>);

fn parse_stl(bytes: &[u8], tol: f64) -> Result<Raw, MeshError> {
    let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
    let mut welder = Welder::new(tol);
    let mut faces = Vec::with_capacity(n);
    for t in 0..n {
        let rec = &bytes[84 + 50 * t..84 + 50 * (t + 1)];
        let mut idx = [0usize; 3];
        for (k, slot) in idx.iter_mut().enumerate() {
            let off = 12 + 12 * k;
            let c = |i: usize| {
                let s = off + 4 * i;
                f32::from_le_bytes([rec[s], rec[s + 1], rec[s + 2], rec[s + 3]]) as f64
            };
            let p = Vec3::new(c(0), c(1), c(2));
            if !p.iter().all(|x| x.is_finite()) {
                return Err(MeshError::Parse(format!("non-finite coordinate in triangle {t}")));
            }
            *slot = welder.insert(p);
        }
        // slivers collapsed by welding
        if idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2] {
            faces.push(idx);
        }
    }
    Ok((welder.points, faces))
}

struct Welder {
    tol: f64,
    points: Vec<Vec3>,
    grid: HashMap<[i64; 3], Vec<usize>>,
}

impl Welder {
    fn new(tol: f64) -> Self {
        Welder {
            tol: tol.max(1e-12),
            points: Vec::new(),
            grid: HashMap::new(),
        }
    }

    fn cell(&self, p: &Vec3) -> [i64; 3] {
        [0, 1, 2].map(|i| (p[i] / self.tol).floor() as i64)
    }

    fn insert(&mut self, p: Vec3) -> usize {
        let c = self.cell(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &i in ids {
                            if (self.points[i] - p).norm() <= self.tol {
                                return i;
                            }
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.grid.entry(c).or_default().push(id);
        id
    }
}

fn parse_obj(bytes: &[u8]) -> Result<Raw, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|_| MeshError::Parse("not binary STL and not UTF-8 OBJ".into()))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for x in &mut c {
                    *x = it
                        .next()
                        .and_then(|s| s.parse::<f64>().ok())
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| MeshError::Parse(format!("line {}: bad vertex", line_no + 1)))?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let refs: Vec<&str> = it.collect();
                if refs.len() != 3 {
                    return Err(MeshError::Parse(format!(
                        "line {}: only triangles are supported, got {} corners",
                        line_no + 1,
                        refs.len()
                    )));
                }
                let mut f = [0usize; 3];
                for (slot, r) in f.iter_mut().zip(refs) {
                    let head = r.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| MeshError::Parse(format!("line {}: bad face index '{r}'", line_no + 1)))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(MeshError::Parse(format!("line {}: face index {i} out of range", line_no + 1)));
                    }
                    *slot = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

fn write_stl(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.face_count());
    let mut header = [0u8; 80];
    let tag = b"binary STL, units mm";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.face_count() as u32).to_le_bytes());
    for f in 0..mesh.face_count() {
        let n = mesh.face_normal(f);
        for x in n.iter() {
            out.extend_from_slice(&(*x as f32).to_le_bytes());
        }
        for p in mesh.corners(f) {
            for x in p.iter() {
                out.extend_from_slice(&(*x as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

fn write_obj(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(mesh.vertex_count() * 40 + mesh.face_count() * 20);
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    /// Unwelded binary STL, one record per face, fed by hand.
    fn stl_bytes(tris: &[[Vec3; 3]]) -> Vec<u8> {
        let mut b = vec![0u8; 80];
        b.extend_from_slice(&(tris.len() as u32).to_le_bytes());
        for t in tris {
            b.extend_from_slice(&[0u8; 12]);
            for p in t {
                for x in p.iter() {
                    b.extend_from_slice(&(*x as f32).to_le_bytes());
                }
            }
            b.extend_from_slice(&[0, 0]);
        }
        b
    }

    fn cube_triangles() -> Vec<[Vec3; 3]> {
        let cube = shapes::cuboid(Vec3::zeros(), Vec3::repeat(1.0), [1, 1, 1]);
        (0..cube.face_count()).map(|f| cube.corners(f)).collect()
    }

    #[test]
    fn unit_cube_stl_welds_to_eight_vertices() {
        let m = load_mesh(&stl_bytes(&cube_triangles())).unwrap();
        assert_eq!((m.vertex_count(), m.face_count()), (8, 12));
        assert!((m.signed_volume() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deleted_triangle_reports_three_boundary_edges() {
        let mut tris = cube_triangles();
        tris.remove(5);
        match load_mesh(&stl_bytes(&tris)) {
            Err(MeshError::OpenBoundary { edges }) => assert_eq!(edges.len(), 3),
            other => panic!("expected open-boundary error, got {other:?}"),
        }
        let open = load_mesh_with(
            &stl_bytes(&tris),
            &LoadOptions {
                allow_open: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(open.boundary_edges().len(), 3);
    }

    #[test]
    fn icosphere_obj_counts() {
        // V = 10 * 4^k + 2, F = 20 * 4^k for k subdivisions of the icosahedron
        let k = 3u32;
        let ico = shapes::icosphere(50.0, k);
        let text = save_mesh(&ico, MeshFormat::Obj).unwrap();
        let m = load_mesh(&text).unwrap();
        assert_eq!(m.vertex_count(), 10 * 4usize.pow(k) + 2);
        assert_eq!(m.face_count(), 20 * 4usize.pow(k));
    }

    #[test]
    fn stl_round_trip_keeps_connectivity() {
        let ico = shapes::icosphere(50.0, 2);
        let back = load_mesh(&save_mesh(&ico, MeshFormat::Stl).unwrap()).unwrap();
        assert_eq!(back.vertex_count(), ico.vertex_count());
        // STL drops indices: relabel through positions before comparing faces
        let relabel: Vec<usize> = back
            .vertices()
            .iter()
            .map(|p| {
                let (i, d) = ico
                    .vertices()
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (i, (p - q).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert!(d < 1e-5);
                i
            })
            .collect();
        let faces: Vec<[usize; 3]> = back.faces().iter().map(|f| f.map(|v| relabel[v])).collect();
        assert_eq!(faces, ico.faces());
    }

    #[test]
    fn obj_round_trip_is_exact() {
        let m = shapes::cuboid(Vec3::new(-1.5, 0.25, 3.0), Vec3::new(7.1, 2.2, 9.9), [3, 2, 4]);
        let back = load_mesh(&save_mesh(&m, MeshFormat::Obj).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert_eq!(load_mesh(&stl_bytes(&[])), Err(MeshError::Empty));
        assert_eq!(load_mesh(b"# nothing\n"), Err(MeshError::Empty));
    }

    #[test]
    fn quads_and_garbage_fail_to_parse() {
        assert!(matches!(
            load_mesh(b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"),
            Err(MeshError::Parse(_))
        ));
        assert!(matches!(load_mesh(b"v 0 0 zz\n"), Err(MeshError::Parse(_))));
        assert!(matches!(load_mesh(&[0xff, 0xfe, 0x00]), Err(MeshError::Parse(_))));
    }
}
