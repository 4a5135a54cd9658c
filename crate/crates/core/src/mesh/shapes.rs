//! Procedural meshes used as fixtures, demos and benchmarks.

use std::collections::HashMap;

use super::TriMesh;
use crate::geom::Vec3;

/// Open `width × height` plane at z = 0 with `nx × ny` quads split into triangles.
pub fn plane_grid(width: f64, height: f64, nx: usize, ny: usize) -> TriMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(width * i as f64 / nx as f64, height * j as f64 / ny as f64, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    TriMesh::new(vertices, faces).expect("plane grid is valid")
}

/// Closed axis-aligned box with `divisions` quads along x, y, z.
pub fn cuboid(min: Vec3, max: Vec3, divisions: [usize; 3]) -> TriMesh {
    let n = divisions.map(|d| d.max(1));
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vid = |l: [usize; 3], vertices: &mut Vec<Vec3>| -> usize {
        *index.entry(l).or_insert_with(|| {
            let p = Vec3::from_fn(|k, _| min[k] + (max[k] - min[k]) * l[k] as f64 / n[k] as f64);
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut faces = Vec::new();
    for axis in 0..3 {
        let u = (axis + 1) % 3;
        let w = (axis + 2) % 3;
        for side in [0, n[axis]] {
            for a in 0..n[u] {
                for b in 0..n[w] {
                    let lat = |du: usize, dw: usize| {
                        let mut l = [0usize; 3];
                        l[axis] = side;
                        l[u] = a + du;
                        l[w] = b + dw;
                        l
                    };
                    let mut q = [
                        vid(lat(0, 0), &mut vertices),
                        vid(lat(1, 0), &mut vertices),
                        vid(lat(1, 1), &mut vertices),
                        vid(lat(0, 1), &mut vertices),
                    ];
                    if side == 0 {
                        q.reverse();
                    }
                    faces.push([q[0], q[1], q[2]]);
                    faces.push([q[0], q[2], q[3]]);
                }
            }
        }
    }
    TriMesh::new(vertices, faces).expect("cuboid is valid")
}

/// Closed slab `[0, width] × [0, depth] × [0, thickness]` whose top face is an `nx × ny`
/// grid; the sides are single strips and the bottom is a fan around its center.
pub fn slab(width: f64, depth: f64, thickness: f64, nx: usize, ny: usize) -> TriMesh {
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(width * i as f64 / nx as f64, depth * j as f64 / ny as f64, thickness));
        }
    }
    let top = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny + 6 * (nx + ny));
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (top(i, j), top(i + 1, j), top(i + 1, j + 1), top(i, j + 1));
            if (i + j) % 2 == 0 {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    // counter-clockwise ring around the top boundary, seen from +z
    let mut ring = Vec::new();
    ring.extend((0..nx).map(|i| top(i, 0)));
    ring.extend((0..ny).map(|j| top(nx, j)));
    ring.extend((0..nx).map(|i| top(nx - i, ny)));
    ring.extend((0..ny).map(|j| top(0, ny - j)));
    let base = vertices.len();
    for k in 0..ring.len() {
        let p = vertices[ring[k]];
        vertices.push(Vec3::new(p.x, p.y, 0.0));
    }
    let m = ring.len();
    for k in 0..m {
        let (t0, t1) = (ring[k], ring[(k + 1) % m]);
        let (b0, b1) = (base + k, base + (k + 1) % m);
        faces.push([t0, b0, b1]);
        faces.push([t0, b1, t1]);
    }
    let center = vertices.len();
    vertices.push(Vec3::new(width / 2.0, depth / 2.0, 0.0));
    for k in 0..m {
        faces.push([center, base + (k + 1) % m, base + k]);
    }
    TriMesh::new(vertices, faces).expect("slab is valid")
}

/// Icosahedron subdivided `subdivisions` times, projected onto a sphere of `radius`.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    TriMesh::new(vertices, faces).expect("icosphere is valid")
}

/// Closed surface of revolution about the z axis.
///
/// `profile` lists `(radius, z)` rings from bottom to top (all radii > 0); the two poles
/// are added on the axis at `z_bottom` and `z_top`.
pub fn revolve(profile: &[(f64, f64)], segments: usize, z_bottom: f64, z_top: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity(profile.len() * segments + 2);
    for &(r, z) in profile {
        for j in 0..segments {
            let a = std::f64::consts::TAU * j as f64 / segments as f64;
            vertices.push(Vec3::new(r * a.cos(), r * a.sin(), z));
        }
    }
    let id = |k: usize, j: usize| k * segments + j % segments;
    let mut faces = Vec::new();
    for k in 0..profile.len() - 1 {
        for j in 0..segments {
            let (a, b, c, d) = (id(k, j), id(k, j + 1), id(k + 1, j + 1), id(k + 1, j));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let bottom = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, z_bottom));
    let top = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, z_top));
    let last = profile.len() - 1;
    for j in 0..segments {
        faces.push([bottom, id(0, j + 1), id(0, j)]);
        faces.push([top, id(last, j), id(last, j + 1)]);
    }
    TriMesh::new(vertices, faces).expect("surface of revolution is valid")
}

/// A cone-shaped "tree" of roughly `2 * rings * segments` triangles.
pub fn tree(base_radius: f64, height: f64, rings: usize, segments: usize) -> TriMesh {
    let profile: Vec<(f64, f64)> = (0..rings)
        .map(|k| {
            let s = k as f64 / rings as f64;
            let z = height * s;
            (base_radius * (1.0 - s).max(0.02), z)
        })
        .collect();
    revolve(&profile, segments, -height * 0.05, height)
}
