//! Measurement helpers shared by the integration tests. They only read mesh geometry and
//! never call into the engraving code.
#![allow(dead_code)]

use coppertrace_core::{TriMesh, Vec3};

/// Cross-section of `mesh` with the plane `x = x0`, as `(y, z)` segments.
pub fn slice_x(mesh: &TriMesh, x0: f64) -> Vec<[(f64, f64); 2]> {
    let v = mesh.vertices();
    let mut out = Vec::new();
    for f in mesh.faces() {
        let mut pts = Vec::new();
        for i in 0..3 {
            let (a, b) = (v[f[i]], v[f[(i + 1) % 3]]);
            let (da, db) = (a.x - x0, b.x - x0);
            if (da < 0.0) != (db < 0.0) {
                let t = da / (da - db);
                let p = a + (b - a) * t;
                pts.push((p.y, p.z));
            }
        }
        if pts.len() == 2 {
            out.push([pts[0], pts[1]]);
        }
    }
    out
}

/// Depth and top width of the groove cut into a flat top at height `top`, measured on the
/// slice segments whose `y` lies in `window`.
pub struct Groove {
    pub depth: f64,
    pub width: f64,
}

pub fn measure_groove(slice: &[[(f64, f64); 2]], top: f64, window: (f64, f64)) -> Option<Groove> {
    let inside = |p: &(f64, f64)| p.0 >= window.0 && p.0 <= window.1 && p.1 > top - 3.0;
    let below = |p: &(f64, f64)| p.1 < top - 1e-6;
    let mut min_z = f64::INFINITY;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in slice.iter().filter(|s| s.iter().all(inside)) {
        if !s.iter().any(below) {
            continue;
        }
        for p in s {
            min_z = min_z.min(p.1);
            lo = lo.min(p.0);
            hi = hi.max(p.0);
        }
    }
    min_z.is_finite().then(|| Groove {
        depth: top - min_z,
        width: hi - lo,
    })
}

pub fn great_circle(radius: f64, a: &Vec3, b: &Vec3) -> f64 {
    let c = a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0);
    radius * c.acos()
}

/// Volume of the regular `sides`-gon prism inscribed in a cylinder.
pub fn prism_volume(radius: f64, sides: usize, height: f64) -> f64 {
    let n = sides as f64;
    0.5 * n * radius * radius * (2.0 * std::f64::consts::PI / n).sin() * height
}
