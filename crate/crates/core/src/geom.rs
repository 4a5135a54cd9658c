//! Small geometric kernels shared by routing, clearance and engraving.

use nalgebra::Vector3;

/// 3D vector/point in millimeters.
pub type Vec3 = Vector3<f64>;

/// Closest points between segments `p0-p1` and `q0-q1`.
///
/// Returns `(s, t, distance)` where `s` and `t` are the segment parameters in `[0, 1]`.
pub fn segment_segment(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> (f64, f64, f64) {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    const EPS: f64 = 1e-300;

    let (s, t) = if a <= EPS && e <= EPS {
        (0.0, 0.0)
    } else if a <= EPS {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > 1e-18 * a * e {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let cp = p0 + d1 * s;
    let cq = q0 + d2 * t;
    (s, t, (cp - cq).norm())
}

/// Distance from `p` to segment `a-b`, with the segment parameter of the closest point.
pub fn point_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (t, (p - (a + ab * t)).norm())
}

/// Closest point on triangle `abc` to `p`, returned as barycentric weights.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [1.0 - v - w, v, w]
}

/// Möller–Trumbore ray/triangle intersection. Returns the ray parameter of the hit.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    Some(e2.dot(&qvec) * inv)
}

/// Proper crossing of segment `p-q` through the interior of triangle `abc`.
///
/// Touching contacts within `eps` of either the segment ends or the triangle border do
/// not count.
pub fn segment_crosses_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3, eps: f64) -> bool {
    let n = (b - a).cross(&(c - a));
    let nn = n.norm();
    if nn == 0.0 {
        return false;
    }
    let n = n / nn;
    let dp = (p - a).dot(&n);
    let dq = (q - a).dot(&n);
    if (dp > -eps && dq > -eps) || (dp < eps && dq < eps) {
        return false;
    }
    let t = dp / (dp - dq);
    let x = p + (q - p) * t;
    let inside = |u: &Vec3, v: &Vec3| (v - u).cross(&(x - u)).dot(&n) > eps * (v - u).norm();
    inside(a, b) && inside(b, c) && inside(c, a)
}

/// Whether two triangles properly penetrate each other (coplanar contact is ignored).
pub fn triangles_intersect(t1: [&Vec3; 3], t2: [&Vec3; 3], eps: f64) -> bool {
    for i in 0..3 {
        let (p, q) = (t1[i], t1[(i + 1) % 3]);
        if segment_crosses_triangle(p, q, t2[0], t2[1], t2[2], eps) {
            return true;
        }
        let (p, q) = (t2[i], t2[(i + 1) % 3]);
        if segment_crosses_triangle(p, q, t1[0], t1[1], t1[2], eps) {
            return true;
        }
    }
    false
}

/// Rotates `v` about the unit `axis` by `angle` radians.
pub fn rotate_about(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// A unit vector orthogonal to `n`, stable across nearby normals.
pub fn any_perpendicular(n: &Vec3) -> Vec3 {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t = helper - n * n.dot(&helper);
    t.normalize()
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut bb = Aabb::empty();
        for p in pts {
            bb.grow(p);
        }
        bb
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn inflate(&self, r: f64) -> Aabb {
        Aabb {
            min: self.min.add_scalar(-r),
            max: self.max.add_scalar(r),
        }
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Lower bound of the distance between any two points of the boxes.
    pub fn distance(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = (other.min[i] - self.max[i]).max(self.min[i] - other.max[i]).max(0.0);
            d2 += gap * gap;
        }
        d2.sqrt()
    }

    pub fn distance_to_point(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = (self.min[i] - p[i]).max(p[i] - self.max[i]).max(0.0);
            d2 += gap * gap;
        }
        d2.sqrt()
    }

    /// Slab test; returns the entry parameter if the ray hits within `[t_min, t_max]`.
    pub fn ray_entry(&self, origin: &Vec3, inv_dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut lo = t_min;
        let mut hi = t_max;
        for i in 0..3 {
            let t0 = (self.min[i] - origin[i]) * inv_dir[i];
            let t1 = (self.max[i] - origin[i]) * inv_dir[i];
            let (a, b) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            // NaN from 0 * inf keeps the current bounds
            if a > lo {
                lo = a;
            }
            if b < hi {
                hi = b;
            }
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}
