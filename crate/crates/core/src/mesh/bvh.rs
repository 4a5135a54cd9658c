use crate::geom::{closest_point_on_triangle, ray_triangle, Aabb, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    // leaf: faces[start..start + count]; inner: children at `start` and `start + 1`
    start: usize,
    count: usize,
}

/// Bounding-volume hierarchy over a triangle soup.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    tris: Vec<[Vec3; 3]>,
}

impl Bvh {
    pub fn build(vertices: &[Vec3], faces: &[[usize; 3]]) -> Self {
        let tris: Vec<[Vec3; 3]> = faces
            .iter()
            .map(|f| [vertices[f[0]], vertices[f[1]], vertices[f[2]]])
            .collect();
        let boxes: Vec<Aabb> = tris.iter().map(|t| Aabb::from_points(t.iter())).collect();
        let centers: Vec<Vec3> = boxes.iter().map(Aabb::center).collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = vec![Node {
            bounds: Aabb::empty(),
            start: 0,
            count: 0,
        }];
        let mut stack = vec![(0usize, 0usize, tris.len())];
        while let Some((node, lo, hi)) = stack.pop() {
            let bounds = order[lo..hi]
                .iter()
                .fold(Aabb::empty(), |acc, &i| acc.merge(&boxes[i]));
            nodes[node].bounds = bounds;
            if hi - lo <= LEAF_SIZE {
                nodes[node].start = lo;
                nodes[node].count = hi - lo;
                continue;
            }
            let extent = bounds.max - bounds.min;
            let axis = if extent.x >= extent.y && extent.x >= extent.z {
                0
            } else if extent.y >= extent.z {
                1
            } else {
                2
            };
            let mid = (lo + hi) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                centers[a][axis].total_cmp(&centers[b][axis])
            });
            let left = nodes.len();
            nodes.push(Node {
                bounds: Aabb::empty(),
                start: 0,
                count: 0,
            });
            nodes.push(Node {
                bounds: Aabb::empty(),
                start: 0,
                count: 0,
            });
            nodes[node].start = left;
            nodes[node].count = 0;
            stack.push((left, lo, mid));
            stack.push((left + 1, mid, hi));
        }
        Bvh { nodes, order, tris }
    }

    pub fn triangle(&self, f: usize) -> &[Vec3; 3] {
        &self.tris[f]
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Calls `visit` for every face whose bounding box overlaps `query`.
    pub fn for_each_overlap(&self, query: &Aabb, mut visit: impl FnMut(usize)) {
        if self.tris.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bounds.overlaps(query) {
                continue;
            }
            if node.count > 0 {
                for &f in &self.order[node.start..node.start + node.count] {
                    let t = &self.tris[f];
                    if Aabb::from_points(t.iter()).overlaps(query) {
                        visit(f);
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
    }

    /// First face hit by the ray within `(t_min, t_max)`, skipping faces rejected by `accept`.
    pub fn ray_first_hit(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        t_min: f64,
        t_max: f64,
        accept: impl Fn(usize) -> bool,
    ) -> Option<(usize, f64)> {
        if self.tris.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let limit = best.map_or(t_max, |b| b.1);
            if node.bounds.ray_entry(origin, &inv, t_min, limit).is_none() {
                continue;
            }
            if node.count > 0 {
                for &f in &self.order[node.start..node.start + node.count] {
                    if !accept(f) {
                        continue;
                    }
                    let [a, b, c] = &self.tris[f];
                    if let Some(t) = ray_triangle(origin, dir, a, b, c) {
                        if t > t_min && t < best.map_or(t_max, |b| b.1) {
                            best = Some((f, t));
                        }
                    }
                }
            } else {
                stack.push(node.start);
                stack.push(node.start + 1);
            }
        }
        best
    }

    /// Closest face to `p` with barycentric weights of the closest point and its distance.
    pub fn nearest(&self, p: &Vec3) -> Option<(usize, [f64; 3], f64)> {
        if self.tris.is_empty() {
            return None;
        }
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds.distance_to_point(p) >= best.map_or(f64::INFINITY, |b| b.2) {
                continue;
            }
            if node.count > 0 {
                for &f in &self.order[node.start..node.start + node.count] {
                    let [a, b, c] = &self.tris[f];
                    let w = closest_point_on_triangle(p, a, b, c);
                    let d = (a * w[0] + b * w[1] + c * w[2] - p).norm();
                    if d < best.map_or(f64::INFINITY, |b| b.2) {
                        best = Some((f, w, d));
                    }
                }
            } else {
                let (l, r) = (node.start, node.start + 1);
                let dl = self.nodes[l].bounds.distance_to_point(p);
                let dr = self.nodes[r].bounds.distance_to_point(p);
                if dl < dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn nearest_matches_brute_force() {
        let m = shapes::icosphere(10.0, 2);
        let bvh = Bvh::build(m.vertices(), m.faces());
        for p in [Vec3::new(3.0, -20.0, 1.0), Vec3::new(0.1, 0.2, 0.3), Vec3::new(7.0, 7.0, 7.0)] {
            let (_, _, d) = bvh.nearest(&p).unwrap();
            let sp = m.closest_point(&p);
            assert!((d - (m.point(&sp) - p).norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn ray_hits_far_side_of_slab() {
        let m = shapes::slab(10.0, 10.0, 2.0, 4, 4);
        let bvh = Bvh::build(m.vertices(), m.faces());
        let (f, t) = bvh
            .ray_first_hit(&Vec3::new(3.3, 4.1, 2.0), &-Vec3::z(), 1e-6, f64::INFINITY, |_| true)
            .unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(m.face_normal(f).z < -0.99);
    }
}
