use std::collections::HashMap;

use crate::geom::{point_segment, Aabb, Vec3};

/// Uniform hash grid over trace segments, answering distance queries out to `reach`.
pub(crate) struct SegmentGrid {
    cell: f64,
    reach: f64,
    segs: Vec<Segment>,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Segment {
    pub a: Vec3,
    pub b: Vec3,
    pub trace: usize,
}

impl SegmentGrid {
    pub(crate) fn new(segs: Vec<Segment>, reach: f64) -> Self {
        let cell = reach.max(1e-3);
        let mut grid = SegmentGrid {
            cell,
            reach,
            segs,
            cells: HashMap::new(),
        };
        for (i, s) in grid.segs.iter().enumerate() {
            let bb = Aabb::from_points([&s.a, &s.b]).inflate(reach);
            let (lo, hi) = (grid.key(&bb.min), grid.key(&bb.max));
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        grid.cells.entry([x, y, z]).or_default().push(i as u32);
                    }
                }
            }
        }
        grid
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        ]
    }

    pub(crate) fn segment(&self, i: u32) -> &Segment {
        &self.segs[i as usize]
    }

    /// Segments that may lie within `reach` of some point of `bb`.
    pub(crate) fn candidates(&self, bb: &Aabb, out: &mut Vec<u32>) {
        out.clear();
        let (lo, hi) = (self.key(&bb.min), self.key(&bb.max));
        let span = (0..3).map(|k| (hi[k] - lo[k] + 1) as u64).product::<u64>();
        if span > 4 * self.cells.len() as u64 {
            // Huge query box: cheaper to scan the occupied cells.
            for (k, list) in &self.cells {
                if (0..3).all(|i| k[i] >= lo[i] && k[i] <= hi[i]) {
                    out.extend_from_slice(list);
                }
            }
        } else {
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        if let Some(list) = self.cells.get(&[x, y, z]) {
                            out.extend_from_slice(list);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    /// Nearest segment within `reach`, as (distance, segment index).
    pub(crate) fn nearest(&self, p: &Vec3) -> Option<(f64, u32)> {
        let list = self.cells.get(&self.key(p))?;
        let mut best: Option<(f64, u32)> = None;
        for &i in list {
            let s = &self.segs[i as usize];
            let (_, d) = point_segment(p, &s.a, &s.b);
            if d <= self.reach && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        best
    }

    /// Distance to the nearest segment, or infinity beyond `reach`.
    pub(crate) fn distance(&self, p: &Vec3) -> f64 {
        self.nearest(p).map_or(f64::INFINITY, |(d, _)| d)
    }

    pub(crate) fn reach(&self) -> f64 {
        self.reach
    }

    pub(crate) fn len(&self) -> usize {
        self.segs.len()
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }
}
