//! Isolation checks between traces and pads of different nets.
//!
//! Distances are 3D chord distances between trace centerlines and pad centers.

use serde::{Deserialize, Serialize};

use super::{Layout, LayoutError};
use crate::geom::{Aabb, Vec3};
use crate::mesh::TriMesh;
use crate::routing::distance::points_closest;
use crate::schematic::{EdgeId, NetId, PartId, Schematic, Terminal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Trace { edge: EdgeId },
    Pad { part: PartId, pin: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub a: Element,
    pub b: Element,
    pub distance: f64,
    pub point_a: Vec3,
    pub point_b: Vec3,
}

struct Item {
    element: Element,
    net: Option<NetId>,
    points: Vec<Vec3>,
    bounds: Aabb,
}

/// Every pair of elements on different nets closer than `layout.clearance`. Elements of the
/// same net are electrically joined and exempt. Failed trace segments are skipped.
pub fn check_clearance(mesh: &TriMesh, sch: &Schematic, layout: &Layout) -> Result<Vec<Violation>, LayoutError> {
    if !(layout.clearance > 0.0) {
        return Err(LayoutError::InvalidClearance);
    }
    let mut items = Vec::new();
    for (edge, trace) in &layout.traces {
        let points = trace.positions(mesh);
        if points.is_empty() {
            continue;
        }
        items.push(Item {
            element: Element::Trace { edge: *edge },
            net: Some(trace.net),
            bounds: Aabb::from_points(&points),
            points,
        });
    }
    for (part, pin, sp) in layout.all_pins(mesh, sch)? {
        let p = mesh.point(&sp);
        items.push(Item {
            element: Element::Pad { part, pin },
            net: sch.net_of(&Terminal::pin(part, pin)),
            bounds: Aabb::from_points([&p]),
            points: vec![p],
        });
    }
    let c = layout.clearance;
    let mut out = Vec::new();
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let (a, b) = (&items[i], &items[j]);
            if a.net.is_some() && a.net == b.net {
                continue;
            }
            if a.bounds.distance(&b.bounds) >= c {
                continue;
            }
            let cp = points_closest(&a.points, &b.points);
            if cp.distance < c {
                out.push(Violation {
                    a: a.element,
                    b: b.element,
                    distance: cp.distance,
                    point_a: cp.on_a,
                    point_b: cp.on_b,
                });
            }
        }
    }
    Ok(out)
}
