//! Bundled demo designs, built through [`Document`] edits so each carries its edit log.

use crate::document::{Document, EditOp, PartSpec};
use crate::geom::Vec3;
use crate::layout::reference_frame;
use crate::mesh::{shapes, SurfacePoint, TriMesh};
use crate::schematic::{PartId, Terminal};

pub struct Fixture {
    pub mesh: TriMesh,
    pub document: Document,
}

/// Fixture names accepted by [`by_name`].
pub const NAMES: &[&str] = &["plane", "sphere", "tree"];

pub fn by_name(name: &str) -> Option<Fixture> {
    match name {
        "plane" => Some(plane_demo()),
        "sphere" => Some(sphere_antipodal()),
        "tree" => Some(christmas_tree()),
        _ => None,
    }
}

struct Builder<'m> {
    mesh: &'m TriMesh,
    doc: Document,
}

impl<'m> Builder<'m> {
    fn new(mesh: &'m TriMesh) -> Self {
        Builder {
            mesh,
            doc: Document::new(mesh),
        }
    }

    fn apply(&mut self, op: EditOp) -> crate::document::EditOutcome {
        self.doc.apply(self.mesh, op).expect("fixture edit is valid")
    }

    fn part(&mut self, reference: &str, kind: &str, position: [f64; 2]) -> PartId {
        self.apply(EditOp::AddPart {
            reference: reference.into(),
            part: PartSpec::Library(kind.into()),
            position,
        })
        .part
        .expect("part id")
    }

    fn net(&mut self, name: &str, a: Terminal, b: Terminal) {
        self.apply(EditOp::AddNet { name: name.into(), a, b });
    }

    /// Places `part` at the surface point nearest `at`, with its x axis along `along`.
    fn place(&mut self, part: PartId, at: Vec3, along: Vec3) {
        let anchor = self.mesh.closest_point(&at);
        self.place_at(part, anchor, along);
    }

    fn place_at(&mut self, part: PartId, anchor: SurfacePoint, along: Vec3) {
        let (e1, e2) = reference_frame(self.mesh, &anchor);
        let rotation = along.dot(&e2).atan2(along.dot(&e1));
        self.apply(EditOp::PlacePart { part, anchor, rotation });
    }

    fn finish(self, mesh_ref: &str) -> Document {
        let mut doc = self.doc;
        doc.design.mesh_ref = mesh_ref.into();
        doc
    }
}

/// An LED and a resistor joined by one net on a closed 80 × 50 × 8 mm slab.
pub fn plane_demo() -> Fixture {
    let mesh = shapes::slab(80.0, 50.0, 8.0, 32, 20);
    let mut b = Builder::new(&mesh);
    let d1 = b.part("D1", "LED", [0.0, 0.0]);
    let r1 = b.part("R1", "RES", [20.0, 0.0]);
    b.net("LED_R", Terminal::pin(d1, 1), Terminal::pin(r1, 0));
    b.place(d1, Vec3::new(22.0, 25.0, 8.0), Vec3::x());
    b.place(r1, Vec3::new(52.0, 25.0, 8.0), Vec3::x());
    let document = b.finish("plane.stl");
    Fixture { mesh, document }
}

/// Two probe points on exactly opposite vertices of a 50 mm icosphere. The route between
/// them has no preferred direction, so it fails until a waypoint is added.
pub fn sphere_antipodal() -> Fixture {
    let mesh = shapes::icosphere(50.0, 3);
    let (v, w) = antipodal_vertices(&mesh);
    let mut b = Builder::new(&mesh);
    let a = b.part("TP1", "TP", [0.0, 0.0]);
    let c = b.part("TP2", "TP", [10.0, 0.0]);
    b.net("POLE", Terminal::pin(a, 0), Terminal::pin(c, 0));
    let pa = vertex_point(&mesh, v);
    let pc = vertex_point(&mesh, w);
    b.place_at(a, pa, Vec3::x());
    b.place_at(c, pc, Vec3::x());
    let document = b.finish("sphere.stl");
    Fixture { mesh, document }
}

/// The vertex nearest +z and its mirror image.
pub fn antipodal_vertices(mesh: &TriMesh) -> (usize, usize) {
    let vs = mesh.vertices();
    let v = (0..vs.len()).max_by(|&i, &j| vs[i].z.total_cmp(&vs[j].z)).expect("mesh has vertices");
    let w = (0..vs.len())
        .min_by(|&i, &j| (vs[i] + vs[v]).norm().total_cmp(&(vs[j] + vs[v]).norm()))
        .expect("mesh has vertices");
    (v, w)
}

/// The surface point sitting exactly on vertex `v`.
pub fn vertex_point(mesh: &TriMesh, v: usize) -> SurfacePoint {
    let f = mesh.vertex_faces(v)[0];
    let k = mesh.faces()[f].iter().position(|&x| x == v).expect("vertex in face");
    let mut bary = [0.0; 3];
    bary[k] = 1.0;
    SurfacePoint::new(f, bary)
}

/// A cone "tree" of about 10k triangles carrying a 9 V battery clip and ten
/// resistor/LED pairs on a spiral: 21 parts and 20 two-terminal nets. The chain starts at
/// the clip's `+` pad; the return from the last cathode to `-` is the clip's flying lead.
pub fn christmas_tree() -> Fixture {
    let mesh = shapes::tree(60.0, 150.0, 50, 100);
    let radius = |z: f64| 60.0 * (1.0 - z / 150.0);
    let mut b = Builder::new(&mesh);

    let mut parts = vec![b.part("BT1", "BATTERY", [0.0, 0.0])];
    for i in 1..=10 {
        let x = 20.0 * i as f64;
        parts.push(b.part(&format!("R{i}"), "RES", [x, 0.0]));
        parts.push(b.part(&format!("D{i}"), "LED", [x, 10.0]));
    }
    // Each part's pin 1 feeds the next part's pin 0.
    for (k, w) in parts.windows(2).enumerate() {
        let name = if k == 0 { "VBAT".to_string() } else { format!("N{k}") };
        let from = if k == 0 { 0 } else { 1 };
        b.net(&name, Terminal::pin(w[0], from), Terminal::pin(w[1], 0));
    }

    // Spiral upward with about 18 mm between part centers.
    let mut centers = Vec::with_capacity(parts.len());
    let (mut phi, mut z) = (0.0f64, 20.0);
    for _ in 0..parts.len() {
        let r = radius(z);
        centers.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
        phi += 18.0 / r;
        z += 4.0;
    }
    for (k, &part) in parts.iter().enumerate() {
        let along = if k + 1 < centers.len() {
            centers[k + 1] - centers[k]
        } else {
            centers[k] - centers[k - 1]
        };
        // The battery sits backwards so that its + pad faces the chain.
        let along = if k == 0 { -along } else { along };
        b.place(part, centers[k], along);
    }
    let document = b.finish("tree.stl");
    Fixture { mesh, document }
}
