use coppertrace_core::electrical::{trace_resistance, ConductorSpec, Length};
use coppertrace_core::engrave::ChannelProfile;
use coppertrace_core::mesh::{load_mesh, save_mesh, shapes, MeshFormat};
use coppertrace_core::routing::walk_on_surface;
use coppertrace_core::schematic::{library, Schematic};
use coppertrace_core::{route_trace, NormalMode, RoutingParams, SurfacePoint, TangentVector, Terminal, TriMesh, Vec3};
use proptest::prelude::*;
use std::sync::OnceLock;

fn sphere() -> &'static TriMesh {
    static MESH: OnceLock<TriMesh> = OnceLock::new();
    MESH.get_or_init(|| shapes::icosphere(50.0, 3))
}

fn tree() -> &'static TriMesh {
    static MESH: OnceLock<TriMesh> = OnceLock::new();
    MESH.get_or_init(|| shapes::tree(60.0, 150.0, 20, 40))
}

fn bary() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| {
        let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
        [a, b, 1.0 - a - b]
    })
}

fn point_on(mesh: &'static TriMesh) -> impl Strategy<Value = SurfacePoint> {
    (0..mesh.face_count(), bary()).prop_map(|(f, w)| SurfacePoint::new(f, w))
}

fn direction() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-zero", |(x, y, z)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embed_lies_on_its_face(p in point_on(tree())) {
        let m = tree();
        let x = m.embed(&p).unwrap();
        let [a, _, _] = m.corners(p.face);
        prop_assert!((x - a).dot(&m.face_normal(p.face)).abs() < 1e-6);
    }

    #[test]
    fn tangent_is_unit_and_in_plane(p in point_on(sphere()), d in direction(), face_mode in any::<bool>()) {
        let m = sphere();
        let mode = if face_mode { NormalMode::Face } else { NormalMode::Vertex };
        let target = m.embed(&p).unwrap() + d * 20.0;
        if let Ok(t) = m.project_to_tangent(&p, &target, mode) {
            prop_assert!((t.dir.norm() - 1.0).abs() < 1e-9);
            prop_assert!(t.dir.dot(&m.face_normal(t.face)).abs() < 1e-9);
        }
    }

    #[test]
    fn planar_tangent_is_the_chord_direction(x in 1.0f64..99.0, y in 1.0f64..99.0, tx in 0.0f64..100.0, ty in 0.0f64..100.0) {
        let m = shapes::plane_grid(100.0, 100.0, 10, 10);
        let p = m.closest_point(&Vec3::new(x, y, 0.0));
        let target = Vec3::new(tx, ty, 0.0);
        prop_assume!((target - Vec3::new(x, y, 0.0)).norm() > 1e-3);
        let t = m.project_to_tangent(&p, &target, NormalMode::Vertex).unwrap();
        let expect = (target - m.embed(&p).unwrap()).normalize();
        prop_assert!((t.dir - expect).norm() < 1e-9);
    }

    #[test]
    fn walk_keeps_unit_direction(p in point_on(sphere()), d in direction(), dist in 1.0f64..300.0) {
        let m = sphere();
        let target = m.embed(&p).unwrap() + d * 20.0;
        let Ok(tv) = m.project_to_tangent(&p, &target, NormalMode::Face) else { return Ok(()) };
        let w = walk_on_surface(m, &p, &TangentVector { face: tv.face, dir: tv.dir }, dist).unwrap();
        prop_assert!((w.dir.dir.norm() - 1.0).abs() < 1e-9);
        prop_assert!(m.contains(&w.end));
    }

    #[test]
    fn route_length_is_symmetric(p in point_on(sphere()), q in point_on(sphere())) {
        let m = sphere();
        let params = RoutingParams::default();
        let ab = route_trace(m, &p, &q, &params).unwrap();
        let ba = route_trace(m, &q, &p, &params).unwrap();
        prop_assert_eq!(ab.is_routed(), ba.is_routed());
        if ab.is_routed() && ab.length > 0.0 {
            prop_assert!((ab.length - ba.length).abs() <= 1e-6 * ab.length, "{} vs {}", ab.length, ba.length);
        }
        for s in &ab.samples {
            prop_assert!(s.is_normalized() && m.contains(s));
        }
        // Same inputs, same answer.
        prop_assert_eq!(&route_trace(m, &p, &q, &params).unwrap(), &ab);
    }

    #[test]
    fn plane_routes_are_near_straight(a in (0.0f64..60.0, 0.0f64..40.0), b in (0.0f64..60.0, 0.0f64..40.0)) {
        let m = shapes::plane_grid(60.0, 40.0, 13, 7);
        let (pa, pb) = (Vec3::new(a.0, a.1, 0.0), Vec3::new(b.0, b.1, 0.0));
        let t = route_trace(&m, &m.closest_point(&pa), &m.closest_point(&pb), &RoutingParams::default()).unwrap();
        prop_assert!(t.is_routed());
        prop_assert!(t.length <= 1.005 * (pa - pb).norm() + 1e-9);
    }

    #[test]
    fn resistance_scales_with_length_and_area(len in 0.1f64..500.0, k in 0.1f64..10.0, rho in 0.01f64..10.0, area in 0.001f64..10.0) {
        let spec = |a: f64| ConductorSpec::Volumetric { resistivity_ohm_cm: rho, cross_section_cm2: a };
        let r = trace_resistance(Length::from_cm(len), &spec(area)).unwrap().value();
        let longer = trace_resistance(Length::from_cm(len * k), &spec(area)).unwrap().value();
        let wider = trace_resistance(Length::from_cm(len), &spec(area * k)).unwrap().value();
        prop_assert!((longer - k * r).abs() <= 1e-12 * longer);
        prop_assert!((wider - r / k).abs() <= 1e-12 * r);
        prop_assert!((r - rho * len / area).abs() <= 1e-12 * r);
    }

    #[test]
    fn linear_units_agree(ohm_per_m in 0.001f64..100.0, mm in 0.1f64..5000.0) {
        let per_m = ConductorSpec::Linear { ohm_per_m };
        let per_cm = ConductorSpec::linear_per_cm(ohm_per_m / 100.0);
        let a = trace_resistance(Length::from_mm(mm), &per_m).unwrap().value();
        let b = trace_resistance(Length::from_mm(mm), &per_cm).unwrap().value();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn channel_depth_is_monotone_and_bounded(d0 in 0.0f64..3.0, step in 0.0f64..1.0, width in 0.5f64..2.5, depth in 0.1f64..3.0) {
        let p = ChannelProfile { channel_width: width, channel_depth: depth, ..Default::default() };
        prop_assert!(p.depth_at(d0 + step) <= p.depth_at(d0));
        prop_assert!(p.depth_at(d0) <= depth && p.depth_at(d0) >= 0.0);
        prop_assert_eq!(p.depth_at(p.reach()), 0.0);
    }
}

#[derive(Clone, Debug)]
enum Edit {
    AddNet(usize, usize),
    Connect(usize, usize),
    Junction(usize),
    DeleteJunction(usize),
    Reconnect(usize, usize, usize),
    RemovePart(usize),
}

fn edit() -> impl Strategy<Value = Edit> {
    prop_oneof![
        (0..32usize, 0..32usize).prop_map(|(a, b)| Edit::AddNet(a, b)),
        (0..32usize, 0..32usize).prop_map(|(a, b)| Edit::Connect(a, b)),
        (0..64usize).prop_map(Edit::Junction),
        (0..64usize).prop_map(Edit::DeleteJunction),
        (0..64usize, 0..40usize, 0..40usize).prop_map(|(e, a, b)| Edit::Reconnect(e, a, b)),
        (0..8usize).prop_map(Edit::RemovePart),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn nets_stay_spanning_trees(edits in prop::collection::vec(edit(), 1..40)) {
        let mut s = Schematic::new();
        let parts: Vec<_> = (0..8)
            .map(|i| s.add_part(&format!("U{i}"), library::dip(8), [i as f64, 0.0]).unwrap())
            .collect();
        let pin = |i: usize| Terminal::pin(parts[(i / 8) % parts.len()], i % 8);
        for e in edits {
            // Failed edits must leave the schematic valid too.
            let _ = match e {
                Edit::AddNet(a, b) => s.add_net("n", pin(a), pin(b)).map(|_| ()),
                Edit::Connect(a, b) => match s.net_of(&pin(b)) {
                    Some(net) => s.connect(net, pin(a), pin(b)).map(|_| ()),
                    None => Ok(()),
                },
                Edit::Junction(k) => {
                    let edges: Vec<_> = s.edges().map(|(n, e)| (n, e.id)).collect();
                    match edges.get(k % edges.len().max(1)) {
                        Some(&(n, e)) => s.add_junction(n, e, [0.0, 0.0]).map(|_| ()),
                        None => Ok(()),
                    }
                }
                Edit::DeleteJunction(k) => {
                    let js: Vec<_> = s.junctions.iter().map(|j| (j.net, j.id)).collect();
                    match js.get(k % js.len().max(1)) {
                        Some(&(n, j)) => s.delete_junction(n, j).map(|_| ()),
                        None => Ok(()),
                    }
                }
                Edit::Reconnect(k, a, b) => {
                    let edges: Vec<_> = s.edges().map(|(n, e)| (n, e.id)).collect();
                    match edges.get(k % edges.len().max(1)) {
                        Some(&(n, e)) => s.reconnect(n, e, pin(a), pin(b)).map(|_| ()),
                        None => Ok(()),
                    }
                }
                Edit::RemovePart(i) => {
                    let id = parts[i];
                    if s.part(id).is_some() { s.remove_part(id) } else { Ok(()) }
                }
            };
            prop_assert!(s.validate().is_ok(), "{:?}", s.validate());
            for net in &s.nets {
                prop_assert!(net.is_spanning_tree());
            }
        }
        let text = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(serde_json::from_str::<Schematic>(&text).unwrap(), s);
    }

    #[test]
    fn mesh_round_trip_keeps_counts_and_orientation(sub in 0u32..3, obj in any::<bool>()) {
        let m = shapes::icosphere(10.0, sub);
        let fmt = if obj { MeshFormat::Obj } else { MeshFormat::Stl };
        let back = load_mesh(&save_mesh(&m, fmt).unwrap()).unwrap();
        prop_assert_eq!(back.vertex_count(), m.vertex_count());
        prop_assert_eq!(back.face_count(), m.face_count());
        prop_assert!((back.signed_volume() - m.signed_volume()).abs() < 1e-3 * m.signed_volume());
    }
}

#[test]
fn library_pads_sit_on_the_pitch_grid() {
    for name in library::NAMES {
        let def = library::by_name(name).unwrap();
        let pads = &def.footprint.pads;
        for (i, a) in pads.iter().enumerate() {
            for b in &pads[i + 1..] {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!(d >= library::PITCH - 1e-9, "{name}: pads {d} mm apart");
            }
        }
    }
}
