//! End-to-end acceptance checks. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use coppertrace_core::document::{EditOp, PartSpec};
use coppertrace_core::electrical::{
    equivalent_cross_section, trace_resistance, voltage_drop, Amperes, ConductorSpec, Length,
    CONDUCTIVE_FILAMENT_OHM_CM, COPPER_TAPE_OHM_PER_M,
};
use coppertrace_core::engrave::{
    drill_holes_at, engrave_channels, validate_printable, ChannelProfile, Hole, HoleOutcome, RIM_SEGMENTS,
};
use coppertrace_core::fixtures;
use coppertrace_core::layout::check_clearance;
use coppertrace_core::mesh::{save_mesh, shapes, MeshFormat};
use coppertrace_core::routing::geodesic_oracle;
use coppertrace_core::schematic::library;
use coppertrace_core::{
    route_trace, DesignFile, Document, PartId, RoutingParams, SurfacePolyline, Terminal, TriMesh, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn plane_geodesic_exactness() -> Outcome {
    let mesh = shapes::plane_grid(100.0, 100.0, 40, 40);
    let params = RoutingParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_ratio, mut worst_time) = (0.0f64, Duration::ZERO);
    let mut pairs = 0;
    while pairs < 100 {
        let a = Vec3::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), 0.0);
        let b = Vec3::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0), 0.0);
        let euclid = (a - b).norm();
        if euclid < 1.0 {
            continue;
        }
        pairs += 1;
        let (p, q) = (mesh.closest_point(&a), mesh.closest_point(&b));
        let start = Instant::now();
        let t = route_trace(&mesh, &p, &q, &params).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        ensure(t.is_routed(), || format!("pair {a:?} {b:?} failed: {:?}", t.status))?;
        let ratio = t.length / euclid;
        ensure(ratio <= 1.005, || format!("pair {a:?} {b:?}: length ratio {ratio:.5} > 1.005"))?;
        ensure(took < Duration::from_millis(10), || format!("pair {a:?} {b:?} took {:.2} ms", ms(took)))?;
        worst_ratio = worst_ratio.max(ratio);
        worst_time = worst_time.max(took);
    }
    Ok(format!(
        "100 pairs, worst length ratio {worst_ratio:.6} (<= 1.005), slowest {:.3} ms (< 10 ms)",
        ms(worst_time)
    ))
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn sphere_geodesic_accuracy() -> Outcome {
    const R: f64 = 50.0;
    let mesh = shapes::icosphere(R, 3);
    let params = RoutingParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut worst_err, mut worst_oracle) = (0.0f64, f64::INFINITY);
    let mut pairs = 0;
    while pairs < 100 {
        let (u, w) = (random_unit(&mut rng), random_unit(&mut rng));
        // Keep clear of coincident and near-antipodal pairs.
        let angle = u.dot(&w).clamp(-1.0, 1.0).acos();
        if !(0.05..=PI - 0.35).contains(&angle) {
            continue;
        }
        pairs += 1;
        let (p, q) = (mesh.closest_point(&(u * R)), mesh.closest_point(&(w * R)));
        let t = route_trace(&mesh, &p, &q, &params).map_err(|e| e.to_string())?;
        ensure(t.is_routed(), || format!("pair at angle {angle:.3} failed: {:?}", t.status))?;
        let (pa, pb) = (mesh.embed(&p).unwrap(), mesh.embed(&q).unwrap());
        let exact = common::great_circle(R, &pa, &pb);
        let err = (t.length - exact).abs() / exact;
        ensure(err <= 0.02, || format!("pair at angle {angle:.3}: {:.4} vs great circle {exact:.4}", t.length))?;
        let oracle = geodesic_oracle(&mesh, &p, &q, 8).map_err(|e| e.to_string())?;
        let ratio = t.length / oracle.length;
        ensure(ratio >= 0.98, || format!("pair at angle {angle:.3}: {ratio:.4} x oracle"))?;
        worst_err = worst_err.max(err);
        worst_oracle = worst_oracle.min(ratio);
    }
    Ok(format!(
        "100 pairs on R=50 icosphere(3), worst great-circle error {:.3}% (<= 2%), min length/oracle(8) {worst_oracle:.4} (>= 0.98)",
        worst_err * 100.0
    ))
}

fn failure_detection() -> Outcome {
    let first = fixtures::sphere_antipodal();
    let again = fixtures::sphere_antipodal();
    let (mesh, mut doc) = (first.mesh, first.document);
    let failed = doc.layout().failed_edges();
    ensure(failed.len() == 1, || format!("expected one failed edge, got {failed:?}"))?;
    let edge = failed[0];
    let status = doc.layout().traces[&edge].segments[0].status.clone();
    ensure(doc.layout().traces == again.document.layout().traces, || "repeat build differs".into())?;
    let equator = mesh.closest_point(&Vec3::new(50.0, 0.0, 0.0));
    doc.apply(&mesh, EditOp::AddWaypoint { edge, point: equator, index: None })
        .map_err(|e| e.to_string())?;
    let segs = &doc.layout().traces[&edge].segments;
    ensure(segs.len() == 2 && segs.iter().all(SurfacePolyline::is_routed), || {
        format!("after waypoint: {:?}", segs.iter().map(|s| &s.status).collect::<Vec<_>>())
    })?;
    let reason = match status {
        coppertrace_core::TraceStatus::Failed { reason, .. } => format!("{reason:?}"),
        _ => unreachable!(),
    };
    Ok(format!(
        "antipodal pair fails ({reason}) identically on rebuild; one equatorial waypoint gives 2 routed halves ({:.2} + {:.2} mm)",
        segs[0].length, segs[1].length
    ))
}

fn within(value: f64, expected: f64, rel: f64) -> bool {
    (value - expected).abs() <= rel * expected.abs()
}

fn resistance_regression() -> Outcome {
    let area = equivalent_cross_section(CONDUCTIVE_FILAMENT_OHM_CM, COPPER_TAPE_OHM_PER_M).map_err(|e| e.to_string())?;
    ensure(within(area, 120.0, 0.01), || format!("equivalent area {area} cm2"))?;
    let filament = ConductorSpec::Volumetric {
        resistivity_ohm_cm: CONDUCTIVE_FILAMENT_OHM_CM,
        cross_section_cm2: 0.15 * 0.15,
    };
    let r = trace_resistance(Length::from_cm(20.0), &filament).map_err(|e| e.to_string())?.value();
    ensure(within(r, 533.0, 0.01) && r > 500.0, || format!("filament trace {r} ohm"))?;
    let v = voltage_drop(coppertrace_core::electrical::Ohms(r), Amperes::from_milliamps(2.0))
        .map_err(|e| e.to_string())?
        .value();
    ensure(within(v, 1.07, 0.01) && v > 1.0, || format!("drop {v} V"))?;
    Ok(format!("area {area:.2} cm2, filament 20 cm {r:.1} ohm, drop at 2 mA {v:.4} V"))
}

/// Pad centers of a DIP-8 footprint at `center` on a flat top, axis +z.
fn dip8_holes(center: Vec3) -> Vec<Hole> {
    library::dip(8)
        .footprint
        .pads
        .iter()
        .map(|[x, y]| Hole {
            center: center + Vec3::new(*x, *y, 0.0),
            axis: Vec3::z(),
        })
        .collect()
}

fn engraving_integrity() -> Outcome {
    const TOP: f64 = 10.0;
    let mesh = shapes::slab(100.0, 80.0, TOP, 250, 200);
    ensure(mesh.face_count() >= 100_000, || format!("{} faces", mesh.face_count()))?;
    let profile = ChannelProfile::default();
    let p = mesh.closest_point(&Vec3::new(10.0, 60.0, TOP));
    let q = mesh.closest_point(&Vec3::new(90.0, 60.0, TOP));
    let trace = route_trace(&mesh, &p, &q, &RoutingParams::default()).map_err(|e| e.to_string())?;
    ensure(trace.is_routed(), || "straight trace failed".into())?;
    let holes = dip8_holes(Vec3::new(50.0, 25.0, TOP));

    let start = Instant::now();
    let carved = engrave_channels(&mesh, &[trace], &profile).map_err(|e| e.to_string())?;
    let drilled = drill_holes_at(&carved.mesh, &holes, &profile).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("engraving took {:.2} s", took.as_secs_f64()))?;
    ensure(drilled.holes.iter().all(|h| h.outcome == HoleOutcome::Blind), || format!("{:?}", drilled.holes))?;

    let report = validate_printable(&drilled.mesh);
    ensure(report.watertight(), || format!("not watertight: {report:?}"))?;
    ensure(report.manifold(), || format!("not manifold: {report:?}"))?;
    ensure(report.self_intersections == 0, || format!("self-intersections: {report:?}"))?;
    ensure(report.outward(), || format!("inverted: {report:?}"))?;

    let slice = common::slice_x(&drilled.mesh, 30.0);
    let groove = common::measure_groove(&slice, TOP, (55.0, 65.0)).ok_or("slice misses the channel")?;
    ensure((groove.depth - 1.0).abs() <= 0.05, || format!("channel depth {:.4}", groove.depth))?;
    ensure((groove.width - 1.7).abs() <= 0.1, || format!("channel width {:.4}", groove.width))?;

    let nominal = PI * (profile.hole_diameter / 2.0).powi(2) * profile.hole_depth;
    let mut worst = 0.0f64;
    for h in &holes {
        let one = drill_holes_at(&carved.mesh, std::slice::from_ref(h), &profile).map_err(|e| e.to_string())?;
        let lost = carved.mesh.signed_volume() - one.mesh.signed_volume();
        let err = (lost - nominal).abs() / nominal;
        ensure(err <= 0.05, || format!("hole at {:?} removed {lost:.4} mm3 vs {nominal:.4}", h.center))?;
        worst = worst.max(err);
    }
    Ok(format!(
        "{} faces in {:.2} s (< 10 s); printable; depth {:.4} mm, width {:.4} mm; 8 blind holes, worst volume error {:.2}% (<= 5%, {RIM_SEGMENTS}-gon)",
        mesh.face_count(),
        took.as_secs_f64(),
        groove.depth,
        groove.width,
        worst * 100.0
    ))
}

/// Two test-point pairs joined by parallel nets `pitch` apart on a slab.
fn parallel_nets(mesh: &TriMesh, pitch: f64, top: f64) -> Result<Document, String> {
    let mut doc = Document::new(mesh);
    let part = |doc: &mut Document, name: &str, at: Vec3| -> Result<PartId, String> {
        let id = doc
            .apply(mesh, EditOp::AddPart { reference: name.into(), part: PartSpec::Library("TP".into()), position: [at.x, at.y] })
            .map_err(|e| e.to_string())?
            .part
            .ok_or("no part id")?;
        doc.apply(mesh, EditOp::PlacePart { part: id, anchor: mesh.closest_point(&at), rotation: 0.0 })
            .map_err(|e| e.to_string())?;
        Ok(id)
    };
    let y0 = 20.0;
    let a0 = part(&mut doc, "TP1", Vec3::new(10.0, y0, top))?;
    let a1 = part(&mut doc, "TP2", Vec3::new(50.0, y0, top))?;
    let b0 = part(&mut doc, "TP3", Vec3::new(10.0, y0 + pitch, top))?;
    let b1 = part(&mut doc, "TP4", Vec3::new(50.0, y0 + pitch, top))?;
    for (name, a, b) in [("A", a0, a1), ("B", b0, b1)] {
        doc.apply(mesh, EditOp::AddNet { name: name.into(), a: Terminal::pin(a, 0), b: Terminal::pin(b, 0) })
            .map_err(|e| e.to_string())?;
    }
    ensure(doc.layout().failed_edges().is_empty() && doc.layout().traces.len() == 2, || "parallel traces did not route".into())?;
    Ok(doc)
}

fn pitch_isolation() -> Outcome {
    const TOP: f64 = 8.0;
    let mesh = shapes::slab(60.0, 40.0, TOP, 60, 40);
    let profile = ChannelProfile::default();

    let wide = parallel_nets(&mesh, 2.54, TOP)?;
    ensure(wide.layout().clearance == 1.0, || "default clearance is not 1.0 mm".into())?;
    let v = check_clearance(&mesh, wide.schematic(), wide.layout()).map_err(|e| e.to_string())?;
    ensure(v.is_empty(), || format!("2.54 mm pitch violates clearance: {v:?}"))?;
    let traces: Vec<SurfacePolyline> = wide.layout().traces.values().flat_map(|t| t.segments.clone()).collect();
    let carved = engrave_channels(&mesh, &traces, &profile).map_err(|e| e.to_string())?;
    let half = profile.channel_width / 2.0;
    let (lo, hi) = (20.0 + half, 22.54 - half);
    let ridge: Vec<&Vec3> = carved
        .mesh
        .vertices()
        .iter()
        .filter(|v| v.z > TOP - 2.0 && v.x > 15.0 && v.x < 45.0 && v.y > lo + 1e-6 && v.y < hi - 1e-6)
        .collect();
    ensure(!ridge.is_empty(), || "no vertices between the channels".into())?;
    ensure(ridge.iter().all(|v| v.z == TOP), || "ridge vertices were displaced".into())?;
    let slice = common::slice_x(&carved.mesh, 30.0);
    let ridge_top = slice
        .iter()
        .flatten()
        .filter(|(y, _)| *y > lo + 0.05 && *y < hi - 0.05)
        .all(|(_, z)| (*z - TOP).abs() < 1e-12);
    ensure(ridge_top, || "slice dips between the channels".into())?;

    let narrow = parallel_nets(&mesh, 0.5, TOP)?;
    let v = check_clearance(&mesh, narrow.schematic(), narrow.layout()).map_err(|e| e.to_string())?;
    ensure(!v.is_empty(), || "0.5 mm pitch passed clearance".into())?;
    let closest = v.iter().map(|x| x.distance).fold(f64::INFINITY, f64::min);
    Ok(format!(
        "2.54 mm: clean at 1.0 mm clearance, {} ridge vertices untouched; 0.5 mm: {} violations (closest {closest:.3} mm)",
        ridge.len(),
        v.len()
    ))
}

fn mixed_edits(mesh: &TriMesh) -> Result<Document, String> {
    let top = 8.0;
    let mut doc = Document::new(mesh);
    let apply = |doc: &mut Document, op: EditOp| doc.apply(mesh, op).map_err(|e| e.to_string());
    let at = |x: f64, y: f64| mesh.closest_point(&Vec3::new(x, y, top));
    let add = |reference: &str, kind: &str, x: f64| EditOp::AddPart {
        reference: reference.into(),
        part: PartSpec::Library(kind.into()),
        position: [x, 0.0],
    };
    let u1 = apply(&mut doc, add("U1", "DIP-8", 0.0))?.part.unwrap();
    let r1 = apply(&mut doc, add("R1", "RES", 20.0))?.part.unwrap();
    let d1 = apply(&mut doc, add("D1", "LED", 40.0))?.part.unwrap();
    let c1 = apply(&mut doc, add("C1", "CAP", 60.0))?.part.unwrap();
    apply(&mut doc, EditOp::PlacePart { part: u1, anchor: at(20.0, 30.0), rotation: 0.0 })?;
    apply(&mut doc, EditOp::PlacePart { part: r1, anchor: at(45.0, 40.0), rotation: 0.3 })?;
    apply(&mut doc, EditOp::PlacePart { part: d1, anchor: at(60.0, 20.0), rotation: 1.2 })?;
    let n1 = apply(&mut doc, EditOp::AddNet { name: "SIG".into(), a: Terminal::pin(u1, 0), b: Terminal::pin(r1, 0) })?;
    let (net, e1) = (n1.net.unwrap(), n1.added[0]);
    apply(&mut doc, EditOp::Connect { net, pin: Terminal::pin(d1, 0), to: Terminal::pin(r1, 0) })?;
    let n2 = apply(&mut doc, EditOp::AddNet { name: "GND".into(), a: Terminal::pin(u1, 3), b: Terminal::pin(d1, 1) })?;
    apply(&mut doc, EditOp::RenameNet { net: n2.net.unwrap(), name: "VSS".into() })?;
    apply(&mut doc, EditOp::MoveSymbol { part: c1, position: [65.0, 12.0] })?;
    apply(&mut doc, EditOp::DragPart { part: r1, anchor: at(48.0, 44.0) })?;
    apply(&mut doc, EditOp::RotatePart { part: d1, angle: -0.4 })?;
    apply(&mut doc, EditOp::AddWaypoint { edge: e1, point: at(30.0, 45.0), index: None })?;
    apply(&mut doc, EditOp::AddWaypoint { edge: e1, point: at(38.0, 48.0), index: None })?;
    apply(&mut doc, EditOp::DeleteWaypoint { edge: e1, index: 0 })?;
    let j = apply(&mut doc, EditOp::AddJunction { net, edge: e1, position: [10.0, 10.0], point: None })?
        .junction
        .unwrap();
    apply(&mut doc, EditOp::MoveJunction { junction: j, point: at(33.0, 38.0) })?;
    apply(&mut doc, EditOp::PlacePart { part: c1, anchor: at(65.0, 45.0), rotation: 0.0 })?;
    apply(&mut doc, EditOp::Connect { net, pin: Terminal::pin(c1, 0), to: Terminal::junction(j) })?;
    apply(&mut doc, EditOp::SetClearance { clearance: 0.8 })?;
    apply(&mut doc, EditOp::RemovePart { part: c1 })?;
    apply(&mut doc, EditOp::RouteAll)?;
    Ok(doc)
}

fn document_determinism() -> Outcome {
    let mesh = shapes::slab(80.0, 60.0, 8.0, 40, 30);
    let doc = mixed_edits(&mesh)?;
    let ops = doc.design.history.clone();
    ensure(ops.len() >= 20, || format!("only {} edits", ops.len()))?;
    let replayed = Document::replay(&mesh, &doc.design, &ops).map_err(|e| e.to_string())?;
    ensure(replayed == doc, || "replayed document differs".into())?;
    ensure(replayed.layout().traces == doc.layout().traces, || "replayed traces differ".into())?;
    let text = doc.design.to_json();
    let parsed = DesignFile::from_json(&text).map_err(|e| e.to_string())?;
    ensure(parsed == doc.design, || "design file round trip differs".into())?;
    ensure(parsed.to_json() == text, || "re-serialized design text differs".into())?;
    let reopened = Document::open(&mesh, parsed).map_err(|e| e.to_string())?;
    ensure(reopened == doc, || "reopened document differs".into())?;
    Ok(format!(
        "{} edits replay to an identical document ({} traces); {} byte design file round-trips exactly",
        ops.len(),
        doc.layout().traces.len(),
        text.len()
    ))
}

fn desk_scale_end_to_end() -> Outcome {
    let start = Instant::now();
    let f = fixtures::christmas_tree();
    let (mesh, doc) = (&f.mesh, &f.document);
    let built = start.elapsed();
    let (sch, layout) = (doc.schematic(), doc.layout());
    ensure(mesh.face_count() >= 10_000, || format!("{} faces", mesh.face_count()))?;
    ensure(sch.parts.len() == 21 && sch.edge_count() == 20, || {
        format!("{} parts, {} edges", sch.parts.len(), sch.edge_count())
    })?;
    ensure(layout.is_complete(sch) && layout.failed_edges().is_empty(), || {
        format!("unrouted edges: {:?}", layout.failed_edges())
    })?;
    let violations = check_clearance(mesh, sch, layout).map_err(|e| e.to_string())?;
    ensure(violations.is_empty(), || format!("{} clearance violations", violations.len()))?;
    let result = doc.engrave(mesh).map_err(|e| e.to_string())?;
    let failed: Vec<_> = result.failed_holes().collect();
    ensure(failed.is_empty(), || format!("failed holes: {failed:?}"))?;
    let report = validate_printable(&result.mesh);
    ensure(report.is_printable(), || format!("not printable: {report:?}"))?;
    let stl = save_mesh(&result.mesh, MeshFormat::Stl).map_err(|e| e.to_string())?;
    let total = start.elapsed();
    ensure(total < Duration::from_secs(30), || format!("took {:.2} s", total.as_secs_f64()))?;
    Ok(format!(
        "{} faces, 21 parts, 20 routed traces, {} holes, printable, {} byte STL; total {:.2} s (< 30 s, layout {:.2} s)",
        mesh.face_count(),
        result.holes.len(),
        stl.len(),
        total.as_secs_f64(),
        built.as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("plane geodesic exactness", plane_geodesic_exactness),
        ("sphere geodesic accuracy", sphere_geodesic_accuracy),
        ("failure detection", failure_detection),
        ("resistance regression", resistance_regression),
        ("engraving integrity", engraving_integrity),
        ("pitch isolation", pitch_isolation),
        ("document determinism", document_determinism),
        ("desk-scale end-to-end", desk_scale_end_to_end),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
