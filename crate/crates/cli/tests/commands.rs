use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coppertrace_core::document::{EditOp, PartSpec};
use coppertrace_core::mesh::{load_mesh, read_mesh_file, shapes, write_mesh_file, LoadOptions, MeshFormat};
use coppertrace_core::{Document, Terminal, Vec3};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coppertrace"))
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut c = bin();
    for a in args {
        c.arg(a);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn demo() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let o = run(&[&"demo", &dir.path()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = dir.path().to_path_buf();
    (dir, p)
}

fn files(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.json")), dir.join(format!("{name}.stl")))
}

#[test]
fn route_plane_is_clean_and_repeatable() {
    let (_t, dir) = demo();
    let (design, mesh) = files(&dir, "plane");
    let (a, b) = (dir.join("a.json"), dir.join("b.json"));
    let first = run(&[&"route", &design, &mesh, &"-o", &a]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert!(stdout(&first).contains("routed 1  failed 0"));
    let second = run(&[&"route", &design, &mesh, &"-o", &b]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn antipodal_route_fails_with_endpoints() {
    let (_t, dir) = demo();
    let (design, mesh) = files(&dir, "sphere");
    let o = run(&[&"route", &design, &mesh]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("failed 1"), "{text}");
    assert!(text.contains("degenerate_direction from (0.000, 0.000, 50.000) to (0.000, 0.000, -50.000)"), "{text}");
}

#[test]
fn print_plane_writes_a_printable_stl() {
    let (_t, dir) = demo();
    let (design, mesh) = files(&dir, "plane");
    let out = dir.join("out.stl");
    let o = run(&[&"print", &design, &mesh, &"-o", &out]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("printable yes"));
    let input = read_mesh_file(&mesh, &LoadOptions::default()).unwrap();
    let printed = load_mesh(&std::fs::read(&out).unwrap()).unwrap();
    assert!(printed.is_closed());
    assert!(printed.face_count() > input.face_count());
    assert!(printed.signed_volume() < input.signed_volume());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out.stl.report.json")).unwrap()).unwrap();
    assert_eq!(report["validation"]["boundary_edges"], 0);
    assert_eq!(report["holes"].as_array().unwrap().len(), 4);

    let again = dir.join("again.stl");
    run(&[&"print", &design, &mesh, &"-o", &again]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn failed_design_is_refused_unless_forced() {
    let (_t, dir) = demo();
    let (design, mesh) = files(&dir, "sphere");
    let out = dir.join("s.stl");
    let o = run(&[&"print", &design, &mesh, &"-o", &out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("refusing to print"));
    assert!(!out.exists());
    let o = run(&[&"print", &design, &mesh, &"-o", &out, &"--force"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("warning: forced past"));
    assert!(out.exists());
}

/// Two nets 0.5 mm apart on a slab: routes fine, breaks clearance.
fn crowded(dir: &Path) -> (PathBuf, PathBuf) {
    let mesh = shapes::slab(40.0, 30.0, 6.0, 20, 15);
    let mut doc = Document::new(&mesh);
    let mut ids = Vec::new();
    for (i, (x, y)) in [(5.0, 15.0), (35.0, 15.0), (5.0, 15.5), (35.0, 15.5)].into_iter().enumerate() {
        let id = doc
            .apply(&mesh, EditOp::AddPart { reference: format!("TP{i}"), part: PartSpec::Library("TP".into()), position: [x, y] })
            .unwrap()
            .part
            .unwrap();
        let anchor = mesh.closest_point(&Vec3::new(x, y, 6.0));
        doc.apply(&mesh, EditOp::PlacePart { part: id, anchor, rotation: 0.0 }).unwrap();
        ids.push(id);
    }
    for (name, a, b) in [("A", ids[0], ids[1]), ("B", ids[2], ids[3])] {
        doc.apply(&mesh, EditOp::AddNet { name: name.into(), a: Terminal::pin(a, 0), b: Terminal::pin(b, 0) })
            .unwrap();
    }
    let (d, m) = (dir.join("crowded.json"), dir.join("crowded.stl"));
    std::fs::write(&d, doc.design.to_json()).unwrap();
    write_mesh_file(&mesh, &m, MeshFormat::Stl).unwrap();
    (d, m)
}

#[test]
fn clearance_violations_are_listed() {
    let t = TempDir::new().unwrap();
    let (design, mesh) = crowded(t.path());
    let out = t.path().join("c.stl");
    let o = run(&[&"print", &design, &mesh, &"-o", &out]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("clearance trace"), "{err}");
    assert!(err.contains("pad TP0.0") || err.contains("pad TP2.0"), "{err}");
}

#[test]
fn report_lists_one_row_per_trace() {
    let (_t, dir) = demo();
    let (design, mesh) = files(&dir, "tree");
    let o = run(&[&"report", &design, &mesh, &"--current", &"2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with('E')).collect();
    assert_eq!(rows.len(), 20, "{text}");
    let col = |l: &str, i: usize| l.split_whitespace().nth(i).unwrap().parse::<f64>().unwrap();
    let sum: f64 = rows.iter().map(|l| col(l, 2)).sum();
    let total = text.lines().find(|l| l.starts_with("total")).unwrap();
    assert!((col(total, 1) - sum).abs() < 0.011, "{total}");
    // 0.5 ohm/m copper: resistance column is length / 2000.
    for l in rows {
        assert!((col(l, 3) - col(l, 2) / 2000.0).abs() < 1e-5);
    }
}

#[test]
fn input_errors_exit_with_two() {
    let (_t, dir) = demo();
    let (design, mesh) = files(&dir, "plane");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&[&"route", &bad, &mesh]).status.code(), Some(2));

    let text = std::fs::read_to_string(&design).unwrap().replacen("\"version\": 1", "\"version\": 99", 1);
    std::fs::write(&bad, text).unwrap();
    let o = run(&[&"route", &bad, &mesh]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("version 99"));

    let (_, sphere) = files(&dir, "sphere");
    let o = run(&[&"route", &design, &sphere]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("expects a mesh"), "{}", stderr(&o));

    assert_eq!(run(&[&"route", &design]).status.code(), Some(2));
}
