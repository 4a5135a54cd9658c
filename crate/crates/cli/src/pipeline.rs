//! The batch commands. Each returns plain text for stdout plus a [`Status`]; nothing here
//! reads the clock, so output depends only on the input files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use coppertrace_core::electrical::{design_report, Amperes, ConductorSpec, DesignReport};
use coppertrace_core::engrave::{validate_printable, HoleOutcome, HoleReport, PrintReport, TraceReport};
use coppertrace_core::layout::{check_clearance, Element, Violation};
use coppertrace_core::mesh::{read_mesh_file, save_mesh, write_mesh_file, LoadOptions, MeshFormat};
use coppertrace_core::schematic::Schematic;
use coppertrace_core::{DesignFile, Document, EdgeId, FailureReason, TraceStatus, TriMesh, Vec3};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid input files. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// The design cannot be routed, printed or validated as asked. Exit code 1.
    #[error("{0}")]
    Refused(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Refused(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

fn input(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Finished, but something failed routing or validation.
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
        }
    }
}

pub struct Output {
    pub text: String,
    pub status: Status,
}

/// A design opened against its mesh.
pub struct Project {
    pub mesh: TriMesh,
    pub doc: Document,
}

impl Project {
    pub fn load(design: &Path, mesh: &Path) -> Result<Self, CliError> {
        let mesh = read_mesh_file(mesh, &LoadOptions::default()).map_err(|e| input(mesh.display(), e))?;
        let text = std::fs::read_to_string(design).map_err(|e| input(design.display(), e))?;
        let file = DesignFile::from_json(&text).map_err(|e| input(design.display(), e))?;
        let doc = Document::open(&mesh, file).map_err(|e| input(design.display(), e))?;
        Ok(Project { mesh, doc })
    }

    /// Routes every edge that has no trace yet.
    fn route_missing(&mut self) -> Result<(), CliError> {
        let d = &mut self.doc.design;
        d.layout.sync(&self.mesh, &d.schematic, &d.params).map_err(|e| input("routing", e))?;
        Ok(())
    }

    fn route_everything(&mut self) -> Result<(), CliError> {
        let d = &mut self.doc.design;
        d.layout.route_all(&self.mesh, &d.schematic, &d.params).map_err(|e| input("routing", e))?;
        Ok(())
    }
}

pub fn write_design(doc: &Document, path: &Path) -> Result<(), CliError> {
    let mut text = doc.design.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(|e| input(path.display(), e))
}

fn fmt_point(p: &Vec3) -> String {
    format!("({:.3}, {:.3}, {:.3})", p.x, p.y, p.z)
}

fn reason_name(r: FailureReason) -> &'static str {
    match r {
        FailureReason::DegenerateDirection => "degenerate_direction",
        FailureReason::MaxSteps => "max_steps",
        FailureReason::Boundary => "boundary",
        FailureReason::Join => "join",
    }
}

fn net_name(sch: &Schematic, edge: EdgeId) -> String {
    sch.edge(edge)
        .and_then(|(n, _)| sch.net(n))
        .map(|n| n.name.clone())
        .unwrap_or_default()
}

fn element_name(sch: &Schematic, e: &Element) -> String {
    match e {
        Element::Trace { edge } => format!("trace {edge} ({})", net_name(sch, *edge)),
        Element::Pad { part, pin } => {
            let reference = sch.part(*part).map(|p| p.reference.as_str()).unwrap_or("?");
            format!("pad {reference}.{pin}")
        }
    }
}

/// One line per failed stretch, naming the endpoints the router gave up between.
fn failure_lines(project: &Project) -> Vec<String> {
    let (sch, layout) = (project.doc.schematic(), project.doc.layout());
    let mut out = Vec::new();
    for (edge, trace) in &layout.traces {
        for seg in &trace.segments {
            if let TraceStatus::Failed { from, to, reason } = &seg.status {
                let (a, b) = (project.mesh.embed(from), project.mesh.embed(to));
                let (a, b) = (a.map(|p| fmt_point(&p)), b.map(|p| fmt_point(&p)));
                out.push(format!(
                    "failed {edge} ({}): {} from {} to {}",
                    net_name(sch, *edge),
                    reason_name(*reason),
                    a.unwrap_or_default(),
                    b.unwrap_or_default()
                ));
            }
        }
    }
    out
}

fn violation_lines(sch: &Schematic, clearance: f64, v: &[Violation]) -> Vec<String> {
    v.iter()
        .map(|x| {
            format!(
                "clearance {} and {}: {:.3} mm < {clearance:.3} mm at {}",
                element_name(sch, &x.a),
                element_name(sch, &x.b),
                x.distance,
                fmt_point(&x.point_a)
            )
        })
        .collect()
}

/// Routes every net edge and summarizes the result.
pub fn route(project: &mut Project, out: Option<&Path>) -> Result<Output, CliError> {
    project.route_everything()?;
    let (sch, layout) = (project.doc.schematic(), project.doc.layout());
    let mut text = String::new();
    writeln!(text, "{:<6} {:<12} {:<8} {:>10}", "edge", "net", "status", "length_mm").unwrap();
    for (_, e) in sch.edges() {
        let Some(t) = layout.traces.get(&e.id) else {
            writeln!(text, "{:<6} {:<12} {:<8} {:>10}", e.id.to_string(), net_name(sch, e.id), "unplaced", "-").unwrap();
            continue;
        };
        let (status, length) = if t.is_routed() {
            ("routed", format!("{:.3}", t.length()))
        } else {
            ("failed", "-".to_string())
        };
        writeln!(text, "{:<6} {:<12} {:<8} {:>10}", e.id.to_string(), net_name(sch, e.id), status, length).unwrap();
    }
    let failed = layout.failed_edges().len();
    let routed = layout.traces.len() - failed;
    let unplaced = sch.edge_count() - layout.traces.len();
    for line in failure_lines(project) {
        writeln!(text, "{line}").unwrap();
    }
    writeln!(text, "routed {routed}  failed {failed}  unplaced {unplaced}").unwrap();
    if let Some(path) = out {
        write_design(&project.doc, path)?;
    }
    let status = if failed == 0 { Status::Ok } else { Status::Failed };
    Ok(Output { text, status })
}

/// Everything written next to the STL.
#[derive(Serialize)]
pub struct PrintSummary {
    pub stl: PathBuf,
    pub forced: bool,
    pub warnings: Vec<String>,
    pub validation: PrintReport,
    pub traces: Vec<TraceReport>,
    pub holes: Vec<HoleReport>,
}

pub fn report_path(stl: &Path) -> PathBuf {
    let mut s = stl.as_os_str().to_owned();
    s.push(".report.json");
    PathBuf::from(s)
}

/// Engraves the design and writes `out` plus `<out>.report.json`. Refuses designs with
/// failed traces or clearance violations unless `force` is set.
pub fn print(project: &mut Project, out: &Path, force: bool) -> Result<(Output, PrintSummary), CliError> {
    project.route_missing()?;
    let (sch, layout) = (project.doc.schematic(), project.doc.layout());
    let violations = check_clearance(&project.mesh, sch, layout).map_err(|e| input("clearance", e))?;
    let mut problems = failure_lines(project);
    problems.extend(violation_lines(sch, layout.clearance, &violations));
    let unplaced: Vec<String> = sch
        .parts
        .iter()
        .filter(|p| !layout.placements.contains_key(&p.id))
        .map(|p| format!("unplaced part {}", p.reference))
        .collect();
    problems.extend(unplaced);
    if !problems.is_empty() && !force {
        let mut msg = String::from("refusing to print:\n");
        for p in &problems {
            writeln!(msg, "  {p}").unwrap();
        }
        msg.push_str("fix the design or pass --force");
        return Err(CliError::Refused(msg));
    }
    let warnings: Vec<String> = problems.iter().map(|p| format!("forced past: {p}")).collect();

    // Unplaced parts have no pins to drill; leave them out of the print.
    let mut printable = project.doc.clone();
    let placed = |id| printable.design.layout.placements.contains_key(&id);
    let dropped: Vec<_> = printable.design.schematic.parts.iter().map(|p| p.id).filter(|id| !placed(*id)).collect();
    for id in dropped {
        printable.design.schematic.remove_part(id).map_err(|e| input("print", e))?;
    }
    let result = printable.engrave(&project.mesh).map_err(|e| CliError::Refused(format!("engraving failed: {e}")))?;
    let validation = validate_printable(&result.mesh);
    let format = MeshFormat::from_path(out).unwrap_or(MeshFormat::Stl);
    write_mesh_file(&result.mesh, out, format).map_err(|e| input(out.display(), e))?;
    let summary = PrintSummary {
        stl: out.to_path_buf(),
        forced: !warnings.is_empty(),
        warnings,
        validation,
        traces: result.traces,
        holes: result.holes,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    let rp = report_path(out);
    std::fs::write(&rp, json).map_err(|e| input(rp.display(), e))?;

    let mut text = String::new();
    for w in &summary.warnings {
        writeln!(text, "warning: {w}").unwrap();
    }
    let v = &summary.validation;
    let failed_holes: Vec<&HoleReport> =
        summary.holes.iter().filter(|h| matches!(h.outcome, HoleOutcome::Failed { .. })).collect();
    for h in &failed_holes {
        if let HoleOutcome::Failed { reason } = &h.outcome {
            writeln!(text, "hole {} at {} failed: {reason}", h.hole, fmt_point(&h.center)).unwrap();
        }
    }
    let through = summary.holes.iter().filter(|h| h.outcome == HoleOutcome::Through).count();
    writeln!(
        text,
        "channels {}  holes {} ({} through, {} failed)",
        summary.traces.len(),
        summary.holes.len(),
        through,
        failed_holes.len()
    )
    .unwrap();
    writeln!(
        text,
        "boundary_edges {}  non_manifold_edges {}  non_manifold_vertices {}  self_intersections {}  volume {:.3}",
        v.boundary_edges, v.non_manifold_edges, v.non_manifold_vertices, v.self_intersections, v.signed_volume
    )
    .unwrap();
    writeln!(text, "printable {}", if v.is_printable() { "yes" } else { "no" }).unwrap();
    writeln!(text, "wrote {} and {}", out.display(), rp.display()).unwrap();
    let status = if v.is_printable() && failed_holes.is_empty() {
        Status::Ok
    } else {
        Status::Failed
    };
    Ok((Output { text, status }, summary))
}

/// Per-edge length, resistance and voltage drop for copper tape.
pub fn report(project: &mut Project, current_ma: f64) -> Result<(Output, DesignReport), CliError> {
    project.route_missing()?;
    let (sch, layout) = (project.doc.schematic(), project.doc.layout());
    let r = design_report(sch, layout, &ConductorSpec::copper_tape(), Amperes::from_milliamps(current_ma))
        .map_err(|e| input("report", e))?;
    Ok((
        Output {
            text: report_table(&r, current_ma),
            status: if r.failed.is_empty() { Status::Ok } else { Status::Failed },
        },
        r,
    ))
}

fn report_table(r: &DesignReport, current_ma: f64) -> String {
    let mut t = String::new();
    writeln!(t, "copper tape 0.5 ohm/m at {current_ma} mA").unwrap();
    writeln!(t, "{:<6} {:<12} {:>10} {:>10} {:>10}", "edge", "net", "length_mm", "ohm", "drop_mV").unwrap();
    for row in &r.rows {
        writeln!(
            t,
            "{:<6} {:<12} {:>10.3} {:>10.5} {:>10.5}",
            row.edge.to_string(),
            row.net_name,
            row.length_mm,
            row.resistance.value(),
            row.drop.value() * 1e3
        )
        .unwrap();
    }
    writeln!(
        t,
        "{:<6} {:<12} {:>10.3} {:>10.5} {:>10.5}",
        "total",
        "",
        r.total_length_mm,
        r.total_resistance.value(),
        r.total_drop.value() * 1e3
    )
    .unwrap();
    for e in &r.failed {
        writeln!(t, "excluded {e}: not routed").unwrap();
    }
    t
}

/// Writes each bundled fixture as `<name>.stl` and `<name>.json` into `dir`.
pub fn demo(dir: &Path) -> Result<Output, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| input(dir.display(), e))?;
    let mut text = String::new();
    for name in coppertrace_core::fixtures::NAMES {
        let f = coppertrace_core::fixtures::by_name(name).expect("listed fixture exists");
        let stl = dir.join(format!("{name}.stl"));
        let bytes = save_mesh(&f.mesh, MeshFormat::Stl).map_err(|e| input(name, e))?;
        std::fs::write(&stl, bytes).map_err(|e| input(stl.display(), e))?;
        let mut doc = f.document;
        doc.design.mesh_ref = format!("{name}.stl");
        let json = dir.join(format!("{name}.json"));
        write_design(&doc, &json)?;
        writeln!(text, "wrote {} and {}", json.display(), stl.display()).unwrap();
    }
    Ok(Output { text, status: Status::Ok })
}
