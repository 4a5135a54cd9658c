//! Line-delimited JSON session over TCP.
//!
//! Each request is one line: `{"id": 1, "method": "drag_part", "params": {...}}`. Every
//! edit operation is available under its own name (`add_part`, `drag_part`, `add_waypoint`,
//! ...) with the operation's fields as params. The host answers with
//! `{"id": 1, "result": ...}` or `{"id": 1, "error": {"code": ..., "message": ...}}` and
//! then pushes notifications such as
//! `{"notification": "rerouted", "params": {"edges": [...], ...}}`. A bad request only
//! earns an error reply; the session carries on.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;

use coppertrace_core::layout::check_clearance;
use coppertrace_core::schematic::Terminal;
use coppertrace_core::{Document, EdgeId, EdgeTrace, EditOp, EditOutcome, NetId, PartId, TriMesh};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::pipeline::{self, Project};

/// Request names that map onto [`EditOp`] variants.
pub const EDIT_METHODS: &[&str] = &[
    "add_part",
    "remove_part",
    "place_part",
    "drag_part",
    "rotate_part",
    "move_symbol",
    "add_net",
    "connect",
    "rename_net",
    "add_junction",
    "delete_junction",
    "move_junction",
    "reconnect",
    "add_waypoint",
    "delete_waypoint",
    "set_clearance",
    "route_all",
];

/// Requests handled by the host itself.
pub const QUERY_METHODS: &[&str] = &["snapshot", "check", "highlight", "report", "print", "save", "shutdown"];

#[derive(Deserialize)]
struct Request {
    #[serde(default)]
    id: Value,
    method: String,
    #[serde(default)]
    params: Value,
}

struct Failure {
    code: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HighlightParams {
    net: Option<NetId>,
    part: Option<PartId>,
    edge: Option<EdgeId>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrintParams {
    path: PathBuf,
    #[serde(default)]
    force: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportParams {
    #[serde(default = "default_current")]
    current_ma: f64,
}

fn default_current() -> f64 {
    crate::DEFAULT_CURRENT_MA
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SaveParams {
    path: PathBuf,
}

/// The authoritative document and its mesh. All edits go through [`Session::handle`].
pub struct Session {
    project: Project,
    closed: bool,
}

impl Session {
    pub fn new(mesh: TriMesh, doc: Document) -> Self {
        Session {
            project: Project { mesh, doc },
            closed: false,
        }
    }

    pub fn document(&self) -> &Document {
        &self.project.doc
    }

    /// Set once a `shutdown` request has been answered.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Answers one request line: the reply first, then any notifications.
    pub fn handle(&mut self, line: &str) -> Vec<Value> {
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return vec![error_reply(Value::Null, Failure::new("parse_error", e))],
        };
        let id = value.get("id").cloned().unwrap_or(Value::Null);
        let req: Request = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => return vec![error_reply(id, Failure::new("invalid_request", e))],
        };
        let mut notes = Vec::new();
        let reply = match self.dispatch(&req, &mut notes) {
            Ok(result) => json!({ "id": req.id, "result": result }),
            Err(f) => error_reply(req.id, f),
        };
        let mut out = vec![reply];
        out.extend(notes);
        out
    }

    fn dispatch(&mut self, req: &Request, notes: &mut Vec<Value>) -> Result<Value, Failure> {
        let params = match &req.params {
            Value::Null => Value::Object(Default::default()),
            p @ Value::Object(_) => p.clone(),
            _ => return Err(Failure::new("invalid_params", "params must be an object")),
        };
        match req.method.as_str() {
            m if EDIT_METHODS.contains(&m) => {
                let mut obj = params;
                obj.as_object_mut().expect("object").insert("op".into(), Value::String(m.into()));
                let op: EditOp = parse(obj)?;
                let out = self
                    .project
                    .doc
                    .apply(&self.project.mesh, op)
                    .map_err(|e| Failure::new("edit_rejected", e))?;
                if !(out.rerouted.is_empty() && out.removed.is_empty()) {
                    notes.push(self.rerouted_note(&out));
                }
                Ok(serde_json::to_value(&out).expect("outcome serializes"))
            }
            "snapshot" => {
                no_params(&params)?;
                Ok(json!({
                    "design": self.project.doc.design,
                    "status": self.status()?,
                }))
            }
            "check" => {
                no_params(&params)?;
                self.status()
            }
            "highlight" => {
                let p: HighlightParams = parse(params)?;
                let note = self.highlight(&p)?;
                notes.push(note);
                Ok(json!({}))
            }
            "report" => {
                let p: ReportParams = parse(params)?;
                let mut scratch = Project {
                    mesh: self.project.mesh.clone(),
                    doc: self.project.doc.clone(),
                };
                let (_, r) = pipeline::report(&mut scratch, p.current_ma).map_err(|e| Failure::new("report_failed", e))?;
                Ok(serde_json::to_value(r).expect("report serializes"))
            }
            "print" => {
                let p: PrintParams = parse(params)?;
                let mut scratch = Project {
                    mesh: self.project.mesh.clone(),
                    doc: self.project.doc.clone(),
                };
                match pipeline::print(&mut scratch, &p.path, p.force) {
                    Ok((_, summary)) => Ok(serde_json::to_value(summary).expect("summary serializes")),
                    Err(e) => Err(Failure::new("print_refused", e)),
                }
            }
            "save" => {
                let p: SaveParams = parse(params)?;
                pipeline::write_design(&self.project.doc, &p.path).map_err(|e| Failure::new("io", e))?;
                Ok(json!({ "path": p.path }))
            }
            "shutdown" => {
                no_params(&params)?;
                self.closed = true;
                Ok(json!({}))
            }
            other => Err(Failure::new("unknown_method", format!("no method named {other:?}"))),
        }
    }

    fn status(&self) -> Result<Value, Failure> {
        let (mesh, doc) = (&self.project.mesh, &self.project.doc);
        let violations =
            check_clearance(mesh, doc.schematic(), doc.layout()).map_err(|e| Failure::new("check_failed", e))?;
        Ok(json!({
            "failed_edges": doc.layout().failed_edges(),
            "violations": violations,
            "export_valid": doc.layout().is_complete(doc.schematic()) && violations.is_empty(),
        }))
    }

    fn rerouted_note(&self, out: &EditOutcome) -> Value {
        let traces: BTreeMap<EdgeId, &EdgeTrace> = out
            .rerouted
            .iter()
            .filter_map(|e| self.project.doc.layout().traces.get(e).map(|t| (*e, t)))
            .collect();
        json!({
            "notification": "rerouted",
            "params": {
                "edges": out.rerouted,
                "removed": out.removed,
                "traces": traces,
            }
        })
    }

    /// Resolves a selection in either pane to its counterparts in both.
    fn highlight(&self, p: &HighlightParams) -> Result<Value, Failure> {
        let sch = self.project.doc.schematic();
        let (nets, edges, parts): (Vec<NetId>, Vec<EdgeId>, Vec<PartId>) = match (p.net, p.part, p.edge) {
            (Some(n), None, None) => {
                let net = sch.net(n).ok_or_else(|| Failure::new("unknown_target", format!("no net {n}")))?;
                let parts = net
                    .terminals
                    .iter()
                    .filter_map(|t| match t {
                        Terminal::Pin { part, .. } => Some(*part),
                        Terminal::Junction { .. } => None,
                    })
                    .collect();
                (vec![n], net.edges.iter().map(|e| e.id).collect(), parts)
            }
            (None, Some(part), None) => {
                if sch.part(part).is_none() {
                    return Err(Failure::new("unknown_target", format!("no part {part}")));
                }
                let edges = sch.edges_of_part(part);
                let mut nets: Vec<NetId> = edges.iter().filter_map(|e| sch.edge(*e).map(|(n, _)| n)).collect();
                nets.sort();
                nets.dedup();
                (nets, edges, vec![part])
            }
            (None, None, Some(edge)) => {
                let (n, e) = sch.edge(edge).ok_or_else(|| Failure::new("unknown_target", format!("no edge {edge}")))?;
                let parts = [e.a, e.b]
                    .iter()
                    .filter_map(|t| match t {
                        Terminal::Pin { part, .. } => Some(*part),
                        Terminal::Junction { .. } => None,
                    })
                    .collect();
                (vec![n], vec![edge], parts)
            }
            _ => return Err(Failure::new("invalid_params", "give exactly one of net, part or edge")),
        };
        let mut parts = parts;
        parts.sort();
        parts.dedup();
        Ok(json!({
            "notification": "highlight",
            "params": { "nets": nets, "edges": edges, "parts": parts }
        }))
    }
}

fn parse<T: DeserializeOwned>(p: Value) -> Result<T, Failure> {
    serde_json::from_value(p).map_err(|e| Failure::new("invalid_params", e))
}

fn no_params(p: &Value) -> Result<(), Failure> {
    match p.as_object() {
        Some(o) if o.is_empty() => Ok(()),
        _ => Err(Failure::new("invalid_params", "this method takes no params")),
    }
}

fn error_reply(id: Value, f: Failure) -> Value {
    json!({ "id": id, "error": { "code": f.code, "message": f.message } })
}

/// Serves clients one at a time until a `shutdown` request.
pub fn serve(listener: TcpListener, session: &mut Session) -> io::Result<()> {
    for stream in listener.incoming() {
        // A client dropping mid-line ends its connection, not the session.
        if let Err(e) = serve_client(stream?, session) {
            eprintln!("client disconnected: {e}");
        }
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

fn serve_client(stream: TcpStream, session: &mut Session) -> io::Result<()> {
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for msg in session.handle(&line) {
            serde_json::to_writer(&mut writer, &msg)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}
