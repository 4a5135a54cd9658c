//! The symbolic circuit: placed parts, nets and junctions.
//!
//! Every net stores its connections as a spanning tree over its terminals. Each tree edge
//! becomes one copper trace in the 3D layout, so edge ids are stable across edits that do
//! not touch them.

pub mod library;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(PartId, "P");
id_type!(NetId, "N");
id_type!(EdgeId, "E");
id_type!(JunctionId, "J");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinRole {
    Passive,
    Anode,
    Cathode,
    Power,
    Ground,
    Signal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinDef {
    pub name: String,
    pub role: PinRole,
}

/// Pad centers in mm relative to the part origin, one per pin, plus the drill size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub pads: Vec<[f64; 2]>,
    pub drill: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartDef {
    pub name: String,
    pub pins: Vec<PinDef>,
    pub footprint: Footprint,
}

impl PartDef {
    pub fn validate(&self) -> Result<(), SchematicError> {
        let bad = |reason: String| {
            Err(SchematicError::InvalidPart {
                name: self.name.clone(),
                reason,
            })
        };
        if self.pins.is_empty() {
            return bad("no pins".into());
        }
        if self.pins.len() != self.footprint.pads.len() {
            return bad(format!("{} pins but {} pads", self.pins.len(), self.footprint.pads.len()));
        }
        let names: BTreeSet<&str> = self.pins.iter().map(|p| p.name.as_str()).collect();
        if names.len() != self.pins.len() {
            return bad("duplicate pin names".into());
        }
        if !(self.footprint.drill > 0.0 && self.footprint.drill < library::PITCH) {
            return bad(format!("drill {} mm outside (0, 2.54)", self.footprint.drill));
        }
        let pads = &self.footprint.pads;
        for i in 0..pads.len() {
            if !pads[i].iter().all(|c| c.is_finite()) {
                return bad(format!("pad {i} is not finite"));
            }
            for j in i + 1..pads.len() {
                let d = (pads[i][0] - pads[j][0]).hypot(pads[i][1] - pads[j][1]);
                if d < library::PITCH - 1e-9 {
                    return bad(format!("pads {i} and {j} are {d:.3} mm apart"));
                }
            }
        }
        Ok(())
    }

    pub fn pin_index(&self, name: &str) -> Option<usize> {
        self.pins.iter().position(|p| p.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartInstance {
    pub id: PartId,
    /// Designator such as `R1`.
    pub reference: String,
    pub def: PartDef,
    /// Symbol position in the schematic pane; cosmetic.
    pub position: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    Pin { part: PartId, pin: usize },
    Junction { junction: JunctionId },
}

impl Terminal {
    pub fn pin(part: PartId, pin: usize) -> Self {
        Terminal::Pin { part, pin }
    }

    pub fn junction(junction: JunctionId) -> Self {
        Terminal::Junction { junction }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Pin { part, pin } => write!(f, "{part}.{pin}"),
            Terminal::Junction { junction } => write!(f, "{junction}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetEdge {
    pub id: EdgeId,
    pub a: Terminal,
    pub b: Terminal,
}

impl NetEdge {
    pub fn touches(&self, t: &Terminal) -> bool {
        self.a == *t || self.b == *t
    }

    pub fn other(&self, t: &Terminal) -> Option<Terminal> {
        if self.a == *t {
            Some(self.b)
        } else if self.b == *t {
            Some(self.a)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub id: NetId,
    pub name: String,
    pub terminals: Vec<Terminal>,
    pub edges: Vec<NetEdge>,
}

impl Net {
    pub fn edge(&self, id: EdgeId) -> Option<&NetEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn degree(&self, t: &Terminal) -> usize {
        self.edges.iter().filter(|e| e.touches(t)).count()
    }

    /// Whether `edges` is a spanning tree of `terminals`.
    pub fn is_spanning_tree(&self) -> bool {
        let n = self.terminals.len();
        if n < 2 || self.edges.len() != n - 1 {
            return false;
        }
        let index = |t: &Terminal| self.terminals.iter().position(|x| x == t);
        let mut uf = UnionFind::new(n);
        for e in &self.edges {
            let (Some(a), Some(b)) = (index(&e.a), index(&e.b)) else {
                return false;
            };
            if !uf.union(a, b) {
                return false;
            }
        }
        true
    }

    /// Components of the tree with `removed` deleted, as terminal-index labels.
    fn components_without(&self, removed: EdgeId) -> Vec<usize> {
        let mut uf = UnionFind::new(self.terminals.len());
        for e in self.edges.iter().filter(|e| e.id != removed) {
            if let (Some(a), Some(b)) = (self.index_of(&e.a), self.index_of(&e.b)) {
                uf.union(a, b);
            }
        }
        (0..self.terminals.len()).map(|i| uf.find(i)).collect()
    }

    fn index_of(&self, t: &Terminal) -> Option<usize> {
        self.terminals.iter().position(|x| x == t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: JunctionId,
    pub net: NetId,
    pub position: [f64; 2],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchematicError {
    #[error("invalid part {name}: {reason}")]
    InvalidPart { name: String, reason: String },
    #[error("unknown part {0}")]
    UnknownPart(PartId),
    #[error("part {part} has no pin {pin}")]
    UnknownPin { part: PartId, pin: usize },
    #[error("unknown net {0}")]
    UnknownNet(NetId),
    #[error("net {net} has no edge {edge}")]
    UnknownEdge { net: NetId, edge: EdgeId },
    #[error("net {net} has no junction {junction}")]
    UnknownJunction { net: NetId, junction: JunctionId },
    #[error("unknown junction {0}")]
    NoSuchJunction(JunctionId),
    #[error("pin {terminal} is already on net {net}")]
    PinInUse { terminal: Terminal, net: NetId },
    #[error("terminal {0} is not on the net")]
    NotOnNet(Terminal),
    #[error("a net needs two distinct terminals")]
    SameTerminal,
    #[error("junction {junction} has degree {degree}; only degree 1 or 2 can be deleted")]
    JunctionDegree { junction: JunctionId, degree: usize },
    #[error("connecting {a} and {b} would create a cycle")]
    WouldCycle { a: Terminal, b: Terminal },
    #[error("net {0} is not a spanning tree over at least two terminals")]
    BrokenTree(NetId),
    #[error("duplicate reference designator {0}")]
    DuplicateReference(String),
}

/// The full schematic document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schematic {
    pub parts: Vec<PartInstance>,
    pub nets: Vec<Net>,
    pub junctions: Vec<Junction>,
    next_part: u32,
    next_net: u32,
    next_edge: u32,
    next_junction: u32,
}

impl Schematic {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn part(&self, id: PartId) -> Option<&PartInstance> {
        self.parts.iter().find(|p| p.id == id)
    }

    pub fn part_by_reference(&self, reference: &str) -> Option<&PartInstance> {
        self.parts.iter().find(|p| p.reference == reference)
    }

    pub fn net(&self, id: NetId) -> Option<&Net> {
        self.nets.iter().find(|n| n.id == id)
    }

    pub fn junction(&self, id: JunctionId) -> Option<&Junction> {
        self.junctions.iter().find(|j| j.id == id)
    }

    /// Net holding a terminal, if any.
    pub fn net_of(&self, t: &Terminal) -> Option<NetId> {
        self.nets.iter().find(|n| n.terminals.contains(t)).map(|n| n.id)
    }

    /// All net edges with their owning net, in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (NetId, &NetEdge)> {
        self.nets.iter().flat_map(|n| n.edges.iter().map(move |e| (n.id, e)))
    }

    pub fn edge(&self, id: EdgeId) -> Option<(NetId, &NetEdge)> {
        self.edges().find(|(_, e)| e.id == id)
    }

    pub fn edge_count(&self) -> usize {
        self.nets.iter().map(|n| n.edges.len()).sum()
    }

    /// Edges with an endpoint on one of `part`'s pins.
    pub fn edges_of_part(&self, part: PartId) -> Vec<EdgeId> {
        self.edges()
            .filter(|(_, e)| [e.a, e.b].iter().any(|t| matches!(t, Terminal::Pin { part: p, .. } if *p == part)))
            .map(|(_, e)| e.id)
            .collect()
    }

    pub fn edges_of_terminal(&self, t: &Terminal) -> Vec<EdgeId> {
        self.edges().filter(|(_, e)| e.touches(t)).map(|(_, e)| e.id).collect()
    }

    pub fn add_part(&mut self, reference: &str, def: PartDef, position: [f64; 2]) -> Result<PartId, SchematicError> {
        def.validate()?;
        if self.part_by_reference(reference).is_some() {
            return Err(SchematicError::DuplicateReference(reference.to_string()));
        }
        let id = PartId(self.next_part);
        self.next_part += 1;
        self.parts.push(PartInstance {
            id,
            reference: reference.to_string(),
            def,
            position,
        });
        Ok(id)
    }

    /// Removes a part and detaches its pins. Each affected net is re-linked into a tree over
    /// its remaining terminals; nets left with fewer than two terminals are deleted.
    pub fn remove_part(&mut self, id: PartId) -> Result<(), SchematicError> {
        let idx = self.parts.iter().position(|p| p.id == id).ok_or(SchematicError::UnknownPart(id))?;
        self.parts.remove(idx);
        let gone = |t: &Terminal| matches!(t, Terminal::Pin { part, .. } if *part == id);
        let mut next_edge = self.next_edge;
        for net in &mut self.nets {
            if !net.terminals.iter().any(gone) {
                continue;
            }
            let neighbors: Vec<Terminal> = net
                .edges
                .iter()
                .filter_map(|e| match (gone(&e.a), gone(&e.b)) {
                    (true, false) => Some(e.b),
                    (false, true) => Some(e.a),
                    _ => None,
                })
                .collect();
            net.terminals.retain(|t| !gone(t));
            net.edges.retain(|e| !gone(&e.a) && !gone(&e.b));
            let n = net.terminals.len();
            let mut uf = UnionFind::new(n);
            for e in &net.edges {
                if let (Some(a), Some(b)) = (net.index_of(&e.a), net.index_of(&e.b)) {
                    uf.union(a, b);
                }
            }
            // One representative per component, preferring a former neighbor of the part.
            let mut reps: Vec<(usize, Terminal)> = Vec::new();
            for t in neighbors.iter().chain(net.terminals.iter()) {
                let Some(i) = net.index_of(t) else { continue };
                let root = uf.find(i);
                if !reps.iter().any(|(r, _)| *r == root) {
                    reps.push((root, *t));
                }
            }
            for (_, t) in reps.iter().skip(1) {
                net.edges.push(NetEdge {
                    id: EdgeId(next_edge),
                    a: reps[0].1,
                    b: *t,
                });
                next_edge += 1;
            }
        }
        self.next_edge = next_edge;
        self.drop_small_nets();
        Ok(())
    }

    fn drop_small_nets(&mut self) {
        let dead: Vec<NetId> = self.nets.iter().filter(|n| n.terminals.len() < 2).map(|n| n.id).collect();
        self.nets.retain(|n| n.terminals.len() >= 2);
        self.junctions.retain(|j| !dead.contains(&j.net));
    }

    fn check_terminal(&self, t: &Terminal) -> Result<(), SchematicError> {
        match t {
            Terminal::Pin { part, pin } => {
                let p = self.part(*part).ok_or(SchematicError::UnknownPart(*part))?;
                if *pin >= p.def.pins.len() {
                    return Err(SchematicError::UnknownPin { part: *part, pin: *pin });
                }
                Ok(())
            }
            Terminal::Junction { junction } => {
                self.junction(*junction).map(|_| ()).ok_or(SchematicError::NoSuchJunction(*junction))
            }
        }
    }

    fn check_free_pin(&self, t: &Terminal) -> Result<(), SchematicError> {
        self.check_terminal(t)?;
        if !matches!(t, Terminal::Pin { .. }) {
            return Err(SchematicError::NotOnNet(*t));
        }
        match self.net_of(t) {
            Some(net) => Err(SchematicError::PinInUse { terminal: *t, net }),
            None => Ok(()),
        }
    }

    fn alloc_edge(&mut self, a: Terminal, b: Terminal) -> NetEdge {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        NetEdge { id, a, b }
    }

    fn net_mut(&mut self, id: NetId) -> Result<&mut Net, SchematicError> {
        self.nets.iter_mut().find(|n| n.id == id).ok_or(SchematicError::UnknownNet(id))
    }

    /// Creates a net joining two free pins with one edge.
    pub fn add_net(&mut self, name: &str, a: Terminal, b: Terminal) -> Result<(NetId, EdgeId), SchematicError> {
        if a == b {
            return Err(SchematicError::SameTerminal);
        }
        self.check_free_pin(&a)?;
        self.check_free_pin(&b)?;
        let id = NetId(self.next_net);
        self.next_net += 1;
        let edge = self.alloc_edge(a, b);
        self.nets.push(Net {
            id,
            name: name.to_string(),
            terminals: vec![a, b],
            edges: vec![edge],
        });
        Ok((id, edge.id))
    }

    /// Attaches a free pin to `net` with an edge to the existing terminal `to`.
    pub fn connect(&mut self, net: NetId, pin: Terminal, to: Terminal) -> Result<EdgeId, SchematicError> {
        self.check_free_pin(&pin)?;
        if !self.net(net).ok_or(SchematicError::UnknownNet(net))?.terminals.contains(&to) {
            return Err(SchematicError::NotOnNet(to));
        }
        let edge = self.alloc_edge(pin, to);
        let n = self.net_mut(net)?;
        n.terminals.push(pin);
        n.edges.push(edge);
        Ok(edge.id)
    }

    /// Splits `edge` with a new junction. Returns the junction and the two replacement edges.
    pub fn add_junction(
        &mut self,
        net: NetId,
        edge: EdgeId,
        position: [f64; 2],
    ) -> Result<(JunctionId, [EdgeId; 2]), SchematicError> {
        let old = *self
            .net(net)
            .ok_or(SchematicError::UnknownNet(net))?
            .edge(edge)
            .ok_or(SchematicError::UnknownEdge { net, edge })?;
        let jid = JunctionId(self.next_junction);
        self.next_junction += 1;
        let j = Terminal::junction(jid);
        let e1 = self.alloc_edge(old.a, j);
        let e2 = self.alloc_edge(j, old.b);
        let n = self.net_mut(net)?;
        let pos = n.edges.iter().position(|e| e.id == edge).expect("edge checked above");
        n.edges.splice(pos..=pos, [e1, e2]);
        n.terminals.push(j);
        self.junctions.push(Junction { id: jid, net, position });
        Ok((jid, [e1.id, e2.id]))
    }

    /// Deletes a junction of degree 1 (its edge goes too) or 2 (its edges merge into one).
    /// Returns the merged edge, if any.
    pub fn delete_junction(&mut self, net: NetId, junction: JunctionId) -> Result<Option<EdgeId>, SchematicError> {
        let j = Terminal::junction(junction);
        let n = self.net(net).ok_or(SchematicError::UnknownNet(net))?;
        if !n.terminals.contains(&j) {
            return Err(SchematicError::UnknownJunction { net, junction });
        }
        let incident: Vec<NetEdge> = n.edges.iter().filter(|e| e.touches(&j)).copied().collect();
        let merged = match incident.as_slice() {
            [] | [_] => None,
            [e1, e2] => Some(self.alloc_edge(e1.other(&j).unwrap(), e2.other(&j).unwrap())),
            _ => {
                return Err(SchematicError::JunctionDegree {
                    junction,
                    degree: incident.len(),
                })
            }
        };
        let n = self.net_mut(net)?;
        let pos = n.edges.iter().position(|e| e.touches(&j));
        n.edges.retain(|e| !e.touches(&j));
        if let (Some(m), Some(pos)) = (merged, pos) {
            n.edges.insert(pos.min(n.edges.len()), m);
        }
        n.terminals.retain(|t| *t != j);
        self.junctions.retain(|x| x.id != junction);
        self.drop_small_nets();
        Ok(merged.map(|e| e.id))
    }

    /// Replaces `remove` by a new edge `a`–`b`, which must join the two components left by
    /// removing it.
    pub fn reconnect(&mut self, net: NetId, remove: EdgeId, a: Terminal, b: Terminal) -> Result<EdgeId, SchematicError> {
        let n = self.net(net).ok_or(SchematicError::UnknownNet(net))?;
        if n.edge(remove).is_none() {
            return Err(SchematicError::UnknownEdge { net, edge: remove });
        }
        let ia = n.index_of(&a).ok_or(SchematicError::NotOnNet(a))?;
        let ib = n.index_of(&b).ok_or(SchematicError::NotOnNet(b))?;
        let comp = n.components_without(remove);
        if comp[ia] == comp[ib] {
            return Err(SchematicError::WouldCycle { a, b });
        }
        let edge = self.alloc_edge(a, b);
        let n = self.net_mut(net)?;
        let pos = n.edges.iter().position(|e| e.id == remove).expect("edge checked above");
        n.edges[pos] = edge;
        Ok(edge.id)
    }

    pub fn rename_net(&mut self, net: NetId, name: &str) -> Result<(), SchematicError> {
        self.net_mut(net)?.name = name.to_string();
        Ok(())
    }

    pub fn move_symbol(&mut self, part: PartId, position: [f64; 2]) -> Result<(), SchematicError> {
        let p = self
            .parts
            .iter_mut()
            .find(|p| p.id == part)
            .ok_or(SchematicError::UnknownPart(part))?;
        p.position = position;
        Ok(())
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<(), SchematicError> {
        let mut refs = BTreeSet::new();
        for p in &self.parts {
            p.def.validate()?;
            if !refs.insert(p.reference.as_str()) {
                return Err(SchematicError::DuplicateReference(p.reference.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for n in &self.nets {
            for t in &n.terminals {
                self.check_terminal(t)?;
                if let Terminal::Junction { junction } = t {
                    if self.junction(*junction).map(|j| j.net) != Some(n.id) {
                        return Err(SchematicError::UnknownJunction {
                            net: n.id,
                            junction: *junction,
                        });
                    }
                }
                if !seen.insert(*t) {
                    if let Terminal::Pin { .. } = t {
                        return Err(SchematicError::PinInUse {
                            terminal: *t,
                            net: n.id,
                        });
                    }
                    return Err(SchematicError::BrokenTree(n.id));
                }
            }
            if !n.is_spanning_tree() {
                return Err(SchematicError::BrokenTree(n.id));
            }
        }
        for j in &self.junctions {
            let on_net = self.net(j.net).is_some_and(|n| n.terminals.contains(&Terminal::junction(j.id)));
            if !on_net {
                return Err(SchematicError::UnknownJunction {
                    net: j.net,
                    junction: j.id,
                });
            }
        }
        Ok(())
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
