//! The quotient oriented graph of a model flow and its augmentation by
//! vertical orbits.
//!
//! Torus vertices are the glued tori, one per pair, named `T1..Tn` in pairing
//! order. Each fat-graph edge (a Birkhoff annulus) gives one directed edge from
//! the torus holding its ENTRANCE side to the torus holding its EXIT side.
//! Edge ids are positions in [`FlowGraph::edges`]: pieces in spec order, then
//! fat-graph edge index.
//!
//! The sign of an edge is the orientation sign of the vertex carrying the dart
//! of that edge which lies on the entrance face.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fatgraph::Color;
use crate::model::{validate_spec, ModelFlowSpec, SpecOrientation, TorusRef};
use crate::sign::Sign;

/// Glued torus; index into the pairing. Written `T1`, `T2`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusId(pub usize);

impl fmt::Display for TorusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0 + 1)
    }
}

impl FromStr for TorusId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix('T')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .map(|k| TorusId(k - 1))
            .ok_or_else(|| Error::Input(format!("{s:?} is not a torus id (T1, T2, ...)")))
    }
}

/// Vertical periodic orbit: vertex `vertex` of piece `piece`. Written `piece.v<vertex>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitId {
    pub piece: String,
    pub vertex: usize,
}

impl OrbitId {
    pub fn new(piece: impl Into<String>, vertex: usize) -> Self {
        OrbitId { piece: piece.into(), vertex }
    }
}

impl fmt::Display for OrbitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.v{}", self.piece, self.vertex)
    }
}

impl FromStr for OrbitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (piece, v) = s
            .rsplit_once(".v")
            .ok_or_else(|| Error::Input(format!("{s:?} is not an orbit id (piece.v<vertex>)")))?;
        let vertex = v.parse().map_err(|_| Error::Input(format!("{s:?} has a non-numeric vertex")))?;
        Ok(OrbitId { piece: piece.to_string(), vertex })
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(TorusId);
string_serde!(OrbitId);

/// One Birkhoff annulus seen in the quotient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: TorusId,
    pub to: TorusId,
    pub piece: String,
    /// Fat-graph edge index within the piece.
    pub edge: usize,
    pub sign: Sign,
}

/// Incidence of a vertical orbit with a glued torus in the augmented graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccumulationEdge {
    /// The orbit lies on an entrance face of the torus.
    TorusToOrbit(TorusId, OrbitId),
    /// The orbit lies on an exit face of the torus.
    OrbitToTorus(OrbitId, TorusId),
}

/// Quotient oriented graph with its augmentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowGraph {
    pub tori: Vec<TorusId>,
    pub orbits: Vec<OrbitId>,
    pub edges: Vec<FlowEdge>,
    /// Sorted, without repeats.
    pub accumulation: Vec<AccumulationEdge>,
    torus_of: BTreeMap<TorusRef, TorusId>,
}

impl FlowGraph {
    pub fn torus_count(&self) -> usize {
        self.tori.len()
    }

    /// Glued torus containing a boundary torus of some piece.
    pub fn torus_of(&self, t: &TorusRef) -> Option<TorusId> {
        self.torus_of.get(t).copied()
    }

    pub fn has_torus(&self, t: TorusId) -> bool {
        t.0 < self.tori.len()
    }

    pub fn has_orbit(&self, o: &OrbitId) -> bool {
        self.orbits.binary_search(o).is_ok()
    }

    pub fn has_edge_between(&self, from: TorusId, to: TorusId) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    pub fn torus_successors(&self, t: TorusId) -> BTreeSet<TorusId> {
        self.edges.iter().filter(|e| e.from == t).map(|e| e.to).collect()
    }

    /// Sign of every edge, in edge-id order.
    pub fn signs(&self) -> Vec<Sign> {
        self.edges.iter().map(|e| e.sign).collect()
    }

    /// Adjacency JSON: vertices, orbits, edges and accumulation edges.
    pub fn export(&self) -> FlowGraphExport {
        FlowGraphExport {
            vertices: self.tori.iter().map(|t| t.to_string()).collect(),
            orbits: self.orbits.iter().map(|o| o.to_string()).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| ExportEdge {
                    from: e.from.to_string(),
                    to: e.to.to_string(),
                    piece: e.piece.clone(),
                    edge: e.edge,
                    sign: e.sign,
                })
                .collect(),
            accumulation: self
                .accumulation
                .iter()
                .map(|a| match a {
                    AccumulationEdge::TorusToOrbit(t, o) => ExportArc { from: t.to_string(), to: o.to_string() },
                    AccumulationEdge::OrbitToTorus(o, t) => ExportArc { from: o.to_string(), to: t.to_string() },
                })
                .collect(),
        }
    }

    /// One line per edge: `from to sign piece.edge`.
    pub fn edge_list_text(&self) -> String {
        self.edges.iter().map(|e| format!("{} {} {} {}.{}\n", e.from, e.to, e.sign, e.piece, e.edge)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowGraphExport {
    pub vertices: Vec<String>,
    pub orbits: Vec<String>,
    pub edges: Vec<ExportEdge>,
    pub accumulation: Vec<ExportArc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportEdge {
    pub from: String,
    pub to: String,
    pub piece: String,
    pub edge: usize,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportArc {
    pub from: String,
    pub to: String,
}

/// Checks that `o` assigns opposite signs to the endpoints of every edge.
fn check_orientation(s: &ModelFlowSpec, o: &SpecOrientation) -> Result<()> {
    for p in &s.pieces {
        let a = o.get(&p.id).ok_or_else(|| Error::Input(format!("no orientation for piece {}", p.id)))?;
        let g = &p.spine.graph;
        if a.0.len() != g.vertex_count() {
            return Err(Error::Input(format!(
                "orientation of piece {} has {} signs for {} vertices",
                p.id,
                a.0.len(),
                g.vertex_count()
            )));
        }
        for e in 0..g.edge_count() {
            let [x, y] = g.edge_endpoints(e);
            if a.sign(x) == a.sign(y) {
                return Err(Error::Input(format!(
                    "orientation of piece {} gives both ends of edge {e} the sign {}",
                    p.id,
                    a.sign(x)
                )));
            }
        }
    }
    if let Some(extra) = o.keys().find(|k| s.piece(k).is_none()) {
        return Err(Error::Input(format!("orientation given for unknown piece {extra}")));
    }
    Ok(())
}

pub fn build_flow_graph(s: &ModelFlowSpec, o: &SpecOrientation) -> Result<FlowGraph> {
    let report = validate_spec(s);
    if let Some(f) = report.failures().next() {
        return Err(Error::Input(format!("spec fails {} at {}: {}", f.check, f.subject, f.detail)));
    }
    check_orientation(s, o)?;

    let mut torus_of = BTreeMap::new();
    for (i, (x, n)) in s.pairing.iter().enumerate() {
        torus_of.insert(x.clone(), TorusId(i));
        torus_of.insert(n.clone(), TorusId(i));
    }
    let mut edges = Vec::new();
    let mut orbits = Vec::new();
    let mut accumulation = BTreeSet::new();
    for p in &s.pieces {
        let g = &p.spine.graph;
        let a = &o[&p.id];
        let torus = |face: usize| torus_of[&TorusRef::new(p.id.clone(), face)];
        for (e, [d1, d2]) in g.edge_list().into_iter().enumerate() {
            let (entrance, exit) = if p.spine.color_of_dart(d1) == Some(Color::Entrance) { (d1, d2) } else { (d2, d1) };
            edges.push(FlowEdge {
                from: torus(g.boundary_of(entrance)),
                to: torus(g.boundary_of(exit)),
                piece: p.id.clone(),
                edge: e,
                sign: a.sign(g.vertex_of(entrance)),
            });
        }
        for v in 0..g.vertex_count() {
            orbits.push(OrbitId::new(p.id.clone(), v));
        }
        for face in 0..g.boundary_count() {
            let t = torus(face);
            for v in g.boundary_vertices(face) {
                let orbit = OrbitId::new(p.id.clone(), v);
                accumulation.insert(match p.spine.color_of_cycle(face) {
                    Some(Color::Entrance) => AccumulationEdge::TorusToOrbit(t, orbit),
                    _ => AccumulationEdge::OrbitToTorus(orbit, t),
                });
            }
        }
    }
    orbits.sort();
    Ok(FlowGraph {
        tori: (0..s.pairing.len()).map(TorusId).collect(),
        orbits,
        edges,
        accumulation: accumulation.into_iter().collect(),
        torus_of,
    })
}

/// Strongly connected components of the torus subgraph (Tarjan), each sorted,
/// listed in order of their least vertex.
pub fn strongly_connected_components(g: &FlowGraph) -> Vec<Vec<TorusId>> {
    let n = g.torus_count();
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.from.0].push(e.to.0);
    }
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // explicit call stack of (vertex, next neighbour position)
        let mut calls = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(u, _)) = calls.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(TorusId(w));
                    if w == v {
                        break;
                    }
                }
                comp.sort();
                out.push(comp);
            }
        }
    }
    out.sort();
    out
}

/// Whether the torus subgraph is strongly connected. Vacuously true with no tori.
pub fn is_transitive(g: &FlowGraph) -> bool {
    strongly_connected_components(g).len() <= 1
}

/// A symbolic itinerary: a finite body of glued tori, optionally preceded by a
/// constant orbit letter on the negative tail and followed by one on the positive tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItineraryWord {
    #[serde(default)]
    pub body: Vec<TorusId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_orbit: Option<OrbitId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_orbit: Option<OrbitId>,
}

impl ItineraryWord {
    pub fn body(body: Vec<TorusId>) -> Self {
        ItineraryWord { body, head_orbit: None, tail_orbit: None }
    }
}

pub fn validate_itinerary(g: &FlowGraph, w: &ItineraryWord) -> Result<bool> {
    if let Some(t) = w.body.iter().find(|t| !g.has_torus(**t)) {
        return Err(Error::Input(format!("unknown torus {t}")));
    }
    for o in w.head_orbit.iter().chain(&w.tail_orbit) {
        if !g.has_orbit(o) {
            return Err(Error::Input(format!("unknown orbit {o}")));
        }
    }
    let (Some(first), Some(last)) = (w.body.first(), w.body.last()) else {
        return Ok(w.head_orbit.is_some() && w.head_orbit == w.tail_orbit);
    };
    let arc = |a: &AccumulationEdge| g.accumulation.binary_search(a).is_ok();
    if let Some(o) = &w.head_orbit {
        if !arc(&AccumulationEdge::OrbitToTorus(o.clone(), *first)) {
            return Ok(false);
        }
    }
    if let Some(o) = &w.tail_orbit {
        if !arc(&AccumulationEdge::TorusToOrbit(*last, o.clone())) {
            return Ok(false);
        }
    }
    Ok(w.body.windows(2).all(|p| g.has_edge_between(p[0], p[1])))
}

/// A closed directed walk of edge ids, stored as its lexicographically least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PeriodicWord {
    pub cycle: Vec<usize>,
}

impl PeriodicWord {
    /// Canonical form of a closed walk.
    pub fn canonical(walk: &[usize]) -> PeriodicWord {
        let n = walk.len();
        let best = (0..n)
            .map(|k| walk[k..].iter().chain(&walk[..k]).copied().collect::<Vec<_>>())
            .min()
            .unwrap_or_default();
        PeriodicWord { cycle: best }
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    /// The tori crossed, starting at the source of the first edge.
    pub fn tori(&self, g: &FlowGraph) -> Vec<TorusId> {
        self.cycle.iter().map(|&e| g.edges[e].from).collect()
    }
}

pub const MAX_WORD_LENGTH: usize = 12;
pub const MAX_WORDS: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicWords {
    /// Sorted by length, then lexicographically.
    pub words: Vec<PeriodicWord>,
    /// `counts[n - 1]` is the number of words of length `n`.
    pub counts: Vec<usize>,
}

/// Every closed walk of length `1..=max_len` up to rotation.
pub fn periodic_words(g: &FlowGraph, max_len: usize) -> Result<PeriodicWords> {
    if max_len == 0 || max_len > MAX_WORD_LENGTH {
        return Err(Error::Capacity(format!("word length must be in 1..={MAX_WORD_LENGTH}, got {max_len}")));
    }
    let mut out_edges = vec![Vec::new(); g.torus_count()];
    for (i, e) in g.edges.iter().enumerate() {
        out_edges[e.from.0].push(i);
    }
    let mut by_len: Vec<Vec<PeriodicWord>> = vec![Vec::new(); max_len];
    let mut total = 0;
    let mut walk = Vec::with_capacity(max_len);
    for start in 0..g.edges.len() {
        walk.push(start);
        extend_walks(g, &out_edges, max_len, &mut walk, &mut by_len, &mut total)?;
        walk.pop();
    }
    let counts = by_len.iter().map(Vec::len).collect();
    let words = by_len
        .into_iter()
        .flat_map(|mut ws| {
            ws.sort();
            ws
        })
        .collect();
    Ok(PeriodicWords { words, counts })
}

/// Depth-first extension of a walk whose first edge is its least edge.
fn extend_walks(
    g: &FlowGraph,
    out_edges: &[Vec<usize>],
    max_len: usize,
    walk: &mut Vec<usize>,
    by_len: &mut [Vec<PeriodicWord>],
    total: &mut usize,
) -> Result<()> {
    let first = walk[0];
    let last = *walk.last().unwrap();
    if g.edges[last].to == g.edges[first].from && PeriodicWord::canonical(walk).cycle == *walk {
        *total += 1;
        if *total > MAX_WORDS {
            return Err(Error::Capacity(format!("more than {MAX_WORDS} periodic words")));
        }
        by_len[walk.len() - 1].push(PeriodicWord { cycle: walk.clone() });
    }
    if walk.len() == max_len {
        return Ok(());
    }
    for &next in &out_edges[g.edges[last].to.0] {
        if next >= first {
            walk.push(next);
            extend_walks(g, out_edges, max_len, walk, by_len, total)?;
            walk.pop();
        }
    }
    Ok(())
}

/// Product of edge signs along a head-to-tail compatible walk.
pub fn path_sign(g: &FlowGraph, walk: &[usize]) -> Result<Sign> {
    if let Some(&e) = walk.iter().find(|&&e| e >= g.edges.len()) {
        return Err(Error::Input(format!("unknown edge {e}")));
    }
    if let Some(k) = (1..walk.len()).find(|&k| g.edges[walk[k - 1]].to != g.edges[walk[k]].from) {
        return Err(Error::Input(format!("edges {} and {} are not head to tail", walk[k - 1], walk[k])));
    }
    Ok(Sign::product(walk.iter().map(|&e| g.edges[e].sign)))
}
