//! Fat graphs (ribbon graphs) given as darts, a rotation and an edge involution.
//!
//! Vertices are the cycles of the rotation, edges the orbits of the involution,
//! and boundary cycles of the thickened surface are the orbits of
//! `rotation ∘ involution`, i.e. `d ↦ rotation(involution(d))`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// Dart identifier. Positive.
pub type Dart = u32;

/// Side of the spine a boundary component lies on with respect to the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Color {
    Entrance,
    Exit,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Entrance => Color::Exit,
            Color::Exit => Color::Entrance,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Entrance => write!(f, "ENTRANCE"),
            Color::Exit => write!(f, "EXIT"),
        }
    }
}

/// One boundary walk of the thickened surface, starting at its smallest dart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCycle {
    pub darts: Vec<Dart>,
}

impl BoundaryCycle {
    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInvariants {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub boundary_count: usize,
    pub euler_characteristic: i64,
    pub genus: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FatGraph {
    labels: Vec<Dart>,
    index: HashMap<Dart, usize>,
    rotation: Vec<usize>,
    involution: Vec<usize>,
    vertices: Vec<Vec<usize>>,
    vertex_of: Vec<usize>,
    edges: Vec<[usize; 2]>,
    edge_of: Vec<usize>,
    faces: Vec<Vec<usize>>,
    face_of: Vec<usize>,
}

impl FatGraph {
    /// Builds a fat graph from its rotation cycles (one per vertex, in order)
    /// and its edges (pairs of darts). Vertex and edge indices follow input order.
    pub fn new(rotation: Vec<Vec<Dart>>, edges: Vec<[Dart; 2]>) -> Result<FatGraph> {
        let mut labels: Vec<Dart> = rotation.iter().flatten().copied().collect();
        if labels.is_empty() {
            return Err(Error::Structure("no darts".into()));
        }
        if let Some(&d) = labels.iter().find(|&&d| d == 0) {
            return Err(Error::Structure(format!("dart ids must be positive, got {d}")));
        }
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Structure(format!("dart {} appears twice in the rotation", w[0])));
        }
        if rotation.iter().any(|c| c.is_empty()) {
            return Err(Error::Structure("empty rotation cycle".into()));
        }
        let index: HashMap<Dart, usize> = labels.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let n = labels.len();

        let mut rot = vec![usize::MAX; n];
        let mut vertex_of = vec![0; n];
        let mut vertices = Vec::with_capacity(rotation.len());
        for (v, cycle) in rotation.iter().enumerate() {
            let idx: Vec<usize> = cycle.iter().map(|d| index[d]).collect();
            for (k, &i) in idx.iter().enumerate() {
                rot[i] = idx[(k + 1) % idx.len()];
                vertex_of[i] = v;
            }
            vertices.push(idx);
        }

        let mut inv = vec![usize::MAX; n];
        let mut edge_of = vec![0; n];
        let mut edge_idx = Vec::with_capacity(edges.len());
        for (e, [a, b]) in edges.iter().enumerate() {
            let (Some(&ia), Some(&ib)) = (index.get(a), index.get(b)) else {
                return Err(Error::Structure(format!("edge ({a}, {b}) uses a dart missing from the rotation")));
            };
            if ia == ib {
                return Err(Error::Structure(format!("edge ({a}, {b}) pairs a dart with itself")));
            }
            if inv[ia] != usize::MAX || inv[ib] != usize::MAX {
                return Err(Error::Structure(format!("edge ({a}, {b}) reuses a dart")));
            }
            inv[ia] = ib;
            inv[ib] = ia;
            edge_of[ia] = e;
            edge_of[ib] = e;
            edge_idx.push([ia, ib]);
        }
        if let Some(i) = inv.iter().position(|&j| j == usize::MAX) {
            return Err(Error::Structure(format!("dart {} belongs to no edge", labels[i])));
        }

        let (faces, face_of) = trace_faces(&rot, &inv);
        let g = FatGraph {
            labels,
            index,
            rotation: rot,
            involution: inv,
            vertices,
            vertex_of,
            edges: edge_idx,
            edge_of,
            faces,
            face_of,
        };
        if !g.is_connected() {
            return Err(Error::Structure("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn dart_count(&self) -> usize {
        self.labels.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.faces.len()
    }

    /// Dart ids in ascending order.
    pub fn darts(&self) -> &[Dart] {
        &self.labels
    }

    pub fn contains(&self, d: Dart) -> bool {
        self.index.contains_key(&d)
    }

    pub fn rotate(&self, d: Dart) -> Dart {
        self.labels[self.rotation[self.index[&d]]]
    }

    pub fn opposite(&self, d: Dart) -> Dart {
        self.labels[self.involution[self.index[&d]]]
    }

    pub fn vertex_of(&self, d: Dart) -> usize {
        self.vertex_of[self.index[&d]]
    }

    pub fn edge_of(&self, d: Dart) -> usize {
        self.edge_of[self.index[&d]]
    }

    pub fn boundary_of(&self, d: Dart) -> usize {
        self.face_of[self.index[&d]]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.vertices[v].len()
    }

    /// Rotation cycles, in vertex order.
    pub fn rotation_cycles(&self) -> Vec<Vec<Dart>> {
        self.vertices
            .iter()
            .map(|c| c.iter().map(|&i| self.labels[i]).collect())
            .collect()
    }

    /// Edges as dart pairs, in edge order.
    pub fn edge_list(&self) -> Vec<[Dart; 2]> {
        self.edges.iter().map(|&[a, b]| [self.labels[a], self.labels[b]]).collect()
    }

    /// Endpoints (vertex indices) of an edge.
    pub fn edge_endpoints(&self, e: usize) -> [usize; 2] {
        let [a, b] = self.edges[e];
        [self.vertex_of[a], self.vertex_of[b]]
    }

    pub fn boundary_cycles(&self) -> Vec<BoundaryCycle> {
        self.faces
            .iter()
            .map(|f| BoundaryCycle { darts: f.iter().map(|&i| self.labels[i]).collect() })
            .collect()
    }

    /// Vertices visited by a boundary cycle, ascending and without repeats.
    pub fn boundary_vertices(&self, face: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.faces[face].iter().map(|&i| self.vertex_of[i]).collect();
        set.into_iter().collect()
    }

    pub fn is_connected(&self) -> bool {
        let n_v = self.vertices.len();
        let mut seen = vec![false; n_v];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &i in &self.vertices[v] {
                let w = self.vertex_of[self.involution[i]];
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Returns a copy with every dart renamed through `f`, keeping vertex and edge order.
    pub fn relabel(&self, f: impl Fn(Dart) -> Dart) -> Result<FatGraph> {
        let rotation = self.rotation_cycles().into_iter().map(|c| c.into_iter().map(&f).collect()).collect();
        let edges = self.edge_list().into_iter().map(|[a, b]| [f(a), f(b)]).collect();
        FatGraph::new(rotation, edges)
    }

    pub(crate) fn idx(&self, d: Dart) -> usize {
        self.index[&d]
    }

    pub(crate) fn label(&self, i: usize) -> Dart {
        self.labels[i]
    }

    pub(crate) fn rot_inverse(&self) -> Vec<usize> {
        let mut out = vec![0; self.rotation.len()];
        for (i, &j) in self.rotation.iter().enumerate() {
            out[j] = i;
        }
        out
    }
}

fn trace_faces(rot: &[usize], inv: &[usize]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = rot.len();
    let mut face_of = vec![usize::MAX; n];
    let mut faces = Vec::new();
    for start in 0..n {
        if face_of[start] != usize::MAX {
            continue;
        }
        let id = faces.len();
        let mut cycle = Vec::new();
        let mut d = start;
        loop {
            face_of[d] = id;
            cycle.push(d);
            d = rot[inv[d]];
            if d == start {
                break;
            }
        }
        faces.push(cycle);
    }
    (faces, face_of)
}

/// Boundary cycles of the thickened surface, ordered by their smallest dart.
pub fn trace_boundary_cycles(g: &FatGraph) -> Vec<BoundaryCycle> {
    g.boundary_cycles()
}

pub fn surface_invariants(g: &FatGraph) -> Result<SurfaceInvariants> {
    let v = g.vertex_count();
    let e = g.edge_count();
    let b = g.boundary_count();
    let chi = v as i64 - e as i64;
    let twice_genus = 2 - chi - b as i64;
    if twice_genus < 0 || twice_genus % 2 != 0 {
        return Err(Error::Orientability { chi, boundary: b });
    }
    Ok(SurfaceInvariants {
        vertex_count: v,
        edge_count: e,
        boundary_count: b,
        euler_characteristic: chi,
        genus: (twice_genus / 2) as u64,
    })
}

/// Entrance/exit coloring of boundary cycles, keyed by cycle index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryColoring(pub BTreeMap<usize, Color>);

impl BoundaryColoring {
    pub fn get(&self, cycle: usize) -> Option<Color> {
        self.0.get(&cycle).copied()
    }

    pub fn from_vec(colors: Vec<Color>) -> Self {
        BoundaryColoring(colors.into_iter().enumerate().collect())
    }

    /// Errors unless every boundary cycle of `g`, and nothing else, is colored.
    pub fn check_total(&self, g: &FatGraph) -> Result<()> {
        let b = g.boundary_count();
        if let Some(k) = self.0.keys().find(|&&k| k >= b) {
            return Err(Error::Input(format!("coloring names cycle {k}, but there are only {b} boundary cycles")));
        }
        if let Some(k) = (0..b).find(|k| !self.0.contains_key(k)) {
            return Err(Error::Input(format!("boundary cycle {k} has no color")));
        }
        Ok(())
    }

    pub fn count(&self, color: Color) -> usize {
        self.0.values().filter(|&&c| c == color).count()
    }
}

pub const CONDITION_CONNECTED: &str = "condition-1-connected";
pub const CONDITION_EVEN_VALENCE: &str = "condition-2-even-valence";
pub const CONDITION_SIDES_DIFFER: &str = "condition-3-sides-differ";
pub const CONDITION_EVEN_BOUNDARY: &str = "condition-4-even-boundary";
pub const CHECK_GENUS: &str = "orientable-genus";

/// Checks the four spine conditions plus integrality of the genus.
///
/// A coloring that is not total on the boundary cycles is an input error,
/// not a failed condition.
pub fn validate_spine(g: &FatGraph, colors: &BoundaryColoring) -> Result<ValidationReport> {
    colors.check_total(g)?;
    let mut report = ValidationReport::new();

    if g.is_connected() {
        report.pass(CONDITION_CONNECTED, "");
    } else {
        report.fail(CONDITION_CONNECTED, "", "graph is disconnected");
    }

    let odd: Vec<usize> = (0..g.vertex_count()).filter(|&v| !g.valence(v).is_multiple_of(2)).collect();
    if odd.is_empty() {
        report.pass(CONDITION_EVEN_VALENCE, "");
    } else {
        report.fail(CONDITION_EVEN_VALENCE, "", format!("odd valence at vertices {odd:?}"));
    }

    let same_side: Vec<usize> = (0..g.edge_count())
        .filter(|&e| {
            let [a, b] = g.edges[e];
            colors.get(g.face_of[a]) == colors.get(g.face_of[b])
        })
        .collect();
    if same_side.is_empty() {
        report.pass(CONDITION_SIDES_DIFFER, "");
    } else {
        report.fail(CONDITION_SIDES_DIFFER, "", format!("both sides share a color at edges {same_side:?}"));
    }

    let odd_faces: Vec<usize> = (0..g.boundary_count()).filter(|&f| !g.faces[f].len().is_multiple_of(2)).collect();
    if odd_faces.is_empty() {
        report.pass(CONDITION_EVEN_BOUNDARY, "");
    } else {
        report.fail(CONDITION_EVEN_BOUNDARY, "", format!("odd length boundary cycles {odd_faces:?}"));
    }

    match surface_invariants(g) {
        Ok(s) => report.record(CHECK_GENUS, "", true, format!("genus {}", s.genus)),
        Err(e) => report.fail(CHECK_GENUS, "", e.to_string()),
    }
    Ok(report)
}

/// A fat graph together with the entrance/exit coloring of its boundary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpineJson", into = "SpineJson")]
pub struct Spine {
    pub graph: FatGraph,
    pub colors: BoundaryColoring,
}

impl Spine {
    pub fn new(graph: FatGraph, colors: BoundaryColoring) -> Spine {
        Spine { graph, colors }
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        validate_spine(&self.graph, &self.colors)
    }

    pub fn color_of_cycle(&self, cycle: usize) -> Option<Color> {
        self.colors.get(cycle)
    }

    pub fn color_of_dart(&self, d: Dart) -> Option<Color> {
        self.colors.get(self.graph.boundary_of(d))
    }

    /// Boundary cycle indices carrying `color`, ascending.
    pub fn cycles_with(&self, color: Color) -> Vec<usize> {
        self.colors.0.iter().filter(|(_, &c)| c == color).map(|(&k, _)| k).collect()
    }

    /// Renames darts through `f`, carrying colors along with the boundary cycles.
    pub fn relabel(&self, f: impl Fn(Dart) -> Dart) -> Result<Spine> {
        let graph = self.graph.relabel(&f)?;
        let mut colors = BTreeMap::new();
        for (k, cycle) in self.graph.faces.iter().enumerate() {
            if let Some(c) = self.colors.get(k) {
                colors.insert(graph.boundary_of(f(self.graph.labels[cycle[0]])), c);
            }
        }
        Ok(Spine { graph, colors: BoundaryColoring(colors) })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpineJson {
    darts: Vec<Dart>,
    rotation: Vec<Vec<Dart>>,
    edges: Vec<[Dart; 2]>,
    #[serde(default)]
    colors: BoundaryColoring,
}

impl TryFrom<SpineJson> for Spine {
    type Error = Error;

    fn try_from(raw: SpineJson) -> Result<Spine> {
        let graph = FatGraph::new(raw.rotation, raw.edges)?;
        let mut listed = raw.darts.clone();
        listed.sort_unstable();
        if listed != graph.darts() {
            return Err(Error::Structure("\"darts\" does not list exactly the darts of the rotation".into()));
        }
        Ok(Spine { graph, colors: raw.colors })
    }
}

impl From<Spine> for SpineJson {
    fn from(s: Spine) -> SpineJson {
        SpineJson {
            darts: s.graph.darts().to_vec(),
            rotation: s.graph.rotation_cycles(),
            edges: s.graph.edge_list(),
            colors: s.colors,
        }
    }
}

/// A dart bijection between two fat graphs.
///
/// When `reflected` is set it conjugates the rotation of the source to the
/// inverse rotation of the target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DartMap {
    #[serde(default)]
    pub reflected: bool,
    /// `(source, image)` pairs sorted by source.
    pub pairs: Vec<(Dart, Dart)>,
}

impl DartMap {
    pub fn identity(g: &FatGraph) -> DartMap {
        DartMap { reflected: false, pairs: g.darts().iter().map(|&d| (d, d)).collect() }
    }

    pub fn get(&self, d: Dart) -> Option<Dart> {
        self.pairs.binary_search_by_key(&d, |p| p.0).ok().map(|i| self.pairs[i].1)
    }

    pub fn inverse(&self) -> DartMap {
        let mut pairs: Vec<(Dart, Dart)> = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        pairs.sort_unstable();
        DartMap { reflected: self.reflected, pairs }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &DartMap) -> Option<DartMap> {
        let pairs = self
            .pairs
            .iter()
            .map(|&(a, b)| other.get(b).map(|c| (a, c)))
            .collect::<Option<Vec<_>>>()?;
        Some(DartMap { reflected: self.reflected != other.reflected, pairs })
    }

    /// Whether this is a bijection `source.darts → target.darts` that commutes
    /// with involutions and (possibly inverted) rotations.
    pub fn is_fatgraph_isomorphism(&self, source: &FatGraph, target: &FatGraph) -> bool {
        if self.pairs.len() != source.dart_count() || source.dart_count() != target.dart_count() {
            return false;
        }
        let mut seen = BTreeSet::new();
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            if source.labels[k] != a || !target.contains(b) || !seen.insert(b) {
                return false;
            }
        }
        let rot_inv = target.rot_inverse();
        self.pairs.iter().all(|&(a, b)| {
            let ib = target.idx(b);
            let inv_ok = self.get(source.opposite(a)) == Some(target.opposite(b));
            let rot_img = if self.reflected { target.label(rot_inv[ib]) } else { target.rotate(b) };
            inv_ok && self.get(source.rotate(a)) == Some(rot_img)
        })
    }

    /// Boundary cycle of `target` that the cycle of `source` containing `d` is carried to.
    pub fn image_cycle(&self, target: &FatGraph, d: Dart) -> Option<usize> {
        let img = self.get(d)?;
        Some(if self.reflected {
            target.boundary_of(target.opposite(img))
        } else {
            target.boundary_of(img)
        })
    }
}

/// All isomorphisms between two colored fat graphs, sorted lexicographically
/// by the sequence of images of the source darts in ascending order.
pub fn isomorphisms(a: &Spine, b: &Spine, allow_reflection: bool) -> Vec<DartMap> {
    let (ga, gb) = (&a.graph, &b.graph);
    if ga.dart_count() != gb.dart_count()
        || ga.vertex_count() != gb.vertex_count()
        || ga.boundary_count() != gb.boundary_count()
    {
        return Vec::new();
    }
    let rot_inv_b = gb.rot_inverse();
    let mut out = Vec::new();
    for target in 0..gb.dart_count() {
        for reflected in [false, true] {
            if reflected && !allow_reflection {
                continue;
            }
            let rot_b: &[usize] = if reflected { &rot_inv_b } else { &gb.rotation };
            if let Some(images) = extend_from_root(ga, gb, rot_b, target) {
                let colors_match = (0..ga.dart_count()).all(|i| {
                    let face_b = if reflected { gb.face_of[gb.involution[images[i]]] } else { gb.face_of[images[i]] };
                    a.colors.get(ga.face_of[i]) == b.colors.get(face_b)
                });
                if colors_match {
                    let pairs = (0..ga.dart_count()).map(|i| (ga.labels[i], gb.labels[images[i]])).collect();
                    out.push(DartMap { reflected, pairs });
                }
            }
        }
    }
    out.sort_by(|x, y| {
        let xi = x.pairs.iter().map(|p| p.1);
        let yi = y.pairs.iter().map(|p| p.1);
        xi.cmp(yi).then(x.reflected.cmp(&y.reflected))
    });
    out
}

/// Propagates `0 ↦ root` along rotation and involution; connectedness makes the result unique.
fn extend_from_root(ga: &FatGraph, gb: &FatGraph, rot_b: &[usize], root: usize) -> Option<Vec<usize>> {
    let n = ga.dart_count();
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];
    img[0] = root;
    used[root] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let j = img[i];
        for (src, dst) in [(ga.rotation[i], rot_b[j]), (ga.involution[i], gb.involution[j])] {
            if img[src] == usize::MAX {
                if used[dst] {
                    return None;
                }
                img[src] = dst;
                used[dst] = true;
                queue.push_back(src);
            } else if img[src] != dst {
                return None;
            }
        }
    }
    Some(img)
}

/// Least colored isomorphism from `a` to `b`, if any.
pub fn fatgraph_isomorphic(a: &Spine, b: &Spine, allow_reflection: bool) -> Option<DartMap> {
    isomorphisms(a, b, allow_reflection).into_iter().next()
}

/// Canonical code of a colored fat graph under orientation-preserving isomorphism,
/// along with the BFS dart order realizing it.
pub(crate) fn canonical_code(s: &Spine) -> (Vec<u32>, Vec<usize>) {
    let g = &s.graph;
    let n = g.dart_count();
    let color_code = |i: usize| match s.colors.get(g.face_of[i]) {
        None => 0,
        Some(Color::Entrance) => 1,
        Some(Color::Exit) => 2,
    };
    let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
    for root in 0..n {
        let mut label = vec![u32::MAX; n];
        let mut order = Vec::with_capacity(n);
        label[root] = 0;
        order.push(root);
        let mut k = 0;
        while k < order.len() {
            let d = order[k];
            for nb in [g.rotation[d], g.involution[d]] {
                if label[nb] == u32::MAX {
                    label[nb] = order.len() as u32;
                    order.push(nb);
                }
            }
            k += 1;
        }
        let mut code = Vec::with_capacity(3 * n);
        for &d in &order {
            code.push(label[g.rotation[d]]);
            code.push(label[g.involution[d]]);
            code.push(color_code(d));
        }
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            best = Some((code, order));
        }
    }
    best.expect("fat graphs have at least one dart")
}

/// Relabels `s` into its canonical form: darts `1..=n` in canonical BFS order.
pub fn canonical_spine(s: &Spine) -> Spine {
    let (_, order) = canonical_code(s);
    let mut new_label = vec![0; order.len()];
    for (k, &i) in order.iter().enumerate() {
        new_label[i] = k as Dart + 1;
    }
    let g = &s.graph;
    let mut rotation: Vec<Vec<Dart>> = g
        .vertices
        .iter()
        .map(|c| {
            let labels: Vec<Dart> = c.iter().map(|&i| new_label[i]).collect();
            let start = (0..labels.len()).min_by_key(|&k| labels[k]).unwrap();
            labels[start..].iter().chain(&labels[..start]).copied().collect()
        })
        .collect();
    rotation.sort_by_key(|c| c[0]);
    let mut edges: Vec<[Dart; 2]> = g
        .edges
        .iter()
        .map(|&[a, b]| {
            let (x, y) = (new_label[a], new_label[b]);
            [x.min(y), x.max(y)]
        })
        .collect();
    edges.sort_unstable();
    s.relabel(|d| new_label[g.idx(d)])
        .and_then(|r| {
            let graph = FatGraph::new(rotation, edges)?;
            let mut colors = BTreeMap::new();
            for (k, f) in graph.faces.iter().enumerate() {
                if let Some(c) = r.color_of_dart(graph.labels[f[0]]) {
                    colors.insert(k, c);
                }
            }
            Ok(Spine { graph, colors: BoundaryColoring(colors) })
        })
        .expect("relabeling a valid graph by a bijection stays valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two vertices joined by four edges; e_k has darts 2k-1 (at u) and 2k (at v).
    pub(crate) fn banana() -> FatGraph {
        FatGraph::new(vec![vec![1, 3, 5, 7], vec![8, 6, 4, 2]], vec![[1, 2], [3, 4], [5, 6], [7, 8]]).unwrap()
    }

    fn banana_spine() -> Spine {
        // cycles: 0 = {1,8} (e4e1), 1 = {2,3} (e1e2), 2 = {4,5} (e2e3), 3 = {6,7} (e3e4)
        let colors = BoundaryColoring::from_vec(vec![Color::Exit, Color::Entrance, Color::Exit, Color::Entrance]);
        Spine::new(banana(), colors)
    }

    #[test]
    fn single_loop_faces() {
        let g = FatGraph::new(vec![vec![1, 2]], vec![[1, 2]]).unwrap();
        let cycles = trace_boundary_cycles(&g);
        assert_eq!(cycles, vec![BoundaryCycle { darts: vec![1] }, BoundaryCycle { darts: vec![2] }]);
        let inv = surface_invariants(&g).unwrap();
        assert_eq!((inv.vertex_count, inv.edge_count, inv.euler_characteristic), (1, 1, 0));
        assert_eq!(inv.genus, 0);
    }

    #[test]
    fn banana_faces() {
        let cycles = trace_boundary_cycles(&banana());
        let darts: Vec<Vec<Dart>> = cycles.into_iter().map(|c| c.darts).collect();
        assert_eq!(darts, vec![vec![1, 8], vec![2, 3], vec![4, 5], vec![6, 7]]);
        let inv = surface_invariants(&banana()).unwrap();
        assert_eq!(
            inv,
            SurfaceInvariants { vertex_count: 2, edge_count: 4, boundary_count: 4, euler_characteristic: -2, genus: 0 }
        );
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(FatGraph::new(vec![vec![1, 2]], vec![[1, 1]]), Err(Error::Structure(_))));
        assert!(matches!(FatGraph::new(vec![vec![1, 2, 2]], vec![[1, 2]]), Err(Error::Structure(_))));
        assert!(matches!(FatGraph::new(vec![vec![1, 2, 3]], vec![[1, 2]]), Err(Error::Structure(_))));
        assert!(matches!(FatGraph::new(vec![vec![0, 2]], vec![[0, 2]]), Err(Error::Structure(_))));
        assert!(matches!(FatGraph::new(vec![vec![1, 2], vec![3, 4]], vec![[1, 2], [3, 4]]), Err(Error::Structure(_))));
        assert!(matches!(FatGraph::new(vec![vec![1, 2]], vec![[1, 3]]), Err(Error::Structure(_))));
    }

    #[test]
    fn banana_spine_passes() {
        let report = banana_spine().validate().unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn figure_eight_fails_even_boundary() {
        // one vertex, loops a = (1,2), b = (3,4), rotation (a+, a-, b+, b-)
        let g = FatGraph::new(vec![vec![1, 2, 3, 4]], vec![[1, 2], [3, 4]]).unwrap();
        let b = g.boundary_count();
        for mask in 0..(1u32 << b) {
            let colors = BoundaryColoring::from_vec(
                (0..b).map(|k| if mask >> k & 1 == 1 { Color::Exit } else { Color::Entrance }).collect(),
            );
            let report = validate_spine(&g, &colors).unwrap();
            assert!(!report.passed());
            assert!(!report.check_passed(CONDITION_EVEN_BOUNDARY));
        }
    }

    #[test]
    fn odd_valence_fails() {
        // theta graph: two trivalent vertices, three edges
        let g = FatGraph::new(vec![vec![1, 3, 5], vec![6, 4, 2]], vec![[1, 2], [3, 4], [5, 6]]).unwrap();
        let colors = BoundaryColoring::from_vec(vec![Color::Entrance; g.boundary_count()]);
        let report = validate_spine(&g, &colors).unwrap();
        assert!(!report.check_passed(CONDITION_EVEN_VALENCE));
    }

    #[test]
    fn partial_coloring_is_input_error() {
        let colors = BoundaryColoring::from_vec(vec![Color::Exit, Color::Entrance]);
        assert!(matches!(validate_spine(&banana(), &colors), Err(Error::Input(_))));
        let mut extra = banana_spine().colors;
        extra.0.insert(9, Color::Exit);
        assert!(matches!(validate_spine(&banana(), &extra), Err(Error::Input(_))));
    }

    #[test]
    fn isomorphic_to_self_and_relabeled() {
        let s = banana_spine();
        let id = fatgraph_isomorphic(&s, &s, false).unwrap();
        assert_eq!(id, DartMap::identity(&s.graph));
        let renamed = s.relabel(|d| 100 + ((d + 3) % 8)).unwrap();
        let m = fatgraph_isomorphic(&s, &renamed, false).unwrap();
        assert!(m.is_fatgraph_isomorphism(&s.graph, &renamed.graph));
    }

    #[test]
    fn recoloring_breaks_isomorphism() {
        let s = banana_spine();
        let mut swapped = s.clone();
        for c in swapped.colors.0.values_mut() {
            *c = c.opposite();
        }
        // rotating the banana by one edge swaps the two color classes
        assert!(fatgraph_isomorphic(&s, &swapped, false).is_some());
        let mut broken = s.clone();
        broken.colors.0.insert(0, Color::Entrance);
        assert!(fatgraph_isomorphic(&s, &broken, false).is_none());
    }

    #[test]
    fn reflection_flag() {
        // mirror image: every rotation cycle reversed
        let g = FatGraph::new(vec![vec![1, 3, 5, 7], vec![2, 4, 6, 8]], vec![[1, 2], [3, 4], [5, 6], [7, 8]]).unwrap();
        let plain = Spine::new(g.clone(), BoundaryColoring::default());
        let mirrored = Spine::new(
            FatGraph::new(vec![vec![7, 5, 3, 1], vec![8, 6, 4, 2]], g.edge_list()).unwrap(),
            BoundaryColoring::default(),
        );
        let refl = fatgraph_isomorphic(&plain, &mirrored, true).unwrap();
        assert!(refl.is_fatgraph_isomorphism(&plain.graph, &mirrored.graph));
    }

    #[test]
    fn canonical_form_is_relabeling_invariant() {
        let s = banana_spine();
        let renamed = s.relabel(|d| 20 - d).unwrap();
        assert_eq!(canonical_spine(&s), canonical_spine(&renamed));
        assert_eq!(canonical_code(&s).0, canonical_code(&renamed).0);
    }

    #[test]
    fn json_round_trip() {
        let s = banana_spine();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"darts":[1,2,3,4,5,6,7,8],"rotation":[[1,3,5,7],[8,6,4,2]],"edges":[[1,2],[3,4],[5,6],[7,8]],"colors":{"0":"EXIT","1":"ENTRANCE","2":"EXIT","3":"ENTRANCE"}}"#
        );
        let back: Spine = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
