//! Model pieces `P(Σ, X, D)` and full model-flow specifications.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fatgraph::{Color, Dart, Spine};
use crate::report::ValidationReport;
use crate::sign::Sign;

/// Filling slope `p·meridian + q·fiber` at a vertical orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct DehnCoefficient {
    pub p: i64,
    pub q: i64,
}

impl DehnCoefficient {
    /// The coefficient of an orbit left unsurgered.
    pub const UNSURGERED: DehnCoefficient = DehnCoefficient { p: 1, q: 0 };

    pub fn new(p: i64, q: i64) -> Self {
        DehnCoefficient { p, q }
    }

    pub fn is_valid(&self) -> bool {
        gcd(self.p.unsigned_abs(), self.q.unsigned_abs()) == 1
    }
}

impl From<[i64; 2]> for DehnCoefficient {
    fn from([p, q]: [i64; 2]) -> Self {
        DehnCoefficient { p, q }
    }
}

impl From<DehnCoefficient> for [i64; 2] {
    fn from(c: DehnCoefficient) -> Self {
        [c.p, c.q]
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One periodic Seifert piece: a colored spine plus a Dehn coefficient per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPiece {
    pub id: String,
    pub spine: Spine,
    /// Keyed by vertex index (position in the rotation list).
    pub dehn: BTreeMap<usize, DehnCoefficient>,
}

impl ModelPiece {
    /// A piece with every vertical orbit unsurgered.
    pub fn unsurgered(id: impl Into<String>, spine: Spine) -> ModelPiece {
        let dehn = (0..spine.graph.vertex_count()).map(|v| (v, DehnCoefficient::UNSURGERED)).collect();
        ModelPiece { id: id.into(), spine, dehn }
    }

    pub fn dehn_at(&self, v: usize) -> Option<DehnCoefficient> {
        self.dehn.get(&v).copied()
    }
}

/// A boundary torus: boundary cycle `cycle` of piece `piece`. Written `piece.cycle`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusRef {
    pub piece: String,
    pub cycle: usize,
}

impl TorusRef {
    pub fn new(piece: impl Into<String>, cycle: usize) -> Self {
        TorusRef { piece: piece.into(), cycle }
    }
}

impl fmt::Display for TorusRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.piece, self.cycle)
    }
}

impl FromStr for TorusRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (piece, cycle) =
            s.rsplit_once('.').ok_or_else(|| Error::Input(format!("torus reference {s:?} is not of the form piece.cycle")))?;
        let cycle = cycle.parse().map_err(|_| Error::Input(format!("torus reference {s:?} has a non-numeric cycle index")))?;
        Ok(TorusRef { piece: piece.to_string(), cycle })
    }
}

impl Serialize for TorusRef {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TorusRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Signs of the vertical and horizontal basis vectors of one boundary torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[Sign; 2]", into = "[Sign; 2]")]
pub struct BasisChoice {
    pub vertical: Sign,
    pub horizontal: Sign,
}

impl BasisChoice {
    pub const STANDARD: BasisChoice = BasisChoice { vertical: Sign::Plus, horizontal: Sign::Plus };

    pub fn all() -> [BasisChoice; 4] {
        use Sign::*;
        [(Plus, Plus), (Plus, Minus), (Minus, Plus), (Minus, Minus)]
            .map(|(vertical, horizontal)| BasisChoice { vertical, horizontal })
    }

    /// Componentwise product.
    pub fn times(self, other: BasisChoice) -> BasisChoice {
        BasisChoice { vertical: self.vertical * other.vertical, horizontal: self.horizontal * other.horizontal }
    }

    pub fn as_matrix(self) -> GluingMatrix {
        GluingMatrix::new(self.vertical.to_i64(), 0, 0, self.horizontal.to_i64())
    }
}

impl From<[Sign; 2]> for BasisChoice {
    fn from([vertical, horizontal]: [Sign; 2]) -> Self {
        BasisChoice { vertical, horizontal }
    }
}

impl From<BasisChoice> for [Sign; 2] {
    fn from(b: BasisChoice) -> Self {
        [b.vertical, b.horizontal]
    }
}

/// Integer 2×2 matrix `[[a, b], [c, d]]` in (vertical, horizontal) bases,
/// from the exit torus to the entrance torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[[i64; 2]; 2]", into = "[[i64; 2]; 2]")]
pub struct GluingMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GluingMatrix {
    pub const IDENTITY: GluingMatrix = GluingMatrix { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        GluingMatrix { a, b, c, d }
    }

    /// Vertical twist `[[1, n], [0, 1]]`.
    pub const fn twist(n: i64) -> Self {
        GluingMatrix { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn det(&self) -> i128 {
        self.a as i128 * self.d as i128 - self.b as i128 * self.c as i128
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.c == 0
    }

    /// `|det| = 1` and not upper triangular.
    pub fn is_admissible(&self) -> bool {
        self.is_unimodular() && !self.is_upper_triangular()
    }

    pub fn checked_mul(&self, o: &GluingMatrix) -> Option<GluingMatrix> {
        let dot = |x: i64, y: i64, z: i64, w: i64| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some(GluingMatrix {
            a: dot(self.a, o.a, self.b, o.c)?,
            b: dot(self.a, o.b, self.b, o.d)?,
            c: dot(self.c, o.a, self.d, o.c)?,
            d: dot(self.c, o.b, self.d, o.d)?,
        })
    }

    /// Product, panicking on overflow.
    pub fn mul(&self, o: &GluingMatrix) -> GluingMatrix {
        self.checked_mul(o).expect("gluing matrix product overflowed")
    }
}

impl From<[[i64; 2]; 2]> for GluingMatrix {
    fn from([[a, b], [c, d]]: [[i64; 2]; 2]) -> Self {
        GluingMatrix { a, b, c, d }
    }
}

impl From<GluingMatrix> for [[i64; 2]; 2] {
    fn from(m: GluingMatrix) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl fmt::Display for GluingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Direction of one vertical orbit per piece; serialized as `["vertex", ±1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientationSeed {
    pub vertex: usize,
    pub sign: Sign,
}

impl OrientationSeed {
    pub fn new(vertex: usize, sign: Sign) -> Self {
        OrientationSeed { vertex, sign }
    }
}

impl Serialize for OrientationSeed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.vertex.to_string(), self.sign).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrientationSeed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (vertex, sign) = <(String, Sign)>::deserialize(d)?;
        let vertex = vertex
            .parse()
            .map_err(|_| serde::de::Error::custom(format!("seed vertex {vertex:?} is not a vertex index")))?;
        Ok(OrientationSeed { vertex, sign })
    }
}

/// Direction of every vertical orbit of one piece relative to its fiber orientation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientationAssignment(pub Vec<Sign>);

impl OrientationAssignment {
    pub fn sign(&self, v: usize) -> Sign {
        self.0[v]
    }

    pub fn negated(&self) -> OrientationAssignment {
        OrientationAssignment(self.0.iter().map(|&s| -s).collect())
    }
}

/// Orientation assignments of all pieces, keyed by piece id.
pub type SpecOrientation = BTreeMap<String, OrientationAssignment>;

/// The full combinatorial datum of a model flow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFlowSpec {
    pub pieces: Vec<ModelPiece>,
    pub bases: BTreeMap<TorusRef, BasisChoice>,
    /// `(exit torus, entrance torus)`; the index is the pair id.
    pub pairing: Vec<(TorusRef, TorusRef)>,
    /// Keyed by pair index.
    pub matrices: BTreeMap<usize, GluingMatrix>,
    pub orientation_seed: BTreeMap<String, OrientationSeed>,
}

impl ModelFlowSpec {
    pub fn piece(&self, id: &str) -> Option<&ModelPiece> {
        self.pieces.iter().find(|p| p.id == id)
    }

    pub fn piece_index(&self, id: &str) -> Option<usize> {
        self.pieces.iter().position(|p| p.id == id)
    }

    pub fn color_of(&self, t: &TorusRef) -> Option<Color> {
        self.piece(&t.piece)?.spine.color_of_cycle(t.cycle)
    }

    /// Every boundary torus of every piece, in piece order then cycle order.
    pub fn boundary_tori(&self) -> Vec<TorusRef> {
        self.pieces
            .iter()
            .flat_map(|p| (0..p.spine.graph.boundary_count()).map(move |k| TorusRef::new(p.id.clone(), k)))
            .collect()
    }

    /// Index of the pair containing `t`, on either side.
    pub fn pair_of(&self, t: &TorusRef) -> Option<usize> {
        self.pairing.iter().position(|(x, n)| x == t || n == t)
    }

    pub fn matrix(&self, pair: usize) -> Option<GluingMatrix> {
        self.matrices.get(&pair).copied()
    }

    pub fn basis(&self, t: &TorusRef) -> BasisChoice {
        self.bases.get(t).copied().unwrap_or(BasisChoice::STANDARD)
    }

    /// Propagated orientation of every piece.
    pub fn orientation(&self) -> Result<SpecOrientation> {
        self.pieces
            .iter()
            .map(|p| {
                let seed = self
                    .orientation_seed
                    .get(&p.id)
                    .ok_or_else(|| Error::Input(format!("piece {} has no orientation seed", p.id)))?;
                Ok((p.id.clone(), propagate_orientations(p, *seed)?))
            })
            .collect()
    }

    /// Copy with one piece's seed sign reversed.
    pub fn with_negated_seed(&self, piece: &str) -> ModelFlowSpec {
        let mut s = self.clone();
        if let Some(seed) = s.orientation_seed.get_mut(piece) {
            seed.sign = -seed.sign;
        }
        s
    }

    /// Copy in which every dart of `piece` is renamed through `f`. Cycle
    /// indices in bases and pairing are rewritten to follow the renaming.
    pub fn relabel_darts(&self, piece: &str, f: impl Fn(Dart) -> Dart) -> Result<ModelFlowSpec> {
        let idx = self.piece_index(piece).ok_or_else(|| Error::Input(format!("unknown piece {piece}")))?;
        let old = &self.pieces[idx].spine;
        let new = old.relabel(&f)?;
        let cycle_map: Vec<usize> = old
            .graph
            .boundary_cycles()
            .iter()
            .map(|c| new.graph.boundary_of(f(c.darts[0])))
            .collect();
        let remap = |t: &TorusRef| {
            if t.piece == piece && t.cycle < cycle_map.len() {
                TorusRef::new(piece, cycle_map[t.cycle])
            } else {
                t.clone()
            }
        };
        let mut out = self.clone();
        out.pieces[idx].spine = new;
        out.bases = self.bases.iter().map(|(t, b)| (remap(t), *b)).collect();
        out.pairing = self.pairing.iter().map(|(x, n)| (remap(x), remap(n))).collect();
        Ok(out)
    }

    /// Copy with a piece renamed everywhere it is referenced.
    pub fn rename_piece(&self, from: &str, to: &str) -> ModelFlowSpec {
        let rename = |t: &TorusRef| {
            if t.piece == from {
                TorusRef::new(to, t.cycle)
            } else {
                t.clone()
            }
        };
        let mut out = self.clone();
        for p in &mut out.pieces {
            if p.id == from {
                p.id = to.to_string();
            }
        }
        out.bases = self.bases.iter().map(|(t, b)| (rename(t), *b)).collect();
        out.pairing = self.pairing.iter().map(|(x, n)| (rename(x), rename(n))).collect();
        out.orientation_seed = self
            .orientation_seed
            .iter()
            .map(|(k, v)| (if k == from { to.to_string() } else { k.clone() }, *v))
            .collect();
        out
    }
}

pub const CHECK_SPINE: &str = "spine";
pub const CHECK_DEHN: &str = "dehn-coefficient";
pub const CHECK_PIECE_IDS: &str = "piece-ids";
pub const CHECK_PAIRING: &str = "pairing";
pub const CHECK_MATRIX_UNIMODULAR: &str = "matrix-unimodular";
pub const CHECK_MATRIX_NOT_UPPER: &str = "matrix-not-upper-triangular";
pub const CHECK_MATRICES_TOTAL: &str = "matrices-total";
pub const CHECK_BASES: &str = "bases";
pub const CHECK_ORIENTATION: &str = "orientation";

/// Spine conditions plus coprimality and totality of the Dehn coefficients.
pub fn validate_piece(p: &ModelPiece) -> ValidationReport {
    let mut report = ValidationReport::new();
    match p.spine.validate() {
        Ok(r) => report.findings.extend(r.findings),
        Err(e) => report.fail(CHECK_SPINE, "", e.to_string()),
    }
    let n_v = p.spine.graph.vertex_count();
    for v in 0..n_v {
        let subject = format!("vertex {v}");
        match p.dehn.get(&v) {
            None => report.fail(CHECK_DEHN, subject, "missing"),
            Some(c) if !c.is_valid() => {
                report.fail(CHECK_DEHN, subject, format!("({}, {}) is not a coprime pair", c.p, c.q))
            }
            Some(_) => report.pass(CHECK_DEHN, subject),
        }
    }
    for &v in p.dehn.keys().filter(|&&v| v >= n_v) {
        report.fail(CHECK_DEHN, format!("vertex {v}"), "no such vertex");
    }
    report
}

/// Extends `seed` along fat-graph edges with `sign(head) = −sign(tail)`.
pub fn propagate_orientations(p: &ModelPiece, seed: OrientationSeed) -> Result<OrientationAssignment> {
    let g = &p.spine.graph;
    let n_v = g.vertex_count();
    if seed.vertex >= n_v {
        return Err(Error::Input(format!("seed vertex {} does not exist in piece {}", seed.vertex, p.id)));
    }
    let mut adj = vec![Vec::new(); n_v];
    for e in 0..g.edge_count() {
        let [x, y] = g.edge_endpoints(e);
        if x == y {
            return Err(Error::Inconsistent { piece: p.id.clone(), cycle: vec![x] });
        }
        adj[x].push(y);
        adj[y].push(x);
    }
    let mut sign: Vec<Option<Sign>> = vec![None; n_v];
    let mut parent = vec![usize::MAX; n_v];
    sign[seed.vertex] = Some(seed.sign);
    let mut queue = VecDeque::from([seed.vertex]);
    while let Some(x) = queue.pop_front() {
        let sx = sign[x].unwrap();
        for &y in &adj[x] {
            match sign[y] {
                None => {
                    sign[y] = Some(-sx);
                    parent[y] = x;
                    queue.push_back(y);
                }
                Some(sy) if sy == sx => {
                    return Err(Error::Inconsistent { piece: p.id.clone(), cycle: odd_cycle(&parent, x, y) });
                }
                Some(_) => {}
            }
        }
    }
    sign.into_iter()
        .collect::<Option<Vec<_>>>()
        .map(OrientationAssignment)
        .ok_or_else(|| Error::Structure(format!("piece {} is not connected", p.id)))
}

/// Closes the tree paths from `x` and `y` to their common ancestor with the edge `x–y`.
fn odd_cycle(parent: &[usize], x: usize, y: usize) -> Vec<usize> {
    let path = |mut v: usize| {
        let mut out = vec![v];
        while parent[v] != usize::MAX {
            v = parent[v];
            out.push(v);
        }
        out
    };
    let (px, py) = (path(x), path(y));
    let on_y: BTreeSet<usize> = py.iter().copied().collect();
    let meet = *px.iter().find(|v| on_y.contains(v)).unwrap();
    let mut cycle: Vec<usize> = px.iter().copied().take_while(|&v| v != meet).collect();
    cycle.push(meet);
    let back: Vec<usize> = py.iter().copied().take_while(|&v| v != meet).collect();
    cycle.extend(back.into_iter().rev());
    cycle
}

/// The `2^k` orientation classes of a spec with `k` pieces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationClasses {
    pub count: u64,
    pub representatives: Vec<SpecOrientation>,
}

const MAX_CLASS_PIECES: usize = 16;

/// Enumerates the per-piece sign flips of the propagated orientation.
///
/// Pieces are taken in id order; the first piece varies slowest and the
/// propagated assignment (`+`) comes before its negation (`−`).
pub fn orientation_classes(s: &ModelFlowSpec) -> Result<OrientationClasses> {
    let base = s.orientation()?;
    let k = base.len();
    if k > MAX_CLASS_PIECES {
        return Err(Error::Capacity(format!("{k} pieces give more than 2^{MAX_CLASS_PIECES} classes")));
    }
    let ids: Vec<&String> = base.keys().collect();
    let count = 1u64 << k;
    let representatives = (0..count)
        .map(|mask| {
            ids.iter()
                .enumerate()
                .map(|(i, id)| {
                    let flip = mask >> (k - 1 - i) & 1 == 1;
                    let a = &base[*id];
                    ((*id).clone(), if flip { a.negated() } else { a.clone() })
                })
                .collect()
        })
        .collect();
    Ok(OrientationClasses { count, representatives })
}

/// All conditions on the combinatorial data of a model flow, itemized.
pub fn validate_spec(s: &ModelFlowSpec) -> ValidationReport {
    let mut report = ValidationReport::new();

    let mut ids = BTreeSet::new();
    let dup: Vec<&str> = s.pieces.iter().filter(|p| !ids.insert(p.id.as_str())).map(|p| p.id.as_str()).collect();
    if dup.is_empty() {
        report.pass(CHECK_PIECE_IDS, "");
    } else {
        report.fail(CHECK_PIECE_IDS, "", format!("duplicate ids {dup:?}"));
    }

    for p in &s.pieces {
        report.merge(&format!("piece {}", p.id), validate_piece(p));
    }

    check_pairing(s, &mut report);

    for (i, (x, n)) in s.pairing.iter().enumerate() {
        let subject = format!("pair {i} ({x} -> {n})");
        match s.matrices.get(&i) {
            None => report.fail(CHECK_MATRICES_TOTAL, subject, "no matrix"),
            Some(m) => {
                if m.is_unimodular() {
                    report.pass(CHECK_MATRIX_UNIMODULAR, subject.clone());
                } else {
                    report.fail(CHECK_MATRIX_UNIMODULAR, subject.clone(), format!("{m} has determinant {}", m.det()));
                }
                if m.is_upper_triangular() {
                    report.fail(CHECK_MATRIX_NOT_UPPER, subject, format!("{m} maps fibers to fibers"));
                } else {
                    report.pass(CHECK_MATRIX_NOT_UPPER, subject);
                }
            }
        }
    }
    for &k in s.matrices.keys().filter(|&&k| k >= s.pairing.len()) {
        report.fail(CHECK_MATRICES_TOTAL, format!("pair {k}"), "matrix for a pair that does not exist");
    }

    let tori: BTreeSet<TorusRef> = s.boundary_tori().into_iter().collect();
    for t in &tori {
        if !s.bases.contains_key(t) {
            report.fail(CHECK_BASES, format!("torus {t}"), "no basis choice");
        }
    }
    for t in s.bases.keys().filter(|t| !tori.contains(*t)) {
        report.fail(CHECK_BASES, format!("torus {t}"), "no such boundary torus");
    }
    if report.check_passed(CHECK_BASES) {
        report.pass(CHECK_BASES, "");
    }

    for p in &s.pieces {
        let subject = format!("piece {}", p.id);
        match s.orientation_seed.get(&p.id) {
            None => report.fail(CHECK_ORIENTATION, subject, "no orientation seed"),
            Some(seed) => match propagate_orientations(p, *seed) {
                Ok(_) => report.pass(CHECK_ORIENTATION, subject),
                Err(e) => report.fail(CHECK_ORIENTATION, subject, e.to_string()),
            },
        }
    }
    for id in s.orientation_seed.keys().filter(|id| !ids.contains(id.as_str())) {
        report.fail(CHECK_ORIENTATION, format!("piece {id}"), "seed for a piece that does not exist");
    }
    report
}

fn check_pairing(s: &ModelFlowSpec, report: &mut ValidationReport) {
    let before = report.findings.len();
    let mut used = BTreeSet::new();
    for (i, (x, n)) in s.pairing.iter().enumerate() {
        for (t, want) in [(x, Color::Exit), (n, Color::Entrance)] {
            match s.piece(&t.piece) {
                None => report.fail(CHECK_PAIRING, format!("pair {i}"), format!("{t}: unknown piece")),
                Some(p) if t.cycle >= p.spine.graph.boundary_count() => {
                    report.fail(CHECK_PAIRING, format!("pair {i}"), format!("{t}: no such boundary cycle"))
                }
                Some(_) if s.color_of(t) != Some(want) => {
                    report.fail(CHECK_PAIRING, format!("pair {i}"), format!("{t} is not an {want} torus"))
                }
                Some(_) => {}
            }
            if !used.insert(t.clone()) {
                report.fail(CHECK_PAIRING, format!("pair {i}"), format!("{t} is paired more than once"));
            }
        }
    }
    for p in &s.pieces {
        for k in 0..p.spine.graph.boundary_count() {
            let t = TorusRef::new(p.id.clone(), k);
            if !used.contains(&t) {
                report.fail(CHECK_PAIRING, format!("torus {t}"), "not paired");
            }
        }
    }
    if report.findings.len() == before {
        report.pass(CHECK_PAIRING, "");
    }
}
