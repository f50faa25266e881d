//! Equivalence of model-flow specifications under relabeling, fat-graph
//! isomorphism, basis sign choices and vertical Dehn twists.
//!
//! A witness from `s1` to `s2` consists of a piece bijection, a colored
//! fat-graph isomorphism per piece, a basis sign change `ε` per boundary torus
//! of `s1` and a pair of twist exponents `(l, r)` per pair of `s1`. For a pair
//! `(x, n)` of `s1` carried to the pair `(x', n')` of `s2` it asserts
//!
//! ```text
//! M2(x', n') = D(ε_n) · U(l) · M1(x, n) · U(r) · D(ε_x),   U(k) = [[1, k], [0, 1]]
//! bases2[x'] = bases1[x] ⊙ ε_x,   bases2[n'] = bases1[n] ⊙ ε_n
//! ```
//!
//! so basis flips are coordinate changes that rewrite bases and matrices
//! together. Dehn coefficients and orbit orientations must be carried over
//! unchanged by the induced vertex map.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fatgraph::{isomorphisms, DartMap, Spine};
use crate::model::{validate_spec, BasisChoice, GluingMatrix, ModelFlowSpec, ModelPiece, SpecOrientation, TorusRef};
use crate::sign::Sign;

/// Canonical representative of a gluing matrix modulo vertical twists and
/// basis sign flips on both sides: `c > 0`, `0 ≤ a, d < c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalizedMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub det: i64,
}

impl NormalizedMatrix {
    pub fn matrix(&self) -> GluingMatrix {
        GluingMatrix::new(self.a, self.b, self.c, self.d)
    }
}

impl fmt::Display for NormalizedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix().fmt(f)
    }
}

/// The least `(c, a, d, b)` over the sixteen sign variants of `m`, each with
/// `a` and `d` reduced modulo `c`.
pub fn normalize_matrix(m: &GluingMatrix) -> Result<NormalizedMatrix> {
    if m.c == 0 {
        return Err(Error::Input(format!("{m} is upper triangular")));
    }
    if !m.is_unimodular() {
        return Err(Error::Input(format!("{m} has determinant {}", m.det())));
    }
    let mut best: Option<NormalizedMatrix> = None;
    for [s1, s2, t1, t2] in sign_quads() {
        let c = (s2 * t1) as i128 * m.c as i128;
        if c <= 0 {
            continue;
        }
        let a = ((s1 * t1) as i128 * m.a as i128).rem_euclid(c);
        let d = ((s2 * t2) as i128 * m.d as i128).rem_euclid(c);
        let det = m.det() * (s1 * s2 * t1 * t2) as i128;
        // a·d − b·c = det
        let b = (a * d - det) / c;
        let n = NormalizedMatrix {
            a: a as i64,
            b: b as i64,
            c: c as i64,
            d: d as i64,
            det: det as i64,
        };
        let key = |n: &NormalizedMatrix| (n.c, n.a, n.d, n.b);
        if best.as_ref().is_none_or(|cur| key(&n) < key(cur)) {
            best = Some(n);
        }
    }
    Ok(best.expect("some sign variant has c > 0"))
}

fn sign_quads() -> impl Iterator<Item = [i64; 4]> {
    (0..16).map(|k| [0, 1, 2, 3].map(|bit| if k >> bit & 1 == 0 { 1 } else { -1 }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceMode {
    /// Bases and matrices carried over verbatim.
    Exact,
    /// Basis sign changes allowed.
    Isotopy,
    /// Basis sign changes and vertical twists on both sides of every pair.
    IsotopyWithTwists,
}

impl EquivalenceMode {
    pub const ALL: [EquivalenceMode; 3] =
        [EquivalenceMode::Exact, EquivalenceMode::Isotopy, EquivalenceMode::IsotopyWithTwists];
}

impl fmt::Display for EquivalenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivalenceMode::Exact => "exact",
            EquivalenceMode::Isotopy => "isotopy",
            EquivalenceMode::IsotopyWithTwists => "isotopy-with-twists",
        })
    }
}

impl FromStr for EquivalenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EquivalenceMode::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Input(format!("unknown mode {s:?}")))
    }
}

/// Twist exponents `(left, right)` of one pair; serialized as `[l, r]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Twist {
    pub left: i64,
    pub right: i64,
}

impl From<[i64; 2]> for Twist {
    fn from([left, right]: [i64; 2]) -> Self {
        Twist { left, right }
    }
}

impl From<Twist> for [i64; 2] {
    fn from(t: Twist) -> Self {
        [t.left, t.right]
    }
}

impl Twist {
    pub fn is_zero(&self) -> bool {
        self.left == 0 && self.right == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceWitness {
    /// Piece of `s1` ↦ piece of `s2`.
    pub pieces: BTreeMap<String, String>,
    /// Dart isomorphism per piece of `s1`.
    pub darts: BTreeMap<String, DartMap>,
    /// Basis sign change per boundary torus of `s1`.
    pub bases: BTreeMap<TorusRef, BasisChoice>,
    /// Twist exponents per pair index of `s1`.
    pub twists: BTreeMap<usize, Twist>,
}

impl EquivalenceWitness {
    /// Image of a boundary torus of `s1` in `s2`.
    pub fn torus_image(&self, s2: &ModelFlowSpec, t: &TorusRef, s1: &ModelFlowSpec) -> Option<TorusRef> {
        torus_image(s1, s2, &self.pieces, &self.darts, t)
    }
}

/// The identity witness of a spec onto itself, or `None` if `s` is not self-equivalent in `mode`.
pub fn identity_witness(s: &ModelFlowSpec, mode: EquivalenceMode) -> Option<EquivalenceWitness> {
    let pieces = s.pieces.iter().map(|p| (p.id.clone(), p.id.clone())).collect();
    let darts = s.pieces.iter().map(|p| (p.id.clone(), DartMap::identity(&p.spine.graph))).collect();
    complete_witness(s, s, pieces, darts, mode)
}

fn torus_image(
    s1: &ModelFlowSpec,
    s2: &ModelFlowSpec,
    pieces: &BTreeMap<String, String>,
    darts: &BTreeMap<String, DartMap>,
    t: &TorusRef,
) -> Option<TorusRef> {
    let p1 = s1.piece(&t.piece)?;
    let target = pieces.get(&t.piece)?;
    let p2 = s2.piece(target)?;
    let cycles = p1.spine.graph.boundary_cycles();
    let d = *cycles.get(t.cycle)?.darts.first()?;
    let k = darts.get(&t.piece)?.image_cycle(&p2.spine.graph, d)?;
    Some(TorusRef::new(target.clone(), k))
}

/// Solves `D_n · M2 · D_x = U(l) · M1 · U(r)` for the twist exponents.
fn solve_twist(m1: &GluingMatrix, m2: &GluingMatrix, eps_x: BasisChoice, eps_n: BasisChoice) -> Option<Twist> {
    let p = eps_n.as_matrix().mul(m2).mul(&eps_x.as_matrix());
    if p.c != m1.c {
        return None;
    }
    let (da, dd) = (p.a.checked_sub(m1.a)?, p.d.checked_sub(m1.d)?);
    if da % m1.c != 0 || dd % m1.c != 0 {
        return None;
    }
    let t = Twist { left: da / m1.c, right: dd / m1.c };
    (twisted(m1, t)? == p).then_some(t)
}

fn twisted(m: &GluingMatrix, t: Twist) -> Option<GluingMatrix> {
    GluingMatrix::twist(t.left).checked_mul(m)?.checked_mul(&GluingMatrix::twist(t.right))
}

/// The image of `m1` under basis changes and twists.
fn transport(m1: &GluingMatrix, eps_x: BasisChoice, eps_n: BasisChoice, t: Twist) -> Option<GluingMatrix> {
    eps_n.as_matrix().checked_mul(&twisted(m1, t)?)?.checked_mul(&eps_x.as_matrix())
}

/// Basis change and twist for one pair of `s1`, given where its tori go. `None` when the
/// images are not a pair of `s2` or the matrices are not related in `mode`.
fn pair_data(
    s1: &ModelFlowSpec,
    s2: &ModelFlowSpec,
    i: usize,
    image: (&TorusRef, &TorusRef),
    mode: EquivalenceMode,
) -> Option<(BasisChoice, BasisChoice, Twist)> {
    let (x, n) = &s1.pairing[i];
    let j = s2.pairing.iter().position(|(x2, _)| x2 == image.0)?;
    if &s2.pairing[j].1 != image.1 {
        return None;
    }
    let eps_x = s1.basis(x).times(s2.basis(image.0));
    let eps_n = s1.basis(n).times(s2.basis(image.1));
    let (m1, m2) = (s1.matrix(i)?, s2.matrix(j)?);
    let twist = match mode {
        EquivalenceMode::Exact => {
            (eps_x == BasisChoice::STANDARD && eps_n == BasisChoice::STANDARD && m1 == m2).then_some(Twist::default())?
        }
        EquivalenceMode::Isotopy => {
            (transport(&m1, eps_x, eps_n, Twist::default())? == m2).then_some(Twist::default())?
        }
        EquivalenceMode::IsotopyWithTwists => {
            if normalize_matrix(&m1).ok()? != normalize_matrix(&m2).ok()? {
                return None;
            }
            solve_twist(&m1, &m2, eps_x, eps_n)?
        }
    };
    Some((eps_x, eps_n, twist))
}

/// Whether `sigma` carries Dehn coefficients and orientations of `p1` onto those of `p2`.
fn piece_data_match(
    p1: &ModelPiece,
    p2: &ModelPiece,
    o1: &SpecOrientation,
    o2: &SpecOrientation,
    sigma: &DartMap,
) -> bool {
    let (g1, g2) = (&p1.spine.graph, &p2.spine.graph);
    let (a1, a2) = (&o1[&p1.id], &o2[&p2.id]);
    g1.rotation_cycles().iter().enumerate().all(|(v, cycle)| {
        let Some(img) = sigma.get(cycle[0]) else { return false };
        let w = g2.vertex_of(img);
        p1.dehn_at(v) == p2.dehn_at(w) && a1.sign(v) == a2.sign(w)
    })
}

/// Fills in basis changes and twists for given combinatorial maps, or `None`
/// when the maps do not extend to a witness in `mode`.
pub fn complete_witness(
    s1: &ModelFlowSpec,
    s2: &ModelFlowSpec,
    pieces: BTreeMap<String, String>,
    darts: BTreeMap<String, DartMap>,
    mode: EquivalenceMode,
) -> Option<EquivalenceWitness> {
    let mut bases = BTreeMap::new();
    let mut twists = BTreeMap::new();
    for (i, (x, n)) in s1.pairing.iter().enumerate() {
        let xi = torus_image(s1, s2, &pieces, &darts, x)?;
        let ni = torus_image(s1, s2, &pieces, &darts, n)?;
        let (ex, en, t) = pair_data(s1, s2, i, (&xi, &ni), mode)?;
        bases.insert(x.clone(), ex);
        bases.insert(n.clone(), en);
        twists.insert(i, t);
    }
    let w = EquivalenceWitness { pieces, darts, bases, twists };
    verify_witness(s1, s2, &w, mode).ok()?.then_some(w)
}

/// Inverse witness from `s2` back to `s1`.
pub fn invert_witness(
    s1: &ModelFlowSpec,
    s2: &ModelFlowSpec,
    w: &EquivalenceWitness,
    mode: EquivalenceMode,
) -> Option<EquivalenceWitness> {
    let pieces = w.pieces.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    let darts = w.darts.iter().map(|(a, m)| (w.pieces.get(a).cloned(), m.inverse())).collect::<Vec<_>>();
    let darts = darts.into_iter().map(|(k, m)| Some((k?, m))).collect::<Option<BTreeMap<_, _>>>()?;
    complete_witness(s2, s1, pieces, darts, mode)
}

/// Composite witness `s1 → s3` of `w12: s1 → s2` and `w23: s2 → s3`.
pub fn compose_witnesses(
    s1: &ModelFlowSpec,
    s3: &ModelFlowSpec,
    w12: &EquivalenceWitness,
    w23: &EquivalenceWitness,
    mode: EquivalenceMode,
) -> Option<EquivalenceWitness> {
    let mut pieces = BTreeMap::new();
    let mut darts = BTreeMap::new();
    for (a, b) in &w12.pieces {
        let c = w23.pieces.get(b)?;
        pieces.insert(a.clone(), c.clone());
        darts.insert(a.clone(), w12.darts.get(a)?.then(w23.darts.get(b)?)?);
    }
    complete_witness(s1, s3, pieces, darts, mode)
}

/// Searches for the least witness from `s1` to `s2`.
///
/// Pieces of `s1` are matched in id order against unused pieces of `s2` in id
/// order, each with its isomorphisms in lexicographic order; pairs are checked
/// as soon as both of their pieces are placed.
pub fn spec_equivalent(
    s1: &ModelFlowSpec,
    s2: &ModelFlowSpec,
    mode: EquivalenceMode,
    allow_reflection: bool,
) -> Result<Option<EquivalenceWitness>> {
    for (name, s) in [("first", s1), ("second", s2)] {
        if let Some(f) = validate_spec(s).failures().next() {
            return Err(Error::Input(format!("{name} spec fails {} at {}: {}", f.check, f.subject, f.detail)));
        }
    }
    if s1.pieces.len() != s2.pieces.len() || s1.pairing.len() != s2.pairing.len() {
        return Ok(None);
    }
    let mut order1: Vec<&ModelPiece> = s1.pieces.iter().collect();
    order1.sort_by(|a, b| a.id.cmp(&b.id));
    let mut order2: Vec<&ModelPiece> = s2.pieces.iter().collect();
    order2.sort_by(|a, b| a.id.cmp(&b.id));
    let search = Search {
        s1,
        s2,
        o1: s1.orientation()?,
        o2: s2.orientation()?,
        order1,
        order2,
        mode,
        allow_reflection,
    };
    let mut state = State::default();
    Ok(search.extend(&mut state))
}

struct Search<'a> {
    s1: &'a ModelFlowSpec,
    s2: &'a ModelFlowSpec,
    o1: SpecOrientation,
    o2: SpecOrientation,
    order1: Vec<&'a ModelPiece>,
    order2: Vec<&'a ModelPiece>,
    mode: EquivalenceMode,
    allow_reflection: bool,
}

#[derive(Default)]
struct State {
    pieces: BTreeMap<String, String>,
    darts: BTreeMap<String, DartMap>,
    used: BTreeSet<String>,
}

impl Search<'_> {
    fn extend(&self, st: &mut State) -> Option<EquivalenceWitness> {
        let depth = st.pieces.len();
        if depth == self.order1.len() {
            return complete_witness(self.s1, self.s2, st.pieces.clone(), st.darts.clone(), self.mode);
        }
        let p1 = self.order1[depth];
        for p2 in &self.order2 {
            if st.used.contains(&p2.id) || !spines_comparable(&p1.spine, &p2.spine) {
                continue;
            }
            for sigma in isomorphisms(&p1.spine, &p2.spine, self.allow_reflection) {
                if !piece_data_match(p1, p2, &self.o1, &self.o2, &sigma) {
                    continue;
                }
                st.pieces.insert(p1.id.clone(), p2.id.clone());
                st.darts.insert(p1.id.clone(), sigma);
                st.used.insert(p2.id.clone());
                if self.placed_pairs_ok(st, &p1.id) {
                    if let Some(w) = self.extend(st) {
                        return Some(w);
                    }
                }
                st.pieces.remove(&p1.id);
                st.darts.remove(&p1.id);
                st.used.remove(&p2.id);
            }
        }
        None
    }

    /// Checks every pair touching `newest` whose other side is already placed.
    fn placed_pairs_ok(&self, st: &State, newest: &str) -> bool {
        self.s1.pairing.iter().enumerate().all(|(i, (x, n))| {
            if x.piece != newest && n.piece != newest {
                return true;
            }
            if !st.pieces.contains_key(&x.piece) || !st.pieces.contains_key(&n.piece) {
                return true;
            }
            let image = |t| torus_image(self.s1, self.s2, &st.pieces, &st.darts, t);
            match (image(x), image(n)) {
                (Some(xi), Some(ni)) => pair_data(self.s1, self.s2, i, (&xi, &ni), self.mode).is_some(),
                _ => false,
            }
        })
    }
}

fn spines_comparable(a: &Spine, b: &Spine) -> bool {
    a.graph.dart_count() == b.graph.dart_count() && a.graph.vertex_count() == b.graph.vertex_count()
}

/// Replays `w`: true iff it carries `s1` onto `s2` exactly within the moves of `mode`.
///
/// A witness whose keys do not cover the pieces, tori and pairs of `s1`, or
/// specs of different sizes, are input errors.
pub fn verify_witness(
    s1: &ModelFlowSpec,
    s2: &ModelFlowSpec,
    w: &EquivalenceWitness,
    mode: EquivalenceMode,
) -> Result<bool> {
    check_shape(s1, s2, w)?;
    let (o1, o2) = (s1.orientation()?, s2.orientation()?);

    let targets: BTreeSet<&String> = w.pieces.values().collect();
    if targets.len() != w.pieces.len() || targets.iter().any(|t| s2.piece(t).is_none()) {
        return Ok(false);
    }
    for p1 in &s1.pieces {
        let p2 = s2.piece(&w.pieces[&p1.id]).expect("checked above");
        let sigma = &w.darts[&p1.id];
        if !sigma.is_fatgraph_isomorphism(&p1.spine.graph, &p2.spine.graph) {
            return Ok(false);
        }
        let colors_kept = p1.spine.graph.darts().iter().all(|&d| {
            let k = sigma.image_cycle(&p2.spine.graph, d);
            k.is_some() && p1.spine.color_of_dart(d) == p2.spine.color_of_cycle(k.unwrap())
        });
        if !colors_kept || !piece_data_match(p1, p2, &o1, &o2, sigma) {
            return Ok(false);
        }
    }

    let mut hit = BTreeSet::new();
    for (i, (x, n)) in s1.pairing.iter().enumerate() {
        let (Some(xi), Some(ni)) = (w.torus_image(s2, x, s1), w.torus_image(s2, n, s1)) else {
            return Ok(false);
        };
        let Some(j) = s2.pairing.iter().position(|(x2, n2)| *x2 == xi && *n2 == ni) else {
            return Ok(false);
        };
        if !hit.insert(j) {
            return Ok(false);
        }
        let (ex, en, t) = (w.bases[x], w.bases[n], w.twists[&i]);
        if s1.basis(x).times(ex) != s2.basis(&xi) || s1.basis(n).times(en) != s2.basis(&ni) {
            return Ok(false);
        }
        let allowed = match mode {
            EquivalenceMode::Exact => ex == BasisChoice::STANDARD && en == BasisChoice::STANDARD && t.is_zero(),
            EquivalenceMode::Isotopy => t.is_zero(),
            EquivalenceMode::IsotopyWithTwists => true,
        };
        let (m1, m2) = (s1.matrix(i).expect("shape checked"), s2.matrix(j).expect("pairs have matrices"));
        if !allowed || transport(&m1, ex, en, t) != Some(m2) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_shape(s1: &ModelFlowSpec, s2: &ModelFlowSpec, w: &EquivalenceWitness) -> Result<()> {
    if s1.pieces.len() != s2.pieces.len() || s1.pairing.len() != s2.pairing.len() {
        return Err(Error::Input("specs have different numbers of pieces or pairs".into()));
    }
    for (name, s) in [("first", s1), ("second", s2)] {
        if let Some(f) = validate_spec(s).failures().next() {
            return Err(Error::Input(format!("{name} spec fails {} at {}: {}", f.check, f.subject, f.detail)));
        }
    }
    let ids: BTreeSet<&String> = s1.pieces.iter().map(|p| &p.id).collect();
    if w.pieces.keys().collect::<BTreeSet<_>>() != ids || w.darts.keys().collect::<BTreeSet<_>>() != ids {
        return Err(Error::Input("witness piece maps do not cover exactly the pieces of the first spec".into()));
    }
    let tori: BTreeSet<TorusRef> = s1.boundary_tori().into_iter().collect();
    if w.bases.keys().cloned().collect::<BTreeSet<_>>() != tori {
        return Err(Error::Input("witness basis changes do not cover exactly the tori of the first spec".into()));
    }
    if w.twists.keys().copied().collect::<BTreeSet<_>>() != (0..s1.pairing.len()).collect() {
        return Err(Error::Input("witness twists do not cover exactly the pairs of the first spec".into()));
    }
    Ok(())
}

/// `s` with every gluing matrix replaced by `U(left) · M · U(right)`.
pub fn twist_all(s: &ModelFlowSpec, left: i64, right: i64) -> Result<ModelFlowSpec> {
    let mut out = s.clone();
    for m in out.matrices.values_mut() {
        *m = twisted(m, Twist { left, right }).ok_or_else(|| Error::Capacity("twisted matrix overflows".into()))?;
    }
    Ok(out)
}

/// `s` with the basis of torus `t` multiplied by `eps` and the adjacent matrix rewritten to match.
pub fn change_basis(s: &ModelFlowSpec, t: &TorusRef, eps: BasisChoice) -> Result<ModelFlowSpec> {
    let i = s.pair_of(t).ok_or_else(|| Error::Input(format!("torus {t} is not paired")))?;
    let mut out = s.clone();
    out.bases.insert(t.clone(), s.basis(t).times(eps));
    let m = s.matrix(i).ok_or_else(|| Error::Input(format!("pair {i} has no matrix")))?;
    let (ex, en) = if s.pairing[i].0 == *t {
        (eps, BasisChoice::STANDARD)
    } else {
        (BasisChoice::STANDARD, eps)
    };
    out.matrices.insert(i, transport(&m, ex, en, Twist::default()).expect("sign changes never overflow"));
    Ok(out)
}

/// Spec whose seeds realize the given orientation (seed at vertex 0 of each piece).
pub fn with_orientation(s: &ModelFlowSpec, o: &SpecOrientation) -> ModelFlowSpec {
    let mut out = s.clone();
    for (id, a) in o {
        if let Some(seed) = out.orientation_seed.get_mut(id) {
            seed.vertex = 0;
            seed.sign = a.0.first().copied().unwrap_or(Sign::Plus);
        }
    }
    out
}
