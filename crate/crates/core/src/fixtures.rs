//! Small hand-checkable inputs shared by tests, benches and documentation.

use std::collections::BTreeMap;

use crate::fatgraph::{BoundaryColoring, Color, FatGraph, Spine};
use crate::model::{BasisChoice, DehnCoefficient, GluingMatrix, ModelFlowSpec, ModelPiece, OrientationSeed, TorusRef};
use crate::sign::Sign;

/// Two vertices `u = [1,3,5,7]`, `v = [8,6,4,2]` joined by four edges;
/// edge `k` has darts `2k+1` at `u` and `2k+2` at `v`.
pub fn banana_graph() -> FatGraph {
    FatGraph::new(vec![vec![1, 3, 5, 7], vec![8, 6, 4, 2]], vec![[1, 2], [3, 4], [5, 6], [7, 8]])
        .expect("banana graph is well formed")
}

/// The banana graph with its four boundary cycles `{1,8}, {2,3}, {4,5}, {6,7}`
/// colored EXIT, ENTRANCE, EXIT, ENTRANCE.
pub fn banana_spine() -> Spine {
    use Color::*;
    Spine::new(banana_graph(), BoundaryColoring::from_vec(vec![Exit, Entrance, Exit, Entrance]))
}

/// Unsurgered banana piece.
pub fn banana_piece(id: &str) -> ModelPiece {
    ModelPiece::unsurgered(id, banana_spine())
}

/// The matrix used by every fixture gluing: swaps fiber and section.
pub const SWAP: GluingMatrix = GluingMatrix::new(0, 1, 1, 0);

/// A spec with standard bases, the swap matrix on every pair and seed `(0, +)` on every piece.
pub fn standard_spec(pieces: Vec<ModelPiece>, pairing: Vec<(TorusRef, TorusRef)>) -> ModelFlowSpec {
    let mut bases = BTreeMap::new();
    for p in &pieces {
        for k in 0..p.spine.graph.boundary_count() {
            bases.insert(TorusRef::new(p.id.clone(), k), BasisChoice::STANDARD);
        }
    }
    let matrices = (0..pairing.len()).map(|i| (i, SWAP)).collect();
    let orientation_seed = pieces.iter().map(|p| (p.id.clone(), OrientationSeed::new(0, Sign::Plus))).collect();
    ModelFlowSpec { pieces, bases, pairing, matrices, orientation_seed }
}

/// One banana piece with exit 2 glued to entrance 1 (`T1`) and exit 0 to entrance 3 (`T2`).
pub fn banana_self_glued() -> ModelFlowSpec {
    let t = |k| TorusRef::new("banana", k);
    standard_spec(vec![banana_piece("banana")], vec![(t(2), t(1)), (t(0), t(3))])
}

/// Two banana pieces `a` and `b`, each exit of one glued to an entrance of the other.
pub fn two_banana_spec() -> ModelFlowSpec {
    let a = |k| TorusRef::new("a", k);
    let b = |k| TorusRef::new("b", k);
    standard_spec(
        vec![banana_piece("a"), banana_piece("b")],
        vec![(a(0), b(1)), (a(2), b(3)), (b(0), a(1)), (b(2), a(3))],
    )
}

/// [`two_banana_spec`] with surgered orbits `a.v0 = (2, 1)` and `b.v0 = (3, 1)`,
/// which rules out every symmetry exchanging pieces or vertices.
pub fn marked_two_banana_spec() -> ModelFlowSpec {
    let mut s = two_banana_spec();
    s.pieces[0].dehn.insert(0, DehnCoefficient::new(2, 1));
    s.pieces[1].dehn.insert(0, DehnCoefficient::new(3, 1));
    s
}
