//! Combinatorial model flows on graph manifolds: fat-graph spines, model
//! pieces glued along tori, the quotient flow graph and equivalence search.

pub mod census;
pub mod equivalence;
pub mod error;
pub mod fatgraph;
pub mod fixtures;
pub mod flowgraph;
pub mod model;
pub mod report;
pub mod sign;

pub use census::{enumerate_spines, spec_census, CensusOptions};
pub use equivalence::{
    normalize_matrix, spec_equivalent, verify_witness, EquivalenceMode, EquivalenceWitness, NormalizedMatrix,
};
pub use error::{Error, Result};
pub use fatgraph::{
    canonical_spine, fatgraph_isomorphic, surface_invariants, trace_boundary_cycles, validate_spine, BoundaryColoring,
    BoundaryCycle, Color, Dart, DartMap, FatGraph, Spine, SurfaceInvariants,
};
pub use flowgraph::{
    build_flow_graph, is_transitive, path_sign, periodic_words, validate_itinerary, FlowGraph, ItineraryWord,
    OrbitId, PeriodicWord, TorusId,
};
pub use model::{
    orientation_classes, propagate_orientations, validate_piece, validate_spec, BasisChoice, DehnCoefficient,
    GluingMatrix, ModelFlowSpec, ModelPiece, OrientationAssignment, OrientationSeed, SpecOrientation, TorusRef,
};
pub use report::{Finding, ValidationReport};
pub use sign::Sign;
