//! Exact finite-level machinery for Bratteli diagrams, finite equivalence
//! relations and the AF structures linking them.
//!
//! Everything works on truncations: diagrams are stored to a finite depth,
//! relations live on finite point sets, and all counts are exact.

pub mod absorption;
pub mod af;
pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod groupoid;
pub mod io;
pub mod matrix;
pub mod relations;
pub mod report;
pub mod transforms;

pub use diagram::{
    BratteliDiagram, DiagramQuotient, Edge, ExtractedSubdiagram, FinitePath, PathBijection, PathCounts, Strictness,
    Subdiagram, DEFAULT_ENUMERATION_CAP,
};
pub use error::{Error, Result};
pub use matrix::IncidenceMatrix;
pub use report::{Severity, ValidationReport, Violation};
pub use transforms::{
    ensure_capacity, microscope, simplicity_window, telescope, thinness_bound, truncate, CapacityRequest, RecodingMap,
    RecodingStep, SimplicityWindows,
};
pub use groupoid::{groupoid_refine, GraphId, GroupoidPartition, PairLabels, Slot, Tower};
pub use relations::{
    class_size_check, find_transversal, join, relation_from_group_action, transverse_filtration, FiniteEqRel,
    Permutation, TransversalCheck, TransversalFailure, TransversalWitness, UnionFind,
};
pub use af::{
    af_classes_at, check_compiled, diagram_from_filtration, transverse_diagrams, AfClasses, CompiledChain, PathCoding,
    TransverseDiagrams,
};
pub use absorption::{
    build_absorption_diagram, capacity_request, check_capacity_conditions, embedding_from_subdiagram, plant_replicas,
    plant_y, shift_map_alpha, two_point_demo, verify_star, AbsorptionResult, AbsorptionScaffold, Embedding, StarOptions,
    StarReport, Template,
};
