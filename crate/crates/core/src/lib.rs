//! Builds a topic ontology from several OBO sources: seed-term matching,
//! ⊥-locality module extraction with cross-ontology signature enrichment,
//! Levenshtein-based class alignment, integration through equivalence bridge
//! axioms, and told-clash detection with explanations and repair plans.

pub mod align;
pub mod error;
pub mod extract;
pub mod integrate;
pub mod matching;
pub mod model;
pub mod obo;
pub mod sat;

pub use error::{
    AlignError, ExtractError, IntegrateError, MatchError, ModelError, OboError, SatError,
};
pub use model::{
    Annotations, Axiom, ClassExpr, EntityId, EntityKind, Module, Ontology, OntologyId, Signature,
    Synonym, SynonymScope, TermSet,
};
