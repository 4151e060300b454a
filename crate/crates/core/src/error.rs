use thiserror::Error;

use crate::model::{EntityId, OntologyId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid entity identifier {0:?}")]
    InvalidEntityId(String),
    #[error("a conjunction needs at least two distinct conjuncts, got {0}")]
    TooFewConjuncts(usize),
    #[error("malformed axiom {0:?}")]
    MalformedAxiom(String),
    #[error("empty term")]
    EmptyTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OboError {
    #[error("line {line}: stanza has no id")]
    MissingId { line: usize },
    #[error("line {line}: malformed tag line {text:?}")]
    MalformedLine { line: usize, text: String },
    #[error("line {line}: {id} has a single intersection_of line, at least two are required")]
    DanglingIntersection { id: EntityId, line: usize },
}

impl OboError {
    pub fn line(&self) -> usize {
        match self {
            OboError::MissingId { line }
            | OboError::MalformedLine { line, .. }
            | OboError::DanglingIntersection { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("the term set is empty")]
    EmptyTermSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("signature enrichment did not converge within {max_rounds} rounds")]
    MaxRoundsExceeded { max_rounds: usize },
    #[error("no ontologies to process")]
    NoOntologies,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrateError {
    #[error("mapping endpoint {id} is not a class of module {ontology}")]
    UnknownEndpoint { ontology: OntologyId, id: EntityId },
    #[error("pairwise merging needs at least two modules, got {0}")]
    TooFewModules(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("{0} is not an unsatisfiable class")]
    NotAClash(EntityId),
    #[error("no explanations to repair")]
    NoExplanations,
    #[error("{remaining} unsatisfiable classes remain after {iterations} repair iterations")]
    RepairIncomplete { remaining: usize, iterations: usize },
}
