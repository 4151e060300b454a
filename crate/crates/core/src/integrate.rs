//! Integration of modules: the bridge document holding equivalence axioms
//! and imports, and materialized merges with per-axiom provenance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::align::MappingSet;
use crate::error::IntegrateError;
use crate::model::{Annotations, Axiom, EntityId, Module, Ontology, OntologyId};
use crate::obo::{module_file_name, serialize_with_header, ParsedObo};

pub fn bridge_file_name(seed_label: &str) -> String {
    format!("{seed_label}_bridge.obo")
}

pub fn merged_file_name(seed_label: &str) -> String {
    format!("{seed_label}_merged.obo")
}

/// Equivalence axioms induced by mappings, plus the module files they tie
/// together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgeOntology {
    pub label: String,
    /// Module file names, in canonical ontology order.
    pub imports: Vec<String>,
    /// One `Equivalent` axiom per mapping, sorted canonically.
    pub axioms: Vec<Axiom>,
}

impl BridgeOntology {
    pub fn id(&self) -> OntologyId {
        OntologyId::new(format!("{}_bridge", self.label))
    }

    /// OBO rendering; imports become `import:` header lines.
    pub fn to_obo(&self) -> String {
        let o = Ontology::from_axioms(self.id(), [], self.axioms.iter().cloned());
        let header: Vec<(String, String)> = self
            .imports
            .iter()
            .map(|i| ("import".to_string(), i.clone()))
            .collect();
        serialize_with_header(&o, &header)
    }

    /// Reads a bridge back from a parsed document: `import:` header lines and
    /// every `Equivalent` axiom.
    pub fn from_parsed(label: &str, parsed: &ParsedObo) -> Self {
        BridgeOntology {
            label: label.to_string(),
            imports: parsed
                .document
                .header_values("import")
                .map(str::to_string)
                .collect(),
            axioms: parsed
                .ontology
                .axioms()
                .iter()
                .filter(|a| matches!(a, Axiom::Equivalent(..)))
                .cloned()
                .collect(),
        }
    }
}

/// Builds the bridge: one equivalence per mapping, endpoints unchanged.
pub fn build_bridge(
    modules: &[Module],
    maps: &MappingSet,
    seed_label: &str,
) -> Result<BridgeOntology, IntegrateError> {
    let declared = |ontology: &OntologyId, id: &EntityId| {
        modules
            .iter()
            .any(|m| m.source() == ontology && m.classes().contains_key(id))
    };
    let mut axioms = Vec::with_capacity(maps.mappings.len());
    for m in &maps.mappings {
        for (ontology, id) in [
            (&m.source_ontology, &m.source_id),
            (&m.target_ontology, &m.target_id),
        ] {
            if !declared(ontology, id) {
                return Err(IntegrateError::UnknownEndpoint {
                    ontology: ontology.clone(),
                    id: id.clone(),
                });
            }
        }
        axioms.push(Axiom::equivalent(m.source_id.clone(), m.target_id.clone()));
    }
    axioms.sort();
    let ids: BTreeSet<&OntologyId> = modules.iter().map(Module::source).collect();
    Ok(BridgeOntology {
        label: seed_label.to_string(),
        imports: ids
            .into_iter()
            .map(|id| module_file_name(seed_label, id))
            .collect(),
        axioms,
    })
}

/// Where a merged axiom came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Bridge,
    Source(OntologyId),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Bridge => f.write_str("BRIDGE"),
            Provenance::Source(id) => write!(f, "{id}"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MergedAxiom {
    pub axiom: Axiom,
    pub provenance: BTreeSet<Provenance>,
}

impl MergedAxiom {
    pub fn is_bridge(&self) -> bool {
        self.provenance.contains(&Provenance::Bridge)
    }
}

/// Two modules declared the same entity under different names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictNote {
    pub entity: EntityId,
    pub kept_from: OntologyId,
    pub kept_name: String,
    pub other_from: OntologyId,
    pub other_name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergedOntology {
    pub id: OntologyId,
    pub classes: BTreeMap<EntityId, Annotations>,
    pub relations: BTreeMap<EntityId, Annotations>,
    /// Sorted by axiom, one entry per distinct axiom.
    pub axioms: Vec<MergedAxiom>,
    pub conflicts: Vec<ConflictNote>,
}

impl MergedOntology {
    pub fn axiom_set(&self) -> BTreeSet<&Axiom> {
        self.axioms.iter().map(|m| &m.axiom).collect()
    }

    /// Drops the given axioms; provenance of the rest is unchanged.
    pub fn without(&self, removals: &[Axiom]) -> MergedOntology {
        let removals: BTreeSet<&Axiom> = removals.iter().collect();
        MergedOntology {
            axioms: self
                .axioms
                .iter()
                .filter(|m| !removals.contains(&m.axiom))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    pub fn to_ontology(&self) -> Ontology {
        Ontology::assemble(
            self.id.clone(),
            self.classes.clone(),
            self.relations.clone(),
            self.axioms.iter().map(|m| m.axiom.clone()),
        )
        .0
    }

    /// Rebuilds a merge from a serialized one. Provenance is not recorded in
    /// OBO, so `Equivalent` axioms are attributed to the bridge and all
    /// others to the document itself.
    pub fn from_ontology(o: &Ontology) -> Self {
        MergedOntology {
            id: o.id().clone(),
            classes: o.classes().clone(),
            relations: o.relations().clone(),
            axioms: o
                .axioms()
                .iter()
                .map(|a| MergedAxiom {
                    axiom: a.clone(),
                    provenance: BTreeSet::from([match a {
                        Axiom::Equivalent(..) => Provenance::Bridge,
                        _ => Provenance::Source(o.id().clone()),
                    }]),
                })
                .collect(),
            conflicts: Vec::new(),
        }
    }

    pub fn conflicts_tsv(&self) -> String {
        let mut out =
            String::from("entity\tkept_ontology\tkept_name\tother_ontology\tother_name\n");
        for c in &self.conflicts {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                c.entity, c.kept_from, c.kept_name, c.other_from, c.other_name
            ));
        }
        out
    }
}

fn merge_annotations(
    target: &mut BTreeMap<EntityId, (OntologyId, Annotations)>,
    id: &EntityId,
    from: &OntologyId,
    ann: &Annotations,
    conflicts: &mut Vec<ConflictNote>,
) {
    let Some((kept_from, kept)) = target.get_mut(id) else {
        target.insert(id.clone(), (from.clone(), ann.clone()));
        return;
    };
    match (&kept.name, &ann.name) {
        (None, Some(n)) => kept.name = Some(n.clone()),
        (Some(k), Some(n)) if k != n => conflicts.push(ConflictNote {
            entity: id.clone(),
            kept_from: kept_from.clone(),
            kept_name: k.clone(),
            other_from: from.clone(),
            other_name: n.clone(),
        }),
        _ => {}
    }
    if kept.definition.is_none() {
        kept.definition = ann.definition.clone();
    }
    for s in ann.synonyms() {
        kept.push_synonym(s.clone());
    }
    for alt in ann.alt_ids() {
        kept.push_alt_id(alt.clone());
    }
}

fn merge_into(id: OntologyId, parts: &[&Module], bridge_axioms: &[&Axiom]) -> MergedOntology {
    let mut parts = parts.to_vec();
    parts.sort_by(|a, b| a.source().cmp(b.source()));
    let mut classes = BTreeMap::new();
    let mut relations = BTreeMap::new();
    let mut conflicts = Vec::new();
    let mut axioms: BTreeMap<Axiom, BTreeSet<Provenance>> = BTreeMap::new();
    for m in &parts {
        for (e, ann) in m.classes() {
            merge_annotations(&mut classes, e, m.source(), ann, &mut conflicts);
        }
        for (e, ann) in m.relations() {
            merge_annotations(&mut relations, e, m.source(), ann, &mut conflicts);
        }
        for a in m.axioms() {
            axioms
                .entry(a.clone())
                .or_default()
                .insert(Provenance::Source(m.source().clone()));
        }
    }
    for a in bridge_axioms {
        axioms
            .entry((*a).clone())
            .or_default()
            .insert(Provenance::Bridge);
    }
    MergedOntology {
        id,
        classes: classes.into_iter().map(|(k, (_, a))| (k, a)).collect(),
        relations: relations.into_iter().map(|(k, (_, a))| (k, a)).collect(),
        axioms: axioms
            .into_iter()
            .map(|(axiom, provenance)| MergedAxiom { axiom, provenance })
            .collect(),
        conflicts,
    }
}

/// Union of all module axioms and bridge axioms, with declarations unioned.
/// Name clashes keep the name from the canonically first ontology and are
/// recorded as conflict notes; synonyms and alternative ids are unioned.
pub fn merge(parts: &[Module], bridge: &BridgeOntology) -> MergedOntology {
    let refs: Vec<&Module> = parts.iter().collect();
    let bridge_axioms: Vec<&Axiom> = bridge.axioms.iter().collect();
    merge_into(
        OntologyId::new(format!("{}_merged", bridge.label)),
        &refs,
        &bridge_axioms,
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMerge {
    pub pair: (OntologyId, OntologyId),
    pub merged: MergedOntology,
}

/// `M_i ∪ M_j` for every unordered pair of modules, each with the bridge
/// axioms whose endpoints are both classes of the pair.
pub fn pairwise_merges(
    modules: &[Module],
    bridge: &BridgeOntology,
) -> Result<Vec<PairMerge>, IntegrateError> {
    if modules.len() < 2 {
        return Err(IntegrateError::TooFewModules(modules.len()));
    }
    let mut order: Vec<&Module> = modules.iter().collect();
    order.sort_by(|a, b| a.source().cmp(b.source()));
    let mut out = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            let (a, b) = (order[i], order[j]);
            let inside = |e: &EntityId| a.classes().contains_key(e) || b.classes().contains_key(e);
            let bridge_axioms: Vec<&Axiom> = bridge
                .axioms
                .iter()
                .filter(|ax| match ax {
                    Axiom::Equivalent(x, y) => inside(x) && inside(y),
                    _ => false,
                })
                .collect();
            let id = OntologyId::new(format!("{}+{}", a.source(), b.source()));
            out.push(PairMerge {
                pair: (a.source().clone(), b.source().clone()),
                merged: merge_into(id, &[a, b], &bridge_axioms),
            });
        }
    }
    Ok(out)
}
