//! Seed-term matching: which classes of an ontology mention a term.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::MatchError;
use crate::extract::{enrich_terms, EnrichFields};
use crate::model::{EntityId, Module, Ontology, OntologyId, Signature, TermSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatchMode {
    /// Term occurs anywhere in the field.
    #[default]
    Substring,
    /// Term occurs delimited by non-alphanumeric characters or string ends.
    Word,
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "substring" => Ok(MatchMode::Substring),
            "word" => Ok(MatchMode::Word),
            other => Err(format!(
                "unknown match mode {other:?} (expected substring|word)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchField {
    Id,
    Name,
    Def,
    Synonym,
    AltId,
}

impl MatchField {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchField::Id => "ID",
            MatchField::Name => "NAME",
            MatchField::Def => "DEF",
            MatchField::Synonym => "SYNONYM",
            MatchField::AltId => "ALT_ID",
        }
    }
}

impl fmt::Display for MatchField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hit {
    pub entity: EntityId,
    pub field: MatchField,
    pub term: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchReport {
    pub ontology: OntologyId,
    pub matched: Signature,
    pub hits: Vec<Hit>,
}

impl MatchReport {
    /// TSV with a header line: `entity`, `field`, `term`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("entity\tfield\tterm\n");
        for h in &self.hits {
            out.push_str(&format!("{}\t{}\t{}\n", h.entity, h.field, h.term));
        }
        out
    }
}

/// Finds `needle` in `haystack` (already ASCII-lowercased).
pub fn contains_term(haystack: &str, needle: &str, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Substring => haystack.contains(needle),
        MatchMode::Word => {
            let bytes = haystack.as_bytes();
            haystack.match_indices(needle).any(|(start, m)| {
                let end = start + m.len();
                let before = start == 0 || !bytes[start - 1].is_ascii_alphanumeric();
                let after = end == bytes.len() || !bytes[end].is_ascii_alphanumeric();
                before && after
            })
        }
    }
}

/// Matches every non-obsolete class of `o` against the terms of `t`.
pub fn match_terms(o: &Ontology, t: &TermSet, mode: MatchMode) -> Result<MatchReport, MatchError> {
    if t.is_empty() {
        return Err(MatchError::EmptyTermSet);
    }
    let mut hits = BTreeSet::new();
    for (id, ann) in o.classes() {
        if ann.is_obsolete {
            continue;
        }
        let mut fields: Vec<(MatchField, String)> = vec![(MatchField::Id, id.to_string())];
        if let Some(n) = &ann.name {
            fields.push((MatchField::Name, n.clone()));
        }
        if let Some(d) = &ann.definition {
            fields.push((MatchField::Def, d.clone()));
        }
        for s in ann.synonyms() {
            fields.push((MatchField::Synonym, s.text.clone()));
        }
        for alt in ann.alt_ids() {
            fields.push((MatchField::AltId, alt.to_string()));
        }
        for (field, text) in &mut fields {
            text.make_ascii_lowercase();
            for term in t.iter() {
                if contains_term(text, term, mode) {
                    hits.insert(Hit {
                        entity: id.clone(),
                        field: *field,
                        term: term.to_string(),
                    });
                }
            }
        }
    }
    let matched = hits.iter().map(|h| h.entity.clone()).collect();
    Ok(MatchReport {
        ontology: o.id().clone(),
        matched,
        hits: hits.into_iter().collect(),
    })
}

/// True when enriching `t` with every module changes no ontology's matched
/// signature, i.e. `Match(T) = T` holds for these modules.
pub fn match_fixpoint_test(
    ontologies: &[Ontology],
    t: &TermSet,
    modules: &[Module],
    mode: MatchMode,
    fields: EnrichFields,
) -> bool {
    let mut enriched = t.clone();
    for m in modules {
        enriched = enrich_terms(&enriched, m, fields);
    }
    if enriched == *t {
        return true;
    }
    ontologies.iter().all(|o| {
        let before = match_terms(o, t, mode).map(|r| r.matched);
        let after = match_terms(o, &enriched, mode).map(|r| r.matched);
        before == after
    })
}
